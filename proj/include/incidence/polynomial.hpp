#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "errors.hpp"
#include "field.hpp"
#include "geometry.hpp"
#include "matrix.hpp"

namespace incidence {

using boost::multiprecision::cpp_int;
using Exponent = std::vector<unsigned>;

inline cpp_int binomial(unsigned n, unsigned k)
{
    if (k > n) return 0;
    k = std::min(k, n - k);
    cpp_int r = 1;
    for (unsigned i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

enum class BasisMode { homogeneous, up_to_degree };

inline constexpr std::size_t default_basis_cap = 100000;

/// Monomials in `vars` variables, graded lexicographic: ascending total
/// degree, and within one degree descending exponent tuples (x_1^D first).
class MonomialBasis {
public:
    MonomialBasis(unsigned vars, unsigned degree, BasisMode mode, std::size_t cap = default_basis_cap)
        : vars_(vars), degree_(degree), mode_(mode)
    {
        if (vars == 0) throw error("monomial basis needs at least one variable");
        cpp_int expected = mode == BasisMode::homogeneous ? binomial(vars + degree - 1, vars - 1)
                                                          : binomial(vars + degree, vars);
        if (expected > cap)
            throw basis_too_large("monomial basis of size " + expected.str() + " exceeds cap " + std::to_string(cap));
        unsigned lo = mode == BasisMode::homogeneous ? degree : 0;
        for (unsigned deg = lo; deg <= degree; ++deg) {
            Exponent e(vars, 0);
            append_degree(e, 0, deg);
        }
        require(cpp_int(exponents_.size()) == expected, "monomial count differs from the binomial formula");
    }

    unsigned vars() const noexcept { return vars_; }
    unsigned degree() const noexcept { return degree_; }
    BasisMode mode() const noexcept { return mode_; }
    std::size_t size() const noexcept { return exponents_.size(); }
    const std::vector<Exponent>& exponents() const noexcept { return exponents_; }
    const Exponent& operator[](std::size_t i) const { return exponents_[i]; }

    std::optional<std::size_t> index_of(const Exponent& e) const
    {
        auto it = std::find(exponents_.begin(), exponents_.end(), e);
        if (it == exponents_.end()) return std::nullopt;
        return static_cast<std::size_t>(it - exponents_.begin());
    }

private:
    void append_degree(Exponent& e, unsigned pos, unsigned remaining)
    {
        if (pos + 1 == vars_) {
            e[pos] = remaining;
            exponents_.push_back(e);
            return;
        }
        for (unsigned k = remaining + 1; k-- > 0;) {
            e[pos] = k;
            append_degree(e, pos + 1, remaining - k);
        }
        e[pos] = 0;
    }

    unsigned vars_;
    unsigned degree_;
    BasisMode mode_;
    std::vector<Exponent> exponents_;
};

inline MonomialBasis enumerate_monomials(unsigned vars, unsigned degree, BasisMode mode)
{
    return MonomialBasis(vars, degree, mode);
}

inline Fe eval_monomial(const PrimeField& f, const Exponent& e, const Vec& x)
{
    Fe r = 1;
    for (std::size_t i = 0; i < e.size(); ++i)
        if (e[i]) r = f.mul(r, f.pow(x[i], e[i]));
    return r;
}

/// Sparse polynomial over F_q: (exponent, coefficient) terms in graded
/// lexicographic order, zero coefficients omitted.
struct Polynomial {
    unsigned vars = 0;
    std::vector<std::pair<Exponent, Fe>> terms;

    static Polynomial from_basis(const MonomialBasis& basis, const Vec& coeffs)
    {
        Polynomial p;
        p.vars = basis.vars();
        for (std::size_t i = 0; i < basis.size(); ++i)
            if (coeffs[i] != 0) p.terms.emplace_back(basis[i], coeffs[i]);
        return p;
    }

    // <n, x> - b
    static Polynomial linear_form(const PrimeField& f, const Hyperplane& h)
    {
        Polynomial p;
        p.vars = static_cast<unsigned>(h.dim());
        if (h.offset() != 0) p.terms.emplace_back(Exponent(p.vars, 0), f.neg(h.offset()));
        for (unsigned i = 0; i < p.vars; ++i) {
            if (h.normal()[i] == 0) continue;
            Exponent e(p.vars, 0);
            e[i] = 1;
            p.terms.emplace_back(e, h.normal()[i]);
        }
        return p;
    }

    bool is_zero() const noexcept { return terms.empty(); }

    int degree() const noexcept
    {
        int d = -1;
        for (const auto& [e, c] : terms) {
            unsigned s = 0;
            for (auto x : e) s += x;
            d = std::max(d, static_cast<int>(s));
        }
        return d;
    }

    Fe evaluate(const PrimeField& f, const Vec& x) const
    {
        Fe acc = 0;
        for (const auto& [e, c] : terms) acc = f.add(acc, f.mul(c, eval_monomial(f, e, x)));
        return acc;
    }

    bool operator==(const Polynomial&) const = default;
};

/// Rows: directions (canonical representatives) or affine points; columns:
/// basis monomials.
inline Matrix evaluation_matrix(const PrimeField& f, const std::vector<Vec>& points, const MonomialBasis& basis)
{
    Matrix m(points.size(), basis.size());
    for (std::size_t r = 0; r < points.size(); ++r) {
        if (points[r].size() != basis.vars()) throw error("evaluation point has wrong arity");
        for (std::size_t c = 0; c < basis.size(); ++c) m(r, c) = eval_monomial(f, basis[c], points[r]);
    }
    return m;
}

inline Matrix evaluation_matrix(const PrimeField& f, const std::vector<Direction>& dirs, const MonomialBasis& basis)
{
    std::vector<Vec> reps;
    reps.reserve(dirs.size());
    for (const auto& d : dirs) reps.push_back(d.coords());
    return evaluation_matrix(f, reps, basis);
}

struct Algebraic {
    Polynomial polynomial; // nonzero, vanishes on the input set
};

struct Large {
    std::size_t set_size = 0;  // |N|
    std::size_t dimension = 0; // dim of the polynomial space
};

using Dichotomy = std::variant<Algebraic, Large>;

namespace detail {

inline Dichotomy kernel_dichotomy(const PrimeField& f, const std::vector<Vec>& pts, const MonomialBasis& basis)
{
    auto ev = evaluation_matrix(f, pts, basis);
    auto kernel = kernel_basis(ev, f);
    if (kernel.empty()) {
        require(pts.size() >= basis.size(), "injective evaluation map on fewer points than monomials");
        return Large{pts.size(), basis.size()};
    }
    auto poly = Polynomial::from_basis(basis, kernel.front());
    require(!poly.is_zero(), "kernel vector produced the zero polynomial");
    for (const auto& x : pts) require(poly.evaluate(f, x) == 0, "kernel polynomial does not vanish on the set");
    return Algebraic{std::move(poly)};
}

} // namespace detail

/// Degree-D forms on a projective direction set: either a nonzero form
/// vanishing on every direction, or an injective evaluation map.
inline Dichotomy dichotomy(const PrimeField& f, const std::vector<Direction>& dirs, unsigned degree)
{
    if (degree < 1) throw error("dichotomy: degree must be >= 1");
    if (dirs.empty()) throw empty_input("dichotomy: empty direction set");
    MonomialBasis basis(static_cast<unsigned>(dirs.front().size()), degree, BasisMode::homogeneous);
    std::vector<Vec> reps;
    for (const auto& d : dirs) reps.push_back(d.coords());
    return detail::kernel_dichotomy(f, reps, basis);
}

/// u_j^{deg R} R(sigma_j(u)): lifts a polynomial on chart j back to a form.
inline Polynomial homogenize(const Polynomial& r, std::size_t chart)
{
    Polynomial out;
    out.vars = r.vars + 1;
    const int deg = r.degree();
    for (const auto& [e, c] : r.terms) {
        Exponent lifted;
        unsigned total = 0;
        for (std::size_t i = 0, k = 0; i < out.vars; ++i) {
            if (i == chart) {
                lifted.push_back(0);
                continue;
            }
            lifted.push_back(e[k]);
            total += e[k++];
        }
        lifted[chart] = static_cast<unsigned>(deg) - total;
        out.terms.emplace_back(std::move(lifted), c);
    }
    // restore graded lex order
    MonomialBasis order(out.vars, static_cast<unsigned>(std::max(deg, 0)), BasisMode::homogeneous);
    std::sort(out.terms.begin(), out.terms.end(), [&](const auto& a, const auto& b) {
        return *order.index_of(a.first) < *order.index_of(b.first);
    });
    return out;
}

struct AffineDichotomy {
    std::size_t chart = 0;
    std::vector<Direction> in_chart; // N_j
    Dichotomy result;
    std::optional<Polynomial> homogenized; // present on the algebraic branch
};

/// Cor. to the projective dichotomy on the affine chart u_j != 0: runs the
/// at-most-D dichotomy in d-1 variables on sigma_j(N_j) and lifts an
/// algebraic answer back to a form vanishing on N_j.
inline AffineDichotomy affine_dichotomy(const PrimeField& f, const std::vector<Direction>& dirs, std::size_t chart,
                                        unsigned degree)
{
    if (degree < 1) throw error("affine_dichotomy: degree must be >= 1");
    AffineDichotomy out;
    out.chart = chart;
    std::vector<Vec> images;
    for (const auto& d : dirs)
        if (auto img = affine_chart(f, d, chart)) {
            out.in_chart.push_back(d);
            images.push_back(std::move(*img));
        }
    if (images.empty()) throw empty_input("affine_dichotomy: no direction lies in chart " + std::to_string(chart));
    MonomialBasis basis(static_cast<unsigned>(dirs.front().size() - 1), degree, BasisMode::up_to_degree);
    out.result = detail::kernel_dichotomy(f, images, basis);
    if (auto* alg = std::get_if<Algebraic>(&out.result)) {
        auto lifted = homogenize(alg->polynomial, chart);
        require(lifted.degree() <= static_cast<int>(degree), "homogenized polynomial exceeds degree D");
        for (const auto& d : out.in_chart)
            require(lifted.evaluate(f, d.coords()) == 0, "homogenized polynomial does not vanish on N_j");
        out.homogenized = std::move(lifted);
    }
    return out;
}

/// Smallest D >= 1 with C(d-1+D, d-1) > n.
inline unsigned minimal_degree(std::uint64_t n, unsigned d)
{
    unsigned D = 1;
    while (binomial(d - 1 + D, d - 1) <= n) ++D;
    return D;
}

struct VeroneseDependence {
    Vec coefficients; // a_H, one per input hyperplane
};
struct TooFew {};
using VeroneseResult = std::variant<VeroneseDependence, TooFew>;

/// Coefficients of (<n, x> - b)^D in the at-most-D basis of d variables.
inline Vec veronese_image(const PrimeField& f, const Hyperplane& h, const MonomialBasis& basis)
{
    const auto d = static_cast<unsigned>(h.dim());
    // repeated multiplication by the linear form, dense over the basis
    std::vector<std::pair<Exponent, Fe>> cur{{Exponent(d, 0), 1}};
    auto lin = Polynomial::linear_form(f, h);
    for (unsigned step = 0; step < basis.degree(); ++step) {
        std::map<Exponent, Fe> next;
        for (const auto& [e1, c1] : cur)
            for (const auto& [e2, c2] : lin.terms) {
                Exponent e = e1;
                for (unsigned i = 0; i < d; ++i) e[i] += e2[i];
                auto& slot = next[e];
                slot = f.add(slot, f.mul(c1, c2));
            }
        cur.assign(next.begin(), next.end());
    }
    Vec out(basis.size(), 0);
    for (const auto& [e, c] : cur) {
        auto idx = basis.index_of(e);
        require(idx.has_value(), "veronese expansion left the basis");
        out[*idx] = f.add(out[*idx], c);
    }
    return out;
}

/// Zero-set class recorded with a certificate: hyperplanes are affine
/// obstructions, higher-degree zero sets general algebraic ones.
inline const char* obstruction_class(const Polynomial& F)
{
    const int deg = F.degree();
    if (deg < 1) return nullptr;
    return deg == 1 ? "affine obstruction" : "general algebraic obstruction";
}

/// Nontrivial relation sum_H a_H l_H^D = 0 among D-th powers of the affine
/// forms, when one exists. Guaranteed once |hps| > C(d+D, d).
inline VeroneseResult veronese_dependence(const PrimeField& f, const std::vector<Hyperplane>& hps, unsigned degree,
                                          std::uint64_t seed = 0x5eed)
{
    if (hps.empty()) return TooFew{};
    const auto d = static_cast<unsigned>(hps.front().dim());
    MonomialBasis basis(d, degree, BasisMode::up_to_degree);
    Matrix phi(basis.size(), hps.size());
    std::vector<Vec> images;
    for (std::size_t j = 0; j < hps.size(); ++j) {
        images.push_back(veronese_image(f, hps[j], basis));
        for (std::size_t i = 0; i < basis.size(); ++i) phi(i, j) = images.back()[i];
    }
    auto kernel = kernel_basis(phi, f);
    if (kernel.empty()) {
        require(hps.size() <= basis.size(), "more forms than monomials but no dependence");
        return TooFew{};
    }
    const auto& a = kernel.front();
    for (std::size_t i = 0; i < basis.size(); ++i) {
        std::uint64_t acc = 0;
        for (std::size_t j = 0; j < hps.size(); ++j) acc += std::uint64_t{a[j]} * images[j][i];
        require(acc % f.modulus() == 0, "veronese relation fails coefficientwise");
    }
    // pointwise spot check
    std::mt19937_64 rng(seed);
    for (int t = 0; t < 16; ++t) {
        Vec x(d);
        for (auto& v : x) v = static_cast<Fe>(rng() % f.modulus());
        Fe total = 0;
        for (std::size_t j = 0; j < hps.size(); ++j) {
            Fe l = f.sub(dot(f, hps[j].normal(), x), hps[j].offset());
            total = f.add(total, f.mul(a[j], f.pow(l, degree)));
        }
        require(total == 0, "veronese relation fails at a sample point");
    }
    return VeroneseDependence{a};
}

} // namespace incidence
