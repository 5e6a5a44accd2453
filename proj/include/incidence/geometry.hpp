#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "field.hpp"
#include "matrix.hpp"

namespace incidence {

using Point = Vec;

inline constexpr std::uint64_t default_enumeration_cap = std::uint64_t{1} << 24;

/// F_q^d with d >= 3 and the diagonal form |x| = x_1^2 + ... + x_d^2.
class Space {
public:
    Space(std::uint32_t q, int d) : field_(q), d_(d)
    {
        if (d < 3) throw invalid_dimension("dimension d must be >= 3, got " + std::to_string(d));
        if (d > 16) throw invalid_dimension("dimension d above 16 is not supported");
    }

    const PrimeField& field() const noexcept { return field_; }
    std::uint32_t q() const noexcept { return field_.modulus(); }
    int dim() const noexcept { return d_; }

    // q^k, saturating at UINT64_MAX.
    std::uint64_t power(int k) const noexcept
    {
        std::uint64_t r = 1;
        for (int i = 0; i < k; ++i) {
            if (r > UINT64_MAX / q()) return UINT64_MAX;
            r *= q();
        }
        return r;
    }
    std::uint64_t size() const noexcept { return power(d_); }

    bool operator==(const Space&) const = default;

private:
    PrimeField field_;
    int d_;
};

// Lexicographic enumeration: index i <-> base-q digits of i, x_1 most significant.
inline Point point_at(const Space& s, std::uint64_t index)
{
    Point p(s.dim());
    for (int i = s.dim() - 1; i >= 0; --i) {
        p[i] = static_cast<Fe>(index % s.q());
        index /= s.q();
    }
    return p;
}

inline std::uint64_t index_of(const Space& s, const Point& p)
{
    std::uint64_t idx = 0;
    for (Fe x : p) idx = idx * s.q() + x;
    return idx;
}

template <class Visit>
void for_each_point(const Space& s, Visit&& visit, std::uint64_t cap = default_enumeration_cap)
{
    auto n = s.size();
    if (n > cap)
        throw space_too_large("F_q^d has " + std::to_string(n) + " points, above enumeration cap " +
                              std::to_string(cap));
    Point p(s.dim(), 0);
    for (std::uint64_t i = 0; i < n; ++i) {
        visit(static_cast<const Point&>(p));
        for (int k = s.dim() - 1; k >= 0; --k) {
            if (++p[k] < s.q()) break;
            p[k] = 0;
        }
    }
}

inline Fe dot(const PrimeField& f, const Vec& a, const Vec& b)
{
    std::uint64_t acc = 0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += static_cast<std::uint64_t>(a[i]) * b[i];
    return static_cast<Fe>(acc % f.modulus());
}

inline Fe quad_norm(const PrimeField& f, const Point& x) { return dot(f, x, x); }

inline Point difference(const PrimeField& f, const Point& a, const Point& b)
{
    Point r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = f.sub(a[i], b[i]);
    return r;
}

/// S(c, r) = {x : |x - c| = r}; r is the form value, not a square root.
struct Sphere {
    Point center;
    Fe radius = 0;

    auto operator<=>(const Sphere&) const = default;
};

inline bool on_sphere(const PrimeField& f, const Sphere& s, const Point& x)
{
    std::uint64_t acc = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        Fe t = f.sub(x[i], s.center[i]);
        acc += static_cast<std::uint64_t>(t) * t;
    }
    return acc % f.modulus() == s.radius;
}

inline std::vector<Point> sphere_points(const Space& space, const Sphere& s,
                                        std::uint64_t cap = default_enumeration_cap)
{
    std::vector<Point> out;
    for_each_point(space, [&](const Point& x) {
        if (on_sphere(space.field(), s, x)) out.push_back(x);
    }, cap);
    return out;
}

/// A point of P^{d-1}(F_q), stored with first nonzero coordinate 1.
class Direction {
public:
    Direction() = default;
    Direction(const PrimeField& f, Vec coords) : coords_(std::move(coords))
    {
        bool nonzero = false;
        for (Fe x : coords_) nonzero |= (x != 0);
        if (!nonzero) throw error("projective direction must be nonzero");
        normalize_leading(coords_, f);
    }

    const Vec& coords() const noexcept { return coords_; }
    std::size_t size() const noexcept { return coords_.size(); }
    Fe operator[](std::size_t i) const { return coords_[i]; }

    auto operator<=>(const Direction&) const = default;

private:
    Vec coords_;
};

/// Affine chart u_j != 0: [u] -> (u_i / u_j)_{i != j}. Empty outside the chart.
inline std::optional<Vec> affine_chart(const PrimeField& f, const Direction& dir, std::size_t j)
{
    if (j >= dir.size() || dir[j] == 0) return std::nullopt;
    Fe s = f.inv(dir[j]);
    Vec out;
    out.reserve(dir.size() - 1);
    for (std::size_t i = 0; i < dir.size(); ++i)
        if (i != j) out.push_back(f.mul(dir[i], s));
    return out;
}

/// {x : <n, x> = b}, canonical: first nonzero normal coordinate is 1.
class Hyperplane {
public:
    Hyperplane() = default;
    Hyperplane(const PrimeField& f, Vec normal, Fe offset)
    {
        Fe lead = 0;
        for (Fe x : normal)
            if (x != 0) {
                lead = x;
                break;
            }
        if (lead == 0) throw error("hyperplane normal must be nonzero");
        Fe s = f.inv(lead);
        for (Fe& x : normal) x = f.mul(x, s);
        normal_ = std::move(normal);
        offset_ = f.mul(offset, s);
    }

    const Vec& normal() const noexcept { return normal_; }
    Fe offset() const noexcept { return offset_; }
    int dim() const noexcept { return static_cast<int>(normal_.size()); }

    Direction direction(const PrimeField& f) const { return Direction(f, normal_); }

    bool contains(const PrimeField& f, const Point& x) const { return dot(f, normal_, x) == offset_; }

    bool parallel_to(const Hyperplane& other) const { return normal_ == other.normal_; }

    auto operator<=>(const Hyperplane&) const = default;

private:
    Vec normal_;
    Fe offset_ = 0;
};

inline std::vector<Point> hyperplane_points(const Space& space, const Hyperplane& h,
                                            std::uint64_t cap = default_enumeration_cap)
{
    std::vector<Point> out;
    for_each_point(space, [&](const Point& x) {
        if (h.contains(space.field(), x)) out.push_back(x);
    }, cap);
    return out;
}

/// Radical hyperplane of two spheres with distinct centers.
///
/// Subtracting |x - c| = r from |x - c'| = r' gives the raw equation
/// 2 <c' - c, x> = (r - r') + |c'| - |c|. Concentric pairs have no radical
/// hyperplane and yield nullopt.
inline std::optional<Hyperplane> radical_hyperplane(const PrimeField& f, const Sphere& s1, const Sphere& s2)
{
    if (s1.center == s2.center) return std::nullopt;
    Vec normal(s1.center.size());
    for (std::size_t i = 0; i < normal.size(); ++i) normal[i] = f.mul(2, f.sub(s2.center[i], s1.center[i]));
    Fe rhs = f.add(f.sub(s1.radius, s2.radius), f.sub(quad_norm(f, s2.center), quad_norm(f, s1.center)));
    return Hyperplane(f, std::move(normal), rhs);
}

/// Codimension-2 flat {x : A x = v}, stored as the reduced row echelon form
/// of the augmented 2 x (d+1) system. Equal flats have equal fields.
class Flat {
public:
    Flat() = default;

    // Throws if the two rows do not define a rank-2 consistent system.
    Flat(const PrimeField& f, const Hyperplane& h1, const Hyperplane& h2)
    {
        const auto d = h1.normal().size();
        Matrix aug(2, d + 1);
        for (std::size_t i = 0; i < d; ++i) {
            aug(0, i) = h1.normal()[i];
            aug(1, i) = h2.normal()[i];
        }
        aug(0, d) = h1.offset();
        aug(1, d) = h2.offset();
        auto red = rref(std::move(aug), f);
        if (red.rank() != 2 || red.pivots[1] >= d) throw error("hyperplanes do not meet in a codimension-2 flat");
        system_ = std::move(red.reduced);
        pivots_ = {red.pivots[0], red.pivots[1]};
    }

    std::size_t dim() const noexcept { return system_.cols() - 1; }
    const Matrix& system() const noexcept { return system_; }
    Vec constraint_row(std::size_t r) const
    {
        auto row = system_.row(r);
        return {row.begin(), row.end() - 1};
    }
    Fe constraint_value(std::size_t r) const { return system_(r, dim()); }

    bool contains(const PrimeField& f, const Point& x) const
    {
        for (std::size_t r = 0; r < 2; ++r)
            if (dot(f, constraint_row(r), x) != constraint_value(r)) return false;
        return true;
    }

    // (n, b) lies in the row space of [A | v].
    bool contained_in(const PrimeField& f, const Hyperplane& h) const
    {
        const auto d = dim();
        if (h.normal().size() != d) return false;
        Fe a = h.normal()[pivots_[0]];
        Fe b = h.normal()[pivots_[1]];
        for (std::size_t c = 0; c <= d; ++c) {
            Fe want = c < d ? h.normal()[c] : h.offset();
            Fe got = f.add(f.mul(a, system_(0, c)), f.mul(b, system_(1, c)));
            if (want != got) return false;
        }
        return true;
    }

    friend bool operator==(const Flat& a, const Flat& b) { return a.system_ == b.system_; }
    friend bool operator<(const Flat& a, const Flat& b) { return a.system_.data() < b.system_.data(); }

private:
    Matrix system_;
    std::array<std::size_t, 2> pivots_{};
};

inline bool flat_contained_in(const PrimeField& f, const Flat& l, const Hyperplane& h) { return l.contained_in(f, h); }

inline std::vector<Point> flat_points(const Space& space, const Flat& l, std::uint64_t cap = default_enumeration_cap)
{
    std::vector<Point> out;
    for_each_point(space, [&](const Point& x) {
        if (l.contains(space.field(), x)) out.push_back(x);
    }, cap);
    return out;
}

struct ParallelDisjoint {
    bool operator==(const ParallelDisjoint&) const = default;
};
struct Identical {
    bool operator==(const Identical&) const = default;
};
using PairIntersection = std::variant<Flat, ParallelDisjoint, Identical>;

inline PairIntersection flat_from_pair(const PrimeField& f, const Hyperplane& h1, const Hyperplane& h2)
{
    if (h1 == h2) return Identical{};
    if (h1.parallel_to(h2)) return ParallelDisjoint{};
    return Flat(f, h1, h2);
}

} // namespace incidence
