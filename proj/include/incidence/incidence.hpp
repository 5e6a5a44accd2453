#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "config.hpp"
#include "errors.hpp"

namespace incidence {

using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;

inline double to_double(const cpp_rational& r) { return static_cast<double>(r); }

/// Normalized incidence surplus
///   K = (I - |P||S|/q) / (q^{(d-1)/2} sqrt(|P||S|)),
/// clamped at 0. Both irrational factors are handled by storing K^2 as an
/// exact rational; every comparison against K goes through the square.
struct NearExtremality {
    cpp_rational surplus;   // I - |P||S|/q, unclamped
    cpp_rational k_squared; // 0 when surplus <= 0
    std::uint64_t points = 0;
    std::uint64_t spheres = 0;

    bool positive() const { return surplus > 0; }

    double value() const { return std::sqrt(to_double(k_squared)); }

    // K >= t
    bool at_least(const cpp_rational& t) const { return t <= 0 || k_squared >= t * t; }

    // Smallest integer n with n >= K.
    cpp_int ceil() const
    {
        if (k_squared == 0) return 0;
        cpp_int n = static_cast<cpp_int>(boost::multiprecision::sqrt(
            boost::multiprecision::numerator(k_squared) / boost::multiprecision::denominator(k_squared)));
        while (cpp_rational(n * n) < k_squared) ++n;
        while (n > 0 && cpp_rational((n - 1) * (n - 1)) >= k_squared) --n;
        return n;
    }
};

inline NearExtremality near_extremality(std::uint64_t incidences, std::uint64_t points, std::uint64_t spheres,
                                        std::uint32_t q, int d)
{
    if (points == 0 || spheres == 0) throw empty_config();
    NearExtremality k;
    k.points = points;
    k.spheres = spheres;
    k.surplus = cpp_rational(cpp_int(incidences)) - cpp_rational(cpp_int(points) * spheres, cpp_int(q));
    if (k.surplus > 0) {
        cpp_int qpow = boost::multiprecision::pow(cpp_int(q), static_cast<unsigned>(d - 1));
        k.k_squared = k.surplus * k.surplus / cpp_rational(qpow * points * spheres);
    }
    return k;
}

/// A real threshold lambda >= 0 held as lambda^2, so that "r >= lambda"
/// for an integer count r is decided exactly.
struct Threshold {
    cpp_rational squared = 0;

    static Threshold of(std::uint64_t n) { return {cpp_rational(cpp_int(n) * n)}; }

    // c * K * q^{(d-1)/2}
    static Threshold scaled(const NearExtremality& k, const cpp_rational& c, std::uint32_t q, int d)
    {
        cpp_int qpow = boost::multiprecision::pow(cpp_int(q), static_cast<unsigned>(d - 1));
        return {c * c * k.k_squared * cpp_rational(qpow)};
    }

    bool admits(std::uint64_t r) const { return cpp_rational(cpp_int(r) * r) >= squared; }
    double value() const { return std::sqrt(to_double(squared)); }

    friend Threshold max(const Threshold& a, const Threshold& b) { return a.squared >= b.squared ? a : b; }
    bool operator==(const Threshold&) const = default;
};

struct IncidenceStats {
    std::uint64_t incidences = 0;
    std::vector<std::uint64_t> point_degrees;
    std::vector<std::uint64_t> sphere_degrees;
    std::uint64_t energy = 0;      // sum_p deg(p)^2
    std::uint64_t dual_energy = 0; // sum_S deg(S)^2
    std::uint64_t off_diagonal = 0;
    NearExtremality k; // zero when P or S is empty
};

inline std::uint64_t incidence_count(const Config& c)
{
    std::uint64_t n = 0;
    for (const auto& s : c.spheres())
        for (const auto& p : c.points()) n += on_sphere(c.field(), s, p);
    return n;
}

/// I, both energies and the off-diagonal term, with the identity
/// E = I + E_off checked on the result.
inline IncidenceStats energies(const Config& c)
{
    IncidenceStats st;
    const auto members = c.sphere_memberships();
    st.point_degrees.assign(c.points().size(), 0);
    st.sphere_degrees.assign(c.spheres().size(), 0);
    for (std::size_t s = 0; s < members.size(); ++s) {
        for (std::size_t p = 0; p < c.points().size(); ++p)
            if (members[s].contains(p)) {
                ++st.point_degrees[p];
                ++st.sphere_degrees[s];
            }
    }
    for (auto d : st.point_degrees) {
        st.incidences += d;
        st.energy += d * d;
    }
    for (auto d : st.sphere_degrees) st.dual_energy += d * d;
    for (std::size_t a = 0; a < members.size(); ++a)
        for (std::size_t b = 0; b < members.size(); ++b)
            if (a != b) st.off_diagonal += members[a].intersection_count(members[b]);

    require(st.energy == st.incidences + st.off_diagonal, "energy identity E = I + E_off failed");
    if (!c.points().empty() && !c.spheres().empty())
        st.k = near_extremality(st.incidences, c.points().size(), c.spheres().size(), c.space().q(),
                                c.space().dim());
    return st;
}

inline NearExtremality near_extremality_K(const Config& c)
{
    if (c.points().empty() || c.spheres().empty()) throw empty_config();
    return near_extremality(incidence_count(c), c.points().size(), c.spheres().size(), c.space().q(),
                            c.space().dim());
}

struct EnergyBoundReport {
    bool near_extremal = false; // K >= 1; otherwise the check is vacuous
    cpp_int incidences_squared;
    cpp_int point_side;  // |P| * E
    cpp_int sphere_side; // |S| * E*
    bool point_bound_holds = true;
    bool sphere_bound_holds = true;

    bool passed() const { return point_bound_holds && sphere_bound_holds; }
};

/// The two Cauchy-Schwarz inequalities I^2 <= |P| E and I^2 <= |S| E*.
inline EnergyBoundReport energy_lower_bound_check(const Config& c)
{
    auto st = energies(c);
    EnergyBoundReport r;
    r.near_extremal = st.k.at_least(1);
    r.incidences_squared = cpp_int(st.incidences) * st.incidences;
    r.point_side = cpp_int(c.points().size()) * st.energy;
    r.sphere_side = cpp_int(c.spheres().size()) * st.dual_energy;
    r.point_bound_holds = r.incidences_squared <= r.point_side;
    r.sphere_bound_holds = r.incidences_squared <= r.sphere_side;
    return r;
}

} // namespace incidence
