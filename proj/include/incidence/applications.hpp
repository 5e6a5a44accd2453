#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "config.hpp"
#include "errors.hpp"
#include "generators.hpp"
#include "geometry.hpp"
#include "incidence.hpp"
#include "pipeline.hpp"

namespace incidence {

// Delta_p(P) = { |x - p| : x in P }, form values.
inline std::set<Fe> pinned_distance_set(const PrimeField& f, const Point& p, const std::vector<Point>& P)
{
    std::set<Fe> out;
    for (const auto& x : P) out.insert(quad_norm(f, difference(f, x, p)));
    return out;
}

struct PinnedSystem {
    std::vector<Point> pins;
    std::vector<Sphere> spheres;                 // union over pins of S_p
    std::vector<std::uint64_t> pin_incidences;   // I(P, S_p)
    std::vector<std::size_t> distance_counts;    // |Delta_p(P)|
    std::uint64_t incidences = 0;                // I(P, S), enumerated
    cpp_rational surplus;                        // (|P|/q) sum_p (q - |Delta_p|)
    cpp_rational enumerated_surplus;             // I - |P||S|/q
    NearExtremality k;
};

/// Spheres S(p, t), t in Delta_p(P), for every pin p. Pins must be distinct
/// (distinct centers keep the union free of repeated spheres) but need not
/// lie in P.
inline PinnedSystem pinned_sphere_system(const Space& space, const std::vector<Point>& pins,
                                         const std::vector<Point>& P)
{
    const auto& f = space.field();
    const auto q = space.q();
    if (std::set<Point>(pins.begin(), pins.end()).size() != pins.size()) throw invalid_spec("pins: duplicate pin");
    PinnedSystem sys;
    sys.pins = pins;
    for (const auto& p : pins) {
        auto delta = pinned_distance_set(f, p, P);
        sys.distance_counts.push_back(delta.size());
        std::uint64_t inc = 0;
        for (Fe t : delta) {
            Sphere s{p, t};
            for (const auto& x : P) inc += on_sphere(f, s, x);
            sys.spheres.push_back(std::move(s));
        }
        require(inc == P.size(), "pinned spheres must partition P");
        sys.pin_incidences.push_back(inc);
        sys.incidences += inc;
    }
    std::uint64_t deficit = 0;
    for (auto n : sys.distance_counts) deficit += q - n;
    sys.surplus = cpp_rational(cpp_int(P.size()) * deficit, cpp_int(q));
    sys.enumerated_surplus = cpp_rational(cpp_int(sys.incidences)) -
                             cpp_rational(cpp_int(P.size()) * sys.spheres.size(), cpp_int(q));
    require(sys.surplus == sys.enumerated_surplus, "closed-form surplus differs from the enumerated one");
    if (!P.empty() && !sys.spheres.empty())
        sys.k = near_extremality(sys.incidences, P.size(), sys.spheres.size(), q, space.dim());
    return sys;
}

struct DotProductSystem {
    std::vector<Point> pins;
    std::vector<Hyperplane> support;             // distinct canonical H_{p,t}
    std::vector<std::uint64_t> multiplicity;     // > 1 only when (p, t) coincide canonically
    std::vector<std::size_t> value_counts;       // |Pi_p(Q)|
    std::uint64_t family_size = 0;               // sum_p |Pi_p(Q)|
    std::uint64_t incidences = 0;                // with multiplicity
    cpp_rational surplus;
    cpp_rational enumerated_surplus;
    NearExtremality k;
    bool merged = false;
};

/// Level sets H_{p,t} = {x : <p, x> = t} for t in Pi_p(Q) = {<p, x> : x in Q}.
inline DotProductSystem dot_product_system(const Space& space, const std::vector<Point>& pins,
                                           const std::vector<Point>& Q)
{
    const auto& f = space.field();
    const auto q = space.q();
    DotProductSystem sys;
    sys.pins = pins;
    std::map<Hyperplane, std::uint64_t> family;
    for (const auto& p : pins) {
        if (std::all_of(p.begin(), p.end(), [](Fe x) { return x == 0; })) throw zero_pin();
        std::set<Fe> values;
        for (const auto& x : Q) values.insert(dot(f, p, x));
        sys.value_counts.push_back(values.size());
        std::uint64_t inc = 0;
        for (Fe t : values) {
            Hyperplane h(f, p, t);
            ++family[h];
            for (const auto& x : Q) inc += h.contains(f, x);
        }
        require(inc == Q.size(), "level sets of a pin must partition Q");
        sys.incidences += inc;
        sys.family_size += values.size();
    }
    for (const auto& [h, m] : family) {
        sys.support.push_back(h);
        sys.multiplicity.push_back(m);
        sys.merged |= m > 1;
    }
    std::uint64_t deficit = 0;
    for (auto n : sys.value_counts) deficit += q - n;
    sys.surplus = cpp_rational(cpp_int(Q.size()) * deficit, cpp_int(q));
    // recount from the merged family
    std::uint64_t recount = 0;
    for (std::size_t i = 0; i < sys.support.size(); ++i)
        for (const auto& x : Q) recount += sys.multiplicity[i] * sys.support[i].contains(f, x);
    sys.enumerated_surplus =
        cpp_rational(cpp_int(recount)) - cpp_rational(cpp_int(Q.size()) * sys.family_size, cpp_int(q));
    require(recount == sys.incidences, "merged family changes the incidence count");
    require(sys.surplus == sys.enumerated_surplus, "closed-form surplus differs from the enumerated one");
    if (!Q.empty() && sys.family_size)
        sys.k = near_extremality(sys.incidences, Q.size(), sys.family_size, q, space.dim());
    return sys;
}

/// m = min(|P_0|, floor(c K q^{(d-3)/2})).
inline std::uint64_t pin_cap(std::uint64_t available, const NearExtremality& k, std::uint32_t q, int d,
                             const cpp_rational& c = 1)
{
    if (d < 3) throw invalid_dimension("pin_cap needs d >= 3");
    cpp_rational sq = c * c * k.k_squared * cpp_rational(boost::multiprecision::pow(cpp_int(q), unsigned(d - 3)));
    cpp_int whole = boost::multiprecision::numerator(sq) / boost::multiprecision::denominator(sq);
    cpp_int root = boost::multiprecision::sqrt(whole);
    return root >= available ? available : static_cast<std::uint64_t>(root);
}

// m pins drawn from P by index, ascending.
inline std::vector<std::size_t> sample_pins(std::size_t n, std::size_t m, std::uint64_t seed)
{
    if (m > n) throw invalid_spec("pins: more pins requested than points");
    Rng rng(seed);
    std::vector<std::size_t> out;
    for (auto i : rng.sample(n, m)) out.push_back(static_cast<std::size_t>(i));
    return out;
}

struct StabilityReport {
    bool concentrated = false;
    double K = 0;
    double target = 0; // |P|^{1 - eta}
    std::size_t structured = 0;
    int degree = -1;
    Certificate certificate;
};

/// Concentrated iff extraction finds F with 1 <= deg F <= D vanishing on at
/// least |P|^{1 - eta} points of P.
inline StabilityReport stability_experiment(const Config& c, unsigned D, double eta, const ExtractOptions& opt = {})
{
    StabilityReport r;
    r.target = std::pow(double(c.points().size()), 1.0 - eta);
    if (!c.points().empty() && !c.spheres().empty()) r.K = near_extremality_K(c).value();
    r.certificate = extract_certificate(c, opt);
    if (r.certificate.tag == CaseTag::no_signal) return r;
    r.degree = r.certificate.F.degree();
    r.structured = r.certificate.points.size();
    r.concentrated = r.degree >= 1 && r.degree <= static_cast<int>(D) && double(r.structured) >= r.target;
    return r;
}

} // namespace incidence
