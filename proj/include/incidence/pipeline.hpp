#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "config.hpp"
#include "errors.hpp"
#include "geometry.hpp"
#include "incidence.hpp"
#include "multiset.hpp"
#include "polynomial.hpp"
#include "stratification.hpp"

namespace incidence {

struct OverlapEnergy {
    std::uint64_t triples = 0;    // |{(p, H, H') : H != H', p in H cap H'}|
    std::uint64_t degree_sum = 0; // sum_p deg(p) (deg(p) - 1)
};

inline OverlapEnergy overlap_energy(const Config& c, const std::vector<std::size_t>& points,
                                    const std::vector<Hyperplane>& support)
{
    const auto kept = PointSet::from(c.points().size(), points);
    std::vector<PointSet> on_h;
    for (const auto& h : support) on_h.push_back(c.on_hyperplane(h));
    OverlapEnergy out;
    for (std::size_t a = 0; a < support.size(); ++a)
        for (std::size_t b = 0; b < support.size(); ++b)
            if (a != b) out.triples += kept.intersection_count(on_h[a], on_h[b]);
    for (auto p : points) {
        std::uint64_t deg = 0;
        for (const auto& s : on_h) deg += s.contains(p);
        out.degree_sum += deg * (deg ? deg - 1 : 0);
    }
    require(out.triples == out.degree_sum, "overlap energy identity failed");
    return out;
}

/// Codimension-2 flats cut out by non-parallel pairs of a hyperplane family,
/// with m(L) = number of family members containing L.
struct FlatProfile {
    std::map<Flat, std::vector<std::size_t>> containing; // support indices, ascending
    std::size_t max_multiplicity = 0;
    std::optional<Flat> witness; // smallest flat attaining the maximum
    std::uint64_t ordered_nonparallel_pairs = 0;

    std::size_t multiplicity(const Flat& l) const
    {
        auto it = containing.find(l);
        return it == containing.end() ? 0 : it->second.size();
    }
};

inline FlatProfile flat_profile(const PrimeField& f, const std::vector<Hyperplane>& support)
{
    FlatProfile prof;
    std::vector<std::set<Flat>> fibers(support.size());
    std::vector<std::size_t> nonparallel(support.size(), 0);
    std::map<Flat, std::set<std::size_t>> members;
    for (std::size_t a = 0; a < support.size(); ++a)
        for (std::size_t b = a + 1; b < support.size(); ++b) {
            auto meet = flat_from_pair(f, support[a], support[b]);
            auto* l = std::get_if<Flat>(&meet);
            if (!l) continue;
            // every hyperplane containing L meets support[a] exactly in L
            auto& m = members[*l];
            m.insert(a);
            m.insert(b);
            fibers[a].insert(*l);
            fibers[b].insert(*l);
            ++nonparallel[a];
            ++nonparallel[b];
            prof.ordered_nonparallel_pairs += 2;
        }
    std::uint64_t pair_check = 0;
    for (auto& [l, m] : members) {
        std::vector<std::size_t> v(m.begin(), m.end());
        pair_check += v.size() * (v.size() - 1);
        if (v.size() > prof.max_multiplicity) {
            prof.max_multiplicity = v.size();
            prof.witness = l;
        }
        prof.containing.emplace(l, std::move(v));
    }
    require(pair_check == prof.ordered_nonparallel_pairs, "sum m(L)(m(L)-1) differs from non-parallel pair count");
    // distinct flats through H >= |H_perp(H)| / B with B = m_max
    for (std::size_t a = 0; a < support.size(); ++a)
        require(fibers[a].size() * prof.max_multiplicity >= nonparallel[a], "flat fiber bound failed");
    return prof;
}

struct FlatConcentration {
    Flat flat;
    std::vector<std::size_t> pencil; // support indices containing the flat
};
struct DirectionalCoordination {
    std::vector<Direction> directions; // N
};

struct CaseSplit {
    std::variant<FlatConcentration, DirectionalCoordination> branch;
    FlatProfile profile;
};

/// Case 1 iff some flat lies in at least B0 + 1 support hyperplanes.
inline CaseSplit case_split(const PrimeField& f, const std::vector<Hyperplane>& support, std::uint64_t b0)
{
    if (support.empty()) throw empty_input("case_split: empty hyperplane family");
    auto prof = flat_profile(f, support);
    if (prof.witness && prof.max_multiplicity >= b0 + 1) {
        auto pencil = prof.containing.at(*prof.witness);
        return {FlatConcentration{*prof.witness, std::move(pencil)}, std::move(prof)};
    }
    std::set<Direction> dirs;
    for (const auto& h : support) dirs.insert(h.direction(f));
    return {DirectionalCoordination{{dirs.begin(), dirs.end()}}, std::move(prof)};
}

enum class CaseTag { flat_concentration, directional_coordination, no_signal };

inline std::string to_string(CaseTag t)
{
    switch (t) {
    case CaseTag::flat_concentration: return "FlatConcentration";
    case CaseTag::directional_coordination: return "DirectionalCoordination";
    case CaseTag::no_signal: return "NoSignal";
    }
    return "";
}

struct CertificateParams {
    double K = 0;
    double lambda = 0; // effective persistence threshold
    std::uint64_t lambda1 = 0;
    std::uint64_t M1 = 0;
    std::uint64_t mu = 0;
    std::uint64_t B0 = 0;
    std::uint64_t point_threshold = 0;  // ceil(lambda1 / 2)
    std::uint64_t sphere_threshold = 0; // per-sphere richness of S' on P'
    std::uint64_t regularized = 0;      // |P_2|
};

struct DirectionConstraint {
    Polynomial R;       // homogenized, vanishes on N_j
    Polynomial R_chart; // on the affine chart, d-1 variables
    std::size_t chart = 0;
    unsigned D = 0;
    std::vector<std::string> flags;
};

struct Certificate {
    CaseTag tag = CaseTag::no_signal;
    Polynomial F;
    std::optional<Hyperplane> hyperplane; // H_0
    std::vector<std::size_t> points;      // P', ascending
    std::vector<std::size_t> spheres;     // S', ascending
    std::optional<DirectionConstraint> aux;
    std::optional<Flat> witness_flat;
    CertificateParams params;

    // Trace, not serialized.
    std::vector<std::size_t> regularized_points; // P_2
};

struct ExtractOptions {
    cpp_rational c_const{1, 4};
    std::optional<std::uint64_t> B0;             // auto: max(2d, ceil K)
    std::optional<std::uint64_t> lambda_override; // replaces c K q^{(d-1)/2}
    std::optional<std::uint64_t> min_richness;    // default d + 1
};

namespace detail {

// Largest power of two t with sum_{S : n_S >= t} n_S >= total / 2; 1 when total = 0.
inline std::uint64_t markov_threshold(const std::vector<std::uint64_t>& counts)
{
    std::uint64_t total = 0, top = 0;
    for (auto n : counts) {
        total += n;
        top = std::max(top, n);
    }
    std::uint64_t best = 1;
    for (std::uint64_t t = 1; t <= top; t <<= 1) {
        std::uint64_t kept = 0;
        for (auto n : counts)
            if (n >= t) kept += n;
        if (2 * kept >= total) best = t;
    }
    return best;
}

} // namespace detail

// Sphere subfamily S' and its threshold for a given P'.
inline std::pair<std::vector<std::size_t>, std::uint64_t> sphere_subfamily(const Config& c,
                                                                          const std::vector<std::size_t>& p_prime)
{
    const auto chosen = PointSet::from(c.points().size(), p_prime);
    std::vector<std::uint64_t> counts;
    for (const auto& s : c.spheres()) counts.push_back(c.on_sphere(s).intersection_count(chosen));
    auto t = detail::markov_threshold(counts);
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < counts.size(); ++i)
        if (counts[i] >= t) out.push_back(i);
    return {out, t};
}

/// The extraction pipeline: K, persistent pairs, bisector multiset,
/// regularization, mass retention and rich support, then the flat /
/// direction case split and a linear certificate F = <n0, x> - b0.
inline Certificate extract_certificate(const Config& c, const ExtractOptions& opt = {})
{
    const auto& f = c.field();
    const int d = c.space().dim();
    Certificate cert;
    if (c.points().empty() || c.spheres().empty()) return cert;

    auto k = near_extremality_K(c);
    cert.params.K = k.value();

    Threshold lambda = opt.lambda_override ? Threshold::of(*opt.lambda_override)
                                           : Threshold::scaled(k, opt.c_const, c.space().q(), d);
    lambda = max(lambda, Threshold::of(opt.min_richness.value_or(static_cast<std::uint64_t>(d) + 1)));
    cert.params.lambda = lambda.value();
    cert.params.B0 = opt.B0 ? *opt.B0
                            : std::max<std::uint64_t>(2 * static_cast<std::uint64_t>(d),
                                                      static_cast<std::uint64_t>(k.ceil()));

    auto pp = persistent_pairs(c, lambda);
    if (pp.pairs.empty()) return cert;
    std::vector<SpherePair> pairs;
    for (const auto& p : pp.pairs) pairs.emplace_back(p.first, p.second);
    auto ms = build_multiset(pairs, c, lambda);
    if (ms.empty()) return cert;

    std::vector<std::size_t> all(c.points().size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    RegularizedConfig reg;
    try {
        reg = regularize(c, all, ms);
    } catch (const degenerate_refinement&) {
        return cert;
    }
    cert.params.M1 = reg.degree_scale;
    cert.params.lambda1 = reg.richness_scale;

    const auto n = c.points().size();
    const auto p1 = PointSet::from(n, reg.points);
    std::vector<PointSet> on_h1;
    for (const auto& h : reg.hyperplanes.support) on_h1.push_back(c.on_hyperplane(h));
    {
        std::vector<std::uint64_t> overlaps;
        for (std::size_t a = 0; a < on_h1.size(); ++a)
            for (std::size_t b = 0; b < on_h1.size(); ++b)
                if (a != b) overlaps.push_back(p1.intersection_count(on_h1[a], on_h1[b]));
        bool any = std::any_of(overlaps.begin(), overlaps.end(), [](auto v) { return v > 0; });
        cert.params.mu = any ? heavy_layer_select(overlaps).mu : 0;
    }

    auto heavy = mass_retention(reg.hyperplanes);
    PointSet p2(n);
    for (const auto& h : heavy.support) {
        auto on = c.on_hyperplane(h);
        for (auto i : reg.points)
            if (on.contains(i)) p2.insert(i);
    }
    std::vector<std::size_t> rich;
    std::vector<std::size_t> richness(heavy.support.size());
    for (std::size_t i = 0; i < heavy.support.size(); ++i) {
        richness[i] = c.on_hyperplane(heavy.support[i]).intersection_count(p2);
        if (2 * richness[i] >= reg.richness_scale) rich.push_back(i);
    }
    auto h2 = heavy.restrict_to(rich);
    if (h2.empty()) return cert;
    cert.regularized_points = p2.members();
    cert.params.regularized = cert.regularized_points.size();

    auto split = case_split(f, h2.support, cert.params.B0);
    Hyperplane h0;
    if (auto* c1 = std::get_if<FlatConcentration>(&split.branch)) {
        cert.tag = CaseTag::flat_concentration;
        cert.witness_flat = c1->flat;
        std::size_t best = c1->pencil.front();
        std::size_t best_rich = 0;
        for (auto i : c1->pencil) {
            auto r = c.on_hyperplane(h2.support[i]).intersection_count(p2);
            if (r > best_rich) {
                best = i;
                best_rich = r;
            }
        }
        h0 = h2.support[best];
    } else {
        auto& c2 = std::get<DirectionalCoordination>(split.branch);
        cert.tag = CaseTag::directional_coordination;
        DirectionConstraint aux;
        aux.D = minimal_degree(c2.directions.size(), static_cast<unsigned>(d));
        std::size_t best_chart = 0, best_count = 0;
        for (std::size_t j = 0; j < static_cast<std::size_t>(d); ++j) {
            std::size_t cnt = 0;
            for (const auto& dir : c2.directions) cnt += dir[j] != 0;
            if (cnt > best_count) {
                best_chart = j;
                best_count = cnt;
            }
        }
        aux.chart = best_chart;
        auto ad = affine_dichotomy(f, c2.directions, best_chart, aux.D);
        if (auto* alg = std::get_if<Algebraic>(&ad.result)) {
            aux.R_chart = alg->polynomial;
            aux.R = *ad.homogenized;
        } else {
            aux.flags.push_back("large-branch");
        }
        if (aux.D >= c.space().q()) aux.flags.push_back("interpolation-trivial");
        cert.aux = std::move(aux);

        auto decomposition = parallel_classes(h2, f);
        const ParallelClass* popular = nullptr;
        for (const auto& cls : decomposition.classes)
            if (!popular || cls.mass > popular->mass) popular = &cls;
        auto off = popular_offset(*popular, c.space().q());
        h0 = Hyperplane(f, popular->direction.coords(), off.offset);
    }

    cert.hyperplane = h0;
    cert.F = Polynomial::linear_form(f, h0);
    cert.points = c.on_hyperplane(h0).members();
    for (auto i : cert.points) require(cert.F.evaluate(f, c.points()[i]) == 0, "certificate polynomial misses P'");
    cert.params.point_threshold = (cert.params.lambda1 + 1) / 2;
    require(cert.points.size() >= cert.params.point_threshold, "structured subset below lambda1 / 2");
    auto [subfamily, t] = sphere_subfamily(c, cert.points);
    cert.spheres = std::move(subfamily);
    cert.params.sphere_threshold = t;
    return cert;
}

struct RetentionReport {
    std::uint64_t incidences = 0;  // I(P', S)
    std::uint64_t degree_sum = 0;  // sum_{p in P'} deg_S(p)
    bool identity_holds = false;
    bool uniform = false;          // all deg_S on P' within [M, 2M)
    std::uint64_t degree_scale = 0; // M
    bool bucket_bounds_hold = true; // M |P'| <= I(P', S) < 2 M |P'|, when uniform
    double energy_ratio = 0;        // E(P', S) / E(P_2, S)
    double size_ratio = 0;          // |P'| / |P_2|
};

/// Double counting and bucket bounds for the structured subset against the
/// full sphere family, plus the energy-versus-size comparison with P_2.
inline RetentionReport retention_check(const Config& c, const Certificate& cert)
{
    if (cert.tag == CaseTag::no_signal) throw error("retention_check: certificate carries no signal");
    RetentionReport r;
    const auto members = c.sphere_memberships();
    auto deg = [&](std::size_t p) {
        std::uint64_t n = 0;
        for (const auto& m : members) n += m.contains(p);
        return n;
    };
    const auto chosen = PointSet::from(c.points().size(), cert.points);
    for (const auto& m : members) r.incidences += m.intersection_count(chosen);

    std::uint64_t lo = UINT64_MAX, hi = 0, e_prime = 0;
    for (auto p : cert.points) {
        auto dp = deg(p);
        r.degree_sum += dp;
        e_prime += dp * dp;
        lo = std::min(lo, dp);
        hi = std::max(hi, dp);
    }
    r.identity_holds = r.incidences == r.degree_sum;
    if (!cert.points.empty() && lo > 0) {
        r.degree_scale = std::uint64_t{1} << dyadic_index(lo);
        r.uniform = hi < 2 * r.degree_scale;
    }
    if (r.uniform) {
        auto sz = static_cast<std::uint64_t>(cert.points.size());
        r.bucket_bounds_hold = r.degree_scale * sz <= r.incidences && r.incidences < 2 * r.degree_scale * sz;
    }
    const auto& p2 = cert.regularized_points.empty() ? cert.points : cert.regularized_points;
    std::uint64_t e2 = 0;
    for (auto p : p2) {
        auto dp = deg(p);
        e2 += dp * dp;
    }
    r.energy_ratio = e2 ? double(e_prime) / double(e2) : 0;
    r.size_ratio = p2.empty() ? 0 : double(cert.points.size()) / double(p2.size());
    return r;
}

struct VerifyReport {
    std::vector<std::pair<std::string, bool>> checks;

    bool ok() const
    {
        return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.second; });
    }
    std::vector<std::string> failures() const
    {
        std::vector<std::string> out;
        for (const auto& [name, pass] : checks)
            if (!pass) out.push_back(name);
        return out;
    }
    void add(std::string name, bool pass) { checks.emplace_back(std::move(name), pass); }
};

/// Re-checks a certificate against the configuration from scratch: the
/// pipeline is not consulted, membership is tested pointwise and the flat
/// containment is checked by enumerating the flat.
inline VerifyReport verify_certificate(const Config& c, const Certificate& cert)
{
    VerifyReport rep;
    const auto& f = c.field();
    const auto d = static_cast<std::size_t>(c.space().dim());
    const auto np = c.points().size();
    const auto ns = c.spheres().size();

    if (cert.tag == CaseTag::no_signal) {
        rep.add("NoSignal certificate carries no claims",
                cert.F.is_zero() && !cert.hyperplane && cert.points.empty() && cert.spheres.empty() &&
                    !cert.witness_flat);
        return rep;
    }

    rep.add("F must be nonzero", !cert.F.is_zero());
    if (cert.F.is_zero()) return rep;
    bool coeffs_ok = cert.F.vars == d;
    for (const auto& [e, coef] : cert.F.terms) coeffs_ok &= e.size() == d && coef != 0 && coef < f.modulus();
    rep.add("F well-formed", coeffs_ok);
    if (!coeffs_ok) return rep;
    rep.add("F has degree 1", cert.F.degree() == 1);

    bool h_ok = cert.hyperplane.has_value();
    if (h_ok) {
        const auto& n = cert.hyperplane->normal();
        h_ok = n.size() == d && cert.hyperplane->offset() < f.modulus();
        Fe lead = 0;
        for (Fe x : n) {
            h_ok &= x < f.modulus();
            if (!lead && x) lead = x;
        }
        h_ok &= lead == 1;
    }
    rep.add("hyperplane canonical", h_ok);
    if (h_ok) rep.add("F is the linear form of the hyperplane", cert.F == Polynomial::linear_form(f, *cert.hyperplane));

    bool idx_ok = std::is_sorted(cert.points.begin(), cert.points.end()) &&
                  std::adjacent_find(cert.points.begin(), cert.points.end()) == cert.points.end() &&
                  (cert.points.empty() || cert.points.back() < np);
    rep.add("P' indices distinct, ascending, inside P", idx_ok);
    if (!idx_ok) return rep;

    bool vanish = true;
    for (auto i : cert.points) vanish &= cert.F.evaluate(f, c.points()[i]) == 0;
    rep.add("F vanishes on P'", vanish);
    std::size_t zeros = 0;
    for (const auto& p : c.points()) zeros += cert.F.evaluate(f, p) == 0;
    rep.add("P' is all of P cap Z(F)", vanish && zeros == cert.points.size());
    rep.add("point threshold matches lambda1", cert.params.point_threshold == (cert.params.lambda1 + 1) / 2);
    rep.add("|P'| >= point threshold", cert.points.size() >= cert.params.point_threshold && !cert.points.empty());

    bool s_idx_ok = std::is_sorted(cert.spheres.begin(), cert.spheres.end()) &&
                    std::adjacent_find(cert.spheres.begin(), cert.spheres.end()) == cert.spheres.end() &&
                    (cert.spheres.empty() || cert.spheres.back() < ns);
    rep.add("S' indices distinct, ascending, inside S", s_idx_ok);
    if (s_idx_ok) {
        std::vector<std::uint64_t> counts(ns, 0);
        for (std::size_t s = 0; s < ns; ++s)
            for (auto i : cert.points) counts[s] += on_sphere(f, c.spheres()[s], c.points()[i]);
        bool rich = true;
        for (auto s : cert.spheres) rich &= counts[s] >= cert.params.sphere_threshold;
        rep.add("every sphere of S' meets P' in >= threshold points", rich);
        // recompute the dyadic Markov rule
        std::uint64_t total = 0, top = 0;
        for (auto n : counts) {
            total += n;
            top = std::max(top, n);
        }
        std::uint64_t t = 1;
        for (std::uint64_t cand = 1; cand <= top; cand *= 2) {
            std::uint64_t kept = 0;
            for (auto n : counts) kept += n >= cand ? n : 0;
            if (2 * kept >= total) t = cand;
        }
        std::vector<std::size_t> expect;
        for (std::size_t s = 0; s < ns; ++s)
            if (counts[s] >= t) expect.push_back(s);
        rep.add("sphere threshold follows the dyadic Markov rule", t == cert.params.sphere_threshold);
        rep.add("S' is every sphere at or above the threshold", expect == cert.spheres);
    }

    if (cert.tag == CaseTag::flat_concentration) {
        bool flat_ok = cert.witness_flat.has_value() && h_ok;
        if (flat_ok) {
            std::size_t count = 0;
            bool inside = true;
            for_each_point(c.space(), [&](const Point& x) {
                if (!cert.witness_flat->contains(f, x)) return;
                ++count;
                inside &= cert.hyperplane->contains(f, x);
            });
            flat_ok = inside && count == c.space().power(static_cast<int>(d) - 2);
        }
        rep.add("witness flat is a codimension-2 flat inside H0", flat_ok);
    } else {
        rep.add("no witness flat outside flat concentration", !cert.witness_flat.has_value());
    }
    return rep;
}

} // namespace incidence
