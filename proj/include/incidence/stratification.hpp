#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "config.hpp"
#include "errors.hpp"
#include "geometry.hpp"
#include "incidence.hpp"
#include "multiset.hpp"

namespace incidence {

// floor(log2 v) for v >= 1.
inline int dyadic_index(std::uint64_t v) { return std::bit_width(v) - 1; }

/// Radical hyperplane and its richness |P cap H| for every unordered pair of
/// spheres; (S, S') and (S', S) share one entry.
class PairTable {
public:
    explicit PairTable(const Config& c) : n_(c.spheres().size()), entries_(n_ * (n_ ? n_ - 1 : 0) / 2)
    {
        const auto& sp = c.spheres();
        std::map<Hyperplane, std::size_t> richness_cache;
        for (std::size_t a = 0; a < n_; ++a)
            for (std::size_t b = a + 1; b < n_; ++b) {
                auto& e = entries_[slot(a, b)];
                e.hyperplane = radical_hyperplane(c.field(), sp[a], sp[b]);
                if (!e.hyperplane) continue;
                auto [it, fresh] = richness_cache.try_emplace(*e.hyperplane, 0);
                if (fresh) it->second = c.on_hyperplane(*e.hyperplane).count();
                e.richness = it->second;
            }
    }

    struct Entry {
        std::optional<Hyperplane> hyperplane; // empty for concentric pairs
        std::size_t richness = 0;
    };

    const Entry& at(std::size_t a, std::size_t b) const { return entries_[a < b ? slot(a, b) : slot(b, a)]; }
    std::size_t spheres() const noexcept { return n_; }

private:
    std::size_t slot(std::size_t a, std::size_t b) const { return a * n_ - a * (a + 1) / 2 + (b - a - 1); }

    std::size_t n_;
    std::vector<Entry> entries_;
};

enum class LayerMeasure {
    overlap,  // |P cap S cap S'|
    richness, // |P cap H(S, S')|
};

/// Ordered non-concentric sphere pairs bucketed by 2^j <= value < 2^{j+1}.
struct DyadicLayers {
    LayerMeasure measure = LayerMeasure::overlap;
    std::map<int, std::vector<SpherePair>> layers;
    std::uint64_t zero_pairs = 0;
    std::uint64_t degenerate_pairs = 0;

    std::uint64_t pair_count() const
    {
        std::uint64_t n = 0;
        for (const auto& [j, v] : layers) n += v.size();
        return n;
    }
};

inline DyadicLayers stratify(const Config& c, LayerMeasure measure = LayerMeasure::overlap)
{
    DyadicLayers out;
    out.measure = measure;
    const PairTable table(c);
    std::vector<PointSet> members;
    if (measure == LayerMeasure::overlap) members = c.sphere_memberships();
    const auto n = c.spheres().size();
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
            if (a == b) continue;
            const auto& e = table.at(a, b);
            if (!e.hyperplane) {
                ++out.degenerate_pairs;
                continue;
            }
            std::uint64_t v = measure == LayerMeasure::overlap ? members[a].intersection_count(members[b]) : e.richness;
            if (v == 0)
                ++out.zero_pairs;
            else
                out.layers[dyadic_index(v)].push_back({a, b});
        }
    return out;
}

// sum over all layers of |P cap S cap S'|; equals E_off for overlap layers.
inline std::uint64_t layer_overlap_mass(const DyadicLayers& layers, const Config& c)
{
    auto members = c.sphere_memberships();
    std::uint64_t m = 0;
    for (const auto& [j, pairs] : layers.layers)
        for (auto [a, b] : pairs) m += members[a].intersection_count(members[b]);
    return m;
}

struct LowLayerMass {
    std::uint64_t mass = 0;
    cpp_int bound; // 2^{j0} |S|^2
    bool holds() const { return cpp_int(mass) <= bound; }
};

/// sum_{j < j0} sum_{(S,S') in layer j} |P cap H(S, S')| against 2^{j0} |S|^2.
///
/// The inequality is unconditional when the layers are keyed by radical
/// richness; it is checked in that case. With overlap-keyed layers it is
/// only reported.
inline LowLayerMass low_layer_mass(const DyadicLayers& layers, int j0, const Config& c)
{
    if (j0 < 0) throw error("low_layer_mass: j0 must be >= 0");
    const PairTable table(c);
    LowLayerMass out;
    for (const auto& [j, pairs] : layers.layers) {
        if (j >= j0) break;
        for (auto [a, b] : pairs) out.mass += table.at(a, b).richness;
    }
    auto s = cpp_int(c.spheres().size());
    out.bound = (cpp_int(1) << j0) * s * s;
    if (layers.measure == LayerMeasure::richness) require(out.holds(), "low-layer cutoff inequality failed");
    return out;
}

struct PersistentPair {
    std::size_t first = 0;
    std::size_t second = 0;
    Hyperplane hyperplane;
    std::size_t richness = 0;
};

struct PersistentPairs {
    Threshold lambda;
    std::vector<PersistentPair> pairs;
};

/// Ordered non-concentric pairs whose radical hyperplane carries >= lambda points.
inline PersistentPairs persistent_pairs(const Config& c, const Threshold& lambda)
{
    PersistentPairs out{lambda, {}};
    const PairTable table(c);
    const auto n = c.spheres().size();
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
            if (a == b) continue;
            const auto& e = table.at(a, b);
            if (e.hyperplane && lambda.admits(e.richness)) out.pairs.push_back({a, b, *e.hyperplane, e.richness});
        }
    return out;
}

// lambda = c_const * K * q^{(d-1)/2}
inline PersistentPairs persistent_pairs(const Config& c, const NearExtremality& k, const cpp_rational& c_const)
{
    if (c_const <= 0 || c_const > 1) throw error("persistence constant must lie in (0, 1]");
    return persistent_pairs(c, Threshold::scaled(k, c_const, c.space().q(), c.space().dim()));
}

struct PartnerProfile {
    std::vector<std::size_t> partners; // per sphere
    std::vector<std::size_t> popular;  // S_0: spheres with >= threshold partners
    double fraction = 0;               // |S_0| / |S|
};

inline PartnerProfile persistent_partner_profile(const PersistentPairs& pp, const Config& c, std::size_t threshold)
{
    PartnerProfile out;
    out.partners.assign(c.spheres().size(), 0);
    for (const auto& p : pp.pairs) ++out.partners[p.first];
    for (std::size_t i = 0; i < out.partners.size(); ++i)
        if (out.partners[i] >= threshold && out.partners[i] > 0) out.popular.push_back(i);
    if (!c.spheres().empty()) out.fraction = double(out.popular.size()) / double(c.spheres().size());
    return out;
}

struct HeavyLayer {
    std::uint64_t mu = 0; // 2^j
    int layer = 0;
    std::uint64_t count = 0;
    std::uint64_t mass = 0;       // 2^j * count
    std::uint64_t total_mass = 0; // sum over layers of 2^j * count
    std::size_t nonempty_layers = 0;
};

/// Dyadic layer of largest mass 2^j |layer|, larger j on ties. Zero values
/// belong to no layer.
inline HeavyLayer heavy_layer_select(const std::vector<std::uint64_t>& values)
{
    std::map<int, std::uint64_t> counts;
    std::uint64_t max_value = 0;
    for (auto v : values)
        if (v > 0) {
            ++counts[dyadic_index(v)];
            max_value = std::max(max_value, v);
        }
    if (counts.empty()) throw empty_input("heavy_layer_select: no positive overlaps");
    HeavyLayer best;
    for (const auto& [j, n] : counts) {
        std::uint64_t mass = (std::uint64_t{1} << j) * n;
        best.total_mass += mass;
        if (mass >= best.mass) {
            best.mass = mass;
            best.layer = j;
            best.count = n;
            best.mu = std::uint64_t{1} << j;
        }
    }
    best.nonempty_layers = counts.size();
    require(best.mass * best.nonempty_layers >= best.total_mass, "heavy layer below pigeonhole share");
    auto log_cap = static_cast<std::size_t>(std::bit_width(max_value + 1)); // ceil(log2(2 + max))
    require(best.mass * log_cap >= best.total_mass, "heavy layer below log share");
    return best;
}

/// Output of one point pass and one hyperplane pass of dyadic pigeonholing.
///
/// Point degrees are counted against the input support, richness against
/// the retained points. Every retained point has degree in [M1, 2 M1) and
/// every retained hyperplane has richness in [lambda1, 2 lambda1).
struct RegularizedConfig {
    std::vector<std::size_t> points; // P_1, indices into Config
    HyperplaneMultiset hyperplanes;  // H_1
    std::uint64_t degree_scale = 0;   // M_1
    std::uint64_t richness_scale = 0; // lambda_1
    std::uint64_t total_incidences = 0;    // I(P, H^geo) before refinement
    std::uint64_t retained_incidences = 0; // I(P_1, H_1^geo)
    std::size_t point_buckets = 0;
    std::size_t hyperplane_buckets = 0;
};

namespace detail {

// Bucket of largest value sum, larger index on ties.
inline int heaviest_bucket(const std::map<int, std::uint64_t>& mass)
{
    int best = -1;
    std::uint64_t best_mass = 0;
    for (const auto& [j, m] : mass)
        if (best < 0 || m >= best_mass) {
            best = j;
            best_mass = m;
        }
    return best;
}

} // namespace detail

inline RegularizedConfig regularize(const Config& c, const std::vector<std::size_t>& points,
                                    const HyperplaneMultiset& ms)
{
    if (points.empty() || ms.empty()) throw degenerate_refinement("regularize: empty input");
    const auto n = c.points().size();
    std::vector<PointSet> on_h;
    on_h.reserve(ms.support.size());
    for (const auto& h : ms.support) on_h.push_back(c.on_hyperplane(h));

    RegularizedConfig out;

    // point pass
    std::vector<std::uint64_t> degree(n, 0);
    for (auto p : points)
        for (const auto& s : on_h) degree[p] += s.contains(p);
    std::map<int, std::uint64_t> point_mass;
    for (auto p : points) {
        out.total_incidences += degree[p];
        if (degree[p] > 0) point_mass[dyadic_index(degree[p])] += degree[p];
    }
    if (point_mass.empty()) throw degenerate_refinement("regularize: no point meets the hyperplane family");
    out.point_buckets = point_mass.size();
    const int pj = detail::heaviest_bucket(point_mass);
    out.degree_scale = std::uint64_t{1} << pj;
    for (auto p : points)
        if (degree[p] > 0 && dyadic_index(degree[p]) == pj) out.points.push_back(p);
    const auto kept = PointSet::from(n, out.points);

    // hyperplane pass, richness recomputed on P_1
    std::vector<std::uint64_t> richness(ms.support.size());
    std::map<int, std::uint64_t> h_mass;
    for (std::size_t i = 0; i < ms.support.size(); ++i) {
        richness[i] = on_h[i].intersection_count(kept);
        if (richness[i] > 0) h_mass[dyadic_index(richness[i])] += richness[i];
    }
    if (h_mass.empty()) throw degenerate_refinement("regularize: hyperplane family emptied");
    out.hyperplane_buckets = h_mass.size();
    const int hj = detail::heaviest_bucket(h_mass);
    out.richness_scale = std::uint64_t{1} << hj;
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < ms.support.size(); ++i)
        if (richness[i] > 0 && dyadic_index(richness[i]) == hj) keep.push_back(i);
    out.hyperplanes = ms.restrict_to(keep);
    out.retained_incidences = h_mass[hj];

    require(out.retained_incidences * out.point_buckets * out.hyperplane_buckets >= out.total_incidences,
            "regularization retained less than the pigeonhole share");
    return out;
}

} // namespace incidence
