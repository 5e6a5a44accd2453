#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "config.hpp"
#include "errors.hpp"
#include "geometry.hpp"
#include "incidence.hpp"

namespace incidence {

using SpherePair = std::pair<std::size_t, std::size_t>; // ordered (S, S'), indices into Config

/// Bisector hyperplanes of ordered sphere pairs, kept as a multiset: the
/// geometric support (sorted canonical hyperplanes), one multiplicity per
/// support member, and the originating pairs of each member.
struct HyperplaneMultiset {
    std::vector<Hyperplane> support;
    std::vector<std::uint64_t> multiplicity;
    std::vector<std::vector<SpherePair>> provenance;

    bool empty() const noexcept { return support.empty(); }
    std::size_t geometric_size() const noexcept { return support.size(); }

    std::uint64_t mass() const noexcept
    {
        std::uint64_t m = 0;
        for (auto x : multiplicity) m += x;
        return m;
    }

    std::uint64_t max_multiplicity() const noexcept
    {
        std::uint64_t m = 0;
        for (auto x : multiplicity) m = std::max(m, x);
        return m;
    }

    // Sub-multiset on the listed support positions (kept in support order).
    HyperplaneMultiset restrict_to(const std::vector<std::size_t>& keep) const
    {
        HyperplaneMultiset out;
        for (auto i : keep) {
            out.support.push_back(support[i]);
            out.multiplicity.push_back(multiplicity[i]);
            out.provenance.push_back(provenance[i]);
        }
        return out;
    }

    static HyperplaneMultiset from_map(std::map<Hyperplane, std::vector<SpherePair>> grouped)
    {
        HyperplaneMultiset ms;
        for (auto& [h, pairs] : grouped) {
            ms.support.push_back(h);
            ms.multiplicity.push_back(pairs.size());
            ms.provenance.push_back(std::move(pairs));
        }
        return ms;
    }
};

/// Radical hyperplanes of the given ordered pairs; concentric pairs are
/// skipped and hyperplanes with fewer than lambda points of P are dropped.
inline HyperplaneMultiset build_multiset(const std::vector<SpherePair>& pairs, const Config& c,
                                         const Threshold& lambda)
{
    std::map<Hyperplane, std::vector<SpherePair>> grouped;
    for (const auto& pr : pairs) {
        auto h = radical_hyperplane(c.field(), c.spheres()[pr.first], c.spheres()[pr.second]);
        if (h) grouped[*h].push_back(pr);
    }
    for (auto it = grouped.begin(); it != grouped.end();) {
        if (!lambda.admits(c.on_hyperplane(it->first).count()))
            it = grouped.erase(it);
        else
            ++it;
    }
    return HyperplaneMultiset::from_map(std::move(grouped));
}

/// Hyperplanes of one projective normal direction, by offset.
struct ParallelClass {
    Direction direction;
    std::map<Fe, std::uint64_t> offsets; // b -> m_b
    std::uint64_t mass = 0;
};

struct ParallelDecomposition {
    std::vector<ParallelClass> classes; // ascending canonical direction
    std::vector<Direction> directions;  // the direction set N
};

inline ParallelDecomposition parallel_classes(const HyperplaneMultiset& ms, const PrimeField& f)
{
    std::map<Direction, ParallelClass> by_dir;
    for (std::size_t i = 0; i < ms.support.size(); ++i) {
        auto dir = ms.support[i].direction(f);
        auto& cls = by_dir[dir];
        cls.direction = dir;
        cls.offsets[ms.support[i].offset()] += ms.multiplicity[i];
        cls.mass += ms.multiplicity[i];
    }
    ParallelDecomposition out;
    for (auto& [dir, cls] : by_dir) {
        out.directions.push_back(dir);
        out.classes.push_back(std::move(cls));
    }
    std::uint64_t total = 0;
    for (const auto& cls : out.classes) total += cls.mass;
    require(total == ms.mass(), "parallel class masses must sum to the multiset mass");
    return out;
}

struct PopularOffset {
    Fe offset = 0;
    std::uint64_t multiplicity = 0;
};

/// Offset of largest multiplicity (smallest offset on ties); m_0 >= M/q.
inline PopularOffset popular_offset(const ParallelClass& cls, std::uint32_t q)
{
    if (cls.mass == 0 || cls.offsets.empty()) throw empty_input("popular_offset: empty parallel class");
    PopularOffset best;
    for (const auto& [b, m] : cls.offsets)
        if (m > best.multiplicity) best = {b, m};
    require(best.multiplicity * q >= cls.mass, "popular offset below M/q");
    return best;
}

/// Keeps {H : m_H >= M / (2 |H^geo|)}. Guarantees retained mass >= M/2 and
/// |H^geo| >= M / m_max; both are checked.
inline HyperplaneMultiset mass_retention(const HyperplaneMultiset& ms)
{
    if (ms.empty()) throw empty_input("mass_retention: empty multiset");
    const auto total = ms.mass();
    const auto geo = ms.geometric_size();
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < geo; ++i)
        if (2 * geo * ms.multiplicity[i] >= total) keep.push_back(i);
    auto heavy = ms.restrict_to(keep);
    require(2 * heavy.mass() >= total, "mass retention below M/2");
    require(geo * ms.max_multiplicity() >= total, "support smaller than M / m_max");
    return heavy;
}

/// sum over the multiset of |P cap H|, i.e. sum_H m_H |P cap H|.
inline std::uint64_t weighted_incidences(const HyperplaneMultiset& ms, const Config& c)
{
    std::uint64_t s = 0;
    for (std::size_t i = 0; i < ms.support.size(); ++i) s += ms.multiplicity[i] * c.on_hyperplane(ms.support[i]).count();
    return s;
}

} // namespace incidence
