#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "config.hpp"
#include "errors.hpp"
#include "geometry.hpp"

namespace incidence {

/// Seeded source built on the raw 64-bit output of std::mt19937_64; the
/// bounded draws and shuffles are done here rather than through the standard
/// distributions, whose output differs across library implementations.
class Rng {
public:
    static constexpr const char* algorithm = "mt19937_64";

    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next() { return eng_(); }

    // Uniform on [0, n).
    std::uint64_t below(std::uint64_t n)
    {
        if (n == 0) throw error("Rng::below: empty range");
        const std::uint64_t reject = (0 - n) % n;
        std::uint64_t r;
        do r = eng_();
        while (r < reject);
        return r % n;
    }

    template <class T>
    void shuffle(std::vector<T>& v)
    {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
    }

    // k distinct values of [0, n), ascending (Floyd's algorithm).
    std::vector<std::uint64_t> sample(std::uint64_t n, std::uint64_t k)
    {
        if (k > n) throw error("Rng::sample: k exceeds n");
        std::set<std::uint64_t> chosen;
        for (std::uint64_t j = n - k; j < n; ++j) {
            auto t = below(j + 1);
            if (!chosen.insert(t).second) chosen.insert(j);
        }
        return {chosen.begin(), chosen.end()};
    }

    // k distinct members of pool, in pool order.
    template <class T>
    std::vector<T> pick(const std::vector<T>& pool, std::size_t k)
    {
        std::vector<T> out;
        for (auto i : sample(pool.size(), k)) out.push_back(pool[i]);
        return out;
    }

private:
    std::mt19937_64 eng_;
};

enum class GeneratorKind { uniform_random, hyperplane_planted, quadric_planted, reflected_pairs };

inline std::string to_string(GeneratorKind k)
{
    switch (k) {
    case GeneratorKind::uniform_random: return "uniform-random";
    case GeneratorKind::hyperplane_planted: return "hyperplane-planted";
    case GeneratorKind::quadric_planted: return "quadric-planted";
    case GeneratorKind::reflected_pairs: return "reflected-pairs";
    }
    return "";
}

inline GeneratorKind parse_generator_kind(const std::string& s)
{
    for (auto k : {GeneratorKind::uniform_random, GeneratorKind::hyperplane_planted, GeneratorKind::quadric_planted,
                   GeneratorKind::reflected_pairs})
        if (to_string(k) == s) return k;
    throw invalid_spec("kind: unknown generator kind '" + s + "'");
}

inline bool is_hyperplane_planted(GeneratorKind k)
{
    return k == GeneratorKind::hyperplane_planted || k == GeneratorKind::reflected_pairs;
}

struct GeneratorSpec {
    GeneratorKind kind = GeneratorKind::uniform_random;
    std::uint32_t q = 5;
    int d = 3;
    std::size_t points = 0;
    std::size_t spheres = 0;
    std::uint64_t seed = 0;
    double noise = 0; // fraction of |P| placed off the planted structure

    bool operator==(const GeneratorSpec&) const = default;
};

struct Generated {
    Config config;
    std::optional<Hyperplane> planted; // H*
    std::optional<Fe> quadric_radius;  // r0
};

namespace detail {

struct Axis {
    Vec normal; // n, with |n| != 0
    Point base; // a, on H*
    Hyperplane plane;
};

inline Vec random_vector(const Space& s, Rng& rng)
{
    Vec v(static_cast<std::size_t>(s.dim()));
    for (auto& x : v) x = static_cast<Fe>(rng.below(s.q()));
    return v;
}

inline Axis random_axis(const Space& s, Rng& rng)
{
    const auto& f = s.field();
    Vec n;
    do n = random_vector(s, rng);
    while (quad_norm(f, n) == 0);
    Point a = random_vector(s, rng);
    return {n, a, Hyperplane(f, n, dot(f, n, a))};
}

// a + t n
inline Point along(const PrimeField& f, const Axis& ax, Fe t)
{
    Point c(ax.base.size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = f.add(ax.base[i], f.mul(t, ax.normal[i]));
    return c;
}

// S(a + t n, rho + t^2 |n|) meets H* exactly in {x in H* : |x - a| = rho}.
inline Sphere axial_sphere(const PrimeField& f, const Axis& ax, Fe t, Fe rho)
{
    return {along(f, ax, t), f.add(rho, f.mul(f.mul(t, t), quad_norm(f, ax.normal)))};
}

inline std::size_t noise_count(const GeneratorSpec& spec)
{
    return std::min<std::size_t>(spec.points, static_cast<std::size_t>(std::llround(spec.noise * double(spec.points))));
}

template <class Pred>
std::vector<Point> points_where(const Space& s, Pred keep)
{
    std::vector<Point> out;
    for_each_point(s, [&](const Point& x) {
        if (keep(x)) out.push_back(x);
    });
    return out;
}

inline std::vector<Point> pick_points(Rng& rng, const std::vector<Point>& pool, std::size_t k, const char* what)
{
    if (k > pool.size())
        throw sizes_exceed_space(std::string("np: ") + std::to_string(k) + " " + what + " requested, only " +
                                 std::to_string(pool.size()) + " available");
    return rng.pick(pool, k);
}

inline void require_mirror_sizes(const GeneratorSpec& spec)
{
    if (spec.spheres % 2) throw invalid_spec("ns: mirror-pair generators need an even sphere count");
    const std::uint64_t cap = std::uint64_t{spec.q} * (spec.q - 1);
    if (spec.spheres > cap)
        throw sizes_exceed_space("ns: at most q(q-1) = " + std::to_string(cap) + " axial spheres exist");
}

} // namespace detail

/// Deterministic configuration from a spec; the seed fixes every draw.
///
/// Mirror-pair kinds put spheres on one axis a + t n orthogonal to a planted
/// hyperplane H* = {<n, x> = <n, a>}, in pairs (t, -t) of equal radius, so
/// the radical hyperplane of each pair is H*.
inline Generated generate(const GeneratorSpec& spec)
{
    const Space space(spec.q, spec.d);
    const auto& f = space.field();
    if (!(spec.noise >= 0 && spec.noise <= 1)) throw invalid_spec("noise: must lie in [0, 1]");
    if (space.size() > default_enumeration_cap) throw sizes_exceed_space("q^d exceeds the enumeration cap");
    Rng rng(spec.seed);
    const auto n_noise = detail::noise_count(spec);
    const auto n_on = spec.points - n_noise;
    std::vector<Point> points;
    std::vector<Sphere> spheres;
    Generated out{Config(space, {}, {}), std::nullopt, std::nullopt};

    switch (spec.kind) {
    case GeneratorKind::uniform_random: {
        if (spec.points > space.size()) throw sizes_exceed_space("np: exceeds q^d");
        if (spec.spheres > space.size() * space.q()) throw sizes_exceed_space("ns: exceeds q^(d+1)");
        for (auto i : rng.sample(space.size(), spec.points)) points.push_back(point_at(space, i));
        for (auto i : rng.sample(space.size() * space.q(), spec.spheres))
            spheres.push_back({point_at(space, i / space.q()), static_cast<Fe>(i % space.q())});
        break;
    }
    case GeneratorKind::hyperplane_planted:
    case GeneratorKind::reflected_pairs: {
        detail::require_mirror_sizes(spec);
        const auto ax = detail::random_axis(space, rng);
        const auto on = detail::points_where(space, [&](const Point& x) { return ax.plane.contains(f, x); });
        const auto off = detail::points_where(space, [&](const Point& x) { return !ax.plane.contains(f, x); });
        const std::uint32_t half = (spec.q - 1) / 2;
        const std::size_t pairs = spec.spheres / 2;

        if (spec.kind == GeneratorKind::hyperplane_planted) {
            for (auto i : rng.sample(std::uint64_t{half} * spec.q, pairs)) {
                Fe t = static_cast<Fe>(1 + i / spec.q), rho = static_cast<Fe>(i % spec.q);
                spheres.push_back(detail::axial_sphere(f, ax, t, rho));
                spheres.push_back(detail::axial_sphere(f, ax, f.neg(t), rho));
            }
            points = detail::pick_points(rng, on, n_on, "points on H*");
        } else {
            // radii by circle size on H*, largest first
            std::vector<std::vector<Point>> circle(spec.q);
            for (const auto& x : on) circle[quad_norm(f, difference(f, x, ax.base))].push_back(x);
            std::vector<Fe> radii(spec.q);
            for (Fe r = 0; r < spec.q; ++r) radii[r] = r;
            rng.shuffle(radii);
            std::stable_sort(radii.begin(), radii.end(),
                             [&](Fe a, Fe b) { return circle[a].size() > circle[b].size(); });
            std::vector<Point> used, rest;
            std::size_t left = pairs;
            for (Fe rho : radii) {
                if (left == 0) {
                    rest.insert(rest.end(), circle[rho].begin(), circle[rho].end());
                    continue;
                }
                std::vector<Fe> ts(half);
                for (Fe t = 1; t <= half; ++t) ts[t - 1] = t;
                rng.shuffle(ts);
                for (std::size_t k = 0; k < std::min<std::size_t>(left, half); ++k) {
                    spheres.push_back(detail::axial_sphere(f, ax, ts[k], rho));
                    spheres.push_back(detail::axial_sphere(f, ax, f.neg(ts[k]), rho));
                }
                left -= std::min<std::size_t>(left, half);
                used.insert(used.end(), circle[rho].begin(), circle[rho].end());
            }
            std::sort(used.begin(), used.end());
            std::sort(rest.begin(), rest.end());
            if (n_on > on.size()) throw sizes_exceed_space("np: more points than H* holds");
            const auto from_used = std::min(n_on, used.size());
            points = rng.pick(used, from_used);
            auto extra = rng.pick(rest, n_on - from_used);
            points.insert(points.end(), extra.begin(), extra.end());
        }
        auto noise = detail::pick_points(rng, off, n_noise, "noise points off H*");
        points.insert(points.end(), noise.begin(), noise.end());
        out.planted = ax.plane;
        break;
    }
    case GeneratorKind::quadric_planted: {
        std::vector<std::vector<Point>> level(spec.q);
        for_each_point(space, [&](const Point& x) { level[quad_norm(f, x)].push_back(x); });
        std::vector<Fe> fits;
        for (Fe r = 1; r < spec.q; ++r)
            if (level[r].size() >= n_on && space.size() - level[r].size() >= n_noise) fits.push_back(r);
        if (fits.empty()) throw sizes_exceed_space("np: no quadric |x| = r0 holds that many points");
        const Fe r0 = fits[rng.below(fits.size())];
        points = rng.pick(level[r0], n_on);
        std::vector<Point> off;
        for (Fe r = 0; r < spec.q; ++r)
            if (r != r0) off.insert(off.end(), level[r].begin(), level[r].end());
        std::sort(off.begin(), off.end());
        auto noise = rng.pick(off, n_noise);
        points.insert(points.end(), noise.begin(), noise.end());
        if (spec.spheres > space.size() * space.q()) throw sizes_exceed_space("ns: exceeds q^(d+1)");
        for (auto i : rng.sample(space.size() * space.q(), spec.spheres))
            spheres.push_back({point_at(space, i / space.q()), static_cast<Fe>(i % space.q())});
        out.quadric_radius = r0;
        break;
    }
    }
    std::sort(points.begin(), points.end());
    std::sort(spheres.begin(), spheres.end());
    out.config = Config(space, std::move(points), std::move(spheres));
    return out;
}

} // namespace incidence
