#pragma once

// Hand-rolled random inputs and brute-force oracles shared by the tests.
// Oracles deliberately avoid the library's fast paths: they loop over raw
// coordinates and use plain modular arithmetic.

#include <cstdint>
#include <set>
#include <vector>

#include "incidence/config.hpp"
#include "incidence/generators.hpp"
#include "incidence/geometry.hpp"

namespace testing_support {

using namespace incidence;

inline std::uint64_t mod(std::int64_t v, std::uint32_t q)
{
    auto r = v % static_cast<std::int64_t>(q);
    return static_cast<std::uint64_t>(r < 0 ? r + q : r);
}

// |x - c| computed with plain integers.
inline std::uint64_t raw_form(const Point& x, const Point& c, std::uint32_t q)
{
    std::int64_t acc = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        std::int64_t t = std::int64_t(x[i]) - std::int64_t(c[i]);
        acc += t * t;
    }
    return mod(acc, q);
}

inline bool raw_on_sphere(const Point& x, const Sphere& s, std::uint32_t q) { return raw_form(x, s.center, q) == s.radius; }

inline bool raw_on_plane(const Point& x, const Vec& n, Fe b, std::uint32_t q)
{
    std::uint64_t acc = 0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += std::uint64_t(n[i]) * x[i];
    return acc % q == b;
}

inline std::vector<Point> all_points(std::uint32_t q, int d)
{
    std::vector<Point> out;
    Point p(d, 0);
    while (true) {
        out.push_back(p);
        int k = d - 1;
        while (k >= 0 && ++p[k] == q) p[k--] = 0;
        if (k < 0) break;
    }
    return out;
}

inline Point random_point(Rng& rng, std::uint32_t q, int d)
{
    Point p(d);
    for (auto& x : p) x = static_cast<Fe>(rng.below(q));
    return p;
}

inline Vec random_nonzero(Rng& rng, std::uint32_t q, int d)
{
    Vec v;
    do v = random_point(rng, q, d);
    while (std::all_of(v.begin(), v.end(), [](Fe x) { return x == 0; }));
    return v;
}

inline Sphere random_sphere(Rng& rng, std::uint32_t q, int d)
{
    return {random_point(rng, q, d), static_cast<Fe>(rng.below(q))};
}

inline Hyperplane random_hyperplane(Rng& rng, const PrimeField& f, int d)
{
    return Hyperplane(f, random_nonzero(rng, f.modulus(), d), static_cast<Fe>(rng.below(f.modulus())));
}

// Random configuration with distinct points and spheres.
inline Config random_config(Rng& rng, std::uint32_t q, int d, std::size_t np, std::size_t ns)
{
    std::set<Point> pts;
    std::set<Sphere> sps;
    while (pts.size() < np) pts.insert(random_point(rng, q, d));
    while (sps.size() < ns) sps.insert(random_sphere(rng, q, d));
    return Config(Space(q, d), {pts.begin(), pts.end()}, {sps.begin(), sps.end()});
}

// Denser inputs: points drawn from a few random spheres so that sphere
// overlaps are frequent.
inline Config clustered_config(Rng& rng, std::uint32_t q, int d, std::size_t np, std::size_t ns)
{
    const Space space(q, d);
    std::vector<Sphere> seeds;
    std::set<Sphere> sps;
    while (sps.size() < ns) sps.insert(random_sphere(rng, q, d));
    std::vector<Sphere> sv(sps.begin(), sps.end());
    std::vector<Point> pool;
    for (std::size_t i = 0; i < std::min<std::size_t>(3, sv.size()); ++i) {
        auto on = sphere_points(space, sv[rng.below(sv.size())]);
        pool.insert(pool.end(), on.begin(), on.end());
    }
    std::set<Point> pts;
    for (std::size_t tries = 0; pts.size() < np && tries < 20 * np; ++tries)
        pts.insert(pool.empty() || rng.below(4) == 0 ? random_point(rng, q, d) : pool[rng.below(pool.size())]);
    while (pts.size() < np) pts.insert(random_point(rng, q, d));
    return Config(space, {pts.begin(), pts.end()}, sv);
}

} // namespace testing_support
