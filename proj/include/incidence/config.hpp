#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "errors.hpp"
#include "geometry.hpp"

namespace incidence {

/// Fixed-size set of point indices backed by 64-bit words.
class PointSet {
public:
    PointSet() = default;
    explicit PointSet(std::size_t n) : n_(n), words_((n + 63) / 64, 0) {}

    void insert(std::size_t i) { words_[i / 64] |= std::uint64_t{1} << (i % 64); }
    bool contains(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1; }
    std::size_t universe() const noexcept { return n_; }

    std::size_t count() const noexcept
    {
        std::size_t c = 0;
        for (auto w : words_) c += std::popcount(w);
        return c;
    }

    std::size_t intersection_count(const PointSet& o) const noexcept
    {
        std::size_t c = 0;
        for (std::size_t i = 0; i < words_.size(); ++i) c += std::popcount(words_[i] & o.words_[i]);
        return c;
    }

    std::size_t intersection_count(const PointSet& a, const PointSet& b) const noexcept
    {
        std::size_t c = 0;
        for (std::size_t i = 0; i < words_.size(); ++i) c += std::popcount(words_[i] & a.words_[i] & b.words_[i]);
        return c;
    }

    std::vector<std::size_t> members() const
    {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < n_; ++i)
            if (contains(i)) out.push_back(i);
        return out;
    }

    static PointSet from(std::size_t n, const std::vector<std::size_t>& idx)
    {
        PointSet s(n);
        for (auto i : idx) s.insert(i);
        return s;
    }

    static PointSet all(std::size_t n)
    {
        PointSet s(n);
        for (std::size_t i = 0; i < n; ++i) s.insert(i);
        return s;
    }

    bool operator==(const PointSet&) const = default;

private:
    std::size_t n_ = 0;
    std::vector<std::uint64_t> words_;
};

/// A point set P and a sphere family S over one ambient space. Both lists
/// are duplicate-free; indices into them are stable identifiers.
class Config {
public:
    Config(Space space, std::vector<Point> points, std::vector<Sphere> spheres)
        : space_(std::move(space)), points_(std::move(points)), spheres_(std::move(spheres))
    {
        const auto d = static_cast<std::size_t>(space_.dim());
        auto check = [&](const Point& p, const std::string& what) {
            if (p.size() != d) throw invalid_spec(what + " has wrong dimension");
            for (Fe x : p)
                if (x >= space_.q()) throw invalid_spec(what + " has a coordinate outside [0, q)");
        };
        for (const auto& p : points_) check(p, "point");
        for (const auto& s : spheres_) {
            check(s.center, "sphere center");
            if (s.radius >= space_.q()) throw invalid_spec("sphere radius outside [0, q)");
        }
        if (std::set<Point>(points_.begin(), points_.end()).size() != points_.size())
            throw invalid_spec("duplicate points");
        if (std::set<Sphere>(spheres_.begin(), spheres_.end()).size() != spheres_.size())
            throw invalid_spec("duplicate spheres");
    }

    const Space& space() const noexcept { return space_; }
    const PrimeField& field() const noexcept { return space_.field(); }
    const std::vector<Point>& points() const noexcept { return points_; }
    const std::vector<Sphere>& spheres() const noexcept { return spheres_; }

    // Points of P lying on h.
    PointSet on_hyperplane(const Hyperplane& h) const
    {
        PointSet s(points_.size());
        for (std::size_t i = 0; i < points_.size(); ++i)
            if (h.contains(field(), points_[i])) s.insert(i);
        return s;
    }

    PointSet on_sphere(const Sphere& sp) const
    {
        PointSet s(points_.size());
        for (std::size_t i = 0; i < points_.size(); ++i)
            if (incidence::on_sphere(field(), sp, points_[i])) s.insert(i);
        return s;
    }

    // Per-sphere membership sets, S in sphere order.
    std::vector<PointSet> sphere_memberships() const
    {
        std::vector<PointSet> out;
        out.reserve(spheres_.size());
        for (const auto& sp : spheres_) out.push_back(on_sphere(sp));
        return out;
    }

private:
    Space space_;
    std::vector<Point> points_;
    std::vector<Sphere> spheres_;
};

} // namespace incidence
