#pragma once

#include <cctype>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"
#include "errors.hpp"
#include "generators.hpp"
#include "incidence.hpp"
#include "pipeline.hpp"
#include "stratification.hpp"

namespace incidence {

using json = nlohmann::ordered_json;

/// "a/b", an integer, or a finite decimal such as "0.25", exactly.
inline cpp_rational parse_rational(const std::string& s)
{
    auto digits = [](const std::string& t) {
        return !t.empty() && std::all_of(t.begin(), t.end(), [](unsigned char c) { return std::isdigit(c); });
    };
    if (auto slash = s.find('/'); slash != std::string::npos) {
        auto a = s.substr(0, slash), b = s.substr(slash + 1);
        if (!digits(a) || !digits(b) || cpp_int(b) == 0) throw invalid_spec("not a rational: '" + s + "'");
        return cpp_rational(cpp_int(a), cpp_int(b));
    }
    auto dot = s.find('.');
    auto whole = s.substr(0, dot);
    auto frac = dot == std::string::npos ? std::string() : s.substr(dot + 1);
    if (whole.empty()) whole = "0";
    if (!digits(whole) || (dot != std::string::npos && !digits(frac)))
        throw invalid_spec("not a rational: '" + s + "'");
    cpp_int scale = boost::multiprecision::pow(cpp_int(10), static_cast<unsigned>(frac.size()));
    return cpp_rational(cpp_int(whole + frac), scale);
}

inline std::string to_string(const cpp_rational& r)
{
    auto n = boost::multiprecision::numerator(r), d = boost::multiprecision::denominator(r);
    return d == 1 ? n.str() : n.str() + "/" + d.str();
}

namespace detail {

template <class T>
T field_as(const json& j, const char* key)
{
    if (!j.is_object() || !j.contains(key)) throw parse_error(std::string("missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw parse_error(std::string("field '") + key + "' has the wrong type");
    }
}

} // namespace detail

inline json encode(const Hyperplane& h) { return json{{"normal", h.normal()}, {"offset", h.offset()}}; }

inline json encode(const GeneratorSpec& s)
{
    return json{{"kind", to_string(s.kind)}, {"q", s.q},          {"d", s.d},        {"np", s.points},
                {"ns", s.spheres},           {"seed", s.seed},    {"noise", s.noise}};
}

inline GeneratorSpec spec_from_json(const json& j)
{
    GeneratorSpec s;
    s.kind = parse_generator_kind(detail::field_as<std::string>(j, "kind"));
    s.q = detail::field_as<std::uint32_t>(j, "q");
    s.d = detail::field_as<int>(j, "d");
    s.points = detail::field_as<std::size_t>(j, "np");
    s.spheres = detail::field_as<std::size_t>(j, "ns");
    s.seed = j.contains("seed") ? detail::field_as<std::uint64_t>(j, "seed") : 0;
    s.noise = j.contains("noise") ? detail::field_as<double>(j, "noise") : 0.0;
    return s;
}

inline json encode(const Config& c, const json& meta = nullptr)
{
    json spheres = json::array();
    for (const auto& s : c.spheres()) spheres.push_back({{"center", s.center}, {"r", s.radius}});
    json out{{"q", c.space().q()}, {"d", c.space().dim()}, {"points", c.points()}, {"spheres", spheres}};
    if (!meta.is_null()) out["meta"] = meta;
    return out;
}

inline json generation_meta(const GeneratorSpec& spec, const Generated& g)
{
    json meta{{"spec", encode(spec)}, {"seed", spec.seed}, {"prng", Rng::algorithm}};
    meta["planted"] = g.planted ? encode(*g.planted) : json(nullptr);
    if (g.quadric_radius) meta["quadric_radius"] = *g.quadric_radius;
    return meta;
}

inline Config config_from_json(const json& j)
{
    const Space space(detail::field_as<std::uint32_t>(j, "q"), detail::field_as<int>(j, "d"));
    auto points = detail::field_as<std::vector<Point>>(j, "points");
    std::vector<Sphere> spheres;
    const auto arr = detail::field_as<json>(j, "spheres");
    if (!arr.is_array()) throw parse_error("field 'spheres' must be an array");
    for (const auto& s : arr)
        spheres.push_back({detail::field_as<Point>(s, "center"), detail::field_as<Fe>(s, "r")});
    return Config(space, std::move(points), std::move(spheres));
}

// Planted hyperplane recorded by the generator, if any.
inline std::optional<Hyperplane> planted_from_meta(const json& j, const PrimeField& f)
{
    if (!j.contains("meta") || !j["meta"].contains("planted") || j["meta"]["planted"].is_null()) return std::nullopt;
    const auto& h = j["meta"]["planted"];
    return Hyperplane(f, detail::field_as<Vec>(h, "normal"), detail::field_as<Fe>(h, "offset"));
}

inline json encode(const Polynomial& p)
{
    json out = json::array();
    for (const auto& [e, c] : p.terms) out.push_back(json::array({e, c}));
    return out;
}

inline Polynomial polynomial_from_json(const json& j, unsigned vars)
{
    if (!j.is_array()) throw parse_error("polynomial must be an array of [exponents, coefficient]");
    Polynomial p;
    p.vars = vars;
    for (const auto& t : j) {
        if (!t.is_array() || t.size() != 2) throw parse_error("polynomial term must be [exponents, coefficient]");
        try {
            p.terms.emplace_back(t[0].get<Exponent>(), t[1].get<Fe>());
        } catch (const nlohmann::json::exception&) {
            throw parse_error("polynomial term has the wrong type");
        }
    }
    return p;
}

inline json encode(const Certificate& c)
{
    json out;
    out["case"] = to_string(c.tag);
    out["F"] = encode(c.F);
    const auto* tag = obstruction_class(c.F);
    out["obstruction"] = tag ? json(tag) : json(nullptr);
    out["hyperplane"] = c.hyperplane ? encode(*c.hyperplane) : json(nullptr);
    out["points"] = c.points;
    out["spheres"] = c.spheres;
    json aux;
    if (c.aux) {
        aux["R"] = c.aux->R.is_zero() ? json(nullptr) : encode(c.aux->R_chart);
        aux["R_homogenized"] = c.aux->R.is_zero() ? json(nullptr) : encode(c.aux->R);
        aux["chart"] = c.aux->chart;
        aux["D"] = c.aux->D;
        aux["flags"] = c.aux->flags;
    } else {
        aux = json{{"R", nullptr}, {"R_homogenized", nullptr}, {"chart", nullptr}, {"D", nullptr},
                   {"flags", json::array()}};
    }
    if (c.witness_flat) {
        json rows = json::array(), values = json::array();
        for (std::size_t r = 0; r < 2; ++r) {
            rows.push_back(c.witness_flat->constraint_row(r));
            values.push_back(c.witness_flat->constraint_value(r));
        }
        aux["flat"] = json{{"matrix", rows}, {"values", values}};
    } else {
        aux["flat"] = nullptr;
    }
    out["aux"] = aux;
    const auto& p = c.params;
    out["params"] = json{{"K", p.K},
                         {"lambda1", p.lambda1},
                         {"M1", p.M1},
                         {"mu", p.mu},
                         {"B0", p.B0},
                         {"lambda", p.lambda},
                         {"point_threshold", p.point_threshold},
                         {"sphere_threshold", p.sphere_threshold},
                         {"regularized", p.regularized}};
    return out;
}

/// A certificate read back from disk. Defects that the in-memory type cannot
/// represent (a non-canonical hyperplane, a flat that is not codimension 2)
/// are kept as named failures for the verifier.
struct ParsedCertificate {
    Certificate certificate;
    std::vector<std::string> defects;
};

inline ParsedCertificate certificate_from_json(const json& j, const Space& space)
{
    const auto& f = space.field();
    const auto d = static_cast<unsigned>(space.dim());
    ParsedCertificate out;
    auto& c = out.certificate;
    const auto tag = detail::field_as<std::string>(j, "case");
    if (tag == "FlatConcentration")
        c.tag = CaseTag::flat_concentration;
    else if (tag == "DirectionalCoordination")
        c.tag = CaseTag::directional_coordination;
    else if (tag == "NoSignal")
        c.tag = CaseTag::no_signal;
    else
        throw parse_error("field 'case' has unknown value '" + tag + "'");

    c.F = polynomial_from_json(detail::field_as<json>(j, "F"), d);
    if (j.contains("obstruction")) {
        const auto* expect = obstruction_class(c.F);
        const auto& got = j["obstruction"];
        if (expect ? !(got.is_string() && got.get<std::string>() == expect) : !got.is_null())
            out.defects.push_back("obstruction tag matches deg F");
    }
    if (const auto h = detail::field_as<json>(j, "hyperplane"); !h.is_null()) {
        auto normal = detail::field_as<Vec>(h, "normal");
        auto offset = detail::field_as<Fe>(h, "offset");
        bool in_range = normal.size() == d && offset < f.modulus() &&
                        std::all_of(normal.begin(), normal.end(), [&](Fe x) { return x < f.modulus(); }) &&
                        std::any_of(normal.begin(), normal.end(), [](Fe x) { return x != 0; });
        if (!in_range) {
            out.defects.push_back("hyperplane canonical");
        } else {
            Hyperplane hp(f, normal, offset);
            if (hp.normal() != normal || hp.offset() != offset) out.defects.push_back("hyperplane canonical");
            c.hyperplane = hp;
        }
    }
    c.points = detail::field_as<std::vector<std::size_t>>(j, "points");
    c.spheres = detail::field_as<std::vector<std::size_t>>(j, "spheres");

    const auto aux = detail::field_as<json>(j, "aux");
    if (const auto fl = detail::field_as<json>(aux, "flat"); !fl.is_null()) {
        auto rows = detail::field_as<std::vector<Vec>>(fl, "matrix");
        auto values = detail::field_as<std::vector<Fe>>(fl, "values");
        try {
            if (rows.size() != 2 || values.size() != 2) throw error("flat must have two rows");
            Flat flat(f, Hyperplane(f, rows[0], values[0]), Hyperplane(f, rows[1], values[1]));
            if (flat.constraint_row(0) != rows[0] || flat.constraint_row(1) != rows[1] ||
                flat.constraint_value(0) != values[0] || flat.constraint_value(1) != values[1])
                out.defects.push_back("witness flat in reduced form");
            c.witness_flat = flat;
        } catch (const error&) {
            out.defects.push_back("witness flat is a codimension-2 flat inside H0");
        }
    }
    if (!aux.is_null() && aux.contains("D") && !aux["D"].is_null()) {
        DirectionConstraint dc;
        dc.D = detail::field_as<unsigned>(aux, "D");
        dc.chart = detail::field_as<std::size_t>(aux, "chart");
        if (!aux["R"].is_null()) dc.R_chart = polynomial_from_json(aux["R"], d - 1);
        if (!aux["R_homogenized"].is_null()) dc.R = polynomial_from_json(aux["R_homogenized"], d);
        dc.flags = detail::field_as<std::vector<std::string>>(aux, "flags");
        c.aux = std::move(dc);
    }

    const auto p = detail::field_as<json>(j, "params");
    c.params.K = detail::field_as<double>(p, "K");
    c.params.lambda = detail::field_as<double>(p, "lambda");
    c.params.lambda1 = detail::field_as<std::uint64_t>(p, "lambda1");
    c.params.M1 = detail::field_as<std::uint64_t>(p, "M1");
    c.params.mu = detail::field_as<std::uint64_t>(p, "mu");
    c.params.B0 = detail::field_as<std::uint64_t>(p, "B0");
    c.params.point_threshold = detail::field_as<std::uint64_t>(p, "point_threshold");
    c.params.sphere_threshold = detail::field_as<std::uint64_t>(p, "sphere_threshold");
    c.params.regularized = detail::field_as<std::uint64_t>(p, "regularized");
    return out;
}

/// Counts and energies of a configuration, with the dyadic overlap histogram.
/// K is also compared exactly against the regression bound k_bound.
inline json analysis_json(const Config& c, const cpp_rational& k_bound = 3)
{
    const auto st = energies(c);
    const auto layers = stratify(c, LayerMeasure::overlap);
    json hist = json::object();
    for (const auto& [j, pairs] : layers.layers) hist[std::to_string(j)] = pairs.size();
    return json{{"points", c.points().size()},
                {"spheres", c.spheres().size()},
                {"I", st.incidences},
                {"E", st.energy},
                {"E_dual", st.dual_energy},
                {"E_off", st.off_diagonal},
                {"K", st.k.value()},
                {"K_squared", to_string(st.k.k_squared)},
                {"K_bound", to_string(k_bound)},
                {"K_within_bound", st.k.k_squared <= k_bound * k_bound},
                {"layers", hist},
                {"zero_pairs", layers.zero_pairs},
                {"degenerate_pairs", layers.degenerate_pairs}};
}

} // namespace incidence
