#pragma once

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "applications.hpp"
#include "generators.hpp"
#include "io.hpp"
#include "pipeline.hpp"

// Command bodies behind the `incidence` executable. Each takes parsed JSON
// documents and returns a document or an exit status, so the same code runs
// from the binary and from tests.
namespace incidence::cli {

enum exit_code : int { ok = 0, verification_failed = 1, usage = 2 };

inline json cmd_gen(const GeneratorSpec& spec)
{
    auto g = generate(spec);
    return encode(g.config, generation_meta(spec, g));
}

inline json cmd_analyze(const json& config, const std::string& k_bound = "3")
{
    const auto bound = parse_rational(k_bound);
    if (bound <= 0) throw invalid_spec("k-bound: must be positive");
    return analysis_json(config_from_json(config), bound);
}

struct ExtractFlags {
    std::string c_const = "1/4";
    std::string B0 = "auto";
    std::optional<std::uint64_t> lambda;
    std::optional<std::uint64_t> min_richness;
};

inline ExtractOptions extract_options(const ExtractFlags& flags)
{
    ExtractOptions opt;
    opt.c_const = parse_rational(flags.c_const);
    if (opt.c_const <= 0 || opt.c_const > 1) throw invalid_spec("c-const: must lie in (0, 1]");
    if (flags.B0 != "auto") {
        auto b = parse_rational(flags.B0);
        if (boost::multiprecision::denominator(b) != 1) throw invalid_spec("B0: must be an integer or 'auto'");
        opt.B0 = static_cast<std::uint64_t>(boost::multiprecision::numerator(b));
    }
    opt.lambda_override = flags.lambda;
    opt.min_richness = flags.min_richness;
    return opt;
}

inline json cmd_extract(const json& config, const ExtractOptions& opt)
{
    return encode(extract_certificate(config_from_json(config), opt));
}

/// All checks, including shape defects found while reading the certificate.
inline VerifyReport verify_documents(const json& config, const json& certificate)
{
    const auto c = config_from_json(config);
    auto parsed = certificate_from_json(certificate, c.space());
    auto rep = verify_certificate(c, parsed.certificate);
    for (const auto& d : parsed.defects) rep.add(d, false);
    return rep;
}

inline int cmd_verify(const json& config, const json& certificate, std::ostream& out)
{
    auto rep = verify_documents(config, certificate);
    if (rep.ok()) {
        out << "ok: " << rep.checks.size() << " checks passed\n";
        return exit_code::ok;
    }
    for (const auto& name : rep.failures()) out << "FAIL: " << name << "\n";
    return exit_code::verification_failed;
}

struct ExperimentCell {
    GeneratorSpec spec;
    std::string B0 = "auto";
    std::string c_const = "1/4";
};

struct ExperimentGrid {
    std::vector<ExperimentCell> cells;
    std::optional<std::string> output;
    std::size_t cap = 10000;
};

namespace detail {

template <class T>
std::vector<T> axis(const json& j, const char* key, std::vector<T> fallback)
{
    if (!j.contains(key)) return fallback;
    const auto& v = j[key];
    try {
        if (v.is_array()) return v.get<std::vector<T>>();
        return {v.get<T>()};
    } catch (const nlohmann::json::exception&) {
        throw invalid_spec(std::string("grid field '") + key + "' has the wrong type");
    }
}

inline std::vector<std::string> text_axis(const json& j, const char* key, std::string fallback)
{
    if (!j.contains(key)) return {fallback};
    json v = j[key].is_array() ? j[key] : json::array({j[key]});
    std::vector<std::string> out;
    for (const auto& x : v) {
        if (x.is_string())
            out.push_back(x.get<std::string>());
        else if (x.is_number_integer())
            out.push_back(std::to_string(x.get<std::int64_t>()));
        else if (x.is_number())
            out.push_back(x.dump());
        else
            throw invalid_spec(std::string("grid field '") + key + "' has the wrong type");
    }
    return out;
}

inline std::string fixed(double v, int digits = 6)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

inline std::string plain(double v)
{
    std::ostringstream s;
    s << v;
    return s.str();
}

} // namespace detail

inline ExperimentGrid grid_from_json(const json& j)
{
    if (!j.is_object()) throw invalid_spec("grid must be a JSON object");
    ExperimentGrid g;
    const auto qs = detail::axis<std::uint32_t>(j, "q", {});
    const auto ds = detail::axis<int>(j, "d", {3});
    const auto kinds = detail::axis<std::string>(j, "kinds", {});
    const auto sizes = detail::axis<std::vector<std::size_t>>(j, "sizes", {});
    const auto noise = detail::axis<double>(j, "noise", {0.0});
    const auto b0s = detail::text_axis(j, "B0", "auto");
    const auto cs = detail::text_axis(j, "c_const", "1/4");
    std::vector<std::uint64_t> seeds;
    if (j.contains("seeds") && j["seeds"].is_object()) {
        auto from = incidence::detail::field_as<std::uint64_t>(j["seeds"], "from");
        auto count = incidence::detail::field_as<std::uint64_t>(j["seeds"], "count");
        for (std::uint64_t s = 0; s < count; ++s) seeds.push_back(from + s);
    } else {
        seeds = detail::axis<std::uint64_t>(j, "seeds", {0});
    }
    if (j.contains("cap")) g.cap = incidence::detail::field_as<std::size_t>(j, "cap");
    if (j.contains("output")) g.output = incidence::detail::field_as<std::string>(j, "output");
    if (qs.empty()) throw invalid_spec("grid field 'q' must list at least one modulus");
    if (kinds.empty()) throw invalid_spec("grid field 'kinds' must list at least one generator kind");
    if (sizes.empty()) throw invalid_spec("grid field 'sizes' must list at least one [np, ns]");
    for (const auto& s : sizes)
        if (s.size() != 2) throw invalid_spec("grid field 'sizes': each entry must be [np, ns]");
    for (const auto& k : kinds) parse_generator_kind(k);

    const std::uint64_t total = qs.size() * ds.size() * kinds.size() * sizes.size() * noise.size() * seeds.size() *
                                b0s.size() * cs.size();
    if (total > g.cap)
        throw invalid_spec("grid has " + std::to_string(total) + " cells, above the cap of " + std::to_string(g.cap));

    for (auto q : qs)
        for (auto d : ds)
            for (const auto& k : kinds)
                for (const auto& sz : sizes)
                    for (auto nz : noise)
                        for (auto seed : seeds)
                            for (const auto& b0 : b0s)
                                for (const auto& c : cs) {
                                    ExperimentCell cell;
                                    cell.spec = {parse_generator_kind(k), q, d, sz[0], sz[1], seed, nz};
                                    cell.B0 = b0;
                                    cell.c_const = c;
                                    extract_options({c, b0, std::nullopt, std::nullopt}); // validate early
                                    g.cells.push_back(cell);
                                }
    return g;
}

inline const char* csv_header = "q,d,kind,np,ns,noise,seed,B0,c_const,K,case,p_prime,p_prime_frac,deg_F,D,recovered,runtime_ms";

struct CellResult {
    Certificate certificate;
    std::optional<Hyperplane> planted;
    double K = 0;
    bool recovered = false;
    double runtime_ms = 0;
    std::size_t points = 0;
};

inline CellResult run_cell(const ExperimentCell& cell)
{
    auto start = std::chrono::steady_clock::now();
    CellResult r;
    auto g = generate(cell.spec);
    r.planted = g.planted;
    r.points = g.config.points().size();
    if (r.points && !g.config.spheres().empty()) r.K = near_extremality_K(g.config).value();
    r.certificate = extract_certificate(g.config, extract_options({cell.c_const, cell.B0, std::nullopt, std::nullopt}));
    r.recovered = r.planted && r.certificate.hyperplane && *r.certificate.hyperplane == *r.planted;
    r.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return r;
}

inline std::string csv_row(const ExperimentCell& cell, const CellResult& r)
{
    const auto& s = cell.spec;
    const auto& c = r.certificate;
    const bool signal = c.tag != CaseTag::no_signal;
    std::ostringstream row;
    row << s.q << ',' << s.d << ',' << to_string(s.kind) << ',' << s.points << ',' << s.spheres << ','
        << detail::plain(s.noise) << ',' << s.seed << ',' << c.params.B0 << ',' << cell.c_const << ','
        << detail::fixed(r.K) << ',' << to_string(c.tag) << ',' << c.points.size() << ','
        << detail::fixed(r.points ? double(c.points.size()) / double(r.points) : 0.0) << ',' << c.F.degree() << ',';
    if (c.aux) row << c.aux->D;
    row << ',';
    if (is_hyperplane_planted(s.kind)) row << (signal && r.recovered ? 1 : 0);
    row << ',' << detail::fixed(r.runtime_ms, 3);
    return row.str();
}

inline unsigned worker_count()
{
    if (const char* env = std::getenv("INCIDENCE_WORKERS")) {
        char* end = nullptr;
        auto n = std::strtoul(env, &end, 10);
        if (end != env && *end == '\0' && n > 0) return static_cast<unsigned>(n);
    }
    return 1;
}

/// One CSV line per cell, in grid order whatever the completion order.
inline std::vector<std::string> run_grid(const ExperimentGrid& g, unsigned workers = worker_count())
{
    std::vector<std::string> rows(g.cells.size());
    std::vector<std::exception_ptr> errors(g.cells.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i; (i = next++) < g.cells.size();) {
            try {
                rows[i] = csv_row(g.cells[i], run_cell(g.cells[i]));
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < std::max(1u, workers); ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    for (std::size_t i = 0; i < errors.size(); ++i)
        if (errors[i]) {
            try {
                std::rethrow_exception(errors[i]);
            } catch (const std::exception& e) {
                throw invalid_spec("grid cell " + std::to_string(i) + ": " + e.what());
            }
        }
    return rows;
}

} // namespace incidence::cli
