// incidence: generate, analyze, extract, verify and run experiment grids.
//
// Exit status: 0 success, 1 verification failure, 2 usage or parse error.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "incidence/commands.hpp"

using namespace incidence;
namespace ic = incidence::cli;

namespace {

json read_json(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw parse_error(path + ": " + e.what());
    }
}

void emit(const std::string& text, const std::string& path)
{
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw parse_error("cannot write '" + path + "'");
    out << text;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Incidence structure of points and spheres over F_q^d"};
    app.require_subcommand(1);

    std::string out_path;

    auto* gen = app.add_subcommand("gen", "generate a configuration");
    GeneratorSpec spec;
    std::string kind = "uniform-random", spec_file;
    gen->add_option("--spec", spec_file, "GeneratorSpec JSON file (overrides the flags)");
    gen->add_option("--kind", kind, "uniform-random | hyperplane-planted | quadric-planted | reflected-pairs");
    gen->add_option("--q", spec.q, "odd prime modulus");
    gen->add_option("--d", spec.d, "dimension, >= 3");
    gen->add_option("--np", spec.points, "number of points");
    gen->add_option("--ns", spec.spheres, "number of spheres");
    gen->add_option("--seed", spec.seed, "64-bit seed");
    gen->add_option("--noise", spec.noise, "fraction of points off the planted structure");
    gen->add_option("-o,--out", out_path, "output file (default stdout)");

    auto* analyze = app.add_subcommand("analyze", "incidence counts, energies, K and layer histogram");
    std::string config_path;
    analyze->add_option("config", config_path)->required();
    std::string k_bound = "3";
    analyze->add_option("--k-bound", k_bound, "regression bound on K reported as K_within_bound");
    analyze->add_option("-o,--out", out_path);

    auto* extract = app.add_subcommand("extract", "run the extraction pipeline and write a certificate");
    ic::ExtractFlags flags;
    extract->add_option("config", config_path)->required();
    extract->add_option("--c-const", flags.c_const, "persistence constant, e.g. 1/4 or 0.25");
    extract->add_option("--B0", flags.B0, "flat multiplicity threshold, integer or auto");
    extract->add_option("--lambda", flags.lambda, "fixed persistence threshold");
    extract->add_option("--min-richness", flags.min_richness, "floor on the persistence threshold (default d+1)");
    extract->add_option("-o,--out", out_path);

    auto* verify = app.add_subcommand("verify", "re-check a certificate against its configuration");
    std::string cert_path;
    verify->add_option("config", config_path)->required();
    verify->add_option("certificate", cert_path)->required();

    auto* experiment = app.add_subcommand("experiment", "run a grid and write CSV");
    std::string grid_path;
    experiment->add_option("grid", grid_path)->required();
    experiment->add_option("-o,--out", out_path, "CSV path (default: grid 'output' field, else stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : ic::exit_code::usage;
    }

    try {
        if (*gen) {
            if (!spec_file.empty()) {
                spec = spec_from_json(read_json(spec_file));
            } else {
                spec.kind = parse_generator_kind(kind);
            }
            emit(dump(ic::cmd_gen(spec)), out_path);
        } else if (*analyze) {
            emit(dump(ic::cmd_analyze(read_json(config_path), k_bound)), out_path);
        } else if (*extract) {
            auto opt = ic::extract_options(flags);
            emit(dump(ic::cmd_extract(read_json(config_path), opt)), out_path);
        } else if (*verify) {
            return ic::cmd_verify(read_json(config_path), read_json(cert_path), std::cout);
        } else if (*experiment) {
            auto grid = ic::grid_from_json(read_json(grid_path));
            std::ostringstream csv;
            csv << ic::csv_header << "\n";
            for (const auto& row : ic::run_grid(grid)) csv << row << "\n";
            emit(csv.str(), out_path.empty() ? grid.output.value_or("") : out_path);
        }
    } catch (const incidence::error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return ic::exit_code::usage;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
    return ic::exit_code::ok;
}
