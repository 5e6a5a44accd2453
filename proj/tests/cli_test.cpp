#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "incidence/commands.hpp"

using namespace incidence;
namespace ic = incidence::cli;
namespace fs = std::filesystem;

namespace {

const std::vector<GeneratorKind> all_kinds = {GeneratorKind::uniform_random, GeneratorKind::hyperplane_planted,
                                              GeneratorKind::quadric_planted, GeneratorKind::reflected_pairs};

struct TempDir {
    fs::path path;
    TempDir()
    {
        path = fs::temp_directory_path() /
               ("incidence_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
                ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

void write(const std::string& path, const std::string& text) { std::ofstream(path, std::ios::binary) << text; }

std::string slurp(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

int run(const std::string& args)
{
    const std::string cmd = std::string(INCIDENCE_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST(Commands, GenIsDeterministicAndCarriesMeta)
{
    GeneratorSpec spec{GeneratorKind::reflected_pairs, 7, 3, 20, 10, 5, 0};
    auto a = ic::cmd_gen(spec), b = ic::cmd_gen(spec);
    EXPECT_EQ(a.dump(), b.dump());
    EXPECT_EQ(a["meta"]["seed"], 5);
    EXPECT_EQ(a["meta"]["prng"], "mt19937_64");
    EXPECT_TRUE(a["meta"].contains("planted"));
}

TEST(Commands, ExtractThenVerifyRoundTrip)
{
    for (auto kind : all_kinds)
        for (std::uint64_t seed = 0; seed < 3; ++seed) {
            auto config = ic::cmd_gen({kind, 7, 3, 25, 14, seed, 0.1});
            auto cert = ic::cmd_extract(config, ic::extract_options({}));
            // through text, as the binary would
            auto reread = json::parse(cert.dump(2));
            std::ostringstream out;
            EXPECT_EQ(ic::cmd_verify(json::parse(config.dump()), reread, out), ic::exit_code::ok) << out.str();
        }
}

TEST(Commands, VerifyReportsTampering)
{
    auto config = ic::cmd_gen({GeneratorKind::reflected_pairs, 7, 3, 27, 14, 1, 0});
    auto cert = ic::cmd_extract(config, ic::extract_options({}));
    ASSERT_NE(cert["case"], "NoSignal");
    cert["points"].erase(cert["points"].size() - 1);
    std::ostringstream out;
    EXPECT_EQ(ic::cmd_verify(config, cert, out), ic::exit_code::verification_failed);
    EXPECT_NE(out.str().find("FAIL: "), std::string::npos);
}

TEST(Commands, AnalyzeReportsTheEnergyIdentity)
{
    auto config = ic::cmd_gen({GeneratorKind::uniform_random, 5, 3, 30, 12, 2, 0});
    auto a = ic::cmd_analyze(config);
    EXPECT_EQ(a["E"].get<std::uint64_t>(), a["I"].get<std::uint64_t>() + a["E_off"].get<std::uint64_t>());
}

TEST(Commands, AnalyzeEmptyDeterministicAndBounded)
{
    auto empty = ic::cmd_analyze(json::parse(R"({"q": 5, "d": 3, "points": [], "spheres": []})"));
    for (const char* key : {"I", "E", "E_dual", "E_off"}) EXPECT_EQ(empty[key], 0) << key;
    EXPECT_EQ(empty["K"], 0.0);
    EXPECT_TRUE(empty["layers"].empty());

    auto planted = ic::cmd_gen({GeneratorKind::reflected_pairs, 7, 3, 27, 14, 0, 0});
    auto a = ic::cmd_analyze(planted);
    EXPECT_EQ(a.dump(), ic::cmd_analyze(planted).dump());
    EXPECT_GT(a["K"].get<double>(), 0.0);
    EXPECT_EQ(a["K_bound"], "3");
    EXPECT_TRUE(a["K_within_bound"].get<bool>());
    // a bound below the measured K is reported as exceeded
    auto tight = ic::cmd_analyze(planted, "1/1000");
    EXPECT_FALSE(tight["K_within_bound"].get<bool>());
    EXPECT_THROW(ic::cmd_analyze(planted, "0"), invalid_spec);
}

TEST(Commands, ObstructionTagFollowsDegree)
{
    auto config = ic::cmd_gen({GeneratorKind::reflected_pairs, 7, 3, 27, 14, 2, 0});
    auto cert = ic::cmd_extract(config, ic::extract_options({}));
    ASSERT_EQ(cert["obstruction"], "affine obstruction");
    cert["obstruction"] = "general algebraic obstruction";
    std::ostringstream out;
    EXPECT_EQ(ic::cmd_verify(config, cert, out), ic::exit_code::verification_failed);
    EXPECT_NE(out.str().find("obstruction tag matches deg F"), std::string::npos);

    auto sparse = ic::cmd_gen({GeneratorKind::uniform_random, 13, 3, 8, 8, 0, 0});
    auto none = ic::cmd_extract(sparse, ic::extract_options({}));
    if (none["case"] == "NoSignal") EXPECT_TRUE(none["obstruction"].is_null());
}

TEST(Commands, ExtractOptionsValidate)
{
    EXPECT_THROW(ic::extract_options({"0", "auto", std::nullopt, std::nullopt}), invalid_spec);
    EXPECT_THROW(ic::extract_options({"1/4", "2.5", std::nullopt, std::nullopt}), invalid_spec);
    EXPECT_THROW(ic::extract_options({"abc", "auto", std::nullopt, std::nullopt}), error);
    EXPECT_EQ(*ic::extract_options({"0.5", "7", std::nullopt, std::nullopt}).B0, 7u);
}

TEST(Grid, SingleCellGivesHeaderAndOneRow)
{
    auto g = ic::grid_from_json(json::parse(R"({"q": 7, "kinds": ["reflected-pairs"], "sizes": [[27, 14]]})"));
    ASSERT_EQ(g.cells.size(), 1u);
    auto rows = ic::run_grid(g, 1);
    ASSERT_EQ(rows.size(), 1u);
    const std::string header = ic::csv_header;
    EXPECT_EQ(std::count(rows[0].begin(), rows[0].end(), ','), std::count(header.begin(), header.end(), ','));
    EXPECT_EQ(rows[0].rfind("7,3,reflected-pairs,27,14,0,0,", 0), 0u) << rows[0];
}

TEST(Grid, OrderIsIndependentOfWorkers)
{
    auto g = ic::grid_from_json(json::parse(
        R"({"q": [5, 7], "kinds": ["uniform-random", "hyperplane-planted"], "sizes": [[12, 6]], "seeds": {"from": 3, "count": 3}})"));
    ASSERT_EQ(g.cells.size(), 12u);
    auto strip = [](std::vector<std::string> rows) {
        for (auto& r : rows) r = r.substr(0, r.rfind(','));
        return rows;
    };
    EXPECT_EQ(strip(ic::run_grid(g, 1)), strip(ic::run_grid(g, 3)));
}

TEST(Grid, Validation)
{
    EXPECT_THROW(ic::grid_from_json(json::parse(R"({"q": 7, "kinds": ["uniform-random"], "sizes": [[5, 5]], "seeds": {"from": 0, "count": 20}, "cap": 10})")),
                 invalid_spec);
    EXPECT_THROW(ic::grid_from_json(json::parse(R"({"q": 7, "kinds": ["nope"], "sizes": [[5, 5]]})")), invalid_spec);
    EXPECT_THROW(ic::grid_from_json(json::parse(R"({"q": 7, "kinds": ["uniform-random"], "sizes": [[5]]})")), invalid_spec);
    EXPECT_THROW(ic::grid_from_json(json::parse(R"({"kinds": ["uniform-random"], "sizes": [[5, 5]]})")), invalid_spec);
    EXPECT_THROW(ic::grid_from_json(json::parse(R"([1, 2])")), invalid_spec);
    // a bad cell surfaces as an error, not a partial CSV
    auto bad = ic::grid_from_json(json::parse(R"({"q": 3, "kinds": ["uniform-random"], "sizes": [[100, 5]]})"));
    EXPECT_THROW(ic::run_grid(bad, 1), invalid_spec);
}

TEST(Binary, RoundTripAndExitCodes)
{
    TempDir dir;
    const auto cfg = dir.file("c.json"), cert = dir.file("cert.json");
    for (auto kind : all_kinds) {
        ASSERT_EQ(run("gen --kind " + to_string(kind) + " --q 7 --d 3 --np 25 --ns 14 --seed 9 --noise 0.1 -o " + cfg), 0);
        ASSERT_EQ(run("extract " + cfg + " -o " + cert), 0);
        EXPECT_EQ(run("verify " + cfg + " " + cert), 0) << to_string(kind);
        EXPECT_EQ(run("analyze " + cfg + " --k-bound 2.5 -o " + dir.file("a.json")), 0);
    }

    // same flags, same bytes
    const auto again = dir.file("again.json");
    ASSERT_EQ(run("gen --kind reflected-pairs --q 7 --d 3 --np 27 --ns 14 --seed 4 -o " + cfg), 0);
    ASSERT_EQ(run("gen --kind reflected-pairs --q 7 --d 3 --np 27 --ns 14 --seed 4 -o " + again), 0);
    EXPECT_EQ(slurp(cfg), slurp(again));

    ASSERT_EQ(run("extract " + cfg + " -o " + cert), 0);
    auto doc = json::parse(slurp(cert));
    ASSERT_NE(doc["case"], "NoSignal");
    doc["hyperplane"]["offset"] = (doc["hyperplane"]["offset"].get<int>() + 1) % 7;
    write(cert, doc.dump());
    EXPECT_EQ(run("verify " + cfg + " " + cert), 1);

    write(dir.file("broken.json"), "{ not json");
    EXPECT_EQ(run("analyze " + dir.file("broken.json")), 2);
    EXPECT_EQ(run("analyze " + dir.file("missing.json")), 2);
    EXPECT_EQ(run("gen --kind uniform-random --q 9 --d 3 --np 1 --ns 1"), 2);
    EXPECT_EQ(run("gen --kind bogus"), 2);
    EXPECT_EQ(run("frobnicate"), 2);
    EXPECT_EQ(run("--help"), 0);

    write(dir.file("grid.json"), R"({"q": 5, "kinds": ["hyperplane-planted"], "sizes": [[10, 6]], "seeds": [1, 2]})");
    ASSERT_EQ(run("experiment " + dir.file("grid.json") + " -o " + dir.file("out.csv")), 0);
    auto csv = slurp(dir.file("out.csv"));
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
    EXPECT_EQ(csv.rfind(ic::csv_header, 0), 0u);
}
