#include "tpump/io.hpp"
#include "tpump/scenarios.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <regex>
#include <sstream>

using namespace tp;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path tmpdir(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("tpump_test_" + name);
    fs::remove_all(p);
    return p;
}

int count(const std::string& hay, const std::string& needle) {
    int n = 0;
    for (size_t i = hay.find(needle); i != std::string::npos; i = hay.find(needle, i + 1)) ++n;
    return n;
}

}  // namespace

TEST(Config, DefaultsForEveryScenarioValidate) {
    for (const auto& id : scenario_ids()) EXPECT_NO_THROW(validate(default_config(id))) << id;
}

TEST(Config, JsonRoundTrip) {
    for (const auto& id : scenario_ids()) {
        ScenarioConfig c = default_config(id);
        c.seed = 99;
        json a = to_json(c);
        json b = to_json(parse_config(a));
        EXPECT_EQ(a, b) << id;
    }
}

TEST(Config, OverridesApplyOnTopOfDefaults) {
    ScenarioConfig c = parse_config(json::parse(R"({"scenario": "fig2_bound", "drive": {"period_us": 0.8}})"));
    EXPECT_DOUBLE_EQ(c.period_us, 0.8);
    EXPECT_EQ(c.first_site, 18);
    EXPECT_EQ(c.init_occupancy, 2);
}

TEST(Config, Rejections) {
    auto bad = [](const char* text) {
        try {
            parse_config(json::parse(text));
        } catch (const Error& e) {
            return e.kind() == Error::Kind::Config;
        }
        return false;
    };
    EXPECT_TRUE(bad(R"({"scenario": "nope"})"));
    EXPECT_TRUE(bad(R"({"drive": {}})"));
    EXPECT_TRUE(bad(R"({"scenario": "fig2_bound", "bogus": 1})"));
    EXPECT_TRUE(bad(R"({"scenario": "fig2_bound", "drive": {"period": 1}})"));
    EXPECT_TRUE(bad(R"({"scenario": "fig2_bound", "drive": {"period_us": -1}})"));
    EXPECT_TRUE(bad(R"({"scenario": "fig2_bound", "lattice": {"sites": [30, 20]}})"));
    EXPECT_TRUE(bad(R"({"scenario": "fig2_bound", "initial": {"sites": [40]}})"));
    EXPECT_TRUE(bad(R"({"scenario": "fig2_bound", "initial": {"occupancy": 3}})"));
    EXPECT_TRUE(bad(R"({"scenario": "fig2_bound", "lattice": {"stagger": "sideways"}})"));
    EXPECT_TRUE(bad(R"({"scenario": "sweep_offset", "sweep": {"axes": [{"name": "offset_r", "values": []}]}})"));
    EXPECT_TRUE(bad(R"({"scenario": "sweep_offset", "sweep": {"axes": [{"name": "colour", "values": [1]}]}})"));
    EXPECT_TRUE(bad(R"({"scenario": "fig2_bound", "drive": {"j_mhz": "eight"}})"));
}

TEST(Config, LoadReportsMissingFile) {
    try {
        load_config("/nonexistent/cfg.json");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), Error::Kind::Io);
        EXPECT_NE(std::string(e.what()).find("/nonexistent/cfg.json"), std::string::npos);
    }
}

TEST(Sweep, CartesianOrderFirstAxisSlowest) {
    auto p = sweep_points({{"a", {1, 2}}, {"b", {10, 20, 30}}});
    ASSERT_EQ(p.size(), 6u);
    EXPECT_EQ(p[0], (std::vector<double>{1, 10}));
    EXPECT_EQ(p[2], (std::vector<double>{1, 30}));
    EXPECT_EQ(p[3], (std::vector<double>{2, 10}));
    EXPECT_THROW(sweep_points({{"a", {}}}), Error);
}

TEST(Heatmap, TwoByTwoColours) {
    fs::path d = tmpdir("heat");
    Eigen::MatrixXd m(2, 2);
    m << 0, 1, 1, 0;
    emit_heatmap(m, d / "h.svg");
    std::string svg = slurp(d / "h.svg");
    EXPECT_EQ(count(svg, "#08306b"), 2);
    EXPECT_EQ(count(svg, "#ffffff"), 2);
    EXPECT_EQ(slurp(d / "h.csv"), "row,col,value\n0,0,0\n0,1,1\n1,0,1\n1,1,0\n");
    EXPECT_THROW(emit_heatmap(Eigen::MatrixXd(0, 0), d / "e.svg"), Error);
}

TEST(Heatmap, UnwritablePathReportsPath) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Ones(1, 1);
    try {
        emit_heatmap(m, "/proc/tpump_no/h.svg");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), Error::Kind::Io);
        EXPECT_NE(std::string(e.what()).find("/proc/tpump_no"), std::string::npos);
    }
}

TEST(Run, Fig2WritesCompleteManifestWithChecksums) {
    ScenarioConfig c = default_config("fig2_bound");
    c.output_dir = tmpdir("fig2").string();
    RunOutcome r = run_scenario(c);
    json m = json::parse(slurp(r.dir / "manifest.json"));
    EXPECT_EQ(m["status"], "complete");
    EXPECT_EQ(m["original_sites"].front(), 18);
    EXPECT_EQ(m["original_sites"].back(), 26);
    std::set<std::string> names;
    for (const auto& f : m["files"]) {
        names.insert(f["path"]);
        EXPECT_EQ(f["sha256"], sha256_file(r.dir / f["path"].get<std::string>()));
    }
    for (const char* want : {"populations.csv", "correlations.csv", "com.csv", "summary.json", "heatmap_p2.svg",
                             "gamma_half_period.svg"})
        EXPECT_TRUE(names.count(want)) << want;
    EXPECT_EQ(slurp(r.dir / "populations.csv").substr(0, 18), "time,site,P0,P1,P2");
}

TEST(Run, ReproducibleBytes) {
    ScenarioConfig c = default_config("fig3_resonant");
    c.output_dir = tmpdir("rep1").string();
    RunOutcome a = run_scenario(c);
    c.output_dir = tmpdir("rep2").string();
    RunOutcome b = run_scenario(c);
    for (const char* f : {"populations.csv", "correlations.csv", "com.csv", "summary.json", "heatmap_p2.svg"})
        EXPECT_EQ(slurp(a.dir / f), slurp(b.dir / f)) << f;
}

TEST(Run, HalfPeriodCorrelationIsDiagonalDominant) {
    DynamicsOutput d = simulate(default_config("fig2_bound"));
    const Frame& f = d.trace.frames[50];
    EXPECT_NEAR(f.time, 0.2, 1e-12);
    EXPECT_LT(offdiagonal_gamma_fraction(f.gamma), 0.1);
}

TEST(Run, EdgeRunEmitsSpectrumWithEdgeWeights) {
    ScenarioConfig c = default_config("fig4_edge_left");
    c.cycles = 0.25;
    c.output_dir = tmpdir("edge").string();
    RunOutcome r = run_scenario(c);
    std::string s = slurp(r.dir / "edge_spectrum.csv");
    EXPECT_EQ(s.substr(0, s.find('\n')), "time,level,energy_mhz,weight_first_edge,weight_last_edge");
}

TEST(Run, SweepScenarioRefusedByRun) {
    EXPECT_THROW(run_scenario(default_config("sweep_offset")), Error);
}

TEST(Sweep, WorkersDoNotChangeResultsAndFailuresAreRecorded) {
    ScenarioConfig c = default_config("sweep_offset");
    c.cycles = 2;
    c.echo_cycles = {1, 2};
    c.axes = {{"period_us", {0.4, -1.0, 0.8}}};
    c.output_dir = tmpdir("sw1").string();
    RunOutcome a = run_sweep(c, 1);
    c.output_dir = tmpdir("sw2").string();
    RunOutcome b = run_sweep(c, 3);
    EXPECT_EQ(slurp(a.dir / "sweep.csv"), slurp(b.dir / "sweep.csv"));
    EXPECT_EQ(a.summary["n_failed"], 1);
    EXPECT_EQ(a.manifest["point_failures"].size(), 1u);
    EXPECT_EQ(a.manifest["point_failures"][0]["point"], 1);
    EXPECT_EQ(a.summary["points"][2]["seed"], c.seed ^ 2u);
}

TEST(Sweep, DisorderAverageIsBitReproducible) {
    ScenarioConfig c = default_config("sweep_disorder");
    c.realizations = 3;
    c.cycles = 2;
    c.echo_cycles = {2};
    apply_axis(c, "disorder_w", 2.0);
    json a = sweep_point(c, 11, nullptr), b = sweep_point(c, 11, nullptr), d = sweep_point(c, 12, nullptr);
    EXPECT_EQ(a.dump(), b.dump());
    EXPECT_NE(a.dump(), d.dump());
}

TEST(Bands, Fig1ScenarioReportsChernAndGap) {
    BandsOutput b = compute_scenario_bands(default_config("bands_fig1e"));
    EXPECT_EQ(b.summary["chern"], json({-1, 1}));
    EXPECT_NEAR(b.summary["gap_min_mhz"].get<double>(), 32.0, 1e-6);
}
