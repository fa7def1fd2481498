// SPDX-License-Identifier: Apache-2.0
#include "fdesic/config.hpp"
#include "fdesic/errors.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace fdesic;
namespace tu = fdesic::testing_util;

namespace {

RunConfig parse(const std::string& text) { return parse_run_config(text, "/base"); }

void expect_config_error(const std::string& text, const std::string& fragment) {
    try {
        parse(text);
        FAIL() << "accepted: " << text;
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
    }
}

} // namespace

TEST(Config, EmptyDocumentGivesDefaults) {
    const auto c = parse("{}");
    EXPECT_EQ(c.seed, 0u);
    EXPECT_FALSE(c.out_dir);
    EXPECT_EQ(c.channel.source, ChannelConfig::Source::Benchmark);
    EXPECT_EQ(c.optimize.family, Family::Pcb);
    EXPECT_EQ(c.optimize.taps, 2u);
    EXPECT_TRUE(c.optimize.quantized);
    EXPECT_EQ(c.solver.restarts, 16u);
    EXPECT_EQ(c.network.uldl_gamma_ul_db, (std::vector<double>{10, 15, 20}));
    EXPECT_TRUE(c.network.default_scenarios);
    EXPECT_FALSE(c.digsic.quantized);
    EXPECT_EQ(c.constraints_for(Family::Rfic).boxes.size(), 4u);
}

TEST(Config, ShippedConfigsParse) {
    for (const char* name : {"model", "optimize", "sweep", "network", "digsic"}) {
        const auto path = std::filesystem::path(FDESIC_SOURCE_DIR) / "configs" / (std::string(name) + ".json");
        EXPECT_NO_THROW(load_run_config(path)) << name;
    }
}

TEST(Config, FullOptimizeSection) {
    const auto c = parse(R"({
      "seed": 42, "out_dir": "runs/a",
      "solver": {"restarts": 3, "max_iterations": 50, "tolerance": 1e-9, "method": "nelder-mead"},
      "channel": {"source": "file", "path": "chan.csv"},
      "optimize": {"family": "rfic", "taps": 3, "quantized": false, "local_search_rounds": 2,
                   "band": {"center_hz": 905e6, "bandwidth_hz": 10e6}, "baseline": "heur"}
    })");
    EXPECT_EQ(c.seed, 42u);
    EXPECT_EQ(*c.out_dir, std::filesystem::path("/base/runs/a"));
    EXPECT_EQ(c.solver.restarts, 3u);
    EXPECT_EQ(c.solver.method, SolverOptions::Method::NelderMead);
    EXPECT_EQ(c.channel.source, ChannelConfig::Source::File);
    EXPECT_EQ(c.channel.path, std::filesystem::path("/base/chan.csv"));
    EXPECT_EQ(c.optimize.family, Family::Rfic);
    EXPECT_EQ(*c.optimize.band.center_hz, 905e6);
    EXPECT_TRUE(c.optimize.heuristic_baseline);
}

TEST(Config, ConstraintOverrides) {
    const auto c = parse(R"({"constraints": {"pcb": {
        "boxes": {"amp_db": {"min": -10, "max": 0}},
        "quantization": {"phase_rad": {"min": -3.141592653589793, "max": 3.141592653589793, "bits": 6}}}}})");
    const auto cs = c.constraints_for(Family::Pcb);
    EXPECT_EQ(cs.boxes[0].min, -10.0);
    EXPECT_EQ(cs.quantization->axes[1].bits, 6);
    EXPECT_EQ(cs.quantization->axes[0].step, 0.5); // untouched axes keep defaults

    const auto off = parse(R"({"constraints": {"rfic": {"quantization": false}}})");
    EXPECT_FALSE(off.constraints_for(Family::Rfic).quantization);
}

TEST(Config, NetworkDbAndLinearForms) {
    const auto c = parse(R"({"network": {"gamma_self_db": 10,
        "scenarios": [{"name": "a", "kind": "uldl", "gamma_ul": 10, "gamma_dl_db": 10}]}})");
    EXPECT_NEAR(c.network.gamma_self, 10.0, 1e-12);
    ASSERT_EQ(c.network.scenarios.size(), 1u);
    EXPECT_NEAR(c.network.scenarios[0].scenario.gamma_dl, 10.0, 1e-12);
    EXPECT_FALSE(c.network.default_scenarios);
}

TEST(Config, Rejections) {
    expect_config_error("{", "");
    expect_config_error("[]", "");
    expect_config_error(R"({"bogus": 1})", "bogus");
    expect_config_error(R"({"optimize": {"taps": 0}})", "taps");
    expect_config_error(R"({"optimize": {"taps": "two"}})", "taps");
    expect_config_error(R"({"optimize": {"family": "ferrite"}})", "family");
    expect_config_error(R"({"seed": -1})", "seed");
    expect_config_error(R"({"network": {"gamma_self": 1, "gamma_self_db": 0}})", "gamma_self");
    expect_config_error(R"({"network": {"scenarios": [{"name": "x", "kind": "tdma", "oops": 1}]}})",
                        "network.scenarios[0]");
    expect_config_error(R"({"channel": {"source": "file"}})", "path");
    expect_config_error(R"({"model": {"grid": {"start_hz": 2e9, "stop_hz": 1e9, "points": 3}}})", "grid");
    expect_config_error(R"({"solver": {"method": "annealing"}})", "method");
    expect_config_error(R"({"constraints": {"pcb": {"boxes": {"amp_db": {"min": 1, "max": 0}}}}})", "");
    expect_config_error(R"({"digsic": {"memory": {"max_odd_order": 4}}})", "");
}

TEST(Config, LoadErrors) {
    EXPECT_THROW(load_run_config("/nonexistent/fdesic.json"), IoError);
    tu::ScratchDir dir;
    tu::write_file(dir / "c.json", R"({"channel": {"source": "file", "path": "missing.csv"}})");
    const auto c = load_run_config(dir / "c.json");
    EXPECT_EQ(c.channel.path, dir.path() / "missing.csv");
    EXPECT_THROW(load_channel(c.channel), IoError);
}

TEST(Config, SyntheticChannel) {
    const auto c = parse(R"({"channel": {"source": "synthetic",
        "paths": [{"amp_linear": 0.1, "tau_s": 1e-9, "phase_rad": 0}],
        "target_isolation_db": -40,
        "grid": {"start_hz": 880e6, "stop_hz": 920e6, "points": 41}}})");
    const auto h = load_channel(c.channel);
    EXPECT_EQ(h.size(), 41u);
}
