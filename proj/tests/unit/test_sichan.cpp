// SPDX-License-Identifier: Apache-2.0
#include "fdesic/errors.hpp"
#include "fdesic/sichan.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace fdesic;
using fdesic::testing_util::ScratchDir;
using fdesic::testing_util::write_file;

namespace {

double band_mean_isolation_db(const ComplexResponse& h) {
    double p = 0.0;
    for (auto v : h.values())
        p += std::norm(v);
    return 10.0 * std::log10(p / static_cast<double>(h.size()));
}

} // namespace

TEST(Synth, FlatSinglePath) {
    SiChannelSpec spec;
    spec.paths = {{1.0, 0.0, 0.0}};
    spec.grid = FrequencyGrid::linspace(880e6, 920e6, 41);
    const auto h = synth_si_channel(spec);
    for (auto v : h.values())
        EXPECT_NEAR(std::abs(v), 0.1, 1e-15);
}

TEST(Synth, TwoRayRipplePeriod) {
    // Equal paths at 0 and 10 ns: |H| ∝ |cos(π f·10 ns)|, period 100 MHz.
    SiChannelSpec spec;
    spec.paths = {{1.0, 0.0, 0.0}, {1.0, 10e-9, 0.0}};
    spec.grid = FrequencyGrid::linspace(800e6, 1000e6, 201);
    const auto h = synth_si_channel(spec);
    const double peak = std::abs(h[0]);
    EXPECT_NEAR(std::abs(h[200]), peak, 1e-12); // 1000 MHz
    EXPECT_NEAR(std::abs(h[100]), peak, 1e-12); // 900 MHz
    EXPECT_LT(std::abs(h[50]), 1e-12);          // 850 MHz null
    EXPECT_LT(std::abs(h[150]), 1e-12);         // 950 MHz null
}

TEST(Synth, NormalizationHitsTarget) {
    for (double target : {-20.0, -7.5, -43.0}) {
        const auto h = synth_si_channel(benchmark_channel_spec(11, benchmark_grid(), target));
        EXPECT_NEAR(band_mean_isolation_db(h), target, 1e-9);
    }
}

TEST(Synth, Errors) {
    SiChannelSpec spec;
    EXPECT_THROW(synth_si_channel(spec), std::invalid_argument);
    spec.paths = {{0.0, 0.0, 0.0}};
    EXPECT_THROW(synth_si_channel(spec), std::invalid_argument);
    spec.paths = {{1.0, 0.0, 0.0}};
    spec.target_isolation_db = 3.0;
    EXPECT_THROW(synth_si_channel(spec), std::invalid_argument);
}

TEST(Benchmark, DocumentedDraw) {
    const auto spec = benchmark_channel_spec();
    EXPECT_EQ(spec.rng_seed, kBenchmarkChannelSeed);
    ASSERT_EQ(spec.paths.size(), 4u);
    for (const auto& p : spec.paths) {
        EXPECT_GE(p.tau_s, 0.0);
        EXPECT_LE(p.tau_s, 40e-9);
        EXPECT_LE(p.amp_linear, 1.0);
        EXPECT_GE(p.amp_linear, std::pow(10.0, -15.0 / 20.0));
    }
    const auto h = benchmark_channel();
    EXPECT_EQ(h.grid(), benchmark_grid());
    EXPECT_NEAR(band_mean_isolation_db(h), -20.0, 1e-9);
    EXPECT_EQ(h, benchmark_channel(kBenchmarkChannelSeed));
}

TEST(Benchmark, FrequencySelectiveOver20MHz) {
    const auto h = benchmark_channel().restricted(890e6, 910e6);
    EXPECT_EQ(h.size(), 65u);
    EXPECT_GE(magnitude_variation_db(h), 3.0);
}

TEST(Residual, Cases) {
    const auto grid = FrequencyGrid::linspace(890e6, 910e6, 3);
    const ComplexResponse a(grid, {{0.1, 0.2}, {-0.3, 0.0}, {0.0, 0.05}});
    const ComplexResponse b(grid, {{0.1, 0.1}, {0.2, 0.0}, {0.0, 0.0}});
    const auto zero = residual(a, a);
    for (auto v : zero.values())
        EXPECT_EQ(v, cplx(0.0));
    EXPECT_EQ(residual(a, ComplexResponse::zeros(grid)), a);
    const auto r = residual(a, b);
    EXPECT_NEAR(r[0].imag(), 0.1, 1e-16);
    EXPECT_EQ(r[1], cplx(-0.5, 0.0));
    EXPECT_THROW(residual(a, ComplexResponse::zeros(FrequencyGrid::linspace(890e6, 911e6, 3))),
                 std::invalid_argument);
}

TEST(Metrics, FlatResidual) {
    const auto grid = FrequencyGrid::linspace(890e6, 910e6, 5);
    const auto m = sic_metrics(ComplexResponse(grid, std::vector<cplx>(5, {0.0, 0.01})));
    EXPECT_NEAR(m.mean_rf_sic_db, 40.0, 1e-12);
    EXPECT_NEAR(m.worst_rf_sic_db, 40.0, 1e-12);
    EXPECT_NEAR(m.mean_rf_sic_db_dbavg, 40.0, 1e-12);
    for (double iso : m.isolation_db_per_freq)
        EXPECT_NEAR(iso, -40.0, 1e-12);
}

TEST(Metrics, ZeroResidualFloors) {
    const auto m = sic_metrics(ComplexResponse::zeros(FrequencyGrid::linspace(890e6, 910e6, 4)));
    EXPECT_EQ(m.mean_rf_sic_db, 200.0);
    EXPECT_EQ(m.worst_rf_sic_db, 200.0);
    EXPECT_EQ(m.isolation_db_per_freq[2], -200.0);
}

TEST(Metrics, TwoPointHandArithmetic) {
    // mean = -10 log10((0.01 + 1e-6) / 2) = 23.0099 dB; worst = 20 dB
    const ComplexResponse h(FrequencyGrid({1e9, 2e9}), {0.1, 0.001});
    const auto m = sic_metrics(h);
    EXPECT_NEAR(m.mean_rf_sic_db, 23.0099, 1e-4);
    EXPECT_NEAR(m.worst_rf_sic_db, 20.0, 1e-12);
    EXPECT_NEAR(m.mean_rf_sic_db_dbavg, 40.0, 1e-12);
    EXPECT_LE(m.worst_rf_sic_db, m.mean_rf_sic_db);
}

TEST(Metrics, ScalingShiftsByGain) {
    const auto h = benchmark_channel().restricted(880e6, 920e6);
    const double g = 13.7;
    std::vector<cplx> v(h.values().begin(), h.values().end());
    for (auto& x : v)
        x *= std::pow(10.0, -g / 20.0);
    const auto a = sic_metrics(h);
    const auto b = sic_metrics(ComplexResponse(h.grid(), v));
    EXPECT_NEAR(b.mean_rf_sic_db - a.mean_rf_sic_db, g, 1e-9);
    EXPECT_NEAR(b.worst_rf_sic_db - a.worst_rf_sic_db, g, 1e-9);
}

TEST(ChannelCsv, RoundTripIsExact) {
    ScratchDir dir;
    const auto h = benchmark_channel();
    store_channel_csv(h, dir / "h.csv");
    EXPECT_EQ(load_channel_csv(dir / "h.csv"), h);
}

TEST(ChannelCsv, FiftyTwoRows) {
    ScratchDir dir;
    std::string text = "freq_hz,re,im\n";
    for (int k = 0; k < 52; ++k)
        text += std::to_string(890e6 + k * 20e6 / 51) + ",0.1,-0.05\n";
    write_file(dir / "c.csv", text);
    const auto h = load_channel_csv(dir / "c.csv");
    EXPECT_EQ(h.size(), 52u);
    EXPECT_EQ(h[7], cplx(0.1, -0.05));
}

TEST(ChannelCsv, Errors) {
    ScratchDir dir;
    EXPECT_THROW(load_channel_csv(dir / "missing.csv"), IoError);

    auto line_of = [&](const std::string& text) -> std::size_t {
        write_file(dir / "bad.csv", text);
        try {
            load_channel_csv(dir / "bad.csv");
        } catch (const ParseError& e) {
            return e.line();
        }
        return 0;
    };
    EXPECT_EQ(line_of("900e6,0,0\n"), 1u);
    EXPECT_EQ(line_of(""), 1u);
    EXPECT_EQ(line_of("freq_hz,re,im\n900e6,0,0\n899e6,0,0\n"), 3u);
    EXPECT_EQ(line_of("freq_hz,re,im\n900e6,abc,0\n"), 2u);
    EXPECT_EQ(line_of("freq_hz,re,im\n900e6,0\n"), 2u);
    EXPECT_EQ(line_of("freq_hz,re,im\n"), 1u);
}
