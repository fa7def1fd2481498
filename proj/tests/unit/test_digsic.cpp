// SPDX-License-Identifier: Apache-2.0
#include "fdesic/digsic.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <numbers>

using namespace fdesic;

namespace {

constexpr double kPi = std::numbers::pi;

// Naive DFT bin of one symbol body.
cplx dft_bin(std::span<const cplx> x, int k) {
    const double n = static_cast<double>(x.size());
    cplx s{};
    for (std::size_t i = 0; i < x.size(); ++i)
        s += x[i] * std::polar(1.0, -2 * kPi * k * static_cast<double>(i) / n);
    return s;
}

ComplexResponse flat(double db, double phase = 0.0) {
    const auto grid = FrequencyGrid::linspace(880e6, 920e6, 161);
    return ComplexResponse(grid, std::vector<cplx>(grid.size(), std::polar(std::pow(10.0, db / 20), phase)));
}

ResidualSiParams quiet() {
    ResidualSiParams p;
    p.noise_enabled = false;
    return p;
}

} // namespace

TEST(Ofdm, UnitPowerAndLength) {
    OfdmParams p;
    const auto x = gen_ofdm(p, 20, 5);
    ASSERT_EQ(x.size(), 20u * 80u);
    EXPECT_EQ(p.symbol_len(), 80u);
    EXPECT_NEAR(mean_power_db(x), 0.0, 1e-9);
    EXPECT_EQ(gen_ofdm(p, 20, 5), x);
    EXPECT_NE(gen_ofdm(p, 20, 6), x);
}

TEST(Ofdm, CyclicPrefixAndSpectralMask) {
    OfdmParams p;
    p.constellation = Constellation::Qam16;
    const auto x = gen_ofdm(p, 4, 1);
    const auto bins = p.active_bins();
    ASSERT_EQ(bins.size(), 52u);
    EXPECT_EQ(bins.front(), -26);
    EXPECT_EQ(bins.back(), 26);
    for (std::size_t s = 0; s < 4; ++s) {
        const std::span<const cplx> sym(x.data() + s * 80, 80);
        for (std::size_t i = 0; i < 16; ++i)
            EXPECT_LT(std::abs(sym[i] - sym[64 + i]), 1e-12);
        const auto body = sym.subspan(16, 64);
        double in = 0.0, out = 0.0;
        for (int k = -32; k < 32; ++k) {
            const double e = std::norm(dft_bin(body, k));
            if (std::find(bins.begin(), bins.end(), k) != bins.end())
                in += e / 52;
            else
                out = std::max(out, e);
        }
        EXPECT_LE(10 * std::log10(out / in + 1e-300), -40.0);
    }
}

TEST(Ofdm, RejectsBadParameters) {
    OfdmParams p;
    p.n_active = 64;
    EXPECT_THROW(gen_ofdm(p, 1, 0), std::invalid_argument);
    p = {};
    p.n_active = 51;
    EXPECT_THROW(gen_ofdm(p, 1, 0), std::invalid_argument);
    EXPECT_THROW(parse_constellation("8psk"), std::invalid_argument);
    EXPECT_EQ(parse_constellation("64qam"), Constellation::Qam64);
}

TEST(ResidualSi, NoiseOnlyPower) {
    const auto tx = gen_ofdm({}, 100, 2);
    ResidualSiParams p;
    p.seed = 4;
    const auto rx = apply_residual_si(tx, flat(-400.0), {}, p);
    EXPECT_NEAR(mean_power_db(rx), -85.0, 0.5);
}

TEST(ResidualSi, FlatChannelPower) {
    const auto tx = gen_ofdm({}, 100, 2);
    const auto rx = apply_residual_si(tx, flat(-52.0, 0.3), {}, quiet());
    EXPECT_NEAR(mean_power_db(rx), -52.0, 0.05);
    // Close to a pure complex gain; the anti-alias roll-off leaves a small error.
    std::vector<cplx> err(tx.size());
    for (std::size_t i = 0; i < tx.size(); ++i)
        err[i] = rx[i] - tx[i] * std::polar(std::pow(10.0, -2.6), 0.3);
    EXPECT_LT(mean_power_db(err), -52.0 - 25.0);
}

TEST(ResidualSi, NonlinearPaFillsDcBin) {
    const auto tx = gen_ofdm({}, 40, 3);
    PaModel pa;
    pa.odd_coeffs = {cplx{1.0}, cplx{-0.05, 0.02}, cplx{0.005}};
    const auto lin = apply_residual_si(tx, flat(0.0), {}, quiet());
    const auto nl = apply_residual_si(tx, flat(0.0), pa, quiet());
    auto dc = [&](const std::vector<cplx>& y) {
        double e = 0.0;
        for (std::size_t s = 0; s < 40; ++s)
            e += std::norm(dft_bin(std::span<const cplx>(y.data() + s * 80 + 16, 64), 0));
        return e;
    };
    EXPECT_GT(dc(nl), 10.0 * dc(lin));
    EXPECT_LT(mean_power_db(nl), mean_power_db(lin)); // compression
}

TEST(ResidualSi, GridMustCoverSignal) {
    const auto tx = gen_ofdm({}, 2, 2);
    const auto grid = FrequencyGrid::linspace(898e6, 902e6, 5);
    const ComplexResponse narrow(grid, std::vector<cplx>(5, cplx{0.1}));
    EXPECT_THROW(apply_residual_si(tx, narrow, {}, quiet()), std::invalid_argument);
}

TEST(DigitalFit, PureScale) {
    const auto tx = gen_ofdm({}, 50, 7);
    std::vector<cplx> rx(tx.size());
    for (std::size_t i = 0; i < tx.size(); ++i)
        rx[i] = cplx{0.01, -0.003} * tx[i];
    MemPolySpec spec{1, 1, 0, 0.0};
    const auto fit = fit_digital_canceller(tx, rx, spec);
    EXPECT_GE(fit.digital_sic_db, 100.0);
    EXPECT_FALSE(fit.rank_deficient);
    EXPECT_LT(std::abs(fit.coefficients[0] - cplx(0.01, -0.003)), 1e-12);
}

TEST(DigitalFit, ThreeTapFir) {
    const auto tx = gen_ofdm({}, 50, 7);
    const cplx h[3] = {{0.02, 0.01}, {-0.005, 0.004}, {0.001, -0.002}};
    std::vector<cplx> rx(tx.size());
    for (std::size_t n = 0; n < tx.size(); ++n)
        for (std::size_t m = 0; m < 3 && m <= n; ++m)
            rx[n] += h[m] * tx[n - m];
    const MemPolySpec spec{3, 3, 0, 0.0};
    const auto fit = fit_digital_canceller(tx, rx, spec);
    EXPECT_GE(fit.digital_sic_db, 80.0);
    const auto est = apply_digital_canceller(tx, fit, spec);
    EXPECT_LT(std::abs(est[500] - rx[500]), 1e-6);
}

TEST(DigitalFit, NoiseLimited) {
    const auto tx = gen_ofdm({}, 50, 7);
    ResidualSiParams p;
    p.noise_floor_db = -33.0;
    p.seed = 11;
    auto rx = apply_residual_si(tx, flat(-400.0), {}, p);
    for (std::size_t i = 0; i < tx.size(); ++i)
        rx[i] += tx[i];
    const auto fit = fit_digital_canceller(tx, rx, {1, 4, 0, 0.0});
    EXPECT_NEAR(fit.digital_sic_db, 33.0, 1.0);
}

TEST(DigitalFit, RegressorAndInvariants) {
    const std::vector<cplx> tx{{1, 0}, {0, 2}, {3, 0}};
    const auto r3 = mempoly_regressor(tx, 3, 1);
    EXPECT_EQ(r3[0], cplx{});
    EXPECT_EQ(r3[1], cplx(1, 0));
    EXPECT_EQ(r3[2], cplx(0, 8));
    const auto lead = mempoly_regressor(tx, 1, -1);
    EXPECT_EQ(lead[0], cplx(0, 2));
    EXPECT_EQ(lead[2], cplx{});

    const auto big = gen_ofdm({}, 2, 1);
    std::vector<cplx> rx(big.size());
    EXPECT_THROW(fit_digital_canceller(big, std::span(rx).first(10), {}), std::invalid_argument);
    EXPECT_THROW(fit_digital_canceller(std::span(big).first(20), std::span(rx).first(20), {7, 16, 0, 0.0}),
                 std::invalid_argument);
    EXPECT_THROW((MemPolySpec{4, 3, 0, 0.0}).validate(), std::invalid_argument);
    EXPECT_EQ((MemPolySpec{7, 16, 16, 0.0}).coefficient_count(), 128u);
}

TEST(DigitalFit, ZeroRxCapsAtLimit) {
    const auto tx = gen_ofdm({}, 10, 1);
    const std::vector<cplx> rx(tx.size());
    const auto fit = fit_digital_canceller(tx, rx, {1, 2, 0, 0.0});
    EXPECT_LE(fit.digital_sic_db, kDigitalSicCapDb);
}

TEST(Iq, RoundTripAndBadMagic) {
    fdesic::testing_util::ScratchDir dir;
    const auto x = gen_ofdm({}, 3, 9);
    write_iq(dir.path() / "a.iq", x);
    EXPECT_EQ(read_iq(dir.path() / "a.iq"), x);
    EXPECT_EQ(std::filesystem::file_size(dir.path() / "a.iq"), 8 + 16 * x.size());
    fdesic::testing_util::write_file(dir.path() / "b.iq", "NOTIQ000");
    EXPECT_THROW(read_iq(dir.path() / "b.iq"), std::exception);
    EXPECT_THROW(read_iq(dir.path() / "missing.iq"), std::exception);
}
