// SPDX-License-Identifier: Apache-2.0
#include "fdesic/errors.hpp"
#include "fdesic/rfmodel.hpp"
#include "fdesic/rng.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <numbers>

using namespace fdesic;

namespace {

constexpr double kPi = std::numbers::pi;
const cplx kJ{0.0, 1.0};

void expect_cplx_near(cplx got, cplx want, double tol) {
    EXPECT_NEAR(got.real(), want.real(), tol);
    EXPECT_NEAR(got.imag(), want.imag(), tol);
}

void expect_identity(const AbcdMatrix& m, double tol = 1e-15) {
    expect_cplx_near(m.a, 1.0, tol);
    expect_cplx_near(m.b, 0.0, tol);
    expect_cplx_near(m.c, 0.0, tol);
    expect_cplx_near(m.d, 1.0, tol);
}

double rel_err(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

} // namespace

// ---------------------------------------------------------------------------
// Two-port building blocks

TEST(Abcd, ZeroLengthLineIsIdentity) { expect_identity(tline_abcd(0.0, 50.0)); }

TEST(Abcd, QuarterWaveLine) {
    const auto m = tline_abcd(kPi / 2, 50.0);
    expect_cplx_near(m.a, 0.0, 1e-15);
    expect_cplx_near(m.d, 0.0, 1e-15);
    expect_cplx_near(m.b, cplx(0.0, 50.0), 1e-13);
    expect_cplx_near(m.c, cplx(0.0, 1.0 / 50.0), 1e-16);
}

TEST(Abcd, LineAtPcbElectricalLength) {
    const auto m = tline_abcd(1.37, 50.0);
    // cos(1.37) = 0.19945..., sin(1.37) = 0.97990...
    expect_cplx_near(m.a, 0.19945, 1e-5);
    expect_cplx_near(m.d, 0.19945, 1e-5);
    expect_cplx_near(m.b, cplx(0.0, 48.995), 1e-3);
    expect_cplx_near(m.c, cplx(0.0, 0.019598), 1e-6);
}

TEST(Abcd, LineRejectsNonPositiveImpedance) {
    EXPECT_THROW(tline_abcd(1.0, 0.0), std::invalid_argument);
    EXPECT_THROW(tline_abcd(1.0, -50.0), std::invalid_argument);
}

TEST(Abcd, ShuntElements) {
    expect_identity(shunt_abcd(0.0));
    const auto m = shunt_abcd(0.02);
    EXPECT_EQ(m.a, cplx(1.0));
    EXPECT_EQ(m.b, cplx(0.0));
    EXPECT_EQ(m.c, cplx(0.02));
    EXPECT_EQ(m.d, cplx(1.0));
    EXPECT_EQ(shunt_abcd({0.01, 0.005}).c, cplx(0.01, 0.005));
}

TEST(Abcd, Cascade) {
    const std::array<AbcdMatrix, 1> one{AbcdMatrix::identity()};
    expect_identity(abcd_cascade(one));

    const cplx y{0.01, -0.003};
    const std::array<AbcdMatrix, 2> sy{shunt_abcd(y), AbcdMatrix::identity()};
    EXPECT_EQ(abcd_cascade(sy).c, y);

    const std::array<AbcdMatrix, 2> half{tline_abcd(kPi / 2, 50.0), tline_abcd(kPi / 2, 50.0)};
    const auto m = abcd_cascade(half);
    expect_cplx_near(m.a, -1.0, 1e-14);
    expect_cplx_near(m.b, 0.0, 1e-12);
    expect_cplx_near(m.c, 0.0, 1e-16);
    expect_cplx_near(m.d, -1.0, 1e-14);

    EXPECT_THROW(abcd_cascade(std::span<const AbcdMatrix>{}), std::invalid_argument);
}

TEST(Tank, ResonanceIsPurelyResistive) {
    const double l = 1.65e-9, c = 9.7e-12, r = 35.0;
    const double f0 = 1.0 / (2 * kPi * std::sqrt(l * c));
    EXPECT_NEAR(f0, 1.25803e9, 1e5);
    const cplx y = tank_admittance(r, l, c, f0);
    EXPECT_NEAR(y.real(), 0.028571, 1e-6);
    EXPECT_NEAR(y.imag(), 0.0, 1e-12);
}

TEST(Tank, LosslessLimit) {
    const double l = 2.85e-9, c = 8e-12, f = 900e6;
    const double w = 2 * kPi * f;
    const cplx y = tank_admittance(std::numeric_limits<double>::infinity(), l, c, f);
    EXPECT_EQ(y.real(), 0.0);
    EXPECT_NEAR(y.imag(), w * c - 1.0 / (w * l), 1e-15);
}

TEST(Tank, RejectsNonPositiveFrequency) {
    EXPECT_THROW(tank_admittance(35, 1e-9, 1e-12, 0.0), std::invalid_argument);
    EXPECT_THROW(tank_admittance(35, 1e-9, 1e-12, -1.0), std::invalid_argument);
}

TEST(Tank, DefaultResistanceCalibration) {
    // R = 2.7 * sqrt(1.65 nH / 9.7 pF) = 35.21 ohm
    const PcbCircuitConstants k;
    EXPECT_NEAR(k.r_f_ohm, 35.214, 1e-3);
    EXPECT_NEAR(calibrate_tank_resistance(2.7, 1.65e-9, 9.7e-12), k.r_f_ohm, 1e-12);
    EXPECT_THROW(calibrate_tank_resistance(0.0, 1e-9, 1e-12), std::invalid_argument);
}

TEST(Units, VoltageDecibels) {
    EXPECT_DOUBLE_EQ(db_to_linear(20.0), 10.0);
    EXPECT_DOUBLE_EQ(db_to_linear(-6.0), std::pow(10.0, -0.3));
    EXPECT_DOUBLE_EQ(linear_to_db(0.1), -20.0);
    EXPECT_TRUE(std::isinf(linear_to_db(0.0)));
}

// ---------------------------------------------------------------------------
// PCB bandpass

TEST(PcbBpf, ClosedFormMatchesCascadeOnRandomConfigurations) {
    Rng rng(7);
    PcbCircuitConstants k;
    for (int trial = 0; trial < 1000; ++trial) {
        PcbTapConfig tap;
        tap.c_f_farad = rng.uniform(0.6e-12, 2.4e-12);
        tap.c_q_farad = rng.uniform(2e-12, 14e-12);
        const double a = rng.uniform(860e6, 950e6);
        const auto grid = FrequencyGrid::linspace(a, a + rng.uniform(1e6, 960e6 - a), 16);
        const auto closed = pcb_bpf_response(tap, k, grid);
        const auto cascade = pcb_bpf_response_abcd(tap, k, grid);
        for (std::size_t i = 0; i < grid.size(); ++i)
            ASSERT_LE(rel_err(closed[i], cascade[i]), 1e-9) << "trial " << trial << " f " << grid[i];
    }
}

TEST(PcbBpf, TableCornerCenterFrequencyOrdering) {
    // Set 1 (C_F min, C_Q min) peaks above Set 2 (C_F max, C_Q min).
    const PcbCircuitConstants k;
    const auto grid = FrequencyGrid::linspace(500e6, 3000e6, 25001);
    auto fc = [&](double cf, double cq) {
        return extract_center_and_q(pcb_bpf_response({0, 0, cf, cq}, k, grid)).first;
    };
    EXPECT_GT(fc(0.6e-12, 2e-12), fc(2.4e-12, 2e-12));
}

TEST(PcbBpf, RejectsInvalidInputs) {
    PcbCircuitConstants k;
    EXPECT_NO_THROW(pcb_bpf_response(PcbTapConfig{}, k, FrequencyGrid::linspace(800e6, 1000e6, 11)));
    k.z0_ohm = 0.0;
    EXPECT_THROW(pcb_bpf_response(PcbTapConfig{}, k, FrequencyGrid({900e6})), std::invalid_argument);
    k = PcbCircuitConstants{};
    EXPECT_THROW(pcb_bpf_response({0, 0, -1e-12, 8e-12}, k, FrequencyGrid({900e6})), std::invalid_argument);
}

TEST(PcbCanceller, AmplitudeScalesExactly) {
    const auto grid = FrequencyGrid::linspace(890e6, 910e6, 21);
    PcbCanceller a{{{0.0, 0.3, 1.2e-12, 6e-12}}, {}};
    PcbCanceller b = a;
    b.taps[0].amp_db = -15.5;
    const auto ha = pcb_canceller_response(a, grid);
    const auto hb = pcb_canceller_response(b, grid);
    const double g = std::pow(10.0, -15.5 / 20.0);
    for (std::size_t i = 0; i < grid.size(); ++i)
        EXPECT_LE(std::abs(hb[i] - g * ha[i]), 1e-15 * std::abs(ha[i]));
}

TEST(PcbCanceller, OppositePhasesCancel) {
    const auto grid = FrequencyGrid::linspace(880e6, 920e6, 41);
    PcbCanceller c{{{-3.0, -kPi / 2, 1.5e-12, 8e-12}, {-3.0, kPi / 2, 1.5e-12, 8e-12}}, {}};
    const auto h = pcb_canceller_response(c, grid);
    for (auto v : h.values())
        EXPECT_LT(std::abs(v), 1e-15);
}

TEST(PcbCanceller, MatchesIndependentEvaluationOnOfdmBins) {
    // Symbol-by-symbol evaluation of the PCB canceller with hard-coded constants:
    // H = A0 e^{-j2πfτ0} Σ A_i e^{-jφ_i} / (R_Q · C-entry of Q·TL·F·TL·Q).
    const double lf = 1.65e-9, lq = 2.85e-9, rq = 50.0, z0 = 50.0, bl = 1.37, cfix = 8.2e-12;
    const double rf = 2.7 * std::sqrt(lf / (cfix + 1.5e-12));
    const double a0 = std::pow(10.0, -4.1 / 20.0), tau0 = 4.2e-9;
    struct Tap { double amp_db, phase, cf, cq; };
    const Tap taps[] = {{-2.0, 0.7, 0.96e-12, 5.12e-12}, {-6.5, -2.1, 2.16e-12, 11.75e-12}};

    std::vector<double> freqs;
    for (int k = -26; k <= 26; ++k)
        if (k != 0)
            freqs.push_back(900e6 + k * 312.5e3);
    ASSERT_EQ(freqs.size(), 52u);

    PcbCanceller cfg;
    for (const auto& t : taps)
        cfg.taps.push_back({t.amp_db, t.phase, t.cf, t.cq});
    const auto h = pcb_canceller_response(cfg, FrequencyGrid(freqs));

    for (std::size_t i = 0; i < freqs.size(); ++i) {
        const double w = 2 * kPi * freqs[i];
        cplx sum = 0.0;
        for (const auto& t : taps) {
            const cplx yf = 1.0 / rf + kJ * w * (cfix + t.cf) + 1.0 / (kJ * w * lf);
            const cplx yq = 1.0 / rq + kJ * w * t.cq + 1.0 / (kJ * w * lq);
            // 2x2 products written out: Q * TL
            const cplx ca = std::cos(bl), cb = kJ * z0 * std::sin(bl), cc = kJ * std::sin(bl) / z0, cd = std::cos(bl);
            cplx m[2][2] = {{1.0, 0.0}, {yq, 1.0}};
            auto mul = [](cplx (&x)[2][2], const cplx (&y)[2][2]) {
                cplx r[2][2];
                for (int p = 0; p < 2; ++p)
                    for (int q = 0; q < 2; ++q)
                        r[p][q] = x[p][0] * y[0][q] + x[p][1] * y[1][q];
                for (int p = 0; p < 2; ++p)
                    for (int q = 0; q < 2; ++q)
                        x[p][q] = r[p][q];
            };
            const cplx tl[2][2] = {{ca, cb}, {cc, cd}};
            const cplx f[2][2] = {{1.0, 0.0}, {yf, 1.0}};
            const cplx q[2][2] = {{1.0, 0.0}, {yq, 1.0}};
            mul(m, tl);
            mul(m, f);
            mul(m, tl);
            mul(m, q);
            sum += std::pow(10.0, t.amp_db / 20.0) * std::exp(-kJ * t.phase) / (rq * m[1][0]);
        }
        const cplx want = a0 * std::exp(-kJ * w * tau0) * sum;
        EXPECT_LE(rel_err(h[i], want), 1e-10) << freqs[i];
    }
}

// ---------------------------------------------------------------------------
// RFIC, delay line, amplitude/phase

TEST(Rfic, CenterIdentity) {
    const RficCanceller c{{{-12.0, 1.1, 903e6, 17.0}}};
    const auto h = rfic_canceller_response(c, FrequencyGrid({903e6}));
    const cplx want = std::polar(std::pow(10.0, -12.0 / 20.0), -1.1);
    EXPECT_LT(std::abs(h[0] - want), 1e-16);
    EXPECT_NEAR(std::abs(h[0]), std::pow(10.0, -0.6), 1e-16);
    EXPECT_NEAR(std::arg(h[0]), -1.1, 1e-15);
}

TEST(Rfic, HandEvaluatedOffCenterPoint) {
    // 1 / (1 + j0.22100) at 910 MHz for fc = 900 MHz, Q = 10
    const RficCanceller c{{{0.0, 0.0, 900e6, 10.0}}};
    const auto h = rfic_canceller_response(c, FrequencyGrid({910e6}));
    EXPECT_NEAR(h[0].real(), 0.95343, 1e-5);
    EXPECT_NEAR(h[0].imag(), -0.21071, 1e-5);
    EXPECT_NEAR(std::abs(h[0]), 0.97644, 1e-5);
}

TEST(Rfic, PeakAtGridPointNearestCenter) {
    const auto grid = FrequencyGrid::linspace(850e6, 950e6, 101);
    const RficCanceller c{{{0.0, 0.0, 912.3e6, 3.0}}};
    const auto h = rfic_canceller_response(c, grid);
    std::size_t best = 0;
    for (std::size_t i = 1; i < h.size(); ++i)
        if (std::abs(h[i]) > std::abs(h[best]))
            best = i;
    EXPECT_DOUBLE_EQ(grid[best], 912e6);
}

TEST(Rfic, ExtractedCenterAndQ) {
    const auto grid = FrequencyGrid::linspace(700e6, 1100e6, 40001);
    const RficCanceller c{{{0.0, 0.0, 900e6, 10.0}}};
    const auto [fc, q] = extract_center_and_q(rfic_canceller_response(c, grid));
    EXPECT_NEAR(fc, 900e6, 9e6);
    EXPECT_NEAR(q, 10.0, 0.1);
}

TEST(Rfic, LinearityAndPhaseShift) {
    const auto grid = FrequencyGrid::linspace(880e6, 920e6, 9);
    RficCanceller base{{{-20.0, 0.4, 895e6, 12.0}}};
    RficCanceller louder = base;
    louder.taps[0].amp_db += 20.0 * std::log10(2.0);
    RficCanceller shifted = base;
    shifted.taps[0].phase_rad += 0.9;
    const auto h0 = rfic_canceller_response(base, grid);
    const auto h2 = rfic_canceller_response(louder, grid);
    const auto hs = rfic_canceller_response(shifted, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        EXPECT_LT(std::abs(h2[i] - 2.0 * h0[i]), 1e-14);
        EXPECT_LT(std::abs(hs[i] - std::polar(1.0, -0.9) * h0[i]), 1e-15);
    }
}

TEST(Rfic, RefinedGridSubsamplesToCoarse) {
    const RficCanceller c{{{-15.0, 0.2, 897e6, 8.0}, {-18.0, -2.0, 907e6, 30.0}}};
    const auto coarse = FrequencyGrid::linspace(880e6, 920e6, 5);
    const auto fine = FrequencyGrid::linspace(880e6, 920e6, 17);
    const auto hc = rfic_canceller_response(c, coarse);
    const auto hf = rfic_canceller_response(c, fine);
    for (std::size_t i = 0; i < coarse.size(); ++i)
        EXPECT_EQ(hc[i], hf[4 * i]);
}

TEST(DelayLine, UnitTapIsAllOnes) {
    const auto h = delay_line_response({{{1.0, 0.0, 0.0}}}, FrequencyGrid::linspace(860e6, 940e6, 5));
    for (auto v : h.values())
        EXPECT_EQ(v, cplx(1.0));
}

TEST(DelayLine, PureDelayPhaseSlope) {
    const auto grid = FrequencyGrid::linspace(860e6, 940e6, 81);
    const auto h = delay_line_response({{{1.0, 50e-9, 0.0}}}, grid);
    double unwrapped = std::arg(h[0]);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        double d = std::arg(h[i]) - std::arg(h[i - 1]);
        d -= 2 * kPi * std::round(d / (2 * kPi));
        unwrapped += d;
    }
    const double slope = (unwrapped - std::arg(h[0])) / (grid.back() - grid.front());
    EXPECT_NEAR(slope, -2 * kPi * 50e-9, 1e-15);
}

TEST(DelayLine, TwoTapCombNulls) {
    // Nulls where 2πf·25 ns is an odd multiple of π: f = (2n+1)·20 MHz.
    const DelayLineCanceller c{{{1.0, 0.0, 0.0}, {1.0, 25e-9, 0.0}}};
    const auto h = delay_line_response(c, FrequencyGrid({860e6, 900e6, 940e6}));
    EXPECT_LT(std::abs(h[0]), 1e-12);
    EXPECT_LT(std::abs(h[1]), 1e-12);
    EXPECT_LT(std::abs(h[2]), 1e-12);
    EXPECT_NEAR(std::abs(delay_line_response(c, FrequencyGrid({880e6}))[0]), 2.0, 1e-12);
}

TEST(AmpPhase, ConstantResponse) {
    const auto grid = FrequencyGrid::linspace(860e6, 940e6, 7);
    const auto unit = amp_phase_response(1.0, 0.0, grid);
    for (auto v : unit.values())
        EXPECT_EQ(v, cplx(1.0));
    const auto half = amp_phase_response(0.5, kPi / 2, grid);
    for (auto v : half.values())
        expect_cplx_near(v, cplx(0.0, -0.5), 1e-16);
}

TEST(AmpPhase, MatchesChannelAtOneFrequencyOnly) {
    const auto grid = FrequencyGrid::linspace(890e6, 910e6, 5);
    const auto h_si = delay_line_response({{{0.1, 12e-9, 0.3}, {0.05, 31e-9, -1.0}}}, grid);
    const auto h = amp_phase_response(std::abs(h_si[0]), -std::arg(h_si[0]), grid);
    EXPECT_LT(std::abs(h[0] - h_si[0]), 1e-16);
    for (std::size_t i = 1; i < grid.size(); ++i)
        EXPECT_GT(std::abs(h[i] - h_si[i]), 1e-4);
}

// ---------------------------------------------------------------------------
// Configuration plumbing

TEST(Family, NamesRoundTrip) {
    for (auto f : {Family::Pcb, Family::Rfic, Family::DelayLine, Family::AmpPhase})
        EXPECT_EQ(parse_family(family_name(f)), f);
    EXPECT_THROW(parse_family("fir"), std::invalid_argument);
    EXPECT_EQ(tap_count(AmpPhaseCanceller{}), 1u);
    EXPECT_EQ(tap_count(RficCanceller{{{}, {}, {}}}), 3u);
    EXPECT_EQ(family_of(DelayLineCanceller{}), Family::DelayLine);
}

TEST(Extraction, ErrorsOnNarrowGrid) {
    const RficCanceller c{{{0.0, 0.0, 900e6, 10.0}}};
    EXPECT_THROW(extract_center_and_q(rfic_canceller_response(c, FrequencyGrid::linspace(895e6, 905e6, 11))),
                 BandTooNarrowError);
    EXPECT_THROW(extract_center_and_q(rfic_canceller_response(c, FrequencyGrid({900e6}))), std::invalid_argument);
}

TEST(Extraction, TiesGoToLowestFrequency) {
    const FrequencyGrid grid({1.0, 2.0, 3.0, 4.0, 5.0});
    const ComplexResponse h(grid, {0.1, 1.0, 1.0, 0.1, 0.1});
    EXPECT_DOUBLE_EQ(extract_center_and_q(h).first, 2.0);
}

TEST(Validation, RejectsBadTaps) {
    EXPECT_THROW(RficTapConfig({0, 0, -1, 10}).validate(), std::invalid_argument);
    EXPECT_THROW(RficTapConfig({0, 4.0, 900e6, 10}).validate(), std::invalid_argument);
    EXPECT_THROW(PcbTapConfig({0, 0, 0.0, 8e-12}).validate(), std::invalid_argument);
    EXPECT_THROW(DelayLineTap({-1, 0, 0}).validate(), std::invalid_argument);
    EXPECT_THROW(rfic_canceller_response(RficCanceller{}, FrequencyGrid({1e9})), std::invalid_argument);
}
