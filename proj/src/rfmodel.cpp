// SPDX-License-Identifier: Apache-2.0
#include "fdesic/rfmodel.hpp"

#include "fdesic/errors.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace fdesic {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr cplx kJ{0.0, 1.0};
// |M_C| below this is treated as a singular two-port.
constexpr double kSingularMc = 1e-30;

void require(bool ok, const char* what) {
    if (!ok)
        throw std::invalid_argument(what);
}

bool phase_in_range(double phi) {
    return std::isfinite(phi) && phi >= -std::numbers::pi && phi <= std::numbers::pi;
}

[[noreturn]] void throw_degenerate(double f_hz) {
    std::ostringstream os;
    os.precision(12);
    os << "PCB bandpass model: singular M_C at f = " << f_hz << " Hz";
    throw NumericDegeneracyError(os.str());
}

} // namespace

double db_to_linear(double db) { return std::pow(10.0, db / 20.0); }

double linear_to_db(double linear) {
    if (!(linear > 0.0))
        return -std::numeric_limits<double>::infinity();
    return 20.0 * std::log10(linear);
}

// ---------------------------------------------------------------------------

AbcdMatrix AbcdMatrix::operator*(const AbcdMatrix& r) const {
    return {a * r.a + b * r.c, a * r.b + b * r.d, c * r.a + d * r.c, c * r.b + d * r.d};
}

AbcdMatrix tline_abcd(double beta_l_rad, double z0_ohm) {
    require(std::isfinite(z0_ohm) && z0_ohm > 0.0, "tline_abcd: z0 must be positive");
    require(std::isfinite(beta_l_rad), "tline_abcd: electrical length must be finite");
    const double c = std::cos(beta_l_rad);
    const double s = std::sin(beta_l_rad);
    return {cplx{c, 0.0}, kJ * (z0_ohm * s), kJ * (s / z0_ohm), cplx{c, 0.0}};
}

AbcdMatrix shunt_abcd(cplx y_siemens) {
    require(std::isfinite(y_siemens.real()) && std::isfinite(y_siemens.imag()), "shunt_abcd: admittance must be finite");
    return {cplx{1.0}, cplx{0.0}, y_siemens, cplx{1.0}};
}

AbcdMatrix abcd_cascade(std::span<const AbcdMatrix> matrices) {
    require(!matrices.empty(), "abcd_cascade: empty list");
    AbcdMatrix m = matrices.front();
    for (std::size_t i = 1; i < matrices.size(); ++i)
        m = m * matrices[i];
    return m;
}

cplx tank_admittance(double r_ohm, double l_henry, double c_farad, double f_hz) {
    require(f_hz > 0.0 && std::isfinite(f_hz), "tank_admittance: frequency must be positive");
    require(r_ohm > 0.0, "tank_admittance: resistance must be positive");
    require(l_henry > 0.0 && std::isfinite(l_henry), "tank_admittance: inductance must be positive");
    require(c_farad > 0.0 && std::isfinite(c_farad), "tank_admittance: capacitance must be positive");
    const double w = kTwoPi * f_hz;
    return {1.0 / r_ohm, w * c_farad - 1.0 / (w * l_henry)};
}

// ---------------------------------------------------------------------------

double calibrate_tank_resistance(double q_target, double l_henry, double c_farad) {
    require(q_target > 0.0 && l_henry > 0.0 && c_farad > 0.0, "calibrate_tank_resistance: arguments must be positive");
    return q_target * std::sqrt(l_henry / c_farad);
}

PcbCircuitConstants::PcbCircuitConstants()
    : r_f_ohm(calibrate_tank_resistance(kBareTankQ, 1.65e-9, 8.2e-12 + kMidTunableCapFarad)) {}

void PcbCircuitConstants::validate() const {
    require(l_f_henry > 0.0 && l_q_henry > 0.0, "PcbCircuitConstants: inductances must be positive");
    require(r_f_ohm > 0.0 && r_q_ohm > 0.0, "PcbCircuitConstants: resistances must be positive");
    require(z0_ohm > 0.0, "PcbCircuitConstants: z0 must be positive");
    require(c_fixed_farad >= 0.0, "PcbCircuitConstants: fixed capacitance must be non-negative");
    require(tau0_s >= 0.0, "PcbCircuitConstants: tau0 must be non-negative");
    require(std::isfinite(beta_l_rad) && std::isfinite(a0_db), "PcbCircuitConstants: non-finite constant");
}

void PcbTapConfig::validate() const {
    require(c_f_farad > 0.0 && c_q_farad > 0.0, "PcbTapConfig: capacitances must be positive");
    require(phase_in_range(phase_rad), "PcbTapConfig: phase outside [-pi, pi]");
    require(std::isfinite(amp_db), "PcbTapConfig: amplitude must be finite");
}

void RficTapConfig::validate() const {
    require(fc_hz > 0.0 && std::isfinite(fc_hz), "RficTapConfig: center frequency must be positive");
    require(q > 0.0 && std::isfinite(q), "RficTapConfig: quality factor must be positive");
    require(phase_in_range(phase_rad), "RficTapConfig: phase outside [-pi, pi]");
    require(std::isfinite(amp_db), "RficTapConfig: amplitude must be finite");
}

void DelayLineTap::validate() const {
    require(amp_linear >= 0.0 && std::isfinite(amp_linear), "DelayLineTap: amplitude must be >= 0");
    require(tau_s >= 0.0 && std::isfinite(tau_s), "DelayLineTap: delay must be >= 0");
    require(std::isfinite(phase_rad), "DelayLineTap: phase must be finite");
}

Family family_of(const CancellerConfig& config) {
    return static_cast<Family>(config.index());
}

std::size_t tap_count(const CancellerConfig& config) {
    struct Visitor {
        std::size_t operator()(const PcbCanceller& c) const { return c.taps.size(); }
        std::size_t operator()(const RficCanceller& c) const { return c.taps.size(); }
        std::size_t operator()(const DelayLineCanceller& c) const { return c.taps.size(); }
        std::size_t operator()(const AmpPhaseCanceller&) const { return 1; }
    };
    return std::visit(Visitor{}, config);
}

const char* family_name(Family family) {
    switch (family) {
    case Family::Pcb: return "pcb";
    case Family::Rfic: return "rfic";
    case Family::DelayLine: return "delay-line";
    case Family::AmpPhase: return "amp-phase";
    }
    return "?";
}

Family parse_family(const std::string& name) {
    for (Family f : {Family::Pcb, Family::Rfic, Family::DelayLine, Family::AmpPhase})
        if (name == family_name(f))
            return f;
    throw std::invalid_argument("unknown canceller family '" + name + "'");
}

// ---------------------------------------------------------------------------

namespace detail {

cplx pcb_bpf_at(double c_f_farad, double c_q_farad, const PcbCircuitConstants& k, double f_hz) {
    const cplx yf = tank_admittance(k.r_f_ohm, k.l_f_henry, k.c_fixed_farad + c_f_farad, f_hz);
    const cplx yq = tank_admittance(k.r_q_ohm, k.l_q_henry, c_q_farad, f_hz);
    const double s2 = std::sin(2.0 * k.beta_l_rad);
    const double c2 = std::cos(2.0 * k.beta_l_rad);
    const double cb = std::cos(k.beta_l_rad);
    const double sb = std::sin(k.beta_l_rad);
    const double z0 = k.z0_ohm;
    const cplx yq2 = yq * yq;
    // M_C of shunt(Y_Q) · TL · shunt(Y_F) · TL · shunt(Y_Q), expanded.
    const cplx mc = kJ * (s2 * z0) * yf * yq + (cb * cb) * yf + (2.0 * c2) * yq + kJ * (s2 / z0) +
                    kJ * (s2 * z0) * yq2 - (sb * sb * z0 * z0) * yf * yq2;
    if (!(std::abs(mc) >= kSingularMc))
        throw_degenerate(f_hz);
    return 1.0 / (k.r_q_ohm * mc);
}

cplx pcb_common_factor(const PcbCircuitConstants& k, double f_hz) {
    return db_to_linear(k.a0_db) * std::polar(1.0, -kTwoPi * f_hz * k.tau0_s);
}

void add_rfic_tap(const RficTapConfig& tap, std::span<const double> freqs, std::span<cplx> out) {
    const cplx gain = std::polar(db_to_linear(tap.amp_db), -tap.phase_rad);
    for (std::size_t k = 0; k < freqs.size(); ++k) {
        const double f = freqs[k];
        out[k] += gain / cplx{1.0, -tap.q * (tap.fc_hz / f - f / tap.fc_hz)};
    }
}

void add_pcb_tap(const PcbTapConfig& tap, const PcbCircuitConstants& constants, std::span<const double> freqs,
                 std::span<cplx> out) {
    const cplx gain = std::polar(db_to_linear(tap.amp_db), -tap.phase_rad);
    for (std::size_t k = 0; k < freqs.size(); ++k) {
        const double f = freqs[k];
        out[k] += pcb_common_factor(constants, f) * gain * pcb_bpf_at(tap.c_f_farad, tap.c_q_farad, constants, f);
    }
}

void add_delay_tap(const DelayLineTap& tap, std::span<const double> freqs, std::span<cplx> out) {
    for (std::size_t k = 0; k < freqs.size(); ++k)
        out[k] += std::polar(tap.amp_linear, -(kTwoPi * freqs[k] * tap.tau_s + tap.phase_rad));
}

} // namespace detail

ComplexResponse pcb_bpf_response(const PcbTapConfig& tap, const PcbCircuitConstants& constants,
                                 const FrequencyGrid& grid) {
    tap.validate();
    constants.validate();
    std::vector<cplx> v(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k)
        v[k] = detail::pcb_bpf_at(tap.c_f_farad, tap.c_q_farad, constants, grid[k]);
    return ComplexResponse(grid, std::move(v));
}

ComplexResponse pcb_bpf_response_abcd(const PcbTapConfig& tap, const PcbCircuitConstants& k,
                                      const FrequencyGrid& grid) {
    tap.validate();
    k.validate();
    const AbcdMatrix tl = tline_abcd(k.beta_l_rad, k.z0_ohm);
    std::vector<cplx> v(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double f = grid[i];
        const AbcdMatrix yq = shunt_abcd(tank_admittance(k.r_q_ohm, k.l_q_henry, tap.c_q_farad, f));
        const AbcdMatrix yf = shunt_abcd(tank_admittance(k.r_f_ohm, k.l_f_henry, k.c_fixed_farad + tap.c_f_farad, f));
        const std::array<AbcdMatrix, 5> chain{yq, tl, yf, tl, yq};
        const AbcdMatrix m = abcd_cascade(chain);
        if (!(std::abs(m.c) >= kSingularMc))
            throw_degenerate(f);
        v[i] = 1.0 / (k.r_q_ohm * m.c);
    }
    return ComplexResponse(grid, std::move(v));
}

ComplexResponse pcb_canceller_response(const PcbCanceller& config, const FrequencyGrid& grid) {
    require(!config.taps.empty(), "pcb_canceller_response: at least one tap required");
    config.constants.validate();
    std::vector<cplx> v(grid.size(), cplx{0.0});
    for (const auto& tap : config.taps) {
        tap.validate();
        detail::add_pcb_tap(tap, config.constants, grid.freqs(), v);
    }
    return ComplexResponse(grid, std::move(v));
}

ComplexResponse rfic_canceller_response(const RficCanceller& config, const FrequencyGrid& grid) {
    require(!config.taps.empty(), "rfic_canceller_response: at least one tap required");
    std::vector<cplx> v(grid.size(), cplx{0.0});
    for (const auto& tap : config.taps) {
        tap.validate();
        detail::add_rfic_tap(tap, grid.freqs(), v);
    }
    return ComplexResponse(grid, std::move(v));
}

ComplexResponse delay_line_response(const DelayLineCanceller& config, const FrequencyGrid& grid) {
    require(!config.taps.empty(), "delay_line_response: at least one tap required");
    std::vector<cplx> v(grid.size(), cplx{0.0});
    for (const auto& tap : config.taps) {
        tap.validate();
        detail::add_delay_tap(tap, grid.freqs(), v);
    }
    return ComplexResponse(grid, std::move(v));
}

ComplexResponse amp_phase_response(double amp_linear, double phase_rad, const FrequencyGrid& grid) {
    require(amp_linear >= 0.0 && std::isfinite(amp_linear), "amp_phase_response: amplitude must be >= 0");
    require(std::isfinite(phase_rad), "amp_phase_response: phase must be finite");
    return ComplexResponse(grid, std::vector<cplx>(grid.size(), std::polar(amp_linear, -phase_rad)));
}

ComplexResponse canceller_response(const CancellerConfig& config, const FrequencyGrid& grid) {
    struct Visitor {
        const FrequencyGrid& grid;
        ComplexResponse operator()(const PcbCanceller& c) const { return pcb_canceller_response(c, grid); }
        ComplexResponse operator()(const RficCanceller& c) const { return rfic_canceller_response(c, grid); }
        ComplexResponse operator()(const DelayLineCanceller& c) const { return delay_line_response(c, grid); }
        ComplexResponse operator()(const AmpPhaseCanceller& c) const {
            return amp_phase_response(c.amp_linear, c.phase_rad, grid);
        }
    };
    return std::visit(Visitor{grid}, config);
}

// ---------------------------------------------------------------------------

std::pair<double, double> extract_center_and_q(const ComplexResponse& response) {
    const std::size_t n = response.size();
    require(n >= 2, "extract_center_and_q: at least two grid points required");
    const auto f = response.grid().freqs();

    std::vector<double> db(n);
    std::size_t peak = 0;
    double peak_mag = -1.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double mag = std::abs(response[k]);
        db[k] = mag > 0.0 ? 20.0 * std::log10(mag) : -400.0;
        if (mag > peak_mag) {
            peak_mag = mag;
            peak = k;
        }
    }
    if (!(peak_mag > 0.0))
        throw BandTooNarrowError("extract_center_and_q: response is identically zero");
    const double thr = db[peak] - 3.0;

    auto crossing = [&](std::size_t below, std::size_t above) {
        // Linear interpolation of the dB magnitude between the two points.
        const double t = (thr - db[below]) / (db[above] - db[below]);
        return f[below] + t * (f[above] - f[below]);
    };

    std::size_t lo = peak;
    while (lo > 0 && db[lo] > thr)
        --lo;
    if (db[lo] > thr)
        throw BandTooNarrowError("extract_center_and_q: no -3 dB crossing below the peak within the grid");
    std::size_t hi = peak;
    while (hi + 1 < n && db[hi] > thr)
        ++hi;
    if (db[hi] > thr)
        throw BandTooNarrowError("extract_center_and_q: no -3 dB crossing above the peak within the grid");

    const double f_lo = crossing(lo, lo + 1);
    const double f_hi = crossing(hi, hi - 1);
    const double fc = f[peak];
    return {fc, fc / (f_hi - f_lo)};
}

} // namespace fdesic
