// SPDX-License-Identifier: Apache-2.0
//
// Frequency-response models of RF self-interference cancellers: the FDE
// RFIC tap (2nd-order bandpass), the discrete-component PCB tap (RLC tank
// with T-line impedance transformation), delay-line taps and the single
// amplitude/phase tap.
#pragma once

#include "fdesic/response.hpp"

#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace fdesic {

/// Voltage dB to linear gain (factor 20).
double db_to_linear(double db);
/// Linear voltage gain to dB. Non-positive input gives -inf.
double linear_to_db(double linear);

// ---------------------------------------------------------------------------
// Two-port networks
// ---------------------------------------------------------------------------

/// Transmission (ABCD) matrix. b in ohms, c in siemens.
struct AbcdMatrix {
    cplx a{1.0}, b{0.0}, c{0.0}, d{1.0};

    static AbcdMatrix identity() { return {}; }
    AbcdMatrix operator*(const AbcdMatrix& rhs) const;
};

/// Lossless T-line of electrical length beta_l and impedance z0.
AbcdMatrix tline_abcd(double beta_l_rad, double z0_ohm);
/// Shunt admittance two-port [[1, 0], [y, 1]].
AbcdMatrix shunt_abcd(cplx y_siemens);
/// Left-to-right product. Throws std::invalid_argument on an empty list.
AbcdMatrix abcd_cascade(std::span<const AbcdMatrix> matrices);

/// Parallel RLC admittance 1/R + j2πfC + 1/(j2πfL). R may be +inf (lossless).
cplx tank_admittance(double r_ohm, double l_henry, double c_farad, double f_hz);

// ---------------------------------------------------------------------------
// Canceller configurations
// ---------------------------------------------------------------------------

struct PcbCircuitConstants {
    double l_f_henry = 1.65e-9;
    double l_q_henry = 2.85e-9;
    double r_f_ohm;               ///< defaults to calibrate_tank_resistance()
    double r_q_ohm = 50.0;        ///< also the source/load resistance
    double beta_l_rad = 1.37;
    double z0_ohm = 50.0;
    double a0_db = -4.1;
    double tau0_s = 4.2e-9;
    double c_fixed_farad = 8.2e-12;

    PcbCircuitConstants();
    void validate() const;
};

/// Tank resistance giving the bare-tank quality factor R·sqrt(C/L) = q_target.
double calibrate_tank_resistance(double q_target, double l_henry, double c_farad);

/// Bare-tank quality factor used for the default R_F.
inline constexpr double kBareTankQ = 2.7;
/// Mid-range tunable C_F (pF range [0.6, 2.4]) used when calibrating R_F.
inline constexpr double kMidTunableCapFarad = 1.5e-12;

struct PcbTapConfig {
    double amp_db = 0.0;
    double phase_rad = 0.0;
    double c_f_farad = 1.5e-12; ///< tunable part only, in parallel with c_fixed_farad
    double c_q_farad = 8.0e-12;

    void validate() const;
};

struct RficTapConfig {
    double amp_db = 0.0;
    double phase_rad = 0.0;
    double fc_hz = 900e6;
    double q = 10.0;

    void validate() const;
};

struct DelayLineTap {
    double amp_linear = 1.0;
    double tau_s = 0.0;
    double phase_rad = 0.0;

    void validate() const;
};

struct PcbCanceller {
    std::vector<PcbTapConfig> taps;
    PcbCircuitConstants constants;
};
struct RficCanceller {
    std::vector<RficTapConfig> taps;
};
struct DelayLineCanceller {
    std::vector<DelayLineTap> taps;
};
struct AmpPhaseCanceller {
    double amp_linear = 1.0;
    double phase_rad = 0.0;
};

using CancellerConfig = std::variant<PcbCanceller, RficCanceller, DelayLineCanceller, AmpPhaseCanceller>;

enum class Family { Pcb, Rfic, DelayLine, AmpPhase };

Family family_of(const CancellerConfig& config);
/// Number of taps M (1 for AmpPhase).
std::size_t tap_count(const CancellerConfig& config);
const char* family_name(Family family);
/// Inverse of family_name; accepts "pcb", "rfic", "delay-line", "amp-phase".
Family parse_family(const std::string& name);

// ---------------------------------------------------------------------------
// Responses
// ---------------------------------------------------------------------------

/// PCB bandpass response H^B via the closed form. Throws NumericDegeneracyError
/// when |M_C| < 1e-30 S at any frequency.
ComplexResponse pcb_bpf_response(const PcbTapConfig& tap, const PcbCircuitConstants& constants,
                                 const FrequencyGrid& grid);
/// Same quantity via the explicit five-element ABCD cascade, 1/(R_S·M_C).
ComplexResponse pcb_bpf_response_abcd(const PcbTapConfig& tap, const PcbCircuitConstants& constants,
                                      const FrequencyGrid& grid);

ComplexResponse pcb_canceller_response(const PcbCanceller& config, const FrequencyGrid& grid);
ComplexResponse rfic_canceller_response(const RficCanceller& config, const FrequencyGrid& grid);
ComplexResponse delay_line_response(const DelayLineCanceller& config, const FrequencyGrid& grid);
ComplexResponse amp_phase_response(double amp_linear, double phase_rad, const FrequencyGrid& grid);

/// Dispatches on the configuration variant.
ComplexResponse canceller_response(const CancellerConfig& config, const FrequencyGrid& grid);

/// Peak frequency (lowest index on ties) and fc / (-3 dB bandwidth), with the
/// band edges linearly interpolated. Throws BandTooNarrowError when a crossing
/// is missing on either side, std::invalid_argument when K < 2.
std::pair<double, double> extract_center_and_q(const ComplexResponse& response);

namespace detail {
// Accumulate single-tap responses into `out` (size == freqs.size()). Used by
// the optimizer hot loop to avoid allocating grids.
void add_rfic_tap(const RficTapConfig& tap, std::span<const double> freqs, std::span<cplx> out);
void add_pcb_tap(const PcbTapConfig& tap, const PcbCircuitConstants& constants, std::span<const double> freqs,
                 std::span<cplx> out);
void add_delay_tap(const DelayLineTap& tap, std::span<const double> freqs, std::span<cplx> out);
/// Closed-form H^B at one frequency with the effective tank capacitance.
cplx pcb_bpf_at(double c_f_farad, double c_q_farad, const PcbCircuitConstants& constants, double f_hz);
/// PCB common factor A0·exp(-j2πfτ0).
cplx pcb_common_factor(const PcbCircuitConstants& constants, double f_hz);
} // namespace detail

} // namespace fdesic
