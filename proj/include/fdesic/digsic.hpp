// SPDX-License-Identifier: Apache-2.0
//
// Baseband digital SIC after RF cancellation: synthetic OFDM, residual-SI
// synthesis (PA nonlinearity, residual channel, noise) and a least-squares
// memory-polynomial canceller.
#pragma once

#include "fdesic/response.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fdesic {

enum class Constellation { Bpsk, Qpsk, Qam16, Qam64 };
const char* constellation_name(Constellation c);
Constellation parse_constellation(const std::string& name);

struct OfdmParams {
    std::size_t n_subcarriers = 64;
    std::size_t cp_len = 16;
    std::size_t n_active = 52; ///< even; bins ±1..±n_active/2, DC unused
    double sample_rate_hz = 20e6;
    Constellation constellation = Constellation::Qpsk;

    void validate() const;
    std::size_t symbol_len() const { return n_subcarriers + cp_len; }
    double subcarrier_spacing_hz() const { return sample_rate_hz / static_cast<double>(n_subcarriers); }
    /// Signed indices of the active bins, ascending.
    std::vector<int> active_bins() const;
};

/// n_symbols OFDM symbols with cyclic prefix, scaled to exactly unit average power.
std::vector<cplx> gen_ofdm(const OfdmParams& params, std::size_t n_symbols, std::uint64_t seed);

struct MemPolySpec {
    int max_odd_order = 7;        ///< 1, 3, 5 or 7
    std::size_t memory_depth = 3; ///< causal lags 0..memory_depth-1
    std::size_t lead = 0;         ///< extra non-causal lags -lead..-1
    double regularization = 0.0;  ///< ridge weight, relative to the mean Gram diagonal

    void validate() const;
    std::size_t order_count() const { return static_cast<std::size_t>(max_odd_order + 1) / 2; }
    std::size_t coefficient_count() const { return order_count() * (memory_depth + lead); }
};

/// Static odd-order PA model y = Σ_i c_i·x·|x|^(2i).
struct PaModel {
    std::vector<cplx> odd_coeffs{cplx{1.0}};
    void validate() const;
};

struct ResidualSiParams {
    double sample_rate_hz = 20e6;
    double signal_half_band_hz = 8.125e6;  ///< must be covered by the h_res grid
    std::optional<double> center_hz;       ///< RF frequency of DC; grid midpoint by default
    double noise_floor_db = -85.0;         ///< relative to unit TX power
    bool noise_enabled = true;
    std::uint64_t seed = 0;
    std::size_t fir_taps = 64;             ///< even; lags -fir_taps/2 .. fir_taps/2-1
};

/// PA(tx) filtered by h_res (overlap-save FIR from h_res interpolated onto
/// FFT bins) plus complex white noise. Throws std::invalid_argument when the
/// grid does not cover center ± signal_half_band_hz.
std::vector<cplx> apply_residual_si(std::span<const cplx> tx, const ComplexResponse& h_res, const PaModel& pa,
                                    const ResidualSiParams& params);

/// 10·log10(mean |x|²); -inf for all-zero input.
double mean_power_db(std::span<const cplx> x);

struct DigitalFit {
    std::vector<cplx> coefficients; ///< order-major: (p = 1, lags), (p = 3, lags), ...
    double digital_sic_db = 0.0;    ///< 10·log10(P(rx) / P(rx - fit)), capped at kDigitalSicCapDb
    double residual_power_db = 0.0;
    bool rank_deficient = false;    ///< minimum-norm solution returned
};

inline constexpr double kDigitalSicCapDb = 300.0;

/// Regressor matrix column for (order, lag) evaluated for the whole stream.
std::vector<cplx> mempoly_regressor(std::span<const cplx> tx, int order, long lag);

/// Least-squares memory-polynomial fit of rx from tx. Requires equal lengths
/// of at least 10× the coefficient count.
DigitalFit fit_digital_canceller(std::span<const cplx> tx, std::span<const cplx> rx, const MemPolySpec& spec);

/// Canceller output Σ c·x[n-m]|x[n-m]|^(p-1) for fitted coefficients.
std::vector<cplx> apply_digital_canceller(std::span<const cplx> tx, const DigitalFit& fit, const MemPolySpec& spec);

/// Binary IQ: 8-byte magic "FDEIQ001" then interleaved little-endian float64 (re, im).
void write_iq(const std::filesystem::path& path, std::span<const cplx> samples);
std::vector<cplx> read_iq(const std::filesystem::path& path);

} // namespace fdesic
