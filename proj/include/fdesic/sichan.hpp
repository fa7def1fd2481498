// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "fdesic/response.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace fdesic {

/// One multipath component a·exp(-j(2πfτ + φ)) of a synthetic SI channel.
struct MultipathComponent {
    double amp_linear = 1.0;
    double tau_s = 0.0;
    double phase_rad = 0.0;
};

struct SiChannelSpec {
    std::vector<MultipathComponent> paths;
    double target_isolation_db = -20.0;
    FrequencyGrid grid = FrequencyGrid({900e6});
    std::uint64_t rng_seed = 0;

    void validate() const;
};

/// Per-frequency TX/RX isolation and RF SIC summaries of a residual response.
struct SicMetrics {
    std::vector<double> isolation_db_per_freq; ///< 20·log10|H_res(f_k)|, floored at -200 dB
    double mean_rf_sic_db = 0.0;               ///< -10·log10(mean_k |H_res|²)
    double worst_rf_sic_db = 0.0;              ///< -max_k isolation
    double mean_rf_sic_db_dbavg = 0.0;         ///< -mean_k isolation (diagnostic)
};

inline constexpr double kIsolationFloorDb = -200.0;

/// Fixed seed of the documented benchmark channel.
inline constexpr std::uint64_t kBenchmarkChannelSeed = 1304;
/// Benchmark channel draw: path count, delay range and amplitude spread.
inline constexpr int kBenchmarkPaths = 4;
inline constexpr double kBenchmarkMaxDelayS = 40e-9;
inline constexpr double kBenchmarkAmpSpreadDb = 15.0;
/// Grid of the benchmark channel: 860-940 MHz, 312.5 kHz spacing.
FrequencyGrid benchmark_grid();

/// H_SI(f_k) = s·Σ a_p exp(-j(2πf_kτ_p + φ_p)), with s > 0 such that
/// 10·log10(mean_k |H_SI|²) equals target_isolation_db.
ComplexResponse synth_si_channel(const SiChannelSpec& spec);

/// Seeded draw of `kBenchmarkPaths` paths: delays uniform in [0, kBenchmarkMaxDelayS],
/// amplitudes log-uniform within kBenchmarkAmpSpreadDb, phases uniform.
SiChannelSpec benchmark_channel_spec(std::uint64_t seed = kBenchmarkChannelSeed,
                                     const FrequencyGrid& grid = benchmark_grid(),
                                     double target_isolation_db = -20.0);

/// synth_si_channel(benchmark_channel_spec(seed)).
ComplexResponse benchmark_channel(std::uint64_t seed = kBenchmarkChannelSeed);

/// H_SI - H_canc. Grids must be identical.
ComplexResponse residual(const ComplexResponse& h_si, const ComplexResponse& h_canc);

SicMetrics sic_metrics(const ComplexResponse& h_res);

/// 20·log10(max|H| / min|H|) over the response.
double magnitude_variation_db(const ComplexResponse& h);

/// CSV with header `freq_hz,re,im`, 17 significant digits.
void store_channel_csv(const ComplexResponse& response, const std::filesystem::path& path);
/// Throws IoError if the file cannot be opened, ParseError (with line) on malformed content.
ComplexResponse load_channel_csv(const std::filesystem::path& path);

} // namespace fdesic
