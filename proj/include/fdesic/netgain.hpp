// SPDX-License-Identifier: Apache-2.0
//
// Shannon-rate throughput of half-duplex (TDMA) and full-duplex UL-DL,
// three-node and n-user networks, FD gains and Jain's fairness index.
#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace fdesic {

/// Linear SNR/INR inputs. gamma_self is the residual SI-to-noise ratio.
struct GainScenario {
    double bandwidth_hz = 20e6;
    double gamma_ul = 0.0;
    double gamma_dl = 0.0;
    double gamma_iui = 0.0;
    double gamma_self = 1.0;
    std::vector<double> snrs;  ///< per-user γ_i (three-node and n-user networks)
    std::vector<bool> fd_mask; ///< per-user FD capability

    void validate() const;
};

double db_to_ratio(double db);
double ratio_to_db(double ratio);

/// B·log2(1 + γ). Throws std::invalid_argument for γ < 0 or B < 0.
double shannon_rate(double bandwidth_hz, double gamma_linear);

struct UlDlThroughput {
    double r_hd = 0.0;
    double r_fd = 0.0;
    std::optional<double> gain; ///< r_fd / r_hd; empty when r_hd = 0
};

/// HD: (B/2)log2(1+γ_UL) + (B/2)log2(1+γ_DL).
/// FD: B·log2(1+γ_UL/(1+γ_Self)) + B·log2(1+γ_DL/(1+γ_IUI)).
UlDlThroughput uldl_throughputs(const GainScenario& s);

struct ThreeNodeThroughput {
    double r_hd = 0.0;
    double r_user1_fd = 0.0;
    double r_user2_fd = 0.0;
    double r_both_fd = 0.0;
    std::optional<double> gain_user1_fd, gain_user2_fd, gain_both_fd;
};

/// Two users (snrs[0], snrs[1]) sharing an FD access point in TDMA.
ThreeNodeThroughput three_node_throughputs(const GainScenario& s);

/// Σ_i (B/n)·2·log2(1+γ_i/(1+γ_Self)) for FD users and (B/n)·log2(1+γ_i) for HD users.
double tdma_network_throughput(const std::vector<double>& snrs, const std::vector<bool>& fd_mask, double gamma_self,
                               double bandwidth_hz);

/// Per-user rates of the same TDMA schedule (same terms as above).
std::vector<double> tdma_user_rates(const std::vector<double>& snrs, const std::vector<bool>& fd_mask,
                                    double gamma_self, double bandwidth_hz);

/// (Σr)² / (n·Σr²). Throws std::invalid_argument when empty, negative or all zero.
double jains_fairness(const std::vector<double>& rates);

// ---------------------------------------------------------------------------

/// Axis in dB, `points` values evenly spaced over [start_db, stop_db].
struct SurfaceAxis {
    double start_db = 0.0;
    double stop_db = 30.0;
    std::size_t points = 31;

    void validate() const;
    double value_db(std::size_t i) const;
};

enum class SurfaceKind {
    UlDl,     ///< x = γ_DL, y = γ_IUI; gain r_fd / r_hd
    ThreeNode ///< x = γ_1, y = γ_2; gain r_both_fd / r_hd
};

struct SurfacePoint {
    double x_db = 0.0;
    double y_db = 0.0;
    double gain = 0.0;                ///< NaN where the HD rate is zero
    std::optional<double> jfi_hd;     ///< three-node only
    std::optional<double> jfi_fd;     ///< three-node only, both users FD
};

/// Row-major over y (outer) then x (inner). Other inputs come from `fixed`.
std::vector<SurfacePoint> gain_surface(SurfaceKind kind, const SurfaceAxis& x, const SurfaceAxis& y,
                                       const GainScenario& fixed);

} // namespace fdesic
