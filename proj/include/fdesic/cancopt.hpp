// SPDX-License-Identifier: Apache-2.0
//
// Canceller configuration: box-constrained multi-start least squares over the
// tap parameters, hardware quantization, lattice local search, the heuristic
// RFIC baseline and M × B sweeps.
#pragma once

#include "fdesic/rfmodel.hpp"
#include "fdesic/sichan.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fdesic {

/// Realizable values of one parameter: min + k·step (k = 0.. while <= max),
/// or 2^bits values equally spaced over [min, max] inclusive.
struct LatticeAxis {
    double min = 0.0;
    double max = 1.0;
    double step = 0.0;
    int bits = 0;

    static LatticeAxis with_step(double min, double max, double step) { return {min, max, step, 0}; }
    static LatticeAxis with_bits(double min, double max, int bits) { return {min, max, 0.0, bits}; }

    void validate() const;
    std::size_t count() const;
    double value(std::size_t index) const;
    /// Nearest lattice index; exact ties go to the lower value.
    std::size_t nearest_index(double x) const;
    double snap(double x) const { return value(nearest_index(x)); }
};

/// One entry per tap parameter, in the family's parameter order.
struct QuantizationSpec {
    std::vector<LatticeAxis> axes;
};

struct ParamBox {
    std::string name;
    double min = 0.0;
    double max = 1.0;
    bool circular = false; ///< phase: optimized on the circle [-pi, pi)
};

/// Box constraints (and optional quantization) for one canceller family.
///
/// Per-tap parameter order:
///   pcb:        amp_db, phase_rad, c_f_farad, c_q_farad
///   rfic:       amp_db, phase_rad, fc_hz, q
///   delay-line: amp_linear, phase_rad, tau_s
///   amp-phase:  amp_linear, phase_rad
struct ConstraintSet {
    Family family = Family::Rfic;
    std::vector<ParamBox> boxes;
    std::optional<QuantizationSpec> quantization;
    PcbCircuitConstants pcb_constants;

    /// Hardware ranges and resolutions of each family; delay-line and
    /// amp-phase have no quantization.
    static ConstraintSet defaults(Family family);

    std::size_t params_per_tap() const { return boxes.size(); }
    void validate() const;
};

struct SolverOptions {
    enum class Method { DampedLeastSquares, NelderMead };

    std::size_t restarts = 16;
    int max_iterations = 2000;
    double tolerance = 1e-12; ///< relative objective improvement
    std::uint64_t seed = 0;
    Method method = Method::DampedLeastSquares;
    unsigned jobs = 1;
    /// Extra starting points (flat parameter vectors), tried after the heuristic start.
    std::vector<std::vector<double>> warm_starts;
};

/// Metrics of one stage of the configuration pipeline.
struct StageResult {
    std::string name; ///< "ideal", "rounded", "local-search", "heuristic"
    CancellerConfig config;
    double objective_value = 0.0;
    SicMetrics metrics;
};

struct OptimizeReport {
    CancellerConfig best_config;
    std::vector<double> best_params;
    double objective_value = 0.0; ///< Σ_k |H_SI - H(best_config)|²
    SicMetrics metrics;
    std::vector<StageResult> stages;
    std::size_t restarts_used = 0;
    std::size_t iterations = 0;
    double wall_time_s = 0.0;
    bool converged = true;
};

/// Flat parameter vector of a configuration (see ConstraintSet for ordering).
std::vector<double> encode_params(const CancellerConfig& config);
/// Inverse of encode_params. PCB constants come from `constraints`.
CancellerConfig decode_params(const ConstraintSet& constraints, std::span<const double> params);

/// Σ_k |H_SI(f_k) - H(f_k)|², evaluated through canceller_response().
double objective(const ComplexResponse& h_si, const CancellerConfig& config);

/// Continuous (ideal) multi-start optimization of an m_taps canceller.
OptimizeReport optimize_config(Family family, std::size_t m_taps, const ComplexResponse& h_si,
                               const ConstraintSet& constraints, const SolverOptions& options = {});

/// Snap every parameter to its lattice. Throws std::invalid_argument when the
/// config is outside the boxes or `constraints` has no quantization.
CancellerConfig quantize_config(const CancellerConfig& config, const ConstraintSet& constraints);

/// Cyclic coordinate descent over ±1 lattice steps, accepting strict decreases.
OptimizeReport local_search(const CancellerConfig& config_quantized, const ComplexResponse& h_si,
                            const ConstraintSet& constraints, int max_rounds = 10);

/// Sub-band placement baseline: tap i centered on sub-band i, Q = fc/(B/M),
/// amplitude and phase matched to H_SI at fc. Clamped to the boxes.
CancellerConfig heuristic_rfic_config(std::size_t m_taps, const ComplexResponse& h_si,
                                      const ConstraintSet& constraints);

/// optimize → (when quantized) round → local search. Stages are recorded in
/// the report; best_config is the last stage.
OptimizeReport optimize_pipeline(Family family, std::size_t m_taps, const ComplexResponse& h_si,
                                 const ConstraintSet& constraints, const SolverOptions& options, bool quantized,
                                 int local_search_rounds = 10);

/// Copy of `config` with one extra tap whose response sums to the original
/// (the largest tap split in two). Used to warm-start M+1 from M.
CancellerConfig split_largest_tap(const CancellerConfig& config, const ConstraintSet& constraints);

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

enum class SweepMode { Ideal, Quantized };
const char* sweep_mode_name(SweepMode mode);

struct SweepRequest {
    std::vector<Family> families{Family::Pcb, Family::Rfic, Family::DelayLine, Family::AmpPhase};
    std::vector<std::size_t> m_list{1, 2, 3, 4};
    std::vector<double> b_list_mhz{20, 40, 80};
    std::vector<SweepMode> modes{SweepMode::Ideal, SweepMode::Quantized};
    std::optional<double> center_hz; ///< defaults to the midpoint of the channel grid
    SolverOptions solver;
    std::vector<ConstraintSet> constraints; ///< overrides per family; defaults otherwise
    int local_search_rounds = 10;
};

struct SweepRow {
    Family family = Family::Rfic;
    std::size_t m = 1;
    double b_mhz = 20;
    SweepMode mode = SweepMode::Ideal;
    double mean_sic_db = 0.0;
    double worst_sic_db = 0.0;
    double objective_value = 0.0;
    bool m_monotone_violation = false;
    std::vector<double> params;
};

/// Sort key (family, B, M, mode).
bool sweep_row_less(const SweepRow& a, const SweepRow& b);

/// Called once per completed (family, B, M) cell, from worker threads.
using SweepCellCallback = std::function<void(const std::vector<SweepRow>&)>;

/// One row per (family, M, B, mode) cell, sorted by key. Families without a
/// quantization spec produce ideal rows only. `completed` rows (e.g. from a
/// resumed run) are reused instead of recomputed.
std::vector<SweepRow> sweep(const SweepRequest& request, const ComplexResponse& h_si,
                            const std::vector<SweepRow>& completed = {}, unsigned jobs = 1,
                            const SweepCellCallback& on_cell = {});

} // namespace fdesic
