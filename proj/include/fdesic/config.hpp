// SPDX-License-Identifier: Apache-2.0
//
// Run configuration shared by all CLI commands. Parsed from JSON with unknown
// keys rejected at every level (see schemas/config.schema.json).
#pragma once

#include "fdesic/cancopt.hpp"
#include "fdesic/digsic.hpp"
#include "fdesic/netgain.hpp"
#include "fdesic/sichan.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fdesic {

/// Invalid configuration document (CLI exit code 2).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ChannelConfig {
    enum class Source { Benchmark, File, Synthetic };
    Source source = Source::Benchmark;
    std::uint64_t seed = kBenchmarkChannelSeed; ///< benchmark draw
    std::filesystem::path path;                 ///< file source, resolved against the config directory
    SiChannelSpec synthetic;                    ///< synthetic source
};

struct ModelCurve {
    enum class Kind { Canceller, PcbBpf };
    std::string label;
    Kind kind = Kind::Canceller;
    CancellerConfig canceller = RficCanceller{};
    PcbTapConfig bpf_tap;          ///< PcbBpf only
    PcbCircuitConstants constants; ///< PcbBpf only
};

struct ModelSection {
    std::vector<ModelCurve> curves;
    std::vector<std::string> presets; ///< "table2-corners"
    FrequencyGrid grid = FrequencyGrid::linspace(500e6, 3000e6, 2501);
};

struct BandSelection {
    std::optional<double> center_hz; ///< channel grid midpoint by default
    double bandwidth_hz = 20e6;
};

struct OptimizeSection {
    Family family = Family::Pcb;
    std::size_t taps = 2;
    bool quantized = true;
    int local_search_rounds = 10;
    BandSelection band;
    bool heuristic_baseline = false; ///< rfic only: adds the sub-band placement row
};

struct SweepSection {
    std::vector<Family> families{Family::Pcb, Family::Rfic, Family::DelayLine, Family::AmpPhase};
    std::vector<std::size_t> m_list{1, 2, 3, 4};
    std::vector<double> b_list_mhz{20, 40, 80};
    std::vector<SweepMode> modes{SweepMode::Ideal, SweepMode::Quantized};
    std::optional<double> center_hz;
    int local_search_rounds = 10;
};

struct NetworkScenario {
    enum class Kind { UlDl, ThreeNode, Tdma };
    std::string name;
    Kind kind = Kind::UlDl;
    GainScenario scenario;
};

struct NetworkSection {
    double bandwidth_hz = 20e6;
    double gamma_self = 1.0;
    std::vector<double> uldl_gamma_ul_db{10, 15, 20};
    SurfaceAxis uldl_x{0.0, 40.0, 41};  ///< γ_DL
    SurfaceAxis uldl_y{-10.0, 40.0, 51}; ///< γ_IUI
    SurfaceAxis three_node_x{0.0, 40.0, 41};
    SurfaceAxis three_node_y{0.0, 40.0, 41};
    std::vector<NetworkScenario> scenarios;
    bool default_scenarios = true; ///< false once "scenarios" is given
};

struct DigsicSection {
    OfdmParams ofdm;
    std::size_t n_symbols = 50;
    MemPolySpec memory{7, 16, 16, 0.0};
    PaModel pa{{cplx{1.0}, cplx{-0.05, 0.02}, cplx{0.005, 0.0}}};
    double tx_power_dbm = 10.0;
    double noise_floor_dbm = -85.0;
    bool noise_enabled = true;
    Family family = Family::Pcb;
    std::size_t taps = 2;
    bool quantized = false; ///< ideal RF configuration by default
    BandSelection band;
    bool write_iq = false;
};

struct RunConfig {
    std::uint64_t seed = 0;
    std::optional<std::filesystem::path> out_dir; ///< --out wins; current directory otherwise
    ChannelConfig channel;
    SolverOptions solver;
    std::map<Family, ConstraintSet> constraints; ///< overrides; defaults otherwise
    ModelSection model;
    OptimizeSection optimize;
    SweepSection sweep;
    NetworkSection network;
    DigsicSection digsic;

    ConstraintSet constraints_for(Family f) const;
};

/// Parse a JSON document. Relative paths are resolved against base_dir.
/// Throws ConfigError on malformed JSON, wrong types, unknown keys or invalid values.
RunConfig parse_run_config(const std::string& json_text, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

/// Materialize the configured channel. File sources raise IoError/ParseError.
ComplexResponse load_channel(const ChannelConfig& channel);

} // namespace fdesic
