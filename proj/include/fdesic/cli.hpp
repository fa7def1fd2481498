// SPDX-License-Identifier: Apache-2.0
//
// fde-sic commands. Each command reads a RunConfig, writes deterministic
// data files into the output directory and a timestamped run.log sidecar.
#pragma once

#include "fdesic/config.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace fdesic {

/// Process exit codes.
enum ExitCode : int { kExitOk = 0, kExitIo = 1, kExitConfig = 2, kExitNumeric = 3 };

struct CommandOptions {
    std::filesystem::path out_dir = ".";
    unsigned jobs = 1;
    std::optional<Family> family;  ///< optimize: overrides optimize.family
    bool heuristic_baseline = false; ///< optimize: --baseline heur
};

/// Data files written by a command, relative to out_dir, in write order.
struct CommandResult {
    std::vector<std::string> files;
    std::vector<std::string> warnings;
};

CommandResult cmd_model(const RunConfig& config, const CommandOptions& options);
CommandResult cmd_optimize(const RunConfig& config, const CommandOptions& options);
CommandResult cmd_sweep(const RunConfig& config, const CommandOptions& options);
CommandResult cmd_network(const RunConfig& config, const CommandOptions& options);
CommandResult cmd_digsic(const RunConfig& config, const CommandOptions& options);

/// Expands the model presets and curves into labeled responses.
std::vector<std::pair<std::string, ComplexResponse>> model_curves(const RunConfig& config);

/// Dispatches by command name, writes run.log and maps exceptions to exit
/// codes with a message on `err`.
int run_command(const std::string& command, const RunConfig& config, const CommandOptions& options,
                std::ostream& err);

/// Full command line: `fde-sic {model|optimize|sweep|network|digsic} --config <file>
/// [--seed N] [--jobs N] [--out DIR]`.
int cli_main(int argc, char** argv);

} // namespace fdesic
