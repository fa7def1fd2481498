// SPDX-License-Identifier: Apache-2.0
#include "fdesic/cli.hpp"

#include "fdesic/errors.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace fdesic {

int cli_main(int argc, char** argv) {
    CLI::App app{"Frequency-domain-equalization RF self-interference canceller toolkit", "fde-sic"};
    app.require_subcommand(1, 1);
    app.set_version_flag("--version", "fde-sic 0.1.0");

    std::string config_path;
    std::optional<std::uint64_t> seed;
    unsigned jobs = 1;
    std::optional<std::string> out;
    std::optional<std::string> family;
    std::string baseline = "none";

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON run configuration")->required();
        sub->add_option("--seed", seed, "override the configuration seed");
        sub->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--out", out, "output directory (default: config out_dir or current directory)");
    };
    for (const char* name : {"model", "sweep", "network", "digsic"})
        add_common(app.add_subcommand(name));
    auto* optimize = app.add_subcommand("optimize");
    add_common(optimize);
    optimize->add_option("--family", family, "canceller family: pcb, rfic, delay-line, amp-phase");
    optimize->add_option("--baseline", baseline, "add a baseline row (rfic only)")
        ->check(CLI::IsMember({"none", "heur"}));
    app.get_subcommand("model")->description("tabulate model responses");
    optimize->description("configure one canceller against the channel");
    app.get_subcommand("sweep")->description("taps x bandwidth sweep");
    app.get_subcommand("network")->description("full-duplex throughput gains");
    app.get_subcommand("digsic")->description("RF plus digital cancellation on OFDM");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    RunConfig cfg;
    try {
        cfg = load_run_config(config_path);
    } catch (const ConfigError& e) {
        std::cerr << "fde-sic " << command << ": error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const IoError& e) {
        std::cerr << "fde-sic " << command << ": error: " << e.what() << '\n';
        return kExitIo;
    }
    if (seed)
        cfg.seed = *seed;

    CommandOptions opt;
    opt.out_dir = out ? std::filesystem::path(*out) : cfg.out_dir.value_or(".");
    opt.jobs = jobs;
    opt.heuristic_baseline = baseline == "heur";
    if (family) {
        try {
            opt.family = parse_family(*family);
        } catch (const std::invalid_argument& e) {
            std::cerr << "fde-sic " << command << ": error: --family: " << e.what() << '\n';
            return kExitConfig;
        }
    }
    return run_command(command, cfg, opt, std::cerr);
}

} // namespace fdesic
