// SPDX-License-Identifier: Apache-2.0
//
// Python bindings: responses as (freqs, values) numpy pairs, optimizer
// reports as dicts and the command-line entry point.

#include "fdesic/cancopt.hpp"
#include "fdesic/cli.hpp"
#include "fdesic/digsic.hpp"
#include "fdesic/errors.hpp"
#include "fdesic/netgain.hpp"
#include "fdesic/rfmodel.hpp"
#include "fdesic/sichan.hpp"

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

namespace py = pybind11;
using namespace fdesic;

namespace {

using FreqArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using CplxArray = py::array_t<cplx, py::array::c_style | py::array::forcecast>;

template <class T>
py::array_t<T> to_array(std::span<const T> v) {
    return py::array_t<T>(static_cast<py::ssize_t>(v.size()), v.data());
}

py::tuple to_py(const ComplexResponse& h) { return py::make_tuple(to_array(h.grid().freqs()), to_array(h.values())); }

FrequencyGrid to_grid(const FreqArray& f) { return FrequencyGrid({f.data(), f.data() + f.size()}); }

ComplexResponse to_response(const FreqArray& f, const CplxArray& v) {
    if (f.size() != v.size())
        throw std::invalid_argument("freqs and values must have the same length");
    return ComplexResponse(to_grid(f), {v.data(), v.data() + v.size()});
}

py::dict metrics_dict(const SicMetrics& m) {
    py::dict d;
    d["mean_rf_sic_db"] = m.mean_rf_sic_db;
    d["worst_rf_sic_db"] = m.worst_rf_sic_db;
    d["mean_rf_sic_db_dbavg"] = m.mean_rf_sic_db_dbavg;
    return d;
}

py::dict report_dict(const OptimizeReport& r) {
    py::dict d;
    d["family"] = family_name(family_of(r.best_config));
    d["params"] = encode_params(r.best_config);
    d["objective_value"] = r.objective_value;
    d["converged"] = r.converged;
    d["restarts_used"] = r.restarts_used;
    d["iterations"] = r.iterations;
    d.attr("update")(metrics_dict(r.metrics));
    py::list stages;
    for (const auto& s : r.stages) {
        py::dict sd = metrics_dict(s.metrics);
        sd["name"] = s.name;
        sd["objective_value"] = s.objective_value;
        sd["params"] = encode_params(s.config);
        stages.append(sd);
    }
    d["stages"] = stages;
    return d;
}

CancellerConfig config_from(Family family, const std::vector<double>& params) {
    return decode_params(ConstraintSet::defaults(family), params);
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "RF self-interference cancellation models, optimizer, throughput and digital SIC";

    py::register_exception<NumericDegeneracyError>(m, "NumericDegeneracyError", PyExc_ArithmeticError);

    m.def("families", [] {
        return std::vector<std::string>{"pcb", "rfic", "delay-line", "amp-phase"};
    });

    m.def(
        "benchmark_channel", [](std::uint64_t seed) { return to_py(benchmark_channel(seed)); },
        py::arg("seed") = kBenchmarkChannelSeed, "Seeded multipath channel on 860-940 MHz as (freqs, values).");

    m.def(
        "canceller_response",
        [](const std::string& family, const std::vector<double>& params, const FreqArray& freqs) {
            return to_py(canceller_response(config_from(parse_family(family), params), to_grid(freqs)));
        },
        py::arg("family"), py::arg("params"), py::arg("freqs"),
        "Response of a canceller given its flat parameter vector (per tap, in box order).");

    m.def(
        "sic_metrics",
        [](const FreqArray& f, const CplxArray& h_si, const CplxArray& h_canc) {
            return metrics_dict(sic_metrics(residual(to_response(f, h_si), to_response(f, h_canc))));
        },
        py::arg("freqs"), py::arg("h_si"), py::arg("h_canc"));

    m.def(
        "optimize",
        [](const std::string& family, std::size_t taps, const FreqArray& f, const CplxArray& h, bool quantized,
           std::uint64_t seed, std::size_t restarts, int local_search_rounds) {
            const Family fam = parse_family(family);
            SolverOptions o;
            o.seed = seed;
            o.restarts = restarts;
            const auto h_si = to_response(f, h);
            OptimizeReport r;
            {
                py::gil_scoped_release release;
                r = optimize_pipeline(fam, taps, h_si, ConstraintSet::defaults(fam), o, quantized,
                                      local_search_rounds);
            }
            return report_dict(r);
        },
        py::arg("family"), py::arg("taps"), py::arg("freqs"), py::arg("h_si"), py::arg("quantized") = false,
        py::arg("seed") = 0, py::arg("restarts") = 16, py::arg("local_search_rounds") = 10,
        "Optimize, then (when quantized) round and local-search, with default constraints.");

    m.def("shannon_rate", &shannon_rate, py::arg("bandwidth_hz"), py::arg("gamma"));
    m.def("db_to_ratio", &db_to_ratio);
    m.def("ratio_to_db", &ratio_to_db);

    m.def(
        "uldl_throughputs",
        [](double gamma_ul, double gamma_dl, double gamma_iui, double gamma_self, double bandwidth_hz) {
            GainScenario s;
            s.gamma_ul = gamma_ul;
            s.gamma_dl = gamma_dl;
            s.gamma_iui = gamma_iui;
            s.gamma_self = gamma_self;
            s.bandwidth_hz = bandwidth_hz;
            const auto r = uldl_throughputs(s);
            py::dict d;
            d["r_hd"] = r.r_hd;
            d["r_fd"] = r.r_fd;
            d["gain"] = r.gain;
            return d;
        },
        py::arg("gamma_ul"), py::arg("gamma_dl"), py::arg("gamma_iui") = 0.0, py::arg("gamma_self") = 1.0,
        py::arg("bandwidth_hz") = 20e6, "Linear SNR inputs; rates in bit/s.");

    m.def(
        "three_node_throughputs",
        [](double gamma_1, double gamma_2, double gamma_self, double bandwidth_hz) {
            GainScenario s;
            s.snrs = {gamma_1, gamma_2};
            s.gamma_self = gamma_self;
            s.bandwidth_hz = bandwidth_hz;
            const auto r = three_node_throughputs(s);
            py::dict d;
            d["r_hd"] = r.r_hd;
            d["r_user1_fd"] = r.r_user1_fd;
            d["r_user2_fd"] = r.r_user2_fd;
            d["r_both_fd"] = r.r_both_fd;
            d["gain_both_fd"] = r.gain_both_fd;
            return d;
        },
        py::arg("gamma_1"), py::arg("gamma_2"), py::arg("gamma_self") = 1.0, py::arg("bandwidth_hz") = 20e6);

    m.def("tdma_network_throughput", &tdma_network_throughput, py::arg("snrs"), py::arg("fd_mask"),
          py::arg("gamma_self"), py::arg("bandwidth_hz"));
    m.def("jains_fairness", &jains_fairness, py::arg("rates"));

    m.def(
        "gen_ofdm",
        [](std::size_t n_symbols, std::uint64_t seed, const std::string& constellation) {
            OfdmParams p;
            p.constellation = parse_constellation(constellation);
            const auto x = gen_ofdm(p, n_symbols, seed);
            return to_array(std::span<const cplx>(x));
        },
        py::arg("n_symbols"), py::arg("seed") = 0, py::arg("constellation") = "qpsk",
        "64-subcarrier OFDM with 16-sample prefix and 52 active bins at unit power.");

    m.def(
        "fit_digital_canceller",
        [](const CplxArray& tx, const CplxArray& rx, int max_odd_order, std::size_t memory_depth, std::size_t lead) {
            if (tx.size() != rx.size())
                throw std::invalid_argument("tx and rx must have the same length");
            const MemPolySpec spec{max_odd_order, memory_depth, lead, 0.0};
            const auto fit = fit_digital_canceller(std::span<const cplx>(tx.data(), tx.size()),
                                                   std::span<const cplx>(rx.data(), rx.size()), spec);
            py::dict d;
            d["coefficients"] = to_array(std::span<const cplx>(fit.coefficients));
            d["digital_sic_db"] = fit.digital_sic_db;
            d["residual_power_db"] = fit.residual_power_db;
            d["rank_deficient"] = fit.rank_deficient;
            return d;
        },
        py::arg("tx"), py::arg("rx"), py::arg("max_odd_order") = 7, py::arg("memory_depth") = 3,
        py::arg("lead") = 0);

    m.def(
        "main",
        [](std::vector<std::string> args) {
            args.insert(args.begin(), "fde-sic");
            std::vector<char*> argv;
            for (auto& a : args)
                argv.push_back(a.data());
            py::gil_scoped_release release;
            return cli_main(static_cast<int>(argv.size()), argv.data());
        },
        py::arg("args"), "Run the fde-sic command line; returns the exit code.");
}
