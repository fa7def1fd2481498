// SPDX-License-Identifier: Apache-2.0
#include "fdesic/cli.hpp"

#include "fdesic/errors.hpp"

#include <json.hpp>

#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <mutex>
#include <numbers>
#include <sstream>

namespace fdesic {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string fmt17(double v) {
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_short(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

/// NaN and infinities become null.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

class FileOut {
public:
    explicit FileOut(const fs::path& path) : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
        if (!out_)
            throw IoError("cannot open '" + path.string() + "' for writing");
    }
    std::ofstream& stream() { return out_; }
    void close() {
        out_.close();
        if (!out_)
            throw IoError("write to '" + path_.string() + "' failed");
    }

private:
    fs::path path_;
    std::ofstream out_;
};

void write_text(const fs::path& path, const std::string& text) {
    FileOut f(path);
    f.stream() << text;
    f.close();
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir))
        throw IoError("cannot create output directory '" + dir.string() + "'");
}

json canceller_json(const CancellerConfig& config) {
    json j;
    j["family"] = family_name(family_of(config));
    std::visit(
        [&](const auto& c) {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, PcbCanceller>) {
                for (const auto& t : c.taps)
                    j["taps"].push_back({{"amp_db", t.amp_db},
                                         {"phase_rad", t.phase_rad},
                                         {"c_f_farad", t.c_f_farad},
                                         {"c_q_farad", t.c_q_farad}});
            } else if constexpr (std::is_same_v<T, RficCanceller>) {
                for (const auto& t : c.taps)
                    j["taps"].push_back(
                        {{"amp_db", t.amp_db}, {"phase_rad", t.phase_rad}, {"fc_hz", t.fc_hz}, {"q", t.q}});
            } else if constexpr (std::is_same_v<T, DelayLineCanceller>) {
                for (const auto& t : c.taps)
                    j["taps"].push_back(
                        {{"amp_linear", t.amp_linear}, {"tau_s", t.tau_s}, {"phase_rad", t.phase_rad}});
            } else {
                j["amp_linear"] = c.amp_linear;
                j["phase_rad"] = c.phase_rad;
            }
        },
        config);
    return j;
}

json stage_json(const StageResult& st) {
    return {{"name", st.name},
            {"objective_value", num(st.objective_value)},
            {"mean_rf_sic_db", num(st.metrics.mean_rf_sic_db)},
            {"worst_rf_sic_db", num(st.metrics.worst_rf_sic_db)},
            {"mean_rf_sic_db_dbavg", num(st.metrics.mean_rf_sic_db_dbavg)},
            {"params", encode_params(st.config)},
            {"config", canceller_json(st.config)}};
}

StageResult evaluate_stage(std::string name, CancellerConfig config, const ComplexResponse& h) {
    StageResult st;
    st.name = std::move(name);
    st.objective_value = objective(h, config);
    st.metrics = sic_metrics(residual(h, canceller_response(config, h.grid())));
    st.config = std::move(config);
    return st;
}

struct Band {
    double center_hz;
    double bandwidth_hz;
    ComplexResponse h;
};

Band select_band(const ComplexResponse& h_si, const BandSelection& sel) {
    const double center = sel.center_hz.value_or(0.5 * (h_si.grid().front() + h_si.grid().back()));
    const double half = 0.5 * sel.bandwidth_hz;
    const double slack = 1e-9 * center;
    if (h_si.grid().front() > center - half + slack || h_si.grid().back() < center + half - slack)
        throw std::invalid_argument("band " + fmt_short(center / 1e6) + " MHz +/- " + fmt_short(half / 1e6) +
                                    " MHz is not covered by the channel grid");
    return {center, sel.bandwidth_hz, h_si.restricted(center - half, center + half)};
}

json band_json(const Band& b) {
    return {{"center_hz", b.center_hz}, {"bandwidth_hz", b.bandwidth_hz}, {"points", b.h.size()}};
}

SolverOptions solver_for(const RunConfig& cfg, unsigned jobs) {
    SolverOptions s = cfg.solver;
    s.seed = cfg.seed;
    s.jobs = std::max(1u, jobs);
    return s;
}

void write_response_csv(const fs::path& path, const ComplexResponse& h) {
    FileOut f(path);
    auto& o = f.stream();
    o << "freq_hz,re,im,mag_db,phase_deg\n";
    for (std::size_t k = 0; k < h.size(); ++k) {
        const cplx v = h[k];
        o << fmt17(h.grid()[k]) << ',' << fmt17(v.real()) << ',' << fmt17(v.imag()) << ','
          << fmt17(20.0 * std::log10(std::abs(v))) << ',' << fmt17(std::arg(v) * 180.0 / std::numbers::pi) << '\n';
    }
    f.close();
}

// ---------------------------------------------------------------------------
// Sweep journal

constexpr const char* kSweepHeader = "family,m,b_mhz,mode,mean_sic_db,worst_sic_db,objective,m_monotone_violation,params";

std::string sweep_line(const SweepRow& r) {
    std::string params;
    for (std::size_t i = 0; i < r.params.size(); ++i)
        params += (i ? ";" : "") + fmt17(r.params[i]);
    return std::string(family_name(r.family)) + ',' + std::to_string(r.m) + ',' + fmt17(r.b_mhz) + ',' +
           sweep_mode_name(r.mode) + ',' + fmt17(r.mean_sic_db) + ',' + fmt17(r.worst_sic_db) + ',' +
           fmt17(r.objective_value) + ',' + (r.m_monotone_violation ? "1" : "0") + ',' + params;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep))
        out.push_back(cur);
    if (!s.empty() && s.back() == sep)
        out.emplace_back();
    return out;
}

std::optional<SweepRow> parse_sweep_line(const std::string& line) {
    const auto f = split(line, ',');
    if (f.size() != 9)
        return std::nullopt;
    try {
        SweepRow r;
        r.family = parse_family(f[0]);
        r.m = std::stoul(f[1]);
        r.b_mhz = std::stod(f[2]);
        if (f[3] == "ideal")
            r.mode = SweepMode::Ideal;
        else if (f[3] == "quantized")
            r.mode = SweepMode::Quantized;
        else
            return std::nullopt;
        r.mean_sic_db = std::stod(f[4]);
        r.worst_sic_db = std::stod(f[5]);
        r.objective_value = std::stod(f[6]);
        for (const auto& p : split(f[8], ';'))
            r.params.push_back(std::stod(p));
        return r;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

/// FNV-1a over everything that determines the sweep rows.
std::string sweep_fingerprint(const SweepRequest& req, const ComplexResponse& h) {
    std::uint64_t x = 1469598103934665603ull;
    auto mix = [&](const void* p, std::size_t n) {
        const auto* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            x ^= b[i];
            x *= 1099511628211ull;
        }
    };
    auto mixd = [&](double d) { mix(&d, sizeof d); };
    auto mixu = [&](std::uint64_t u) { mix(&u, sizeof u); };
    for (auto f : req.families)
        mixu(static_cast<std::uint64_t>(f));
    for (auto m : req.m_list)
        mixu(m);
    for (auto b : req.b_list_mhz)
        mixd(b);
    for (auto m : req.modes)
        mixu(static_cast<std::uint64_t>(m));
    mixd(req.center_hz.value_or(-1.0));
    mixu(req.solver.restarts);
    mixu(static_cast<std::uint64_t>(req.solver.max_iterations));
    mixd(req.solver.tolerance);
    mixu(req.solver.seed);
    mixu(static_cast<std::uint64_t>(req.solver.method));
    mixu(static_cast<std::uint64_t>(req.local_search_rounds));
    for (const auto& cs : req.constraints) {
        mixu(static_cast<std::uint64_t>(cs.family));
        for (const auto& b : cs.boxes) {
            mixd(b.min);
            mixd(b.max);
        }
        if (cs.quantization)
            for (const auto& a : cs.quantization->axes) {
                mixd(a.min);
                mixd(a.max);
                mixd(a.step);
                mixu(static_cast<std::uint64_t>(a.bits));
            }
        const auto& c = cs.pcb_constants;
        for (double d : {c.l_f_henry, c.l_q_henry, c.r_f_ohm, c.r_q_ohm, c.beta_l_rad, c.z0_ohm, c.a0_db, c.tau0_s,
                         c.c_fixed_farad})
            mixd(d);
    }
    for (std::size_t k = 0; k < h.size(); ++k) {
        mixd(h.grid()[k]);
        mixd(h[k].real());
        mixd(h[k].imag());
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, x);
    return buf;
}

std::vector<SweepRow> read_journal(const fs::path& path, const std::string& fingerprint) {
    std::ifstream in(path);
    if (!in)
        return {};
    std::string line;
    if (!std::getline(in, line) || line != "# fingerprint=" + fingerprint)
        return {};
    std::vector<SweepRow> rows;
    while (std::getline(in, line))
        if (auto r = parse_sweep_line(line))
            rows.push_back(*r);
    return rows;
}

// ---------------------------------------------------------------------------
// Network

std::vector<NetworkScenario> default_scenarios(const NetworkSection& net) {
    auto base = [&] {
        GainScenario g;
        g.bandwidth_hz = net.bandwidth_hz;
        g.gamma_self = net.gamma_self;
        return g;
    };
    std::vector<NetworkScenario> out;
    GainScenario a = base();
    a.gamma_ul = 10.0;
    a.gamma_dl = 10.0;
    out.push_back({"uldl-10db-no-iui", NetworkScenario::Kind::UlDl, a});
    GainScenario b = base();
    b.snrs = {100.0, 100.0};
    b.fd_mask = {true, true};
    out.push_back({"three-node-20db", NetworkScenario::Kind::ThreeNode, b});
    for (int nfd = 0; nfd <= 2; ++nfd) {
        GainScenario c = base();
        c.snrs = {100.0, 100.0, 100.0};
        c.fd_mask = {nfd >= 1, nfd >= 2, false};
        out.push_back({"tdma-3-users-" + std::to_string(nfd) + "-fd", NetworkScenario::Kind::Tdma, c});
    }
    return out;
}

json opt_num(const std::optional<double>& v) { return v ? num(*v) : json(nullptr); }

json scenario_json(const NetworkScenario& s) {
    const auto& g = s.scenario;
    json in{{"bandwidth_hz", g.bandwidth_hz}, {"gamma_self", g.gamma_self}};
    json out;
    switch (s.kind) {
    case NetworkScenario::Kind::UlDl: {
        in["gamma_ul"] = g.gamma_ul;
        in["gamma_dl"] = g.gamma_dl;
        in["gamma_iui"] = g.gamma_iui;
        const auto t = uldl_throughputs(g);
        out = {{"r_hd", t.r_hd}, {"r_fd", t.r_fd}, {"gain", opt_num(t.gain)}};
        break;
    }
    case NetworkScenario::Kind::ThreeNode: {
        in["snrs"] = g.snrs;
        const auto t = three_node_throughputs(g);
        out = {{"r_hd", t.r_hd},
               {"r_user1_fd", t.r_user1_fd},
               {"r_user2_fd", t.r_user2_fd},
               {"r_both_fd", t.r_both_fd},
               {"gain_user1_fd", opt_num(t.gain_user1_fd)},
               {"gain_user2_fd", opt_num(t.gain_user2_fd)},
               {"gain_both_fd", opt_num(t.gain_both_fd)}};
        const std::vector<double> hd{shannon_rate(g.bandwidth_hz, g.snrs[0]) / 2,
                                     shannon_rate(g.bandwidth_hz, g.snrs[1]) / 2};
        const auto fd = tdma_user_rates(g.snrs, {true, true}, g.gamma_self, g.bandwidth_hz);
        auto jfi = [](const std::vector<double>& r) {
            return r[0] + r[1] > 0.0 ? json(jains_fairness(r)) : json(nullptr);
        };
        out["jfi_hd"] = jfi(hd);
        out["jfi_both_fd"] = jfi(fd);
        break;
    }
    case NetworkScenario::Kind::Tdma: {
        in["snrs"] = g.snrs;
        in["fd_mask"] = g.fd_mask;
        const std::vector<bool> all_hd(g.snrs.size(), false);
        const double r_hd = tdma_network_throughput(g.snrs, all_hd, g.gamma_self, g.bandwidth_hz);
        const double r = tdma_network_throughput(g.snrs, g.fd_mask, g.gamma_self, g.bandwidth_hz);
        const auto rates = tdma_user_rates(g.snrs, g.fd_mask, g.gamma_self, g.bandwidth_hz);
        double sum = 0.0;
        for (double x : rates)
            sum += x;
        out = {{"r_hd", r_hd},
               {"r_network", r},
               {"gain", r_hd > 0.0 ? json(r / r_hd) : json(nullptr)},
               {"user_rates", rates},
               {"jfi", sum > 0.0 ? json(jains_fairness(rates)) : json(nullptr)}};
        break;
    }
    }
    static const char* kinds[] = {"uldl", "three-node", "tdma"};
    return {{"name", s.name}, {"kind", kinds[static_cast<int>(s.kind)]}, {"inputs", in}, {"outputs", out}};
}

std::string db_tag(double db) {
    std::string s = fmt_short(db);
    for (auto& c : s)
        if (c == '-')
            c = 'm';
        else if (c == '.')
            c = 'p';
    return s;
}

// ---------------------------------------------------------------------------

std::string iso_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

} // namespace

// ---------------------------------------------------------------------------

std::vector<std::pair<std::string, ComplexResponse>> model_curves(const RunConfig& cfg) {
    std::vector<std::pair<std::string, ComplexResponse>> out;
    const auto& grid = cfg.model.grid;
    for (const auto& preset : cfg.model.presets) {
        if (preset != "table2-corners")
            throw ConfigError("config: model.presets: unknown preset '" + preset + "'");
        const auto cs = cfg.constraints_for(Family::Pcb);
        const auto& cf = cs.boxes[2];
        const auto& cq = cs.boxes[3];
        const std::pair<const char*, double> fs[] = {{"cf-min", cf.min}, {"cf-max", cf.max}};
        const std::pair<const char*, double> qs[] = {{"cq-min", cq.min}, {"cq-max", cq.max}};
        for (const auto& [fn, fv] : fs)
            for (const auto& [qn, qv] : qs) {
                PcbTapConfig tap;
                tap.c_f_farad = fv;
                tap.c_q_farad = qv;
                out.emplace_back(std::string("table2-") + fn + "-" + qn,
                                 pcb_bpf_response(tap, cs.pcb_constants, grid));
            }
    }
    for (const auto& c : cfg.model.curves) {
        if (c.kind == ModelCurve::Kind::PcbBpf)
            out.emplace_back(c.label, pcb_bpf_response(c.bpf_tap, c.constants, grid));
        else
            out.emplace_back(c.label, canceller_response(c.canceller, grid));
    }
    for (std::size_t i = 0; i < out.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (out[i].first == out[j].first)
                throw ConfigError("config: model: duplicate curve label '" + out[i].first + "'");
    return out;
}

CommandResult cmd_model(const RunConfig& cfg, const CommandOptions& opt) {
    if (cfg.model.curves.empty() && cfg.model.presets.empty())
        throw ConfigError("config: model: no curves or presets requested");
    const auto curves = model_curves(cfg);
    ensure_dir(opt.out_dir);
    CommandResult res;
    json manifest;
    const auto& grid = cfg.model.grid;
    manifest["grid"] = {{"start_hz", grid.front()}, {"stop_hz", grid.back()}, {"points", grid.size()}};
    manifest["curves"] = json::array();
    for (const auto& [label, h] : curves) {
        const std::string file = "model_" + label + ".csv";
        write_response_csv(opt.out_dir / file, h);
        res.files.push_back(file);
        json entry{{"label", label}, {"file", file}, {"center_hz", nullptr}, {"q", nullptr}};
        try {
            const auto [fc, q] = extract_center_and_q(h);
            entry["center_hz"] = fc;
            entry["q"] = q;
        } catch (const BandTooNarrowError&) {
            res.warnings.push_back("curve '" + label + "': -3 dB band not contained in the grid");
        } catch (const std::invalid_argument&) {
            res.warnings.push_back("curve '" + label + "': grid too short for center/Q extraction");
        }
        manifest["curves"].push_back(entry);
    }
    write_json(opt.out_dir / "model_manifest.json", manifest);
    res.files.push_back("model_manifest.json");
    return res;
}

CommandResult cmd_optimize(const RunConfig& cfg, const CommandOptions& opt) {
    const Family family = opt.family.value_or(cfg.optimize.family);
    const bool heur = opt.heuristic_baseline || cfg.optimize.heuristic_baseline;
    if (heur && family != Family::Rfic)
        throw ConfigError("config: the heuristic baseline is defined for the rfic family only");
    const auto cs = cfg.constraints_for(family);
    const auto h_si = load_channel(cfg.channel);
    const Band band = select_band(h_si, cfg.optimize.band);
    ensure_dir(opt.out_dir);

    const bool quantized = cfg.optimize.quantized && cs.quantization.has_value();
    const auto rep = optimize_pipeline(family, cfg.optimize.taps, band.h, cs, solver_for(cfg, opt.jobs), quantized,
                                       cfg.optimize.local_search_rounds);
    CommandResult res;
    json j;
    j["family"] = family_name(family);
    j["taps"] = tap_count(rep.best_config);
    j["seed"] = cfg.seed;
    j["band"] = band_json(band);
    j["quantized"] = quantized;
    j["converged"] = rep.converged;
    j["warning"] = nullptr;
    if (!rep.converged) {
        j["warning"] = "solver stopped at the iteration limit before meeting the tolerance";
        res.warnings.push_back(j["warning"].get<std::string>());
    }
    if (cfg.optimize.quantized && !quantized)
        res.warnings.push_back(std::string("family ") + family_name(family) + " has no quantization; ideal only");
    j["restarts_used"] = rep.restarts_used;
    j["iterations"] = rep.iterations;
    j["objective_value"] = num(rep.objective_value);
    j["mean_rf_sic_db"] = num(rep.metrics.mean_rf_sic_db);
    j["worst_rf_sic_db"] = num(rep.metrics.worst_rf_sic_db);
    j["stages"] = json::array();
    for (const auto& st : rep.stages)
        j["stages"].push_back(stage_json(st));
    if (heur)
        j["heuristic"] = stage_json(
            evaluate_stage("heuristic", heuristic_rfic_config(cfg.optimize.taps, band.h, cs), band.h));
    write_json(opt.out_dir / "optimize_report.json", j);
    res.files.push_back("optimize_report.json");
    store_channel_csv(residual(band.h, canceller_response(rep.best_config, band.h.grid())),
                      opt.out_dir / "residual.csv");
    res.files.push_back("residual.csv");
    return res;
}

CommandResult cmd_sweep(const RunConfig& cfg, const CommandOptions& opt) {
    const auto h_si = load_channel(cfg.channel);
    SweepRequest req;
    req.families = cfg.sweep.families;
    req.m_list = cfg.sweep.m_list;
    req.b_list_mhz = cfg.sweep.b_list_mhz;
    req.modes = cfg.sweep.modes;
    req.center_hz = cfg.sweep.center_hz;
    req.solver = solver_for(cfg, 1);
    req.local_search_rounds = cfg.sweep.local_search_rounds;
    for (const auto& [f, cs] : cfg.constraints)
        req.constraints.push_back(cs);
    ensure_dir(opt.out_dir);

    CommandResult res;
    const fs::path journal = opt.out_dir / "sweep.partial.csv";
    const std::string fp = sweep_fingerprint(req, h_si);
    const auto completed = read_journal(journal, fp);
    if (!completed.empty())
        res.warnings.push_back("resumed " + std::to_string(completed.size()) + " rows from " + journal.string());

    // Rewrite the journal with the reusable rows, then append cells as they finish.
    FileOut jf(journal);
    jf.stream() << "# fingerprint=" << fp << '\n';
    for (const auto& r : completed)
        jf.stream() << sweep_line(r) << '\n';
    jf.stream().flush();
    std::mutex mu;
    const auto rows = sweep(req, h_si, completed, std::max(1u, opt.jobs), [&](const std::vector<SweepRow>& cell) {
        std::lock_guard<std::mutex> lock(mu);
        for (const auto& r : cell)
            jf.stream() << sweep_line(r) << '\n';
        jf.stream().flush();
    });
    jf.close();

    std::string text = std::string(kSweepHeader) + '\n';
    std::size_t violations = 0;
    for (const auto& r : rows) {
        text += sweep_line(r) + '\n';
        violations += r.m_monotone_violation ? 1 : 0;
    }
    write_text(opt.out_dir / "sweep.csv", text);
    res.files.push_back("sweep.csv");
    std::error_code ec;
    fs::remove(journal, ec);
    if (violations)
        res.warnings.push_back(std::to_string(violations) + " ideal-mode M-monotonicity violation(s)");
    return res;
}

CommandResult cmd_network(const RunConfig& cfg, const CommandOptions& opt) {
    const auto& net = cfg.network;
    ensure_dir(opt.out_dir);
    CommandResult res;
    json summary;
    summary["bandwidth_hz"] = net.bandwidth_hz;
    summary["gamma_self"] = net.gamma_self;

    // UL-DL surfaces, one per γ_UL, on a shared (γ_DL, γ_IUI) grid.
    std::vector<std::vector<SurfacePoint>> surfaces;
    json uldl;
    uldl["gamma_ul_db"] = net.uldl_gamma_ul_db;
    uldl["files"] = json::array();
    uldl["mean_gain"] = json::array();
    for (double g_ul_db : net.uldl_gamma_ul_db) {
        GainScenario fixed;
        fixed.bandwidth_hz = net.bandwidth_hz;
        fixed.gamma_self = net.gamma_self;
        fixed.gamma_ul = db_to_ratio(g_ul_db);
        auto pts = gain_surface(SurfaceKind::UlDl, net.uldl_x, net.uldl_y, fixed);
        const std::string file = "network_uldl_ul" + db_tag(g_ul_db) + "db.csv";
        std::string text = "x,y,gain\n";
        double sum = 0.0;
        std::size_t n = 0;
        for (const auto& p : pts) {
            text += fmt17(p.x_db) + ',' + fmt17(p.y_db) + ',' + fmt17(p.gain) + '\n';
            if (std::isfinite(p.gain)) {
                sum += p.gain;
                ++n;
            }
        }
        write_text(opt.out_dir / file, text);
        res.files.push_back(file);
        uldl["files"].push_back(file);
        uldl["mean_gain"].push_back(n ? json(sum / static_cast<double>(n)) : json(nullptr));
        surfaces.push_back(std::move(pts));
    }
    // Ordering check: gain strictly decreasing in γ_UL at every grid point.
    std::vector<std::size_t> order(net.uldl_gamma_ul_db.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return net.uldl_gamma_ul_db[a] < net.uldl_gamma_ul_db[b]; });
    std::size_t points = surfaces.empty() ? 0 : surfaces.front().size();
    std::size_t violations = 0;
    for (std::size_t k = 0; k < points; ++k)
        for (std::size_t i = 1; i < order.size(); ++i)
            if (!(surfaces[order[i - 1]][k].gain > surfaces[order[i]][k].gain)) {
                ++violations;
                break;
            }
    uldl["grid_points"] = points;
    uldl["ordering_violations"] = violations;
    uldl["ordering_holds"] = violations == 0;
    json mean_order = true;
    for (std::size_t i = 1; i < order.size(); ++i) {
        const auto& a = uldl["mean_gain"][order[i - 1]];
        const auto& b = uldl["mean_gain"][order[i]];
        if (a.is_null() || b.is_null() || !(a.get<double>() > b.get<double>()))
            mean_order = false;
    }
    uldl["mean_ordering_holds"] = mean_order;
    summary["uldl"] = uldl;
    if (violations)
        res.warnings.push_back("UL-DL gain ordering fails at " + std::to_string(violations) + " of " +
                               std::to_string(points) + " grid points");

    // Three-node surface with JFI columns.
    {
        GainScenario fixed;
        fixed.bandwidth_hz = net.bandwidth_hz;
        fixed.gamma_self = net.gamma_self;
        const auto pts = gain_surface(SurfaceKind::ThreeNode, net.three_node_x, net.three_node_y, fixed);
        std::string text = "x,y,gain,jfi_hd,jfi_fd\n";
        for (const auto& p : pts)
            text += fmt17(p.x_db) + ',' + fmt17(p.y_db) + ',' + fmt17(p.gain) + ',' +
                    fmt17(p.jfi_hd.value_or(std::nan(""))) + ',' + fmt17(p.jfi_fd.value_or(std::nan(""))) + '\n';
        write_text(opt.out_dir / "network_three_node.csv", text);
        res.files.push_back("network_three_node.csv");
        summary["three_node"] = {{"file", "network_three_node.csv"}, {"grid_points", pts.size()}};
    }

    summary["scenarios"] = json::array();
    for (const auto& s : net.default_scenarios ? default_scenarios(net) : net.scenarios)
        summary["scenarios"].push_back(scenario_json(s));
    write_json(opt.out_dir / "network_summary.json", summary);
    res.files.push_back("network_summary.json");
    return res;
}

CommandResult cmd_digsic(const RunConfig& cfg, const CommandOptions& opt) {
    const auto& d = cfg.digsic;
    const auto cs = cfg.constraints_for(d.family);
    const auto h_si = load_channel(cfg.channel);
    const Band band = select_band(h_si, d.band);
    ensure_dir(opt.out_dir);
    CommandResult res;

    const bool quantized = d.quantized && cs.quantization.has_value();
    const auto rep = optimize_pipeline(d.family, d.taps, band.h, cs, solver_for(cfg, opt.jobs), quantized,
                                       cfg.optimize.local_search_rounds);
    const auto h_res = residual(band.h, canceller_response(rep.best_config, band.h.grid()));

    const auto tx = gen_ofdm(d.ofdm, d.n_symbols, cfg.seed);
    ResidualSiParams rp;
    rp.sample_rate_hz = d.ofdm.sample_rate_hz;
    rp.signal_half_band_hz = 0.5 * static_cast<double>(d.ofdm.n_active) * d.ofdm.subcarrier_spacing_hz();
    rp.center_hz = band.center_hz;
    rp.noise_floor_db = d.noise_floor_dbm - d.tx_power_dbm;
    rp.noise_enabled = d.noise_enabled;
    rp.seed = cfg.seed;
    const auto rx = apply_residual_si(tx, h_res, d.pa, rp);
    const auto fit = fit_digital_canceller(tx, rx, d.memory);
    const auto est = apply_digital_canceller(tx, fit, d.memory);
    std::vector<cplx> out(rx.size());
    for (std::size_t i = 0; i < rx.size(); ++i)
        out[i] = rx[i] - est[i];

    const double rx_db = mean_power_db(rx);
    const double rf_sic = -rx_db;
    const double overall = rf_sic + fit.digital_sic_db;
    json j;
    j["family"] = family_name(d.family);
    j["taps"] = tap_count(rep.best_config);
    j["quantized"] = quantized;
    j["seed"] = cfg.seed;
    j["band"] = band_json(band);
    j["tx_power_dbm"] = d.tx_power_dbm;
    j["noise_floor_dbm"] = d.noise_floor_dbm;
    j["noise_enabled"] = d.noise_enabled;
    j["n_symbols"] = d.n_symbols;
    j["samples"] = tx.size();
    j["coefficient_count"] = d.memory.coefficient_count();
    j["rf_sic_grid_db"] = num(rep.metrics.mean_rf_sic_db);
    j["rf_sic_db"] = num(rf_sic);
    j["digital_sic_db"] = num(fit.digital_sic_db);
    j["overall_sic_db"] = num(overall);
    j["rx_si_power_dbm"] = num(d.tx_power_dbm + rx_db);
    j["residual_power_dbm"] = num(d.tx_power_dbm + fit.residual_power_db);
    if (d.noise_enabled) {
        const double limit = rx_db - rp.noise_floor_db;
        j["noise_limit_db"] = num(limit);
        j["noise_limited"] = fit.residual_power_db - rp.noise_floor_db <= 3.0;
    } else {
        j["noise_limit_db"] = nullptr;
        j["noise_limited"] = false;
    }
    j["rank_deficient"] = fit.rank_deficient;
    if (fit.rank_deficient)
        res.warnings.push_back("regressor matrix is rank deficient; minimum-norm coefficients reported");
    j["iq_files"] = json::array();
    if (d.write_iq) {
        const std::pair<const char*, const std::vector<cplx>*> streams[] = {
            {"tx.iq", &tx}, {"rx.iq", &rx}, {"residual.iq", &out}};
        for (const auto& [name, s] : streams) {
            write_iq(opt.out_dir / name, *s);
            res.files.push_back(name);
            j["iq_files"].push_back(name);
        }
    }
    write_json(opt.out_dir / "digsic_report.json", j);
    res.files.push_back("digsic_report.json");
    return res;
}

int run_command(const std::string& command, const RunConfig& config, const CommandOptions& options,
                std::ostream& err) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::string started = iso_now();
    CommandResult res;
    int code = kExitOk;
    std::string error;
    try {
        if (command == "model")
            res = cmd_model(config, options);
        else if (command == "optimize")
            res = cmd_optimize(config, options);
        else if (command == "sweep")
            res = cmd_sweep(config, options);
        else if (command == "network")
            res = cmd_network(config, options);
        else if (command == "digsic")
            res = cmd_digsic(config, options);
        else
            throw ConfigError("unknown command '" + command + "'");
    } catch (const ConfigError& e) {
        code = kExitConfig;
        error = e.what();
    } catch (const NumericDegeneracyError& e) {
        code = kExitNumeric;
        error = std::string("numeric degeneracy: ") + e.what();
    } catch (const IoError& e) {
        code = kExitIo;
        error = e.what();
    } catch (const ParseError& e) {
        code = kExitIo;
        error = std::string("parse error: ") + e.what();
    } catch (const std::invalid_argument& e) {
        code = kExitConfig;
        error = std::string("invalid input: ") + e.what();
    } catch (const std::exception& e) {
        code = kExitIo;
        error = e.what();
    }
    for (const auto& w : res.warnings)
        err << "fde-sic " << command << ": warning: " << w << '\n';
    if (code != kExitOk)
        err << "fde-sic " << command << ": error: " << error << '\n';

    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::error_code ec;
    if (fs::is_directory(options.out_dir, ec)) {
        std::ofstream log(options.out_dir / "run.log", std::ios::app);
        log << "started=" << started << " command=" << command << " seed=" << config.seed
            << " jobs=" << options.jobs << " exit=" << code << " wall_s=" << wall << '\n';
        for (const auto& f : res.files)
            log << "  wrote " << f << '\n';
        for (const auto& w : res.warnings)
            log << "  warning: " << w << '\n';
        if (code != kExitOk)
            log << "  error: " << error << '\n';
    }
    return code;
}

} // namespace fdesic
