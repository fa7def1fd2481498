// SPDX-License-Identifier: Apache-2.0
#include "fdesic/config.hpp"

#include "fdesic/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace fdesic {

namespace {

using json = nlohmann::json;

/// Strict object reader: every key must be consumed before done().
class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object())
            fail("expected an object");
    }

    [[noreturn]] void fail(const std::string& what, const std::string& key = "") const {
        throw ConfigError("config: " + where(key) + ": " + what);
    }
    std::string where(const std::string& key) const {
        if (key.empty())
            return path_.empty() ? "<root>" : path_;
        return path_.empty() ? key : path_ + "." + key;
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    const json& raw(const std::string& key) {
        if (!has(key))
            fail("missing required key '" + key + "'");
        seen_.insert(key);
        return j_.at(key);
    }

    Reader child(const std::string& key) { return Reader(raw(key), where(key)); }

    double number(const std::string& key) {
        const auto& v = raw(key);
        if (!v.is_number())
            fail("expected a number", key);
        const double d = v.get<double>();
        if (!std::isfinite(d))
            fail("expected a finite number", key);
        return d;
    }
    double number(const std::string& key, double def) { return has(key) ? number(key) : def; }

    std::uint64_t uint(const std::string& key) {
        const auto& v = raw(key);
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
            fail("expected a non-negative integer", key);
        return v.get<std::uint64_t>();
    }
    std::uint64_t uint(const std::string& key, std::uint64_t def) { return has(key) ? uint(key) : def; }

    bool boolean(const std::string& key, bool def) {
        if (!has(key))
            return def;
        const auto& v = raw(key);
        if (!v.is_boolean())
            fail("expected true or false", key);
        return v.get<bool>();
    }

    std::string string(const std::string& key) {
        const auto& v = raw(key);
        if (!v.is_string())
            fail("expected a string", key);
        return v.get<std::string>();
    }
    std::string string(const std::string& key, const std::string& def) { return has(key) ? string(key) : def; }

    const json& array(const std::string& key) {
        const auto& v = raw(key);
        if (!v.is_array())
            fail("expected an array", key);
        return v;
    }

    std::vector<double> numbers(const std::string& key) {
        std::vector<double> out;
        for (const auto& e : array(key)) {
            if (!e.is_number() || !std::isfinite(e.get<double>()))
                fail("expected an array of finite numbers", key);
            out.push_back(e.get<double>());
        }
        return out;
    }

    /// Linear ratio from `key` or `key_db`; both at once is an error.
    double ratio_or_db(const std::string& key, double def) {
        const std::string kdb = key + "_db";
        if (has(key) && has(kdb))
            fail("give either '" + key + "' or '" + kdb + "', not both");
        if (has(kdb))
            return db_to_ratio(number(kdb));
        if (has(key)) {
            const double v = number(key);
            if (v < 0.0)
                fail("ratio must be >= 0", key);
            return v;
        }
        return def;
    }

    void done() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key()))
                fail("unknown key '" + it.key() + "'");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

template <class Fn>
auto guarded(const Reader& r, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const std::invalid_argument& e) {
        r.fail(e.what());
    }
}

Family parse_family_at(Reader& r, const std::string& key) {
    const auto name = r.string(key);
    return guarded(r, [&] { return parse_family(name); });
}

FrequencyGrid parse_grid(Reader r) {
    const double start = r.number("start_hz");
    const double stop = r.number("stop_hz");
    const auto points = r.uint("points");
    r.done();
    return guarded(r, [&] { return FrequencyGrid::linspace(start, stop, points); });
}

PcbCircuitConstants parse_pcb_constants(Reader r) {
    PcbCircuitConstants c;
    c.l_f_henry = r.number("l_f_henry", c.l_f_henry);
    c.l_q_henry = r.number("l_q_henry", c.l_q_henry);
    c.r_f_ohm = r.number("r_f_ohm", c.r_f_ohm);
    c.r_q_ohm = r.number("r_q_ohm", c.r_q_ohm);
    c.beta_l_rad = r.number("beta_l_rad", c.beta_l_rad);
    c.z0_ohm = r.number("z0_ohm", c.z0_ohm);
    c.a0_db = r.number("a0_db", c.a0_db);
    c.tau0_s = r.number("tau0_s", c.tau0_s);
    c.c_fixed_farad = r.number("c_fixed_farad", c.c_fixed_farad);
    r.done();
    guarded(r, [&] { c.validate(); });
    return c;
}

CancellerConfig parse_canceller(Reader r) {
    const Family fam = parse_family_at(r, "family");
    CancellerConfig out;
    auto taps_of = [&](auto&& parse_tap) {
        const auto& arr = r.array("taps");
        if (arr.empty())
            r.fail("at least one tap required", "taps");
        for (std::size_t i = 0; i < arr.size(); ++i)
            parse_tap(Reader(arr[i], r.where("taps") + "[" + std::to_string(i) + "]"));
    };
    switch (fam) {
    case Family::Pcb: {
        PcbCanceller c;
        if (r.has("constants"))
            c.constants = parse_pcb_constants(r.child("constants"));
        taps_of([&](Reader t) {
            PcbTapConfig tap;
            tap.amp_db = t.number("amp_db");
            tap.phase_rad = t.number("phase_rad");
            tap.c_f_farad = t.number("c_f_farad");
            tap.c_q_farad = t.number("c_q_farad");
            t.done();
            guarded(t, [&] { tap.validate(); });
            c.taps.push_back(tap);
        });
        out = c;
        break;
    }
    case Family::Rfic: {
        RficCanceller c;
        taps_of([&](Reader t) {
            RficTapConfig tap;
            tap.amp_db = t.number("amp_db");
            tap.phase_rad = t.number("phase_rad");
            tap.fc_hz = t.number("fc_hz");
            tap.q = t.number("q");
            t.done();
            guarded(t, [&] { tap.validate(); });
            c.taps.push_back(tap);
        });
        out = c;
        break;
    }
    case Family::DelayLine: {
        DelayLineCanceller c;
        taps_of([&](Reader t) {
            DelayLineTap tap;
            tap.amp_linear = t.number("amp_linear");
            tap.tau_s = t.number("tau_s");
            tap.phase_rad = t.number("phase_rad", 0.0);
            t.done();
            guarded(t, [&] { tap.validate(); });
            c.taps.push_back(tap);
        });
        out = c;
        break;
    }
    case Family::AmpPhase: {
        AmpPhaseCanceller c;
        c.amp_linear = r.number("amp_linear");
        c.phase_rad = r.number("phase_rad");
        if (c.amp_linear < 0.0)
            r.fail("amplitude must be >= 0", "amp_linear");
        out = c;
        break;
    }
    }
    r.done();
    return out;
}

ModelCurve parse_curve(Reader r) {
    ModelCurve c;
    c.label = r.string("label");
    if (c.label.empty() || c.label.find_first_of("/\\ ") != std::string::npos)
        r.fail("label must be non-empty without spaces or path separators", "label");
    const auto kind = r.string("kind", "canceller");
    if (kind == "canceller") {
        c.kind = ModelCurve::Kind::Canceller;
        c.canceller = parse_canceller(r.child("canceller"));
    } else if (kind == "pcb-bpf") {
        c.kind = ModelCurve::Kind::PcbBpf;
        Reader t = r.child("tap");
        c.bpf_tap.c_f_farad = t.number("c_f_farad");
        c.bpf_tap.c_q_farad = t.number("c_q_farad");
        t.done();
        guarded(t, [&] { c.bpf_tap.validate(); });
        if (r.has("constants"))
            c.constants = parse_pcb_constants(r.child("constants"));
    } else {
        r.fail("kind must be 'canceller' or 'pcb-bpf'", "kind");
    }
    r.done();
    return c;
}

template <class T, class Fn>
std::vector<T> each(Reader& r, const std::string& key, Fn&& fn) {
    std::vector<T> out;
    const auto& arr = r.array(key);
    for (std::size_t i = 0; i < arr.size(); ++i)
        out.push_back(fn(arr[i], r.where(key) + "[" + std::to_string(i) + "]"));
    return out;
}

std::string as_string(const json& v, const std::string& at) {
    if (!v.is_string())
        throw ConfigError("config: " + at + ": expected a string");
    return v.get<std::string>();
}

Family family_value(const json& v, const std::string& at) {
    try {
        return parse_family(as_string(v, at));
    } catch (const std::invalid_argument& e) {
        throw ConfigError("config: " + at + ": " + e.what());
    }
}

std::size_t param_index(const Reader& at, const ConstraintSet& cs, const std::string& name) {
    for (std::size_t i = 0; i < cs.boxes.size(); ++i)
        if (cs.boxes[i].name == name)
            return i;
    at.fail("unknown parameter '" + name + "' for family " + family_name(cs.family));
}

ConstraintSet parse_constraints(Reader r, Family fam) {
    ConstraintSet cs = ConstraintSet::defaults(fam);
    if (r.has("boxes")) {
        Reader b = r.child("boxes");
        for (const auto& [name, value] : r.raw("boxes").items()) {
            const std::size_t i = param_index(b, cs, name);
            Reader e = b.child(name);
            cs.boxes[i].min = e.number("min", cs.boxes[i].min);
            cs.boxes[i].max = e.number("max", cs.boxes[i].max);
            e.done();
        }
        b.done();
    }
    if (r.has("quantization")) {
        const auto& q = r.raw("quantization");
        if (q.is_boolean() && !q.get<bool>()) {
            cs.quantization.reset();
        } else {
            Reader qr = r.child("quantization");
            if (!cs.quantization)
                qr.fail(std::string("family ") + family_name(fam) + " has no hardware lattice to override");
            for (const auto& [name, value] : q.items()) {
                const std::size_t i = param_index(qr, cs, name);
                Reader e = qr.child(name);
                LatticeAxis& ax = cs.quantization->axes[i];
                ax.min = e.number("min", ax.min);
                ax.max = e.number("max", ax.max);
                if (e.has("step") && e.has("bits"))
                    e.fail("give either 'step' or 'bits', not both");
                if (e.has("step")) {
                    ax.step = e.number("step");
                    ax.bits = 0;
                } else if (e.has("bits")) {
                    ax.bits = static_cast<int>(e.uint("bits"));
                    ax.step = 0.0;
                }
                e.done();
            }
            qr.done();
        }
    }
    if (r.has("pcb_constants")) {
        if (fam != Family::Pcb)
            r.fail("pcb_constants only apply to the pcb family", "pcb_constants");
        cs.pcb_constants = parse_pcb_constants(r.child("pcb_constants"));
    }
    r.done();
    guarded(r, [&] { cs.validate(); });
    return cs;
}

SolverOptions parse_solver(Reader r) {
    SolverOptions s;
    s.restarts = r.uint("restarts", s.restarts);
    if (s.restarts < 1)
        r.fail("must be >= 1", "restarts");
    s.max_iterations = static_cast<int>(r.uint("max_iterations", static_cast<std::uint64_t>(s.max_iterations)));
    s.tolerance = r.number("tolerance", s.tolerance);
    if (s.tolerance < 0.0)
        r.fail("must be >= 0", "tolerance");
    const auto method = r.string("method", "damped-least-squares");
    if (method == "damped-least-squares")
        s.method = SolverOptions::Method::DampedLeastSquares;
    else if (method == "nelder-mead")
        s.method = SolverOptions::Method::NelderMead;
    else
        r.fail("must be 'damped-least-squares' or 'nelder-mead'", "method");
    r.done();
    return s;
}

ChannelConfig parse_channel(Reader r, const std::filesystem::path& base_dir) {
    ChannelConfig c;
    const auto source = r.string("source", "benchmark");
    if (source == "benchmark") {
        c.source = ChannelConfig::Source::Benchmark;
        c.seed = r.uint("seed", kBenchmarkChannelSeed);
    } else if (source == "file") {
        c.source = ChannelConfig::Source::File;
        const std::filesystem::path p = r.string("path");
        c.path = p.is_absolute() ? p : base_dir / p;
    } else if (source == "synthetic") {
        c.source = ChannelConfig::Source::Synthetic;
        c.synthetic.paths = each<MultipathComponent>(r, "paths", [](const json& v, const std::string& at) {
            Reader p(v, at);
            MultipathComponent m;
            m.amp_linear = p.number("amp_linear");
            m.tau_s = p.number("tau_s");
            m.phase_rad = p.number("phase_rad", 0.0);
            p.done();
            return m;
        });
        c.synthetic.target_isolation_db = r.number("target_isolation_db", -20.0);
        c.synthetic.grid = r.has("grid") ? parse_grid(r.child("grid")) : benchmark_grid();
        c.synthetic.rng_seed = r.uint("rng_seed", 0);
        guarded(r, [&] { c.synthetic.validate(); });
    } else {
        r.fail("must be 'benchmark', 'file' or 'synthetic'", "source");
    }
    r.done();
    return c;
}

BandSelection parse_band(Reader r) {
    BandSelection b;
    if (r.has("center_hz"))
        b.center_hz = r.number("center_hz");
    b.bandwidth_hz = r.number("bandwidth_hz", b.bandwidth_hz);
    if (b.bandwidth_hz <= 0.0)
        r.fail("must be > 0", "bandwidth_hz");
    r.done();
    return b;
}

std::size_t positive(Reader& r, const std::string& key, std::size_t def) {
    const auto v = r.uint(key, def);
    if (v < 1)
        r.fail("must be >= 1", key);
    return static_cast<std::size_t>(v);
}

ModelSection parse_model(Reader r) {
    ModelSection m;
    if (r.has("curves"))
        m.curves = each<ModelCurve>(r, "curves", [](const json& v, const std::string& at) {
            return parse_curve(Reader(v, at));
        });
    if (r.has("presets"))
        m.presets = each<std::string>(r, "presets", [](const json& v, const std::string& at) {
            auto name = as_string(v, at);
            if (name != "table2-corners")
                throw ConfigError("config: " + at + ": unknown preset '" + name + "'");
            return name;
        });
    if (r.has("grid"))
        m.grid = parse_grid(r.child("grid"));
    r.done();
    std::set<std::string> labels;
    for (const auto& c : m.curves)
        if (!labels.insert(c.label).second)
            r.fail("duplicate curve label '" + c.label + "'");
    return m;
}

OptimizeSection parse_optimize(Reader r) {
    OptimizeSection o;
    if (r.has("family"))
        o.family = parse_family_at(r, "family");
    o.taps = positive(r, "taps", o.taps);
    o.quantized = r.boolean("quantized", o.quantized);
    o.local_search_rounds = static_cast<int>(r.uint("local_search_rounds", 10));
    if (r.has("band"))
        o.band = parse_band(r.child("band"));
    const auto baseline = r.string("baseline", "none");
    if (baseline == "heur")
        o.heuristic_baseline = true;
    else if (baseline != "none")
        r.fail("must be 'none' or 'heur'", "baseline");
    r.done();
    return o;
}

SweepSection parse_sweep(Reader r) {
    SweepSection s;
    if (r.has("families"))
        s.families = each<Family>(r, "families", family_value);
    if (r.has("m_list"))
        s.m_list = each<std::size_t>(r, "m_list", [](const json& v, const std::string& at) {
            if (!v.is_number_unsigned() || v.get<std::uint64_t>() < 1)
                throw ConfigError("config: " + at + ": expected an integer >= 1");
            return static_cast<std::size_t>(v.get<std::uint64_t>());
        });
    if (r.has("b_list_mhz")) {
        s.b_list_mhz = r.numbers("b_list_mhz");
        for (double b : s.b_list_mhz)
            if (b <= 0.0)
                r.fail("bandwidths must be > 0", "b_list_mhz");
    }
    if (r.has("modes"))
        s.modes = each<SweepMode>(r, "modes", [](const json& v, const std::string& at) {
            const auto name = as_string(v, at);
            if (name == "ideal")
                return SweepMode::Ideal;
            if (name == "quantized")
                return SweepMode::Quantized;
            throw ConfigError("config: " + at + ": must be 'ideal' or 'quantized'");
        });
    if (r.has("center_hz"))
        s.center_hz = r.number("center_hz");
    s.local_search_rounds = static_cast<int>(r.uint("local_search_rounds", 10));
    r.done();
    if (s.families.empty() || s.m_list.empty() || s.b_list_mhz.empty() || s.modes.empty())
        r.fail("families, m_list, b_list_mhz and modes must be non-empty");
    return s;
}

SurfaceAxis parse_axis(Reader r) {
    SurfaceAxis a;
    a.start_db = r.number("start_db");
    a.stop_db = r.number("stop_db");
    a.points = positive(r, "points", 1);
    r.done();
    guarded(r, [&] { a.validate(); });
    return a;
}

std::vector<double> ratios_or_db(Reader& r, const std::string& key) {
    const std::string kdb = key + "_db";
    if (r.has(key) && r.has(kdb))
        r.fail("give either '" + key + "' or '" + kdb + "', not both");
    if (r.has(kdb)) {
        auto v = r.numbers(kdb);
        for (double& x : v)
            x = db_to_ratio(x);
        return v;
    }
    if (r.has(key)) {
        auto v = r.numbers(key);
        for (double x : v)
            if (x < 0.0)
                r.fail("ratios must be >= 0", key);
        return v;
    }
    return {};
}

NetworkScenario parse_scenario(Reader r, const NetworkSection& net) {
    NetworkScenario s;
    s.name = r.string("name");
    const auto kind = r.string("kind");
    if (kind == "uldl")
        s.kind = NetworkScenario::Kind::UlDl;
    else if (kind == "three-node")
        s.kind = NetworkScenario::Kind::ThreeNode;
    else if (kind == "tdma")
        s.kind = NetworkScenario::Kind::Tdma;
    else
        r.fail("must be 'uldl', 'three-node' or 'tdma'", "kind");
    GainScenario& g = s.scenario;
    g.bandwidth_hz = r.number("bandwidth_hz", net.bandwidth_hz);
    g.gamma_self = r.ratio_or_db("gamma_self", net.gamma_self);
    g.gamma_ul = r.ratio_or_db("gamma_ul", 0.0);
    g.gamma_dl = r.ratio_or_db("gamma_dl", 0.0);
    g.gamma_iui = r.ratio_or_db("gamma_iui", 0.0);
    g.snrs = ratios_or_db(r, "snrs");
    if (r.has("fd_mask")) {
        for (const auto& b : r.array("fd_mask")) {
            if (!b.is_boolean())
                r.fail("expected an array of booleans", "fd_mask");
            g.fd_mask.push_back(b.get<bool>());
        }
    } else {
        g.fd_mask.assign(g.snrs.size(), true);
    }
    r.done();
    guarded(r, [&] { g.validate(); });
    if (s.kind == NetworkScenario::Kind::ThreeNode && g.snrs.size() != 2)
        r.fail("three-node scenarios need exactly two snrs");
    if (s.kind == NetworkScenario::Kind::Tdma && g.snrs.empty())
        r.fail("tdma scenarios need at least one snr");
    if (g.fd_mask.size() != g.snrs.size())
        r.fail("fd_mask and snrs must have the same length");
    return s;
}

NetworkSection parse_network(Reader r) {
    NetworkSection n;
    n.bandwidth_hz = r.number("bandwidth_hz", n.bandwidth_hz);
    if (n.bandwidth_hz <= 0.0)
        r.fail("must be > 0", "bandwidth_hz");
    n.gamma_self = r.ratio_or_db("gamma_self", n.gamma_self);
    if (r.has("uldl")) {
        Reader u = r.child("uldl");
        if (u.has("gamma_ul") || u.has("gamma_ul_db")) {
            auto lin = ratios_or_db(u, "gamma_ul");
            if (lin.empty())
                u.fail("must be non-empty", "gamma_ul");
            n.uldl_gamma_ul_db.clear();
            for (double g : lin)
                n.uldl_gamma_ul_db.push_back(ratio_to_db(g));
        }
        if (u.has("dl_axis"))
            n.uldl_x = parse_axis(u.child("dl_axis"));
        if (u.has("iui_axis"))
            n.uldl_y = parse_axis(u.child("iui_axis"));
        u.done();
    }
    if (r.has("three_node")) {
        Reader t = r.child("three_node");
        if (t.has("user1_axis"))
            n.three_node_x = parse_axis(t.child("user1_axis"));
        if (t.has("user2_axis"))
            n.three_node_y = parse_axis(t.child("user2_axis"));
        t.done();
    }
    if (r.has("scenarios")) {
        n.default_scenarios = false;
        n.scenarios = each<NetworkScenario>(r, "scenarios", [&](const json& v, const std::string& at) {
            return parse_scenario(Reader(v, at), n);
        });
        std::set<std::string> names;
        for (const auto& s : n.scenarios)
            if (!names.insert(s.name).second)
                r.fail("duplicate scenario name '" + s.name + "'", "scenarios");
    }
    r.done();
    return n;
}

cplx parse_complex(const json& v, const std::string& at) {
    if (v.is_number())
        return {v.get<double>(), 0.0};
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
        return {v[0].get<double>(), v[1].get<double>()};
    throw ConfigError("config: " + at + ": expected a number or [re, im]");
}

DigsicSection parse_digsic(Reader r) {
    DigsicSection d;
    if (r.has("ofdm")) {
        Reader o = r.child("ofdm");
        d.ofdm.n_subcarriers = o.uint("n_subcarriers", d.ofdm.n_subcarriers);
        d.ofdm.cp_len = o.uint("cp_len", d.ofdm.cp_len);
        d.ofdm.n_active = o.uint("n_active", d.ofdm.n_active);
        d.ofdm.sample_rate_hz = o.number("sample_rate_hz", d.ofdm.sample_rate_hz);
        if (o.has("constellation")) {
            const auto name = o.string("constellation");
            d.ofdm.constellation = guarded(o, [&] { return parse_constellation(name); });
        }
        o.done();
        guarded(o, [&] { d.ofdm.validate(); });
    }
    d.n_symbols = positive(r, "n_symbols", d.n_symbols);
    if (r.has("memory")) {
        Reader m = r.child("memory");
        d.memory.max_odd_order = static_cast<int>(m.uint("max_odd_order", 7));
        d.memory.memory_depth = m.uint("memory_depth", d.memory.memory_depth);
        d.memory.lead = m.uint("lead", d.memory.lead);
        d.memory.regularization = m.number("regularization", d.memory.regularization);
        m.done();
        guarded(m, [&] { d.memory.validate(); });
    }
    if (r.has("pa_odd_coeffs")) {
        d.pa.odd_coeffs = each<cplx>(r, "pa_odd_coeffs", parse_complex);
        guarded(r, [&] { d.pa.validate(); });
    }
    d.tx_power_dbm = r.number("tx_power_dbm", d.tx_power_dbm);
    d.noise_floor_dbm = r.number("noise_floor_dbm", d.noise_floor_dbm);
    d.noise_enabled = r.boolean("noise_enabled", d.noise_enabled);
    if (r.has("family"))
        d.family = parse_family_at(r, "family");
    d.taps = positive(r, "taps", d.taps);
    d.quantized = r.boolean("quantized", d.quantized);
    if (r.has("band"))
        d.band = parse_band(r.child("band"));
    d.write_iq = r.boolean("write_iq", d.write_iq);
    r.done();
    return d;
}

} // namespace

ConstraintSet RunConfig::constraints_for(Family f) const {
    const auto it = constraints.find(f);
    return it != constraints.end() ? it->second : ConstraintSet::defaults(f);
}

RunConfig parse_run_config(const std::string& json_text, const std::filesystem::path& base_dir) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: malformed JSON: ") + e.what());
    }
    RunConfig cfg;
    Reader r(doc, "");
    cfg.seed = r.uint("seed", 0);
    if (r.has("out_dir")) {
        const std::filesystem::path p = r.string("out_dir");
        cfg.out_dir = p.is_absolute() ? p : base_dir / p;
    }
    if (r.has("channel"))
        cfg.channel = parse_channel(r.child("channel"), base_dir);
    if (r.has("solver"))
        cfg.solver = parse_solver(r.child("solver"));
    if (r.has("constraints")) {
        Reader c = r.child("constraints");
        for (const auto& [name, value] : r.raw("constraints").items()) {
            const Family f = guarded(c, [&] { return parse_family(name); });
            cfg.constraints[f] = parse_constraints(c.child(name), f);
        }
        c.done();
    }
    if (r.has("model"))
        cfg.model = parse_model(r.child("model"));
    if (r.has("optimize"))
        cfg.optimize = parse_optimize(r.child("optimize"));
    if (r.has("sweep"))
        cfg.sweep = parse_sweep(r.child("sweep"));
    if (r.has("network"))
        cfg.network = parse_network(r.child("network"));
    if (r.has("digsic"))
        cfg.digsic = parse_digsic(r.child("digsic"));
    r.done();
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open config file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str(), path.has_parent_path() ? path.parent_path() : std::filesystem::path("."));
}

ComplexResponse load_channel(const ChannelConfig& channel) {
    switch (channel.source) {
    case ChannelConfig::Source::Benchmark:
        return benchmark_channel(channel.seed);
    case ChannelConfig::Source::File:
        return load_channel_csv(channel.path);
    case ChannelConfig::Source::Synthetic:
        return synth_si_channel(channel.synthetic);
    }
    throw std::logic_error("load_channel: unknown source");
}

} // namespace fdesic
