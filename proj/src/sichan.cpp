// SPDX-License-Identifier: Apache-2.0
#include "fdesic/sichan.hpp"

#include "fdesic/errors.hpp"
#include "fdesic/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>

namespace fdesic {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

void SiChannelSpec::validate() const {
    if (paths.empty())
        throw std::invalid_argument("SiChannelSpec: at least one path required");
    if (!(target_isolation_db < 0.0))
        throw std::invalid_argument("SiChannelSpec: target isolation must be negative (dB)");
    for (const auto& p : paths)
        if (!(p.amp_linear >= 0.0) || !(p.tau_s >= 0.0) || !std::isfinite(p.phase_rad))
            throw std::invalid_argument("SiChannelSpec: path amplitude and delay must be non-negative");
}

FrequencyGrid benchmark_grid() { return FrequencyGrid::linspace(860e6, 940e6, 257); }

ComplexResponse synth_si_channel(const SiChannelSpec& spec) {
    spec.validate();
    const auto f = spec.grid.freqs();
    std::vector<cplx> h(f.size(), cplx{0.0});
    for (const auto& p : spec.paths)
        for (std::size_t k = 0; k < f.size(); ++k)
            h[k] += std::polar(p.amp_linear, -(kTwoPi * f[k] * p.tau_s + p.phase_rad));
    double power = 0.0;
    for (const auto& v : h)
        power += std::norm(v);
    power /= static_cast<double>(h.size());
    if (!(power > 0.0))
        throw std::invalid_argument("synth_si_channel: all path amplitudes are zero on the grid");
    const double scale = std::pow(10.0, spec.target_isolation_db / 20.0) / std::sqrt(power);
    for (auto& v : h)
        v *= scale;
    return ComplexResponse(spec.grid, std::move(h));
}

SiChannelSpec benchmark_channel_spec(std::uint64_t seed, const FrequencyGrid& grid, double target_isolation_db) {
    Rng rng(seed);
    SiChannelSpec spec;
    spec.grid = grid;
    spec.rng_seed = seed;
    spec.target_isolation_db = target_isolation_db;
    for (int p = 0; p < kBenchmarkPaths; ++p) {
        MultipathComponent c;
        c.amp_linear = std::pow(10.0, -rng.uniform(0.0, kBenchmarkAmpSpreadDb) / 20.0);
        c.tau_s = rng.uniform(0.0, kBenchmarkMaxDelayS);
        c.phase_rad = rng.uniform(-std::numbers::pi, std::numbers::pi);
        spec.paths.push_back(c);
    }
    return spec;
}

ComplexResponse benchmark_channel(std::uint64_t seed) { return synth_si_channel(benchmark_channel_spec(seed)); }

ComplexResponse residual(const ComplexResponse& h_si, const ComplexResponse& h_canc) {
    if (!(h_si.grid() == h_canc.grid()))
        throw std::invalid_argument("residual: responses are sampled on different grids");
    std::vector<cplx> v(h_si.size());
    for (std::size_t k = 0; k < v.size(); ++k)
        v[k] = h_si[k] - h_canc[k];
    return ComplexResponse(h_si.grid(), std::move(v));
}

SicMetrics sic_metrics(const ComplexResponse& h_res) {
    SicMetrics m;
    const std::size_t n = h_res.size();
    m.isolation_db_per_freq.resize(n);
    double power = 0.0;
    double worst = kIsolationFloorDb;
    double db_sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double p = std::norm(h_res[k]);
        power += p;
        const double iso = p > 0.0 ? std::max(10.0 * std::log10(p), kIsolationFloorDb) : kIsolationFloorDb;
        m.isolation_db_per_freq[k] = iso;
        worst = std::max(worst, iso);
        db_sum += iso;
    }
    power /= static_cast<double>(n);
    const double mean_iso = power > 0.0 ? std::max(10.0 * std::log10(power), kIsolationFloorDb) : kIsolationFloorDb;
    m.mean_rf_sic_db = -mean_iso;
    m.worst_rf_sic_db = -worst;
    m.mean_rf_sic_db_dbavg = -db_sum / static_cast<double>(n);
    return m;
}

double magnitude_variation_db(const ComplexResponse& h) {
    double lo = std::abs(h[0]), hi = lo;
    for (const auto& v : h.values()) {
        lo = std::min(lo, std::abs(v));
        hi = std::max(hi, std::abs(v));
    }
    return 20.0 * std::log10(hi / lo);
}

// ---------------------------------------------------------------------------

void store_channel_csv(const ComplexResponse& response, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw IoError("cannot open '" + path.string() + "' for writing");
    os << "freq_hz,re,im\n";
    char buf[128];
    for (std::size_t k = 0; k < response.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", response.grid()[k], response[k].real(),
                      response[k].imag());
        os << buf;
    }
    if (!os)
        throw IoError("write to '" + path.string() + "' failed");
}

namespace {

double parse_field(std::string_view s, std::size_t line) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
        throw ParseError("malformed number '" + std::string(s) + "'", line);
    return v;
}

} // namespace

ComplexResponse load_channel_csv(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw IoError("cannot open channel file '" + path.string() + "'");
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(is, line))
        throw ParseError("empty file, expected header 'freq_hz,re,im'", 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    if (line != "freq_hz,re,im")
        throw ParseError("expected header 'freq_hz,re,im'", line_no);

    std::vector<double> freqs;
    std::vector<cplx> values;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        std::string_view sv(line);
        const auto c1 = sv.find(',');
        const auto c2 = c1 == std::string_view::npos ? c1 : sv.find(',', c1 + 1);
        if (c2 == std::string_view::npos || sv.find(',', c2 + 1) != std::string_view::npos)
            throw ParseError("expected 3 comma-separated fields", line_no);
        const double f = parse_field(sv.substr(0, c1), line_no);
        const double re = parse_field(sv.substr(c1 + 1, c2 - c1 - 1), line_no);
        const double im = parse_field(sv.substr(c2 + 1), line_no);
        if (!(f > 0.0))
            throw ParseError("frequency must be positive", line_no);
        if (!freqs.empty() && !(f > freqs.back()))
            throw ParseError("frequencies must be strictly increasing", line_no);
        freqs.push_back(f);
        values.emplace_back(re, im);
    }
    if (freqs.empty())
        throw ParseError("no data rows", line_no);
    return ComplexResponse(FrequencyGrid(std::move(freqs)), std::move(values));
}

} // namespace fdesic
