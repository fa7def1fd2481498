// SPDX-License-Identifier: Apache-2.0
#include "fdesic/digsic.hpp"

#include "fdesic/errors.hpp"
#include "fdesic/rng.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace fdesic {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok)
        throw std::invalid_argument(what);
}

constexpr char kIqMagic[8] = {'F', 'D', 'E', 'I', 'Q', '0', '0', '1'};

std::uint64_t to_le(std::uint64_t v) {
    if constexpr (std::endian::native == std::endian::little)
        return v;
    else
        return __builtin_bswap64(v);
}

std::vector<cplx> constellation_points(Constellation c) {
    std::vector<double> levels;
    double norm = 1.0;
    switch (c) {
    case Constellation::Bpsk: return {cplx{-1.0}, cplx{1.0}};
    case Constellation::Qpsk: levels = {-1, 1}; norm = std::sqrt(2.0); break;
    case Constellation::Qam16: levels = {-3, -1, 1, 3}; norm = std::sqrt(10.0); break;
    case Constellation::Qam64: levels = {-7, -5, -3, -1, 1, 3, 5, 7}; norm = std::sqrt(42.0); break;
    }
    std::vector<cplx> pts;
    for (double i : levels)
        for (double q : levels)
            pts.emplace_back(i / norm, q / norm);
    return pts;
}

cplx interpolate_clamped(const ComplexResponse& h, double f) {
    const auto fr = h.grid().freqs();
    if (f <= fr.front())
        return h[0];
    if (f >= fr.back())
        return h[h.size() - 1];
    const auto hi = static_cast<std::size_t>(std::upper_bound(fr.begin(), fr.end(), f) - fr.begin());
    const std::size_t lo = hi - 1;
    const double t = (f - fr[lo]) / (fr[hi] - fr[lo]);
    return h[lo] + t * (h[hi] - h[lo]);
}

} // namespace

const char* constellation_name(Constellation c) {
    switch (c) {
    case Constellation::Bpsk: return "bpsk";
    case Constellation::Qpsk: return "qpsk";
    case Constellation::Qam16: return "16qam";
    case Constellation::Qam64: return "64qam";
    }
    return "?";
}

Constellation parse_constellation(const std::string& name) {
    for (auto c : {Constellation::Bpsk, Constellation::Qpsk, Constellation::Qam16, Constellation::Qam64})
        if (name == constellation_name(c))
            return c;
    throw std::invalid_argument("unknown constellation '" + name + "'");
}

void OfdmParams::validate() const {
    require(n_subcarriers >= 2, "OfdmParams: at least two subcarriers required");
    require(cp_len < n_subcarriers, "OfdmParams: cp_len must be < n_subcarriers");
    require(n_active >= 2 && n_active % 2 == 0, "OfdmParams: n_active must be even and >= 2");
    require(n_active <= n_subcarriers - 1, "OfdmParams: n_active must be <= n_subcarriers - 1");
    require(sample_rate_hz > 0.0, "OfdmParams: sample rate must be positive");
}

std::vector<int> OfdmParams::active_bins() const {
    const int half = static_cast<int>(n_active / 2);
    std::vector<int> bins;
    for (int k = -half; k <= half; ++k)
        if (k != 0)
            bins.push_back(k);
    return bins;
}

std::vector<cplx> gen_ofdm(const OfdmParams& params, std::size_t n_symbols, std::uint64_t seed) {
    params.validate();
    require(n_symbols >= 1, "gen_ofdm: at least one symbol required");
    const std::size_t n = params.n_subcarriers;
    const auto pts = constellation_points(params.constellation);
    const auto bins = params.active_bins();
    Rng rng(seed);
    Eigen::FFT<double> fft;
    std::vector<cplx> freq(n), time(n);
    std::vector<cplx> out;
    out.reserve(n_symbols * params.symbol_len());
    const double scale = static_cast<double>(n) / std::sqrt(static_cast<double>(params.n_active));
    for (std::size_t s = 0; s < n_symbols; ++s) {
        std::fill(freq.begin(), freq.end(), cplx{0.0});
        for (int k : bins) {
            const auto pick = static_cast<std::size_t>(rng.uniform() * static_cast<double>(pts.size()));
            const std::size_t idx = k >= 0 ? static_cast<std::size_t>(k) : n - static_cast<std::size_t>(-k);
            freq[idx] = pts[std::min(pick, pts.size() - 1)];
        }
        fft.inv(time, freq);
        for (auto& v : time)
            v *= scale;
        out.insert(out.end(), time.end() - static_cast<std::ptrdiff_t>(params.cp_len), time.end());
        out.insert(out.end(), time.begin(), time.end());
    }
    double p = 0.0;
    for (const auto& v : out)
        p += std::norm(v);
    const double g = 1.0 / std::sqrt(p / static_cast<double>(out.size()));
    for (auto& v : out)
        v *= g;
    return out;
}

// ---------------------------------------------------------------------------

void MemPolySpec::validate() const {
    require(max_odd_order >= 1 && max_odd_order <= 7 && max_odd_order % 2 == 1,
            "MemPolySpec: max_odd_order must be one of 1, 3, 5, 7");
    require(memory_depth + lead >= 1, "MemPolySpec: at least one lag required");
    require(regularization >= 0.0 && std::isfinite(regularization), "MemPolySpec: regularization must be >= 0");
}

void PaModel::validate() const {
    require(!odd_coeffs.empty() && odd_coeffs.size() <= 4, "PaModel: 1 to 4 odd-order coefficients required");
    for (const auto& c : odd_coeffs)
        require(std::isfinite(c.real()) && std::isfinite(c.imag()), "PaModel: coefficients must be finite");
}

double mean_power_db(std::span<const cplx> x) {
    double p = 0.0;
    for (const auto& v : x)
        p += std::norm(v);
    if (x.empty() || !(p > 0.0))
        return -std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(p / static_cast<double>(x.size()));
}

std::vector<cplx> apply_residual_si(std::span<const cplx> tx, const ComplexResponse& h_res, const PaModel& pa,
                                    const ResidualSiParams& p) {
    pa.validate();
    require(p.sample_rate_hz > 0.0, "apply_residual_si: sample rate must be positive");
    require(p.fir_taps >= 2 && p.fir_taps % 2 == 0, "apply_residual_si: fir_taps must be even and >= 2");
    const double fc = p.center_hz.value_or(0.5 * (h_res.grid().front() + h_res.grid().back()));
    const double slack = 1e-9 * fc;
    require(h_res.grid().front() <= fc - p.signal_half_band_hz + slack &&
                h_res.grid().back() >= fc + p.signal_half_band_hz - slack,
            "apply_residual_si: h_res grid is narrower than the signal band");

    // Static PA nonlinearity.
    std::vector<cplx> x(tx.size());
    for (std::size_t n = 0; n < tx.size(); ++n) {
        const double mag2 = std::norm(tx[n]);
        cplx y{0.0};
        double w = 1.0;
        for (const auto& c : pa.odd_coeffs) {
            y += c * w;
            w *= mag2;
        }
        x[n] = tx[n] * y;
    }

    // FIR taps g[j] for lag j - L/2 from h_res sampled on L bins. Outside the
    // signal band a raised-cosine roll-off to zero at ±fs/2 stands in for the
    // receive anti-alias filter.
    const std::size_t taps = p.fir_taps, half = taps / 2;
    const double nyq = 0.5 * p.sample_rate_hz;
    const double edge = std::min(p.signal_half_band_hz, nyq);
    std::vector<cplx> hb(taps), hn(taps);
    for (std::size_t m = 0; m < taps; ++m) {
        const long sm = m < half ? static_cast<long>(m) : static_cast<long>(m) - static_cast<long>(taps);
        const double fb = static_cast<double>(sm) * p.sample_rate_hz / static_cast<double>(taps);
        double w = 1.0;
        if (std::abs(fb) > edge)
            w = nyq > edge ? 0.5 * (1.0 + std::cos(std::numbers::pi * (std::abs(fb) - edge) / (nyq - edge))) : 0.0;
        hb[m] = w * interpolate_clamped(h_res, fc + fb);
    }
    Eigen::FFT<double> fft;
    fft.inv(hn, hb);
    std::vector<cplx> g(taps);
    for (std::size_t j = 0; j < taps; ++j)
        g[j] = hn[(j + taps - half) % taps];

    // Overlap-save: causal convolution z = g * x, then y[n] = z[n + L/2].
    std::size_t nfft = 256;
    while (nfft < 4 * taps)
        nfft *= 2;
    const std::size_t hop = nfft - taps + 1;
    std::vector<cplx> gpad(nfft, cplx{0.0}), gf;
    std::copy(g.begin(), g.end(), gpad.begin());
    fft.fwd(gf, gpad);
    const std::size_t total = x.size() + half;
    std::vector<cplx> z(total, cplx{0.0});
    std::vector<cplx> block(nfft), bf, bt;
    for (std::size_t start = 0; start < total; start += hop) {
        // block covers input indices [start - (L-1), start - (L-1) + nfft)
        for (std::size_t i = 0; i < nfft; ++i) {
            const long idx = static_cast<long>(start + i) - static_cast<long>(taps - 1);
            block[i] = (idx >= 0 && idx < static_cast<long>(x.size())) ? x[static_cast<std::size_t>(idx)] : cplx{0.0};
        }
        fft.fwd(bf, block);
        for (std::size_t i = 0; i < nfft; ++i)
            bf[i] *= gf[i];
        fft.inv(bt, bf);
        for (std::size_t i = 0; i < hop && start + i < total; ++i)
            z[start + i] = bt[taps - 1 + i];
    }
    std::vector<cplx> rx(x.size());
    for (std::size_t n = 0; n < x.size(); ++n)
        rx[n] = z[n + half];

    if (p.noise_enabled) {
        Rng rng(Rng::splitmix64(p.seed ^ 0x6e6f697365ULL));
        const double sigma = std::sqrt(std::pow(10.0, p.noise_floor_db / 10.0) / 2.0);
        for (auto& v : rx) {
            const double re = rng.normal();
            const double im = rng.normal();
            v += cplx{sigma * re, sigma * im};
        }
    }
    return rx;
}

// ---------------------------------------------------------------------------

std::vector<cplx> mempoly_regressor(std::span<const cplx> tx, int order, long lag) {
    std::vector<cplx> col(tx.size(), cplx{0.0});
    const long n_total = static_cast<long>(tx.size());
    for (long n = 0; n < n_total; ++n) {
        const long src = n - lag;
        if (src < 0 || src >= n_total)
            continue;
        const cplx v = tx[static_cast<std::size_t>(src)];
        col[static_cast<std::size_t>(n)] = v * std::pow(std::abs(v), order - 1);
    }
    return col;
}

namespace {

Eigen::MatrixXcd regressors(std::span<const cplx> tx, const MemPolySpec& spec) {
    const auto rows = static_cast<Eigen::Index>(tx.size());
    Eigen::MatrixXcd phi(rows, static_cast<Eigen::Index>(spec.coefficient_count()));
    Eigen::Index col = 0;
    for (int p = 1; p <= spec.max_odd_order; p += 2) {
        for (long lag = -static_cast<long>(spec.lead); lag < static_cast<long>(spec.memory_depth); ++lag) {
            const auto c = mempoly_regressor(tx, p, lag);
            for (Eigen::Index r = 0; r < rows; ++r)
                phi(r, col) = c[static_cast<std::size_t>(r)];
            ++col;
        }
    }
    return phi;
}

} // namespace

DigitalFit fit_digital_canceller(std::span<const cplx> tx, std::span<const cplx> rx, const MemPolySpec& spec) {
    spec.validate();
    require(tx.size() == rx.size(), "fit_digital_canceller: tx and rx lengths differ");
    const std::size_t ncoef = spec.coefficient_count();
    require(tx.size() >= 10 * ncoef, "fit_digital_canceller: need at least " + std::to_string(10 * ncoef) +
                                         " samples for " + std::to_string(ncoef) + " coefficients");
    const Eigen::MatrixXcd phi = regressors(tx, spec);
    Eigen::VectorXcd y(static_cast<Eigen::Index>(rx.size()));
    for (std::size_t n = 0; n < rx.size(); ++n)
        y(static_cast<Eigen::Index>(n)) = rx[n];

    DigitalFit fit;
    Eigen::VectorXcd c;
    if (spec.regularization > 0.0) {
        Eigen::MatrixXcd gram = phi.adjoint() * phi;
        const double mean_diag = gram.diagonal().real().mean();
        gram.diagonal().array() += spec.regularization * mean_diag;
        c = gram.ldlt().solve(phi.adjoint() * y);
    } else {
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(phi);
        fit.rank_deficient = cod.rank() < phi.cols();
        c = cod.solve(y);
    }
    fit.coefficients.assign(c.data(), c.data() + c.size());
    const Eigen::VectorXcd res = y - phi * c;
    const double p_rx = y.squaredNorm();
    const double p_res = res.squaredNorm();
    const double n = static_cast<double>(rx.size());
    fit.residual_power_db = p_res > 0.0 ? 10.0 * std::log10(p_res / n) : -std::numeric_limits<double>::infinity();
    if (!(p_rx > 0.0))
        fit.digital_sic_db = 0.0;
    else if (!(p_res > 0.0))
        fit.digital_sic_db = kDigitalSicCapDb;
    else
        fit.digital_sic_db = std::min(10.0 * std::log10(p_rx / p_res), kDigitalSicCapDb);
    return fit;
}

std::vector<cplx> apply_digital_canceller(std::span<const cplx> tx, const DigitalFit& fit, const MemPolySpec& spec) {
    spec.validate();
    require(fit.coefficients.size() == spec.coefficient_count(),
            "apply_digital_canceller: coefficient count does not match the memory polynomial");
    const Eigen::MatrixXcd phi = regressors(tx, spec);
    const Eigen::Map<const Eigen::VectorXcd> c(fit.coefficients.data(),
                                               static_cast<Eigen::Index>(fit.coefficients.size()));
    const Eigen::VectorXcd y = phi * c;
    return {y.data(), y.data() + y.size()};
}

// ---------------------------------------------------------------------------

void write_iq(const std::filesystem::path& path, std::span<const cplx> samples) {
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw IoError("cannot open '" + path.string() + "' for writing");
    os.write(kIqMagic, sizeof kIqMagic);
    for (const auto& s : samples) {
        for (double v : {s.real(), s.imag()}) {
            const std::uint64_t bits = to_le(std::bit_cast<std::uint64_t>(v));
            os.write(reinterpret_cast<const char*>(&bits), sizeof bits);
        }
    }
    if (!os)
        throw IoError("write to '" + path.string() + "' failed");
}

std::vector<cplx> read_iq(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw IoError("cannot open IQ file '" + path.string() + "'");
    char magic[8] = {};
    is.read(magic, sizeof magic);
    if (is.gcount() != 8 || std::memcmp(magic, kIqMagic, 8) != 0)
        throw IoError("'" + path.string() + "' is not an FDEIQ001 file (bad magic)");
    std::vector<char> body((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    if (body.size() % 16 != 0)
        throw IoError("'" + path.string() + "': truncated sample data");
    std::vector<cplx> out(body.size() / 16);
    for (std::size_t i = 0; i < out.size(); ++i) {
        std::uint64_t re_bits, im_bits;
        std::memcpy(&re_bits, body.data() + 16 * i, 8);
        std::memcpy(&im_bits, body.data() + 16 * i + 8, 8);
        out[i] = {std::bit_cast<double>(to_le(re_bits)), std::bit_cast<double>(to_le(im_bits))};
    }
    return out;
}

} // namespace fdesic
