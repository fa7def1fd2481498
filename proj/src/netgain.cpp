// SPDX-License-Identifier: Apache-2.0
#include "fdesic/netgain.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace fdesic {

namespace {

void require(bool ok, const char* what) {
    if (!ok)
        throw std::invalid_argument(what);
}

bool valid_ratio(double g) { return g >= 0.0 && !std::isnan(g); }

std::optional<double> ratio(double num, double den) {
    if (!(den > 0.0))
        return std::nullopt;
    return num / den;
}

// log2(1 + a/(1 + b)), with the b → ∞ limit 0 and a → ∞ limit ∞.
double log2_sinr(double a, double b) {
    if (std::isinf(b))
        return std::isinf(a) ? std::numeric_limits<double>::infinity() : 0.0;
    return std::log2(1.0 + a / (1.0 + b));
}

} // namespace

void GainScenario::validate() const {
    require(bandwidth_hz >= 0.0 && std::isfinite(bandwidth_hz), "GainScenario: bandwidth must be >= 0");
    require(valid_ratio(gamma_ul) && valid_ratio(gamma_dl) && valid_ratio(gamma_iui) && valid_ratio(gamma_self),
            "GainScenario: SNR/INR ratios must be >= 0");
    for (double g : snrs)
        require(valid_ratio(g), "GainScenario: per-user SNRs must be >= 0");
    require(fd_mask.empty() || fd_mask.size() == snrs.size(), "GainScenario: fd_mask length must equal user count");
}

double db_to_ratio(double db) { return std::pow(10.0, db / 10.0); }

double ratio_to_db(double r) {
    if (!(r > 0.0))
        return -std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(r);
}

double shannon_rate(double bandwidth_hz, double gamma_linear) {
    require(valid_ratio(gamma_linear), "shannon_rate: SNR must be >= 0");
    require(bandwidth_hz >= 0.0, "shannon_rate: bandwidth must be >= 0");
    return bandwidth_hz * std::log2(1.0 + gamma_linear);
}

UlDlThroughput uldl_throughputs(const GainScenario& s) {
    s.validate();
    const double b = s.bandwidth_hz;
    UlDlThroughput t;
    t.r_hd = 0.5 * shannon_rate(b, s.gamma_ul) + 0.5 * shannon_rate(b, s.gamma_dl);
    t.r_fd = b * log2_sinr(s.gamma_ul, s.gamma_self) + b * log2_sinr(s.gamma_dl, s.gamma_iui);
    t.gain = ratio(t.r_fd, t.r_hd);
    return t;
}

ThreeNodeThroughput three_node_throughputs(const GainScenario& s) {
    s.validate();
    require(s.snrs.size() == 2, "three_node_throughputs: exactly two user SNRs required");
    const double b = s.bandwidth_hz, g1 = s.snrs[0], g2 = s.snrs[1];
    ThreeNodeThroughput t;
    t.r_hd = 0.5 * shannon_rate(b, g1) + 0.5 * shannon_rate(b, g2);
    t.r_user1_fd = b * log2_sinr(g1, s.gamma_self) + 0.5 * shannon_rate(b, g2);
    t.r_user2_fd = b * log2_sinr(g2, s.gamma_self) + 0.5 * shannon_rate(b, g1);
    t.r_both_fd = b * log2_sinr(g1, s.gamma_self) + b * log2_sinr(g2, s.gamma_self);
    t.gain_user1_fd = ratio(t.r_user1_fd, t.r_hd);
    t.gain_user2_fd = ratio(t.r_user2_fd, t.r_hd);
    t.gain_both_fd = ratio(t.r_both_fd, t.r_hd);
    return t;
}

std::vector<double> tdma_user_rates(const std::vector<double>& snrs, const std::vector<bool>& fd_mask,
                                    double gamma_self, double bandwidth_hz) {
    require(!snrs.empty(), "tdma_network_throughput: at least one user required");
    require(fd_mask.size() == snrs.size(), "tdma_network_throughput: fd_mask length must equal user count");
    require(valid_ratio(gamma_self), "tdma_network_throughput: gamma_self must be >= 0");
    require(bandwidth_hz >= 0.0, "tdma_network_throughput: bandwidth must be >= 0");
    const double share = bandwidth_hz / static_cast<double>(snrs.size());
    std::vector<double> r(snrs.size());
    for (std::size_t i = 0; i < snrs.size(); ++i) {
        require(valid_ratio(snrs[i]), "tdma_network_throughput: SNRs must be >= 0");
        r[i] = fd_mask[i] ? share * 2.0 * log2_sinr(snrs[i], gamma_self) : share * std::log2(1.0 + snrs[i]);
    }
    return r;
}

double tdma_network_throughput(const std::vector<double>& snrs, const std::vector<bool>& fd_mask, double gamma_self,
                               double bandwidth_hz) {
    double sum = 0.0;
    for (double r : tdma_user_rates(snrs, fd_mask, gamma_self, bandwidth_hz))
        sum += r;
    return sum;
}

double jains_fairness(const std::vector<double>& rates) {
    require(!rates.empty(), "jains_fairness: empty rate list");
    double s = 0.0, s2 = 0.0;
    for (double r : rates) {
        require(r >= 0.0 && std::isfinite(r), "jains_fairness: rates must be finite and >= 0");
        s += r;
        s2 += r * r;
    }
    require(s > 0.0, "jains_fairness: all rates are zero");
    return s * s / (static_cast<double>(rates.size()) * s2);
}

// ---------------------------------------------------------------------------

void SurfaceAxis::validate() const {
    require(std::isfinite(start_db) && std::isfinite(stop_db), "SurfaceAxis: bounds must be finite");
    require(points >= 1, "SurfaceAxis: at least one point required");
    require(points > 1 || start_db == stop_db, "SurfaceAxis: a single point needs start == stop");
}

double SurfaceAxis::value_db(std::size_t i) const {
    if (points == 1)
        return start_db;
    if (i + 1 == points)
        return stop_db;
    return start_db + (stop_db - start_db) * static_cast<double>(i) / static_cast<double>(points - 1);
}

std::vector<SurfacePoint> gain_surface(SurfaceKind kind, const SurfaceAxis& x, const SurfaceAxis& y,
                                       const GainScenario& fixed) {
    x.validate();
    y.validate();
    std::vector<SurfacePoint> out;
    out.reserve(x.points * y.points);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t iy = 0; iy < y.points; ++iy) {
        for (std::size_t ix = 0; ix < x.points; ++ix) {
            SurfacePoint p;
            p.x_db = x.value_db(ix);
            p.y_db = y.value_db(iy);
            GainScenario s = fixed;
            if (kind == SurfaceKind::UlDl) {
                s.gamma_dl = db_to_ratio(p.x_db);
                s.gamma_iui = db_to_ratio(p.y_db);
                p.gain = uldl_throughputs(s).gain.value_or(nan);
            } else {
                s.snrs = {db_to_ratio(p.x_db), db_to_ratio(p.y_db)};
                s.fd_mask.clear();
                const auto t = three_node_throughputs(s);
                p.gain = t.gain_both_fd.value_or(nan);
                const double b = s.bandwidth_hz;
                const std::vector<double> hd{0.5 * shannon_rate(b, s.snrs[0]), 0.5 * shannon_rate(b, s.snrs[1])};
                const std::vector<double> fd{b * log2_sinr(s.snrs[0], s.gamma_self),
                                             b * log2_sinr(s.snrs[1], s.gamma_self)};
                if (hd[0] + hd[1] > 0.0)
                    p.jfi_hd = jains_fairness(hd);
                if (fd[0] + fd[1] > 0.0)
                    p.jfi_fd = jains_fairness(fd);
            }
            out.push_back(p);
        }
    }
    return out;
}

} // namespace fdesic
