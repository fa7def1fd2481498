// SPDX-License-Identifier: Apache-2.0
#include "fdesic/cancopt.hpp"

#include "fdesic/errors.hpp"
#include "fdesic/rng.hpp"
#include "parallel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <tuple>

namespace fdesic {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr cplx kJ{0.0, 1.0};

void require(bool ok, const std::string& what) {
    if (!ok)
        throw std::invalid_argument(what);
}

std::size_t params_per_tap(Family f) {
    switch (f) {
    case Family::Pcb:
    case Family::Rfic: return 4;
    case Family::DelayLine: return 3;
    case Family::AmpPhase: return 2;
    }
    return 0;
}

// Amplitude parameter is in dB for the tunable-filter families, linear otherwise.
bool amp_in_db(Family f) { return f == Family::Pcb || f == Family::Rfic; }

double wrap_phase(double phi) {
    double w = std::remainder(phi, kTwoPi);
    if (w < -kPi)
        w = -kPi;
    return w;
}

double wall_seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// Evaluation kernel: per-tap contributions on a fixed grid with per-frequency
// constants precomputed. Mirrors rfmodel's formulas term by term.

class Problem {
public:
    Problem(const ConstraintSet& cs, std::size_t m_taps, const ComplexResponse& h)
        : family_(cs.family), ppt_(cs.params_per_tap()), m_(m_taps), k_(h.size()), h_(h.values().begin(),
                                                                                       h.values().end()) {
        const auto f = h.grid().freqs();
        freqs_.assign(f.begin(), f.end());
        for (std::size_t t = 0; t < m_; ++t)
            for (const auto& b : cs.boxes) {
                lo_.push_back(b.min);
                span_.push_back(b.max - b.min);
                circ_.push_back(b.circular);
            }
        if (family_ == Family::Pcb) {
            const auto& c = cs.pcb_constants;
            pcb_ = c;
            const double a0 = db_to_linear(c.a0_db);
            w_.resize(k_);
            common_.resize(k_);
            inv_wlf_.resize(k_);
            inv_wlq_.resize(k_);
            for (std::size_t k = 0; k < k_; ++k) {
                const double w = kTwoPi * freqs_[k];
                w_[k] = w;
                common_[k] = a0 * std::polar(1.0, -w * c.tau0_s);
                inv_wlf_[k] = 1.0 / (w * c.l_f_henry);
                inv_wlq_[k] = 1.0 / (w * c.l_q_henry);
            }
            s2_ = std::sin(2.0 * c.beta_l_rad);
            c2_ = std::cos(2.0 * c.beta_l_rad);
            const double cb = std::cos(c.beta_l_rad), sb = std::sin(c.beta_l_rad);
            cb2_ = cb * cb;
            sb2z2_ = sb * sb * c.z0_ohm * c.z0_ohm;
        }
    }

    std::size_t dim() const { return lo_.size(); }
    std::size_t ppt() const { return ppt_; }
    std::size_t taps() const { return m_; }
    std::size_t points() const { return k_; }
    std::span<const cplx> target() const { return h_; }

    bool circular(std::size_t i) const { return circ_[i] && span_[i] > 0.0; }

    double to_x(std::size_t i, double u) const {
        if (circular(i))
            return lo_[i] + span_[i] * (u - std::floor(u));
        return lo_[i] + span_[i] * std::clamp(u, 0.0, 1.0);
    }
    double to_u(std::size_t i, double x) const {
        if (!(span_[i] > 0.0))
            return 0.0;
        return std::clamp((x - lo_[i]) / span_[i], 0.0, 1.0);
    }
    std::vector<double> to_x(const std::vector<double>& u) const {
        std::vector<double> x(u.size());
        for (std::size_t i = 0; i < u.size(); ++i)
            x[i] = to_x(i, u[i]);
        return x;
    }
    std::vector<double> to_u(std::span<const double> x) const {
        std::vector<double> u(x.size());
        for (std::size_t i = 0; i < x.size(); ++i)
            u[i] = to_u(i, x[i]);
        return u;
    }
    void project(std::vector<double>& u) const {
        for (std::size_t i = 0; i < u.size(); ++i)
            u[i] = circular(i) ? u[i] - std::floor(u[i]) : std::clamp(u[i], 0.0, 1.0);
    }

    /// Clamp into the boxes and wrap phases (used for warm starts).
    std::vector<double> feasible(std::span<const double> x) const {
        std::vector<double> out(x.begin(), x.end());
        for (std::size_t i = 0; i < out.size(); ++i) {
            if (i % ppt_ == 1)
                out[i] = wrap_phase(out[i]);
            out[i] = std::clamp(out[i], lo_[i], lo_[i] + span_[i]);
        }
        return out;
    }

    cplx gain(const double* p) const {
        const double a = amp_in_db(family_) ? db_to_linear(p[0]) : p[0];
        return std::polar(a, -p[1]);
    }

    /// Unit-gain shape of one tap.
    void shape(const double* p, cplx* out) const {
        switch (family_) {
        case Family::Pcb: {
            const double cf = pcb_.c_fixed_farad + p[2];
            const double cq = p[3];
            const double z0 = pcb_.z0_ohm;
            for (std::size_t k = 0; k < k_; ++k) {
                const cplx yf{1.0 / pcb_.r_f_ohm, w_[k] * cf - inv_wlf_[k]};
                const cplx yq{1.0 / pcb_.r_q_ohm, w_[k] * cq - inv_wlq_[k]};
                const cplx yq2 = yq * yq;
                const cplx mc = kJ * (s2_ * z0) * yf * yq + cb2_ * yf + (2.0 * c2_) * yq + kJ * (s2_ / z0) +
                                kJ * (s2_ * z0) * yq2 - sb2z2_ * yf * yq2;
                if (!(std::abs(mc) >= 1e-30))
                    throw NumericDegeneracyError("PCB bandpass model: singular M_C at f = " +
                                                 std::to_string(freqs_[k]) + " Hz");
                out[k] = common_[k] / (pcb_.r_q_ohm * mc);
            }
            break;
        }
        case Family::Rfic: {
            const double fc = p[2], q = p[3];
            for (std::size_t k = 0; k < k_; ++k) {
                const double f = freqs_[k];
                out[k] = 1.0 / cplx{1.0, -q * (fc / f - f / fc)};
            }
            break;
        }
        case Family::DelayLine:
            for (std::size_t k = 0; k < k_; ++k)
                out[k] = std::polar(1.0, -kTwoPi * freqs_[k] * p[2]);
            break;
        case Family::AmpPhase:
            std::fill(out, out + k_, cplx{1.0});
            break;
        }
    }

    void contribution(const double* p, cplx* out) const {
        shape(p, out);
        const cplx g = gain(p);
        for (std::size_t k = 0; k < k_; ++k)
            out[k] *= g;
    }

    /// All tap contributions, tap-major (m × K).
    void contributions(const std::vector<double>& x, std::vector<cplx>& c) const {
        c.resize(m_ * k_);
        for (std::size_t t = 0; t < m_; ++t)
            contribution(&x[t * ppt_], &c[t * k_]);
    }

    double cost_of(const std::vector<cplx>& c) const {
        double s = 0.0;
        for (std::size_t k = 0; k < k_; ++k) {
            cplx r = h_[k];
            for (std::size_t t = 0; t < m_; ++t)
                r -= c[t * k_ + k];
            s += std::norm(r);
        }
        return s;
    }

    double cost(const std::vector<double>& x) const {
        std::vector<cplx> c;
        contributions(x, c);
        return cost_of(c);
    }

    /// Replace amplitude/phase of every tap by the least-squares complex gains
    /// for the current shapes, clamped to the amplitude box.
    void fit_gains(std::vector<double>& x) const {
        Eigen::MatrixXcd s(k_, m_);
        std::vector<cplx> buf(k_);
        for (std::size_t t = 0; t < m_; ++t) {
            shape(&x[t * ppt_], buf.data());
            for (std::size_t k = 0; k < k_; ++k)
                s(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(t)) = buf[k];
        }
        Eigen::VectorXcd h(k_);
        for (std::size_t k = 0; k < k_; ++k)
            h(static_cast<Eigen::Index>(k)) = h_[k];
        const Eigen::VectorXcd g = s.completeOrthogonalDecomposition().solve(h);
        for (std::size_t t = 0; t < m_; ++t) {
            const cplx gt = g(static_cast<Eigen::Index>(t));
            const double mag = std::abs(gt);
            const std::size_t ia = t * ppt_, ip = ia + 1;
            double amp = amp_in_db(family_) ? (mag > 0.0 ? 20.0 * std::log10(mag) : lo_[ia]) : mag;
            if (!std::isfinite(amp))
                amp = lo_[ia];
            x[ia] = std::clamp(amp, lo_[ia], lo_[ia] + span_[ia]);
            x[ip] = std::clamp(wrap_phase(-std::arg(gt)), lo_[ip], lo_[ip] + span_[ip]);
        }
    }

private:
    Family family_;
    std::size_t ppt_, m_, k_;
    std::vector<cplx> h_;
    std::vector<double> freqs_;
    std::vector<double> lo_, span_;
    std::vector<bool> circ_;
    PcbCircuitConstants pcb_;
    std::vector<double> w_, inv_wlf_, inv_wlq_;
    std::vector<cplx> common_;
    double s2_ = 0, c2_ = 0, cb2_ = 0, sb2z2_ = 0;
};

struct RunResult {
    std::vector<double> x;
    double cost = std::numeric_limits<double>::infinity();
    std::size_t iterations = 0;
    bool converged = false;
};

// Projected Levenberg-Marquardt on normalized coordinates, forward-difference
// Jacobian. Each accepted step strictly decreases the cost.
RunResult run_lm(const Problem& pb, std::vector<double> u, const SolverOptions& opt) {
    const std::size_t n = pb.dim(), k = pb.points(), ppt = pb.ppt();
    const auto h = pb.target();
    constexpr double kStep = 1e-7;

    std::vector<cplx> c, trial, col(k);
    auto x = pb.to_x(u);
    pb.contributions(x, c);
    double cost = pb.cost_of(c);

    Eigen::VectorXd r(2 * k);
    auto fill_residual = [&](const std::vector<cplx>& cc) {
        for (std::size_t i = 0; i < k; ++i) {
            cplx v = h[i];
            for (std::size_t t = 0; t < pb.taps(); ++t)
                v -= cc[t * k + i];
            r(static_cast<Eigen::Index>(2 * i)) = v.real();
            r(static_cast<Eigen::Index>(2 * i + 1)) = v.imag();
        }
    };

    Eigen::MatrixXd jac(2 * k, n);
    double lambda = 1e-3;
    RunResult res;
    const double floor_cost = cost * 1e-32;
    int iter = 0;
    for (; iter < opt.max_iterations; ++iter) {
        if (!(cost > floor_cost)) {
            res.converged = true;
            break;
        }
        fill_residual(c);
        // Jacobian of the model (not of the residual), column by column; only
        // the tap owning parameter j changes.
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t t = j / ppt;
            double step = kStep;
            if (!pb.circular(j) && u[j] + step > 1.0)
                step = -kStep;
            auto xp = x;
            xp[j] = pb.to_x(j, u[j] + step);
            const double dx_u = step;
            pb.contribution(&xp[t * ppt], col.data());
            for (std::size_t i = 0; i < k; ++i) {
                const cplx d = (col[i] - c[t * k + i]) / dx_u;
                jac(static_cast<Eigen::Index>(2 * i), static_cast<Eigen::Index>(j)) = d.real();
                jac(static_cast<Eigen::Index>(2 * i + 1), static_cast<Eigen::Index>(j)) = d.imag();
            }
        }
        Eigen::MatrixXd a = jac.transpose() * jac;
        Eigen::VectorXd g = jac.transpose() * r;
        // Bound-active coordinates whose descent direction points outward are
        // held fixed for this iteration.
        for (std::size_t j = 0; j < n; ++j) {
            if (pb.circular(j))
                continue;
            const auto jj = static_cast<Eigen::Index>(j);
            if ((u[j] <= 0.0 && g(jj) < 0.0) || (u[j] >= 1.0 && g(jj) > 0.0)) {
                a.row(jj).setZero();
                a.col(jj).setZero();
                a(jj, jj) = 1.0;
                g(jj) = 0.0;
            }
        }
        const double max_diag = a.diagonal().maxCoeff();
        if (!(max_diag > 0.0)) {
            res.converged = true;
            break;
        }
        bool accepted = false;
        bool stalled = false;
        while (!accepted) {
            Eigen::MatrixXd damped = a;
            for (Eigen::Index d = 0; d < damped.rows(); ++d)
                damped(d, d) += lambda * std::max(a(d, d), 1e-12 * max_diag);
            const Eigen::VectorXd delta = damped.ldlt().solve(g);
            if (!delta.allFinite()) {
                lambda *= 10.0;
            } else {
                auto un = u;
                for (std::size_t j = 0; j < n; ++j)
                    un[j] += delta(static_cast<Eigen::Index>(j));
                pb.project(un);
                const auto xn = pb.to_x(un);
                pb.contributions(xn, trial);
                const double cn = pb.cost_of(trial);
                if (cn < cost) {
                    const double rel = (cost - cn) / cost;
                    u = std::move(un);
                    x = xn;
                    c.swap(trial);
                    cost = cn;
                    lambda = std::max(lambda / 3.0, 1e-12);
                    accepted = true;
                    if (rel < opt.tolerance)
                        stalled = true;
                    break;
                }
                lambda *= 4.0;
            }
            if (lambda > 1e16) {
                stalled = true;
                break;
            }
        }
        if (stalled) {
            res.converged = true;
            ++iter;
            break;
        }
    }
    res.x = std::move(x);
    res.cost = cost;
    res.iterations = static_cast<std::size_t>(iter);
    if (iter < opt.max_iterations)
        res.converged = true;
    return res;
}

// Nelder-Mead on normalized coordinates with projection after every move.
RunResult run_nelder_mead(const Problem& pb, std::vector<double> u0, const SolverOptions& opt) {
    const std::size_t n = pb.dim();
    auto f = [&](std::vector<double>& u) {
        pb.project(u);
        return pb.cost(pb.to_x(u));
    };
    std::vector<std::vector<double>> s(n + 1, u0);
    std::vector<double> fv(n + 1);
    for (std::size_t i = 0; i < n; ++i)
        s[i + 1][i] += (u0[i] > 0.9 && !pb.circular(i)) ? -0.1 : 0.1;
    for (std::size_t i = 0; i <= n; ++i)
        fv[i] = f(s[i]);

    RunResult res;
    int iter = 0;
    std::vector<std::size_t> idx(n + 1);
    for (; iter < opt.max_iterations; ++iter) {
        for (std::size_t i = 0; i <= n; ++i)
            idx[i] = i;
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
        const std::size_t best = idx.front(), worst = idx.back(), second = idx[n - 1];
        if (fv[worst] - fv[best] <= opt.tolerance * std::abs(fv[best]) || fv[best] == 0.0) {
            res.converged = true;
            break;
        }
        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                centroid[j] += s[idx[i]][j] / static_cast<double>(n);
        auto along = [&](double coef) {
            std::vector<double> p(n);
            for (std::size_t j = 0; j < n; ++j)
                p[j] = centroid[j] + coef * (s[worst][j] - centroid[j]);
            return p;
        };
        auto xr = along(-1.0);
        const double fr = f(xr);
        if (fr < fv[best]) {
            auto xe = along(-2.0);
            const double fe = f(xe);
            if (fe < fr) {
                s[worst] = xe;
                fv[worst] = fe;
            } else {
                s[worst] = xr;
                fv[worst] = fr;
            }
        } else if (fr < fv[second]) {
            s[worst] = xr;
            fv[worst] = fr;
        } else {
            auto xc = fr < fv[worst] ? along(-0.5) : along(0.5);
            const double fc = f(xc);
            if (fc < std::min(fr, fv[worst])) {
                s[worst] = xc;
                fv[worst] = fc;
            } else {
                for (std::size_t i = 0; i <= n; ++i) {
                    if (i == best)
                        continue;
                    for (std::size_t j = 0; j < n; ++j)
                        s[i][j] = s[best][j] + 0.5 * (s[i][j] - s[best][j]);
                    fv[i] = f(s[i]);
                }
            }
        }
    }
    const auto best = static_cast<std::size_t>(std::min_element(fv.begin(), fv.end()) - fv.begin());
    res.x = pb.to_x(s[best]);
    res.cost = fv[best];
    res.iterations = static_cast<std::size_t>(iter);
    return res;
}

// Starting shapes for restart 0: sub-band placement for the filter families,
// evenly spread delays for delay lines.
std::vector<double> heuristic_start(const ConstraintSet& cs, std::size_t m, const ComplexResponse& h) {
    const std::size_t ppt = cs.params_per_tap();
    std::vector<double> x(m * ppt);
    if (cs.family == Family::Rfic) {
        return encode_params(heuristic_rfic_config(m, h, cs));
    }
    for (std::size_t t = 0; t < m; ++t) {
        const double frac = (static_cast<double>(t) + 0.5) / static_cast<double>(m);
        for (std::size_t j = 0; j < ppt; ++j) {
            const auto& b = cs.boxes[j];
            x[t * ppt + j] = 0.5 * (b.min + b.max);
        }
        if (cs.family == Family::Pcb) {
            const auto& b = cs.boxes[3];
            x[t * ppt + 3] = b.min + frac * (b.max - b.min);
        } else if (cs.family == Family::DelayLine) {
            const auto& b = cs.boxes[2];
            x[t * ppt + 2] = b.min + frac * (b.max - b.min);
        }
    }
    return x;
}

cplx interpolate(const ComplexResponse& h, double f) {
    const auto fr = h.grid().freqs();
    if (f <= fr.front())
        return h[0];
    if (f >= fr.back())
        return h[h.size() - 1];
    const auto it = std::upper_bound(fr.begin(), fr.end(), f);
    const std::size_t hi = static_cast<std::size_t>(it - fr.begin());
    const std::size_t lo = hi - 1;
    const double t = (f - fr[lo]) / (fr[hi] - fr[lo]);
    return h[lo] + t * (h[hi] - h[lo]);
}

double clamp_box(const ParamBox& b, double v) { return std::clamp(v, b.min, b.max); }

} // namespace

// ---------------------------------------------------------------------------
// Lattices and constraint sets

void LatticeAxis::validate() const {
    require(std::isfinite(min) && std::isfinite(max) && min < max, "LatticeAxis: require min < max");
    const bool has_step = step > 0.0 && std::isfinite(step);
    const bool has_bits = bits >= 1 && bits <= 30;
    require(has_step != has_bits, "LatticeAxis: exactly one of step > 0 or bits in [1, 30] required");
}

std::size_t LatticeAxis::count() const {
    if (bits > 0)
        return std::size_t{1} << bits;
    return static_cast<std::size_t>(std::floor((max - min) / step + 1e-9)) + 1;
}

double LatticeAxis::value(std::size_t index) const {
    if (bits > 0) {
        const std::size_t last = count() - 1;
        if (index >= last)
            return max;
        return min + static_cast<double>(index) * (max - min) / static_cast<double>(last);
    }
    return min + static_cast<double>(index) * step;
}

std::size_t LatticeAxis::nearest_index(double x) const {
    const double delta = bits > 0 ? (max - min) / static_cast<double>(count() - 1) : step;
    const double r = (x - min) / delta;
    if (!(r > 0.0))
        return 0;
    const double k = std::floor(r);
    std::size_t idx = static_cast<std::size_t>(k);
    // Strictly past the midpoint moves up; exact ties stay on the lower value.
    if (r - k > 0.5 + 1e-9)
        ++idx;
    return std::min(idx, count() - 1);
}

ConstraintSet ConstraintSet::defaults(Family family) {
    ConstraintSet cs;
    cs.family = family;
    const ParamBox phase{"phase_rad", -kPi, kPi, true};
    switch (family) {
    case Family::Pcb:
        cs.boxes = {{"amp_db", -15.5, 0.0, false},
                    phase,
                    {"c_f_farad", 0.6e-12, 2.4e-12, false},
                    {"c_q_farad", 2e-12, 14e-12, false}};
        cs.quantization = QuantizationSpec{{LatticeAxis::with_step(-15.5, 0.0, 0.5),
                                            LatticeAxis::with_bits(-kPi, kPi, 8),
                                            LatticeAxis::with_step(0.6e-12, 2.4e-12, 0.12e-12),
                                            LatticeAxis::with_step(2e-12, 14e-12, 0.39e-12)}};
        break;
    case Family::Rfic:
        cs.boxes = {{"amp_db", -40.0, -10.0, false}, phase, {"fc_hz", 875e6, 925e6, false}, {"q", 1.0, 50.0, false}};
        cs.quantization = QuantizationSpec{{LatticeAxis::with_step(-40.0, -10.0, 0.25),
                                            LatticeAxis::with_bits(-kPi, kPi, 8),
                                            LatticeAxis::with_bits(875e6, 925e6, 8),
                                            LatticeAxis::with_bits(1.0, 50.0, 8)}};
        break;
    case Family::DelayLine:
        cs.boxes = {{"amp_linear", 0.0, 1.0, false}, phase, {"tau_s", 0.0, 50e-9, false}};
        break;
    case Family::AmpPhase:
        cs.boxes = {{"amp_linear", 0.0, 1.0, false}, phase};
        break;
    }
    return cs;
}

void ConstraintSet::validate() const {
    const std::string fam = family_name(family);
    require(boxes.size() == ::fdesic::params_per_tap(family),
            "constraints for " + fam + ": expected " + std::to_string(::fdesic::params_per_tap(family)) +
                " parameter boxes");
    for (std::size_t j = 0; j < boxes.size(); ++j) {
        const auto& b = boxes[j];
        require(std::isfinite(b.min) && std::isfinite(b.max),
                "constraints for " + fam + ": box '" + b.name + "' must be finite");
        require(b.min <= b.max, "constraints for " + fam + ": infeasible box '" + b.name + "' (min > max)");
    }
    const auto& ph = boxes[1];
    require(ph.min >= -kPi && ph.max <= kPi, "constraints for " + fam + ": phase box must lie within [-pi, pi]");
    require(!ph.circular || (ph.min == -kPi && ph.max == kPi),
            "constraints for " + fam + ": a circular phase box must be [-pi, pi]");
    for (std::size_t j = 0; j < boxes.size(); ++j)
        require(j == 1 || !boxes[j].circular, "constraints for " + fam + ": only the phase may be circular");
    switch (family) {
    case Family::Pcb:
        require(boxes[2].min > 0.0 && boxes[3].min > 0.0, "constraints for pcb: capacitances must be positive");
        pcb_constants.validate();
        break;
    case Family::Rfic:
        require(boxes[2].min > 0.0 && boxes[3].min > 0.0, "constraints for rfic: fc and q must be positive");
        break;
    case Family::DelayLine:
        require(boxes[0].min >= 0.0 && boxes[2].min >= 0.0,
                "constraints for delay-line: amplitude and delay must be non-negative");
        break;
    case Family::AmpPhase:
        require(boxes[0].min >= 0.0, "constraints for amp-phase: amplitude must be non-negative");
        break;
    }
    if (quantization) {
        require(quantization->axes.size() == boxes.size(),
                "constraints for " + fam + ": quantization needs one axis per parameter");
        for (const auto& a : quantization->axes)
            a.validate();
    }
}

// ---------------------------------------------------------------------------
// Parameter vectors

std::vector<double> encode_params(const CancellerConfig& config) {
    struct Visitor {
        std::vector<double> operator()(const PcbCanceller& c) const {
            std::vector<double> p;
            for (const auto& t : c.taps)
                p.insert(p.end(), {t.amp_db, t.phase_rad, t.c_f_farad, t.c_q_farad});
            return p;
        }
        std::vector<double> operator()(const RficCanceller& c) const {
            std::vector<double> p;
            for (const auto& t : c.taps)
                p.insert(p.end(), {t.amp_db, t.phase_rad, t.fc_hz, t.q});
            return p;
        }
        std::vector<double> operator()(const DelayLineCanceller& c) const {
            std::vector<double> p;
            for (const auto& t : c.taps)
                p.insert(p.end(), {t.amp_linear, t.phase_rad, t.tau_s});
            return p;
        }
        std::vector<double> operator()(const AmpPhaseCanceller& c) const { return {c.amp_linear, c.phase_rad}; }
    };
    return std::visit(Visitor{}, config);
}

CancellerConfig decode_params(const ConstraintSet& constraints, std::span<const double> p) {
    const std::size_t ppt = ::fdesic::params_per_tap(constraints.family);
    require(!p.empty() && p.size() % ppt == 0,
            std::string("decode_params: parameter count must be a positive multiple of ") + std::to_string(ppt));
    const std::size_t m = p.size() / ppt;
    switch (constraints.family) {
    case Family::Pcb: {
        PcbCanceller c;
        c.constants = constraints.pcb_constants;
        for (std::size_t t = 0; t < m; ++t)
            c.taps.push_back({p[t * 4], p[t * 4 + 1], p[t * 4 + 2], p[t * 4 + 3]});
        return c;
    }
    case Family::Rfic: {
        RficCanceller c;
        for (std::size_t t = 0; t < m; ++t)
            c.taps.push_back({p[t * 4], p[t * 4 + 1], p[t * 4 + 2], p[t * 4 + 3]});
        return c;
    }
    case Family::DelayLine: {
        DelayLineCanceller c;
        for (std::size_t t = 0; t < m; ++t)
            c.taps.push_back({p[t * 3], p[t * 3 + 2], p[t * 3 + 1]});
        return c;
    }
    case Family::AmpPhase:
        require(m == 1, "decode_params: amp-phase has exactly one tap");
        return AmpPhaseCanceller{p[0], p[1]};
    }
    throw std::invalid_argument("decode_params: unknown family");
}

double objective(const ComplexResponse& h_si, const CancellerConfig& config) {
    const auto h = canceller_response(config, h_si.grid());
    double s = 0.0;
    for (std::size_t k = 0; k < h_si.size(); ++k)
        s += std::norm(h_si[k] - h[k]);
    return s;
}

namespace {

StageResult make_stage(std::string name, const CancellerConfig& config, const ComplexResponse& h_si) {
    StageResult s;
    s.name = std::move(name);
    s.config = config;
    const auto h = canceller_response(config, h_si.grid());
    s.metrics = sic_metrics(residual(h_si, h));
    double obj = 0.0;
    for (std::size_t k = 0; k < h_si.size(); ++k)
        obj += std::norm(h_si[k] - h[k]);
    s.objective_value = obj;
    return s;
}

void check_inside(const ConstraintSet& cs, std::span<const double> p, const char* who) {
    const std::size_t ppt = cs.params_per_tap();
    for (std::size_t i = 0; i < p.size(); ++i) {
        const auto& b = cs.boxes[i % ppt];
        const double eps = 1e-9 * std::max(b.max - b.min, std::abs(b.max) + std::abs(b.min));
        if (!(p[i] >= b.min - eps && p[i] <= b.max + eps))
            throw std::invalid_argument(std::string(who) + ": parameter '" + b.name + "' of tap " +
                                        std::to_string(i / ppt) + " = " + std::to_string(p[i]) +
                                        " is outside its box");
    }
}

} // namespace

// ---------------------------------------------------------------------------
// Continuous optimization

OptimizeReport optimize_config(Family family, std::size_t m_taps, const ComplexResponse& h_si,
                               const ConstraintSet& constraints, const SolverOptions& options) {
    const auto t0 = std::chrono::steady_clock::now();
    constraints.validate();
    require(constraints.family == family, "optimize_config: constraint set is for a different family");
    require(m_taps >= 1, "optimize_config: m_taps must be >= 1");
    require(options.max_iterations >= 0, "optimize_config: max_iterations must be >= 0");
    require(options.tolerance >= 0.0, "optimize_config: tolerance must be >= 0");
    // The amp-phase model has a single tap regardless of the requested M.
    const std::size_t m = family == Family::AmpPhase ? 1 : m_taps;
    const Problem pb(constraints, m, h_si);
    const std::size_t n = pb.dim();

    struct Start {
        std::vector<double> x;
        bool fit;
    };
    std::vector<Start> starts;
    if (options.restarts >= 1)
        starts.push_back({heuristic_start(constraints, m, h_si), true});
    for (const auto& w : options.warm_starts) {
        require(w.size() == n, "optimize_config: warm start has " + std::to_string(w.size()) +
                                   " parameters, expected " + std::to_string(n));
        starts.push_back({pb.feasible(w), false});
    }
    for (std::size_t r = 1; r < options.restarts; ++r) {
        Rng rng = Rng::stream(options.seed, r);
        std::vector<double> u(n);
        for (auto& v : u)
            v = rng.uniform();
        starts.push_back({pb.to_x(u), true});
    }
    require(!starts.empty(), "optimize_config: no starting points (restarts = 0 and no warm starts)");

    std::vector<RunResult> runs(starts.size());
    detail::parallel_for(starts.size(), options.jobs, [&](std::size_t i) {
        auto x = starts[i].x;
        if (starts[i].fit)
            pb.fit_gains(x);
        const auto u = pb.to_u(x);
        runs[i] = options.method == SolverOptions::Method::NelderMead ? run_nelder_mead(pb, u, options)
                                                                       : run_lm(pb, u, options);
        // A start can beat its own refinement only if the solver made no progress.
        const double c0 = pb.cost(pb.to_x(u));
        if (c0 < runs[i].cost) {
            runs[i].x = pb.to_x(u);
            runs[i].cost = c0;
        }
    });

    // Deterministic fold on the reported objective (not the solver's internal
    // cost, which can differ in the last bits): ties to the lowest start index.
    std::vector<double> reported(runs.size());
    for (std::size_t i = 0; i < runs.size(); ++i)
        reported[i] = objective(h_si, decode_params(constraints, runs[i].x));
    std::size_t best = 0;
    std::size_t iterations = 0;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        iterations += runs[i].iterations;
        if (reported[i] < reported[best])
            best = i;
    }

    OptimizeReport rep;
    rep.best_params = runs[best].x;
    rep.best_config = decode_params(constraints, rep.best_params);
    auto stage = make_stage("ideal", rep.best_config, h_si);
    rep.objective_value = stage.objective_value;
    rep.metrics = stage.metrics;
    rep.stages.push_back(std::move(stage));
    rep.restarts_used = starts.size();
    rep.iterations = iterations;
    rep.converged = runs[best].converged;
    rep.wall_time_s = wall_seconds_since(t0);
    return rep;
}

// ---------------------------------------------------------------------------
// Quantization and lattice search

CancellerConfig quantize_config(const CancellerConfig& config, const ConstraintSet& constraints) {
    constraints.validate();
    require(constraints.quantization.has_value(),
            std::string("quantize_config: no quantization spec for ") + family_name(constraints.family));
    require(family_of(config) == constraints.family, "quantize_config: constraint set is for a different family");
    auto p = encode_params(config);
    check_inside(constraints, p, "quantize_config");
    const std::size_t ppt = constraints.params_per_tap();
    for (std::size_t i = 0; i < p.size(); ++i)
        p[i] = constraints.quantization->axes[i % ppt].snap(p[i]);
    return decode_params(constraints, p);
}

OptimizeReport local_search(const CancellerConfig& config_quantized, const ComplexResponse& h_si,
                            const ConstraintSet& constraints, int max_rounds) {
    const auto t0 = std::chrono::steady_clock::now();
    constraints.validate();
    require(constraints.quantization.has_value(),
            std::string("local_search: no quantization spec for ") + family_name(constraints.family));
    require(family_of(config_quantized) == constraints.family, "local_search: constraint set is for a different family");
    const auto& axes = constraints.quantization->axes;
    const std::size_t ppt = constraints.params_per_tap();
    auto p = encode_params(config_quantized);
    std::vector<std::size_t> idx(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        const auto& ax = axes[i % ppt];
        idx[i] = ax.nearest_index(p[i]);
        const double tol = 1e-9 * (ax.max - ax.min);
        require(std::abs(ax.value(idx[i]) - p[i]) <= tol,
                "local_search: parameter '" + constraints.boxes[i % ppt].name + "' of tap " +
                    std::to_string(i / ppt) + " is not on the quantization lattice");
        p[i] = ax.value(idx[i]);
    }

    auto cost_of = [&](const std::vector<double>& q) { return objective(h_si, decode_params(constraints, q)); };
    double cost = cost_of(p);
    int rounds = 0;
    for (; rounds < max_rounds; ++rounds) {
        bool improved = false;
        for (std::size_t i = 0; i < p.size(); ++i) {
            const auto& ax = axes[i % ppt];
            const std::size_t cnt = ax.count();
            // A full-circle phase lattice has -pi and pi as the same point.
            const bool ring = constraints.boxes[i % ppt].circular && ax.min == -kPi && ax.max == kPi && cnt > 2;
            std::size_t best_i = idx[i];
            double best_c = cost;
            for (int dir : {-1, +1}) {
                std::size_t ni;
                if (dir < 0) {
                    if (idx[i] > 0)
                        ni = idx[i] - 1;
                    else if (ring)
                        ni = cnt - 2;
                    else
                        continue;
                } else {
                    if (idx[i] + 1 < cnt)
                        ni = idx[i] + 1;
                    else if (ring)
                        ni = 1;
                    else
                        continue;
                }
                const double keep = p[i];
                p[i] = ax.value(ni);
                const double c = cost_of(p);
                p[i] = keep;
                if (c < best_c) {
                    best_c = c;
                    best_i = ni;
                }
            }
            if (best_i != idx[i]) {
                idx[i] = best_i;
                p[i] = ax.value(best_i);
                cost = best_c;
                improved = true;
            }
        }
        if (!improved) {
            ++rounds;
            break;
        }
    }

    OptimizeReport rep;
    rep.best_params = p;
    rep.best_config = decode_params(constraints, p);
    auto stage = make_stage("local-search", rep.best_config, h_si);
    rep.objective_value = stage.objective_value;
    rep.metrics = stage.metrics;
    rep.stages.push_back(std::move(stage));
    rep.restarts_used = 1;
    rep.iterations = static_cast<std::size_t>(std::max(rounds, 0));
    rep.wall_time_s = wall_seconds_since(t0);
    return rep;
}

// ---------------------------------------------------------------------------

CancellerConfig heuristic_rfic_config(std::size_t m_taps, const ComplexResponse& h_si,
                                      const ConstraintSet& constraints) {
    require(m_taps >= 1, "heuristic_rfic_config: m_taps must be >= 1");
    require(constraints.family == Family::Rfic, "heuristic_rfic_config: constraint set must be for rfic");
    constraints.validate();
    const double lo = h_si.grid().front(), hi = h_si.grid().back();
    const double sub = (hi - lo) / static_cast<double>(m_taps);
    RficCanceller c;
    for (std::size_t i = 0; i < m_taps; ++i) {
        const double fc = lo + (static_cast<double>(i) + 0.5) * sub;
        const cplx h = interpolate(h_si, fc);
        RficTapConfig t;
        t.fc_hz = clamp_box(constraints.boxes[2], fc);
        t.q = clamp_box(constraints.boxes[3], sub > 0.0 ? fc / sub : constraints.boxes[3].max);
        const double mag = std::abs(h);
        t.amp_db = clamp_box(constraints.boxes[0], mag > 0.0 ? 20.0 * std::log10(mag) : constraints.boxes[0].min);
        t.phase_rad = clamp_box(constraints.boxes[1], wrap_phase(-std::arg(h)));
        c.taps.push_back(t);
    }
    return c;
}

OptimizeReport optimize_pipeline(Family family, std::size_t m_taps, const ComplexResponse& h_si,
                                 const ConstraintSet& constraints, const SolverOptions& options, bool quantized,
                                 int local_search_rounds) {
    const auto t0 = std::chrono::steady_clock::now();
    if (quantized)
        require(constraints.quantization.has_value(),
                std::string("optimize_pipeline: no quantization spec for ") + family_name(family));
    OptimizeReport rep = optimize_config(family, m_taps, h_si, constraints, options);
    if (quantized) {
        const auto rounded = quantize_config(rep.best_config, constraints);
        auto rounded_stage = make_stage("rounded", rounded, h_si);
        auto searched = local_search(rounded, h_si, constraints, local_search_rounds);
        rep.iterations += searched.iterations;
        // The lattice point is feasible for the continuous problem too: when it
        // beats the continuous result, polish from it so ideal stays the best.
        if (searched.objective_value < rep.objective_value) {
            SolverOptions polish = options;
            polish.restarts = 0;
            polish.warm_starts = {searched.best_params};
            auto again = optimize_config(family, m_taps, h_si, constraints, polish);
            rep.iterations += again.iterations;
            if (again.objective_value <= searched.objective_value) {
                rep.best_params = again.best_params;
                rep.best_config = again.best_config;
                rep.stages.front() = again.stages.front();
            } else {
                rep.best_params = searched.best_params;
                rep.best_config = searched.best_config;
                rep.stages.front() = make_stage("ideal", searched.best_config, h_si);
            }
            rep.converged = again.converged;
        }
        rep.stages.push_back(std::move(rounded_stage));
        rep.stages.push_back(searched.stages.front());
        rep.best_config = searched.best_config;
        rep.best_params = searched.best_params;
    }
    const auto& last = rep.stages.back();
    rep.objective_value = last.objective_value;
    rep.metrics = last.metrics;
    rep.wall_time_s = wall_seconds_since(t0);
    return rep;
}

CancellerConfig split_largest_tap(const CancellerConfig& config, const ConstraintSet& constraints) {
    const Family fam = family_of(config);
    require(fam != Family::AmpPhase, "split_largest_tap: amp-phase has a single tap");
    require(fam == constraints.family, "split_largest_tap: constraint set is for a different family");
    const std::size_t ppt = constraints.params_per_tap();
    auto p = encode_params(config);
    const std::size_t m = p.size() / ppt;
    auto mag = [&](std::size_t t) { return amp_in_db(fam) ? db_to_linear(p[t * ppt]) : p[t * ppt]; };
    std::size_t big = 0;
    for (std::size_t t = 1; t < m; ++t)
        if (mag(t) > mag(big))
            big = t;
    const double g = mag(big);
    const auto& ab = constraints.boxes[0];
    const double amin = amp_in_db(fam) ? db_to_linear(ab.min) : ab.min;
    const double half = std::max(g / 2.0, amin);
    // Two taps of magnitude `half` at phases phi ± theta sum to the original.
    const double theta = half > 0.0 ? std::acos(std::clamp(g / (2.0 * half), -1.0, 1.0)) : 0.0;
    const double amp = amp_in_db(fam) ? std::clamp(20.0 * std::log10(half), ab.min, ab.max) : half;
    std::vector<double> a(p.begin() + static_cast<std::ptrdiff_t>(big * ppt),
                          p.begin() + static_cast<std::ptrdiff_t>((big + 1) * ppt));
    std::vector<double> b = a;
    a[0] = amp;
    b[0] = amp;
    a[1] = wrap_phase(a[1] + theta);
    b[1] = wrap_phase(b[1] - theta);
    std::copy(a.begin(), a.end(), p.begin() + static_cast<std::ptrdiff_t>(big * ppt));
    p.insert(p.begin() + static_cast<std::ptrdiff_t>((big + 1) * ppt), b.begin(), b.end());
    return decode_params(constraints, p);
}

// ---------------------------------------------------------------------------
// Sweeps

const char* sweep_mode_name(SweepMode mode) { return mode == SweepMode::Ideal ? "ideal" : "quantized"; }

bool sweep_row_less(const SweepRow& a, const SweepRow& b) {
    return std::make_tuple(static_cast<int>(a.family), a.b_mhz, a.m, static_cast<int>(a.mode)) <
           std::make_tuple(static_cast<int>(b.family), b.b_mhz, b.m, static_cast<int>(b.mode));
}

std::vector<SweepRow> sweep(const SweepRequest& request, const ComplexResponse& h_si,
                            const std::vector<SweepRow>& completed, unsigned jobs, const SweepCellCallback& on_cell) {
    require(!request.families.empty() && !request.m_list.empty() && !request.b_list_mhz.empty() &&
                !request.modes.empty(),
            "sweep: families, m_list, b_list_mhz and modes must be non-empty");
    for (auto m : request.m_list)
        require(m >= 1, "sweep: every M must be >= 1");
    for (auto b : request.b_list_mhz)
        require(b > 0.0 && std::isfinite(b), "sweep: every B must be positive");
    const double center = request.center_hz.value_or(0.5 * (h_si.grid().front() + h_si.grid().back()));
    const double bmax = *std::max_element(request.b_list_mhz.begin(), request.b_list_mhz.end()) * 1e6;
    const double slack = 1e-9 * center;
    require(h_si.grid().front() <= center - bmax / 2 + slack && h_si.grid().back() >= center + bmax / 2 - slack,
            "sweep: channel grid does not cover the widest requested band");
    const bool want_ideal =
        std::find(request.modes.begin(), request.modes.end(), SweepMode::Ideal) != request.modes.end();
    const bool want_quant =
        std::find(request.modes.begin(), request.modes.end(), SweepMode::Quantized) != request.modes.end();

    auto constraints_for = [&](Family f) {
        for (const auto& c : request.constraints)
            if (c.family == f)
                return c;
        return ConstraintSet::defaults(f);
    };

    std::vector<std::size_t> ms = request.m_list;
    std::sort(ms.begin(), ms.end());
    ms.erase(std::unique(ms.begin(), ms.end()), ms.end());

    using Key = std::tuple<int, double, std::size_t, int>;
    std::map<Key, SweepRow> done;
    for (const auto& r : completed)
        done[{static_cast<int>(r.family), r.b_mhz, r.m, static_cast<int>(r.mode)}] = r;

    struct Chain {
        Family family;
        double b_mhz;
    };
    std::vector<Chain> chains;
    for (auto f : request.families)
        for (auto b : request.b_list_mhz)
            chains.push_back({f, b});

    std::vector<std::vector<SweepRow>> out(chains.size());
    std::mutex cb_mutex;
    detail::parallel_for(chains.size(), jobs, [&](std::size_t ci) {
        const auto [fam, b_mhz] = chains[ci];
        const auto cs = constraints_for(fam);
        const bool quant = want_quant && cs.quantization.has_value();
        const auto h = h_si.restricted(center - b_mhz * 0.5e6, center + b_mhz * 0.5e6);
        std::optional<CancellerConfig> prev;
        std::optional<std::vector<SweepRow>> prev_rows;
        for (std::size_t m : ms) {
            const Key ki{static_cast<int>(fam), b_mhz, m, static_cast<int>(SweepMode::Ideal)};
            const Key kq{static_cast<int>(fam), b_mhz, m, static_cast<int>(SweepMode::Quantized)};
            std::vector<SweepRow> rows;
            const bool have_i = !want_ideal || done.count(ki);
            const bool have_q = !quant || done.count(kq);
            if (have_i && have_q) {
                if (want_ideal)
                    rows.push_back(done.at(ki));
                if (quant)
                    rows.push_back(done.at(kq));
                if (want_ideal)
                    prev = decode_params(cs, done.at(ki).params);
                out[ci].insert(out[ci].end(), rows.begin(), rows.end());
                continue;
            }
            if (fam == Family::AmpPhase && prev_rows) {
                // The single-tap model does not depend on M.
                for (auto r : *prev_rows) {
                    r.m = m;
                    rows.push_back(r);
                }
            } else {
                SolverOptions opt = request.solver;
                opt.jobs = 1;
                if (prev && fam != Family::AmpPhase)
                    opt.warm_starts.push_back(encode_params(split_largest_tap(*prev, cs)));
                const auto rep = optimize_pipeline(fam, m, h, cs, opt, quant, request.local_search_rounds);
                const auto& ideal = rep.stages.front();
                prev = ideal.config;
                auto row = [&](SweepMode mode, const StageResult& st) {
                    SweepRow r;
                    r.family = fam;
                    r.m = m;
                    r.b_mhz = b_mhz;
                    r.mode = mode;
                    r.mean_sic_db = st.metrics.mean_rf_sic_db;
                    r.worst_sic_db = st.metrics.worst_rf_sic_db;
                    r.objective_value = st.objective_value;
                    r.params = encode_params(st.config);
                    return r;
                };
                if (want_ideal)
                    rows.push_back(row(SweepMode::Ideal, ideal));
                if (quant)
                    rows.push_back(row(SweepMode::Quantized, rep.stages.back()));
                prev_rows = rows;
            }
            out[ci].insert(out[ci].end(), rows.begin(), rows.end());
            if (on_cell) {
                std::lock_guard<std::mutex> lock(cb_mutex);
                on_cell(rows);
            }
        }
    });

    std::vector<SweepRow> rows;
    for (auto& v : out)
        rows.insert(rows.end(), v.begin(), v.end());
    std::sort(rows.begin(), rows.end(), sweep_row_less);
    // Flag ideal-mode M-monotonicity violations (tolerance covers rounding only).
    for (std::size_t i = 0; i < rows.size(); ++i) {
        auto& r = rows[i];
        r.m_monotone_violation = false;
        if (r.mode != SweepMode::Ideal)
            continue;
        for (std::size_t j = 0; j < i; ++j) {
            const auto& q = rows[j];
            if (q.mode == SweepMode::Ideal && q.family == r.family && q.b_mhz == r.b_mhz && q.m < r.m &&
                r.mean_sic_db < q.mean_sic_db - 1e-9)
                r.m_monotone_violation = true;
        }
    }
    return rows;
}

} // namespace fdesic
