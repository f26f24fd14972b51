// Copyright 2026 The timebin Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "timebin/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <unsupported/Eigen/LevenbergMarquardt>

#include "timebin/errors.hpp"

namespace timebin {

namespace {

constexpr double kPi = std::numbers::pi;

struct RabiData {
    std::vector<double> t, y, sigma;
};

double rabi_shape(double omega, double rate, double t) { return 0.5 * (1.0 - std::cos(omega * t) * std::exp(-rate * t)); }

// Weighted residuals r_i = (model - y_i) / sigma_i for x = (omega, rate, amplitude, offset).
struct RabiFunctor : Eigen::DenseFunctor<double> {
    const RabiData* data;
    explicit RabiFunctor(const RabiData& d) : Eigen::DenseFunctor<double>(4, int(d.t.size())), data(&d) {}

    int operator()(const InputType& x, ValueType& f) const {
        for (std::size_t i = 0; i < data->t.size(); ++i) {
            const double m = x(3) + x(2) * rabi_shape(x(0), x(1), data->t[i]);
            f(Eigen::Index(i)) = (m - data->y[i]) / data->sigma[i];
        }
        return 0;
    }

    int df(const InputType& x, JacobianType& j) const {
        for (std::size_t i = 0; i < data->t.size(); ++i) {
            const double t = data->t[i];
            const double e = std::exp(-x(1) * t);
            const double c = std::cos(x(0) * t), s = std::sin(x(0) * t);
            const double w = 1.0 / data->sigma[i];
            const auto r = Eigen::Index(i);
            j(r, 0) = w * x(2) * 0.5 * t * s * e;
            j(r, 1) = w * x(2) * 0.5 * t * c * e;
            j(r, 2) = w * rabi_shape(x(0), x(1), t);
            j(r, 3) = w;
        }
        return 0;
    }
};

// Weighted linear solve for (offset, amplitude) at fixed (omega, rate); returns chi^2.
double rabi_linear(const RabiData& d, double omega, double rate, double& amplitude, double& offset) {
    double s00 = 0, s01 = 0, s11 = 0, b0 = 0, b1 = 0;
    for (std::size_t i = 0; i < d.t.size(); ++i) {
        const double w = 1.0 / (d.sigma[i] * d.sigma[i]);
        const double g = rabi_shape(omega, rate, d.t[i]);
        s00 += w;
        s01 += w * g;
        s11 += w * g * g;
        b0 += w * d.y[i];
        b1 += w * g * d.y[i];
    }
    const double det = s00 * s11 - s01 * s01;
    if (std::abs(det) < 1e-300) return std::numeric_limits<double>::infinity();
    offset = (s11 * b0 - s01 * b1) / det;
    amplitude = (s00 * b1 - s01 * b0) / det;
    double chi2 = 0;
    for (std::size_t i = 0; i < d.t.size(); ++i) {
        const double r = (offset + amplitude * rabi_shape(omega, rate, d.t[i]) - d.y[i]) / d.sigma[i];
        chi2 += r * r;
    }
    return chi2;
}

}  // namespace

double RabiFit::model(double t) const { return offset + amplitude * rabi_shape(omega, decay_rate, t); }

RabiFit fit_rabi(std::span<const RabiSample> series, std::uint64_t shots_per_point) {
    if (series.size() < 8) throw FitError("fit_rabi needs at least 8 points, got " + std::to_string(series.size()));
    if (shots_per_point == 0) throw FitError("fit_rabi needs shots_per_point >= 1");

    RabiData d;
    const double n = double(shots_per_point);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& s : series) {
        d.t.push_back(s.duration_ns);
        d.y.push_back(s.excitation);
        d.sigma.push_back(std::sqrt(std::max(s.excitation * (1.0 - s.excitation), 1.0 / n) / n));
        lo = std::min(lo, s.excitation);
        hi = std::max(hi, s.excitation);
    }
    if (hi - lo < 1e-12) throw FitError("fit_rabi: constant series, no oscillation to fit");

    std::vector<double> ts = d.t;
    std::sort(ts.begin(), ts.end());
    const double span = ts.back() - ts.front();
    double min_dt = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < ts.size(); ++i) {
        if (ts[i] > ts[i - 1]) min_dt = std::min(min_dt, ts[i] - ts[i - 1]);
    }
    if (!(span > 0) || !std::isfinite(min_dt)) throw FitError("fit_rabi: durations do not span an interval");

    // Coarse grid: frequencies from half a period over the span up to Nyquist.
    const double w_lo = kPi / span, w_hi = kPi / min_dt;
    const int n_omega = 800;
    const double rates[] = {0.0, 0.25 / span, 0.5 / span, 1.0 / span, 2.0 / span, 4.0 / span};
    double best = std::numeric_limits<double>::infinity();
    Eigen::Vector4d x;
    for (int k = 0; k < n_omega; ++k) {
        const double w = w_lo + (w_hi - w_lo) * k / (n_omega - 1);
        for (double rate : rates) {
            double a = 0, off = 0;
            const double chi2 = rabi_linear(d, w, rate, a, off);
            if (chi2 < best) {
                best = chi2;
                x << w, rate, a, off;
            }
        }
    }
    if (!std::isfinite(best)) throw FitError("fit_rabi: grid search found no finite solution");

    RabiFunctor functor(d);
    Eigen::LevenbergMarquardt<RabiFunctor> lm(functor);
    lm.setMaxfev(2000);
    Eigen::VectorXd xv = x;
    const auto status = lm.minimize(xv);
    if (status == Eigen::LevenbergMarquardtSpace::ImproperInputParameters ||
        status == Eigen::LevenbergMarquardtSpace::TooManyFunctionEvaluation || !xv.allFinite()) {
        std::ostringstream msg;
        msg << "fit_rabi: refinement did not converge (status " << int(status) << ", grid omega " << x(0) << ")";
        throw FitError(msg.str());
    }
    Eigen::VectorXd f(d.t.size());
    functor(xv, f);
    double chi2 = f.squaredNorm();
    if (chi2 > best * (1 + 1e-9) + 1e-12) {
        // Refinement wandered off; keep the grid solution.
        xv = x;
        functor(xv, f);
        chi2 = f.squaredNorm();
    }
    if (xv(0) < 0) xv(0) = -xv(0);

    Eigen::MatrixXd j(d.t.size(), 4);
    functor.df(xv, j);
    const Eigen::Matrix4d jtj = j.transpose() * j;
    Eigen::Matrix4d cov = Eigen::Matrix4d::Constant(std::numeric_limits<double>::quiet_NaN());
    Eigen::FullPivLU<Eigen::Matrix4d> lu(jtj);
    if (lu.isInvertible()) cov = lu.inverse();

    RabiFit out;
    out.omega = xv(0);
    out.decay_rate = xv(1);
    out.decay_time = xv(1) > 0 ? 1.0 / xv(1) : std::numeric_limits<double>::infinity();
    out.amplitude = xv(2);
    out.offset = xv(3);
    out.omega_error = std::sqrt(std::max(0.0, cov(0, 0)));
    out.pi_time = kPi / out.omega;
    out.pi_time_error = kPi * out.omega_error / (out.omega * out.omega);
    out.chi2 = chi2;
    double rn = 0;
    for (std::size_t i = 0; i < d.t.size(); ++i) {
        const double r = out.model(d.t[i]) - d.y[i];
        rn += r * r;
    }
    out.residual_norm = std::sqrt(rn);
    if (!(out.pi_time > 0) || !std::isfinite(out.pi_time)) throw FitError("fit_rabi: non-positive pi time");
    return out;
}

namespace {

struct HarmonicFit {
    Eigen::Vector3d coef;  // a + b cos + c sin
    Eigen::Matrix3d cov;
};

// Weighted linear least squares with Poisson variances, two passes: the first
// weights by the data, the second by the first-pass model.
HarmonicFit fit_harmonic(const std::vector<double>& phase, const std::vector<double>& y) {
    const auto n = Eigen::Index(phase.size());
    Eigen::MatrixXd x(n, 3);
    Eigen::VectorXd yy(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        x(i, 0) = 1.0;
        x(i, 1) = std::cos(phase[std::size_t(i)]);
        x(i, 2) = std::sin(phase[std::size_t(i)]);
        yy(i) = y[std::size_t(i)];
    }
    Eigen::VectorXd var = yy.cwiseMax(1.0);
    HarmonicFit out;
    for (int pass = 0; pass < 2; ++pass) {
        const Eigen::VectorXd w = var.cwiseInverse();
        const Eigen::Matrix3d xtwx = x.transpose() * w.asDiagonal() * x;
        const Eigen::Vector3d xtwy = x.transpose() * w.asDiagonal() * yy;
        Eigen::FullPivLU<Eigen::Matrix3d> lu(xtwx);
        if (!lu.isInvertible()) throw FitError("fit_fringe: phases do not determine a harmonic");
        out.coef = lu.solve(xtwy);
        out.cov = lu.inverse();
        var = (x * out.coef).cwiseMax(1.0);
    }
    return out;
}

struct Visibility {
    double v, err, phase, phase_err;
};

// V = sign * sqrt(b^2 + c^2) / a with delta-method errors.
Visibility visibility_of(const HarmonicFit& h, double sign) {
    const double a = h.coef(0), b = sign * h.coef(1), c = sign * h.coef(2);
    if (!(a > 0)) throw FitError("fit_fringe: non-positive mean level");
    const double r = std::hypot(b, c);
    const double v = r / a;
    Eigen::Vector3d g;
    double phase_err = kPi;
    if (r > 1e-12 * a) {
        g << -v / a, sign * b / (a * r), sign * c / (a * r);
        Eigen::Vector3d gp(0.0, -sign * c / (r * r), sign * b / (r * r));
        phase_err = std::sqrt(std::max(0.0, double(gp.transpose() * h.cov * gp)));
    } else {
        g << 0.0, 0.0, 0.0;
    }
    double var = g.transpose() * h.cov * g;
    if (r <= 1e-12 * a) var = 0.5 * (h.cov(1, 1) + h.cov(2, 2)) / (a * a);
    return {v, std::sqrt(std::max(0.0, var)), std::atan2(c, b), phase_err};
}

}  // namespace

FringeFit fit_fringe(std::span<const FringeSample> series) {
    if (series.size() < 5) throw FitError("fit_fringe needs at least 5 phase points, got " + std::to_string(series.size()));
    std::vector<double> phase, plus, minus;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo, total = 0;
    for (const auto& s : series) {
        phase.push_back(s.phase);
        plus.push_back(s.counts_plus);
        minus.push_back(s.counts_minus);
        lo = std::min(lo, s.phase);
        hi = std::max(hi, s.phase);
        total += s.counts_plus + s.counts_minus;
    }
    const double n = double(series.size());
    // Evenly spaced points covering a full turn have span 2pi (n - 1) / n.
    if (hi - lo < 2 * kPi * (n - 1) / n - 1e-9) throw FitError("fit_fringe: phases must cover a full 2pi turn");
    if (!(total > 0)) throw FitError("fit_fringe: series has no counts");

    const HarmonicFit hp = fit_harmonic(phase, plus);
    const HarmonicFit hm = fit_harmonic(phase, minus);
    const Visibility vp = visibility_of(hp, 1.0);
    const Visibility vm = visibility_of(hm, -1.0);

    FringeFit out;
    out.raw_visibility = vp.v;
    out.visibility = std::clamp(vp.v, 0.0, 1.0);
    out.visibility_error = vp.err;
    out.phase_offset = vp.phase;
    out.mean_level = hp.coef(0);
    out.minus_visibility = std::clamp(vm.v, 0.0, 1.0);
    out.minus_visibility_error = vm.err;
    out.minus_phase_offset = vm.phase;
    const double dv = std::abs(vp.v - vm.v);
    double dphi = std::abs(std::remainder(vp.phase - vm.phase, 2 * kPi));
    out.ports_consistent = dv <= 3 * std::hypot(vp.err, vm.err) + 1e-9 &&
                           (vp.v < 3 * vp.err || dphi <= 3 * std::hypot(vp.phase_err, vm.phase_err) + 1e-9);
    return out;
}

double fidelity_bound(double v1, double v2) {
    if (!(v1 >= 0.0 && v1 <= 1.0) || !(v2 >= 0.0 && v2 <= 1.0)) {
        throw std::invalid_argument("fidelity_bound: visibilities must be in [0, 1]");
    }
    return (1.0 + v1 + 2.0 * v2) / 4.0;
}

Estimate fidelity_bound(Estimate v1, Estimate v2) {
    return {fidelity_bound(v1.value, v2.value), std::sqrt(v1.error * v1.error + 4.0 * v2.error * v2.error) / 4.0};
}

Correlation correlation_E(const SettingsCounts& counts) {
    Correlation c;
    c.parallel = counts(Outcome::Plus, Outcome::Plus) + counts(Outcome::Minus, Outcome::Minus);
    c.cross = counts(Outcome::Plus, Outcome::Minus) + counts(Outcome::Minus, Outcome::Plus);
    const double total = double(c.parallel + c.cross);
    if (total == 0) throw FitError("correlation_E: no coincidences");
    c.value = (double(c.parallel) - double(c.cross)) / total;
    c.error = std::sqrt(std::max(0.0, 1.0 - c.value * c.value) / total);
    return c;
}

BellResult chsh_S(std::span<const Correlation> E) {
    if (E.size() != 4) throw std::invalid_argument("chsh_S needs four correlations, got " + std::to_string(E.size()));
    BellResult r;
    std::copy(E.begin(), E.end(), r.E.begin());
    r.S = std::abs(E[0].value + E[1].value + E[2].value - E[3].value);
    double var = 0;
    for (const auto& e : E) var += e.error * e.error;
    r.sigma_S = std::sqrt(var);
    r.violation_sigmas = r.sigma_S > 0 ? (r.S - 2.0) / r.sigma_S : 0.0;
    return r;
}

BellResult chsh_from_table(const CountsTable& table, double alpha, double alpha_star, double beta, double beta_star) {
    auto find = [&](double a, double b) -> const SettingsCounts& {
        for (const auto& e : table.entries) {
            if (std::abs(e.setting1.theta - a) < 1e-9 && std::abs(e.setting2.theta - b) < 1e-9) return e;
        }
        std::ostringstream msg;
        msg << "chsh: settings (" << a * 180 / kPi << " deg, " << b * 180 / kPi << " deg) missing from counts";
        throw std::invalid_argument(msg.str());
    };
    const std::array<Correlation, 4> e = {correlation_E(find(alpha, beta)), correlation_E(find(alpha_star, beta)),
                                          correlation_E(find(alpha, beta_star)), correlation_E(find(alpha_star, beta_star))};
    return chsh_S(e);
}

Estimate pooled_visibility(std::span<const SettingsCounts> counts, int port_parity) {
    std::uint64_t par = 0, cross = 0;
    for (const auto& c : counts) {
        par += c(Outcome::Plus, Outcome::Plus) + c(Outcome::Minus, Outcome::Minus);
        cross += c(Outcome::Plus, Outcome::Minus) + c(Outcome::Minus, Outcome::Plus);
    }
    const double total = double(par + cross);
    if (total == 0) throw FitError("visibility: no coincidences");
    const double v = port_parity * (double(par) - double(cross)) / total;
    return {v, std::sqrt(std::max(0.0, 1.0 - v * v) / total)};
}

Estimate flat_line_visibility(std::span<const SettingsCounts> counts, int port_parity) {
    double sw = 0, swv = 0;
    for (const auto& c : counts) {
        const auto n = c.coincidences();
        if (n == 0) continue;
        const Correlation e = correlation_E(c);
        const double v = port_parity * e.value;
        const double var = std::max(1.0 - v * v, 1.0 / double(n)) / double(n);
        sw += 1.0 / var;
        swv += v / var;
    }
    if (sw == 0) throw FitError("visibility: no coincidences");
    return {swv / sw, std::sqrt(1.0 / sw)};
}

FringeSample coincidence_fringe_sample(double phase, const SettingsCounts& c, int port_parity) {
    const double par = double(c(Outcome::Plus, Outcome::Plus) + c(Outcome::Minus, Outcome::Minus));
    const double cross = double(c(Outcome::Plus, Outcome::Minus) + c(Outcome::Minus, Outcome::Plus));
    return port_parity > 0 ? FringeSample{phase, par, cross} : FringeSample{phase, cross, par};
}

}  // namespace timebin
