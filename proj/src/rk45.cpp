#include "lassomc/rk45.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lassomc/error.hpp"

namespace lassomc {

namespace {

// Dormand-Prince tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
// Difference between the 5th- and embedded 4th-order weights.
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

// PI controller constants.
constexpr double safety = 0.9;
constexpr double beta = 0.04;
constexpr double expo = 0.2 - 0.75 * beta;
constexpr double min_factor = 0.2;  // step may shrink at most 5x per attempt
constexpr double max_factor = 10.0;

double rms_scaled(const Eigen::VectorXd& v, const Eigen::VectorXd& scale) {
    return std::sqrt((v.array() / scale.array()).square().mean());
}

double initial_step(const OdeRhs& rhs, double t0, const Eigen::VectorXd& y0, const Eigen::VectorXd& f0,
                    double direction_span, const Rk45Options& opts, Rk45Stats& stats) {
    const Eigen::VectorXd scale = opts.atol + opts.rtol * y0.array().abs();
    const double d0 = rms_scaled(y0, scale);
    const double d1 = rms_scaled(f0, scale);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, direction_span);
    Eigen::VectorXd y1 = y0 + h0 * f0;
    Eigen::VectorXd f1(y0.size());
    rhs(t0 + h0, y1, f1);
    ++stats.rhs_evals;
    const double d2 = rms_scaled(f1 - f0, scale) / h0;
    const double h1 = (std::max(d1, d2) <= 1e-15) ? std::max(1e-6, h0 * 1e-3)
                                                  : std::pow(0.01 / std::max(d1, d2), 1.0 / 5.0);
    return std::min({100.0 * h0, h1, opts.max_step, direction_span});
}

}  // namespace

Eigen::VectorXd rk45_integrate(const OdeRhs& rhs, const Eigen::VectorXd& y0, double t0, double t1,
                               const Rk45Options& opts, Rk45Stats* stats_out) {
    if (!(t1 > t0)) throw ParameterError("rk45: requires t1 > t0");
    if (!(opts.rtol > 0.0) || !(opts.atol > 0.0)) throw ParameterError("rk45: tolerances must be positive");

    Rk45Stats stats;
    const Eigen::Index n = y0.size();
    Eigen::VectorXd y = y0, y_new(n), tmp(n), err(n), scale(n);
    Eigen::VectorXd k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n);

    double t = t0;
    rhs(t, y, k1);
    ++stats.rhs_evals;
    double h = opts.first_step > 0.0 ? opts.first_step : initial_step(rhs, t0, y, k1, t1 - t0, opts, stats);
    double err_old = 1e-4;
    bool last_rejected = false;

    while (t < t1) {
        if (stats.accepted + stats.rejected >= opts.max_steps) {
            std::ostringstream msg;
            msg << "rk45: step budget of " << opts.max_steps << " exhausted at t=" << t;
            throw IntegrationError(msg.str(), t, h);
        }
        if (h < 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))) {
            std::ostringstream msg;
            msg << "rk45: step size underflow (h=" << h << ") at t=" << t << "; problem may be stiff";
            throw IntegrationError(msg.str(), t, h);
        }
        h = std::min(h, opts.max_step);
        bool final_step = false;
        if (t + h >= t1) {
            h = t1 - t;
            final_step = true;
        }

        tmp = y + h * (a21 * k1);
        rhs(t + c2 * h, tmp, k2);
        tmp = y + h * (a31 * k1 + a32 * k2);
        rhs(t + c3 * h, tmp, k3);
        tmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
        rhs(t + c4 * h, tmp, k4);
        tmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        rhs(t + c5 * h, tmp, k5);
        tmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        rhs(t + h, tmp, k6);
        y_new = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
        rhs(t + h, y_new, k7);
        stats.rhs_evals += 6;

        err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        scale = opts.atol + opts.rtol * y.array().abs().max(y_new.array().abs());
        const double err_norm = rms_scaled(err, scale);
        if (!std::isfinite(err_norm)) {
            h *= min_factor;
            ++stats.rejected;
            last_rejected = true;
            continue;
        }

        const double fac_err = std::pow(err_norm, expo);
        if (err_norm <= 1.0) {
            double factor = std::pow(err_old, beta) / fac_err * safety;
            factor = std::clamp(factor, min_factor, max_factor);
            if (last_rejected) factor = std::min(factor, 1.0);
            err_old = std::max(err_norm, 1e-4);
            t = final_step ? t1 : t + h;
            y.swap(y_new);
            k1.swap(k7);  // first-same-as-last
            ++stats.accepted;
            last_rejected = false;
            h *= factor;
        } else {
            h *= std::max(min_factor, safety / fac_err);
            ++stats.rejected;
            last_rejected = true;
        }
    }
    if (stats_out) *stats_out = stats;
    return y;
}

}  // namespace lassomc
