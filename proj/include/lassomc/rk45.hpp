#pragma once

#include <cstddef>
#include <functional>
#include <limits>

#include <Eigen/Dense>

namespace lassomc {

/// dy/dt = rhs(t, y), written into dydt (already sized like y).
using OdeRhs = std::function<void(double t, const Eigen::VectorXd& y, Eigen::VectorXd& dydt)>;

struct Rk45Options {
    double rtol = 1e-6;
    double atol = 1e-9;
    double first_step = 0.0;  // 0 selects the initial step automatically
    double max_step = std::numeric_limits<double>::infinity();
    std::size_t max_steps = 50'000'000;
};

struct Rk45Stats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t rhs_evals = 0;
};

/// Dormand-Prince 5(4) with PI step-size control. Each accepted step satisfies
/// RMS_i(err_i / (atol + rtol * max(|y_i|, |y_new_i|))) <= 1.
/// Throws IntegrationError on step-size underflow or when max_steps is exhausted.
Eigen::VectorXd rk45_integrate(const OdeRhs& rhs, const Eigen::VectorXd& y0, double t0, double t1,
                               const Rk45Options& opts = {}, Rk45Stats* stats = nullptr);

}  // namespace lassomc
