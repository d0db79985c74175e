#pragma once

#include <cmath>
#include <cstdint>

#include <Eigen/Dense>

#include "lassomc/sampling.hpp"

namespace testing {

inline Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    lassomc::RandomStream rng(seed);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
    return m;
}

inline Eigen::VectorXd gaussian_vector(Eigen::Index n, std::uint64_t seed) {
    return gaussian_matrix(n, 1, seed).col(0);
}

inline Eigen::MatrixXd centered(Eigen::MatrixXd m) {
    m.rowwise() -= m.colwise().mean();
    return m;
}

inline double rel_diff(double a, double b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

// Largest violation of the Lasso subgradient conditions on centered data z, y:
//   g_k = z_k . (y - z beta);  g_k = lambda sign(beta_k) if beta_k != 0, |g_k| <= lambda otherwise.
// Reported relative to max_k |z_k . y| so that small lambdas are not judged on a vanishing scale.
inline double kkt_violation(const Eigen::MatrixXd& z, const Eigen::VectorXd& y, const Eigen::VectorXd& beta,
                            double lambda) {
    const Eigen::VectorXd g = z.transpose() * (y - z * beta);
    const double scale = std::max((z.transpose() * y).cwiseAbs().maxCoeff(), 1e-300);
    double worst = 0.0;
    for (Eigen::Index k = 0; k < beta.size(); ++k) {
        double v;
        if (beta(k) > 0.0)
            v = std::abs(g(k) - lambda);
        else if (beta(k) < 0.0)
            v = std::abs(g(k) + lambda);
        else
            v = std::max(0.0, std::abs(g(k)) - lambda);
        worst = std::max(worst, v / scale);
    }
    return worst;
}

}  // namespace testing
