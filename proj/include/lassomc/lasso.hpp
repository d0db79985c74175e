#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace lassomc {

/// Element-wise input transform applied before the linear model.
struct FeatureTransform {
    enum class Kind { Identity, AbsShift };

    Kind kind = Kind::Identity;
    double shift = 0.0;

    static FeatureTransform identity() { return {}; }
    /// x_i -> |x_i - shift|
    static FeatureTransform abs_shift(double shift) { return {Kind::AbsShift, shift}; }

    Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
    std::string name() const;

    friend bool operator==(const FeatureTransform&, const FeatureTransform&) = default;
};

/// Coordinate-descent and lambda-selection settings.
///
/// A sweep stops the solver when the largest absolute weight change in a full
/// sweep drops below tol * (1 + max|y_centered|).
struct TrainConfig {
    double tol = 1e-8;
    std::size_t max_iter = 100000;

    /// Explicit, strictly descending, positive grid. When empty a grid of
    /// grid_size log-spaced values from lambda_max down to grid_min_ratio * lambda_max
    /// is generated from the training data.
    std::vector<double> lambda_grid;
    std::size_t grid_size = 100;
    double grid_min_ratio = 1e-4;

    int cv_folds = 5;
    std::uint64_t cv_seed = 0;

    /// Keep the Lasso objective after every sweep (used by tests).
    bool record_objective = false;

    void validate() const;
};

/// Linear surrogate s(x) = beta . (zeta(x) - input_offsets) + output_offset.
struct LassoModel {
    Eigen::VectorXd beta;
    double lambda = 0.0;
    Eigen::VectorXd input_offsets;
    double output_offset = 0.0;
    FeatureTransform transform;

    std::size_t sweeps = 0;
    std::vector<double> objective_history;

    Eigen::Index dim() const { return beta.size(); }
    Eigen::Index nonzeros() const;
};

/// max_k |sum_i x_ik y_i| on centered data; the smallest lambda whose Lasso solution is zero.
double lambda_max(const Eigen::MatrixXd& x_centered, const Eigen::VectorXd& y_centered);

/// Log-spaced descending grid from lmax to min_ratio * lmax (count values).
std::vector<double> make_lambda_grid(double lmax, std::size_t count, double min_ratio);

/// Minimizes 1/2 sum (y_i - beta . z_i)^2 + lambda |beta|_1 over centered z = zeta(x).
LassoModel fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda,
               const TrainConfig& cfg, const FeatureTransform& transform = {});

/// Fits every grid value in order, warm-starting each fit from the previous one.
std::vector<LassoModel> fit_path(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                 const std::vector<double>& grid, const TrainConfig& cfg,
                                 const FeatureTransform& transform = {});

Eigen::VectorXd predict(const LassoModel& m, const Eigen::MatrixXd& x);

/// K-fold cross-validation over the grid. Returns the lambda with the smallest
/// mean held-out squared error; ties go to the larger lambda.
double select_lambda_cv(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const TrainConfig& cfg,
                        const FeatureTransform& transform = {});

/// Walks the grid from lambda_max downwards and returns the last lambda whose
/// fit has at most k nonzero weights.
double select_lambda_sparsity(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, Eigen::Index k,
                              const TrainConfig& cfg, const FeatureTransform& transform = {});

struct CrossValidation {
    int folds = 5;
};
/// Target nonzero count floor(fraction * n_train).
struct SparsityTarget {
    double fraction = 0.95;
};
struct FixedLambda {
    double lambda = 0.0;
};
using LambdaStrategy = std::variant<CrossValidation, SparsityTarget, FixedLambda>;

std::string describe(const LambdaStrategy& s);

/// Selects lambda with the given strategy and returns the fitted model.
LassoModel train(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const LambdaStrategy& strategy,
                 const TrainConfig& cfg, const FeatureTransform& transform = {});

/// 1/2 |y - X beta|^2 + lambda |beta|_1.
double lasso_objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& beta,
                       double lambda);

}  // namespace lassomc
