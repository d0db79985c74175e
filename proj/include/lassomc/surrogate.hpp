#pragma once

#include <functional>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "lassomc/lasso.hpp"

namespace lassomc {

/// A trained, immutable surrogate. predict maps an n x d input matrix to n outputs.
struct Surrogate {
    std::function<Eigen::VectorXd(const Eigen::MatrixXd&)> predict;
    double lambda = std::numeric_limits<double>::quiet_NaN();
    Eigen::Index nonzeros = -1;

    Eigen::VectorXd operator()(const Eigen::MatrixXd& x) const { return predict(x); }
};

/// Fits a surrogate to a training set (inputs by row, outputs).
using Trainer = std::function<Surrogate(const Eigen::MatrixXd&, const Eigen::VectorXd&)>;

/// Lasso surrogate with the given lambda strategy and feature transform.
Trainer lasso_trainer(LambdaStrategy strategy, FeatureTransform transform = {}, TrainConfig cfg = {});

/// Always returns s(x) = 0.
Trainer zero_trainer();

/// Ignores the training data and returns the given surrogate.
Trainer fixed_trainer(Surrogate s);

Surrogate from_lasso(LassoModel m);

}  // namespace lassomc
