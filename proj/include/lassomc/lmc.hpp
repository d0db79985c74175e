#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lassomc/estimators.hpp"
#include "lassomc/lasso.hpp"
#include "lassomc/problem.hpp"
#include "lassomc/surrogate.hpp"

namespace lassomc {

/// Settings of the S-fold Lasso Monte Carlo estimator.
struct LmcConfig {
    Eigen::Index folds = 5;           // S; must divide N
    Eigen::Index surrogate_samples = 10000;  // M, size of the surrogate-only set W
    LambdaStrategy lambda_strategy = CrossValidation{5};
    FeatureTransform transform;
    TrainConfig train;

    /// Checks S >= 2, S | N and N >= 2S.
    void validate(Eigen::Index budget) const;
};

struct FoldEstimate {
    double mean = 0.0;
    double variance = 0.0;
};

/// Summary of one fold's surrogate plus plug-in checks of the two
/// accuracy assumptions on the fold's evaluation subset (diagnostics only).
struct FoldModel {
    double lambda = 0.0;
    Eigen::Index nonzeros = 0;
    std::optional<bool> mean_assumption;      // Var[f - s] <= Var[f]
    std::optional<bool> variance_assumption;  // fourth-moment analogue at budget N
};

struct LmcResult {
    double mean = 0.0;      // average of fold mean estimates
    double variance = 0.0;  // average of fold variance estimates
    std::vector<FoldEstimate> fold_estimates;
    std::vector<FoldModel> fold_models;
    double mc_mean = 0.0;      // simple MC on V, for side-by-side reporting
    double mc_variance = 0.0;
    Eigen::Index budget_N = 0;
    Eigen::Index surrogate_eval_M = 0;
    std::vector<std::string> warnings;

    /// True when every fold selected the null model.
    bool all_folds_null() const;
};

/// Row indices of the s-th evaluation block (contiguous, size N/S) and the
/// complementary training rows.
struct FoldSplit {
    std::vector<Eigen::Index> train;
    std::vector<Eigen::Index> eval;
};
std::vector<FoldSplit> fold_splits(Eigen::Index n, Eigen::Index folds);

/// Runs the S-fold estimator on precomputed true-model outputs of V.
/// No further evaluations of the true model happen.
LmcResult lmc_estimate(const Eigen::MatrixXd& v_inputs, const Eigen::VectorXd& v_outputs,
                       const Eigen::MatrixXd& w_inputs, const LmcConfig& cfg, const Trainer& trainer);
/// Same, with a Lasso trainer built from cfg.
LmcResult lmc_estimate(const Eigen::MatrixXd& v_inputs, const Eigen::VectorXd& v_outputs,
                       const Eigen::MatrixXd& w_inputs, const LmcConfig& cfg);

/// Samples V and W, evaluates the true model N times, then runs lmc_estimate.
LmcResult lmc_run(const Problem& problem, Eigen::Index n, const LmcConfig& cfg, std::uint64_t seed);
LmcResult lmc_run(const Problem& problem, Eigen::Index n, const LmcConfig& cfg, const Trainer& trainer,
                  std::uint64_t seed);

/// Lasso trainer from cfg; the CV shuffle uses a stream derived from seed.
Trainer make_lmc_trainer(const LmcConfig& cfg, std::uint64_t seed);

}  // namespace lassomc
