#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "lassomc/problem.hpp"
#include "lassomc/surrogate.hpp"

namespace lassomc {

/// Output of one estimation strategy at budget N.
///
/// budget_N counts true-model evaluations only. Two-level variance estimates
/// may be negative; they are returned unclipped with negative_variance set.
struct EstimateResult {
    double mean = 0.0;
    double variance = 0.0;
    Eigen::Index budget_N = 0;
    Eigen::Index surrogate_eval_M = 0;
    std::optional<Eigen::Index> chosen_n;           // training size used for the mean
    std::optional<Eigen::Index> chosen_n_variance;  // adaptive MFMC may pick a different n
    std::optional<double> est_mse_mean;
    std::optional<double> est_mse_var;
    bool negative_variance = false;
};

/// Plug-in moment estimates from paired (f, s) evaluations.
///
/// Second moments use the unbiased N-1 divisor (matching mc_variance);
/// the fourth-order moments m4 and m22 are plain sample averages (divisor N).
struct MomentStats {
    Eigen::Index n = 0;
    double var_f = 0.0;
    double var_s = 0.0;
    double var_diff = 0.0;  // Var[f - s]
    double cov_fs = 0.0;
    double m4_f = 0.0;
    double m4_s = 0.0;
    double m22_plus_minus = 0.0;  // m22[f + s, f - s]
    double var_plus = 0.0;        // Var[f + s]
    double var_minus = 0.0;       // Var[f - s]

    /// m4 >= var^2 holds for exact moments; sample versions may violate it.
    bool kurtosis_consistent() const { return m4_f >= var_f * var_f && m4_s >= var_s * var_s; }
};

double mc_mean(const Eigen::VectorXd& y);
double mc_variance(const Eigen::VectorXd& y);

/// mean(s_big) + mean(f_eval) - mean(s_eval)
double two_level_mean(const Eigen::VectorXd& f_eval, const Eigen::VectorXd& s_eval,
                      const Eigen::VectorXd& s_big);
/// var(s_big) + var(f_eval) - var(s_eval); may be negative.
double two_level_variance(const Eigen::VectorXd& f_eval, const Eigen::VectorXd& s_eval,
                          const Eigen::VectorXd& s_big);

MomentStats estimate_moment_stats(const Eigen::VectorXd& f_eval, const Eigen::VectorXd& s_eval);

/// Var[s]/M + Var[f - s]/N_eval
double estimate_mse_mean(const MomentStats& stats, Eigen::Index n_eval, Eigen::Index m);

/// Two-level variance-estimator MSE:
///   (1/M)(m4[s] - (M-3)/(M-1) Var[s]^2)
/// + (1/N)(m22[f+s, f-s] + Var[f+s]Var[f-s]/(N-1) - (N-2)/(N-1) (Var[f]-Var[s])^2)
double estimate_mse_variance(const MomentStats& stats, Eigen::Index n_eval, Eigen::Index m);

/// Plug-in checks of when a two-level estimator beats simple MC at budget N
/// with n training samples (M -> infinity). Logged as diagnostics only.
struct SuperiorityDiagnostics {
    bool mean_condition = false;      // N/(N-n) <= Var[f]/Var[f-s]
    bool variance_condition = false;  // the analogous fourth-moment condition
};
SuperiorityDiagnostics superiority_conditions(const MomentStats& stats, Eigen::Index budget,
                                              Eigen::Index n_train);

/// Evaluation set V with true outputs plus a surrogate-only set W.
struct McData {
    Eigen::MatrixXd v_inputs;
    Eigen::VectorXd v_outputs;
    Eigen::MatrixXd w_inputs;
};

/// Samples V (size N) and W (size M) from independent streams derived from seed
/// and evaluates f on V only.
McData draw_data(const Problem& problem, Eigen::Index n, Eigen::Index m, std::uint64_t seed);

/// Simple MC on V.
EstimateResult simple_mc(const McData& data);
/// Surrogate trained on all of V, moments from W only (biased).
EstimateResult surrogate_only(const McData& data, const Trainer& trainer);

/// Train on the first floor(split_fraction * N) rows of V, evaluate the
/// two-level estimators on the rest plus W.
EstimateResult static_mfmc(const McData& data, double split_fraction, const Trainer& trainer);
EstimateResult static_mfmc(const Problem& problem, Eigen::Index n, double split_fraction, Eigen::Index m,
                           const Trainer& trainer, std::uint64_t seed);

/// Static MFMC over several split fractions; the mean and variance estimates
/// independently use the split with the smallest estimated MSE.
EstimateResult adaptive_mfmc(const McData& data, const std::vector<double>& candidate_fractions,
                             const Trainer& trainer);
EstimateResult adaptive_mfmc(const Problem& problem, Eigen::Index n,
                             const std::vector<double>& candidate_fractions, Eigen::Index m,
                             const Trainer& trainer, std::uint64_t seed);

/// Trains on all of V and reuses V as the evaluation set. Biased on purpose.
EstimateResult biased_mfmc(const McData& data, const Trainer& trainer);
EstimateResult biased_mfmc(const Problem& problem, Eigen::Index n, Eigen::Index m, const Trainer& trainer,
                           std::uint64_t seed);

/// Seed streams used by draw_data and the strategies.
namespace streams {
inline constexpr std::uint64_t evaluation_set = 1;
inline constexpr std::uint64_t surrogate_set = 2;
inline constexpr std::uint64_t cross_validation = 3;
}  // namespace streams

}  // namespace lassomc
