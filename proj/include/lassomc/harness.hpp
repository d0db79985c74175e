#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lassomc/lasso.hpp"
#include "lassomc/problem.hpp"

namespace lassomc {

enum class Method { Mc, LassoSurrogate, Lmc, StaticMfmc, AdaptiveMfmc, BiasedMfmc, Pce };

/// CLI spelling: mc, lasso, lmc, static-mfmc, adaptive-mfmc, biased-mfmc, pce.
std::string method_name(Method m);
/// Accepts the CLI spelling and the underscore variants (lasso_surrogate, static_mfmc, ...).
Method parse_method(const std::string& name);
std::vector<Method> parse_methods(const std::string& comma_list);

/// "cv", "cv:<folds>", "sparsity", "sparsity:<fraction>", "fixed:<lambda>".
LambdaStrategy parse_lambda_strategy(const std::string& text);
/// "identity", "abs-shift" (shift 0.5) or "abs-shift:<shift>".
FeatureTransform parse_transform(const std::string& text);

struct ProblemSpec {
    std::string name = "linear";  // linear | sobol | fput
    std::optional<Eigen::Index> dim;  // linear/sobol: d (default 400); fput: oscillators P (default 40)
    std::optional<double> final_time;  // fput only
    std::optional<std::filesystem::path> reference_fixture;  // fput: frozen moments
};

std::shared_ptr<const Problem> make_problem(const ProblemSpec& spec);

struct ExperimentConfig {
    ProblemSpec problem;
    std::vector<Method> methods{Method::Mc, Method::Lmc};
    std::vector<Eigen::Index> budgets{50, 100, 200, 500, 1000};
    int repeats = 20;
    Eigen::Index folds = 5;                  // S
    Eigen::Index surrogate_samples = 10000;  // M
    LambdaStrategy lambda_strategy = CrossValidation{5};
    FeatureTransform transform;
    double split_fraction = 0.5;
    std::vector<double> candidate_fractions{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    int pce_degree = 2;
    std::uint64_t base_seed = 42;
    int threads = 1;
    bool record_wall_time = true;  // off gives byte-identical reruns
    TrainConfig train;

    /// Throws ConfigError for structural problems and ParameterError listing
    /// budgets not divisible by S when lmc is requested.
    void validate() const;
};

struct ConvergenceRecord {
    std::string problem;
    std::string method;
    Eigen::Index N = 0;
    int repeat_index = 0;
    double mean_est = 0.0;
    double var_est = 0.0;
    double rel_err_mean = 0.0;  // absolute error when the reference mean is 0
    double rel_err_std = 0.0;
    std::optional<Eigen::Index> chosen_n;
    double wall_time_ms = 0.0;
};

/// Error metrics of a single estimate against the reference moments:
///   |mean - E f| / |E f|  (|mean - E f| when E f = 0)
///   |sqrt(max(var, 0)) - sd| / sd
struct RelativeErrors {
    double mean = 0.0;
    double std = 0.0;
    bool mean_is_absolute = false;
};
RelativeErrors relative_errors(double mean_est, double var_est, const ReferenceMoments& ref);

/// Runs every (method, N, repeat) cell with seed base_seed + repeat. Records are
/// sorted by (problem, method, N, repeat_index) whatever the thread count.
std::vector<ConvergenceRecord> run_experiment(const ExperimentConfig& cfg, const Problem& problem);
std::vector<ConvergenceRecord> run_experiment(const ExperimentConfig& cfg);

struct SummaryRow {
    std::string problem;
    std::string method;
    Eigen::Index N = 0;
    int repeats = 0;
    double rel_err_mean_avg = 0.0;
    double rel_err_mean_sd = 0.0;
    double rel_err_std_avg = 0.0;
    double rel_err_std_sd = 0.0;
    double mean_est_avg = 0.0;
    double mean_est_sd = 0.0;
    double var_est_avg = 0.0;
    double var_est_sd = 0.0;
    double mse_mean = 0.0;  // average of (mean_est - E f)^2
    double mse_var = 0.0;   // average of (var_est - Var f)^2
    std::string mean_error_kind = "relative";  // "absolute" when E f = 0
};

/// Per (problem, method, N) group: mean and sample standard deviation (n-1)
/// of the errors and estimates, plus empirical MSE. Groups with fewer than two
/// records are skipped and reported in warnings.
std::vector<SummaryRow> summarize(const std::vector<ConvergenceRecord>& records, const ReferenceMoments& ref,
                                  std::vector<std::string>* warnings = nullptr);

extern const std::vector<std::string> record_columns;
extern const std::vector<std::string> summary_columns;

void write_csv(const std::filesystem::path& path, const std::vector<ConvergenceRecord>& records);
void write_csv(const std::filesystem::path& path, const std::vector<SummaryRow>& rows);
void write_json(const std::filesystem::path& path, const std::vector<ConvergenceRecord>& records);
void write_json(const std::filesystem::path& path, const std::vector<SummaryRow>& rows);

std::string to_csv(const std::vector<ConvergenceRecord>& records);
std::string to_csv(const std::vector<SummaryRow>& rows);
std::vector<ConvergenceRecord> parse_records_csv(const std::string& text);
std::vector<ConvergenceRecord> read_records_csv(const std::filesystem::path& path);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

}  // namespace lassomc
