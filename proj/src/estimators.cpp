#include "lassomc/estimators.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "lassomc/error.hpp"

namespace lassomc {

namespace {

void require_same_length(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const char* what) {
    if (a.size() != b.size())
        throw ShapeError(std::string(what) + ": paired vectors differ in length (" + std::to_string(a.size()) +
                         " vs " + std::to_string(b.size()) + ")");
}

double central_moment4(const Eigen::ArrayXd& centered) { return centered.square().square().mean(); }

Eigen::Index split_size(Eigen::Index n, double fraction) {
    if (!(fraction > 0.0 && fraction < 1.0))
        throw ParameterError("split fraction must lie in (0, 1), got " + std::to_string(fraction));
    const auto n_train = static_cast<Eigen::Index>(std::floor(fraction * static_cast<double>(n)));
    if (n_train < 2 || n - n_train < 2)
        throw ParameterError("split fraction " + std::to_string(fraction) + " of N=" + std::to_string(n) +
                             " leaves fewer than 2 samples on one side");
    return n_train;
}

struct TwoLevel {
    double mean;
    double variance;
    MomentStats stats;
};

TwoLevel two_level(const McData& data, const Surrogate& s, Eigen::Index eval_begin, bool with_stats) {
    const Eigen::Index n_eval = data.v_inputs.rows() - eval_begin;
    const Eigen::VectorXd f_eval = data.v_outputs.tail(n_eval);
    const Eigen::VectorXd s_eval = s(data.v_inputs.bottomRows(n_eval));
    const Eigen::VectorXd s_big = s(data.w_inputs);
    TwoLevel out{two_level_mean(f_eval, s_eval, s_big), two_level_variance(f_eval, s_eval, s_big), {}};
    if (with_stats) out.stats = estimate_moment_stats(f_eval, s_eval);
    return out;
}

void check_data(const McData& d) {
    if (d.v_inputs.rows() != d.v_outputs.size())
        throw ShapeError("evaluation set: input rows and outputs differ in length");
    if (d.w_inputs.rows() > 0 && d.w_inputs.cols() != d.v_inputs.cols())
        throw ShapeError("surrogate set dimension differs from evaluation set dimension");
}

}  // namespace

// Neumaier summation. Shifting by the first sample keeps constant inputs
// exact, so a constant surrogate cancels to the last bit.
double mc_mean(const Eigen::VectorXd& y) {
    if (y.size() < 1) throw ShapeError("mc_mean: empty sample");
    const double shift = y(0);
    double sum = 0.0, carry = 0.0;
    for (double v : y) {
        const double x = v - shift;
        const double t = sum + x;
        carry += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
        sum = t;
    }
    return shift + (sum + carry) / static_cast<double>(y.size());
}

double mc_variance(const Eigen::VectorXd& y) {
    if (y.size() < 2) throw DegenerateInputError("mc_variance: need at least 2 samples");
    const double mu = mc_mean(y);
    double sum = 0.0, carry = 0.0;
    for (double v : y) {
        const double x = (v - mu) * (v - mu);
        const double t = sum + x;
        carry += sum >= x ? (sum - t) + x : (x - t) + sum;
        sum = t;
    }
    return (sum + carry) / static_cast<double>(y.size() - 1);
}

double two_level_mean(const Eigen::VectorXd& f_eval, const Eigen::VectorXd& s_eval,
                      const Eigen::VectorXd& s_big) {
    require_same_length(f_eval, s_eval, "two_level_mean");
    return mc_mean(s_big) + mc_mean(f_eval) - mc_mean(s_eval);
}

double two_level_variance(const Eigen::VectorXd& f_eval, const Eigen::VectorXd& s_eval,
                          const Eigen::VectorXd& s_big) {
    require_same_length(f_eval, s_eval, "two_level_variance");
    return mc_variance(s_big) + mc_variance(f_eval) - mc_variance(s_eval);
}

MomentStats estimate_moment_stats(const Eigen::VectorXd& f_eval, const Eigen::VectorXd& s_eval) {
    require_same_length(f_eval, s_eval, "estimate_moment_stats");
    if (f_eval.size() < 4) throw DegenerateInputError("estimate_moment_stats: need at least 4 pairs");

    const Eigen::ArrayXd fc = f_eval.array() - f_eval.mean();
    const Eigen::ArrayXd sc = s_eval.array() - s_eval.mean();
    const Eigen::ArrayXd plus = fc + sc;
    const Eigen::ArrayXd minus = fc - sc;
    const double dof = static_cast<double>(f_eval.size() - 1);

    MomentStats st;
    st.n = f_eval.size();
    st.var_f = fc.square().sum() / dof;
    st.var_s = sc.square().sum() / dof;
    st.cov_fs = (fc * sc).sum() / dof;
    st.var_plus = plus.square().sum() / dof;
    st.var_minus = minus.square().sum() / dof;
    st.var_diff = st.var_minus;
    st.m4_f = central_moment4(fc);
    st.m4_s = central_moment4(sc);
    st.m22_plus_minus = (plus.square() * minus.square()).mean();
    return st;
}

double estimate_mse_mean(const MomentStats& stats, Eigen::Index n_eval, Eigen::Index m) {
    if (n_eval < 1 || m < 1) throw ParameterError("estimate_mse_mean: N_eval and M must be >= 1");
    return stats.var_s / static_cast<double>(m) + stats.var_diff / static_cast<double>(n_eval);
}

double estimate_mse_variance(const MomentStats& stats, Eigen::Index n_eval, Eigen::Index m) {
    if (n_eval < 3 || m < 4) throw ParameterError("estimate_mse_variance: requires N_eval >= 3 and M >= 4");
    const double M = static_cast<double>(m);
    const double N = static_cast<double>(n_eval);
    const double surrogate_term = (stats.m4_s - (M - 3.0) / (M - 1.0) * stats.var_s * stats.var_s) / M;
    const double gap = stats.var_f - stats.var_s;
    const double paired_term = (stats.m22_plus_minus + stats.var_plus * stats.var_minus / (N - 1.0) -
                                (N - 2.0) / (N - 1.0) * gap * gap) /
                               N;
    return surrogate_term + paired_term;
}

SuperiorityDiagnostics superiority_conditions(const MomentStats& stats, Eigen::Index budget,
                                              Eigen::Index n_train) {
    SuperiorityDiagnostics d;
    const double N = static_cast<double>(budget);
    const double ne = static_cast<double>(budget - n_train);
    const double ratio = N / ne;
    d.mean_condition = stats.var_diff == 0.0 || ratio <= stats.var_f / stats.var_diff;

    const double mc_term = stats.m4_f - (N - 3.0) / (N - 1.0) * stats.var_f * stats.var_f;
    const double gap = stats.var_f - stats.var_s;
    const double two_level_term = stats.m22_plus_minus + stats.var_plus * stats.var_minus / (ne - 1.0) -
                                  (ne - 2.0) / (ne - 1.0) * gap * gap;
    d.variance_condition = two_level_term <= 0.0 || ratio <= mc_term / two_level_term;
    return d;
}

McData draw_data(const Problem& problem, Eigen::Index n, Eigen::Index m, std::uint64_t seed) {
    McData d;
    d.v_inputs = sample(problem.distribution(), n, derive_seed(seed, streams::evaluation_set)).inputs;
    d.v_outputs = problem.evaluate_rows(d.v_inputs);
    d.w_inputs = sample(problem.distribution(), m, derive_seed(seed, streams::surrogate_set)).inputs;
    return d;
}

EstimateResult simple_mc(const McData& data) {
    check_data(data);
    EstimateResult r;
    r.mean = mc_mean(data.v_outputs);
    r.variance = mc_variance(data.v_outputs);
    r.budget_N = data.v_outputs.size();
    return r;
}

EstimateResult surrogate_only(const McData& data, const Trainer& trainer) {
    check_data(data);
    const Surrogate s = trainer(data.v_inputs, data.v_outputs);
    const Eigen::VectorXd s_big = s(data.w_inputs);
    EstimateResult r;
    r.mean = mc_mean(s_big);
    r.variance = mc_variance(s_big);
    r.budget_N = data.v_outputs.size();
    r.surrogate_eval_M = data.w_inputs.rows();
    r.chosen_n = r.budget_N;
    return r;
}

EstimateResult static_mfmc(const McData& data, double split_fraction, const Trainer& trainer) {
    check_data(data);
    const Eigen::Index N = data.v_outputs.size();
    const Eigen::Index n_train = split_size(N, split_fraction);
    const Surrogate s = trainer(data.v_inputs.topRows(n_train), data.v_outputs.head(n_train));
    const bool stats_ok = N - n_train >= 4 && data.w_inputs.rows() >= 4;
    const TwoLevel tl = two_level(data, s, n_train, stats_ok);

    EstimateResult r;
    r.mean = tl.mean;
    r.variance = tl.variance;
    r.budget_N = N;
    r.surrogate_eval_M = data.w_inputs.rows();
    r.chosen_n = n_train;
    r.chosen_n_variance = n_train;
    r.negative_variance = tl.variance < 0.0;
    if (stats_ok) {
        r.est_mse_mean = estimate_mse_mean(tl.stats, N - n_train, r.surrogate_eval_M);
        r.est_mse_var = estimate_mse_variance(tl.stats, N - n_train, r.surrogate_eval_M);
    }
    return r;
}

EstimateResult static_mfmc(const Problem& problem, Eigen::Index n, double split_fraction, Eigen::Index m,
                           const Trainer& trainer, std::uint64_t seed) {
    split_size(n, split_fraction);
    return static_mfmc(draw_data(problem, n, m, seed), split_fraction, trainer);
}

EstimateResult adaptive_mfmc(const McData& data, const std::vector<double>& candidate_fractions,
                             const Trainer& trainer) {
    check_data(data);
    if (candidate_fractions.empty()) throw ParameterError("adaptive_mfmc: empty candidate list");
    const Eigen::Index N = data.v_outputs.size();
    const Eigen::Index M = data.w_inputs.rows();
    if (M < 4) throw ParameterError("adaptive_mfmc: M must be >= 4");
    for (double frac : candidate_fractions) {
        const Eigen::Index n_train = split_size(N, frac);
        if (N - n_train < 4)
            throw ParameterError("adaptive_mfmc: candidate " + std::to_string(frac) +
                                 " leaves fewer than 4 evaluation samples for MSE estimation");
    }

    EstimateResult r;
    r.budget_N = N;
    r.surrogate_eval_M = M;
    double best_mse_mean = std::numeric_limits<double>::infinity();
    double best_mse_var = std::numeric_limits<double>::infinity();
    for (double frac : candidate_fractions) {
        const Eigen::Index n_train = split_size(N, frac);
        const Surrogate s = trainer(data.v_inputs.topRows(n_train), data.v_outputs.head(n_train));
        const TwoLevel tl = two_level(data, s, n_train, true);
        const double mse_mean = estimate_mse_mean(tl.stats, N - n_train, M);
        const double mse_var = estimate_mse_variance(tl.stats, N - n_train, M);
        if (mse_mean < best_mse_mean) {
            best_mse_mean = mse_mean;
            r.mean = tl.mean;
            r.chosen_n = n_train;
            r.est_mse_mean = mse_mean;
        }
        if (mse_var < best_mse_var) {
            best_mse_var = mse_var;
            r.variance = tl.variance;
            r.chosen_n_variance = n_train;
            r.est_mse_var = mse_var;
        }
    }
    r.negative_variance = r.variance < 0.0;
    return r;
}

EstimateResult adaptive_mfmc(const Problem& problem, Eigen::Index n,
                             const std::vector<double>& candidate_fractions, Eigen::Index m,
                             const Trainer& trainer, std::uint64_t seed) {
    if (candidate_fractions.empty()) throw ParameterError("adaptive_mfmc: empty candidate list");
    for (double frac : candidate_fractions) split_size(n, frac);
    return adaptive_mfmc(draw_data(problem, n, m, seed), candidate_fractions, trainer);
}

EstimateResult biased_mfmc(const McData& data, const Trainer& trainer) {
    check_data(data);
    const Eigen::Index N = data.v_outputs.size();
    if (N < 4) throw ParameterError("biased_mfmc: N must be >= 4");
    const Surrogate s = trainer(data.v_inputs, data.v_outputs);
    const TwoLevel tl = two_level(data, s, 0, false);
    EstimateResult r;
    r.mean = tl.mean;
    r.variance = tl.variance;
    r.budget_N = N;
    r.surrogate_eval_M = data.w_inputs.rows();
    r.chosen_n = N;
    r.chosen_n_variance = N;
    r.negative_variance = tl.variance < 0.0;
    return r;
}

EstimateResult biased_mfmc(const Problem& problem, Eigen::Index n, Eigen::Index m, const Trainer& trainer,
                           std::uint64_t seed) {
    if (n < 4) throw ParameterError("biased_mfmc: N must be >= 4");
    return biased_mfmc(draw_data(problem, n, m, seed), trainer);
}

}  // namespace lassomc
