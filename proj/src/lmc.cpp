#include "lassomc/lmc.hpp"

#include <algorithm>
#include <string>

#include "lassomc/error.hpp"
#include "lassomc/sampling.hpp"

namespace lassomc {

namespace {

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& x, const std::vector<Eigen::Index>& rows) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), x.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(rows[i]);
    return out;
}

Eigen::VectorXd gather(const Eigen::VectorXd& y, const std::vector<Eigen::Index>& rows) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) out(static_cast<Eigen::Index>(i)) = y(rows[i]);
    return out;
}

}  // namespace

void LmcConfig::validate(Eigen::Index budget) const {
    if (folds < 2) throw ParameterError("lmc: S must be >= 2");
    if (budget % folds != 0)
        throw ParameterError("lmc: S=" + std::to_string(folds) + " does not divide N=" + std::to_string(budget));
    if (budget < 2 * folds)
        throw ParameterError("lmc: N=" + std::to_string(budget) + " must be at least 2S=" +
                             std::to_string(2 * folds));
    if (surrogate_samples < 2) throw ParameterError("lmc: M must be >= 2");
    train.validate();
}

bool LmcResult::all_folds_null() const {
    return std::all_of(fold_models.begin(), fold_models.end(), [](const FoldModel& m) { return m.nonzeros == 0; });
}

std::vector<FoldSplit> fold_splits(Eigen::Index n, Eigen::Index folds) {
    if (folds < 1 || n % folds != 0) throw ParameterError("fold_splits: S must divide N");
    const Eigen::Index block = n / folds;
    std::vector<FoldSplit> splits(static_cast<std::size_t>(folds));
    for (Eigen::Index s = 0; s < folds; ++s) {
        auto& split = splits[static_cast<std::size_t>(s)];
        for (Eigen::Index i = 0; i < n; ++i) {
            if (i >= s * block && i < (s + 1) * block)
                split.eval.push_back(i);
            else
                split.train.push_back(i);
        }
    }
    return splits;
}

LmcResult lmc_estimate(const Eigen::MatrixXd& v_inputs, const Eigen::VectorXd& v_outputs,
                       const Eigen::MatrixXd& w_inputs, const LmcConfig& cfg, const Trainer& trainer) {
    const Eigen::Index N = v_outputs.size();
    if (v_inputs.rows() != N) throw ShapeError("lmc: V inputs and outputs differ in length");
    if (w_inputs.cols() != v_inputs.cols()) throw ShapeError("lmc: W and V differ in dimension");
    cfg.validate(N);
    const Eigen::Index M = w_inputs.rows();
    if (M < 2) throw ParameterError("lmc: W needs at least 2 rows");

    LmcResult r;
    r.budget_N = N;
    r.surrogate_eval_M = M;
    r.mc_mean = mc_mean(v_outputs);
    r.mc_variance = mc_variance(v_outputs);
    if (M < 10 * N)
        r.warnings.push_back("M=" + std::to_string(M) + " is less than 10N=" + std::to_string(10 * N));

    for (const FoldSplit& split : fold_splits(N, cfg.folds)) {
        Surrogate s;
        try {
            s = trainer(gather_rows(v_inputs, split.train), gather(v_outputs, split.train));
        } catch (const Error& e) {
            throw Error("lmc: surrogate training failed on fold " +
                        std::to_string(split.eval.front() / (N / cfg.folds)) + ": " + e.what());
        }
        const Eigen::VectorXd f_eval = gather(v_outputs, split.eval);
        const Eigen::VectorXd s_eval = s(gather_rows(v_inputs, split.eval));
        const Eigen::VectorXd s_big = s(w_inputs);

        r.fold_estimates.push_back({two_level_mean(f_eval, s_eval, s_big), two_level_variance(f_eval, s_eval, s_big)});

        FoldModel fm;
        fm.lambda = s.lambda;
        fm.nonzeros = s.nonzeros;
        if (f_eval.size() >= 4) {
            const MomentStats st = estimate_moment_stats(f_eval, s_eval);
            fm.mean_assumption = st.var_diff <= st.var_f;
            const double Nd = static_cast<double>(N);
            const double gap = st.var_f - st.var_s;
            const double lhs =
                st.m22_plus_minus + st.var_plus * st.var_minus / (Nd - 1.0) - (Nd - 2.0) / (Nd - 1.0) * gap * gap;
            const double rhs = st.m4_f - (Nd - 3.0) / (Nd - 1.0) * st.var_f * st.var_f;
            fm.variance_assumption = lhs <= rhs;
        }
        r.fold_models.push_back(fm);
    }

    double mean_sum = 0.0, var_sum = 0.0;
    for (const auto& fe : r.fold_estimates) {
        mean_sum += fe.mean;
        var_sum += fe.variance;
    }
    r.mean = mean_sum / static_cast<double>(cfg.folds);
    r.variance = var_sum / static_cast<double>(cfg.folds);
    return r;
}

Trainer make_lmc_trainer(const LmcConfig& cfg, std::uint64_t seed) {
    TrainConfig train = cfg.train;
    train.cv_seed = derive_seed(seed, streams::cross_validation);
    return lasso_trainer(cfg.lambda_strategy, cfg.transform, train);
}

LmcResult lmc_estimate(const Eigen::MatrixXd& v_inputs, const Eigen::VectorXd& v_outputs,
                       const Eigen::MatrixXd& w_inputs, const LmcConfig& cfg) {
    return lmc_estimate(v_inputs, v_outputs, w_inputs, cfg, lasso_trainer(cfg.lambda_strategy, cfg.transform, cfg.train));
}

LmcResult lmc_run(const Problem& problem, Eigen::Index n, const LmcConfig& cfg, const Trainer& trainer,
                  std::uint64_t seed) {
    cfg.validate(n);
    const McData data = draw_data(problem, n, cfg.surrogate_samples, seed);
    return lmc_estimate(data.v_inputs, data.v_outputs, data.w_inputs, cfg, trainer);
}

LmcResult lmc_run(const Problem& problem, Eigen::Index n, const LmcConfig& cfg, std::uint64_t seed) {
    return lmc_run(problem, n, cfg, make_lmc_trainer(cfg, seed), seed);
}

}  // namespace lassomc
