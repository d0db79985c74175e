#include "lassomc/lasso.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "lassomc/error.hpp"
#include "lassomc/sampling.hpp"

namespace lassomc {

namespace {

double soft_threshold(double z, double lambda) {
    if (z > lambda) return z - lambda;
    if (z < -lambda) return z + lambda;
    return 0.0;
}

// Centered design and response, ready for coordinate descent.
struct CenteredDesign {
    Eigen::MatrixXd z;
    Eigen::VectorXd y;
    Eigen::VectorXd input_offsets;
    double output_offset = 0.0;
    Eigen::VectorXd col_sq;
    double threshold = 0.0;
};

CenteredDesign prepare(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const TrainConfig& cfg,
                const FeatureTransform& transform) {
    if (x.rows() != y.size())
        throw ShapeError("lasso: " + std::to_string(x.rows()) + " input rows but " +
                         std::to_string(y.size()) + " outputs");
    if (x.rows() < 2) throw DegenerateInputError("lasso: need at least 2 training rows");
    if (x.cols() < 1) throw ShapeError("lasso: need at least one input column");

    CenteredDesign p;
    p.z = transform.apply(x);
    p.input_offsets = p.z.colwise().mean().transpose();
    p.z.rowwise() -= p.input_offsets.transpose();
    p.output_offset = y.mean();
    p.y = y.array() - p.output_offset;
    p.col_sq = p.z.colwise().squaredNorm().transpose();
    p.threshold = cfg.tol * (1.0 + p.y.lpNorm<Eigen::Infinity>());
    return p;
}

// Step towards the exact minimizer for a fixed support and sign pattern,
//   z_A^T z_A b = z_A^T y - lambda sign(beta_A),
// stopping where the first weight reaches zero. With the signs fixed the
// objective is a convex quadratic along the segment with its minimum at b, so
// every accepted step decreases it. Cyclic updates crawl when the active
// columns are nearly collinear (n < d, small lambda); this step does not.
bool active_set_step(const CenteredDesign& p, double lambda, Eigen::VectorXd& beta, Eigen::VectorXd& resid) {
    std::vector<Eigen::Index> active;
    for (Eigen::Index k = 0; k < beta.size(); ++k)
        if (beta(k) != 0.0) active.push_back(k);
    if (active.empty()) return false;

    auto objective = [lambda](const Eigen::VectorXd& r, const Eigen::VectorXd& b) {
        return 0.5 * r.squaredNorm() + lambda * b.lpNorm<1>();
    };
    Eigen::MatrixXd za = p.z(Eigen::all, active);
    Eigen::VectorXd current = beta(active);
    const double start_obj = objective(resid, beta);

    // Rank-deficient support (centered data has rank < rows, so any support of
    // rows or more columns): walk along null directions of z_A, which leave
    // the fit unchanged and lower |beta|_1, dropping a weight each time it
    // reaches zero. The null basis comes from one pivoted QR and is updated by
    // elimination as columns drop out.
    {
        const Eigen::Index n0 = za.cols();
        const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(za);
        const Eigen::Index r = std::min(qr.rank(), p.z.rows() - 1);
        if (r < n0) {
            Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(n0, n0 - r);
            if (r > 0) {
                const Eigen::MatrixXd rr = qr.matrixR().topRows(r);
                basis.topRows(r) = -rr.leftCols(r).triangularView<Eigen::Upper>().solve(rr.rightCols(n0 - r));
            }
            basis.bottomRows(n0 - r).setIdentity();
            basis = qr.colsPermutation() * basis;

            std::vector<bool> dropped(static_cast<std::size_t>(n0), false);
            std::vector<bool> used(static_cast<std::size_t>(n0 - r), false);
            for (Eigen::Index step = 0; step < n0 - r; ++step) {
                Eigen::Index col = -1;
                double best = 0.0;
                for (Eigen::Index c = 0; c < basis.cols(); ++c)
                    if (!used[static_cast<std::size_t>(c)] && basis.col(c).lpNorm<Eigen::Infinity>() > best) {
                        best = basis.col(c).lpNorm<Eigen::Infinity>();
                        col = c;
                    }
                if (col < 0) break;
                Eigen::VectorXd v = basis.col(col);
                if (current.array().sign().matrix().dot(v) > 0.0) v = -v;
                double t = std::numeric_limits<double>::infinity();
                Eigen::Index hit = -1;
                for (Eigen::Index i = 0; i < n0; ++i)
                    if (v(i) * current(i) < 0.0 && -current(i) / v(i) < t) {
                        t = -current(i) / v(i);
                        hit = i;
                    }
                if (hit < 0) return false;
                current += t * v;
                current(hit) = 0.0;
                dropped[static_cast<std::size_t>(hit)] = true;

                // Pivot on the largest entry in row hit so the remaining
                // directions keep a zero there.
                Eigen::Index pivot = -1;
                best = 0.0;
                for (Eigen::Index c = 0; c < basis.cols(); ++c)
                    if (!used[static_cast<std::size_t>(c)] && std::abs(basis(hit, c)) > best) {
                        best = std::abs(basis(hit, c));
                        pivot = c;
                    }
                if (pivot < 0) break;
                used[static_cast<std::size_t>(pivot)] = true;
                for (Eigen::Index c = 0; c < basis.cols(); ++c)
                    if (!used[static_cast<std::size_t>(c)] && basis(hit, c) != 0.0) {
                        basis.col(c) -= basis(hit, c) / basis(hit, pivot) * basis.col(pivot);
                        basis(hit, c) = 0.0;
                    }
            }

            std::vector<Eigen::Index> keep;
            std::vector<Eigen::Index> active_next;
            for (Eigen::Index i = 0; i < n0; ++i)
                if (!dropped[static_cast<std::size_t>(i)] && current(i) != 0.0) {
                    keep.push_back(i);
                    active_next.push_back(active[static_cast<std::size_t>(i)]);
                }
            Eigen::MatrixXd za_next = za(Eigen::all, keep);
            Eigen::VectorXd current_next = current(keep);
            za = std::move(za_next);
            current = std::move(current_next);
            active = std::move(active_next);
        }
    }

    const auto na = static_cast<Eigen::Index>(active.size());
    Eigen::VectorXd stepped = current;
    if (na > 0) {
        const Eigen::VectorXd sign = current.array().sign().matrix();
        const Eigen::LDLT<Eigen::MatrixXd> ldlt(za.transpose() * za);
        if (ldlt.info() == Eigen::Success) {
            const Eigen::VectorXd target = ldlt.solve(za.transpose() * p.y - lambda * sign);
            if (target.allFinite()) {
                double t = 1.0;
                Eigen::Index blocking = -1;
                for (Eigen::Index i = 0; i < na; ++i) {
                    if (target(i) * sign(i) <= 0.0) {
                        const double ti = current(i) / (current(i) - target(i));
                        if (ti < t) {
                            t = ti;
                            blocking = i;
                        }
                    }
                }
                stepped = current + t * (target - current);
                if (blocking >= 0) stepped(blocking) = 0.0;
            }
        }
    }

    Eigen::VectorXd next = Eigen::VectorXd::Zero(beta.size());
    for (Eigen::Index i = 0; i < na; ++i) next(active[static_cast<std::size_t>(i)]) = stepped(i);
    const Eigen::VectorXd new_resid = p.y - p.z * next;
    if (!(objective(new_resid, next) <= start_obj)) return false;
    beta = next;
    resid = new_resid;
    return true;
}

// Cyclic coordinate descent with active-set iterations between full sweeps.
// beta and resid (= y - z beta) are updated in place.
std::size_t coordinate_descent(const CenteredDesign& p, double lambda, const TrainConfig& cfg,
                               Eigen::VectorXd& beta, Eigen::VectorXd& resid,
                               std::vector<double>* history) {
    constexpr std::size_t kSweepsBeforeExactStep = 10;
    const Eigen::Index d = p.z.cols();
    std::size_t sweeps = 0;
    double max_change = std::numeric_limits<double>::infinity();

    auto objective = [&] { return 0.5 * resid.squaredNorm() + lambda * beta.lpNorm<1>(); };
    auto sweep = [&](bool active_only) {
        max_change = 0.0;
        for (Eigen::Index k = 0; k < d; ++k) {
            if (p.col_sq(k) == 0.0) continue;  // constant column: weight pinned to 0
            const double old = beta(k);
            if (active_only && old == 0.0) continue;
            const double zk = p.z.col(k).dot(resid) + p.col_sq(k) * old;
            const double updated = soft_threshold(zk, lambda) / p.col_sq(k);
            if (updated != old) {
                resid.noalias() -= (updated - old) * p.z.col(k);
                beta(k) = updated;
                max_change = std::max(max_change, std::abs(updated - old));
            }
        }
        ++sweeps;
        if (history) history->push_back(objective());
    };

    if (history) history->push_back(objective());
    while (true) {
        if (sweeps >= cfg.max_iter) {
            std::ostringstream msg;
            msg << "lasso: coordinate descent did not converge after " << sweeps
                << " sweeps (lambda=" << lambda << ", last max weight change=" << max_change
                << ", threshold=" << p.threshold << ")";
            throw ConvergenceError(msg.str(), sweeps, max_change);
        }
        sweep(false);
        if (max_change < p.threshold) {
            // Sweeps stop at a weight-change threshold; one exact solve on the
            // settled support removes the leftover gradient error.
            if (active_set_step(p, lambda, beta, resid) && history) history->push_back(objective());
            break;
        }
        std::size_t inner = 0;
        while (sweeps < cfg.max_iter) {
            sweep(true);
            if (max_change < p.threshold) break;
            if (++inner % kSweepsBeforeExactStep == 0 && active_set_step(p, lambda, beta, resid)) {
                if (history) history->push_back(objective());
                break;
            }
        }
    }
    return sweeps;
}

LassoModel make_model(const CenteredDesign& p, const Eigen::VectorXd& beta, double lambda,
                      const FeatureTransform& transform) {
    LassoModel m;
    m.beta = beta;
    m.lambda = lambda;
    m.input_offsets = p.input_offsets;
    m.output_offset = p.output_offset;
    m.transform = transform;
    return m;
}

std::vector<double> grid_for(const CenteredDesign& p, const TrainConfig& cfg) {
    if (!cfg.lambda_grid.empty()) return cfg.lambda_grid;
    return make_lambda_grid(lambda_max(p.z, p.y), cfg.grid_size, cfg.grid_min_ratio);
}

void check_lambda(double lambda) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
        throw ParameterError("lasso: lambda must be finite and >= 0");
}

}  // namespace

Eigen::MatrixXd FeatureTransform::apply(const Eigen::MatrixXd& x) const {
    switch (kind) {
        case Kind::Identity:
            return x;
        case Kind::AbsShift:
            return (x.array() - shift).abs().matrix();
    }
    return x;
}

std::string FeatureTransform::name() const {
    if (kind == Kind::Identity) return "identity";
    std::ostringstream s;
    s << "abs-shift(" << shift << ")";
    return s.str();
}

void TrainConfig::validate() const {
    if (!(tol > 0.0)) throw ParameterError("lasso: tol must be > 0");
    if (max_iter == 0) throw ParameterError("lasso: max_iter must be > 0");
    if (cv_folds < 2) throw ParameterError("lasso: cv_folds must be >= 2");
    for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
        if (!(lambda_grid[i] > 0.0)) throw ParameterError("lasso: lambda grid values must be > 0");
        if (i > 0 && !(lambda_grid[i] < lambda_grid[i - 1]))
            throw ParameterError("lasso: lambda grid must be strictly descending");
    }
    if (lambda_grid.empty()) {
        if (grid_size == 0) throw ParameterError("lasso: empty lambda grid");
        if (!(grid_min_ratio > 0.0 && grid_min_ratio < 1.0))
            throw ParameterError("lasso: grid_min_ratio must lie in (0, 1)");
    }
}

Eigen::Index LassoModel::nonzeros() const { return (beta.array() != 0.0).count(); }

double lambda_max(const Eigen::MatrixXd& x_centered, const Eigen::VectorXd& y_centered) {
    if (x_centered.rows() != y_centered.size())
        throw ShapeError("lambda_max: input rows and output length differ");
    double best = 0.0;
    for (Eigen::Index k = 0; k < x_centered.cols(); ++k)
        best = std::max(best, std::abs(x_centered.col(k).dot(y_centered)));
    return best;
}

std::vector<double> make_lambda_grid(double lmax, std::size_t count, double min_ratio) {
    if (count == 0) throw ParameterError("lambda grid: count must be >= 1");
    if (!(lmax >= 0.0)) throw ParameterError("lambda grid: lambda_max must be >= 0");
    std::vector<double> grid(count);
    if (count == 1) {
        grid[0] = lmax;
        return grid;
    }
    const double log_ratio = std::log(min_ratio);
    for (std::size_t i = 0; i < count; ++i)
        grid[i] = lmax * std::exp(log_ratio * static_cast<double>(i) / static_cast<double>(count - 1));
    grid.front() = lmax;
    return grid;
}

double lasso_objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& beta,
                       double lambda) {
    return 0.5 * (y - x * beta).squaredNorm() + lambda * beta.lpNorm<1>();
}

LassoModel fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda, const TrainConfig& cfg,
               const FeatureTransform& transform) {
    check_lambda(lambda);
    cfg.validate();
    const CenteredDesign p = prepare(x, y, cfg, transform);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p.z.cols());
    Eigen::VectorXd resid = p.y;
    std::vector<double> history;
    const std::size_t sweeps =
        coordinate_descent(p, lambda, cfg, beta, resid, cfg.record_objective ? &history : nullptr);
    LassoModel m = make_model(p, beta, lambda, transform);
    m.sweeps = sweeps;
    m.objective_history = std::move(history);
    return m;
}

std::vector<LassoModel> fit_path(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                 const std::vector<double>& grid, const TrainConfig& cfg,
                                 const FeatureTransform& transform) {
    cfg.validate();
    const CenteredDesign p = prepare(x, y, cfg, transform);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p.z.cols());
    Eigen::VectorXd resid = p.y;
    std::vector<LassoModel> path;
    path.reserve(grid.size());
    for (double lambda : grid) {
        check_lambda(lambda);
        std::vector<double> history;
        const std::size_t sweeps =
            coordinate_descent(p, lambda, cfg, beta, resid, cfg.record_objective ? &history : nullptr);
        path.push_back(make_model(p, beta, lambda, transform));
        path.back().sweeps = sweeps;
        path.back().objective_history = std::move(history);
    }
    return path;
}

Eigen::VectorXd predict(const LassoModel& m, const Eigen::MatrixXd& x) {
    if (x.cols() != m.dim())
        throw ShapeError("predict: model has dimension " + std::to_string(m.dim()) + " but input has " +
                         std::to_string(x.cols()) + " columns");
    if (m.nonzeros() == 0) return Eigen::VectorXd::Constant(x.rows(), m.output_offset);
    Eigen::MatrixXd z = m.transform.apply(x);
    z.rowwise() -= m.input_offsets.transpose();
    return (z * m.beta).array() + m.output_offset;
}

double select_lambda_cv(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const TrainConfig& cfg,
                        const FeatureTransform& transform) {
    cfg.validate();
    const CenteredDesign full = prepare(x, y, cfg, transform);
    const Eigen::Index n = x.rows();
    if (cfg.cv_folds > n)
        throw ParameterError("select_lambda_cv: " + std::to_string(cfg.cv_folds) + " folds but only " +
                             std::to_string(n) + " rows");
    const std::vector<double> grid = grid_for(full, cfg);
    if (grid.empty()) throw ParameterError("select_lambda_cv: empty lambda grid");
    if (grid.front() == 0.0) return 0.0;  // centered y is identically zero

    const auto order = shuffled_indices(n, cfg.cv_seed);
    const Eigen::Index folds = cfg.cv_folds;
    std::vector<double> cv_error(grid.size(), 0.0);

    for (Eigen::Index f = 0; f < folds; ++f) {
        const Eigen::Index begin = f * n / folds;
        const Eigen::Index end = (f + 1) * n / folds;
        const Eigen::Index n_test = end - begin;
        const Eigen::Index n_train = n - n_test;
        Eigen::MatrixXd x_train(n_train, x.cols()), x_test(n_test, x.cols());
        Eigen::VectorXd y_train(n_train), y_test(n_test);
        for (Eigen::Index i = 0, tr = 0, te = 0; i < n; ++i) {
            const Eigen::Index row = order[static_cast<std::size_t>(i)];
            if (i >= begin && i < end) {
                x_test.row(te) = x.row(row);
                y_test(te++) = y(row);
            } else {
                x_train.row(tr) = x.row(row);
                y_train(tr++) = y(row);
            }
        }
        // The loss is an unnormalized sum, so the penalty is rescaled to the
        // training-fold size to keep the per-sample regularization strength.
        const double scale = static_cast<double>(n_train) / static_cast<double>(n);
        std::vector<double> fold_grid(grid.size());
        std::transform(grid.begin(), grid.end(), fold_grid.begin(), [&](double l) { return l * scale; });

        const auto path = fit_path(x_train, y_train, fold_grid, cfg, transform);
        for (std::size_t g = 0; g < grid.size(); ++g)
            cv_error[g] += (predict(path[g], x_test) - y_test).squaredNorm() / static_cast<double>(n_test);
    }

    std::size_t best = 0;
    for (std::size_t g = 1; g < grid.size(); ++g) {
        if (cv_error[g] < cv_error[best] * (1.0 - 1e-12)) best = g;
    }
    return grid[best];
}

namespace {

// Shared by select_lambda_sparsity and train(): returns the chosen model.
LassoModel sparsity_path_model(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, Eigen::Index k,
                               const TrainConfig& cfg, const FeatureTransform& transform) {
    cfg.validate();
    const CenteredDesign p = prepare(x, y, cfg, transform);
    if (k < 0 || k > p.z.cols())
        throw ParameterError("select_lambda_sparsity: target " + std::to_string(k) + " outside [0, " +
                             std::to_string(p.z.cols()) + "]");
    const std::vector<double> grid = grid_for(p, cfg);

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p.z.cols());
    Eigen::VectorXd resid = p.y;
    LassoModel chosen;
    bool have = false;
    for (double lambda : grid) {
        Eigen::VectorXd trial_beta = beta;
        Eigen::VectorXd trial_resid = resid;
        const std::size_t sweeps = coordinate_descent(p, lambda, cfg, trial_beta, trial_resid, nullptr);
        if ((trial_beta.array() != 0.0).count() > k && have) break;
        beta = std::move(trial_beta);
        resid = std::move(trial_resid);
        chosen = make_model(p, beta, lambda, transform);
        chosen.sweeps = sweeps;
        have = true;
    }
    return chosen;
}

}  // namespace

double select_lambda_sparsity(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, Eigen::Index k,
                              const TrainConfig& cfg, const FeatureTransform& transform) {
    return sparsity_path_model(x, y, k, cfg, transform).lambda;
}

std::string describe(const LambdaStrategy& s) {
    std::ostringstream out;
    if (const auto* cv = std::get_if<CrossValidation>(&s))
        out << "cv:" << cv->folds;
    else if (const auto* sp = std::get_if<SparsityTarget>(&s))
        out << "sparsity:" << sp->fraction;
    else
        out << "fixed:" << std::get<FixedLambda>(s).lambda;
    return out.str();
}

LassoModel train(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const LambdaStrategy& strategy,
                 const TrainConfig& cfg, const FeatureTransform& transform) {
    if (const auto* cv = std::get_if<CrossValidation>(&strategy)) {
        TrainConfig local = cfg;
        local.cv_folds = std::min<int>(cv->folds, static_cast<int>(x.rows()));
        return fit(x, y, select_lambda_cv(x, y, local, transform), cfg, transform);
    }
    if (const auto* sp = std::get_if<SparsityTarget>(&strategy)) {
        if (!(sp->fraction >= 0.0)) throw ParameterError("sparsity target fraction must be >= 0");
        const auto target = static_cast<Eigen::Index>(std::floor(sp->fraction * static_cast<double>(x.rows())));
        return sparsity_path_model(x, y, std::min<Eigen::Index>(target, x.cols()), cfg, transform);
    }
    return fit(x, y, std::get<FixedLambda>(strategy).lambda, cfg, transform);
}

}  // namespace lassomc
