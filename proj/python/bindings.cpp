#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "lassomc/error.hpp"
#include "lassomc/estimators.hpp"
#include "lassomc/harness.hpp"
#include "lassomc/lasso.hpp"
#include "lassomc/lmc.hpp"
#include "lassomc/pce.hpp"
#include "lassomc/problems.hpp"

namespace py = pybind11;
using namespace lassomc;

namespace {

py::dict record_dict(const ConvergenceRecord& r) {
    py::dict d;
    d["problem"] = r.problem;
    d["method"] = r.method;
    d["N"] = r.N;
    d["repeat_index"] = r.repeat_index;
    d["mean_est"] = r.mean_est;
    d["var_est"] = r.var_est;
    d["rel_err_mean"] = r.rel_err_mean;
    d["rel_err_std"] = r.rel_err_std;
    d["chosen_n"] = r.chosen_n ? py::object(py::int_(*r.chosen_n)) : py::object(py::none());
    d["wall_time_ms"] = r.wall_time_ms;
    return d;
}

py::dict summary_dict(const SummaryRow& r) {
    py::dict d;
    d["problem"] = r.problem;
    d["method"] = r.method;
    d["N"] = r.N;
    d["repeats"] = r.repeats;
    d["rel_err_mean_avg"] = r.rel_err_mean_avg;
    d["rel_err_mean_sd"] = r.rel_err_mean_sd;
    d["rel_err_std_avg"] = r.rel_err_std_avg;
    d["rel_err_std_sd"] = r.rel_err_std_sd;
    d["mean_est_avg"] = r.mean_est_avg;
    d["mean_est_sd"] = r.mean_est_sd;
    d["var_est_avg"] = r.var_est_avg;
    d["var_est_sd"] = r.var_est_sd;
    d["mse_mean"] = r.mse_mean;
    d["mse_var"] = r.mse_var;
    d["mean_error_kind"] = r.mean_error_kind;
    return d;
}

TrainConfig train_config(double tol, std::size_t max_iter, std::uint64_t cv_seed) {
    TrainConfig cfg;
    cfg.tol = tol;
    cfg.max_iter = max_iter;
    cfg.cv_seed = cv_seed;
    return cfg;
}

py::object reference_or_none(const Problem& p) {
    const ReferenceMoments r = p.reference();
    if (!r.available()) return py::none();
    return py::make_tuple(r.mean, r.variance);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Lasso Monte Carlo estimators";

    auto base = py::register_exception<Error>(m, "LassomcError", PyExc_RuntimeError);
    py::register_exception<ParameterError>(m, "ParameterError", base.ptr());
    py::register_exception<ShapeError>(m, "ShapeError", base.ptr());
    py::register_exception<DegenerateInputError>(m, "DegenerateInputError", base.ptr());
    py::register_exception<DomainError>(m, "DomainError", base.ptr());
    py::register_exception<CapacityError>(m, "CapacityError", base.ptr());
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<FileError>(m, "FileError", base.ptr());
    py::register_exception<ConvergenceError>(m, "ConvergenceError", base.ptr());
    py::register_exception<IntegrationError>(m, "IntegrationError", base.ptr());

    // Lasso
    m.def("lambda_max", &lambda_max, py::arg("x_centered"), py::arg("y_centered"));

    py::class_<LassoModel>(m, "LassoModel")
        .def_readonly("beta", &LassoModel::beta)
        .def_readonly("lam", &LassoModel::lambda)
        .def_readonly("input_offsets", &LassoModel::input_offsets)
        .def_readonly("output_offset", &LassoModel::output_offset)
        .def_readonly("sweeps", &LassoModel::sweeps)
        .def_property_readonly("nonzeros", &LassoModel::nonzeros)
        .def("predict", [](const LassoModel& self, const Eigen::MatrixXd& x) { return predict(self, x); });

    m.def(
        "fit",
        [](const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lam, const std::string& transform, double tol,
           std::size_t max_iter) { return fit(x, y, lam, train_config(tol, max_iter, 0), parse_transform(transform)); },
        py::arg("x"), py::arg("y"), py::arg("lam"), py::arg("transform") = "identity", py::arg("tol") = 1e-8,
        py::arg("max_iter") = 100000);

    m.def(
        "train",
        [](const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const std::string& strategy,
           const std::string& transform, std::uint64_t cv_seed) {
            return train(x, y, parse_lambda_strategy(strategy), train_config(1e-8, 100000, cv_seed),
                         parse_transform(transform));
        },
        py::arg("x"), py::arg("y"), py::arg("strategy") = "cv", py::arg("transform") = "identity",
        py::arg("cv_seed") = 0);

    // Estimators
    m.def("mc_mean", &mc_mean, py::arg("y"));
    m.def("mc_variance", &mc_variance, py::arg("y"));
    m.def("two_level_mean", &two_level_mean, py::arg("f_eval"), py::arg("s_eval"), py::arg("s_big"));
    m.def("two_level_variance", &two_level_variance, py::arg("f_eval"), py::arg("s_eval"), py::arg("s_big"));
    m.def(
        "estimate_mse",
        [](const Eigen::VectorXd& f_eval, const Eigen::VectorXd& s_eval, Eigen::Index big_m) {
            const MomentStats st = estimate_moment_stats(f_eval, s_eval);
            return py::make_tuple(estimate_mse_mean(st, f_eval.size(), big_m),
                                  estimate_mse_variance(st, f_eval.size(), big_m));
        },
        py::arg("f_eval"), py::arg("s_eval"), py::arg("big_m"),
        "Plug-in (MSE of the mean, MSE of the variance) of the two-level estimators.");

    // Problems
    py::class_<Problem, std::shared_ptr<Problem>>(m, "Problem")
        .def_property_readonly("id", &Problem::id)
        .def_property_readonly("dim", &Problem::dim)
        .def("evaluate", &Problem::evaluate_rows, py::arg("x"), py::call_guard<py::gil_scoped_release>())
        .def("reference", &reference_or_none, "(mean, variance), or None when unknown")
        .def(
            "sample",
            [](const Problem& self, Eigen::Index n, std::uint64_t seed) {
                return sample(self.distribution(), n, seed).inputs;
            },
            py::arg("n"), py::arg("seed"));
    py::class_<LinearProblem, Problem, std::shared_ptr<LinearProblem>>(m, "LinearProblem")
        .def(py::init<Eigen::Index>(), py::arg("d") = 400)
        .def_property_readonly("alpha", &LinearProblem::alpha);
    py::class_<SobolProblem, Problem, std::shared_ptr<SobolProblem>>(m, "SobolProblem")
        .def(py::init<Eigen::Index>(), py::arg("d") = 400)
        .def_property_readonly("coefficients", &SobolProblem::coefficients);
    py::class_<FputProblem, Problem, std::shared_ptr<FputProblem>>(m, "FputProblem")
        .def(py::init([](Eigen::Index oscillators, double final_time, std::optional<std::filesystem::path> fixture) {
                 FputSettings s;
                 s.oscillators = oscillators;
                 s.final_time = final_time;
                 auto p = std::make_shared<FputProblem>(s);
                 if (fixture) p->set_reference(read_reference_fixture(*fixture).moments());
                 return p;
             }),
             py::arg("oscillators") = 40, py::arg("final_time") = 500.0, py::arg("reference_fixture") = py::none());

    // LMC
    py::class_<LmcResult>(m, "LmcResult")
        .def_readonly("mean", &LmcResult::mean)
        .def_readonly("variance", &LmcResult::variance)
        .def_readonly("mc_mean", &LmcResult::mc_mean)
        .def_readonly("mc_variance", &LmcResult::mc_variance)
        .def_readonly("budget_N", &LmcResult::budget_N)
        .def_readonly("surrogate_eval_M", &LmcResult::surrogate_eval_M)
        .def_readonly("warnings", &LmcResult::warnings)
        .def_property_readonly("fold_lambdas",
                               [](const LmcResult& r) {
                                   std::vector<double> v;
                                   for (const auto& f : r.fold_models) v.push_back(f.lambda);
                                   return v;
                               })
        .def_property_readonly("fold_nonzeros",
                               [](const LmcResult& r) {
                                   std::vector<Eigen::Index> v;
                                   for (const auto& f : r.fold_models) v.push_back(f.nonzeros);
                                   return v;
                               })
        .def_property_readonly("all_folds_null", &LmcResult::all_folds_null);

    auto lmc_config = [](Eigen::Index folds, Eigen::Index big_m, const std::string& lam, const std::string& transform) {
        LmcConfig cfg;
        cfg.folds = folds;
        cfg.surrogate_samples = big_m;
        cfg.lambda_strategy = parse_lambda_strategy(lam);
        cfg.transform = parse_transform(transform);
        return cfg;
    };
    m.def(
        "lmc_estimate",
        [lmc_config](const Eigen::MatrixXd& v, const Eigen::VectorXd& f, const Eigen::MatrixXd& w, Eigen::Index folds,
                     const std::string& lam, const std::string& transform, std::uint64_t cv_seed) {
            LmcConfig cfg = lmc_config(folds, w.rows(), lam, transform);
            cfg.train.cv_seed = cv_seed;
            return lmc_estimate(v, f, w, cfg);
        },
        py::arg("v_inputs"), py::arg("v_outputs"), py::arg("w_inputs"), py::arg("folds") = 5, py::arg("lam") = "cv",
        py::arg("transform") = "identity", py::arg("cv_seed") = 0);
    m.def(
        "lmc_run",
        [lmc_config](const Problem& p, Eigen::Index n, Eigen::Index folds, Eigen::Index big_m, const std::string& lam,
                     const std::string& transform, std::uint64_t seed) {
            py::gil_scoped_release release;
            return lmc_run(p, n, lmc_config(folds, big_m, lam, transform), seed);
        },
        py::arg("problem"), py::arg("n"), py::arg("folds") = 5, py::arg("big_m") = 10000, py::arg("lam") = "cv",
        py::arg("transform") = "identity", py::arg("seed") = 0);

    // PCE
    m.def("basis_size", &basis_size, py::arg("d"), py::arg("p"), py::arg("cap") = 1'000'000);
    py::class_<PceModel>(m, "PceModel")
        .def_readonly("coeffs", &PceModel::coeffs)
        .def_readonly("lam", &PceModel::lambda)
        .def("predict", [](const PceModel& self, const Eigen::MatrixXd& x) { return pce_predict(self, x); })
        .def("moments", [](const PceModel& self) {
            const PceMoments mo = pce_moments(self);
            return py::make_tuple(mo.mean, mo.variance);
        });
    m.def(
        "pce_fit",
        [](const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int degree, const std::string& family,
           const std::string& lam) {
            PolynomialFamily fam;
            if (family == "legendre")
                fam = PolynomialFamily::Legendre;
            else if (family == "hermite")
                fam = PolynomialFamily::Hermite;
            else
                throw ConfigError("unknown polynomial family '" + family + "'");
            return pce_fit(x, y, build_basis(x.cols(), degree, fam), parse_lambda_strategy(lam));
        },
        py::arg("x"), py::arg("y"), py::arg("degree") = 2, py::arg("family") = "legendre", py::arg("lam") = "cv");

    // Harness
    m.def(
        "run_experiment",
        [](const std::string& problem, const std::vector<std::string>& methods, const std::vector<Eigen::Index>& budgets,
           int repeats, Eigen::Index folds, Eigen::Index big_m, const std::string& lam, const std::string& transform,
           std::optional<Eigen::Index> dim, std::uint64_t seed, int threads, bool timing) {
            ExperimentConfig cfg;
            cfg.problem.name = problem;
            cfg.problem.dim = dim;
            cfg.methods.clear();
            for (const auto& name : methods) cfg.methods.push_back(parse_method(name));
            cfg.budgets = budgets;
            cfg.repeats = repeats;
            cfg.folds = folds;
            cfg.surrogate_samples = big_m;
            cfg.lambda_strategy = parse_lambda_strategy(lam);
            cfg.transform = parse_transform(transform);
            cfg.base_seed = seed;
            cfg.threads = threads;
            cfg.record_wall_time = timing;
            cfg.validate();
            const auto p = make_problem(cfg.problem);
            std::vector<ConvergenceRecord> records;
            {
                py::gil_scoped_release release;
                records = run_experiment(cfg, *p);
            }
            py::list out;
            for (const auto& r : records) out.append(record_dict(r));
            return out;
        },
        py::arg("problem") = "linear", py::arg("methods") = std::vector<std::string>{"mc", "lmc"},
        py::arg("budgets") = std::vector<Eigen::Index>{50, 100}, py::arg("repeats") = 20, py::arg("folds") = 5,
        py::arg("big_m") = 10000, py::arg("lam") = "cv", py::arg("transform") = "identity", py::arg("dim") = py::none(),
        py::arg("seed") = 42, py::arg("threads") = 1, py::arg("timing") = true,
        "Per-repeat records as dicts with the CSV column names.");

    m.def(
        "summarize",
        [](const std::vector<py::dict>& records, double ref_mean, double ref_variance) {
            std::vector<ConvergenceRecord> rs;
            for (const auto& d : records) {
                ConvergenceRecord r;
                r.problem = d["problem"].cast<std::string>();
                r.method = d["method"].cast<std::string>();
                r.N = d["N"].cast<Eigen::Index>();
                r.repeat_index = d["repeat_index"].cast<int>();
                r.mean_est = d["mean_est"].cast<double>();
                r.var_est = d["var_est"].cast<double>();
                r.rel_err_mean = d["rel_err_mean"].cast<double>();
                r.rel_err_std = d["rel_err_std"].cast<double>();
                rs.push_back(r);
            }
            const ReferenceMoments ref{ReferenceMoments::Source::Analytic, ref_mean, ref_variance, ""};
            py::list out;
            for (const auto& row : summarize(rs, ref)) out.append(summary_dict(row));
            return out;
        },
        py::arg("records"), py::arg("ref_mean"), py::arg("ref_variance"));
}
