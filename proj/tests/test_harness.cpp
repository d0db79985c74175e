#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "lassomc/error.hpp"
#include "lassomc/harness.hpp"
#include "lassomc/problems.hpp"

using namespace lassomc;

namespace {

ExperimentConfig small_config() {
    ExperimentConfig cfg;
    cfg.problem.name = "linear";
    cfg.problem.dim = 10;
    cfg.methods = {Method::Mc, Method::Lmc, Method::StaticMfmc};
    cfg.budgets = {20, 40};
    cfg.repeats = 3;
    cfg.surrogate_samples = 400;
    cfg.lambda_strategy = SparsityTarget{0.95};
    cfg.record_wall_time = false;
    return cfg;
}

ConvergenceRecord record(double mean, double var) {
    ConvergenceRecord r;
    r.problem = "linear_d400";
    r.method = "mc";
    r.N = 100;
    r.mean_est = mean;
    r.var_est = var;
    return r;
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("method names round-trip") {
    for (Method m : {Method::Mc, Method::LassoSurrogate, Method::Lmc, Method::StaticMfmc, Method::AdaptiveMfmc,
                     Method::BiasedMfmc, Method::Pce})
        CHECK(parse_method(method_name(m)) == m);
    CHECK(parse_method("lasso_surrogate") == Method::LassoSurrogate);
    CHECK(parse_method("static_mfmc") == Method::StaticMfmc);
    CHECK_THROWS_AS(parse_method("qmc"), ConfigError);
    CHECK(parse_methods("mc,lmc").size() == 2);
}

TEST_CASE("lambda and transform parsing") {
    CHECK(std::get<CrossValidation>(parse_lambda_strategy("cv:10")).folds == 10);
    CHECK(std::get<SparsityTarget>(parse_lambda_strategy("sparsity")).fraction == doctest::Approx(0.95));
    CHECK(std::get<FixedLambda>(parse_lambda_strategy("fixed:0.25")).lambda == 0.25);
    CHECK_THROWS_AS(parse_lambda_strategy("ridge"), ConfigError);
    CHECK(parse_transform("abs-shift").kind == FeatureTransform::Kind::AbsShift);
    CHECK_THROWS_AS(parse_transform("log"), ConfigError);
}

TEST_CASE("validation") {
    ExperimentConfig cfg = small_config();
    CHECK_NOTHROW(cfg.validate());
    cfg.repeats = 1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = small_config();
    cfg.budgets = {40, 20};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = small_config();
    cfg.methods.clear();
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = small_config();
    cfg.budgets = {22, 40, 43};
    try {
        cfg.validate();
        FAIL("expected ParameterError");
    } catch (const ParameterError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("22") != std::string::npos);
        CHECK(msg.find("43") != std::string::npos);
    }
    cfg.methods = {Method::Mc};
    CHECK_NOTHROW(cfg.validate());
    ProblemSpec spec;
    spec.name = "rosenbrock";
    CHECK_THROWS_AS(make_problem(spec), ConfigError);
}

TEST_CASE("experiment cardinality and determinism") {
    const ExperimentConfig cfg = small_config();
    const auto a = run_experiment(cfg);
    CHECK(a.size() == 3 * 2 * 3);
    std::set<std::tuple<std::string, Eigen::Index, int>> cells;
    for (const auto& r : a) cells.insert({r.method, r.N, r.repeat_index});
    CHECK(cells.size() == a.size());
    CHECK(std::is_sorted(a.begin(), a.end(), [](const auto& x, const auto& y) {
        return std::tie(x.problem, x.method, x.N, x.repeat_index) < std::tie(y.problem, y.method, y.N, y.repeat_index);
    }));
    CHECK(to_csv(a) == to_csv(run_experiment(cfg)));
    ExperimentConfig threaded = cfg;
    threaded.threads = 3;
    CHECK(to_csv(a) == to_csv(run_experiment(threaded)));
    for (const auto& r : a) {
        CHECK(r.problem == "linear_d10");
        CHECK(r.wall_time_ms == 0.0);
        CHECK(r.chosen_n.has_value() == (r.method == "static-mfmc"));
    }
}

TEST_CASE("common random numbers across methods") {
    // Every method at a given repeat sees the same V draws, so MC and the LMC
    // zero-surrogate limit agree on the mean.
    ExperimentConfig cfg = small_config();
    cfg.methods = {Method::Mc, Method::Lmc};
    cfg.lambda_strategy = FixedLambda{1e12};
    const auto recs = run_experiment(cfg);
    for (std::size_t i = 0; i < recs.size() / 2; ++i) {
        const auto& lmc = recs[i];
        const auto& mc = recs[i + recs.size() / 2];
        REQUIRE(lmc.method == "lmc");
        REQUIRE(mc.method == "mc");
        CHECK(lmc.mean_est == doctest::Approx(mc.mean_est).epsilon(1e-12));
    }
}

TEST_CASE("relative errors") {
    const ReferenceMoments ref{ReferenceMoments::Source::Analytic, 2.0, 4.0, ""};
    const auto e = relative_errors(2.5, 9.0, ref);
    CHECK(e.mean == doctest::Approx(0.25));
    CHECK(e.std == doctest::Approx(0.5));
    CHECK_FALSE(e.mean_is_absolute);
    const ReferenceMoments zero{ReferenceMoments::Source::Analytic, 0.0, 4.0, ""};
    const auto z = relative_errors(-0.3, -1.0, zero);
    CHECK(z.mean == doctest::Approx(0.3));
    CHECK(z.mean_is_absolute);
    CHECK(z.std == doctest::Approx(1.0));  // negative variance counts as sd 0
}

TEST_CASE("summary statistics") {
    const ReferenceMoments ref{ReferenceMoments::Source::Analytic, 1.0, 1.0, ""};
    SUBCASE("two records") {
        std::vector<ConvergenceRecord> rs{record(1.1, 1.0), record(1.3, 1.0)};
        rs[0].rel_err_mean = 0.1;
        rs[1].rel_err_mean = 0.3;
        rs[1].repeat_index = 1;
        const auto rows = summarize(rs, ref);
        REQUIRE(rows.size() == 1);
        CHECK(rows[0].rel_err_mean_avg == doctest::Approx(0.2));
        CHECK(rows[0].rel_err_mean_sd == doctest::Approx(0.1414213562373095));
        CHECK(rows[0].var_est_sd == 0.0);
        CHECK(rows[0].repeats == 2);
    }
    SUBCASE("identical records") {
        const std::vector<ConvergenceRecord> rs(4, record(1.2, 0.9));
        const auto rows = summarize(rs, ref);
        CHECK(rows[0].mean_est_sd == 0.0);
        CHECK(rows[0].mse_mean == doctest::Approx(0.04));
    }
    SUBCASE("five-row MSE fixture") {
        const ReferenceMoments lin = LinearProblem(400).reference();
        std::vector<ConvergenceRecord> rs;
        const double means[] = {0.1, -0.2, 0.3, 0.0, 0.5};
        const double vars[] = {1.2, 1.5, 1.3, 1.4, 1.1};
        for (int i = 0; i < 5; ++i) {
            rs.push_back(record(means[i], vars[i]));
            const auto e = relative_errors(means[i], vars[i], lin);
            rs.back().rel_err_mean = e.mean;
            rs.back().rel_err_std = e.std;
        }
        const auto rows = summarize(rs, lin);
        REQUIRE(rows.size() == 1);
        CHECK(rows[0].mse_mean == doctest::Approx(0.078).epsilon(1e-12));
        CHECK(rows[0].mse_var == doctest::Approx(0.021789289999999996).epsilon(1e-12));
        CHECK(rows[0].rel_err_mean_avg == doctest::Approx(0.22).epsilon(1e-12));
        CHECK(rows[0].rel_err_mean_sd == doctest::Approx(0.19235384061671346).epsilon(1e-12));
        CHECK(rows[0].rel_err_std_avg == doctest::Approx(0.04869908908010605).epsilon(1e-12));
        CHECK(rows[0].mean_error_kind == "absolute");
    }
    SUBCASE("singleton groups are skipped") {
        std::vector<std::string> warnings;
        CHECK(summarize({record(1.0, 1.0)}, ref, &warnings).empty());
        CHECK(warnings.size() == 1);
    }
}

TEST_CASE("CSV output") {
    CHECK(to_csv(std::vector<ConvergenceRecord>{}) == "problem,method,N,repeat_index,mean_est,var_est,rel_err_mean,"
                                                      "rel_err_std,chosen_n,wall_time_ms\n");
    ConvergenceRecord r = record(0.1 + 0.2, 1.0 / 3.0);
    r.rel_err_mean = 1e-300;
    r.rel_err_std = 123456.789;
    r.chosen_n = 40;
    r.wall_time_ms = 1.5;
    const std::string text = to_csv({r, record(-2.5e-17, 7.0)});
    CHECK(count_lines(text) == 3);
    CHECK(count_lines(to_csv({r})) == 2);
    CHECK(text.find(",,") != std::string::npos);  // empty chosen_n

    const auto back = parse_records_csv(text);
    REQUIRE(back.size() == 2);
    CHECK(back[0].mean_est == r.mean_est);
    CHECK(back[0].var_est == r.var_est);
    CHECK(back[0].rel_err_mean == r.rel_err_mean);
    CHECK(back[0].rel_err_std == r.rel_err_std);
    CHECK(back[0].chosen_n == std::optional<Eigen::Index>(40));
    CHECK_FALSE(back[1].chosen_n.has_value());
    CHECK(back[1].mean_est == -2.5e-17);
    CHECK(to_csv(back) == text);

    CHECK_THROWS_AS(parse_records_csv("a,b,c\n"), FileError);
    CHECK(format_double(0.1) == "0.1");
}

TEST_CASE("files") {
    const auto dir = std::filesystem::temp_directory_path() / "lassomc_harness_test";
    std::filesystem::create_directories(dir);
    const std::vector<ConvergenceRecord> rs{record(1.0, 2.0), record(std::nan(""), 3.0)};
    write_csv(dir / "r.csv", rs);
    CHECK(read_records_csv(dir / "r.csv").size() == 2);
    write_json(dir / "r.json", rs);
    std::ifstream in(dir / "r.json");
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str().find("null") != std::string::npos);
    CHECK_THROWS_AS(write_csv(dir / "missing" / "r.csv", rs), FileError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("MC error falls with the budget") {
    ExperimentConfig cfg;
    cfg.problem.dim = 20;
    cfg.methods = {Method::Mc};
    cfg.budgets = {50, 5000};
    cfg.repeats = 200;
    cfg.record_wall_time = false;
    const auto problem = make_problem(cfg.problem);
    const auto rows = summarize(run_experiment(cfg, *problem), problem->reference());
    REQUIRE(rows.size() == 2);
    CHECK(rows[1].rel_err_std_avg < rows[0].rel_err_std_avg / 5);
    CHECK(rows[1].mse_mean < rows[0].mse_mean / 50);
    CHECK(rows[0].mean_error_kind == "absolute");
}
