// uq: convergence studies and reference fixtures for the LMC estimator family.
//
//   uq bench linear --methods mc,lmc --budgets 50,100,200 --repeats 20 --out results.csv
//   uq reference fput --samples 100000 --seed 7 --out fixtures/fput_reference.txt

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lassomc/error.hpp"
#include "lassomc/harness.hpp"
#include "lassomc/problems.hpp"

using namespace lassomc;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

struct BenchArgs {
    std::string problem;
    std::vector<std::string> methods{"mc", "lmc"};
    std::vector<long long> budgets{50, 100, 200, 500, 1000};
    int repeats = 20;
    long long folds = 5;
    long long big_m = 10000;
    std::uint64_t seed = 42;
    std::string out;
    std::string json;
    std::string summary;
    long long dim = 0;
    double final_time = 0.0;
    std::string reference;
    std::string lambda = "cv";
    std::string transform = "identity";
    double split_fraction = 0.5;
    std::vector<double> candidates{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    int pce_degree = 2;
    int threads = 1;
    bool no_timing = false;
};

struct ReferenceArgs {
    std::string problem;
    std::uint64_t samples = 100000;
    std::uint64_t seed = 7;
    long long dim = 0;
    double final_time = 0.0;
    std::string out;
};

ProblemSpec problem_spec(const std::string& name, long long dim, double final_time, const std::string& reference) {
    ProblemSpec spec;
    spec.name = name;
    if (dim > 0) spec.dim = dim;
    if (final_time > 0.0) spec.final_time = final_time;
    if (!reference.empty()) {
        spec.reference_fixture = reference;
    } else if (name == "fput" && dim <= 0 && final_time <= 0.0) {
#ifdef LASSOMC_FIXTURE_DIR
        const std::filesystem::path frozen = std::filesystem::path(LASSOMC_FIXTURE_DIR) / "fput_reference.txt";
        if (std::filesystem::exists(frozen)) spec.reference_fixture = frozen;
#endif
    }
    return spec;
}

// The core rejects budgets that S does not divide; here they are rounded down.
std::vector<Eigen::Index> round_budgets(const std::vector<long long>& requested, long long folds, bool has_lmc) {
    std::vector<Eigen::Index> out;
    for (long long n : requested) {
        long long actual = n;
        if (has_lmc && folds > 0 && n % folds != 0) {
            actual = n - n % folds;
            std::cerr << "warning: budget " << n << " is not a multiple of S=" << folds << ", using N=" << actual
                      << "\n";
        }
        if (!out.empty() && actual == out.back()) {
            std::cerr << "warning: dropping duplicate budget N=" << actual << "\n";
            continue;
        }
        out.push_back(actual);
    }
    return out;
}

int run_bench(const BenchArgs& a) {
    ExperimentConfig cfg;
    cfg.problem = problem_spec(a.problem, a.dim, a.final_time, a.reference);
    cfg.methods.clear();
    for (const auto& m : a.methods) cfg.methods.push_back(parse_method(m));
    const bool has_lmc = std::find(cfg.methods.begin(), cfg.methods.end(), Method::Lmc) != cfg.methods.end();
    cfg.budgets = round_budgets(a.budgets, a.folds, has_lmc);
    cfg.repeats = a.repeats;
    cfg.folds = a.folds;
    cfg.surrogate_samples = a.big_m;
    cfg.base_seed = a.seed;
    cfg.lambda_strategy = parse_lambda_strategy(a.lambda);
    cfg.transform = parse_transform(a.transform);
    cfg.split_fraction = a.split_fraction;
    cfg.candidate_fractions = a.candidates;
    cfg.pce_degree = a.pce_degree;
    cfg.threads = a.threads;
    cfg.record_wall_time = !a.no_timing;
    cfg.validate();

    const auto problem = make_problem(cfg.problem);
    const ReferenceMoments ref = problem->reference();
    if (ref.available() && ref.mean == 0.0)
        std::cerr << "warning: reference mean of " << problem->id()
                  << " is 0; rel_err_mean holds the absolute error\n";

    const auto records = run_experiment(cfg, *problem);
    write_csv(a.out, records);
    if (!a.json.empty()) write_json(a.json, records);
    if (!a.summary.empty()) {
        std::vector<std::string> warnings;
        const auto rows = summarize(records, ref, &warnings);
        for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
        write_csv(a.summary, rows);
    }
    std::cerr << "wrote " << records.size() << " records to " << a.out << "\n";
    return kOk;
}

int run_reference(const ReferenceArgs& a) {
    const auto problem = make_problem(problem_spec(a.problem, a.dim, a.final_time, ""));
    const ReferenceFixture fx = estimate_reference(*problem, a.samples, a.seed);
    write_reference_fixture(a.out, fx);
    std::cerr << problem->id() << ": mean " << format_double(fx.mean) << ", variance " << format_double(fx.variance)
              << " from " << fx.samples << " samples\n";
    return kOk;
}

// Reads the flat key=value file and files every entry under the subcommand
// that named the file, so keys mirror that subcommand's flags.
class SubcommandConfig : public CLI::ConfigINI {
public:
    explicit SubcommandConfig(std::string sub) : sub_(std::move(sub)) {}

    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        auto items = CLI::ConfigINI::from_config(input);
        for (auto& item : items)
            if (item.parents.empty() && item.name != "++" && item.name != "--") item.parents = {sub_};
        return items;
    }

private:
    std::string sub_;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lasso Monte Carlo convergence studies"};
    app.require_subcommand(1);
    app.set_config("--config", "", "flat key=value file mirroring the bench flags; flags take precedence");
    app.config_formatter(std::make_shared<SubcommandConfig>("bench"));

    BenchArgs bench;
    auto* b = app.add_subcommand("bench", "run methods over a budget ladder and write per-repeat records");
    b->fallthrough();
    b->add_option("problem,--problem", bench.problem, "linear, sobol or fput");
    b->add_option("--methods", bench.methods, "comma list of mc,lmc,static-mfmc,adaptive-mfmc,biased-mfmc,lasso,pce")
        ->delimiter(',');
    b->add_option("--budgets", bench.budgets, "ascending budgets N")->delimiter(',');
    b->add_option("--repeats", bench.repeats, "repeats per (method, N)");
    b->add_option("--s-folds", bench.folds, "LMC fold count S");
    b->add_option("--big-m", bench.big_m, "surrogate-only sample count M");
    b->add_option("--seed", bench.seed, "base seed; repeat r uses seed + r");
    b->add_option("--out", bench.out, "per-repeat CSV");
    b->add_option("--json", bench.json, "per-repeat JSON");
    b->add_option("--summary", bench.summary, "per-(method, N) summary CSV");
    b->add_option("--dim", bench.dim, "input dimension (linear, sobol) or oscillator count (fput)");
    b->add_option("--final-time", bench.final_time, "fput final time");
    b->add_option("--reference", bench.reference, "reference fixture with frozen moments (fput)");
    b->add_option("--lambda", bench.lambda, "cv[:folds], sparsity[:fraction] or fixed:<value>");
    b->add_option("--transform", bench.transform, "identity or abs-shift[:shift]");
    b->add_option("--split-fraction", bench.split_fraction, "static MFMC training fraction");
    b->add_option("--candidate-fractions", bench.candidates, "adaptive MFMC training fractions")->delimiter(',');
    b->add_option("--pce-degree", bench.pce_degree, "total degree of the PCE basis");
    b->add_option("--threads", bench.threads, "worker threads");
    b->add_flag("--no-timing", bench.no_timing, "write wall_time_ms as 0 so reruns are byte-identical");

    ReferenceArgs reference;
    auto* r = app.add_subcommand("reference", "estimate reference moments by large-sample MC and write a fixture");
    r->add_option("problem", reference.problem, "linear, sobol or fput")->required();
    r->add_option("--samples", reference.samples, "sample count");
    r->add_option("--seed", reference.seed, "sampling seed");
    r->add_option("--dim", reference.dim, "input dimension or oscillator count");
    r->add_option("--final-time", reference.final_time, "fput final time");
    r->add_option("--out", reference.out, "fixture path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigError;
    }

    try {
        if (*b) return run_bench(bench);
        return run_reference(reference);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const ParameterError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntimeError;
    }
}
