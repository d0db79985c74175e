#include "lassomc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>
#include <tuple>

#include <nlohmann/json.hpp>

#include "lassomc/error.hpp"
#include "lassomc/estimators.hpp"
#include "lassomc/lmc.hpp"
#include "lassomc/pce.hpp"
#include "lassomc/problems.hpp"
#include "lassomc/sampling.hpp"
#include "lassomc/surrogate.hpp"

namespace lassomc {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) out.push_back(item);
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& text, const std::string& what) {
    const std::string t = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
        throw ConfigError("cannot parse " + what + " from '" + text + "'");
    return v;
}

long long parse_int(const std::string& text, const std::string& what) {
    const std::string t = trim(text);
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
        throw ConfigError("cannot parse " + what + " from '" + text + "'");
    return v;
}

double sample_sd(const std::vector<double>& v, double mean) {
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double average(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

// Maps inputs to the polynomial family's native space.
std::pair<Eigen::MatrixXd, PolynomialFamily> pce_inputs(const InputDistribution& dist, const Eigen::MatrixXd& x) {
    Eigen::MatrixXd z = x;
    if (dist.kind == InputDistribution::Kind::UniformIID) {
        z = ((x.array() - dist.low) / (dist.high - dist.low)).matrix();
        return {z, PolynomialFamily::Legendre};
    }
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        if (dist.scale(j) <= 0.0) throw DegenerateInputError("pce: input " + std::to_string(j) + " has zero scale");
        z.col(j) = ((x.col(j).array() - dist.mean(j)) / dist.scale(j)).matrix();
    }
    return {z, PolynomialFamily::Hermite};
}

struct Cell {
    Method method;
    Eigen::Index n;
    int repeat;
};

ConvergenceRecord run_cell(const ExperimentConfig& cfg, const std::shared_ptr<const Problem>& problem,
                           const ReferenceMoments& ref, const Cell& cell) {
    CountingProblem counted(problem);
    const std::uint64_t seed = cfg.base_seed + static_cast<std::uint64_t>(cell.repeat);

    TrainConfig train = cfg.train;
    train.cv_seed = derive_seed(seed, streams::cross_validation);
    const Trainer trainer = lasso_trainer(cfg.lambda_strategy, cfg.transform, train);

    const auto start = std::chrono::steady_clock::now();
    const bool needs_w = cell.method != Method::Mc && cell.method != Method::Pce;
    const McData data = draw_data(counted, cell.n, needs_w ? cfg.surrogate_samples : 0, seed);

    double mean = 0.0;
    double variance = 0.0;
    std::optional<Eigen::Index> chosen;
    switch (cell.method) {
    case Method::Mc: {
        const auto r = simple_mc(data);
        mean = r.mean;
        variance = r.variance;
        break;
    }
    case Method::LassoSurrogate: {
        const auto r = surrogate_only(data, trainer);
        mean = r.mean;
        variance = r.variance;
        break;
    }
    case Method::Lmc: {
        LmcConfig lc;
        lc.folds = cfg.folds;
        lc.surrogate_samples = cfg.surrogate_samples;
        lc.lambda_strategy = cfg.lambda_strategy;
        lc.transform = cfg.transform;
        lc.train = train;
        lc.validate(cell.n);
        const auto r = lmc_estimate(data.v_inputs, data.v_outputs, data.w_inputs, lc, trainer);
        mean = r.mean;
        variance = r.variance;
        break;
    }
    case Method::StaticMfmc: {
        const auto r = static_mfmc(data, cfg.split_fraction, trainer);
        mean = r.mean;
        variance = r.variance;
        chosen = r.chosen_n;
        break;
    }
    case Method::AdaptiveMfmc: {
        const auto r = adaptive_mfmc(data, cfg.candidate_fractions, trainer);
        mean = r.mean;
        variance = r.variance;
        chosen = r.chosen_n;
        break;
    }
    case Method::BiasedMfmc: {
        const auto r = biased_mfmc(data, trainer);
        mean = r.mean;
        variance = r.variance;
        break;
    }
    case Method::Pce: {
        const auto [z, family] = pce_inputs(problem->distribution(), data.v_inputs);
        const PceBasis basis = build_basis(problem->dim(), cfg.pce_degree, family);
        const PceModel model = pce_fit(z, data.v_outputs, basis, cfg.lambda_strategy, train);
        const PceMoments mom = pce_moments(model);
        mean = mom.mean;
        variance = mom.variance;
        break;
    }
    }
    const auto stop = std::chrono::steady_clock::now();

    if (counted.calls() != static_cast<std::uint64_t>(cell.n))
        throw Error("budget accounting: " + method_name(cell.method) + " used " + std::to_string(counted.calls()) +
                    " true-model evaluations at N=" + std::to_string(cell.n));

    ConvergenceRecord rec;
    rec.problem = problem->id();
    rec.method = method_name(cell.method);
    rec.N = cell.n;
    rec.repeat_index = cell.repeat;
    rec.mean_est = mean;
    rec.var_est = variance;
    const RelativeErrors err = relative_errors(mean, variance, ref);
    rec.rel_err_mean = err.mean;
    rec.rel_err_std = err.std;
    rec.chosen_n = chosen;
    if (cfg.record_wall_time) rec.wall_time_ms = std::chrono::duration<double, std::milli>(stop - start).count();
    return rec;
}

}  // namespace

std::string method_name(Method m) {
    switch (m) {
    case Method::Mc: return "mc";
    case Method::LassoSurrogate: return "lasso";
    case Method::Lmc: return "lmc";
    case Method::StaticMfmc: return "static-mfmc";
    case Method::AdaptiveMfmc: return "adaptive-mfmc";
    case Method::BiasedMfmc: return "biased-mfmc";
    case Method::Pce: return "pce";
    }
    return "?";
}

Method parse_method(const std::string& name) {
    std::string n = trim(name);
    std::replace(n.begin(), n.end(), '_', '-');
    if (n == "mc") return Method::Mc;
    if (n == "lasso" || n == "lasso-surrogate") return Method::LassoSurrogate;
    if (n == "lmc") return Method::Lmc;
    if (n == "static-mfmc") return Method::StaticMfmc;
    if (n == "adaptive-mfmc") return Method::AdaptiveMfmc;
    if (n == "biased-mfmc") return Method::BiasedMfmc;
    if (n == "pce") return Method::Pce;
    throw ConfigError("unknown method '" + name + "'");
}

std::vector<Method> parse_methods(const std::string& comma_list) {
    std::vector<Method> out;
    for (const auto& item : split(comma_list, ',')) out.push_back(parse_method(item));
    if (out.empty()) throw ConfigError("no methods given");
    return out;
}

LambdaStrategy parse_lambda_strategy(const std::string& text) {
    const std::string t = trim(text);
    const auto colon = t.find(':');
    const std::string kind = t.substr(0, colon);
    const std::string arg = colon == std::string::npos ? std::string() : t.substr(colon + 1);
    if (kind == "cv") return CrossValidation{arg.empty() ? 5 : static_cast<int>(parse_int(arg, "cv folds"))};
    if (kind == "sparsity") return SparsityTarget{arg.empty() ? 0.95 : parse_double(arg, "sparsity fraction")};
    if (kind == "fixed") {
        if (arg.empty()) throw ConfigError("fixed lambda needs a value, e.g. fixed:0.01");
        return FixedLambda{parse_double(arg, "lambda")};
    }
    throw ConfigError("unknown lambda strategy '" + text + "'");
}

FeatureTransform parse_transform(const std::string& text) {
    const std::string t = trim(text);
    if (t == "identity") return FeatureTransform::identity();
    if (t == "abs-shift" || t == "abs_shift") return FeatureTransform::abs_shift(0.5);
    if (t.rfind("abs-shift:", 0) == 0 || t.rfind("abs_shift:", 0) == 0)
        return FeatureTransform::abs_shift(parse_double(t.substr(10), "transform shift"));
    throw ConfigError("unknown transform '" + text + "'");
}

std::shared_ptr<const Problem> make_problem(const ProblemSpec& spec) {
    if (spec.name == "linear") return std::make_shared<LinearProblem>(spec.dim.value_or(400));
    if (spec.name == "sobol") return std::make_shared<SobolProblem>(spec.dim.value_or(400));
    if (spec.name == "fput") {
        FputSettings s;
        if (spec.dim) s.oscillators = *spec.dim;
        if (spec.final_time) s.final_time = *spec.final_time;
        auto p = std::make_shared<FputProblem>(s);
        if (spec.reference_fixture) {
            const ReferenceFixture fx = read_reference_fixture(*spec.reference_fixture);
            if (fx.problem != p->id())
                throw ConfigError("reference fixture is for '" + fx.problem + "', problem is '" + p->id() + "'");
            p->set_reference(fx.moments());
        }
        return p;
    }
    throw ConfigError("unknown problem '" + spec.name + "' (expected linear, sobol or fput)");
}

void ExperimentConfig::validate() const {
    if (methods.empty()) throw ConfigError("no methods given");
    if (budgets.empty()) throw ConfigError("no budgets given");
    if (repeats < 2) throw ConfigError("repeats must be >= 2");
    if (threads < 1) throw ConfigError("threads must be >= 1");
    if (surrogate_samples < 1) throw ConfigError("surrogate sample count M must be >= 1");
    for (std::size_t i = 0; i < budgets.size(); ++i) {
        if (budgets[i] < 2) throw ConfigError("budgets must be >= 2");
        if (i > 0 && budgets[i] <= budgets[i - 1]) throw ConfigError("budgets must be strictly ascending");
    }
    if (std::find(methods.begin(), methods.end(), Method::Lmc) != methods.end()) {
        if (folds < 2) throw ConfigError("S must be >= 2");
        std::string bad;
        for (auto n : budgets)
            if (n % folds != 0) bad += (bad.empty() ? "" : ", ") + std::to_string(n);
        if (!bad.empty())
            throw ParameterError("budgets not divisible by S=" + std::to_string(folds) + ": " + bad);
    }
    if (!(split_fraction > 0.0 && split_fraction < 1.0)) throw ConfigError("split fraction must lie in (0, 1)");
    if (candidate_fractions.empty()) throw ConfigError("candidate fractions must not be empty");
    for (double f : candidate_fractions)
        if (!(f > 0.0 && f < 1.0)) throw ConfigError("candidate fractions must lie in (0, 1)");
    if (pce_degree < 0) throw ConfigError("pce degree must be >= 0");
    train.validate();
}

RelativeErrors relative_errors(double mean_est, double var_est, const ReferenceMoments& ref) {
    if (!ref.available()) throw ParameterError("relative errors need reference moments");
    RelativeErrors e;
    const double abs_mean = std::abs(mean_est - ref.mean);
    if (ref.mean == 0.0) {
        e.mean = abs_mean;
        e.mean_is_absolute = true;
    } else {
        e.mean = abs_mean / std::abs(ref.mean);
    }
    const double sd = std::sqrt(ref.variance);
    e.std = std::abs(std::sqrt(std::max(var_est, 0.0)) - sd) / sd;
    return e;
}

std::vector<ConvergenceRecord> run_experiment(const ExperimentConfig& cfg, const Problem& problem) {
    cfg.validate();
    const ReferenceMoments ref = problem.reference();
    if (!ref.available())
        throw ConfigError("problem '" + problem.id() + "' has no reference moments (supply a reference fixture)");
    // Non-owning handle; problem outlives the call.
    const std::shared_ptr<const Problem> shared(&problem, [](const Problem*) {});

    std::vector<Cell> cells;
    for (Method m : cfg.methods)
        for (auto n : cfg.budgets)
            for (int r = 0; r < cfg.repeats; ++r) cells.push_back({m, n, r});

    std::vector<ConvergenceRecord> records(cells.size());
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;
    auto worker = [&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) {
            try {
                records[i] = run_cell(cfg, shared, ref, cells[i]);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                next = cells.size();
            }
        }
    };
    const auto workers = std::min<std::size_t>(static_cast<std::size_t>(cfg.threads), cells.size());
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    std::sort(records.begin(), records.end(), [](const ConvergenceRecord& a, const ConvergenceRecord& b) {
        return std::tie(a.problem, a.method, a.N, a.repeat_index) < std::tie(b.problem, b.method, b.N, b.repeat_index);
    });
    return records;
}

std::vector<ConvergenceRecord> run_experiment(const ExperimentConfig& cfg) {
    const auto problem = make_problem(cfg.problem);
    return run_experiment(cfg, *problem);
}

std::vector<SummaryRow> summarize(const std::vector<ConvergenceRecord>& records, const ReferenceMoments& ref,
                                  std::vector<std::string>* warnings) {
    std::map<std::tuple<std::string, std::string, Eigen::Index>, std::vector<const ConvergenceRecord*>> groups;
    for (const auto& r : records) groups[{r.problem, r.method, r.N}].push_back(&r);

    std::vector<SummaryRow> rows;
    for (const auto& [key, group] : groups) {
        if (group.size() < 2) {
            if (warnings)
                warnings->push_back("skipping " + std::get<1>(key) + " at N=" + std::to_string(std::get<2>(key)) +
                                    ": fewer than two repeats");
            continue;
        }
        std::vector<double> em, es, mu, var;
        double se_mean = 0.0;
        double se_var = 0.0;
        for (const auto* r : group) {
            em.push_back(r->rel_err_mean);
            es.push_back(r->rel_err_std);
            mu.push_back(r->mean_est);
            var.push_back(r->var_est);
            se_mean += (r->mean_est - ref.mean) * (r->mean_est - ref.mean);
            se_var += (r->var_est - ref.variance) * (r->var_est - ref.variance);
        }
        SummaryRow row;
        row.problem = std::get<0>(key);
        row.method = std::get<1>(key);
        row.N = std::get<2>(key);
        row.repeats = static_cast<int>(group.size());
        row.rel_err_mean_avg = average(em);
        row.rel_err_mean_sd = sample_sd(em, row.rel_err_mean_avg);
        row.rel_err_std_avg = average(es);
        row.rel_err_std_sd = sample_sd(es, row.rel_err_std_avg);
        row.mean_est_avg = average(mu);
        row.mean_est_sd = sample_sd(mu, row.mean_est_avg);
        row.var_est_avg = average(var);
        row.var_est_sd = sample_sd(var, row.var_est_avg);
        row.mse_mean = se_mean / static_cast<double>(group.size());
        row.mse_var = se_var / static_cast<double>(group.size());
        row.mean_error_kind = ref.mean == 0.0 ? "absolute" : "relative";
        rows.push_back(row);
    }
    return rows;
}

const std::vector<std::string> record_columns{"problem",     "method",      "N",        "repeat_index",
                                              "mean_est",    "var_est",     "rel_err_mean", "rel_err_std",
                                              "chosen_n",    "wall_time_ms"};
const std::vector<std::string> summary_columns{
    "problem",     "method",       "N",          "repeats",  "rel_err_mean_avg", "rel_err_mean_sd",
    "rel_err_std_avg", "rel_err_std_sd", "mean_est_avg", "mean_est_sd", "var_est_avg", "var_est_sd",
    "mse_mean",    "mse_var",      "mean_error_kind"};

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

namespace {

std::string header(const std::vector<std::string>& cols) {
    std::string h;
    for (std::size_t i = 0; i < cols.size(); ++i) h += (i ? "," : "") + cols[i];
    return h + "\n";
}

std::vector<std::string> record_fields(const ConvergenceRecord& r) {
    return {r.problem,
            r.method,
            std::to_string(r.N),
            std::to_string(r.repeat_index),
            format_double(r.mean_est),
            format_double(r.var_est),
            format_double(r.rel_err_mean),
            format_double(r.rel_err_std),
            r.chosen_n ? std::to_string(*r.chosen_n) : std::string(),
            format_double(r.wall_time_ms)};
}

std::vector<std::string> summary_fields(const SummaryRow& r) {
    return {r.problem,
            r.method,
            std::to_string(r.N),
            std::to_string(r.repeats),
            format_double(r.rel_err_mean_avg),
            format_double(r.rel_err_mean_sd),
            format_double(r.rel_err_std_avg),
            format_double(r.rel_err_std_sd),
            format_double(r.mean_est_avg),
            format_double(r.mean_est_sd),
            format_double(r.var_est_avg),
            format_double(r.var_est_sd),
            format_double(r.mse_mean),
            format_double(r.mse_var),
            r.mean_error_kind};
}

std::string join_row(const std::vector<std::string>& fields) {
    std::string line;
    for (std::size_t i = 0; i < fields.size(); ++i) line += (i ? "," : "") + fields[i];
    return line + "\n";
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FileError("cannot open '" + path.string() + "' for writing");
    out << text;
    out.flush();
    if (!out) throw FileError("write to '" + path.string() + "' failed");
}

// nlohmann prints non-finite doubles as null; keep that explicit.
nlohmann::json number(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

double field_double(const std::string& s) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw FileError("bad number '" + s + "' in CSV");
    return v;
}

long long field_int(const std::string& s) {
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) throw FileError("bad integer '" + s + "' in CSV");
    return v;
}

}  // namespace

std::string to_csv(const std::vector<ConvergenceRecord>& records) {
    std::string text = header(record_columns);
    for (const auto& r : records) text += join_row(record_fields(r));
    return text;
}

std::string to_csv(const std::vector<SummaryRow>& rows) {
    std::string text = header(summary_columns);
    for (const auto& r : rows) text += join_row(summary_fields(r));
    return text;
}

void write_csv(const std::filesystem::path& path, const std::vector<ConvergenceRecord>& records) {
    write_text(path, to_csv(records));
}

void write_csv(const std::filesystem::path& path, const std::vector<SummaryRow>& rows) {
    write_text(path, to_csv(rows));
}

void write_json(const std::filesystem::path& path, const std::vector<ConvergenceRecord>& records) {
    auto arr = nlohmann::json::array();
    for (const auto& r : records) {
        nlohmann::json o;
        o["problem"] = r.problem;
        o["method"] = r.method;
        o["N"] = r.N;
        o["repeat_index"] = r.repeat_index;
        o["mean_est"] = number(r.mean_est);
        o["var_est"] = number(r.var_est);
        o["rel_err_mean"] = number(r.rel_err_mean);
        o["rel_err_std"] = number(r.rel_err_std);
        o["chosen_n"] = r.chosen_n ? nlohmann::json(*r.chosen_n) : nlohmann::json(nullptr);
        o["wall_time_ms"] = number(r.wall_time_ms);
        arr.push_back(std::move(o));
    }
    write_text(path, arr.dump(2) + "\n");
}

void write_json(const std::filesystem::path& path, const std::vector<SummaryRow>& rows) {
    auto arr = nlohmann::json::array();
    for (const auto& r : rows) {
        nlohmann::json o;
        o["problem"] = r.problem;
        o["method"] = r.method;
        o["N"] = r.N;
        o["repeats"] = r.repeats;
        o["rel_err_mean_avg"] = number(r.rel_err_mean_avg);
        o["rel_err_mean_sd"] = number(r.rel_err_mean_sd);
        o["rel_err_std_avg"] = number(r.rel_err_std_avg);
        o["rel_err_std_sd"] = number(r.rel_err_std_sd);
        o["mean_est_avg"] = number(r.mean_est_avg);
        o["mean_est_sd"] = number(r.mean_est_sd);
        o["var_est_avg"] = number(r.var_est_avg);
        o["var_est_sd"] = number(r.var_est_sd);
        o["mse_mean"] = number(r.mse_mean);
        o["mse_var"] = number(r.mse_var);
        o["mean_error_kind"] = r.mean_error_kind;
        arr.push_back(std::move(o));
    }
    write_text(path, arr.dump(2) + "\n");
}

std::vector<ConvergenceRecord> parse_records_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw FileError("empty CSV");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (split(line, ',') != record_columns) throw FileError("CSV header does not match the record schema");
    std::vector<ConvergenceRecord> out;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != record_columns.size()) throw FileError("CSV row has " + std::to_string(f.size()) + " fields");
        ConvergenceRecord r;
        r.problem = f[0];
        r.method = f[1];
        r.N = static_cast<Eigen::Index>(field_int(f[2]));
        r.repeat_index = static_cast<int>(field_int(f[3]));
        r.mean_est = field_double(f[4]);
        r.var_est = field_double(f[5]);
        r.rel_err_mean = field_double(f[6]);
        r.rel_err_std = field_double(f[7]);
        if (!f[8].empty()) r.chosen_n = static_cast<Eigen::Index>(field_int(f[8]));
        r.wall_time_ms = field_double(f[9]);
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<ConvergenceRecord> read_records_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_records_csv(ss.str());
}

}  // namespace lassomc
