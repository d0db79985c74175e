#include "lassomc/problems.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "lassomc/error.hpp"
#include "lassomc/estimators.hpp"

namespace lassomc {

namespace {

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

// ---------------------------------------------------------------------------

Eigen::VectorXd linear_weights(Eigen::Index d) {
    if (d < 1) throw ParameterError("linear problem: d must be >= 1");
    static constexpr double head[] = {1.0, 1.0 / 2, 1.0 / 5, 1.0 / 10, 1.0 / 20, 1.0 / 50};
    Eigen::VectorXd alpha = Eigen::VectorXd::Constant(d, 1.0 / 100);
    for (Eigen::Index i = 0; i < std::min<Eigen::Index>(d, 6); ++i) alpha(i) = head[i];
    return alpha;
}

double linear_eval(const Eigen::VectorXd& alpha, const Eigen::Ref<const Eigen::VectorXd>& x) {
    if (x.size() != alpha.size())
        throw ShapeError("linear_eval: input has length " + std::to_string(x.size()) + ", expected " +
                         std::to_string(alpha.size()));
    return alpha.dot(x);
}

LinearProblem::LinearProblem(Eigen::Index d) : LinearProblem(linear_weights(d)) {}

LinearProblem::LinearProblem(Eigen::VectorXd alpha)
    : alpha_(std::move(alpha)), dist_(InputDistribution::normal(alpha_.size(), 0.0, 1.0)) {}

std::string LinearProblem::id() const { return "linear_d" + std::to_string(alpha_.size()); }

double LinearProblem::evaluate(const Eigen::Ref<const Eigen::VectorXd>& x) const { return linear_eval(alpha_, x); }

ReferenceMoments LinearProblem::reference() const {
    return {ReferenceMoments::Source::Analytic, 0.0, alpha_.squaredNorm(), "mean 0, variance sum(alpha^2)"};
}

// ---------------------------------------------------------------------------

Eigen::VectorXd sobol_coefficients(Eigen::Index d) {
    if (d < 1) throw ParameterError("sobol problem: d must be >= 1");
    static constexpr double head[] = {1, 2, 5, 10, 20, 50, 100};
    Eigen::VectorXd c = Eigen::VectorXd::Constant(d, 500.0);
    for (Eigen::Index i = 0; i < std::min<Eigen::Index>(d, 7); ++i) c(i) = head[i];
    return c;
}

double sobol_eval(const Eigen::VectorXd& c, const Eigen::Ref<const Eigen::VectorXd>& x) {
    if (x.size() != c.size())
        throw ShapeError("sobol_eval: input has length " + std::to_string(x.size()) + ", expected " +
                         std::to_string(c.size()));
    double f = 1.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (!(x(i) >= 0.0 && x(i) <= 1.0))
            throw DomainError("sobol_eval: input " + std::to_string(i) + " = " + std::to_string(x(i)) +
                              " outside [0, 1]");
        f *= (std::abs(4.0 * x(i) - 2.0) + c(i)) / (1.0 + c(i));
    }
    return f;
}

ReferenceMoments sobol_reference(const Eigen::VectorXd& c) {
    double prod = 1.0;
    for (double ci : c) prod *= 1.0 + 1.0 / (3.0 * (1.0 + ci) * (1.0 + ci));
    return {ReferenceMoments::Source::Analytic, 1.0, prod - 1.0, "mean 1, variance prod(1 + 1/(3(1+c)^2)) - 1"};
}

Eigen::VectorXd sobol_transform(const Eigen::VectorXd& x) { return (x.array() - 0.5).abs().matrix(); }

SobolProblem::SobolProblem(Eigen::Index d) : SobolProblem(sobol_coefficients(d)) {}

SobolProblem::SobolProblem(Eigen::VectorXd c) : c_(std::move(c)), dist_(InputDistribution::uniform(c_.size(), 0.0, 1.0)) {
    if ((c_.array() < 0.0).any()) throw ParameterError("sobol problem: coefficients must be >= 0");
}

std::string SobolProblem::id() const { return "sobol_d" + std::to_string(c_.size()); }

double SobolProblem::evaluate(const Eigen::Ref<const Eigen::VectorXd>& x) const { return sobol_eval(c_, x); }

// ---------------------------------------------------------------------------

FputParams FputParams::from_input(const Eigen::Ref<const Eigen::VectorXd>& input) {
    if (input.size() < 3) throw ShapeError("fput: input needs P >= 2 couplings plus alpha");
    FputParams p;
    p.coupling = input.head(input.size() - 1);
    p.alpha = input(input.size() - 1);
    return p;
}

void fput_rhs(const Eigen::VectorXd& state, const FputParams& params, Eigen::VectorXd& derivative) {
    const Eigen::Index P = params.coupling.size();
    if (state.size() != 2 * P)
        throw ShapeError("fput_rhs: state has length " + std::to_string(state.size()) + ", expected " +
                         std::to_string(2 * P));
    derivative.resize(2 * P);
    derivative.head(P) = state.tail(P);
    // Walls: x_0 = 0, x_{P+1} = 1.
    double left = state(0);  // l_1
    for (Eigen::Index j = 0; j < P; ++j) {
        const double right = (j + 1 < P ? state(j + 1) : 1.0) - state(j);  // l_{j+2} in 1-based terms
        const double k = params.coupling(j);
        derivative(P + j) = k * (right - left) + params.alpha * k * (right * right - left * left);
        left = right;
    }
}

Eigen::VectorXd fput_rhs(const Eigen::VectorXd& state, const FputParams& params) {
    Eigen::VectorXd d;
    fput_rhs(state, params, d);
    return d;
}

Eigen::VectorXd fput_initial_state(Eigen::Index oscillators) {
    if (oscillators < 2) throw ParameterError("fput: need at least 2 oscillators");
    Eigen::VectorXd s(2 * oscillators);
    for (Eigen::Index j = 1; j <= oscillators; ++j) {
        const double x = static_cast<double>(j) / static_cast<double>(oscillators + 1);
        s(j - 1) = x;
        s(oscillators + j - 1) = 0.2 * std::sin(3.0 * std::numbers::pi * x);
    }
    return s;
}

double fput_energy(const Eigen::VectorXd& state, const FputParams& params) {
    const Eigen::Index P = params.coupling.size();
    if (state.size() != 2 * P) throw ShapeError("fput_energy: state length mismatch");
    double kinetic = 0.0;
    for (Eigen::Index j = 0; j < P; ++j) kinetic += state(P + j) * state(P + j) / (2.0 * params.coupling(j));
    double potential = 0.0;
    double prev = 0.0;
    for (Eigen::Index j = 0; j <= P; ++j) {
        const double pos = j < P ? state(j) : 1.0;
        const double l = pos - prev;
        potential += 0.5 * l * l + params.alpha * l * l * l / 3.0;
        prev = pos;
    }
    return kinetic + potential;
}

double fput_kinetic_energy(const Eigen::VectorXd& state) {
    const Eigen::Index P = state.size() / 2;
    return 0.5 * state.tail(P).squaredNorm();
}

double fput_qoi(const FputParams& params, const FputSettings& settings) {
    const Eigen::Index P = params.coupling.size();
    if ((params.coupling.array() <= 0.0).any()) throw DomainError("fput: couplings must be positive");
    const OdeRhs rhs = [&params](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) { fput_rhs(y, params, dy); };
    const Eigen::VectorXd end = rk45_integrate(rhs, fput_initial_state(P), 0.0, settings.final_time, settings.integrator);
    return fput_kinetic_energy(end);
}

FputProblem::FputProblem(FputSettings settings) : settings_(std::move(settings)) {
    if (settings_.oscillators < 2) throw ParameterError("fput: need at least 2 oscillators");
    if (!(settings_.final_time > 0.0)) throw ParameterError("fput: final time must be > 0");
    Eigen::VectorXd mean = Eigen::VectorXd::Ones(settings_.oscillators + 1);
    mean(settings_.oscillators) = 0.5;
    dist_ = InputDistribution::normal(mean, Eigen::VectorXd::Constant(mean.size(), settings_.input_scale));
}

std::string FputProblem::id() const {
    std::ostringstream s;
    s << "fput_P" << settings_.oscillators << "_T" << settings_.final_time;
    return s.str();
}

double FputProblem::evaluate(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    if (x.size() != settings_.oscillators + 1)
        throw ShapeError("fput: input has length " + std::to_string(x.size()) + ", expected " +
                         std::to_string(settings_.oscillators + 1));
    return fput_qoi(FputParams::from_input(x), settings_);
}

// ---------------------------------------------------------------------------

ReferenceMoments ReferenceFixture::moments() const {
    return {ReferenceMoments::Source::LargeMonteCarlo, mean, variance,
            "large MC: " + std::to_string(samples) + " samples, seed " + std::to_string(seed)};
}

ReferenceFixture read_reference_fixture(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FileError("cannot open reference fixture " + path.string());
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("reference fixture: malformed line '" + line + "'");
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    auto need = [&](const char* key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end()) throw ConfigError(std::string("reference fixture: missing key '") + key + "'");
        return it->second;
    };
    auto parse_double = [](const std::string& s) {
        double v = 0.0;
        auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
            throw ConfigError("reference fixture: bad number '" + s + "'");
        return v;
    };
    auto parse_u64 = [](const std::string& s) {
        std::uint64_t v = 0;
        auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
            throw ConfigError("reference fixture: bad integer '" + s + "'");
        return v;
    };
    ReferenceFixture f;
    f.problem = need("problem");
    f.seed = parse_u64(need("seed"));
    f.samples = parse_u64(need("samples"));
    f.mean = parse_double(need("mean"));
    f.variance = parse_double(need("variance"));
    return f;
}

void write_reference_fixture(const std::filesystem::path& path, const ReferenceFixture& f) {
    std::ofstream out(path);
    if (!out) throw FileError("cannot write reference fixture " + path.string());
    out << "problem = " << f.problem << "\n"
        << "seed = " << f.seed << "\n"
        << "samples = " << f.samples << "\n"
        << "mean = " << format_double(f.mean) << "\n"
        << "variance = " << format_double(f.variance) << "\n";
    if (!out) throw FileError("failed writing reference fixture " + path.string());
}

ReferenceFixture estimate_reference(const Problem& problem, std::uint64_t samples, std::uint64_t seed) {
    if (samples < 2) throw ParameterError("estimate_reference: need at least 2 samples");
    const SampleSet s = sample(problem.distribution(), static_cast<Eigen::Index>(samples), seed);
    const Eigen::VectorXd y = problem.evaluate_rows(s.inputs);
    return {problem.id(), seed, samples, mc_mean(y), mc_variance(y)};
}

}  // namespace lassomc
