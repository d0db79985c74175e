#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "lassomc/problem.hpp"
#include "lassomc/rk45.hpp"

namespace lassomc {

// ---------------------------------------------------------------------------
// Linear benchmark: f(x) = alpha . x with x ~ N(0, I)

/// (1, 1/2, 1/5, 1/10, 1/20, 1/50, 1/100, ..., 1/100) truncated or padded to d entries.
Eigen::VectorXd linear_weights(Eigen::Index d);

double linear_eval(const Eigen::VectorXd& alpha, const Eigen::Ref<const Eigen::VectorXd>& x);

class LinearProblem final : public Problem {
public:
    explicit LinearProblem(Eigen::Index d);
    explicit LinearProblem(Eigen::VectorXd alpha);

    std::string id() const override;
    const InputDistribution& distribution() const override { return dist_; }
    double evaluate(const Eigen::Ref<const Eigen::VectorXd>& x) const override;
    /// Mean 0 and variance sum(alpha^2), exact because the covariance is the identity.
    ReferenceMoments reference() const override;

    const Eigen::VectorXd& alpha() const { return alpha_; }

private:
    Eigen::VectorXd alpha_;
    InputDistribution dist_;
};

// ---------------------------------------------------------------------------
// Sobol g-function: f(x) = prod_i (|4 x_i - 2| + c_i) / (1 + c_i), x ~ U[0,1]^d

/// (1, 2, 5, 10, 20, 50, 100, 500, ..., 500) truncated or padded to d entries.
Eigen::VectorXd sobol_coefficients(Eigen::Index d);

/// Throws DomainError when some x_i lies outside [0, 1].
double sobol_eval(const Eigen::VectorXd& c, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Mean 1, variance prod_i (1 + 1 / (3 (1 + c_i)^2)) - 1.
ReferenceMoments sobol_reference(const Eigen::VectorXd& c);

/// Element-wise |x_i - 0.5|.
Eigen::VectorXd sobol_transform(const Eigen::VectorXd& x);

class SobolProblem final : public Problem {
public:
    explicit SobolProblem(Eigen::Index d);
    explicit SobolProblem(Eigen::VectorXd c);

    std::string id() const override;
    const InputDistribution& distribution() const override { return dist_; }
    double evaluate(const Eigen::Ref<const Eigen::VectorXd>& x) const override;
    ReferenceMoments reference() const override { return sobol_reference(c_); }

    const Eigen::VectorXd& coefficients() const { return c_; }

private:
    Eigen::VectorXd c_;
    InputDistribution dist_;
};

// ---------------------------------------------------------------------------
// FPUT lattice: P unit masses between fixed walls at 0 and 1.
//   x_j'' = k_j (l_{j+1} - l_j) + alpha k_j (l_{j+1}^2 - l_j^2),  l_j = x_j - x_{j-1}
// The state vector is (x_1..x_P, v_1..v_P).

struct FputParams {
    Eigen::VectorXd coupling;  // k'_1..k'_P
    double alpha = 0.5;

    /// Splits a (k'_1..k'_P, alpha) input vector.
    static FputParams from_input(const Eigen::Ref<const Eigen::VectorXd>& input);
};

void fput_rhs(const Eigen::VectorXd& state, const FputParams& params, Eigen::VectorXd& derivative);
Eigen::VectorXd fput_rhs(const Eigen::VectorXd& state, const FputParams& params);

/// x_j = j / (P + 1), v_j = sin(3 pi x_j) / 5.
Eigen::VectorXd fput_initial_state(Eigen::Index oscillators);

/// Conserved energy of the lattice: masses 1/k'_j with unit springs,
///   sum_j v_j^2 / (2 k'_j) + sum_{j=1}^{P+1} (l_j^2 / 2 + alpha l_j^3 / 3).
double fput_energy(const Eigen::VectorXd& state, const FputParams& params);

/// 1/2 sum_j v_j^2.
double fput_kinetic_energy(const Eigen::VectorXd& state);

struct FputSettings {
    Eigen::Index oscillators = 40;
    double final_time = 500.0;
    double input_scale = 1e-3;
    Rk45Options integrator{1e-6, 1e-9};
};

/// Kinetic energy at the final time, starting from fput_initial_state.
double fput_qoi(const FputParams& params, const FputSettings& settings = {});

class FputProblem final : public Problem {
public:
    explicit FputProblem(FputSettings settings = {});

    std::string id() const override;
    const InputDistribution& distribution() const override { return dist_; }
    double evaluate(const Eigen::Ref<const Eigen::VectorXd>& x) const override;
    ReferenceMoments reference() const override { return reference_; }

    void set_reference(ReferenceMoments r) { reference_ = std::move(r); }
    const FputSettings& settings() const { return settings_; }

private:
    FputSettings settings_;
    InputDistribution dist_;
    ReferenceMoments reference_;
};

// ---------------------------------------------------------------------------
// Frozen reference moments: plain-text "key = value" lines
// (problem, seed, samples, mean, variance); '#' starts a comment.

struct ReferenceFixture {
    std::string problem;
    std::uint64_t seed = 0;
    std::uint64_t samples = 0;
    double mean = 0.0;
    double variance = 0.0;

    ReferenceMoments moments() const;
};

ReferenceFixture read_reference_fixture(const std::filesystem::path& path);
void write_reference_fixture(const std::filesystem::path& path, const ReferenceFixture& fixture);

/// Large-sample MC estimate of a problem's moments with a fixed seed.
ReferenceFixture estimate_reference(const Problem& problem, std::uint64_t samples, std::uint64_t seed);

}  // namespace lassomc
