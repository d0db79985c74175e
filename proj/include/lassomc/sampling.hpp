#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace lassomc {

/// Input distribution with independent coordinates.
///
/// Normal: N(mean, diag(scale^2)). A zero scale is allowed and yields a point mass.
/// Uniform: each coordinate i.i.d. U[low, high].
struct InputDistribution {
    enum class Kind { MultivariateNormal, UniformIID };

    Kind kind = Kind::MultivariateNormal;
    Eigen::Index dim = 1;
    Eigen::VectorXd mean;   // normal only, length dim
    Eigen::VectorXd scale;  // normal only, per-dimension standard deviation
    double low = 0.0;       // uniform only
    double high = 1.0;      // uniform only

    static InputDistribution normal(Eigen::VectorXd mean, Eigen::VectorXd scale);
    static InputDistribution normal(Eigen::Index dim, double mean, double scale);
    static InputDistribution uniform(Eigen::Index dim, double low, double high);

    /// Throws ParameterError when the invariants do not hold.
    void validate() const;
};

struct SampleSet {
    Eigen::MatrixXd inputs;                  // n x d, one draw per row
    std::optional<Eigen::VectorXd> outputs;  // length n when present
    std::uint64_t seed = 0;
    InputDistribution distribution;

    Eigen::Index size() const { return inputs.rows(); }
};

/// Mixes (seed, stream) into a new 64-bit seed. Used to give each consumer
/// (evaluation set, surrogate set, CV shuffles, repeats) its own stream.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

/// Random stream bound to one seed. Uniforms use the top 53 bits of a
/// 64-bit Mersenne twister; normals use the Box-Muller transform. Both are
/// spelled out here so the output does not depend on the standard library's
/// distribution implementations.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed);

    /// Uniform on [0, 1).
    double uniform();
    /// Standard normal.
    double normal();
    /// Uniform integer on [0, bound).
    std::uint64_t below(std::uint64_t bound);

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::optional<double> spare_normal_;
};

/// Draws n rows from dist. Deterministic in (dist, n, seed).
SampleSet sample(const InputDistribution& dist, Eigen::Index n, std::uint64_t seed);

struct CenteredSampleSet {
    SampleSet samples;
    Eigen::VectorXd input_offsets;
    double output_offset = 0.0;
};

/// Subtracts the column means from inputs (and the mean from outputs when present).
/// Throws DegenerateInputError for fewer than two rows.
CenteredSampleSet center_columns(const SampleSet& s);

/// Uniformly random permutation of 0..n-1 (Fisher-Yates).
std::vector<Eigen::Index> shuffled_indices(Eigen::Index n, std::uint64_t seed);

}  // namespace lassomc
