#include "lassomc/sampling.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "lassomc/error.hpp"

namespace lassomc {

namespace {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::mt19937_64 seeded_engine(std::uint64_t seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(splitmix64(seed)),
                      static_cast<std::uint32_t>(splitmix64(seed) >> 32)};
    return std::mt19937_64(seq);
}

}  // namespace

InputDistribution InputDistribution::normal(Eigen::VectorXd mean, Eigen::VectorXd scale) {
    InputDistribution d;
    d.kind = Kind::MultivariateNormal;
    d.dim = mean.size();
    d.mean = std::move(mean);
    d.scale = std::move(scale);
    d.validate();
    return d;
}

InputDistribution InputDistribution::normal(Eigen::Index dim, double mean, double scale) {
    if (dim < 1) throw ParameterError("normal distribution: dim must be >= 1");
    return normal(Eigen::VectorXd::Constant(dim, mean), Eigen::VectorXd::Constant(dim, scale));
}

InputDistribution InputDistribution::uniform(Eigen::Index dim, double low, double high) {
    InputDistribution d;
    d.kind = Kind::UniformIID;
    d.dim = dim;
    d.low = low;
    d.high = high;
    d.validate();
    return d;
}

void InputDistribution::validate() const {
    if (dim < 1) throw ParameterError("input distribution: dim must be >= 1");
    if (kind == Kind::MultivariateNormal) {
        if (mean.size() != dim || scale.size() != dim)
            throw ParameterError("normal distribution: mean and scale must have length dim");
        if (!mean.allFinite() || !scale.allFinite())
            throw ParameterError("normal distribution: non-finite parameters");
        if ((scale.array() < 0.0).any())
            throw ParameterError("normal distribution: negative standard deviation");
    } else {
        if (!std::isfinite(low) || !std::isfinite(high) || !(low < high))
            throw ParameterError("uniform distribution: requires finite low < high");
    }
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

RandomStream::RandomStream(std::uint64_t seed) : engine_(seeded_engine(seed)) {}

double RandomStream::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RandomStream::normal() {
    if (spare_normal_) {
        double z = *spare_normal_;
        spare_normal_.reset();
        return z;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_normal_ = r * std::sin(theta);
    return r * std::cos(theta);
}

std::uint64_t RandomStream::below(std::uint64_t bound) {
    // Rejection sampling removes modulo bias.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t v;
    do {
        v = engine_();
    } while (v >= limit);
    return v % bound;
}

SampleSet sample(const InputDistribution& dist, Eigen::Index n, std::uint64_t seed) {
    dist.validate();
    if (n < 0) throw ParameterError("sample: n must be >= 0, got " + std::to_string(n));

    SampleSet out;
    out.seed = seed;
    out.distribution = dist;
    out.inputs.resize(n, dist.dim);

    RandomStream rng(seed);
    // Row-major fill order so that the first k rows of a larger draw equal a draw of k rows.
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < dist.dim; ++j) {
            if (dist.kind == InputDistribution::Kind::MultivariateNormal)
                out.inputs(i, j) = dist.mean(j) + dist.scale(j) * rng.normal();
            else
                out.inputs(i, j) = dist.low + (dist.high - dist.low) * rng.uniform();
        }
    }
    return out;
}

CenteredSampleSet center_columns(const SampleSet& s) {
    if (s.inputs.rows() < 2) throw DegenerateInputError("center_columns: need at least 2 rows");
    if (s.outputs && s.outputs->size() != s.inputs.rows())
        throw ShapeError("center_columns: outputs length differs from input rows");

    CenteredSampleSet c;
    c.samples = s;
    c.input_offsets = s.inputs.colwise().mean().transpose();
    c.samples.inputs.rowwise() -= c.input_offsets.transpose();
    if (s.outputs) {
        c.output_offset = s.outputs->mean();
        c.samples.outputs->array() -= c.output_offset;
    }
    return c;
}

std::vector<Eigen::Index> shuffled_indices(Eigen::Index n, std::uint64_t seed) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    RandomStream rng(seed);
    for (std::size_t i = idx.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.below(i));
        std::swap(idx[i - 1], idx[j]);
    }
    return idx;
}

}  // namespace lassomc
