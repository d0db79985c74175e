#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lassomc/lasso.hpp"

namespace lassomc {

/// Orthogonal family matching the input density.
///   Legendre: inputs uniform on [0,1], mapped to t = 2x - 1; E[P_n^2] = 1/(2n+1).
///   Hermite (probabilists'): inputs standard normal; E[He_n^2] = n!.
enum class PolynomialFamily { Legendre, Hermite };

/// Value of the degree-n univariate polynomial of the family at a native-space input.
double univariate_polynomial(PolynomialFamily family, int degree, double x);
double univariate_norm(PolynomialFamily family, int degree);

/// Total-degree truncated tensor basis. Multi-indices are kept sparse as
/// (coordinate, degree) pairs with degree > 0, in graded lexicographic order:
/// by total degree, then lexicographically descending within a degree.
/// Index 0 is the constant polynomial.
class PceBasis {
public:
    using Term = std::pair<Eigen::Index, int>;

    PceBasis() = default;
    PceBasis(Eigen::Index dim, int degree, PolynomialFamily family, std::vector<std::vector<Term>> terms);

    Eigen::Index dim() const { return dim_; }
    int degree() const { return degree_; }
    PolynomialFamily family() const { return family_; }
    Eigen::Index size() const { return static_cast<Eigen::Index>(terms_.size()); }

    /// Dense multi-index (alpha_1..alpha_d) of basis element i.
    std::vector<int> multi_index(Eigen::Index i) const;
    const std::vector<Term>& terms(Eigen::Index i) const { return terms_[static_cast<std::size_t>(i)]; }
    /// E[Psi_i^2] under the input density.
    const Eigen::VectorXd& norms() const { return norms_; }

    /// n x P matrix of basis values. Throws DomainError for Legendre inputs outside [0, 1].
    Eigen::MatrixXd evaluate(const Eigen::MatrixXd& x) const;

private:
    Eigen::Index dim_ = 0;
    int degree_ = 0;
    PolynomialFamily family_ = PolynomialFamily::Legendre;
    std::vector<std::vector<Term>> terms_;
    Eigen::VectorXd norms_;
};

/// (d + p)! / (p! d!), or CapacityError when it exceeds cap.
std::uint64_t basis_size(Eigen::Index d, int p, std::uint64_t cap = 1'000'000);

PceBasis build_basis(Eigen::Index d, int p, PolynomialFamily family, std::uint64_t cap = 1'000'000);

struct PceModel {
    PceBasis basis;
    Eigen::VectorXd coeffs;  // basis order; coeffs(0) multiplies the constant
    double lambda = 0.0;
};

/// Lasso fit of the non-constant coefficients; the constant absorbs the
/// centering offsets so it is never shrunk.
PceModel pce_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const PceBasis& basis,
                 const LambdaStrategy& strategy, const TrainConfig& cfg = {});

Eigen::VectorXd pce_predict(const PceModel& m, const Eigen::MatrixXd& x);

struct PceMoments {
    double mean = 0.0;
    double variance = 0.0;
};

/// mean = coeffs(0); variance = sum_{i>0} coeffs(i)^2 E[Psi_i^2].
PceMoments pce_moments(const PceModel& m);

}  // namespace lassomc
