#include <doctest.h>

#include <cmath>

#include "lassomc/error.hpp"
#include "lassomc/pce.hpp"
#include "lassomc/sampling.hpp"
#include "support.hpp"

using namespace lassomc;

namespace {

struct Quadrature {
    Eigen::VectorXd nodes;
    Eigen::VectorXd weights;  // sum to 1
};

// Golub-Welsch from the three-term recurrence; independent of the library's evaluation.
Quadrature gauss(PolynomialFamily family, int n) {
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        const double b = family == PolynomialFamily::Legendre ? k / std::sqrt(4.0 * k * k - 1.0) : std::sqrt(double(k));
        j(k, k - 1) = j(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
    Quadrature q;
    q.nodes = es.eigenvalues();
    q.weights = es.eigenvectors().row(0).transpose().array().square();
    if (family == PolynomialFamily::Legendre) q.nodes = (q.nodes.array() + 1.0) / 2.0;  // to [0, 1]
    return q;
}

}  // namespace

TEST_CASE("basis sizes") {
    CHECK(basis_size(8, 3) == 165);
    CHECK(basis_size(8, 4) == 495);
    CHECK(basis_size(8, 2) == 45);
    CHECK(basis_size(400, 2) == 80601);
    CHECK(basis_size(5, 0) == 1);
    CHECK_THROWS_AS(basis_size(400, 3), CapacityError);
    CHECK_THROWS_AS(build_basis(400, 3, PolynomialFamily::Hermite), CapacityError);
    CHECK(build_basis(8, 3, PolynomialFamily::Legendre).size() == 165);
}

TEST_CASE("graded lexicographic order") {
    const PceBasis b = build_basis(2, 2, PolynomialFamily::Legendre);
    const std::vector<std::vector<int>> expected{{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
    REQUIRE(b.size() == 6);
    for (Eigen::Index i = 0; i < 6; ++i) CHECK(b.multi_index(i) == expected[std::size_t(i)]);
    CHECK(b.terms(0).empty());
    CHECK(b.terms(4).size() == 2);

    const PceBasis c = build_basis(3, 3, PolynomialFamily::Hermite);
    int prev = 0;
    for (Eigen::Index i = 0; i < c.size(); ++i) {
        const auto m = c.multi_index(i);
        int total = 0;
        for (int a : m) total += a;
        CHECK(total >= prev);
        if (i > 0 && total == prev) CHECK(c.multi_index(i - 1) > m);
        prev = total;
    }
}

TEST_CASE("univariate polynomials") {
    // P2(t) = (3t^2 - 1)/2 with t = 2x - 1
    CHECK(univariate_polynomial(PolynomialFamily::Legendre, 2, 0.75) == doctest::Approx(-0.125));
    CHECK(univariate_polynomial(PolynomialFamily::Legendre, 3, 1.0) == doctest::Approx(1.0));
    // He3(x) = x^3 - 3x
    CHECK(univariate_polynomial(PolynomialFamily::Hermite, 3, 2.0) == doctest::Approx(2.0));
    CHECK(univariate_polynomial(PolynomialFamily::Hermite, 0, 7.0) == 1.0);
    CHECK(univariate_norm(PolynomialFamily::Legendre, 3) == doctest::Approx(1.0 / 7));
    CHECK(univariate_norm(PolynomialFamily::Hermite, 4) == doctest::Approx(24.0));
}

TEST_CASE("basis is orthogonal with the stated norms") {
    for (auto family : {PolynomialFamily::Legendre, PolynomialFamily::Hermite}) {
        const PceBasis b = build_basis(2, 4, family);
        const Quadrature q = gauss(family, 6);
        Eigen::MatrixXd x(36, 2);
        Eigen::VectorXd w(36);
        for (int i = 0; i < 6; ++i)
            for (int k = 0; k < 6; ++k) {
                x.row(i * 6 + k) << q.nodes(i), q.nodes(k);
                w(i * 6 + k) = q.weights(i) * q.weights(k);
            }
        const Eigen::MatrixXd psi = b.evaluate(x);
        const Eigen::MatrixXd gram = psi.transpose() * w.asDiagonal() * psi;
        const Eigen::MatrixXd expected = b.norms().asDiagonal();
        CHECK((gram - expected).cwiseAbs().maxCoeff() < 1e-11 * b.norms().maxCoeff());
    }
}

TEST_CASE("evaluation errors") {
    const PceBasis b = build_basis(2, 2, PolynomialFamily::Legendre);
    Eigen::MatrixXd x(1, 2);
    x << 0.5, 1.5;
    CHECK_THROWS_AS(b.evaluate(x), DomainError);
    CHECK_THROWS_AS(b.evaluate(Eigen::MatrixXd::Zero(1, 3)), ShapeError);
}

TEST_CASE("degree-2 model is recovered with exact moments") {
    SUBCASE("uniform inputs") {
        const SampleSet s = sample(InputDistribution::uniform(3, 0.0, 1.0), 200, 5);
        const Eigen::MatrixXd& x = s.inputs;
        const Eigen::VectorXd y =
            2.0 + 3.0 * x.col(0).array() + x.col(0).array() * x.col(1).array() + x.col(2).array().square();
        const PceModel m = pce_fit(x, y, build_basis(3, 2, PolynomialFamily::Legendre), FixedLambda{0.0});
        const PceMoments mo = pce_moments(m);
        // E = 2 + 3/2 + 1/4 + 1/3; Var = 37/9 - 49/16 + 4/45
        CHECK(mo.mean == doctest::Approx(2.0 + 1.5 + 0.25 + 1.0 / 3).epsilon(1e-8));
        CHECK(mo.variance == doctest::Approx(37.0 / 9 - 49.0 / 16 + 4.0 / 45).epsilon(1e-8));
        CHECK((pce_predict(m, x) - y).cwiseAbs().maxCoeff() < 1e-7);
    }
    SUBCASE("normal inputs") {
        const SampleSet s = sample(InputDistribution::normal(2, 0.0, 1.0), 100, 6);
        const Eigen::MatrixXd& x = s.inputs;
        const Eigen::VectorXd y = 1.0 + x.col(0).array() + x.col(0).array() * x.col(1).array() + x.col(1).array().square();
        const PceModel m = pce_fit(x, y, build_basis(2, 2, PolynomialFamily::Hermite), FixedLambda{0.0});
        const PceMoments mo = pce_moments(m);
        CHECK(mo.mean == doctest::Approx(2.0).epsilon(1e-8));
        CHECK(mo.variance == doctest::Approx(4.0).epsilon(1e-8));
    }
}

TEST_CASE("large lambda leaves only the constant") {
    const SampleSet s = sample(InputDistribution::uniform(3, 0.0, 1.0), 50, 8);
    const Eigen::VectorXd y = s.inputs.col(0).array().exp();
    const PceModel m = pce_fit(s.inputs, y, build_basis(3, 2, PolynomialFamily::Legendre), FixedLambda{1e6});
    CHECK(m.coeffs.tail(m.coeffs.size() - 1).cwiseAbs().maxCoeff() == 0.0);
    CHECK(pce_moments(m).mean == doctest::Approx(y.mean()).epsilon(1e-14));
    CHECK(pce_moments(m).variance == 0.0);
}
