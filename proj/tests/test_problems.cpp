#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "lassomc/error.hpp"
#include "lassomc/estimators.hpp"
#include "lassomc/problems.hpp"

using namespace lassomc;

TEST_CASE("linear weights and reference") {
    const Eigen::VectorXd a = linear_weights(400);
    CHECK(a(0) == 1.0);
    CHECK(a(1) == 0.5);
    CHECK(a(5) == doctest::Approx(0.02));
    CHECK(a(6) == doctest::Approx(0.01));
    CHECK(a(399) == doctest::Approx(0.01));
    // 1 + 1/4 + 1/25 + 1/100 + 1/400 + 1/2500 + 394/10000
    const LinearProblem p(400);
    CHECK(p.reference().variance == doctest::Approx(1.3423).epsilon(1e-12));
    CHECK(p.reference().mean == 0.0);
    CHECK(linear_weights(3).size() == 3);
    CHECK_THROWS_AS(linear_weights(0), ParameterError);
    CHECK_THROWS_AS(p.evaluate(Eigen::VectorXd::Zero(3)), ShapeError);
}

TEST_CASE("sobol reference matches the closed form and large MC") {
    const Eigen::VectorXd c = sobol_coefficients(10);
    CHECK(c(0) == 1.0);
    CHECK(c(6) == 100.0);
    CHECK(c(9) == 500.0);
    // Product over i of (1 + 1/(3(1+c_i)^2)) for c = (1, 2, 5, 10, 20, 50, 100, 500, 500, 500).
    double prod = 1.0;
    for (double ci : {1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 500.0, 500.0, 500.0})
        prod *= 1.0 + 1.0 / (3.0 * (1.0 + ci) * (1.0 + ci));
    const SobolProblem p(10);
    CHECK(p.reference().mean == 1.0);
    CHECK(p.reference().variance == doctest::Approx(prod - 1.0).epsilon(1e-14));

    const ReferenceFixture mc = estimate_reference(p, 200000, 3);
    CHECK(std::abs(mc.mean - 1.0) < 4 * std::sqrt(prod - 1.0) / std::sqrt(200000.0));
    CHECK(mc.variance == doctest::Approx(prod - 1.0).epsilon(0.02));
}

TEST_CASE("sobol evaluation") {
    const Eigen::VectorXd c = sobol_coefficients(2);
    Eigen::VectorXd x(2);
    x << 0.5, 0.5;
    CHECK(sobol_eval(c, x) == doctest::Approx(1.0 / 2 * 2.0 / 3));
    x << 0.0, 1.0;
    CHECK(sobol_eval(c, x) == doctest::Approx(3.0 / 2 * 4.0 / 3));
    // Symmetric about 1/2.
    Eigen::VectorXd y(2);
    x << 0.1, 0.7;
    y << 0.9, 0.3;
    CHECK(sobol_eval(c, x) == doctest::Approx(sobol_eval(c, y)).epsilon(1e-15));
    x << 1.2, 0.5;
    CHECK_THROWS_AS(sobol_eval(c, x), DomainError);
    x << 0.5, std::nan("");
    CHECK_THROWS_AS(sobol_eval(c, x), DomainError);
    CHECK((sobol_transform(y).array() - Eigen::Array2d(0.4, 0.2)).abs().maxCoeff() < 1e-15);
}

TEST_CASE("fput right-hand side at rest") {
    // Equally spaced masses feel no force.
    const FputParams p{Eigen::VectorXd::Constant(5, 1.3), 0.5};
    Eigen::VectorXd s = fput_initial_state(5);
    s.tail(5).setZero();
    CHECK(fput_rhs(s, p).cwiseAbs().maxCoeff() < 1e-14);
    CHECK_THROWS_AS(fput_rhs(Eigen::VectorXd::Zero(3), p), ShapeError);
}

TEST_CASE("fput initial state") {
    const Eigen::VectorXd s = fput_initial_state(40);
    CHECK(s(0) == doctest::Approx(1.0 / 41));
    CHECK(s(39) == doctest::Approx(40.0 / 41));
    CHECK(s(40) == doctest::Approx(0.2 * std::sin(3 * M_PI / 41)));
}

TEST_CASE("fput conserves energy") {
    for (double alpha : {0.0, 0.5}) {
        Eigen::VectorXd k(8);
        k << 1.0, 1.001, 0.999, 1.002, 0.998, 1.0005, 0.9995, 1.001;
        const FputParams p{k, alpha};
        const OdeRhs rhs = [&p](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) { fput_rhs(y, p, dy); };
        const Eigen::VectorXd y0 = fput_initial_state(8);
        Rk45Options o;
        o.rtol = 1e-8;
        o.atol = 1e-11;
        const Eigen::VectorXd y1 = rk45_integrate(rhs, y0, 0.0, 50.0, o);
        const double e0 = fput_energy(y0, p), e1 = fput_energy(y1, p);
        CHECK(std::abs(e1 - e0) / e0 < 1e-6);
    }
}

TEST_CASE("fput problem") {
    FputSettings st;
    st.oscillators = 6;
    st.final_time = 20.0;
    const FputProblem p(st);
    CHECK(p.dim() == 7);
    CHECK(p.id() == "fput_P6_T20");
    CHECK_FALSE(p.reference().available());
    Eigen::VectorXd x = Eigen::VectorXd::Ones(7);
    x(6) = 0.5;
    const double q = p.evaluate(x);
    CHECK(q > 0.0);
    CHECK(q == p.evaluate(x));  // deterministic
    CHECK_THROWS_AS(p.evaluate(Eigen::VectorXd::Ones(3)), ShapeError);
    x(0) = -1.0;
    CHECK_THROWS_AS(p.evaluate(x), DomainError);
    CHECK(FputProblem().id() == "fput_P40_T500");
}

TEST_CASE("reference fixtures round-trip") {
    const auto path = std::filesystem::temp_directory_path() / "lassomc_fixture_test.txt";
    const ReferenceFixture f{"fput_P40_T500", 7, 100000, 0.11704758215018686, 2.3471005028003434e-05};
    write_reference_fixture(path, f);
    const ReferenceFixture g = read_reference_fixture(path);
    CHECK(g.problem == f.problem);
    CHECK(g.seed == 7);
    CHECK(g.samples == 100000);
    CHECK(g.mean == f.mean);
    CHECK(g.variance == f.variance);
    CHECK(g.moments().source == ReferenceMoments::Source::LargeMonteCarlo);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(read_reference_fixture(path), FileError);
}

TEST_CASE("frozen fput fixture is readable") {
    const ReferenceFixture f = read_reference_fixture(LASSOMC_FIXTURE_DIR "/fput_reference.txt");
    CHECK(f.problem == "fput_P40_T500");
    CHECK(f.samples == 100000);
    CHECK(f.mean > 0.0);
    CHECK(f.variance > 0.0);
}
