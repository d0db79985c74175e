#include "lassomc/pce.hpp"

#include <string>

#include "lassomc/error.hpp"

namespace lassomc {

namespace {

// Fills values[0..degree] with the family's polynomials at native-space x.
void univariate_table(PolynomialFamily family, int degree, double x, double* values) {
    values[0] = 1.0;
    if (degree == 0) return;
    if (family == PolynomialFamily::Legendre) {
        const double t = 2.0 * x - 1.0;
        values[1] = t;
        for (int n = 1; n < degree; ++n)
            values[n + 1] = ((2.0 * n + 1.0) * t * values[n] - n * values[n - 1]) / (n + 1.0);
    } else {
        values[1] = x;
        for (int n = 1; n < degree; ++n) values[n + 1] = x * values[n] - n * values[n - 1];
    }
}

void enumerate_degree(Eigen::Index dim, Eigen::Index pos, int remaining, std::vector<PceBasis::Term>& current,
                      std::vector<std::vector<PceBasis::Term>>& out) {
    if (remaining == 0) {
        out.push_back(current);
        return;
    }
    if (pos == dim - 1) {
        current.emplace_back(pos, remaining);
        out.push_back(current);
        current.pop_back();
        return;
    }
    for (int a = remaining; a >= 0; --a) {
        if (a > 0) current.emplace_back(pos, a);
        enumerate_degree(dim, pos + 1, remaining - a, current, out);
        if (a > 0) current.pop_back();
    }
}

}  // namespace

double univariate_polynomial(PolynomialFamily family, int degree, double x) {
    if (degree < 0) throw ParameterError("polynomial degree must be >= 0");
    std::vector<double> v(static_cast<std::size_t>(degree) + 1);
    univariate_table(family, degree, x, v.data());
    return v.back();
}

double univariate_norm(PolynomialFamily family, int degree) {
    if (family == PolynomialFamily::Legendre) return 1.0 / (2.0 * degree + 1.0);
    double f = 1.0;
    for (int k = 2; k <= degree; ++k) f *= k;
    return f;
}

PceBasis::PceBasis(Eigen::Index dim, int degree, PolynomialFamily family, std::vector<std::vector<Term>> terms)
    : dim_(dim), degree_(degree), family_(family), terms_(std::move(terms)) {
    norms_.resize(size());
    for (Eigen::Index i = 0; i < size(); ++i) {
        double norm = 1.0;
        for (const auto& [coord, deg] : terms_[static_cast<std::size_t>(i)]) norm *= univariate_norm(family_, deg);
        norms_(i) = norm;
    }
}

std::vector<int> PceBasis::multi_index(Eigen::Index i) const {
    std::vector<int> alpha(static_cast<std::size_t>(dim_), 0);
    for (const auto& [coord, deg] : terms(i)) alpha[static_cast<std::size_t>(coord)] = deg;
    return alpha;
}

Eigen::MatrixXd PceBasis::evaluate(const Eigen::MatrixXd& x) const {
    if (x.cols() != dim_)
        throw ShapeError("pce: input has " + std::to_string(x.cols()) + " columns, basis dimension is " +
                         std::to_string(dim_));
    const auto stride = static_cast<Eigen::Index>(degree_) + 1;
    Eigen::MatrixXd table(stride, dim_);
    Eigen::MatrixXd out(x.rows(), size());
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        for (Eigen::Index j = 0; j < dim_; ++j) {
            const double v = x(r, j);
            if (family_ == PolynomialFamily::Legendre && !(v >= 0.0 && v <= 1.0))
                throw DomainError("pce: Legendre input " + std::to_string(v) + " outside [0, 1]");
            univariate_table(family_, degree_, v, table.col(j).data());
        }
        for (Eigen::Index i = 0; i < size(); ++i) {
            double prod = 1.0;
            for (const auto& [coord, deg] : terms_[static_cast<std::size_t>(i)]) prod *= table(deg, coord);
            out(r, i) = prod;
        }
    }
    return out;
}

std::uint64_t basis_size(Eigen::Index d, int p, std::uint64_t cap) {
    if (d < 1) throw ParameterError("pce: dimension must be >= 1");
    if (p < 0) throw ParameterError("pce: degree must be >= 0");
    // C(d+i, i) = C(d+i-1, i-1) * (d+i) / i is exact at every step.
    unsigned __int128 count = 1;
    for (int i = 1; i <= p; ++i) {
        count = count * static_cast<unsigned __int128>(d + i) / static_cast<unsigned __int128>(i);
        if (count > cap)
            throw CapacityError("pce: basis with d=" + std::to_string(d) + ", p=" + std::to_string(p) +
                                " exceeds the cap of " + std::to_string(cap) + " polynomials");
    }
    return static_cast<std::uint64_t>(count);
}

PceBasis build_basis(Eigen::Index d, int p, PolynomialFamily family, std::uint64_t cap) {
    const std::uint64_t expected = basis_size(d, p, cap);
    std::vector<std::vector<PceBasis::Term>> terms;
    terms.reserve(expected);
    std::vector<PceBasis::Term> current;
    for (int g = 0; g <= p; ++g) enumerate_degree(d, 0, g, current, terms);
    return PceBasis(d, p, family, std::move(terms));
}

PceModel pce_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const PceBasis& basis,
                 const LambdaStrategy& strategy, const TrainConfig& cfg) {
    if (x.rows() != y.size()) throw ShapeError("pce_fit: input rows and outputs differ in length");
    PceModel m;
    m.basis = basis;
    m.coeffs = Eigen::VectorXd::Zero(basis.size());
    if (basis.size() == 1) {
        m.coeffs(0) = y.mean();
        return m;
    }
    const Eigen::MatrixXd design = basis.evaluate(x).rightCols(basis.size() - 1);
    const LassoModel lm = train(design, y, strategy, cfg);
    m.lambda = lm.lambda;
    m.coeffs.tail(basis.size() - 1) = lm.beta;
    m.coeffs(0) = lm.output_offset - lm.beta.dot(lm.input_offsets);
    return m;
}

Eigen::VectorXd pce_predict(const PceModel& m, const Eigen::MatrixXd& x) { return m.basis.evaluate(x) * m.coeffs; }

PceMoments pce_moments(const PceModel& m) {
    if (m.coeffs.size() != m.basis.size()) throw ShapeError("pce_moments: coefficient count differs from basis size");
    PceMoments out;
    out.mean = m.coeffs(0);
    for (Eigen::Index i = 1; i < m.coeffs.size(); ++i) out.variance += m.coeffs(i) * m.coeffs(i) * m.basis.norms()(i);
    return out;
}

}  // namespace lassomc
