#include "lassomc/problem.hpp"

namespace lassomc {

Eigen::VectorXd Problem::evaluate_rows(const Eigen::MatrixXd& x) const {
    Eigen::VectorXd out(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) out(i) = evaluate(x.row(i).transpose());
    return out;
}

}  // namespace lassomc
