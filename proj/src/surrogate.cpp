#include "lassomc/surrogate.hpp"

#include <memory>

namespace lassomc {

Surrogate from_lasso(LassoModel m) {
    Surrogate s;
    s.lambda = m.lambda;
    s.nonzeros = m.nonzeros();
    auto model = std::make_shared<const LassoModel>(std::move(m));
    s.predict = [model](const Eigen::MatrixXd& x) { return predict(*model, x); };
    return s;
}

Trainer lasso_trainer(LambdaStrategy strategy, FeatureTransform transform, TrainConfig cfg) {
    return [strategy, transform, cfg](const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
        return from_lasso(train(x, y, strategy, cfg, transform));
    };
}

Trainer zero_trainer() {
    return [](const Eigen::MatrixXd&, const Eigen::VectorXd&) {
        Surrogate s;
        s.lambda = std::numeric_limits<double>::infinity();
        s.nonzeros = 0;
        s.predict = [](const Eigen::MatrixXd& x) -> Eigen::VectorXd { return Eigen::VectorXd::Zero(x.rows()); };
        return s;
    };
}

Trainer fixed_trainer(Surrogate s) {
    return [s = std::move(s)](const Eigen::MatrixXd&, const Eigen::VectorXd&) { return s; };
}

}  // namespace lassomc
