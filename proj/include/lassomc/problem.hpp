#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "lassomc/sampling.hpp"

namespace lassomc {

/// Reference moments of a benchmark's output. Values are either analytic or
/// estimated once by a large Monte Carlo run.
struct ReferenceMoments {
    enum class Source { Analytic, LargeMonteCarlo, Unavailable };

    Source source = Source::Unavailable;
    double mean = 0.0;
    double variance = 0.0;
    std::string note;  // derivation or fixture provenance

    bool available() const { return source != Source::Unavailable; }
};

/// A black-box "true model" f with its input distribution.
/// Implementations must be safe to evaluate concurrently.
class Problem {
public:
    virtual ~Problem() = default;

    virtual std::string id() const = 0;
    virtual const InputDistribution& distribution() const = 0;
    virtual double evaluate(const Eigen::Ref<const Eigen::VectorXd>& x) const = 0;
    virtual ReferenceMoments reference() const = 0;

    Eigen::Index dim() const { return distribution().dim; }

    /// Evaluates f on every row.
    Eigen::VectorXd evaluate_rows(const Eigen::MatrixXd& x) const;
};

/// Decorator counting calls to evaluate(); used to audit budget accounting.
class CountingProblem final : public Problem {
public:
    explicit CountingProblem(std::shared_ptr<const Problem> inner) : inner_(std::move(inner)) {}

    std::string id() const override { return inner_->id(); }
    const InputDistribution& distribution() const override { return inner_->distribution(); }
    double evaluate(const Eigen::Ref<const Eigen::VectorXd>& x) const override {
        calls_.fetch_add(1, std::memory_order_relaxed);
        return inner_->evaluate(x);
    }
    ReferenceMoments reference() const override { return inner_->reference(); }

    std::uint64_t calls() const { return calls_.load(); }
    void reset() { calls_.store(0); }

private:
    std::shared_ptr<const Problem> inner_;
    mutable std::atomic<std::uint64_t> calls_{0};
};

}  // namespace lassomc
