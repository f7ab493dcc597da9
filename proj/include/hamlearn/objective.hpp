#pragma once

#include "hamlearn/dataset.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <memory>

namespace hamlearn {

struct LossEvaluation {
    double value = 0.0;
    Eigen::VectorXd gradient;
};

/// Floor applied to model populations before taking logs in the KL loss.
inline constexpr double kKlFloor = 1e-12;

/// Squared error: f = sum_{j,t,i} (y - y~)^2.
/// KL: f = sum_{j,t} D_KL(P || Q) with P the observed row renormalized and
/// Q the model row floored at kKlFloor and renormalized.
///
/// The gradient is exact: one eigendecomposition of H(theta), the
/// divided-difference kernel per time, and one back-transformation shared by
/// all parameters.
LossEvaluation loss_and_grad(const ModelSpec& spec, const Eigen::VectorXd& theta, const QuenchDataset& data,
                             LossKind kind);

double loss_value(const ModelSpec& spec, const Eigen::VectorXd& theta, const QuenchDataset& data, LossKind kind);

/// Central differences (f(theta + h e_a) - f(theta - h e_a)) / 2h.
Eigen::VectorXd finite_diff_grad(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& theta,
                                 double h);

Eigen::VectorXd finite_diff_grad(const ModelSpec& spec, const Eigen::VectorXd& theta, const QuenchDataset& data,
                                 LossKind kind, double h);

/// A loss bound to one problem, counting how often it is called. Non-finite
/// parameters evaluate to an infinite loss (with a NaN gradient) so that
/// optimizers treat them as divergence. Not thread-safe; each optimizer run
/// owns its own copy.
class Objective {
public:
    using ValueFn = std::function<double(const Eigen::VectorXd&)>;
    using GradFn = std::function<LossEvaluation(const Eigen::VectorXd&)>;

    explicit Objective(const ProblemInstance& problem);
    Objective(ValueFn value, GradFn grad, std::size_t n_params);

    LossEvaluation evaluate(const Eigen::VectorXd& theta);
    double value(const Eigen::VectorXd& theta);

    std::size_t n_params() const noexcept { return n_params_; }
    std::size_t gradient_calls() const noexcept { return gradient_calls_; }
    std::size_t value_calls() const noexcept { return value_calls_; }

private:
    ValueFn value_;
    GradFn grad_;
    std::size_t n_params_;
    std::size_t gradient_calls_ = 0;
    std::size_t value_calls_ = 0;
};

/// f(theta) = |theta - c|^2, a test objective with a known minimizer.
Objective quadratic_objective(const Eigen::VectorXd& center);

}  // namespace hamlearn
