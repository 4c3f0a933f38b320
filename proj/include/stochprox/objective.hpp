#pragma once

#include <functional>
#include <optional>

#include "stochprox/penalty.hpp"
#include "stochprox/types.hpp"

namespace stochprox {

/// Smooth part f of the objective F = f + g. The gradient is mandatory, the
/// value and the Lipschitz constant of the gradient are optional (some models
/// only ever expose gradients).
struct SmoothObjective {
  std::function<ParamVector(const ParamVector&)> gradient;
  std::function<double(const ParamVector&)> value;  // may be empty
  std::optional<double> lipschitz;

  bool has_value() const { return static_cast<bool>(value); }
};

/// F(theta) = f(theta) + g(theta). Requires the value callable.
double objective_value(const SmoothObjective& obj, const Penalty& penalty, const ParamVector& theta);

/// Largest eigenvalue of a symmetric PSD operator by power iteration, used to
/// estimate the gradient Lipschitz constant of quadratics (L = lambda_max of
/// the Hessian).
double estimate_largest_eigenvalue(const std::function<ParamVector(const ParamVector&)>& apply,
                                   Eigen::Index dim, int iters = 50, double tol = 1e-9,
                                   unsigned seed = 0);

/// Least-squares smooth part f(b) = 0.5 ||y - X b||^2, with exact Lipschitz
/// constant lambda_max(X'X).
SmoothObjective make_least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

}  // namespace stochprox
