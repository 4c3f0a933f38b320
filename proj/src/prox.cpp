#include "stochprox/prox.hpp"

namespace stochprox {

ParamVector proximal_map(const SmoothObjective& obj, const Penalty& penalty,
                         const ParamVector& theta, double gamma) {
  require(gamma > 0.0, "proximal_map: gamma must be > 0");
  require_finite(theta, "proximal_map");
  return penalty.prox(theta - gamma * obj.gradient(theta), gamma);
}

double surrogate_value(const SmoothObjective& obj, const Penalty& penalty,
                       const ParamVector& vartheta, const ParamVector& theta, double gamma) {
  require(gamma > 0.0, "surrogate_value: gamma must be > 0");
  if (!obj.has_value()) {
    throw UnsupportedOperation("surrogate_value: smooth part has no value callable");
  }
  const ParamVector diff = vartheta - theta;
  return obj.value(theta) + obj.gradient(theta).dot(diff) + diff.squaredNorm() / (2.0 * gamma) +
         penalty.value(vartheta);
}

double kkt_residual(const SmoothObjective& obj, const Penalty& penalty, const ParamVector& theta,
                    double gamma) {
  return (theta - proximal_map(obj, penalty, theta, gamma)).norm();
}

}  // namespace stochprox
