#include "stochprox/objective.hpp"

#include <cmath>
#include <random>

namespace stochprox {

double objective_value(const SmoothObjective& obj, const Penalty& penalty, const ParamVector& theta) {
  if (!obj.has_value()) {
    throw UnsupportedOperation("objective_value: smooth part has no value callable");
  }
  return obj.value(theta) + penalty.value(theta);
}

double estimate_largest_eigenvalue(const std::function<ParamVector(const ParamVector&)>& apply,
                                   Eigen::Index dim, int iters, double tol, unsigned seed) {
  std::mt19937_64 rng(seed + 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> gauss(0.0, 1.0);
  ParamVector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v[i] = gauss(rng);
  v.normalize();

  double lambda = 0.0;
  for (int k = 0; k < iters; ++k) {
    ParamVector w = apply(v);
    const double nw = w.norm();
    if (nw == 0.0) return 0.0;
    w /= nw;
    const double next = w.dot(apply(w));
    if (k > 0 && std::abs(next - lambda) <= tol * std::max(1.0, std::abs(next))) {
      return next;
    }
    lambda = next;
    v = w;
  }
  return lambda;
}

SmoothObjective make_least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  SmoothObjective obj;
  obj.gradient = [X, y](const ParamVector& b) -> ParamVector {
    return X.transpose() * (X * b - y);
  };
  obj.value = [X, y](const ParamVector& b) { return 0.5 * (y - X * b).squaredNorm(); };
  obj.lipschitz = estimate_largest_eigenvalue(
      [&X](const ParamVector& v) -> ParamVector { return X.transpose() * (X * v); }, X.cols(), 200,
      1e-12);
  return obj;
}

}  // namespace stochprox
