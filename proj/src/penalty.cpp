#include "stochprox/penalty.hpp"

#include <cmath>

namespace stochprox {

ElasticNetPenalty::ElasticNetPenalty(double lambda_, double alpha_,
                                     Eigen::Array<bool, Eigen::Dynamic, 1> mask_)
    : lambda(lambda_), alpha(alpha_), mask(std::move(mask_)) {
  require(lambda >= 0.0, "ElasticNetPenalty: lambda must be >= 0");
  require(alpha >= 0.0 && alpha <= 1.0, "ElasticNetPenalty: alpha must be in [0,1]");
}

ElasticNetPenalty ElasticNetPenalty::lasso(double lambda, Eigen::Index d) {
  return ElasticNetPenalty(lambda, 1.0, Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(d, true));
}

ElasticNetPenalty ElasticNetPenalty::dense(double lambda, double alpha, Eigen::Index d) {
  return ElasticNetPenalty(lambda, alpha, Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(d, true));
}

double ElasticNetPenalty::value(const ParamVector& theta) const {
  require(theta.size() == mask.size(), "ElasticNetPenalty::value: dimension mismatch");
  double l1 = 0.0, l2 = 0.0;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    if (!mask[i]) continue;
    l1 += std::abs(theta[i]);
    l2 += theta[i] * theta[i];
  }
  return lambda * (0.5 * (1.0 - alpha) * l2 + alpha * l1);
}

BoxConstraint::BoxConstraint(ParamVector lower_, ParamVector upper_)
    : lower(std::move(lower_)), upper(std::move(upper_)) {
  require(lower.size() == upper.size(), "BoxConstraint: bound dimensions differ");
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    require(lower[i] <= upper[i], "BoxConstraint: lower > upper at coordinate " + std::to_string(i));
  }
}

BoxConstraint BoxConstraint::cube(double lo, double hi, Eigen::Index d) {
  return BoxConstraint(ParamVector::Constant(d, lo), ParamVector::Constant(d, hi));
}

BoxConstraint BoxConstraint::free(Eigen::Index d) {
  const double inf = std::numeric_limits<double>::infinity();
  return BoxConstraint(ParamVector::Constant(d, -inf), ParamVector::Constant(d, inf));
}

bool BoxConstraint::contains(const ParamVector& theta) const {
  require(theta.size() == lower.size(), "BoxConstraint::contains: dimension mismatch");
  return (theta.array() >= lower.array()).all() && (theta.array() <= upper.array()).all();
}

ParamVector prox_elastic_net(const ParamVector& theta, double gamma, const ElasticNetPenalty& pen) {
  require_finite(theta, "prox_elastic_net");
  require(gamma > 0.0, "prox_elastic_net: gamma must be > 0");
  require(theta.size() == pen.mask.size(), "prox_elastic_net: mask length != dim(theta)");

  const double gl = gamma * pen.lambda;
  const double dead = gl * pen.alpha;            // empty when gamma*lambda*alpha = 0
  const double shrink = 1.0 + gl * (1.0 - pen.alpha);
  ParamVector out = theta;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    if (!pen.mask[i]) continue;
    const double t = theta[i];
    if (t >= dead) {
      out[i] = (t - dead) / shrink;
    } else if (t <= -dead) {
      out[i] = (t + dead) / shrink;
    } else {
      out[i] = 0.0;
    }
  }
  return out;
}

ParamVector prox_box(const ParamVector& theta, const BoxConstraint& box) {
  require_finite(theta, "prox_box");
  require(theta.size() == box.dim(), "prox_box: dimension mismatch");
  return theta.cwiseMax(box.lower).cwiseMin(box.upper);
}

Penalty::Penalty(CompositePenalty comp) : g_(std::move(comp)) {
  const auto& c = std::get<CompositePenalty>(g_);
  require(c.net.dim() == c.box.dim(), "Penalty: composite parts have inconsistent dimensions");
}

Eigen::Index Penalty::dim() const {
  return std::visit(
      [](const auto& g) -> Eigen::Index {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, CompositePenalty>) {
          return g.net.dim();
        } else {
          return g.dim();
        }
      },
      g_);
}

double Penalty::value(const ParamVector& theta) const {
  const double inf = std::numeric_limits<double>::infinity();
  return std::visit(
      [&](const auto& g) -> double {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, ElasticNetPenalty>) {
          return g.value(theta);
        } else if constexpr (std::is_same_v<T, BoxConstraint>) {
          return g.contains(theta) ? 0.0 : inf;
        } else {
          return g.box.contains(theta) ? g.net.value(theta) : inf;
        }
      },
      g_);
}

ParamVector Penalty::prox(const ParamVector& theta, double gamma) const {
  require_finite(theta, "Penalty::prox");
  require(gamma > 0.0, "Penalty::prox: gamma must be > 0");
  return std::visit(
      [&](const auto& g) -> ParamVector {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, ElasticNetPenalty>) {
          return prox_elastic_net(theta, gamma, g);
        } else if constexpr (std::is_same_v<T, BoxConstraint>) {
          return prox_box(theta, g);
        } else {
          // Rectangle constraint: project the soft-threshold.
          return prox_box(prox_elastic_net(theta, gamma, g.net), g.box);
        }
      },
      g_);
}

}  // namespace stochprox
