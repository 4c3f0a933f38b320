#pragma once

#include <limits>
#include <variant>

#include "stochprox/types.hpp"

namespace stochprox {

/// Elastic-net penalty lambda * ((1-alpha)/2 ||b||_2^2 + alpha ||b||_1)
/// restricted to the coordinates flagged by `mask`. Unmasked coordinates are
/// not penalized and pass through the proximal map unchanged.
struct ElasticNetPenalty {
  double lambda = 0.0;                       // regularization strength, >= 0
  double alpha = 1.0;                        // l1/l2 trade-off in [0,1]
  Eigen::Array<bool, Eigen::Dynamic, 1> mask;  // true = penalized coordinate

  ElasticNetPenalty() = default;
  ElasticNetPenalty(double lambda_, double alpha_, Eigen::Array<bool, Eigen::Dynamic, 1> mask_);

  /// Lasso on all d coordinates (alpha = 1).
  static ElasticNetPenalty lasso(double lambda, Eigen::Index d);
  /// Elastic net on all d coordinates.
  static ElasticNetPenalty dense(double lambda, double alpha, Eigen::Index d);

  Eigen::Index dim() const { return mask.size(); }
  double value(const ParamVector& theta) const;
};

/// Rectangle {l <= theta <= u}, entries may be +-infinity.
struct BoxConstraint {
  ParamVector lower;
  ParamVector upper;

  BoxConstraint() = default;
  BoxConstraint(ParamVector lower_, ParamVector upper_);

  /// [lo, hi]^d
  static BoxConstraint cube(double lo, double hi, Eigen::Index d);
  /// Unbounded box of dimension d.
  static BoxConstraint free(Eigen::Index d);

  Eigen::Index dim() const { return lower.size(); }
  bool contains(const ParamVector& theta) const;
};

/// g = elastic net + box indicator. Since the box is a rectangle the proximal
/// map factorizes coordinatewise as the projection of the soft-threshold.
struct CompositePenalty {
  ElasticNetPenalty net;
  BoxConstraint box;
};

/// Tagged union over the closed-form penalties used by the solvers. `value`
/// evaluates g (possibly +infinity); `prox` evaluates Prox_gamma in closed
/// form.
class Penalty {
 public:
  Penalty(ElasticNetPenalty net) : g_(std::move(net)) {}          // NOLINT(google-explicit-constructor)
  Penalty(BoxConstraint box) : g_(std::move(box)) {}              // NOLINT(google-explicit-constructor)
  Penalty(CompositePenalty comp);                                 // NOLINT(google-explicit-constructor)

  /// Zero penalty of dimension d (free box).
  static Penalty none(Eigen::Index d) { return Penalty(BoxConstraint::free(d)); }

  Eigen::Index dim() const;
  double value(const ParamVector& theta) const;
  ParamVector prox(const ParamVector& theta, double gamma) const;

  bool is_box() const { return std::holds_alternative<BoxConstraint>(g_); }
  const std::variant<ElasticNetPenalty, BoxConstraint, CompositePenalty>& variant() const { return g_; }

 private:
  std::variant<ElasticNetPenalty, BoxConstraint, CompositePenalty> g_;
};

/// Componentwise shrunken soft-threshold, the closed form of the elastic-net
/// proximal map. Unmasked coordinates are returned unchanged.
ParamVector prox_elastic_net(const ParamVector& theta, double gamma, const ElasticNetPenalty& pen);

/// Orthogonal projection onto the box (componentwise clamp).
ParamVector prox_box(const ParamVector& theta, const BoxConstraint& box);

}  // namespace stochprox
