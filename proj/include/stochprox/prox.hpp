#pragma once

#include "stochprox/objective.hpp"
#include "stochprox/penalty.hpp"

namespace stochprox {

/// One exact proximal-gradient step: T_gamma(theta) = Prox_gamma(theta - gamma grad f(theta)).
/// Fixed points of T_gamma are exactly the stationary points
/// {theta : 0 in grad f(theta) + subdiff g(theta)}.
ParamVector proximal_map(const SmoothObjective& obj, const Penalty& penalty,
                         const ParamVector& theta, double gamma);

/// Majorizing surrogate
///   Q_gamma(vartheta | theta) = f(theta) + <grad f(theta), vartheta - theta>
///                               + ||vartheta - theta||^2 / (2 gamma) + g(vartheta).
/// For gamma in (0, 1/L]: Q_gamma(theta|theta) = F(theta) and Q_gamma >= F.
double surrogate_value(const SmoothObjective& obj, const Penalty& penalty,
                       const ParamVector& vartheta, const ParamVector& theta, double gamma);

/// ||theta - T_gamma(theta)||, zero exactly at stationary points. Used as the
/// stopping/diagnostic residual throughout.
double kkt_residual(const SmoothObjective& obj, const Penalty& penalty, const ParamVector& theta,
                    double gamma);

}  // namespace stochprox
