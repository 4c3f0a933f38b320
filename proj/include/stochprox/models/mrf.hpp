#pragma once

#include <memory>
#include <random>

#include "stochprox/objective.hpp"
#include "stochprox/oracle.hpp"
#include "stochprox/penalty.hpp"
#include "stochprox/types.hpp"

namespace stochprox {

/// Discrete Markov random field over a finite state space:
///   f_theta(x) = Z_theta^{-1} exp( sum_i theta_ii B0(x_i) + sum_{j<i} theta_ij B(x_i, x_j) )
/// with theta a symmetric p x p matrix. The parameter space carries the
/// modified Frobenius inner product <theta, v> = sum_{k <= j} theta_jk v_jk,
/// which is the plain dot product of the packed lower triangle.
struct MRFModel {
  int p = 0;
  Eigen::VectorXd state_values;  // labels of the finite set X
  Eigen::VectorXd b0;            // B0 tabulated per state index
  Eigen::MatrixXd b;             // B tabulated per state-index pair, symmetric
  Eigen::MatrixXi data;          // N x p observed configurations (state indices)

  int n_states() const { return static_cast<int>(state_values.size()); }
  int n_obs() const { return static_cast<int>(data.rows()); }

  /// Ising model on p nodes: X = {-1,+1}, B0(x) = x, B(x,y) = xy, no data.
  static MRFModel ising(int p);
};

using MRFConfig = Eigen::VectorXi;  // one configuration, state indices per node

/// Packed symmetric-matrix parameterization (lower triangle, row-major).
inline Eigen::Index sym_dim(int p) { return static_cast<Eigen::Index>(p) * (p + 1) / 2; }
inline Eigen::Index sym_index(int i, int j) {  // requires i >= j
  return static_cast<Eigen::Index>(i) * (i + 1) / 2 + j;
}
Eigen::MatrixXd unpack_sym(const ParamVector& packed, int p);
ParamVector pack_sym(const Eigen::MatrixXd& m);

/// Sufficient-statistics matrix: B-bar_ii = B0(x_i), B-bar_ij = B(x_i, x_j).
Eigen::MatrixXd mrf_suff_stats(const MRFConfig& x, const MRFModel& model);

/// <theta, B-bar(x)> with the modified Frobenius inner product.
double mrf_log_potential(const ParamVector& theta, const MRFConfig& x, const MRFModel& model);

/// Whether |X|^p is small enough for the enumeration oracle (<= 2e6 states).
bool mrf_enumerable(const MRFModel& model);

/// log Z_theta by full enumeration with log-sum-exp normalization.
double mrf_log_partition(const ParamVector& theta, const MRFModel& model);

/// Packed E_theta[B-bar], by full enumeration.
ParamVector mrf_model_mean(const ParamVector& theta, const MRFModel& model);

/// Packed empirical mean N^{-1} sum_i B-bar(x^{(i)}).
ParamVector mrf_data_mean(const MRFModel& model);

/// Average log-likelihood ell(theta) = N^{-1} sum_i <theta, B-bar(x_i)> - log Z_theta.
double mrf_loglik(const ParamVector& theta, const MRFModel& model);

/// grad ell(theta) = data mean - model mean (packed). Throws
/// UnsupportedOperation when the state space is too large to enumerate.
ParamVector mrf_exact_gradient(const ParamVector& theta, const MRFModel& model);

/// f = -ell with exact value/gradient via enumeration, for use with the exact
/// solvers and as ground truth for the stochastic ones.
SmoothObjective mrf_negloglik_objective(const MRFModel& model);

/// One systematic-scan Gibbs sweep: every site resampled in turn from its
/// exact conditional under f_theta.
MRFConfig mrf_gibbs_step(const ParamVector& theta, MRFConfig x, const MRFModel& model,
                         std::mt19937_64& rng);

/// Exact draw from f_theta by inversion over the enumerated state space.
MRFConfig mrf_exact_sample(const ParamVector& theta, const MRFModel& model, std::mt19937_64& rng);

/// n exact draws stacked as rows (for synthetic data sets).
Eigen::MatrixXi mrf_sample_data(const ParamVector& theta, const MRFModel& model, int n,
                                std::mt19937_64& rng);

/// p ((p-1) osc^2(B) + osc^2(B0)), the gradient-Lipschitz upper bound.
double mrf_lipschitz_bound(const MRFModel& model);

struct LipschitzCheck {
  double max_ratio = 0.0;
  double bound = 0.0;
  bool holds = false;
};

/// Samples `pairs` random (theta, vartheta) pairs with entries in [-1,1] and
/// compares the gradient difference ratio against the oscillation bound.
LipschitzCheck mrf_lipschitz_check(const MRFModel& model, int pairs, std::mt19937_64& rng);

/// i.i.d. oracle: samples from f_theta by enumeration-based inversion. The
/// integrand is H_theta(x) = B-bar(x) - data mean, so the batch average
/// estimates grad f = E_theta[B-bar] - data mean.
std::unique_ptr<MonteCarloOracle<MRFConfig>> make_mrf_iid_oracle(const MRFModel& model);

/// MCMC oracle driven by systematic-scan Gibbs sweeps (one kernel call = one
/// sweep). `warm_start` continues the chain across solver iterations;
/// otherwise each batch starts fresh from `init` (all sites at state 0) plus
/// `burn_in` discarded sweeps.
std::unique_ptr<MonteCarloOracle<MRFConfig>> make_mrf_gibbs_oracle(const MRFModel& model,
                                                                   bool warm_start = true,
                                                                   int burn_in = 0);

}  // namespace stochprox
