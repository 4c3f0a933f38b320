#pragma once

#include <cstdint>
#include <memory>
#include <random>

#include "stochprox/oracle.hpp"
#include "stochprox/penalty.hpp"
#include "stochprox/types.hpp"

namespace stochprox {

/// Random-effect logistic regression: Y_i | U ~ Ber(s(x_i' beta + sigma z_i' U))
/// with U ~ N_q(0, I). The optimization variable is theta = (beta, sigma)
/// stored contiguously as a (p+1)-vector with sigma last.
struct LogisticREModel {
  Eigen::MatrixXd X;  // N x p covariates, rows x_i
  Eigen::MatrixXd Z;  // N x q loading vectors, rows z_i
  Eigen::VectorXi Y;  // binary responses

  int n() const { return static_cast<int>(X.rows()); }
  int p() const { return static_cast<int>(X.cols()); }
  int q() const { return static_cast<int>(Z.cols()); }
  void validate() const;
};

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }

/// State of the data-augmented Gibbs chain targeting pi_theta(u, w).
struct GibbsState {
  Eigen::VectorXd u;  // random effect, length q
  Eigen::VectorXd w;  // Polya-Gamma auxiliaries, length N, positive
};

/// Integrand of the intractable gradient: with f = -ell,
///   H_theta(u) = -sum_i (Y_i - s(x_i' beta + sigma z_i' u)) [x_i ; z_i' u]
/// stacked to match the (beta, sigma) layout of theta.
ParamVector logistic_H(const ParamVector& theta, const Eigen::VectorXd& u,
                       const LogisticREModel& model);

/// Parameters of the Gaussian conditional u | w:
///   Gamma(w) = (I + sigma^2 sum_i w_i z_i z_i')^{-1}
///   mu(w)    = sigma Gamma(w) sum_i ((Y_i - 1/2) - w_i x_i' beta) z_i.
struct GibbsConditional {
  Eigen::VectorXd mu;
  Eigen::MatrixXd cov;
};
GibbsConditional gibbs_u_conditional(const ParamVector& theta, const Eigen::VectorXd& w,
                                     const LogisticREModel& model);

/// One two-block Gibbs sweep: u' ~ N(mu(w), Gamma(w)), then
/// w_i' ~ PG(1, |x_i' beta + sigma z_i' u'|).
GibbsState gibbs_step(const ParamVector& theta, const GibbsState& state,
                      const LogisticREModel& model, std::mt19937_64& rng);

/// Approximate PG(1, c) draw via the truncated infinite-sum representation
///   W = (2 pi^2)^{-1} sum_{k=1}^{K} g_k / ((k - 1/2)^2 + c^2 / (4 pi^2)),
/// g_k ~ Exp(1), K = 200, plus the analytic mean of the dropped tail. The
/// truncation leaves the mean exact and biases higher moments by O(1/K).
double sample_polya_gamma(double c, std::mt19937_64& rng);

/// Mean of the dropped tail sum_{k > K}; exposed for tests.
double polya_gamma_tail_mean(double c, int k_cutoff);

/// Number of series terms used by sample_polya_gamma.
inline constexpr int kPolyaGammaTerms = 200;

/// Prior Monte Carlo estimate of the log-likelihood
///   ell(theta) = log int prod_i Ber_i(u) phi(u) du,
/// computed in log-sum-exp form over n_samples standard Gaussian draws.
double logistic_loglik_mc(const ParamVector& theta, const LogisticREModel& model,
                          int n_samples, std::mt19937_64& rng);

/// Common-random-numbers objective evaluator: a fixed panel of Gaussian draws
/// shared across all theta so that F-hat trajectories are smooth in theta.
class LoglikPanel {
 public:
  LoglikPanel(int q, int panel_size, std::uint64_t seed);

  /// Estimate of ell(theta) on the shared panel.
  double loglik(const ParamVector& theta, const LogisticREModel& model) const;
  int size() const { return static_cast<int>(panel_.cols()); }

 private:
  Eigen::MatrixXd panel_;  // q x M
};

/// Synthetic-data design: AR-correlated covariates, sparse uniform
/// coefficients, repeated-measurement loading pattern z_i = e_{ceil(i q / N)}.
struct SyntheticSpec {
  int N = 500;
  int p = 1000;
  int q = 5;
  double ar_rho = 0.8;
  double sparsity = 0.98;  // fraction of beta entries set to zero
  double beta_lo = 1.0;
  double beta_hi = 5.0;
  double sigma2 = 0.1;
  double lambda = 30.0;
  double alpha = 1.0;
  std::uint64_t seed = 0;

  void validate() const;

  /// Desk-scale variant (N=100, p=200, lambda scaled by the N-ratio to 6).
  static SyntheticSpec desk_scale(std::uint64_t seed = 0);
};

struct SyntheticData {
  LogisticREModel model;
  Eigen::VectorXd beta_true;
  Eigen::VectorXd u_true;
};

SyntheticData generate_synthetic(const SyntheticSpec& spec);

/// Elastic net on beta only plus the sigma-positivity floor: Theta is
/// R^p x (0, inf), realized as a box with lower bound sigma_floor on the last
/// coordinate.
Penalty logistic_penalty(double lambda, double alpha, int p, double sigma_floor = 1e-6);

/// theta0 = (0, ..., 0, sigma0).
ParamVector logistic_start(int p, double sigma0 = 1.0);

struct SecondMomentCheck {
  double estimate = 0.0;  // chain average of ||u||^2
  double se = 0.0;        // batch-means standard error
  double bound = 0.0;     // sqrt(q (2 + q))
  bool holds = false;     // estimate <= bound + 3 se
};

/// MCMC check of the posterior second-moment bound
/// sup_theta int ||u||^2 pi_theta(du) <= sqrt(q (2 + q)).
SecondMomentCheck second_moment_check(const ParamVector& theta, const LogisticREModel& model,
                                      int chain_length, std::uint64_t seed);

/// Gradient oracle for f = -ell sampling pi_theta with the Polya-Gamma Gibbs
/// chain; one kernel call is one two-block sweep.
std::unique_ptr<MonteCarloOracle<GibbsState>> make_logistic_gibbs_oracle(
    const LogisticREModel& model, bool warm_start = true, int burn_in = 0);

}  // namespace stochprox
