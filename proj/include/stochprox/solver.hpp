#pragma once

#include <functional>

#include "stochprox/oracle.hpp"
#include "stochprox/penalty.hpp"
#include "stochprox/prox.hpp"
#include "stochprox/schedules.hpp"
#include "stochprox/trace.hpp"

namespace stochprox {

struct SolverOptions {
  int thin = 1;  // store every thin-th iterate (last one always kept)

  /// Record eta_n = H_n - grad f(theta_{n-1}) and per-iteration kkt residuals.
  /// Requires an oracle with a true_gradient (toy/enumerable models only).
  bool instrument = false;

  /// Objective recorder F-hat(theta_n); on intractable models this is
  /// typically a common-random-numbers Monte Carlo estimate.
  std::function<double(const ParamVector&)> objective_eval;
};

/// Raised when the oracle fails mid-run; the iterations completed so far are
/// attached as a partial trace.
class SolverAbort : public std::runtime_error {
 public:
  SolverAbort(const std::string& what, RunTrace partial, int iteration)
      : std::runtime_error(what), partial_(std::move(partial)), iteration_(iteration) {}

  const RunTrace& partial_trace() const { return partial_; }
  int iteration() const { return iteration_; }

 private:
  RunTrace partial_;
  int iteration_;
};

/// Exact proximal gradient: theta_{n+1} = Prox_{gamma_{n+1}}(theta_n - gamma_{n+1} grad f(theta_n)).
/// With constant gamma <= 1/L the objective sequence is non-increasing.
/// If the objective has a value callable and no objective_eval is supplied,
/// F is recorded automatically.
RunTrace run_proximal_gradient(const SmoothObjective& obj, const Penalty& penalty,
                               const ParamVector& theta0, const StepSchedule& steps, int n_iters,
                               SolverOptions options = {});

/// Perturbed proximal gradient: the gradient is replaced by the oracle output
/// H_{n+1} computed from m_{n+1} Monte Carlo samples. Deterministic function
/// of (schedules, seed).
RunTrace run_perturbed_pg(GradientOracle& oracle, const Penalty& penalty, const ParamVector& theta0,
                          const StepSchedule& steps, const BatchSchedule& batches, int n_iters,
                          std::uint64_t seed, const SolverOptions& options = {});

/// Perturbed FISTA: momentum extrapolation
///   vartheta_n = theta_n + t_n^{-1} (t_{n-1} - 1)(theta_n - theta_{n-1})
/// followed by a proximal step from vartheta_n, where H_{n+1} approximates
/// grad f(vartheta_n). The (gamma_n, t_n) pair must satisfy the compatibility
/// condition; violations are rejected before the run starts.
RunTrace run_perturbed_fista(GradientOracle& oracle, const Penalty& penalty,
                             const ParamVector& theta0, const StepSchedule& steps,
                             const BatchSchedule& batches, const TSequence& tseq, int n_iters,
                             std::uint64_t seed, const SolverOptions& options = {});

/// Weighted averages theta-bar_n = A_n^{-1} sum_{k=burn_in+1}^n a_k theta_k for
/// n = burn_in+1 .. n_iters. Requires a dense trace (thin == 1).
std::vector<ParamVector> weighted_average(const RunTrace& trace, const WeightSchedule& weights,
                                          int burn_in);

/// Weighted objective gap A_n^{-1} sum_{k=1}^n a_k F-hat(theta_k) - f_star per
/// iteration, computed from the recorded objective series.
std::vector<double> weighted_objective_gap(const RunTrace& trace, const WeightSchedule& weights,
                                           double f_star);

struct RegretDiagnostic {
  std::vector<double> bound;         // B_n
  std::vector<double> weighted_gap;  // A_n^{-1} sum a_k F(theta_k) - F(theta_star)
  bool holds = true;
  int first_violation = -1;          // iteration of the first bound violation, or -1
  double tolerance = 1e-8;
};

/// Termwise bound B_n on the weighted mean A_n^{-1} sum a_k F(theta_k) - F(theta_star)
/// for a run with recorded errors eta_k:
///   B_n = a_1 ||theta_0 - theta_star||^2 / (2 gamma_1 A_n)
///       + (2 A_n)^{-1} sum_{k=2}^n (a_k/gamma_k - a_{k-1}/gamma_{k-1}) ||theta_{k-1} - theta_star||^2
///       + A_n^{-1} sum_{k=1}^n a_k (gamma_k ||eta_k||^2 - <T_{gamma_k}(theta_{k-1}) - theta_star, eta_k>).
/// Requires an instrumented trace and a tractable objective.
RegretDiagnostic regret_bound_diagnostic(const SmoothObjective& obj, const Penalty& penalty,
                                         const RunTrace& trace, const ParamVector& theta_star,
                                         const StepSchedule& steps, const WeightSchedule& weights);

}  // namespace stochprox
