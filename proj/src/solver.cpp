#include "stochprox/solver.hpp"

#include <cmath>

#include "stochprox/rng.hpp"

namespace stochprox {

namespace {

void check_start(const Penalty& penalty, const ParamVector& theta0) {
  require_finite(theta0, "solver");
  require(theta0.size() == penalty.dim(), "solver: dim(theta0) != dim(penalty)");
  if (!std::isfinite(penalty.value(theta0))) {
    throw std::invalid_argument("solver: theta0 is outside Dom(g)");
  }
}

struct Recorder {
  RunTrace trace;
  const SolverOptions& options;
  long long cumulative = 0;

  Recorder(const ParamVector& theta0, int n_iters, std::uint64_t seed, const SolverOptions& opts)
      : options(opts) {
    trace.theta0 = theta0;
    trace.n_iters = 0;
    trace.thin = opts.thin > 0 ? opts.thin : 1;
    trace.seed = seed;
    trace.iterates.reserve(static_cast<size_t>(n_iters / trace.thin) + 2);
    trace.objective_estimates.reserve(static_cast<size_t>(n_iters));
    trace.samples_per_iter.reserve(static_cast<size_t>(n_iters));
    trace.cumulative_samples.reserve(static_cast<size_t>(n_iters));
    trace.gammas.reserve(static_cast<size_t>(n_iters));
  }

  void record(int k, int n_iters, const ParamVector& theta, double gamma, long long samples) {
    trace.n_iters = k;
    trace.gammas.push_back(gamma);
    cumulative += samples;
    trace.samples_per_iter.push_back(samples);
    trace.cumulative_samples.push_back(cumulative);
    if (k % trace.thin == 0 || k == n_iters) {
      trace.iterates.push_back(theta);
      trace.iterate_steps.push_back(k);
    }
    if (options.objective_eval) {
      trace.objective_estimates.push_back(options.objective_eval(theta));
    }
  }
};

ParamVector instrumented_gradient(GradientOracle& oracle, const ParamVector& at, int iteration) {
  auto g = oracle.true_gradient(at);
  if (!g) {
    throw std::invalid_argument(
        "solver: instrumentation requested but the oracle exposes no true gradient "
        "(iteration " +
        std::to_string(iteration) + ")");
  }
  return std::move(*g);
}

}  // namespace

RunTrace run_perturbed_pg(GradientOracle& oracle, const Penalty& penalty, const ParamVector& theta0,
                          const StepSchedule& steps, const BatchSchedule& batches, int n_iters,
                          std::uint64_t seed, const SolverOptions& options) {
  check_start(penalty, theta0);
  require(n_iters >= 1, "run_perturbed_pg: n_iters must be >= 1");

  std::mt19937_64 rng = make_stream(seed, 0x50474Du);  // per-run oracle stream
  Recorder rec(theta0, n_iters, seed, options);
  ParamVector theta = theta0;

  for (int k = 1; k <= n_iters; ++k) {
    const double gamma = steps.at(k);
    const long long m = batches.at(k);
    OracleResult res;
    try {
      res = oracle.evaluate(theta, k, m, rng);
    } catch (const std::exception& e) {
      throw SolverAbort(std::string("run_perturbed_pg: oracle failed: ") + e.what(),
                        std::move(rec.trace), k);
    }
    if (options.instrument) {
      const ParamVector g = instrumented_gradient(oracle, theta, k);
      rec.trace.eta_history.push_back(res.gradient - g);
    }
    theta = penalty.prox(theta - gamma * res.gradient, gamma);
    rec.record(k, n_iters, theta, gamma, res.samples_used);
    if (options.instrument) {
      const ParamVector g_new = instrumented_gradient(oracle, theta, k);
      rec.trace.kkt_residuals.push_back((theta - penalty.prox(theta - gamma * g_new, gamma)).norm());
    }
  }
  return std::move(rec.trace);
}

RunTrace run_proximal_gradient(const SmoothObjective& obj, const Penalty& penalty,
                               const ParamVector& theta0, const StepSchedule& steps, int n_iters,
                               SolverOptions options) {
  if (!options.objective_eval && obj.has_value()) {
    options.objective_eval = [&obj, &penalty](const ParamVector& t) {
      return objective_value(obj, penalty, t);
    };
  }
  ExactOracle oracle(obj);
  return run_perturbed_pg(oracle, penalty, theta0, steps, BatchSchedule::constant(1), n_iters, 0,
                          options);
}

RunTrace run_perturbed_fista(GradientOracle& oracle, const Penalty& penalty,
                             const ParamVector& theta0, const StepSchedule& steps,
                             const BatchSchedule& batches, const TSequence& tseq, int n_iters,
                             std::uint64_t seed, const SolverOptions& options) {
  check_start(penalty, theta0);
  require(n_iters >= 1, "run_perturbed_fista: n_iters must be >= 1");
  if (const auto bad = validate_t_gamma(steps, tseq, n_iters)) {
    throw std::invalid_argument(
        "run_perturbed_fista: (gamma_n, t_n) violate gamma_{n+1} t_n (t_n - 1) <= "
        "gamma_n t_{n-1}^2 first at n = " +
        std::to_string(*bad));
  }
  const std::vector<double> ts = make_t_sequence(tseq, n_iters);

  std::mt19937_64 rng = make_stream(seed, 0x50474Du);
  Recorder rec(theta0, n_iters, seed, options);

  ParamVector theta_prev = theta0;
  ParamVector theta = theta0;

  for (int k = 1; k <= n_iters; ++k) {
    const double gamma = steps.at(k);
    const long long m = batches.at(k);
    // Extrapolated point; for k = 1 this is theta_0 itself.
    ParamVector probe;
    if (k == 1) {
      probe = theta0;
    } else {
      const double factor = (ts[static_cast<size_t>(k) - 2] - 1.0) / ts[static_cast<size_t>(k) - 1];
      probe = theta + factor * (theta - theta_prev);
    }
    OracleResult res;
    try {
      res = oracle.evaluate(probe, k, m, rng);
    } catch (const std::exception& e) {
      throw SolverAbort(std::string("run_perturbed_fista: oracle failed: ") + e.what(),
                        std::move(rec.trace), k);
    }
    if (options.instrument) {
      const ParamVector g = instrumented_gradient(oracle, probe, k);
      rec.trace.eta_history.push_back(res.gradient - g);
    }
    theta_prev = theta;
    theta = penalty.prox(probe - gamma * res.gradient, gamma);
    rec.record(k, n_iters, theta, gamma, res.samples_used);
    if (options.instrument) {
      const ParamVector g_new = instrumented_gradient(oracle, theta, k);
      rec.trace.kkt_residuals.push_back((theta - penalty.prox(theta - gamma * g_new, gamma)).norm());
    }
  }
  return std::move(rec.trace);
}

std::vector<ParamVector> weighted_average(const RunTrace& trace, const WeightSchedule& weights,
                                          int burn_in) {
  require(burn_in >= 0, "weighted_average: burn_in must be >= 0");
  require(burn_in < trace.n_iters,
          "weighted_average: post-burn-in window is empty (burn_in >= trace length)");
  require(trace.thin == 1, "weighted_average: dense trace required (thin == 1)");

  std::vector<ParamVector> out;
  out.reserve(static_cast<size_t>(trace.n_iters - burn_in));
  ParamVector acc = ParamVector::Zero(trace.theta0.size());
  double total = 0.0;
  for (int n = burn_in + 1; n <= trace.n_iters; ++n) {
    const double a = weights.at(n);
    acc += a * trace.iterate_at(n);
    total += a;
    out.push_back(acc / total);
  }
  return out;
}

std::vector<double> weighted_objective_gap(const RunTrace& trace, const WeightSchedule& weights,
                                           double f_star) {
  require(static_cast<int>(trace.objective_estimates.size()) == trace.n_iters,
          "weighted_objective_gap: trace has no dense objective series");
  std::vector<double> out;
  out.reserve(static_cast<size_t>(trace.n_iters));
  double acc = 0.0, total = 0.0;
  for (int n = 1; n <= trace.n_iters; ++n) {
    const double a = weights.at(n);
    acc += a * trace.objective_estimates[static_cast<size_t>(n) - 1];
    total += a;
    out.push_back(acc / total - f_star);
  }
  return out;
}

RegretDiagnostic regret_bound_diagnostic(const SmoothObjective& obj, const Penalty& penalty,
                                         const RunTrace& trace, const ParamVector& theta_star,
                                         const StepSchedule& steps, const WeightSchedule& weights) {
  if (trace.eta_history.size() != static_cast<size_t>(trace.n_iters)) {
    throw UnsupportedOperation(
        "regret_bound_diagnostic: requires an instrumented run with recorded eta history");
  }
  if (!obj.has_value()) {
    throw UnsupportedOperation("regret_bound_diagnostic: requires a tractable objective value");
  }
  require(trace.thin == 1, "regret_bound_diagnostic: dense trace required");
  require_finite(theta_star, "regret_bound_diagnostic");

  const double f_star = objective_value(obj, penalty, theta_star);

  RegretDiagnostic diag;
  diag.bound.reserve(static_cast<size_t>(trace.n_iters));
  diag.weighted_gap.reserve(static_cast<size_t>(trace.n_iters));

  double a_total = 0.0;
  double gap_acc = 0.0;    // sum a_k F(theta_k)
  double quad_acc = 0.0;   // sum_{k>=2} (a_k/g_k - a_{k-1}/g_{k-1}) ||theta_{k-1} - theta*||^2
  double noise_acc = 0.0;  // sum a_k (gamma_k ||eta_k||^2 - <T(theta_{k-1}) - theta*, eta_k>)
  double prev_ratio = 0.0;
  const double head = weights.at(1) / (2.0 * steps.at(1)) * (trace.theta0 - theta_star).squaredNorm();

  for (int k = 1; k <= trace.n_iters; ++k) {
    const double a = weights.at(k);
    const double gamma = steps.at(k);
    const ParamVector& prev = (k == 1) ? trace.theta0 : trace.iterate_at(k - 1);
    const ParamVector& cur = trace.iterate_at(k);
    const ParamVector& eta = trace.eta_history[static_cast<size_t>(k) - 1];

    a_total += a;
    gap_acc += a * objective_value(obj, penalty, cur);
    if (k >= 2) {
      quad_acc += (a / gamma - prev_ratio) * (prev - theta_star).squaredNorm();
    }
    prev_ratio = a / gamma;
    const ParamVector t_prev = proximal_map(obj, penalty, prev, gamma);
    noise_acc += a * (gamma * eta.squaredNorm() - (t_prev - theta_star).dot(eta));

    const double bound = (head + 0.5 * quad_acc + noise_acc) / a_total;
    const double gap = gap_acc / a_total - f_star;
    diag.bound.push_back(bound);
    diag.weighted_gap.push_back(gap);
    if (gap > bound + diag.tolerance && diag.first_violation < 0) {
      diag.holds = false;
      diag.first_violation = k;
    }
  }
  return diag;
}

}  // namespace stochprox
