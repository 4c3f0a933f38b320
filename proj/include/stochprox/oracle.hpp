#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <variant>
#include <vector>

#include "stochprox/objective.hpp"
#include "stochprox/types.hpp"

namespace stochprox {

struct OracleResult {
  ParamVector gradient;      // H, the approximation of grad f(theta)
  long long samples_used = 0;
};

/// Thrown when a sampler fails inside an oracle; carries the iteration so the
/// solver can attach a partial trace.
class OracleError : public std::runtime_error {
 public:
  OracleError(const std::string& what, int iteration)
      : std::runtime_error(what + " (iteration " + std::to_string(iteration) + ")"),
        iteration_(iteration) {}
  int iteration() const { return iteration_; }

 private:
  int iteration_;
};

/// Gradient-approximation strategy plugged into the perturbed solvers. For
/// Monte Carlo variants `samples_used` equals the batch size (plus burn-in for
/// fresh-start chains); the exact oracle reports 0.
class GradientOracle {
 public:
  virtual ~GradientOracle() = default;

  virtual OracleResult evaluate(const ParamVector& theta, int iteration, long long batch,
                                std::mt19937_64& rng) = 0;

  /// Clears warm-start state so independent replications do not share chains.
  virtual void reset() {}

  /// Exact gradient, when the underlying model is tractable. Enables eta
  /// instrumentation (regret-bound diagnostics) on toy problems; intractable
  /// models return nullopt by design.
  virtual std::optional<ParamVector> true_gradient(const ParamVector&) const { return std::nullopt; }
};

/// eta = 0 baseline: returns grad f(theta) and consumes no samples.
class ExactOracle final : public GradientOracle {
 public:
  explicit ExactOracle(SmoothObjective obj) : obj_(std::move(obj)) {
    if (!obj_.gradient) throw std::invalid_argument("ExactOracle: gradient callable required");
  }

  OracleResult evaluate(const ParamVector& theta, int, long long, std::mt19937_64&) override {
    ParamVector g = obj_.gradient(theta);
    require_finite(g, "ExactOracle");
    return {std::move(g), 0};
  }

  std::optional<ParamVector> true_gradient(const ParamVector& theta) const override {
    return obj_.gradient(theta);
  }

 private:
  SmoothObjective obj_;
};

/// Adds user-supplied noise to an exact gradient; used to study the solvers
/// under controlled perturbations.
class NoisyOracle final : public GradientOracle {
 public:
  using NoiseFn = std::function<ParamVector(const ParamVector& theta, int iteration,
                                            std::mt19937_64& rng)>;

  NoisyOracle(SmoothObjective obj, NoiseFn noise) : obj_(std::move(obj)), noise_(std::move(noise)) {}

  OracleResult evaluate(const ParamVector& theta, int iteration, long long,
                        std::mt19937_64& rng) override {
    return {obj_.gradient(theta) + noise_(theta, iteration, rng), 0};
  }

  std::optional<ParamVector> true_gradient(const ParamVector& theta) const override {
    return obj_.gradient(theta);
  }

 private:
  SmoothObjective obj_;
  NoiseFn noise_;
};

/// Minibatch oracle for f = N^{-1} sum_i f_i: H = m^{-1} sum_k grad f_{I_k},
/// I_k i.i.d. uniform on {1..N}. With full_batch set, sampling is replaced by
/// enumeration of all N components (H is then the exact gradient).
class MinibatchOracle final : public GradientOracle {
 public:
  using ComponentGradient = std::function<ParamVector(const ParamVector&)>;

  MinibatchOracle(std::vector<ComponentGradient> components, bool full_batch = false);

  OracleResult evaluate(const ParamVector& theta, int iteration, long long batch,
                        std::mt19937_64& rng) override;

  std::optional<ParamVector> true_gradient(const ParamVector& theta) const override;

 private:
  std::vector<ComponentGradient> components_;
  bool full_batch_;
};

/// i.i.d. Monte Carlo sampling from the current target pi_theta.
template <class State>
struct IidSampler {
  std::function<State(const ParamVector& theta, std::mt19937_64&)> draw;
};

/// Markov kernel P_theta with invariant distribution pi_theta. Warm start
/// (default) continues the chain of the previous solver iteration; fresh start
/// draws from init and discards burn_in kernel steps.
template <class State>
struct MarkovSampler {
  std::function<State(const ParamVector& theta, std::mt19937_64&)> init;
  std::function<State(const ParamVector& theta, const State&, std::mt19937_64&)> kernel;
  int burn_in = 0;
  bool warm_start = true;
};

/// Monte Carlo gradient oracle H = m^{-1} sum_j H_theta(X_j) with X_j drawn
/// i.i.d. from pi_theta or along a Markov chain with kernel P_theta.
/// samples_used counts every kernel invocation, burn-in included.
template <class State>
class MonteCarloOracle final : public GradientOracle {
 public:
  using Integrand = std::function<ParamVector(const ParamVector& theta, const State&)>;
  using Sampler = std::variant<IidSampler<State>, MarkovSampler<State>>;

  MonteCarloOracle(Integrand h, Sampler sampler,
                   std::function<ParamVector(const ParamVector&)> true_grad = nullptr)
      : h_(std::move(h)), sampler_(std::move(sampler)), true_grad_(std::move(true_grad)) {}

  OracleResult evaluate(const ParamVector& theta, int iteration, long long batch,
                        std::mt19937_64& rng) override {
    if (batch < 1) throw OracleError("MonteCarloOracle: batch must be >= 1", iteration);
    try {
      if (std::holds_alternative<IidSampler<State>>(sampler_)) {
        return evaluate_iid(theta, batch, rng);
      }
      return evaluate_markov(theta, batch, rng);
    } catch (const OracleError&) {
      throw;
    } catch (const std::exception& e) {
      throw OracleError(std::string("MonteCarloOracle: sampler failed: ") + e.what(), iteration);
    }
  }

  void reset() override { chain_.reset(); }

  std::optional<ParamVector> true_gradient(const ParamVector& theta) const override {
    if (!true_grad_) return std::nullopt;
    return true_grad_(theta);
  }

 private:
  OracleResult evaluate_iid(const ParamVector& theta, long long batch, std::mt19937_64& rng) {
    const auto& s = std::get<IidSampler<State>>(sampler_);
    ParamVector acc;
    for (long long j = 0; j < batch; ++j) {
      State x = s.draw(theta, rng);
      ParamVector h = h_(theta, x);
      if (acc.size() == 0) {
        acc = std::move(h);
      } else {
        acc += h;
      }
    }
    acc /= static_cast<double>(batch);
    require_finite(acc, "MonteCarloOracle");
    return {std::move(acc), batch};
  }

  OracleResult evaluate_markov(const ParamVector& theta, long long batch, std::mt19937_64& rng) {
    const auto& s = std::get<MarkovSampler<State>>(sampler_);
    long long used = 0;
    if (!s.warm_start || !chain_) {
      chain_ = s.init(theta, rng);
      for (int b = 0; b < s.burn_in; ++b) {
        chain_ = s.kernel(theta, *chain_, rng);
        ++used;
      }
    }
    ParamVector acc;
    for (long long j = 0; j < batch; ++j) {
      chain_ = s.kernel(theta, *chain_, rng);
      ++used;
      ParamVector h = h_(theta, *chain_);
      if (acc.size() == 0) {
        acc = std::move(h);
      } else {
        acc += h;
      }
    }
    acc /= static_cast<double>(batch);
    require_finite(acc, "MonteCarloOracle");
    return {std::move(acc), used};
  }

  Integrand h_;
  Sampler sampler_;
  std::function<ParamVector(const ParamVector&)> true_grad_;
  std::optional<State> chain_;
};

/// Empirical bias / second-moment estimates of the oracle error
/// eta = H - grad f(theta), averaged over independent replications.
struct OracleMoments {
  double bias_norm_estimate = 0.0;       // ||mean eta||
  double bias_norm_se = 0.0;             // norm of the componentwise standard errors
  ParamVector bias_mean;                 // componentwise mean of eta
  ParamVector bias_se;                   // componentwise standard error
  double second_moment_estimate = 0.0;   // mean ||eta||^2
  double second_moment_se = 0.0;
  int replications = 0;
};

/// Runs `replications` independent oracle calls at fixed theta and batch size
/// and compares against the supplied exact gradient. The oracle is reset
/// before each replication so chains are independent.
OracleMoments estimate_oracle_moments(GradientOracle& oracle,
                                      const std::function<ParamVector(const ParamVector&)>& exact_gradient,
                                      const ParamVector& theta, long long batch, int replications,
                                      std::uint64_t seed);

}  // namespace stochprox
