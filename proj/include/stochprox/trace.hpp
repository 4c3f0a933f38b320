#pragma once

#include <cstdint>
#include <vector>

#include "stochprox/types.hpp"

namespace stochprox {

/// Per-iteration record of one solver run. Row k (0-based) describes iteration
/// n = k+1; the starting point theta_0 is kept separately. Objective estimates
/// and sample counts are always dense; iterates may be thinned (`thin` > 1
/// keeps every thin-th iterate plus the last one), and kkt residuals / eta
/// instrumentation are only present when an exact gradient was available.
struct RunTrace {
  ParamVector theta0;
  std::vector<ParamVector> iterates;        // thinned; see iterate_steps
  std::vector<int> iterate_steps;           // iteration number of each stored iterate
  std::vector<double> objective_estimates;  // F-hat(theta_n), may be empty if no evaluator
  std::vector<long long> samples_per_iter;  // Monte Carlo samples consumed at iteration n
  std::vector<long long> cumulative_samples;
  std::vector<double> kkt_residuals;        // empty if not instrumented
  std::vector<ParamVector> eta_history;     // eta_n = H_n - grad f(theta_{n-1}); empty if not instrumented
  std::vector<double> gammas;               // gamma_n actually used
  std::uint64_t seed = 0;
  int n_iters = 0;
  int thin = 1;

  int size() const { return n_iters; }

  /// Final iterate (requires at least one stored iterate).
  const ParamVector& final_iterate() const {
    require(!iterates.empty(), "RunTrace: empty trace");
    return iterates.back();
  }

  /// Iterate at iteration n (1-based). Only valid when thin == 1.
  const ParamVector& iterate_at(int n) const {
    require(thin == 1, "RunTrace: dense iterates required (thin == 1)");
    require(n >= 1 && n <= n_iters, "RunTrace: iteration out of range");
    return iterates[static_cast<size_t>(n) - 1];
  }
};

}  // namespace stochprox
