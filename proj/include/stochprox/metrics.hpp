#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stochprox/types.hpp"

namespace stochprox {

/// Support-recovery ratios against a reference solution. Soft-thresholding
/// produces exact zeros, so support is tested with an exact zero comparison.
/// A ratio is absent (undefined-metric marker) when its denominator support is
/// empty.
struct SupportMetrics {
  std::optional<double> sensitivity;  // |supp(b) ∩ supp(ref)| / |supp(ref)|
  std::optional<double> precision;    // |supp(b) ∩ supp(ref)| / |supp(b)|
};

SupportMetrics sensitivity_precision(const ParamVector& beta_n, const ParamVector& beta_ref);

/// ||beta_n - beta_ref|| / ||beta_ref||; absent when the reference is zero.
std::optional<double> relative_error(const ParamVector& beta_n, const ParamVector& beta_ref);

/// Named per-iteration series plus the two x-axes the experiments plot
/// against (iteration count and total Monte Carlo samples).
struct MetricSeries {
  std::vector<double> iterations;
  std::vector<double> cumulative_samples;
  std::map<std::string, std::vector<double>> series;
};

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double ci_lo = 0.0;    // bootstrap percentile CI for the slope
  double ci_hi = 0.0;
  int points_used = 0;
  bool window_shrunk = false;  // nonpositive values were dropped from the window
};

/// Least-squares slope of log(y) vs log(x) over the index window
/// [begin, end). Points with nonpositive x or y are dropped (window
/// auto-shrink); the CI comes from `bootstrap` pair resamples.
RateFit fit_rate(const std::vector<double>& x, const std::vector<double>& y, int begin, int end,
                 int bootstrap = 200, std::uint64_t seed = 0);

/// Convenience overload using the default window, which drops the first 20%
/// of the series as transient.
RateFit fit_rate(const std::vector<double>& x, const std::vector<double>& y);

/// Linear-interpolation quantile of a copy of `values` (q in [0,1]).
double quantile(std::vector<double> values, double q);

}  // namespace stochprox
