#include "stochprox/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "stochprox/rng.hpp"

namespace stochprox {

SupportMetrics sensitivity_precision(const ParamVector& beta_n, const ParamVector& beta_ref) {
  require(beta_n.size() == beta_ref.size(), "sensitivity_precision: length mismatch");
  int hits = 0, ref_support = 0, est_support = 0;
  for (Eigen::Index i = 0; i < beta_n.size(); ++i) {
    const bool in_est = beta_n[i] != 0.0;
    const bool in_ref = beta_ref[i] != 0.0;
    hits += (in_est && in_ref) ? 1 : 0;
    ref_support += in_ref ? 1 : 0;
    est_support += in_est ? 1 : 0;
  }
  SupportMetrics out;
  if (ref_support > 0) out.sensitivity = static_cast<double>(hits) / ref_support;
  if (est_support > 0) out.precision = static_cast<double>(hits) / est_support;
  return out;
}

std::optional<double> relative_error(const ParamVector& beta_n, const ParamVector& beta_ref) {
  require(beta_n.size() == beta_ref.size(), "relative_error: length mismatch");
  const double ref_norm = beta_ref.norm();
  if (ref_norm == 0.0) return std::nullopt;
  return (beta_n - beta_ref).norm() / ref_norm;
}

namespace {

double ols_slope(const std::vector<double>& lx, const std::vector<double>& ly,
                 const std::vector<int>& idx, double* intercept) {
  const double n = static_cast<double>(idx.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (int i : idx) {
    sx += lx[static_cast<size_t>(i)];
    sy += ly[static_cast<size_t>(i)];
    sxx += lx[static_cast<size_t>(i)] * lx[static_cast<size_t>(i)];
    sxy += lx[static_cast<size_t>(i)] * ly[static_cast<size_t>(i)];
  }
  const double denom = n * sxx - sx * sx;
  const double slope = denom != 0.0 ? (n * sxy - sx * sy) / denom : 0.0;
  if (intercept) *intercept = (sy - slope * sx) / n;
  return slope;
}

}  // namespace

RateFit fit_rate(const std::vector<double>& x, const std::vector<double>& y, int begin, int end,
                 int bootstrap, std::uint64_t seed) {
  require(x.size() == y.size(), "fit_rate: x and y lengths differ");
  begin = std::max(begin, 0);
  end = std::min<int>(end, static_cast<int>(x.size()));
  require(begin < end, "fit_rate: empty window");

  RateFit fit;
  std::vector<double> lx, ly;
  for (int i = begin; i < end; ++i) {
    if (x[static_cast<size_t>(i)] > 0.0 && y[static_cast<size_t>(i)] > 0.0) {
      lx.push_back(std::log(x[static_cast<size_t>(i)]));
      ly.push_back(std::log(y[static_cast<size_t>(i)]));
    } else {
      fit.window_shrunk = true;
    }
  }
  require(lx.size() >= 2, "fit_rate: fewer than two positive points in window");
  fit.points_used = static_cast<int>(lx.size());

  std::vector<int> all(lx.size());
  for (size_t i = 0; i < lx.size(); ++i) all[i] = static_cast<int>(i);
  fit.slope = ols_slope(lx, ly, all, &fit.intercept);

  if (bootstrap > 1) {
    std::mt19937_64 rng = make_stream(seed, 0xB007u);
    std::uniform_int_distribution<int> pick(0, static_cast<int>(lx.size()) - 1);
    std::vector<double> slopes(static_cast<size_t>(bootstrap));
    std::vector<int> sample(lx.size());
    for (int b = 0; b < bootstrap; ++b) {
      for (size_t i = 0; i < lx.size(); ++i) sample[i] = pick(rng);
      slopes[static_cast<size_t>(b)] = ols_slope(lx, ly, sample, nullptr);
    }
    fit.ci_lo = quantile(slopes, 0.025);
    fit.ci_hi = quantile(slopes, 0.975);
  } else {
    fit.ci_lo = fit.ci_hi = fit.slope;
  }
  return fit;
}

RateFit fit_rate(const std::vector<double>& x, const std::vector<double>& y) {
  const int n = static_cast<int>(x.size());
  return fit_rate(x, y, n / 5, n);
}

double quantile(std::vector<double> values, double q) {
  require(!values.empty(), "quantile: empty input");
  require(q >= 0.0 && q <= 1.0, "quantile: q must be in [0,1]");
  std::sort(values.begin(), values.end());
  const double pos = q * (static_cast<double>(values.size()) - 1.0);
  const auto lo = static_cast<size_t>(std::floor(pos));
  const auto hi = static_cast<size_t>(std::ceil(pos));
  if (values[lo] == values[hi]) return values[lo];
  const double frac = pos - static_cast<double>(lo);
  return values[lo] * (1.0 - frac) + values[hi] * frac;
}

}  // namespace stochprox
