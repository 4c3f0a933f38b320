#include "stochprox/oracle.hpp"

#include <cmath>

#include "stochprox/rng.hpp"

namespace stochprox {

MinibatchOracle::MinibatchOracle(std::vector<ComponentGradient> components, bool full_batch)
    : components_(std::move(components)), full_batch_(full_batch) {
  require(!components_.empty(), "MinibatchOracle: component list must not be empty");
}

OracleResult MinibatchOracle::evaluate(const ParamVector& theta, int iteration, long long batch,
                                       std::mt19937_64& rng) {
  const auto N = static_cast<long long>(components_.size());
  if (full_batch_) {
    ParamVector acc = components_[0](theta);
    for (long long i = 1; i < N; ++i) acc += components_[static_cast<size_t>(i)](theta);
    acc /= static_cast<double>(N);
    return {std::move(acc), N};
  }
  if (batch < 1) throw OracleError("MinibatchOracle: batch must be >= 1", iteration);
  std::uniform_int_distribution<long long> pick(0, N - 1);
  ParamVector acc;
  for (long long k = 0; k < batch; ++k) {
    ParamVector g = components_[static_cast<size_t>(pick(rng))](theta);
    if (acc.size() == 0) {
      acc = std::move(g);
    } else {
      acc += g;
    }
  }
  acc /= static_cast<double>(batch);
  require_finite(acc, "MinibatchOracle");
  return {std::move(acc), batch};
}

std::optional<ParamVector> MinibatchOracle::true_gradient(const ParamVector& theta) const {
  ParamVector acc = components_[0](theta);
  for (size_t i = 1; i < components_.size(); ++i) acc += components_[i](theta);
  return acc / static_cast<double>(components_.size());
}

OracleMoments estimate_oracle_moments(
    GradientOracle& oracle, const std::function<ParamVector(const ParamVector&)>& exact_gradient,
    const ParamVector& theta, long long batch, int replications, std::uint64_t seed) {
  require(replications >= 2, "estimate_oracle_moments: need at least 2 replications");
  const ParamVector g_star = exact_gradient(theta);

  const Eigen::Index d = g_star.size();
  ParamVector sum = ParamVector::Zero(d);
  ParamVector sumsq = ParamVector::Zero(d);
  double sq_sum = 0.0, sq_sumsq = 0.0;
  for (int r = 0; r < replications; ++r) {
    oracle.reset();
    std::mt19937_64 rng = make_stream(seed, static_cast<std::uint64_t>(r), 0x0Au);
    const OracleResult res = oracle.evaluate(theta, 1, batch, rng);
    const ParamVector eta = res.gradient - g_star;
    sum += eta;
    sumsq += eta.cwiseProduct(eta);
    const double sq = eta.squaredNorm();
    sq_sum += sq;
    sq_sumsq += sq * sq;
  }

  const double R = static_cast<double>(replications);
  OracleMoments m;
  m.replications = replications;
  m.bias_mean = sum / R;
  ParamVector var = (sumsq - R * m.bias_mean.cwiseProduct(m.bias_mean)) / (R - 1.0);
  var = var.cwiseMax(0.0);
  m.bias_se = (var / R).cwiseSqrt();
  m.bias_norm_estimate = m.bias_mean.norm();
  m.bias_norm_se = m.bias_se.norm();
  m.second_moment_estimate = sq_sum / R;
  const double sq_var = std::max(0.0, (sq_sumsq - R * m.second_moment_estimate * m.second_moment_estimate) / (R - 1.0));
  m.second_moment_se = std::sqrt(sq_var / R);
  return m;
}

}  // namespace stochprox
