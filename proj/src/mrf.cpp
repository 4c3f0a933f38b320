#include "stochprox/models/mrf.hpp"

#include <cmath>

namespace stochprox {

namespace {

constexpr double kMaxEnumerableStates = 2e6;

void check_theta(const ParamVector& theta, const MRFModel& model, const char* who) {
  require_finite(theta, who);
  require(theta.size() == sym_dim(model.p), std::string(who) + ": packed theta has wrong length");
}

double enumerable_count(const MRFModel& model) {
  return std::pow(static_cast<double>(model.n_states()), model.p);
}

void check_enumerable(const MRFModel& model, const char* who) {
  if (!mrf_enumerable(model)) {
    throw UnsupportedOperation(std::string(who) +
                               ": state space too large to enumerate; use the Gibbs oracle "
                               "(make_mrf_gibbs_oracle) instead");
  }
}

bool next_config(MRFConfig& x, int n_states) {  // odometer; false when wrapped
  for (int i = 0; i < x.size(); ++i) {
    if (++x[i] < n_states) return true;
    x[i] = 0;
  }
  return false;
}

/// Accumulates B-bar(x) directly in packed form, scaled by `weight`.
void add_packed_suff_stats(const MRFConfig& x, const MRFModel& model, double weight,
                           ParamVector& acc) {
  for (int i = 0; i < model.p; ++i) {
    acc[sym_index(i, i)] += weight * model.b0[x[i]];
    for (int j = 0; j < i; ++j) {
      acc[sym_index(i, j)] += weight * model.b(x[i], x[j]);
    }
  }
}

}  // namespace

MRFModel MRFModel::ising(int p) {
  MRFModel m;
  m.p = p;
  m.state_values = Eigen::Vector2d(-1.0, 1.0);
  m.b0 = m.state_values;
  m.b = m.state_values * m.state_values.transpose();
  return m;
}

Eigen::MatrixXd unpack_sym(const ParamVector& packed, int p) {
  require(packed.size() == sym_dim(p), "unpack_sym: wrong packed length");
  Eigen::MatrixXd m(p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j <= i; ++j) {
      m(i, j) = m(j, i) = packed[sym_index(i, j)];
    }
  }
  return m;
}

ParamVector pack_sym(const Eigen::MatrixXd& m) {
  require(m.rows() == m.cols(), "pack_sym: matrix not square");
  const int p = static_cast<int>(m.rows());
  ParamVector packed(sym_dim(p));
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j <= i; ++j) {
      packed[sym_index(i, j)] = m(i, j);
    }
  }
  return packed;
}

Eigen::MatrixXd mrf_suff_stats(const MRFConfig& x, const MRFModel& model) {
  require(x.size() == model.p, "mrf_suff_stats: configuration has wrong length");
  Eigen::MatrixXd s(model.p, model.p);
  for (int i = 0; i < model.p; ++i) {
    s(i, i) = model.b0[x[i]];
    for (int j = 0; j < i; ++j) {
      s(i, j) = s(j, i) = model.b(x[i], x[j]);
    }
  }
  return s;
}

double mrf_log_potential(const ParamVector& theta, const MRFConfig& x, const MRFModel& model) {
  check_theta(theta, model, "mrf_log_potential");
  double lp = 0.0;
  for (int i = 0; i < model.p; ++i) {
    lp += theta[sym_index(i, i)] * model.b0[x[i]];
    for (int j = 0; j < i; ++j) {
      lp += theta[sym_index(i, j)] * model.b(x[i], x[j]);
    }
  }
  return lp;
}

bool mrf_enumerable(const MRFModel& model) { return enumerable_count(model) <= kMaxEnumerableStates; }

double mrf_log_partition(const ParamVector& theta, const MRFModel& model) {
  check_theta(theta, model, "mrf_log_partition");
  check_enumerable(model, "mrf_log_partition");
  MRFConfig x = MRFConfig::Zero(model.p);
  double max_lp = -std::numeric_limits<double>::infinity();
  do {
    max_lp = std::max(max_lp, mrf_log_potential(theta, x, model));
  } while (next_config(x, model.n_states()));
  x.setZero();
  double acc = 0.0;
  do {
    acc += std::exp(mrf_log_potential(theta, x, model) - max_lp);
  } while (next_config(x, model.n_states()));
  return max_lp + std::log(acc);
}

ParamVector mrf_model_mean(const ParamVector& theta, const MRFModel& model) {
  check_theta(theta, model, "mrf_model_mean");
  check_enumerable(model, "mrf_model_mean");
  const double log_z = mrf_log_partition(theta, model);
  ParamVector mean = ParamVector::Zero(sym_dim(model.p));
  MRFConfig x = MRFConfig::Zero(model.p);
  do {
    const double w = std::exp(mrf_log_potential(theta, x, model) - log_z);
    add_packed_suff_stats(x, model, w, mean);
  } while (next_config(x, model.n_states()));
  return mean;
}

ParamVector mrf_data_mean(const MRFModel& model) {
  require(model.n_obs() > 0, "mrf_data_mean: model holds no data");
  ParamVector mean = ParamVector::Zero(sym_dim(model.p));
  for (int r = 0; r < model.n_obs(); ++r) {
    const MRFConfig x = model.data.row(r).transpose();
    add_packed_suff_stats(x, model, 1.0 / model.n_obs(), mean);
  }
  return mean;
}

double mrf_loglik(const ParamVector& theta, const MRFModel& model) {
  return theta.dot(mrf_data_mean(model)) - mrf_log_partition(theta, model);
}

ParamVector mrf_exact_gradient(const ParamVector& theta, const MRFModel& model) {
  return mrf_data_mean(model) - mrf_model_mean(theta, model);
}

SmoothObjective mrf_negloglik_objective(const MRFModel& model) {
  check_enumerable(model, "mrf_negloglik_objective");
  const ParamVector data_mean = mrf_data_mean(model);
  SmoothObjective obj;
  obj.gradient = [model, data_mean](const ParamVector& theta) -> ParamVector {
    return mrf_model_mean(theta, model) - data_mean;
  };
  obj.value = [model, data_mean](const ParamVector& theta) {
    return mrf_log_partition(theta, model) - theta.dot(data_mean);
  };
  obj.lipschitz = mrf_lipschitz_bound(model);
  return obj;
}

MRFConfig mrf_gibbs_step(const ParamVector& theta, MRFConfig x, const MRFModel& model,
                         std::mt19937_64& rng) {
  check_theta(theta, model, "mrf_gibbs_step");
  require(x.size() == model.p, "mrf_gibbs_step: configuration has wrong length");
  const int S = model.n_states();
  Eigen::VectorXd logits(S), probs(S);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int i = 0; i < model.p; ++i) {
    for (int s = 0; s < S; ++s) {
      double lp = theta[sym_index(i, i)] * model.b0[s];
      for (int j = 0; j < model.p; ++j) {
        if (j == i) continue;
        const auto idx = (i > j) ? sym_index(i, j) : sym_index(j, i);
        lp += theta[idx] * model.b(s, x[j]);
      }
      logits[s] = lp;
    }
    const double m = logits.maxCoeff();
    probs = (logits.array() - m).exp();
    probs /= probs.sum();
    double u = unif(rng);
    int pick = S - 1;
    for (int s = 0; s < S; ++s) {
      u -= probs[s];
      if (u <= 0.0) {
        pick = s;
        break;
      }
    }
    x[i] = pick;
  }
  return x;
}

MRFConfig mrf_exact_sample(const ParamVector& theta, const MRFModel& model, std::mt19937_64& rng) {
  check_enumerable(model, "mrf_exact_sample");
  const double log_z = mrf_log_partition(theta, model);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double u = unif(rng);
  MRFConfig x = MRFConfig::Zero(model.p);
  MRFConfig last = x;
  do {
    last = x;
    u -= std::exp(mrf_log_potential(theta, x, model) - log_z);
    if (u <= 0.0) return x;
  } while (next_config(x, model.n_states()));
  return last;  // numerical slack: return the final state
}

Eigen::MatrixXi mrf_sample_data(const ParamVector& theta, const MRFModel& model, int n,
                                std::mt19937_64& rng) {
  Eigen::MatrixXi out(n, model.p);
  for (int r = 0; r < n; ++r) {
    out.row(r) = mrf_exact_sample(theta, model, rng).transpose();
  }
  return out;
}

double mrf_lipschitz_bound(const MRFModel& model) {
  const double osc_b = model.b.maxCoeff() - model.b.minCoeff();
  const double osc_b0 = model.b0.maxCoeff() - model.b0.minCoeff();
  return model.p * ((model.p - 1) * osc_b * osc_b + osc_b0 * osc_b0);
}

LipschitzCheck mrf_lipschitz_check(const MRFModel& model, int pairs, std::mt19937_64& rng) {
  check_enumerable(model, "mrf_lipschitz_check");
  LipschitzCheck out;
  out.bound = mrf_lipschitz_bound(model);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const Eigen::Index d = sym_dim(model.p);
  // The data term cancels in gradient differences, so comparing model means
  // is enough and no observations are required.
  for (int k = 0; k < pairs; ++k) {
    ParamVector a(d), b(d);
    for (Eigen::Index i = 0; i < d; ++i) a[i] = unif(rng);
    for (Eigen::Index i = 0; i < d; ++i) b[i] = unif(rng);
    const double dist = (a - b).norm();
    if (dist == 0.0) continue;
    const double ratio = (mrf_model_mean(a, model) - mrf_model_mean(b, model)).norm() / dist;
    out.max_ratio = std::max(out.max_ratio, ratio);
  }
  out.holds = out.max_ratio <= out.bound + 1e-8;
  return out;
}

namespace {

/// Per-theta cache of the enumerated distribution, rebuilt when theta moves.
struct EnumerationCache {
  ParamVector theta;
  std::vector<double> cdf;
  std::vector<MRFConfig> configs;

  void rebuild(const ParamVector& th, const MRFModel& model) {
    theta = th;
    const double log_z = mrf_log_partition(th, model);
    configs.clear();
    cdf.clear();
    double acc = 0.0;
    MRFConfig x = MRFConfig::Zero(model.p);
    do {
      acc += std::exp(mrf_log_potential(th, x, model) - log_z);
      configs.push_back(x);
      cdf.push_back(acc);
    } while (next_config(x, model.n_states()));
  }
};

}  // namespace

std::unique_ptr<MonteCarloOracle<MRFConfig>> make_mrf_iid_oracle(const MRFModel& model) {
  check_enumerable(model, "make_mrf_iid_oracle");
  const ParamVector data_mean = mrf_data_mean(model);

  auto cache = std::make_shared<EnumerationCache>();
  IidSampler<MRFConfig> sampler;
  sampler.draw = [model, cache](const ParamVector& theta, std::mt19937_64& rng) -> MRFConfig {
    if (cache->theta.size() != theta.size() || (cache->theta.array() != theta.array()).any()) {
      cache->rebuild(theta, model);
    }
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double u = unif(rng);
    const auto it = std::lower_bound(cache->cdf.begin(), cache->cdf.end(), u);
    const size_t idx = std::min<size_t>(static_cast<size_t>(it - cache->cdf.begin()),
                                        cache->configs.size() - 1);
    return cache->configs[idx];
  };

  auto integrand = [model, data_mean](const ParamVector& theta, const MRFConfig& x) -> ParamVector {
    ParamVector h = ParamVector::Zero(theta.size());
    add_packed_suff_stats(x, model, 1.0, h);
    return h - data_mean;
  };
  auto true_grad = [model, data_mean](const ParamVector& theta) -> ParamVector {
    return mrf_model_mean(theta, model) - data_mean;
  };
  return std::make_unique<MonteCarloOracle<MRFConfig>>(integrand, sampler, true_grad);
}

std::unique_ptr<MonteCarloOracle<MRFConfig>> make_mrf_gibbs_oracle(const MRFModel& model,
                                                                   bool warm_start, int burn_in) {
  const ParamVector data_mean = mrf_data_mean(model);

  MarkovSampler<MRFConfig> sampler;
  sampler.init = [model](const ParamVector&, std::mt19937_64&) -> MRFConfig {
    return MRFConfig::Zero(model.p);
  };
  sampler.kernel = [model](const ParamVector& theta, const MRFConfig& x,
                           std::mt19937_64& rng) -> MRFConfig {
    return mrf_gibbs_step(theta, x, model, rng);
  };
  sampler.warm_start = warm_start;
  sampler.burn_in = burn_in;

  auto integrand = [model, data_mean](const ParamVector& theta, const MRFConfig& x) -> ParamVector {
    ParamVector h = ParamVector::Zero(theta.size());
    add_packed_suff_stats(x, model, 1.0, h);
    return h - data_mean;
  };
  std::function<ParamVector(const ParamVector&)> true_grad;
  if (mrf_enumerable(model)) {
    true_grad = [model, data_mean](const ParamVector& theta) -> ParamVector {
      return mrf_model_mean(theta, model) - data_mean;
    };
  }
  return std::make_unique<MonteCarloOracle<MRFConfig>>(integrand, sampler, true_grad);
}

}  // namespace stochprox
