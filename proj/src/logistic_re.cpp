#include "stochprox/models/logistic_re.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "stochprox/rng.hpp"

namespace stochprox {

namespace {

constexpr double kPi = std::numbers::pi;

void check_theta_dim(const ParamVector& theta, const LogisticREModel& model, const char* who) {
  require(theta.size() == model.p() + 1,
          std::string(who) + ": theta must have length p+1 (beta, sigma)");
  require_finite(theta, who);
}

/// Conditional log-likelihood ell_c(theta | u) = sum_i Y_i eta_i - softplus(eta_i).
double conditional_loglik(const Eigen::VectorXd& xb, double sigma, const Eigen::VectorXd& zu,
                          const Eigen::VectorXi& y) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < xb.size(); ++i) {
    const double eta = xb[i] + sigma * zu[i];
    acc += y[i] * eta - softplus(eta);
  }
  return acc;
}

/// Cholesky factor of the u | w precision I + sigma^2 Z' diag(w) Z together
/// with the conditional mean mu = precision^{-1} (sigma Z'((Y-1/2) - w .* Xb)).
struct UConditionalFactor {
  Eigen::LLT<Eigen::MatrixXd> llt;
  Eigen::VectorXd mu;
};

UConditionalFactor u_conditional_factor(const ParamVector& theta, const Eigen::VectorXd& w,
                                        const LogisticREModel& model, const Eigen::VectorXd& xb,
                                        const char* who) {
  const int q = model.q();
  const double sigma = theta[model.p()];

  Eigen::MatrixXd precision = Eigen::MatrixXd::Identity(q, q);
  precision.noalias() += sigma * sigma * model.Z.transpose() * w.asDiagonal() * model.Z;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(q);
  for (int i = 0; i < model.n(); ++i) {
    rhs += ((model.Y[i] - 0.5) - w[i] * xb[i]) * model.Z.row(i).transpose();
  }
  rhs *= sigma;

  UConditionalFactor out;
  out.llt.compute(precision);
  if (out.llt.info() != Eigen::Success) {
    // one symmetric regularization retry before giving up
    precision.diagonal().array() += 1e-12;
    out.llt.compute(precision);
    if (out.llt.info() != Eigen::Success) {
      throw std::runtime_error(std::string(who) + ": conditional covariance is not SPD");
    }
  }
  out.mu = out.llt.solve(rhs);
  return out;
}

}  // namespace

void LogisticREModel::validate() const {
  require(X.rows() == Z.rows() && X.rows() == Y.size(),
          "LogisticREModel: X, Z, Y row counts differ");
  for (Eigen::Index i = 0; i < Y.size(); ++i) {
    require(Y[i] == 0 || Y[i] == 1, "LogisticREModel: Y must be binary");
  }
}

ParamVector logistic_H(const ParamVector& theta, const Eigen::VectorXd& u,
                       const LogisticREModel& model) {
  check_theta_dim(theta, model, "logistic_H");
  require(u.size() == model.q(), "logistic_H: u must have length q");
  const int p = model.p();
  const double sigma = theta[p];

  ParamVector h = ParamVector::Zero(p + 1);
  if (model.n() == 0) return h;

  const Eigen::VectorXd xb = model.X * theta.head(p);
  const Eigen::VectorXd zu = model.Z * u;
  Eigen::VectorXd resid(model.n());
  for (int i = 0; i < model.n(); ++i) {
    resid[i] = model.Y[i] - sigmoid(xb[i] + sigma * zu[i]);
  }
  h.head(p) = -model.X.transpose() * resid;
  h[p] = -resid.dot(zu);
  return h;
}

GibbsConditional gibbs_u_conditional(const ParamVector& theta, const Eigen::VectorXd& w,
                                     const LogisticREModel& model) {
  check_theta_dim(theta, model, "gibbs_u_conditional");
  require(w.size() == model.n(), "gibbs_u_conditional: w must have length N");
  const Eigen::VectorXd xb = model.X * theta.head(model.p());
  UConditionalFactor f = u_conditional_factor(theta, w, model, xb, "gibbs_u_conditional");
  GibbsConditional out;
  out.mu = std::move(f.mu);
  out.cov = f.llt.solve(Eigen::MatrixXd::Identity(model.q(), model.q()));
  return out;
}

GibbsState gibbs_step(const ParamVector& theta, const GibbsState& state,
                      const LogisticREModel& model, std::mt19937_64& rng) {
  check_theta_dim(theta, model, "gibbs_step");
  require(state.w.size() == model.n() && state.u.size() == model.q(),
          "gibbs_step: state dimensions do not match the model");
  const int p = model.p();
  const int q = model.q();
  const double sigma = theta[p];

  const Eigen::VectorXd xb = model.X * theta.head(p);
  // u' | w ~ N(mu, Gamma); draw via the Cholesky factor of the precision:
  // u' = mu + U^{-1} xi with U'U the precision, so Cov(u') = precision^{-1}.
  UConditionalFactor f = u_conditional_factor(theta, state.w, model, xb, "gibbs_step");
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd xi(q);
  for (int j = 0; j < q; ++j) xi[j] = gauss(rng);

  GibbsState next;
  next.u = f.mu + f.llt.matrixU().solve(xi);

  // w_i' ~ PG(1, |x_i' beta + sigma z_i' u'|)
  const Eigen::VectorXd zu = model.Z * next.u;
  next.w.resize(model.n());
  for (int i = 0; i < model.n(); ++i) {
    next.w[i] = sample_polya_gamma(std::abs(xb[i] + sigma * zu[i]), rng);
  }
  return next;
}

double polya_gamma_tail_mean(double c, int k_cutoff) {
  const double a = c / (2.0 * kPi);
  const double a2 = a * a;
  // sum_{k>=1} 1/((k-1/2)^2 + a^2) = (pi / 2a) tanh(pi a), -> pi^2/2 as a -> 0
  double total;
  if (a < 1e-6) {
    total = kPi * kPi / 2.0 * (1.0 - (kPi * a) * (kPi * a) / 3.0);
  } else {
    total = kPi / (2.0 * a) * std::tanh(kPi * a);
  }
  double head = 0.0;
  for (int k = 1; k <= k_cutoff; ++k) {
    const double km = k - 0.5;
    head += 1.0 / (km * km + a2);
  }
  return (total - head) / (2.0 * kPi * kPi);
}

double sample_polya_gamma(double c, std::mt19937_64& rng) {
  if (!std::isfinite(c)) throw std::invalid_argument("sample_polya_gamma: c must be finite");
  require(c >= 0.0, "sample_polya_gamma: c must be >= 0");
  const double a = c / (2.0 * kPi);
  const double a2 = a * a;
  std::exponential_distribution<double> exp1(1.0);
  double acc = 0.0;
  for (int k = 1; k <= kPolyaGammaTerms; ++k) {
    const double km = k - 0.5;
    acc += exp1(rng) / (km * km + a2);
  }
  return acc / (2.0 * kPi * kPi) + polya_gamma_tail_mean(c, kPolyaGammaTerms);
}

double logistic_loglik_mc(const ParamVector& theta, const LogisticREModel& model, int n_samples,
                          std::mt19937_64& rng) {
  check_theta_dim(theta, model, "logistic_loglik_mc");
  require(n_samples >= 1, "logistic_loglik_mc: n_samples must be >= 1");
  if (model.n() == 0) return 0.0;

  const int p = model.p();
  const int q = model.q();
  const double sigma = theta[p];
  const Eigen::VectorXd xb = model.X * theta.head(p);
  std::normal_distribution<double> gauss(0.0, 1.0);

  double max_term = -std::numeric_limits<double>::infinity();
  std::vector<double> terms(static_cast<size_t>(n_samples));
  Eigen::VectorXd u(q);
  for (int j = 0; j < n_samples; ++j) {
    for (int k = 0; k < q; ++k) u[k] = gauss(rng);
    terms[static_cast<size_t>(j)] = conditional_loglik(xb, sigma, model.Z * u, model.Y);
    max_term = std::max(max_term, terms[static_cast<size_t>(j)]);
  }
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - max_term);
  return max_term + std::log(acc) - std::log(static_cast<double>(n_samples));
}

LoglikPanel::LoglikPanel(int q, int panel_size, std::uint64_t seed) {
  require(q >= 1 && panel_size >= 1, "LoglikPanel: q and panel_size must be >= 1");
  std::mt19937_64 rng = make_stream(seed, 0x9A4E1u);
  std::normal_distribution<double> gauss(0.0, 1.0);
  panel_.resize(q, panel_size);
  for (int j = 0; j < panel_size; ++j) {
    for (int i = 0; i < q; ++i) panel_(i, j) = gauss(rng);
  }
}

double LoglikPanel::loglik(const ParamVector& theta, const LogisticREModel& model) const {
  check_theta_dim(theta, model, "LoglikPanel::loglik");
  require(panel_.rows() == model.q(), "LoglikPanel: panel q does not match the model");
  if (model.n() == 0) return 0.0;
  const int p = model.p();
  const double sigma = theta[p];
  const Eigen::VectorXd xb = model.X * theta.head(p);

  const int M = static_cast<int>(panel_.cols());
  double max_term = -std::numeric_limits<double>::infinity();
  std::vector<double> terms(static_cast<size_t>(M));
  for (int j = 0; j < M; ++j) {
    terms[static_cast<size_t>(j)] = conditional_loglik(xb, sigma, model.Z * panel_.col(j), model.Y);
    max_term = std::max(max_term, terms[static_cast<size_t>(j)]);
  }
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - max_term);
  return max_term + std::log(acc) - std::log(static_cast<double>(M));
}

void SyntheticSpec::validate() const {
  require(N >= 1 && p >= 1 && q >= 1, "SyntheticSpec: N, p, q must be >= 1");
  require(ar_rho > -1.0 && ar_rho < 1.0, "SyntheticSpec: ar_rho must be in (-1,1)");
  require(sparsity >= 0.0 && sparsity <= 1.0, "SyntheticSpec: sparsity must be in [0,1]");
  require(sigma2 > 0.0, "SyntheticSpec: sigma2 must be > 0");
  require(beta_lo <= beta_hi, "SyntheticSpec: empty beta range");
}

SyntheticSpec SyntheticSpec::desk_scale(std::uint64_t seed) {
  SyntheticSpec s;
  s.N = 100;
  s.p = 200;
  s.q = 5;
  s.lambda = 6.0;  // lambda/N kept at the full-scale ratio 30/500
  s.seed = seed;
  return s;
}

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  std::mt19937_64 rng = make_stream(spec.seed, 0xDA7Au);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  SyntheticData out;
  // Covariate columns follow a stationary AR(rho) process across column index.
  Eigen::MatrixXd X(spec.N, spec.p);
  const double innovation = std::sqrt(1.0 - spec.ar_rho * spec.ar_rho);
  for (int i = 0; i < spec.N; ++i) X(i, 0) = gauss(rng);
  for (int j = 1; j < spec.p; ++j) {
    for (int i = 0; i < spec.N; ++i) {
      X(i, j) = spec.ar_rho * X(i, j - 1) + innovation * gauss(rng);
    }
  }

  Eigen::VectorXd beta(spec.p);
  for (int j = 0; j < spec.p; ++j) {
    beta[j] = spec.beta_lo + (spec.beta_hi - spec.beta_lo) * unif(rng);
  }
  const int n_zero = static_cast<int>(std::lround(spec.sparsity * spec.p));
  std::vector<int> idx(static_cast<size_t>(spec.p));
  for (int j = 0; j < spec.p; ++j) idx[static_cast<size_t>(j)] = j;
  std::shuffle(idx.begin(), idx.end(), rng);
  for (int k = 0; k < n_zero; ++k) beta[idx[static_cast<size_t>(k)]] = 0.0;

  // Repeated-measurement loadings z_i = e_{ceil(i q / N)} (1-based row index).
  Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(spec.N, spec.q);
  for (int i = 1; i <= spec.N; ++i) {
    const int g = static_cast<int>((static_cast<long long>(i) * spec.q + spec.N - 1) / spec.N);
    Z(i - 1, std::min(g, spec.q) - 1) = 1.0;
  }

  Eigen::VectorXd u(spec.q);
  for (int k = 0; k < spec.q; ++k) u[k] = gauss(rng);
  const double sigma = std::sqrt(spec.sigma2);

  Eigen::VectorXi Y(spec.N);
  const Eigen::VectorXd xb = X * beta;
  const Eigen::VectorXd zu = Z * u;
  for (int i = 0; i < spec.N; ++i) {
    Y[i] = unif(rng) < sigmoid(xb[i] + sigma * zu[i]) ? 1 : 0;
  }

  out.model = LogisticREModel{std::move(X), std::move(Z), std::move(Y)};
  out.beta_true = std::move(beta);
  out.u_true = std::move(u);
  return out;
}

Penalty logistic_penalty(double lambda, double alpha, int p, double sigma_floor) {
  Eigen::Array<bool, Eigen::Dynamic, 1> mask(p + 1);
  mask.setConstant(true);
  mask[p] = false;  // sigma is not penalized
  const double inf = std::numeric_limits<double>::infinity();
  ParamVector lower = ParamVector::Constant(p + 1, -inf);
  ParamVector upper = ParamVector::Constant(p + 1, inf);
  lower[p] = sigma_floor;  // keeps the iterates inside Theta = R^p x (0, inf)
  return Penalty(CompositePenalty{ElasticNetPenalty(lambda, alpha, mask),
                                  BoxConstraint(std::move(lower), std::move(upper))});
}

ParamVector logistic_start(int p, double sigma0) {
  ParamVector theta = ParamVector::Zero(p + 1);
  theta[p] = sigma0;
  return theta;
}

SecondMomentCheck second_moment_check(const ParamVector& theta, const LogisticREModel& model,
                                      int chain_length, std::uint64_t seed) {
  require(chain_length >= 100, "second_moment_check: chain_length must be >= 100");
  std::mt19937_64 rng = make_stream(seed, 0x5EC0u);

  GibbsState state;
  state.u = Eigen::VectorXd::Zero(model.q());
  state.w = Eigen::VectorXd::Ones(model.n());
  const int warmup = std::max(50, chain_length / 10);
  for (int t = 0; t < warmup; ++t) state = gibbs_step(theta, state, model, rng);

  const int n_batches = 20;
  const int batch_len = chain_length / n_batches;
  Eigen::VectorXd batch_means = Eigen::VectorXd::Zero(n_batches);
  for (int b = 0; b < n_batches; ++b) {
    double acc = 0.0;
    for (int t = 0; t < batch_len; ++t) {
      state = gibbs_step(theta, state, model, rng);
      acc += state.u.squaredNorm();
    }
    batch_means[b] = acc / batch_len;
  }

  SecondMomentCheck out;
  out.estimate = batch_means.mean();
  const double var =
      (batch_means.array() - out.estimate).square().sum() / (n_batches - 1);
  out.se = std::sqrt(var / n_batches);
  const double q = model.q();
  out.bound = std::sqrt(q * (2.0 + q));
  out.holds = out.estimate <= out.bound + 3.0 * out.se;
  return out;
}

std::unique_ptr<MonteCarloOracle<GibbsState>> make_logistic_gibbs_oracle(
    const LogisticREModel& model, bool warm_start, int burn_in) {
  MarkovSampler<GibbsState> sampler;
  sampler.init = [model](const ParamVector&, std::mt19937_64& rng) -> GibbsState {
    GibbsState s;
    std::normal_distribution<double> gauss(0.0, 1.0);
    s.u.resize(model.q());
    for (int k = 0; k < model.q(); ++k) s.u[k] = gauss(rng);
    s.w = Eigen::VectorXd::Ones(model.n());
    return s;
  };
  sampler.kernel = [model](const ParamVector& theta, const GibbsState& s,
                           std::mt19937_64& rng) -> GibbsState {
    return gibbs_step(theta, s, model, rng);
  };
  sampler.warm_start = warm_start;
  sampler.burn_in = burn_in;

  auto integrand = [model](const ParamVector& theta, const GibbsState& s) -> ParamVector {
    return logistic_H(theta, s.u, model);
  };
  return std::make_unique<MonteCarloOracle<GibbsState>>(integrand, sampler);
}

}  // namespace stochprox
