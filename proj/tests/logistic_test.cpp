#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <cstdio>

#include "stochprox/io.hpp"
#include "stochprox/models/logistic_re.hpp"
#include "stochprox/rng.hpp"
#include "test_helpers.hpp"

using namespace stochprox;

namespace {

LogisticREModel tiny_model(int n, int p, int q, std::uint64_t seed) {
  std::mt19937_64 rng = make_stream(seed);
  std::normal_distribution<double> gauss(0, 1);
  LogisticREModel m;
  m.X.resize(n, p);
  m.Z.resize(n, q);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) m.X(i, j) = gauss(rng);
    for (int j = 0; j < q; ++j) m.Z(i, j) = gauss(rng);
  }
  m.Y.resize(n);
  std::uniform_real_distribution<double> unif(0, 1);
  for (int i = 0; i < n; ++i) m.Y[i] = unif(rng) < 0.5 ? 1 : 0;
  m.validate();
  return m;
}

}  // namespace

TEST_CASE("gradient integrand H_theta") {
  SUBCASE("empty data gives the zero vector") {
    LogisticREModel m;
    m.X.resize(0, 3);
    m.Z.resize(0, 2);
    m.Y.resize(0);
    const ParamVector h = logistic_H(ParamVector::Ones(4), Eigen::VectorXd::Zero(2), m);
    CHECK(h.norm() == 0.0);
  }
  SUBCASE("N = 1 closed form") {
    // x = e1, z = e1, Y = 1, beta = 0, sigma = 1, u = 0: s(0) = 1/2
    LogisticREModel m;
    m.X = Eigen::MatrixXd::Zero(1, 3);
    m.X(0, 0) = 1.0;
    m.Z = Eigen::MatrixXd::Zero(1, 2);
    m.Z(0, 0) = 1.0;
    m.Y = Eigen::VectorXi::Ones(1);
    ParamVector theta = ParamVector::Zero(4);
    theta[3] = 1.0;  // sigma
    const ParamVector h = logistic_H(theta, Eigen::VectorXd::Zero(2), m);
    CHECK(h[0] == doctest::Approx(-0.5));
    CHECK(h[1] == 0.0);
    CHECK(h[2] == 0.0);
    CHECK(h[3] == 0.0);  // sigma component: -(Y - s) * z'u = 0
  }
  SUBCASE("matched probabilities give zero residuals") {
    // x'beta = 40 saturates s to 1 in double precision, so Y = 1 matches exactly
    LogisticREModel m;
    m.X = Eigen::MatrixXd::Ones(2, 1);
    m.Z = Eigen::MatrixXd::Ones(2, 1);
    m.Y = Eigen::VectorXi::Ones(2);
    ParamVector theta(2);
    theta << 40.0, 0.5;
    std::mt19937_64 rng = make_stream(2);
    const ParamVector h = logistic_H(theta, testutil::random_gaussian(1, rng), m);
    CHECK(h.norm() == 0.0);
  }
  SUBCASE("dimension mismatch rejected") {
    LogisticREModel m = tiny_model(4, 3, 2, 0);
    CHECK_THROWS_AS(logistic_H(ParamVector::Zero(3), Eigen::VectorXd::Zero(2), m),
                    std::invalid_argument);
    CHECK_THROWS_AS(logistic_H(ParamVector::Zero(4), Eigen::VectorXd::Zero(1), m),
                    std::invalid_argument);
  }
}

TEST_CASE("gibbs conditional for u") {
  SUBCASE("sigma = 0 decouples: Gamma = I, mu = 0") {
    LogisticREModel m = tiny_model(6, 2, 3, 1);
    ParamVector theta = ParamVector::Zero(3);
    theta[2] = 0.0;
    const GibbsConditional c = gibbs_u_conditional(theta, Eigen::VectorXd::Ones(6), m);
    CHECK((c.cov - Eigen::MatrixXd::Identity(3, 3)).norm() < 1e-14);
    CHECK(c.mu.norm() < 1e-14);
  }
  SUBCASE("scalar case: Gamma = 1/2, mu = 1/4") {
    // q = 1, single observation, w = 1, z = 1, sigma = 1, beta = 0, Y = 1
    LogisticREModel m;
    m.X = Eigen::MatrixXd::Zero(1, 1);
    m.Z = Eigen::MatrixXd::Ones(1, 1);
    m.Y = Eigen::VectorXi::Ones(1);
    ParamVector theta(2);
    theta << 0.0, 1.0;
    const GibbsConditional c = gibbs_u_conditional(theta, Eigen::VectorXd::Ones(1), m);
    CHECK(c.cov(0, 0) == doctest::Approx(0.5));
    CHECK(c.mu[0] == doctest::Approx(0.25));
  }
}

TEST_CASE("polya-gamma sampler") {
  SUBCASE("invalid arguments") {
    std::mt19937_64 rng = make_stream(0);
    CHECK_THROWS_AS(sample_polya_gamma(-0.5, rng), std::invalid_argument);
    CHECK_THROWS_AS(sample_polya_gamma(std::numeric_limits<double>::quiet_NaN(), rng),
                    std::invalid_argument);
  }
  SUBCASE("quadrature oracle recovers the known c = 0 mean") {
    CHECK(testutil::pg_mean_quadrature(0.0) == doctest::Approx(0.25).epsilon(2e-4));
  }
  SUBCASE("sample means match density quadrature") {
    std::mt19937_64 rng = make_stream(3);
    for (double c : {0.0, 2.0}) {
      const int draws = 100000;
      double acc = 0.0, acc2 = 0.0;
      for (int i = 0; i < draws; ++i) {
        const double w = sample_polya_gamma(c, rng);
        acc += w;
        acc2 += w * w;
      }
      const double mean = acc / draws;
      const double sd = std::sqrt(std::max(0.0, acc2 / draws - mean * mean));
      const double ref = testutil::pg_mean_quadrature(c);
      CHECK(std::abs(mean - ref) < 3.0 * sd / std::sqrt(double(draws)) + 1e-4);
      CHECK(std::abs(mean - ref) < 0.01 * ref);
    }
  }
  SUBCASE("exponential tilt shrinks the mean") {
    CHECK(testutil::pg_mean_quadrature(4.0) < testutil::pg_mean_quadrature(0.0));
    std::mt19937_64 rng = make_stream(5);
    double m0 = 0.0, m4 = 0.0;
    for (int i = 0; i < 20000; ++i) m0 += sample_polya_gamma(0.0, rng);
    for (int i = 0; i < 20000; ++i) m4 += sample_polya_gamma(4.0, rng);
    CHECK(m4 < m0);
  }
  SUBCASE("tail-mean correction accounts for the dropped terms") {
    // with no truncation error the mean of the series sampler is exact;
    // dropping the correction should bias the mean low
    CHECK(polya_gamma_tail_mean(0.0, kPolyaGammaTerms) > 0.0);
    CHECK(polya_gamma_tail_mean(0.0, kPolyaGammaTerms) < 1e-3);
  }
}

TEST_CASE("monte carlo log-likelihood") {
  SUBCASE("empty data set gives zero") {
    LogisticREModel m;
    m.X.resize(0, 2);
    m.Z.resize(0, 1);
    m.Y.resize(0);
    std::mt19937_64 rng = make_stream(0);
    CHECK(logistic_loglik_mc(ParamVector::Zero(3), m, 10, rng) == 0.0);
  }
  SUBCASE("sigma = 0 collapses the integral (zero-variance estimate)") {
    LogisticREModel m = tiny_model(8, 2, 2, 7);
    ParamVector theta(3);
    theta << 0.4, -0.2, 0.0;
    double direct = 0.0;
    const Eigen::VectorXd xb = m.X * theta.head(2);
    for (int i = 0; i < 8; ++i) direct += m.Y[i] * xb[i] - softplus(xb[i]);
    std::mt19937_64 rng = make_stream(9);
    CHECK(logistic_loglik_mc(theta, m, 64, rng) == doctest::Approx(direct).epsilon(1e-13));
  }
  SUBCASE("n_samples must be positive") {
    LogisticREModel m = tiny_model(3, 1, 1, 2);
    std::mt19937_64 rng = make_stream(0);
    CHECK_THROWS_AS(logistic_loglik_mc(ParamVector::Zero(2), m, 0, rng), std::invalid_argument);
  }
  SUBCASE("agrees with 1-D Gauss-Hermite quadrature on a tiny instance") {
    LogisticREModel m = tiny_model(3, 2, 1, 13);
    ParamVector theta(3);
    theta << 0.5, -0.4, 0.8;
    // quadrature reference: ell = log (1/sqrt(pi)) sum_k w_k exp(ell_c(sqrt(2) x_k))
    const auto gh = testutil::gauss_hermite(120);
    const Eigen::VectorXd xb = m.X * theta.head(2);
    double z = 0.0;
    for (int k = 0; k < gh.nodes.size(); ++k) {
      const double u = std::sqrt(2.0) * gh.nodes[k];
      double lc = 0.0;
      for (int i = 0; i < 3; ++i) {
        const double eta = xb[i] + theta[2] * m.Z(i, 0) * u;
        lc += m.Y[i] * eta - softplus(eta);
      }
      z += gh.weights[k] * std::exp(lc);
    }
    const double ref = std::log(z / std::sqrt(M_PI));
    std::mt19937_64 rng = make_stream(17);
    CHECK(std::abs(logistic_loglik_mc(theta, m, 1000000, rng) - ref) < 1e-3);
  }
  SUBCASE("panel evaluator is deterministic and consistent with fresh MC") {
    LogisticREModel m = tiny_model(10, 2, 2, 19);
    LoglikPanel panel(2, 20000, 23);
    ParamVector theta(3);
    theta << 0.3, 0.1, 0.5;
    const double a = panel.loglik(theta, m);
    CHECK(a == panel.loglik(theta, m));
    std::mt19937_64 rng = make_stream(29);
    CHECK(std::abs(a - logistic_loglik_mc(theta, m, 200000, rng)) < 0.05);
  }
}

TEST_CASE("fisher identity on a quadrature-tractable instance") {
  // gradient of ell by finite differences of the quadrature ell equals the
  // pi_theta-average of -H (both via Gauss-Hermite, q = 1)
  LogisticREModel m = tiny_model(5, 2, 1, 31);
  ParamVector theta(3);
  theta << 0.3, -0.6, 0.7;
  const auto gh = testutil::gauss_hermite(150);

  auto quad_ell = [&](const ParamVector& th) {
    const Eigen::VectorXd xb = m.X * th.head(2);
    double z = 0.0;
    for (int k = 0; k < gh.nodes.size(); ++k) {
      const double u = std::sqrt(2.0) * gh.nodes[k];
      double lc = 0.0;
      for (int i = 0; i < 5; ++i) {
        const double eta = xb[i] + th[2] * m.Z(i, 0) * u;
        lc += m.Y[i] * eta - softplus(eta);
      }
      z += gh.weights[k] * std::exp(lc);
    }
    return std::log(z / std::sqrt(M_PI));
  };

  // pi_theta-average of -H via the same quadrature
  ParamVector avg = ParamVector::Zero(3);
  {
    const Eigen::VectorXd xb = m.X * theta.head(2);
    double z = 0.0;
    for (int k = 0; k < gh.nodes.size(); ++k) {
      const double u = std::sqrt(2.0) * gh.nodes[k];
      double lc = 0.0;
      for (int i = 0; i < 5; ++i) {
        const double eta = xb[i] + theta[2] * m.Z(i, 0) * u;
        lc += m.Y[i] * eta - softplus(eta);
      }
      const double w = gh.weights[k] * std::exp(lc);
      z += w;
      avg -= w * logistic_H(theta, Eigen::VectorXd::Constant(1, u), m);
    }
    avg /= z;
  }

  for (int j = 0; j < 3; ++j) {
    ParamVector lo = theta, hi = theta;
    lo[j] -= 1e-5;
    hi[j] += 1e-5;
    const double fd = (quad_ell(hi) - quad_ell(lo)) / 2e-5;
    CHECK(std::abs(fd - avg[j]) < 1e-3);
  }
}

TEST_CASE("gibbs chain average matches a prior importance-sampling oracle") {
  LogisticREModel m = tiny_model(5, 2, 1, 37);
  ParamVector theta(3);
  theta << 0.4, -0.3, 0.6;

  // prior importance sampling for -grad ell = int H dpi_theta
  std::mt19937_64 rng = make_stream(41);
  std::normal_distribution<double> gauss(0, 1);
  const Eigen::VectorXd xb = m.X * theta.head(2);
  ParamVector is_acc = ParamVector::Zero(3);
  double wsum = 0.0;
  const int is_draws = 200000;
  for (int j = 0; j < is_draws; ++j) {
    Eigen::VectorXd u(1);
    u[0] = gauss(rng);
    double lc = 0.0;
    for (int i = 0; i < 5; ++i) {
      const double eta = xb[i] + theta[2] * m.Z(i, 0) * u[0];
      lc += m.Y[i] * eta - softplus(eta);
    }
    const double w = std::exp(lc);
    wsum += w;
    is_acc += w * logistic_H(theta, u, m);
  }
  const ParamVector is_est = is_acc / wsum;

  // long two-block Gibbs run with batch-means standard errors
  GibbsState state;
  state.u = Eigen::VectorXd::Zero(1);
  state.w = Eigen::VectorXd::Ones(5);
  for (int t = 0; t < 500; ++t) state = gibbs_step(theta, state, m, rng);
  const int n_batches = 20, batch_len = 4000;
  Eigen::MatrixXd batch_means(n_batches, 3);
  for (int b = 0; b < n_batches; ++b) {
    ParamVector acc = ParamVector::Zero(3);
    for (int t = 0; t < batch_len; ++t) {
      state = gibbs_step(theta, state, m, rng);
      acc += logistic_H(theta, state.u, m);
    }
    batch_means.row(b) = (acc / batch_len).transpose();
  }
  const ParamVector chain_est = batch_means.colwise().mean().transpose();
  for (int j = 0; j < 3; ++j) {
    const double var =
        (batch_means.col(j).array() - chain_est[j]).square().sum() / (n_batches - 1);
    const double se = std::sqrt(var / n_batches);
    CHECK(std::abs(chain_est[j] - is_est[j]) < 3.0 * se + 0.01);
  }
}

TEST_CASE("synthetic data generation") {
  SUBCASE("full sparsity zeroes the coefficients") {
    SyntheticSpec spec;
    spec.N = 50;
    spec.p = 30;
    spec.q = 2;
    spec.sparsity = 1.0;
    spec.seed = 3;
    const SyntheticData data = generate_synthetic(spec);
    CHECK(data.beta_true.norm() == 0.0);
  }
  SUBCASE("column autocorrelation at lag 1 is close to rho") {
    SyntheticSpec spec;
    spec.N = 2000;
    spec.p = 50;
    spec.q = 2;
    spec.ar_rho = 0.8;
    spec.seed = 5;
    const SyntheticData data = generate_synthetic(spec);
    double num = 0.0, den = 0.0;
    for (int j = 0; j + 1 < spec.p; ++j) {
      num += data.model.X.col(j).dot(data.model.X.col(j + 1));
      den += data.model.X.col(j).squaredNorm();
    }
    CHECK(std::abs(num / den - spec.ar_rho) < 0.05);
  }
  SUBCASE("repeated-measurement loading pattern") {
    SyntheticSpec spec;
    spec.N = 100;
    spec.p = 5;
    spec.q = 5;
    spec.seed = 7;
    const SyntheticData data = generate_synthetic(spec);
    for (int i = 1; i <= spec.N; ++i) {
      const int g = static_cast<int>(std::ceil(double(i) * spec.q / spec.N));
      CHECK(data.model.Z(i - 1, g - 1) == 1.0);
      CHECK(data.model.Z.row(i - 1).sum() == 1.0);
    }
    for (int i = 0; i < spec.N; ++i) {
      CHECK((data.model.Y[i] == 0 || data.model.Y[i] == 1));
    }
  }
  SUBCASE("same seed reproduces the data set") {
    SyntheticSpec spec = SyntheticSpec::desk_scale(11);
    spec.N = 40;
    spec.p = 30;
    const SyntheticData a = generate_synthetic(spec);
    const SyntheticData b = generate_synthetic(spec);
    CHECK((a.model.X - b.model.X).norm() == 0.0);
    CHECK((a.beta_true - b.beta_true).norm() == 0.0);
    CHECK((a.model.Y - b.model.Y).norm() == 0);
  }
}

TEST_CASE("second moment bound") {
  SUBCASE("bound values") {
    LogisticREModel m1 = tiny_model(20, 2, 1, 43);
    const SecondMomentCheck c1 = second_moment_check(logistic_start(2), m1, 2000, 0);
    CHECK(c1.bound == doctest::Approx(std::sqrt(3.0)));
    LogisticREModel m5 = tiny_model(20, 2, 5, 47);
    const SecondMomentCheck c5 = second_moment_check(logistic_start(2), m5, 2000, 0);
    CHECK(c5.bound == doctest::Approx(std::sqrt(35.0)));
    CHECK(c1.holds);
    CHECK(c5.holds);
  }
  SUBCASE("sigma = 0 reduces to the prior moment q") {
    LogisticREModel m = tiny_model(20, 2, 3, 53);
    ParamVector theta = ParamVector::Zero(3);  // sigma = 0
    const SecondMomentCheck c = second_moment_check(theta, m, 4000, 1);
    CHECK(std::abs(c.estimate - 3.0) < 3.0 * c.se + 0.15);
    CHECK(c.holds);  // q <= sqrt(q(2+q)) always
  }
}

TEST_CASE("penalty layout for the random-effects model") {
  Penalty pen = logistic_penalty(2.0, 1.0, 3);
  SUBCASE("sigma is unpenalized and floored") {
    ParamVector theta(4);
    theta << 1.0, -1.0, 0.5, 5.0;
    CHECK(pen.value(theta) == doctest::Approx(2.0 * 2.5));
    ParamVector pushed = pen.prox((ParamVector(4) << 0.1, 0.0, 0.0, -3.0).finished(), 0.1);
    CHECK(pushed[3] == doctest::Approx(1e-6));
  }
  SUBCASE("start point is inside the domain") {
    CHECK(std::isfinite(pen.value(logistic_start(3))));
  }
}

TEST_CASE("dataset container round trip") {
  SyntheticSpec spec = SyntheticSpec::desk_scale(3);
  spec.N = 30;
  spec.p = 10;
  const SyntheticData data = generate_synthetic(spec);
  const std::string base = "/tmp/stochprox_test_dataset";
  save_logistic_dataset(base, data.model, spec);
  const LogisticREModel back = load_logistic_dataset(base);
  CHECK((back.X - data.model.X).norm() == 0.0);
  CHECK((back.Z - data.model.Z).norm() == 0.0);
  CHECK((back.Y - data.model.Y).norm() == 0);
  std::remove((base + ".bin").c_str());
  std::remove((base + ".json").c_str());
}
