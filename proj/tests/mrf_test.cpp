#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "stochprox/models/mrf.hpp"
#include "stochprox/rng.hpp"
#include "stochprox/solver.hpp"
#include "test_helpers.hpp"

using namespace stochprox;

namespace {

/// Ising model with a seeded data set drawn from ring couplings.
MRFModel seeded_ising(int p, double coupling, int n_obs, std::uint64_t seed) {
  MRFModel model = MRFModel::ising(p);
  Eigen::MatrixXd theta = Eigen::MatrixXd::Zero(p, p);
  for (int i = 0; i < p; ++i) {
    const int j = (i + 1) % p;
    theta(std::max(i, j), std::min(i, j)) = coupling;
  }
  std::mt19937_64 rng = make_stream(seed);
  model.data = mrf_sample_data(pack_sym(Eigen::MatrixXd(theta.selfadjointView<Eigen::Lower>())),
                               model, n_obs, rng);
  return model;
}

}  // namespace

TEST_CASE("sufficient statistics matrix") {
  SUBCASE("p = 1 is the 1x1 matrix [B0(x1)]") {
    MRFModel m = MRFModel::ising(1);
    MRFConfig x(1);
    x << 1;  // state index 1 = value +1
    const Eigen::MatrixXd s = mrf_suff_stats(x, m);
    CHECK(s(0, 0) == 1.0);
  }
  SUBCASE("p = 2 Ising at (+1, -1)") {
    MRFModel m = MRFModel::ising(2);
    MRFConfig x(2);
    x << 1, 0;  // (+1, -1)
    const Eigen::MatrixXd s = mrf_suff_stats(x, m);
    CHECK(s(0, 0) == 1.0);
    CHECK(s(1, 1) == -1.0);
    CHECK(s(0, 1) == -1.0);
    CHECK(s(1, 0) == s(0, 1));
  }
  SUBCASE("always symmetric") {
    MRFModel m = MRFModel::ising(4);
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> pick(0, 1);
    for (int rep = 0; rep < 20; ++rep) {
      MRFConfig x(4);
      for (int i = 0; i < 4; ++i) x[i] = pick(rng);
      const Eigen::MatrixXd s = mrf_suff_stats(x, m);
      CHECK((s - s.transpose()).norm() == 0.0);
    }
  }
}

TEST_CASE("exact gradient by enumeration") {
  MRFModel model = seeded_ising(3, 0.5, 50, 7);

  SUBCASE("theta = 0: model mean vanishes by symmetry") {
    const ParamVector zero = ParamVector::Zero(sym_dim(3));
    CHECK(mrf_model_mean(zero, model).norm() < 1e-14);
    CHECK((mrf_exact_gradient(zero, model) - mrf_data_mean(model)).norm() < 1e-14);
  }
  SUBCASE("strong coupling saturates the pair expectation") {
    MRFModel m2 = seeded_ising(2, 0.0, 10, 1);
    ParamVector theta = ParamVector::Zero(sym_dim(2));
    theta[sym_index(1, 0)] = 6.0;
    const ParamVector mean = mrf_model_mean(theta, m2);
    CHECK(mean[sym_index(1, 0)] > 0.999);
  }
  SUBCASE("moment-matching fixed point found by the solver") {
    // single observed configuration; along the solver path the model mean
    // approaches the observed sufficient statistics and the gradient vanishes
    MRFModel m1 = MRFModel::ising(2);
    m1.data.resize(1, 2);
    m1.data << 1, 0;
    const SmoothObjective obj = mrf_negloglik_objective(m1);
    const RunTrace trace =
        run_proximal_gradient(obj, Penalty::none(sym_dim(2)), ParamVector::Zero(sym_dim(2)),
                              StepSchedule::constant(1.0 / *obj.lipschitz), 4000);
    const ParamVector grad = obj.gradient(trace.final_iterate());
    CHECK(grad.norm() < 0.05);
    CHECK((mrf_model_mean(trace.final_iterate(), m1) - mrf_data_mean(m1)).norm() < 0.05);
  }
  SUBCASE("adding a constant to B0 leaves the gradient invariant") {
    MRFModel shifted = model;
    shifted.b0.array() += 3.7;
    std::mt19937_64 rng(5);
    const ParamVector theta = testutil::random_gaussian(static_cast<int>(sym_dim(3)), rng, 0.5);
    CHECK((mrf_exact_gradient(theta, model) - mrf_exact_gradient(theta, shifted)).norm() < 1e-12);
  }
  SUBCASE("too-large state space raises unsupported and points to the Gibbs oracle") {
    MRFModel big = MRFModel::ising(25);
    big.data = Eigen::MatrixXi::Zero(2, 25);
    try {
      mrf_exact_gradient(ParamVector::Zero(sym_dim(25)), big);
      FAIL("expected UnsupportedOperation");
    } catch (const UnsupportedOperation& e) {
      CHECK(std::string(e.what()).find("Gibbs") != std::string::npos);
    }
  }
}

TEST_CASE("gibbs sweep") {
  SUBCASE("theta = 0 gives i.i.d. uniform sites after one sweep") {
    MRFModel m = MRFModel::ising(3);
    const ParamVector zero = ParamVector::Zero(sym_dim(3));
    std::mt19937_64 rng = make_stream(11);
    const int reps = 20000;
    Eigen::Vector3d site_mean = Eigen::Vector3d::Zero();
    double pair01 = 0.0;
    for (int r = 0; r < reps; ++r) {
      MRFConfig x = MRFConfig::Zero(3);  // fixed start
      x = mrf_gibbs_step(zero, x, m, rng);
      for (int i = 0; i < 3; ++i) site_mean[i] += m.state_values[x[i]];
      pair01 += m.state_values[x[0]] * m.state_values[x[1]];
    }
    site_mean /= reps;
    pair01 /= reps;
    const double se = 1.0 / std::sqrt(double(reps));
    for (int i = 0; i < 3; ++i) CHECK(std::abs(site_mean[i]) < 4.0 * se);
    CHECK(std::abs(pair01) < 4.0 * se);
  }
  SUBCASE("invariance: long-run empirical law matches the enumerated one (TV < 0.02)") {
    MRFModel m = MRFModel::ising(2);
    ParamVector theta = ParamVector::Zero(sym_dim(2));
    theta[sym_index(0, 0)] = 0.3;
    theta[sym_index(1, 0)] = 0.6;

    // enumerated target over the 4 states
    const double log_z = mrf_log_partition(theta, m);
    std::map<std::pair<int, int>, double> target;
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        MRFConfig x(2);
        x << a, b;
        target[{a, b}] = std::exp(mrf_log_potential(theta, x, m) - log_z);
      }
    }

    std::mt19937_64 rng = make_stream(13);
    MRFConfig x = MRFConfig::Zero(2);
    std::map<std::pair<int, int>, double> freq;
    const int sweeps = 100000;
    for (int t = 0; t < sweeps; ++t) {
      x = mrf_gibbs_step(theta, x, m, rng);
      freq[{x[0], x[1]}] += 1.0 / sweeps;
    }
    double tv = 0.0;
    for (const auto& [state, prob] : target) tv += std::abs(freq[state] - prob);
    CHECK(tv / 2.0 < 0.02);
  }
  SUBCASE("strong coupling aligns the sites") {
    MRFModel m = MRFModel::ising(2);
    ParamVector theta = ParamVector::Zero(sym_dim(2));
    theta[sym_index(1, 0)] = 3.0;
    std::mt19937_64 rng = make_stream(17);
    MRFConfig x = MRFConfig::Zero(2);
    double corr = 0.0;
    const int sweeps = 20000;
    for (int t = 0; t < sweeps; ++t) {
      x = mrf_gibbs_step(theta, x, m, rng);
      corr += m.state_values[x[0]] * m.state_values[x[1]];
    }
    CHECK(corr / sweeps > 0.9);
  }
}

TEST_CASE("lipschitz oscillation bound") {
  SUBCASE("Ising bound is 4 p^2") {
    for (int p : {2, 3, 5}) {
      CHECK(mrf_lipschitz_bound(MRFModel::ising(p)) == doctest::Approx(4.0 * p * p));
    }
  }
  SUBCASE("never violated on random pairs, including nearby ones") {
    MRFModel m = seeded_ising(3, 0.4, 30, 3);
    std::mt19937_64 rng = make_stream(19);
    const LipschitzCheck check = mrf_lipschitz_check(m, 200, rng);
    CHECK(check.holds);
    CHECK(check.max_ratio <= check.bound);
    // pairs at distance ~1e-6 still satisfy the bound
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    ParamVector a(sym_dim(3));
    for (Eigen::Index i = 0; i < a.size(); ++i) a[i] = unif(rng);
    ParamVector b = a;
    b[2] += 1e-6;
    const double ratio = (mrf_model_mean(a, m) - mrf_model_mean(b, m)).norm() / (a - b).norm();
    CHECK(ratio <= check.bound + 1e-8);
  }
}

TEST_CASE("ising oracles") {
  MRFModel model = seeded_ising(2, 0.5, 80, 23);
  const ParamVector data_mean = mrf_data_mean(model);

  SUBCASE("i.i.d. oracle is unbiased against the enumeration gradient") {
    auto oracle = make_mrf_iid_oracle(model);
    auto exact = [&](const ParamVector& th) -> ParamVector { return mrf_model_mean(th, model) - data_mean; };
    std::mt19937_64 rng = make_stream(29);
    for (int probe = 0; probe < 3; ++probe) {
      const ParamVector theta =
          testutil::random_gaussian(static_cast<int>(sym_dim(2)), rng, 0.5);
      const OracleMoments m = estimate_oracle_moments(*oracle, exact, theta, 50, 400, 31 + probe);
      for (Eigen::Index i = 0; i < m.bias_mean.size(); ++i) {
        CHECK(std::abs(m.bias_mean[i]) <= 4.0 * m.bias_se[i] + 1e-12);
      }
    }
  }
  SUBCASE("i.i.d. second moment scales like 1/m") {
    auto oracle = make_mrf_iid_oracle(model);
    auto exact = [&](const ParamVector& th) -> ParamVector { return mrf_model_mean(th, model) - data_mean; };
    const ParamVector theta = ParamVector::Zero(sym_dim(2));
    std::vector<double> ms{10, 100, 1000}, eps2;
    for (double m : ms) {
      eps2.push_back(estimate_oracle_moments(*oracle, exact, theta, static_cast<long long>(m),
                                             600, 37)
                         .second_moment_estimate);
    }
    // eps2 * m approximately constant
    const double r1 = eps2[0] * ms[0], r2 = eps2[1] * ms[1], r3 = eps2[2] * ms[2];
    CHECK(r2 / r1 > 0.7);
    CHECK(r2 / r1 < 1.4);
    CHECK(r3 / r1 > 0.7);
    CHECK(r3 / r1 < 1.4);
  }
  SUBCASE("gibbs oracle bias decays with the batch size") {
    MRFModel m4 = seeded_ising(4, 0.6, 80, 41);
    auto oracle = make_mrf_gibbs_oracle(m4, false, 0);  // fresh start, no burn-in
    const ParamVector dm = mrf_data_mean(m4);
    auto exact = [&](const ParamVector& th) -> ParamVector { return mrf_model_mean(th, m4) - dm; };
    ParamVector theta = ParamVector::Zero(sym_dim(4));
    for (int i = 0; i < 4; ++i) theta[sym_index(std::max(i, (i + 1) % 4), std::min(i, (i + 1) % 4))] = 0.6;
    const double bias_small =
        estimate_oracle_moments(*oracle, exact, theta, 4, 3000, 43).bias_norm_estimate;
    const double bias_large =
        estimate_oracle_moments(*oracle, exact, theta, 64, 3000, 47).bias_norm_estimate;
    CHECK(bias_large < 0.5 * bias_small);
  }
}

TEST_CASE("packed symmetric parameterization round trip") {
  std::mt19937_64 rng(51);
  const ParamVector packed = testutil::random_gaussian(static_cast<int>(sym_dim(5)), rng);
  const Eigen::MatrixXd m = unpack_sym(packed, 5);
  CHECK((m - m.transpose()).norm() == 0.0);
  CHECK((pack_sym(m) - packed).norm() == 0.0);
}
