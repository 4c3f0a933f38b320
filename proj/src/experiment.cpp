#include "stochprox/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "stochprox/io.hpp"
#include "stochprox/rng.hpp"

namespace stochprox {

using nlohmann::json;

std::string to_string(Problem p) {
  switch (p) {
    case Problem::lasso_ls: return "lasso_ls";
    case Problem::ising: return "ising";
    case Problem::logistic_re: return "logistic_re";
  }
  return "?";
}

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::pg: return "pg";
    case Algorithm::perturbed_pg: return "perturbed_pg";
    case Algorithm::fista: return "fista";
    case Algorithm::averaged_pg: return "averaged_pg";
  }
  return "?";
}

Problem problem_from_string(const std::string& s) {
  if (s == "lasso_ls") return Problem::lasso_ls;
  if (s == "ising") return Problem::ising;
  if (s == "logistic_re") return Problem::logistic_re;
  throw std::invalid_argument("unknown problem '" + s + "'");
}

Algorithm algorithm_from_string(const std::string& s) {
  if (s == "pg") return Algorithm::pg;
  if (s == "perturbed_pg") return Algorithm::perturbed_pg;
  if (s == "fista") return Algorithm::fista;
  if (s == "averaged_pg") return Algorithm::averaged_pg;
  throw std::invalid_argument("unknown algorithm '" + s + "'");
}

namespace {

std::uint64_t mix_seed(std::uint64_t seed, int rep) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(rep) + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

StepSchedule resolve_steps(const ExperimentConfig& config, double lipschitz) {
  if (!config.steps_relative_to_lipschitz) return config.steps;
  require(lipschitz > 0.0, "run_experiment: Lipschitz-relative steps need L > 0");
  return StepSchedule(config.step_scale / lipschitz, config.steps.exponent_c, config.steps.cap);
}

/// Long exact proximal-gradient solve used to pin F_star on tractable
/// problems (monotone, so the final value is the best one).
double solve_reference(const SmoothObjective& obj, const Penalty& penalty,
                       const ParamVector& theta0, double lipschitz, int iters) {
  SolverOptions opts;
  opts.thin = iters;  // keep only the last iterate
  RunTrace trace = run_proximal_gradient(obj, penalty, theta0,
                                         StepSchedule::constant(1.0 / lipschitz), iters, opts);
  return trace.objective_estimates.back();
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

LassoInstance make_lasso_instance(const LassoProblemConfig& cfg, std::uint64_t seed) {
  require(cfg.d >= 1 && cfg.n_obs >= cfg.d, "make_lasso_instance: bad dimensions");
  std::mt19937_64 rng = make_stream(seed, 0x1A550u);
  std::normal_distribution<double> gauss(0.0, 1.0);

  LassoInstance inst;
  if (cfg.design == LassoProblemConfig::Design::log_spectrum) {
    Eigen::MatrixXd g(cfg.n_obs, cfg.d), h(cfg.d, cfg.d);
    for (int i = 0; i < cfg.n_obs; ++i) {
      for (int j = 0; j < cfg.d; ++j) g(i, j) = gauss(rng);
    }
    for (int i = 0; i < cfg.d; ++i) {
      for (int j = 0; j < cfg.d; ++j) h(i, j) = gauss(rng);
    }
    const Eigen::MatrixXd u = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ() *
                              Eigen::MatrixXd::Identity(cfg.n_obs, cfg.d);
    const Eigen::MatrixXd v = Eigen::HouseholderQR<Eigen::MatrixXd>(h).householderQ() *
                              Eigen::MatrixXd::Identity(cfg.d, cfg.d);
    Eigen::VectorXd sv(cfg.d);
    for (int k = 0; k < cfg.d; ++k) {
      sv[k] = std::pow(10.0, -cfg.spectrum_decades * k / (cfg.d - 1) / 2.0);
    }
    inst.X = cfg.spectrum_scale * u * sv.asDiagonal() * v.transpose();
    inst.beta_true = v * Eigen::VectorXd::Constant(cfg.d, 0.5);
    inst.y = inst.X * inst.beta_true;  // exactly in range: every mode carries error
  } else {
    inst.X.resize(cfg.n_obs, cfg.d);
    const double innov = std::sqrt(1.0 - cfg.ar_rho * cfg.ar_rho);
    for (int i = 0; i < cfg.n_obs; ++i) inst.X(i, 0) = gauss(rng);
    for (int j = 1; j < cfg.d; ++j) {
      for (int i = 0; i < cfg.n_obs; ++i) {
        inst.X(i, j) = cfg.ar_rho * inst.X(i, j - 1) + innov * gauss(rng);
      }
    }
    inst.beta_true = Eigen::VectorXd::Zero(cfg.d);
    std::vector<int> idx(static_cast<size_t>(cfg.d));
    for (int j = 0; j < cfg.d; ++j) idx[static_cast<size_t>(j)] = j;
    std::shuffle(idx.begin(), idx.end(), rng);
    std::uniform_real_distribution<double> sign(0.0, 1.0);
    for (int k = 0; k < std::min(cfg.nonzeros, cfg.d); ++k) {
      inst.beta_true[idx[static_cast<size_t>(k)]] =
          (sign(rng) < 0.5 ? -1.0 : 1.0) * cfg.beta_scale;
    }
    inst.y = inst.X * inst.beta_true;
    for (int i = 0; i < cfg.n_obs; ++i) inst.y[i] += cfg.noise_sd * gauss(rng);
  }

  inst.obj = make_least_squares(inst.X, inst.y);
  inst.lipschitz = *inst.obj.lipschitz;
  inst.penalty = Penalty(ElasticNetPenalty::lasso(cfg.lambda, cfg.d));
  inst.theta0 = ParamVector::Zero(cfg.d);
  return inst;
}

IsingInstance make_ising_instance(const IsingProblemConfig& cfg, std::uint64_t seed) {
  require(cfg.p >= 2, "make_ising_instance: need p >= 2");
  IsingInstance inst;
  inst.model = MRFModel::ising(cfg.p);

  // Ring couplings at `coupling`, free diagonal at zero.
  Eigen::MatrixXd theta_true = Eigen::MatrixXd::Zero(cfg.p, cfg.p);
  for (int i = 0; i < cfg.p; ++i) {
    const int j = (i + 1) % cfg.p;
    theta_true(std::max(i, j), std::min(i, j)) = cfg.coupling;
    theta_true(std::min(i, j), std::max(i, j)) = cfg.coupling;
  }
  inst.theta_true = pack_sym(theta_true);

  std::mt19937_64 rng = make_stream(seed, 0x151C6u);
  inst.model.data = mrf_sample_data(inst.theta_true, inst.model, cfg.n_obs, rng);
  inst.obj = mrf_negloglik_objective(inst.model);

  // Hessian of f is Cov_theta(suff stats); its trace is at most the sum of the
  // Popoviciu variance bounds (osc/2)^2 per packed entry, valid for every theta.
  const double osc_b = inst.model.b.maxCoeff() - inst.model.b.minCoeff();
  const double osc_b0 = inst.model.b0.maxCoeff() - inst.model.b0.minCoeff();
  const double n_offdiag = static_cast<double>(cfg.p) * (cfg.p - 1) / 2.0;
  inst.lipschitz =
      n_offdiag * (osc_b / 2.0) * (osc_b / 2.0) + cfg.p * (osc_b0 / 2.0) * (osc_b0 / 2.0);

  // l1 on the couplings plus the rectangle 0 <= theta_ij <= box_hi; the
  // diagonal is neither penalized nor constrained.
  const Eigen::Index d = sym_dim(cfg.p);
  Eigen::Array<bool, Eigen::Dynamic, 1> mask(d);
  const double inf = std::numeric_limits<double>::infinity();
  ParamVector lower = ParamVector::Constant(d, -inf);
  ParamVector upper = ParamVector::Constant(d, inf);
  for (int i = 0; i < cfg.p; ++i) {
    for (int j = 0; j <= i; ++j) {
      const bool offdiag = i != j;
      mask[sym_index(i, j)] = offdiag;
      if (offdiag) {
        lower[sym_index(i, j)] = 0.0;
        upper[sym_index(i, j)] = cfg.box_hi;
      }
    }
  }
  inst.penalty = Penalty(CompositePenalty{ElasticNetPenalty(cfg.lambda, 1.0, mask),
                                          BoxConstraint(std::move(lower), std::move(upper))});
  inst.theta0 = ParamVector::Zero(d);
  return inst;
}

double LogisticInstance::objective(const ParamVector& theta) const {
  return -panel->loglik(theta, model) + penalty.value(theta);
}

LogisticInstance make_logistic_instance(const LogisticProblemConfig& cfg, std::uint64_t seed) {
  LogisticInstance inst;
  SyntheticSpec spec = cfg.spec;
  spec.seed = seed;
  SyntheticData data = generate_synthetic(spec);
  inst.model = std::move(data.model);
  inst.beta_true = std::move(data.beta_true);
  inst.penalty = logistic_penalty(spec.lambda, spec.alpha, spec.p);
  inst.theta0 = logistic_start(spec.p, cfg.sigma0);
  inst.panel = std::make_shared<LoglikPanel>(spec.q, cfg.panel_size, seed);
  return inst;
}

namespace {

struct SolveOutput {
  RunTrace trace;
  std::optional<double> f_star;
  ParamVector beta_final;          // coefficient block used for support metrics
  std::vector<ParamVector> averaged;  // averaged_pg only
  std::function<double(const ParamVector&)> objective;
};

RunTrace dispatch(const ExperimentConfig& config, GradientOracle& oracle, const Penalty& penalty,
                  const ParamVector& theta0, const StepSchedule& steps, std::uint64_t run_seed,
                  const SolverOptions& opts) {
  switch (config.algorithm) {
    case Algorithm::pg:
    case Algorithm::perturbed_pg:
    case Algorithm::averaged_pg:
      return run_perturbed_pg(oracle, penalty, theta0, steps, config.batches, config.n_iters,
                              run_seed, opts);
    case Algorithm::fista:
      return run_perturbed_fista(oracle, penalty, theta0, steps, config.batches, config.tseq,
                                 config.n_iters, run_seed, opts);
  }
  throw std::logic_error("dispatch: unreachable");
}

SolveOutput solve_problem(const ExperimentConfig& config, int rep) {
  const std::uint64_t run_seed = mix_seed(config.seed, rep);
  SolveOutput out;

  if (config.problem == Problem::lasso_ls) {
    LassoInstance inst = make_lasso_instance(config.lasso, config.seed);
    const StepSchedule steps = resolve_steps(config, inst.lipschitz);
    SolverOptions opts;
    opts.instrument = true;
    opts.objective_eval = [inst](const ParamVector& t) {
      return objective_value(inst.obj, inst.penalty, t);
    };
    if (config.algorithm == Algorithm::pg) {
      out.trace = run_proximal_gradient(inst.obj, inst.penalty, inst.theta0, steps,
                                        config.n_iters, opts);
    } else {
      ExactOracle oracle(inst.obj);
      out.trace = dispatch(config, oracle, inst.penalty, inst.theta0, steps, run_seed, opts);
    }
    if (config.reference_iters > 0) {
      out.f_star = solve_reference(inst.obj, inst.penalty, inst.theta0, inst.lipschitz,
                                   config.reference_iters);
    }
    out.beta_final = out.trace.final_iterate();
    out.objective = opts.objective_eval;
    if (config.algorithm == Algorithm::averaged_pg) {
      out.averaged = weighted_average(out.trace, config.weights, config.average_burn_in);
    }
    return out;
  }

  if (config.problem == Problem::ising) {
    IsingInstance inst = make_ising_instance(config.ising, config.seed);
    const StepSchedule steps = resolve_steps(config, inst.lipschitz);
    SolverOptions opts;
    opts.instrument = true;
    opts.objective_eval = [inst](const ParamVector& t) {
      return objective_value(inst.obj, inst.penalty, t);
    };
    if (config.algorithm == Algorithm::pg) {
      out.trace = run_proximal_gradient(inst.obj, inst.penalty, inst.theta0, steps,
                                        config.n_iters, opts);
    } else {
      std::unique_ptr<GradientOracle> oracle;
      if (config.ising.gibbs_oracle) {
        oracle = make_mrf_gibbs_oracle(inst.model, config.ising.warm_start,
                                       config.ising.gibbs_burn_in);
      } else {
        oracle = make_mrf_iid_oracle(inst.model);
      }
      out.trace = dispatch(config, *oracle, inst.penalty, inst.theta0, steps, run_seed, opts);
    }
    if (config.reference_iters > 0) {
      out.f_star = solve_reference(inst.obj, inst.penalty, inst.theta0, inst.lipschitz,
                                   config.reference_iters);
    }
    out.beta_final = out.trace.final_iterate();
    out.objective = opts.objective_eval;
    if (config.algorithm == Algorithm::averaged_pg) {
      out.averaged = weighted_average(out.trace, config.weights, config.average_burn_in);
    }
    return out;
  }

  // logistic_re: the gradient is an intractable integral, so only the Monte
  // Carlo algorithms apply and F is estimated on the shared panel.
  if (config.algorithm == Algorithm::pg) {
    throw UnsupportedOperation(
        "run_experiment: exact pg is unavailable on logistic_re (intractable gradient); "
        "use perturbed_pg, averaged_pg or fista");
  }
  LogisticInstance inst = make_logistic_instance(config.logistic, config.seed);
  const StepSchedule steps = resolve_steps(config, 0.0);
  SolverOptions opts;
  opts.objective_eval = [inst](const ParamVector& t) { return inst.objective(t); };
  auto oracle = make_logistic_gibbs_oracle(inst.model);
  out.trace = dispatch(config, *oracle, inst.penalty, inst.theta0, steps, run_seed, opts);
  out.beta_final = out.trace.final_iterate().head(inst.model.p());
  out.objective = opts.objective_eval;
  if (config.algorithm == Algorithm::averaged_pg) {
    out.averaged = weighted_average(out.trace, config.weights, config.average_burn_in);
  }
  return out;
}

}  // namespace

RunRecord run_experiment(const ExperimentConfig& config, int rep) {
  require(config.n_iters >= 1, "run_experiment: n_iters must be >= 1");
  RunRecord rec;
  rec.config = config;
  rec.replication = rep;
  rec.config_hash = fnv1a_hex(config_to_json(config).dump());

  // wrap module errors with the run context, preserving the exception type
  const std::string context = "[problem=" + to_string(config.problem) +
                              " algorithm=" + to_string(config.algorithm) +
                              (config.name.empty() ? "" : " preset=" + config.name) +
                              " seed=" + std::to_string(config.seed) +
                              " rep=" + std::to_string(rep) + "] ";
  SolveOutput sol = [&] {
    try {
      return solve_problem(config, rep);
    } catch (const SolverAbort&) {
      throw;
    } catch (const UnsupportedOperation& e) {
      throw UnsupportedOperation(context + e.what());
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(context + e.what());
    } catch (const std::exception& e) {
      throw std::runtime_error(context + e.what());
    }
  }();
  rec.trace = std::move(sol.trace);
  rec.f_star = sol.f_star;

  const int n = rec.trace.n_iters;
  MetricSeries& m = rec.metrics;
  m.iterations.resize(static_cast<size_t>(n));
  m.cumulative_samples.resize(static_cast<size_t>(n));
  for (int k = 1; k <= n; ++k) {
    m.iterations[static_cast<size_t>(k) - 1] = k;
    m.cumulative_samples[static_cast<size_t>(k) - 1] =
        static_cast<double>(rec.trace.cumulative_samples[static_cast<size_t>(k) - 1]);
  }
  if (!rec.trace.objective_estimates.empty()) {
    m.series["objective"] = rec.trace.objective_estimates;
  }
  if (!rec.trace.kkt_residuals.empty()) {
    m.series["kkt"] = rec.trace.kkt_residuals;
  }
  if (rec.f_star) {
    std::vector<double> gap(static_cast<size_t>(n));
    for (int k = 0; k < n; ++k) {
      gap[static_cast<size_t>(k)] = rec.trace.objective_estimates[static_cast<size_t>(k)] - *rec.f_star;
    }
    m.series["gap"] = std::move(gap);
    m.series["weighted_gap"] = weighted_objective_gap(rec.trace, config.weights, *rec.f_star);
  }

  // Support metrics against the run's own final coefficients (the beta_inf
  // convention; an external reference can be applied downstream).
  {
    const bool coeff_head = config.problem == Problem::logistic_re;
    std::vector<double> sen(static_cast<size_t>(n), kNaN), pre(static_cast<size_t>(n), kNaN),
        rel(static_cast<size_t>(n), kNaN);
    for (int k = 1; k <= n; ++k) {
      const ParamVector full = rec.trace.iterate_at(k);
      const ParamVector beta = coeff_head ? ParamVector(full.head(sol.beta_final.size())) : full;
      const SupportMetrics sm = sensitivity_precision(beta, sol.beta_final);
      if (sm.sensitivity) sen[static_cast<size_t>(k) - 1] = *sm.sensitivity;
      if (sm.precision) pre[static_cast<size_t>(k) - 1] = *sm.precision;
      if (const auto r = relative_error(beta, sol.beta_final)) rel[static_cast<size_t>(k) - 1] = *r;
    }
    m.series["sen"] = std::move(sen);
    m.series["pre"] = std::move(pre);
    m.series["rel_err"] = std::move(rel);
  }

  if (!sol.averaged.empty()) {
    std::vector<double> avg_obj(static_cast<size_t>(n), kNaN);
    std::vector<double> avg_gap(static_cast<size_t>(n), kNaN);
    for (size_t i = 0; i < sol.averaged.size(); ++i) {
      const size_t at = static_cast<size_t>(config.average_burn_in) + i;
      avg_obj[at] = sol.objective(sol.averaged[i]);
      if (rec.f_star) avg_gap[at] = avg_obj[at] - *rec.f_star;
    }
    m.series["avg_objective"] = std::move(avg_obj);
    if (rec.f_star) m.series["avg_gap"] = std::move(avg_gap);
  }

  if (!config.output_path.empty()) {
    const std::string base =
        rep == 0 ? config.output_path : config.output_path + ".rep" + std::to_string(rep);
    export_record(rec, base, ExportFormat::json);
  }
  return rec;
}

int max_threads() {
  if (const char* env = std::getenv("STOCHPROX_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

AggregateRecord replicate_and_aggregate(const ExperimentConfig& config, int replications) {
  require(replications >= 2, "replicate_and_aggregate: need at least 2 replications");

  std::vector<std::optional<RunRecord>> records(static_cast<size_t>(replications));
  std::vector<std::string> errors(static_cast<size_t>(replications));
  std::atomic<int> next{0};
  const int n_threads = std::min(max_threads(), replications);

  auto worker = [&]() {
    for (;;) {
      const int r = next.fetch_add(1);
      if (r >= replications) return;
      try {
        ExperimentConfig cfg = config;
        cfg.output_path.clear();  // shards are aggregated, not persisted
        records[static_cast<size_t>(r)] = run_experiment(cfg, r);
      } catch (const std::exception& e) {
        errors[static_cast<size_t>(r)] = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(n_threads));
  for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  AggregateRecord agg;
  agg.config = config;
  const RunRecord* first = nullptr;
  for (int r = 0; r < replications; ++r) {
    if (records[static_cast<size_t>(r)]) {
      if (!first) first = &*records[static_cast<size_t>(r)];
      ++agg.n_success;
    } else {
      agg.failed_replications.push_back(r);
    }
  }
  require(first != nullptr, "replicate_and_aggregate: all replications failed");

  agg.stats.iterations = first->metrics.iterations;
  agg.stats.cumulative_samples = first->metrics.cumulative_samples;
  const size_t n = agg.stats.iterations.size();

  for (const auto& entry : first->metrics.series) {
    const std::string& key = entry.first;
    std::vector<double> mean(n, kNaN), q05(n, kNaN), q25(n, kNaN), q50(n, kNaN), q75(n, kNaN),
        q95(n, kNaN);
    std::vector<double> vals;
    for (size_t i = 0; i < n; ++i) {
      vals.clear();
      for (const auto& rec : records) {
        if (!rec) continue;
        const auto it = rec->metrics.series.find(key);
        if (it == rec->metrics.series.end() || it->second.size() != n) continue;
        const double v = it->second[i];
        if (!std::isnan(v)) vals.push_back(v);
      }
      if (vals.empty()) continue;
      double acc = 0.0;
      for (double v : vals) acc += v;
      mean[i] = acc / static_cast<double>(vals.size());
      q05[i] = quantile(vals, 0.05);
      q25[i] = quantile(vals, 0.25);
      q50[i] = quantile(vals, 0.50);
      q75[i] = quantile(vals, 0.75);
      q95[i] = quantile(vals, 0.95);
    }
    agg.stats.series[key + ".mean"] = std::move(mean);
    agg.stats.series[key + ".q05"] = std::move(q05);
    agg.stats.series[key + ".q25"] = std::move(q25);
    agg.stats.series[key + ".q50"] = std::move(q50);
    agg.stats.series[key + ".q75"] = std::move(q75);
    agg.stats.series[key + ".q95"] = std::move(q95);
  }
  return agg;
}

// --- serialization ---------------------------------------------------------

namespace {

json vec_json(const std::vector<double>& v) { return json(v); }

std::vector<double> vec_from_json(const json& j) {
  std::vector<double> v;
  v.reserve(j.size());
  for (const auto& e : j) {
    v.push_back(e.is_null() ? kNaN : e.get<double>());
  }
  return v;
}

json param_json(const ParamVector& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

ParamVector param_from_json(const json& j) {
  ParamVector v(static_cast<Eigen::Index>(j.size()));
  Eigen::Index i = 0;
  for (const auto& e : j) v[i++] = e.is_null() ? kNaN : e.get<double>();
  return v;
}

std::string tseq_kind_string(TSequence::Kind k) {
  switch (k) {
    case TSequence::Kind::recursive: return "recursive";
    case TSequence::Kind::linear_half: return "linear_half";
    case TSequence::Kind::power: return "power";
    case TSequence::Kind::ones: return "ones";
  }
  return "?";
}

TSequence::Kind tseq_kind_from_string(const std::string& s) {
  if (s == "recursive") return TSequence::Kind::recursive;
  if (s == "linear_half") return TSequence::Kind::linear_half;
  if (s == "power") return TSequence::Kind::power;
  if (s == "ones") return TSequence::Kind::ones;
  throw std::invalid_argument("unknown t-sequence kind '" + s + "'");
}

}  // namespace

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["problem"] = to_string(c.problem);
  j["algorithm"] = to_string(c.algorithm);
  j["steps"] = {{"c_gamma", c.steps.c_gamma}, {"exponent_c", c.steps.exponent_c}};
  if (c.steps.cap) j["steps"]["cap"] = *c.steps.cap;
  j["steps_relative_to_lipschitz"] = c.steps_relative_to_lipschitz;
  j["step_scale"] = c.step_scale;
  j["batches"] = {{"offset", c.batches.offset}, {"c_b", c.batches.c_b}, {"exponent_b", c.batches.exponent_b}};
  j["weights"] = {{"exponent_a", c.weights.exponent_a}};
  j["average_burn_in"] = c.average_burn_in;
  j["tseq"] = {{"kind", tseq_kind_string(c.tseq.kind)}, {"beta", c.tseq.beta}, {"n0", c.tseq.n0}};
  j["n_iters"] = c.n_iters;
  j["replications"] = c.replications;
  j["seed"] = c.seed;
  j["reference_iters"] = c.reference_iters;
  j["store_iterates"] = c.store_iterates;
  j["name"] = c.name;
  j["lasso"] = {{"d", c.lasso.d},
                {"n_obs", c.lasso.n_obs},
                {"design", c.lasso.design == LassoProblemConfig::Design::log_spectrum
                               ? "log_spectrum"
                               : "ar_correlated"},
                {"ar_rho", c.lasso.ar_rho},
                {"nonzeros", c.lasso.nonzeros},
                {"beta_scale", c.lasso.beta_scale},
                {"noise_sd", c.lasso.noise_sd},
                {"lambda", c.lasso.lambda},
                {"spectrum_decades", c.lasso.spectrum_decades},
                {"spectrum_scale", c.lasso.spectrum_scale}};
  j["ising"] = {{"p", c.ising.p},
                {"n_obs", c.ising.n_obs},
                {"coupling", c.ising.coupling},
                {"lambda", c.ising.lambda},
                {"box_hi", c.ising.box_hi},
                {"gibbs_oracle", c.ising.gibbs_oracle},
                {"gibbs_burn_in", c.ising.gibbs_burn_in},
                {"warm_start", c.ising.warm_start}};
  const SyntheticSpec& s = c.logistic.spec;
  j["logistic"] = {{"N", s.N},           {"p", s.p},
                   {"q", s.q},           {"ar_rho", s.ar_rho},
                   {"sparsity", s.sparsity}, {"beta_lo", s.beta_lo},
                   {"beta_hi", s.beta_hi},   {"sigma2", s.sigma2},
                   {"lambda", s.lambda},     {"alpha", s.alpha},
                   {"panel_size", c.logistic.panel_size}, {"sigma0", c.logistic.sigma0}};
  return j;
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  c.problem = problem_from_string(j.at("problem").get<std::string>());
  c.algorithm = algorithm_from_string(j.at("algorithm").get<std::string>());
  {
    const auto& js = j.at("steps");
    std::optional<double> cap;
    if (js.contains("cap")) cap = js.at("cap").get<double>();
    c.steps = StepSchedule(js.at("c_gamma").get<double>(), js.at("exponent_c").get<double>(), cap);
  }
  c.steps_relative_to_lipschitz = j.value("steps_relative_to_lipschitz", false);
  c.step_scale = j.value("step_scale", 1.0);
  {
    const auto& jb = j.at("batches");
    c.batches = BatchSchedule(jb.at("offset").get<long long>(), jb.at("c_b").get<double>(),
                              jb.at("exponent_b").get<double>());
  }
  c.weights = WeightSchedule(j.at("weights").at("exponent_a").get<double>());
  c.average_burn_in = j.value("average_burn_in", 0);
  {
    const auto& jt = j.at("tseq");
    c.tseq.kind = tseq_kind_from_string(jt.at("kind").get<std::string>());
    c.tseq.beta = jt.value("beta", 0.5);
    c.tseq.n0 = jt.value("n0", 2.0);
  }
  c.n_iters = j.at("n_iters").get<int>();
  c.replications = j.value("replications", 1);
  c.seed = j.at("seed").get<std::uint64_t>();
  c.reference_iters = j.value("reference_iters", 20000);
  c.store_iterates = j.value("store_iterates", true);
  c.name = j.value("name", std::string());
  if (j.contains("lasso")) {
    const auto& jl = j.at("lasso");
    c.lasso.d = jl.value("d", 20);
    c.lasso.n_obs = jl.value("n_obs", 50);
    c.lasso.design = jl.value("design", std::string("ar_correlated")) == "log_spectrum"
                         ? LassoProblemConfig::Design::log_spectrum
                         : LassoProblemConfig::Design::ar_correlated;
    c.lasso.ar_rho = jl.value("ar_rho", 0.5);
    c.lasso.nonzeros = jl.value("nonzeros", 5);
    c.lasso.beta_scale = jl.value("beta_scale", 2.0);
    c.lasso.noise_sd = jl.value("noise_sd", 0.5);
    c.lasso.lambda = jl.value("lambda", 2.0);
    c.lasso.spectrum_decades = jl.value("spectrum_decades", 4.0);
    c.lasso.spectrum_scale = jl.value("spectrum_scale", 10.0);
  }
  if (j.contains("ising")) {
    const auto& ji = j.at("ising");
    c.ising.p = ji.value("p", 4);
    c.ising.n_obs = ji.value("n_obs", 200);
    c.ising.coupling = ji.value("coupling", 0.5);
    c.ising.lambda = ji.value("lambda", 0.02);
    c.ising.box_hi = ji.value("box_hi", 5.0);
    c.ising.gibbs_oracle = ji.value("gibbs_oracle", false);
    c.ising.gibbs_burn_in = ji.value("gibbs_burn_in", 0);
    c.ising.warm_start = ji.value("warm_start", true);
  }
  if (j.contains("logistic")) {
    const auto& jg = j.at("logistic");
    c.logistic.spec.N = jg.value("N", 100);
    c.logistic.spec.p = jg.value("p", 200);
    c.logistic.spec.q = jg.value("q", 5);
    c.logistic.spec.ar_rho = jg.value("ar_rho", 0.8);
    c.logistic.spec.sparsity = jg.value("sparsity", 0.98);
    c.logistic.spec.beta_lo = jg.value("beta_lo", 1.0);
    c.logistic.spec.beta_hi = jg.value("beta_hi", 5.0);
    c.logistic.spec.sigma2 = jg.value("sigma2", 0.1);
    c.logistic.spec.lambda = jg.value("lambda", 6.0);
    c.logistic.spec.alpha = jg.value("alpha", 1.0);
    c.logistic.panel_size = jg.value("panel_size", 10000);
    c.logistic.sigma0 = jg.value("sigma0", 1.0);
  }
  return c;
}

json record_to_json(const RunRecord& r) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["config"] = config_to_json(r.config);
  j["config_hash"] = r.config_hash;
  j["replication"] = r.replication;
  if (r.f_star) j["f_star"] = *r.f_star;

  json jt;
  jt["theta0"] = param_json(r.trace.theta0);
  jt["n_iters"] = r.trace.n_iters;
  jt["thin"] = r.trace.thin;
  jt["seed"] = r.trace.seed;
  jt["gammas"] = vec_json(r.trace.gammas);
  jt["objective_estimates"] = vec_json(r.trace.objective_estimates);
  jt["samples_per_iter"] = json(r.trace.samples_per_iter);
  jt["cumulative_samples"] = json(r.trace.cumulative_samples);
  jt["kkt_residuals"] = vec_json(r.trace.kkt_residuals);
  if (r.config.store_iterates) {
    json arr = json::array();
    for (const auto& it : r.trace.iterates) arr.push_back(param_json(it));
    jt["iterates"] = std::move(arr);
    jt["iterate_steps"] = json(r.trace.iterate_steps);
  }
  j["trace"] = std::move(jt);

  json jm;
  jm["iterations"] = vec_json(r.metrics.iterations);
  jm["cumulative_samples"] = vec_json(r.metrics.cumulative_samples);
  json js;
  for (const auto& [key, series] : r.metrics.series) js[key] = vec_json(series);
  jm["series"] = std::move(js);
  j["metrics"] = std::move(jm);
  return j;
}

RunRecord record_from_json(const json& j) {
  const int version = j.at("schema_version").get<int>();
  if (version != kSchemaVersion) {
    throw std::runtime_error("record_from_json: unsupported schema version " +
                             std::to_string(version));
  }
  RunRecord r;
  r.config = config_from_json(j.at("config"));
  r.config_hash = j.value("config_hash", std::string());
  r.replication = j.value("replication", 0);
  if (j.contains("f_star")) r.f_star = j.at("f_star").get<double>();

  const auto& jt = j.at("trace");
  r.trace.theta0 = param_from_json(jt.at("theta0"));
  r.trace.n_iters = jt.at("n_iters").get<int>();
  r.trace.thin = jt.at("thin").get<int>();
  r.trace.seed = jt.at("seed").get<std::uint64_t>();
  r.trace.gammas = vec_from_json(jt.at("gammas"));
  r.trace.objective_estimates = vec_from_json(jt.at("objective_estimates"));
  r.trace.samples_per_iter = jt.at("samples_per_iter").get<std::vector<long long>>();
  r.trace.cumulative_samples = jt.at("cumulative_samples").get<std::vector<long long>>();
  r.trace.kkt_residuals = vec_from_json(jt.at("kkt_residuals"));
  if (jt.contains("iterates")) {
    for (const auto& e : jt.at("iterates")) r.trace.iterates.push_back(param_from_json(e));
    r.trace.iterate_steps = jt.at("iterate_steps").get<std::vector<int>>();
  }

  const auto& jm = j.at("metrics");
  r.metrics.iterations = vec_from_json(jm.at("iterations"));
  r.metrics.cumulative_samples = vec_from_json(jm.at("cumulative_samples"));
  for (const auto& [key, series] : jm.at("series").items()) {
    r.metrics.series[key] = vec_from_json(series);
  }
  return r;
}

namespace {

std::string timestamp_utc() {
  std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

void write_record_csv(const RunRecord& r, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("export_record: cannot open " + path);
  os << "# stochprox run record, schema_version=" << kSchemaVersion << "\n";
  os << "# config_hash=" << r.config_hash << " seed=" << r.config.seed
     << " replication=" << r.replication << "\n";
  os << "# columns: iteration, cumulative_samples, gamma, samples";
  for (const auto& [key, series] : r.metrics.series) os << ", " << key;
  os << "\n";
  os << "iteration,cumulative_samples,gamma,samples";
  for (const auto& [key, series] : r.metrics.series) os << "," << key;
  os << "\n";
  os.precision(17);
  for (int k = 0; k < r.trace.n_iters; ++k) {
    os << (k + 1) << "," << r.trace.cumulative_samples[static_cast<size_t>(k)] << ","
       << r.trace.gammas[static_cast<size_t>(k)] << ","
       << r.trace.samples_per_iter[static_cast<size_t>(k)];
    for (const auto& [key, series] : r.metrics.series) {
      os << ",";
      const double v = series[static_cast<size_t>(k)];
      if (std::isnan(v)) {
        os << "";
      } else {
        os << v;
      }
    }
    os << "\n";
  }
  if (!os) throw std::runtime_error("export_record: write failed for " + path);
}

}  // namespace

void export_record(const RunRecord& record, const std::string& base_path, ExportFormat format) {
  if (format == ExportFormat::csv) {
    write_record_csv(record, base_path + ".csv");
    return;
  }
  json envelope;
  envelope["payload"] = record_to_json(record);
  envelope["provenance"] = {{"created_at", timestamp_utc()},
                            {"config_hash", record.config_hash},
                            {"schema_version", kSchemaVersion}};
  write_json_file(base_path + ".json", envelope);
}

RunRecord import_record(const std::string& json_path) {
  const json envelope = read_json_file(json_path);
  return record_from_json(envelope.contains("payload") ? envelope.at("payload") : envelope);
}

void export_aggregate_csv(const AggregateRecord& agg, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("export_aggregate_csv: cannot open " + path);
  os << "# stochprox aggregate over " << agg.n_success << " replications";
  if (!agg.failed_replications.empty()) {
    os << " (" << agg.failed_replications.size() << " failed)";
  }
  os << "\n";
  os << "iteration,cumulative_samples";
  for (const auto& [key, series] : agg.stats.series) os << "," << key;
  os << "\n";
  os.precision(17);
  for (size_t k = 0; k < agg.stats.iterations.size(); ++k) {
    os << agg.stats.iterations[k] << "," << agg.stats.cumulative_samples[k];
    for (const auto& [key, series] : agg.stats.series) {
      os << ",";
      if (!std::isnan(series[k])) os << series[k];
    }
    os << "\n";
  }
}

// --- presets ----------------------------------------------------------------

ExperimentConfig experiment_preset(const std::string& name) {
  ExperimentConfig c;
  c.name = name;
  c.seed = 1;

  if (name == "table1.r1") {
    // Averaged PG, no-bias row 1: c = 0, a = 1, b = 1 on the Ising instance.
    c.problem = Problem::ising;
    c.algorithm = Algorithm::averaged_pg;
    c.steps_relative_to_lipschitz = true;
    c.steps = StepSchedule::constant(1.0);
    c.weights = WeightSchedule(1.0);
    c.batches = BatchSchedule(0, 0.5, 1.0);
    c.n_iters = 800;
    c.replications = 10;
    c.reference_iters = 30000;
    return c;
  }
  if (name == "table1.r2") {
    // no-bias row 2: c = 1/4, a = 0 > -c, b = 1 - 2c = 1/2.
    c.problem = Problem::ising;
    c.algorithm = Algorithm::averaged_pg;
    c.steps_relative_to_lipschitz = true;
    c.steps = StepSchedule(1.0, 0.25);
    c.weights = WeightSchedule(0.0);
    c.batches = BatchSchedule(0, 10.0, 0.5);
    c.n_iters = 400;
    c.replications = 10;
    c.reference_iters = 30000;
    return c;
  }
  if (name == "table1.r3") {
    // no-bias row 3: c = 0, a = -c = 0, b in (1, inf).
    c.problem = Problem::ising;
    c.algorithm = Algorithm::averaged_pg;
    c.steps_relative_to_lipschitz = true;
    c.steps = StepSchedule::constant(1.0);
    c.weights = WeightSchedule(0.0);
    c.batches = BatchSchedule(0, 2.0, 1.5);
    c.n_iters = 300;
    c.replications = 10;
    c.reference_iters = 30000;
    return c;
  }
  if (name == "table2.r1") {
    // FISTA, no-bias row 1: c = 0, b = 3.1 > 3. The small constant step keeps
    // the 1/n^2 transient inside the rate-fit window.
    c.problem = Problem::ising;
    c.algorithm = Algorithm::fista;
    c.steps_relative_to_lipschitz = true;
    c.steps = StepSchedule::constant(1.0);
    c.step_scale = 0.02;
    c.batches = BatchSchedule(0, 0.02, 3.1);
    c.tseq = TSequence::recursive();
    c.n_iters = 80;
    c.replications = 10;
    c.reference_iters = 30000;
    return c;
  }
  if (name == "table2.r2") {
    // FISTA, no-bias row 2: c = 1/2, b = 3 - 2c + 0.1 = 2.1.
    c.problem = Problem::ising;
    c.algorithm = Algorithm::fista;
    c.steps_relative_to_lipschitz = true;
    c.steps = StepSchedule(1.0, 0.5);
    c.batches = BatchSchedule(0, 0.05, 2.1);
    c.tseq = TSequence::recursive();
    c.n_iters = 80;
    c.replications = 10;
    c.reference_iters = 30000;
    return c;
  }

  // Desk-scale logistic runs; gamma and m_n follow the full-scale settings.
  c.problem = Problem::logistic_re;
  c.n_iters = 150;
  c.replications = 5;
  c.reference_iters = 0;
  if (name == "algo1") {
    c.algorithm = Algorithm::perturbed_pg;
    c.steps = StepSchedule::constant(0.005);
    c.batches = BatchSchedule(200, 1.0, 1.0);
    return c;
  }
  if (name == "algo2") {
    c.algorithm = Algorithm::perturbed_pg;
    c.steps = StepSchedule::constant(0.001);
    c.batches = BatchSchedule(200, 1.0, 1.0);
    return c;
  }
  if (name == "algo3") {
    c.algorithm = Algorithm::perturbed_pg;
    c.steps = StepSchedule(0.05, 0.5);
    c.batches = BatchSchedule(270, 1.0, 0.5);
    return c;
  }
  if (name == "algoF1") {
    c.algorithm = Algorithm::fista;
    c.steps = StepSchedule::constant(0.001);
    c.batches = BatchSchedule(45, 1.0 / 6000.0, 3.1);
    c.tseq = TSequence::recursive();
    return c;
  }
  if (name == "algoF2") {
    c.algorithm = Algorithm::fista;
    c.steps = StepSchedule(0.1, 1.0, 0.005);
    c.batches = BatchSchedule(155, 0.01, 2.1);
    c.tseq = TSequence::recursive();
    return c;
  }
  if (name == "algoW") {
    c.algorithm = Algorithm::averaged_pg;
    c.steps = StepSchedule::constant(0.005);
    c.batches = BatchSchedule(200, 1.0, 1.0);
    c.weights = WeightSchedule(0.5);  // increasing weights a_n = sqrt(n)
    c.average_burn_in = 35;
    return c;
  }
  throw std::invalid_argument("experiment_preset: unknown preset '" + name + "'");
}

std::vector<std::string> experiment_preset_names() {
  return {"table1.r1", "table1.r2", "table1.r3", "table2.r1", "table2.r2",
          "algo1",     "algo2",     "algo3",     "algoF1",    "algoF2",
          "algoW"};
}

}  // namespace stochprox
