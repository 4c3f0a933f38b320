#pragma once

#include <optional>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "stochprox/metrics.hpp"
#include "stochprox/models/logistic_re.hpp"
#include "stochprox/models/mrf.hpp"
#include "stochprox/solver.hpp"

namespace stochprox {

inline constexpr int kSchemaVersion = 1;

enum class Problem { lasso_ls, ising, logistic_re };
enum class Algorithm { pg, perturbed_pg, fista, averaged_pg };

std::string to_string(Problem p);
std::string to_string(Algorithm a);
Problem problem_from_string(const std::string& s);
Algorithm algorithm_from_string(const std::string& s);

/// Seeded lasso least-squares instance. The default design uses AR-correlated
/// Gaussian covariates with sparse coefficients and Gaussian noise. The
/// log_spectrum design instead pins the spectrum of X'X to a log-spaced grid
/// (spanning `spectrum_decades` decades) with the start-to-solution error
/// spread evenly over all eigenmodes; on that design the solvers track their
/// worst-case rate envelopes cleanly instead of converging superlinearly,
/// which is what the rate-verification runs need.
struct LassoProblemConfig {
  enum class Design { ar_correlated, log_spectrum };

  int d = 20;
  int n_obs = 50;
  Design design = Design::ar_correlated;
  double ar_rho = 0.5;
  int nonzeros = 5;
  double beta_scale = 2.0;
  double noise_sd = 0.5;
  double lambda = 2.0;
  double spectrum_decades = 4.0;  // log_spectrum only
  double spectrum_scale = 10.0;   // largest singular value of X
};

/// Small Ising instance with enumeration ground truth. theta_true places
/// `coupling` on the ring edges; the penalty is l1 on the off-diagonal
/// couplings plus the rectangle 0 <= theta_ij <= box_hi (diagonal free).
struct IsingProblemConfig {
  int p = 4;
  int n_obs = 200;
  double coupling = 0.5;
  double lambda = 0.02;
  double box_hi = 5.0;
  bool gibbs_oracle = false;  // false: exact i.i.d. sampling by enumeration
  int gibbs_burn_in = 0;
  bool warm_start = true;
};

struct LogisticProblemConfig {
  SyntheticSpec spec = SyntheticSpec::desk_scale();
  int panel_size = 10000;  // common-random-numbers panel for F-hat
  double sigma0 = 1.0;
};

struct ExperimentConfig {
  Problem problem = Problem::lasso_ls;
  Algorithm algorithm = Algorithm::pg;

  StepSchedule steps = StepSchedule::constant(0.1);
  /// When set, the step constant becomes step_scale / L with L the instance
  /// Lipschitz constant (so c = 0 gives gamma = step_scale / L).
  bool steps_relative_to_lipschitz = false;
  double step_scale = 1.0;

  BatchSchedule batches = BatchSchedule::constant(1);
  WeightSchedule weights = WeightSchedule::uniform();  // averaged_pg only
  int average_burn_in = 0;                             // averaged_pg only
  TSequence tseq = TSequence::recursive();             // fista only

  int n_iters = 150;
  int replications = 1;
  std::uint64_t seed = 0;

  /// Extra exact iterations used to pin F_star on tractable problems
  /// (lasso/ising). 0 disables the reference solve.
  int reference_iters = 20000;

  bool store_iterates = true;  // include iterates in the JSON payload

  LassoProblemConfig lasso;
  IsingProblemConfig ising;
  LogisticProblemConfig logistic;

  std::string output_path;  // base path for export; empty = no files written
  std::string name;         // preset name or free-form label
};

/// Named presets: the tuning-table rows on the Ising instance (table1.r1,
/// table1.r2, table1.r3, table2.r1, table2.r2) and the desk-scale logistic
/// runs (algo1, algo2, algo3, algoF1, algoF2, algoW).
ExperimentConfig experiment_preset(const std::string& name);
std::vector<std::string> experiment_preset_names();

/// Problem instances, exposed so tests and the acceptance suite can drive the
/// solvers directly.
struct LassoInstance {
  SmoothObjective obj;
  Penalty penalty{BoxConstraint()};
  ParamVector theta0;
  double lipschitz = 0.0;
  Eigen::VectorXd beta_true;
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
};
LassoInstance make_lasso_instance(const LassoProblemConfig& cfg, std::uint64_t seed);

struct IsingInstance {
  MRFModel model;
  SmoothObjective obj;
  Penalty penalty{BoxConstraint()};
  ParamVector theta0;
  ParamVector theta_true;
  double lipschitz = 0.0;  // trace bound on the Hessian, valid for all theta
};
IsingInstance make_ising_instance(const IsingProblemConfig& cfg, std::uint64_t seed);

struct LogisticInstance {
  LogisticREModel model;
  Penalty penalty{BoxConstraint()};
  ParamVector theta0;
  Eigen::VectorXd beta_true;
  std::shared_ptr<LoglikPanel> panel;

  /// F-hat(theta) = -ell-hat(theta) + g(theta) on the shared panel.
  double objective(const ParamVector& theta) const;
};
LogisticInstance make_logistic_instance(const LogisticProblemConfig& cfg, std::uint64_t seed);

struct RunRecord {
  ExperimentConfig config;
  RunTrace trace;
  MetricSeries metrics;
  std::optional<double> f_star;
  int replication = 0;
  std::string config_hash;
};

/// Builds the configured problem, runs the configured solver once
/// (replication `rep`), and assembles the metric series. Reruns with the same
/// (config, rep) are bit-identical.
RunRecord run_experiment(const ExperimentConfig& config, int rep = 0);

struct AggregateRecord {
  ExperimentConfig config;
  MetricSeries stats;  // per base series: .mean, .q05, .q25, .q50, .q75, .q95
  int n_success = 0;
  std::vector<int> failed_replications;
};

/// Runs R independent replications (seeds derived from config.seed) and
/// aggregates per-iteration means and quantiles. Replications run in parallel
/// across threads; STOCHPROX_THREADS caps the thread count. Partial failures
/// are recorded and skipped in the aggregation.
AggregateRecord replicate_and_aggregate(const ExperimentConfig& config, int replications);

nlohmann::json config_to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const nlohmann::json& j);

/// Deterministic payload (schema version, config, trace, metrics);
/// timestamps live in the separate provenance block written by export_record.
nlohmann::json record_to_json(const RunRecord& record);
RunRecord record_from_json(const nlohmann::json& j);

enum class ExportFormat { csv, json };

/// Writes <base>.json ({"payload": ..., "provenance": ...}) or <base>.csv
/// (one row per iteration, columns documented in a '#' header comment).
void export_record(const RunRecord& record, const std::string& base_path, ExportFormat format);
RunRecord import_record(const std::string& json_path);

void export_aggregate_csv(const AggregateRecord& agg, const std::string& path);

/// Thread cap from STOCHPROX_THREADS (>= 1); hardware concurrency otherwise.
int max_threads();

}  // namespace stochprox
