// Command-line driver for the experiment harness.
//
//   stochprox run       --preset algo1 [--seed S] [--iters N] [--out base] [--format csv|json]
//   stochprox run       --config cfg.json ...
//   stochprox replicate --preset table1.r1 --reps 50 --out base
//   stochprox sweep     [--out dir]          (all tuning-table presets, slope summary)
//   stochprox validate                       (quick property self-checks)
//   stochprox export    --in record.json --out base --format csv
//
// STOCHPROX_THREADS caps replication-level parallelism.

#include <CLI11.hpp>
#include <iostream>
#include <nlohmann/json.hpp>

#include "stochprox/experiment.hpp"
#include "stochprox/io.hpp"
#include "stochprox/rng.hpp"

using namespace stochprox;

namespace {

ExperimentConfig load_config(const std::string& preset, const std::string& config_path) {
  if (!preset.empty() && !config_path.empty()) {
    throw CLI::ValidationError("use either --preset or --config, not both");
  }
  if (!preset.empty()) return experiment_preset(preset);
  if (!config_path.empty()) return config_from_json(read_json_file(config_path));
  throw CLI::ValidationError("one of --preset or --config is required");
}

void apply_overrides(ExperimentConfig& cfg, std::int64_t seed, int iters, const std::string& out) {
  if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
  if (iters > 0) cfg.n_iters = iters;
  if (!out.empty()) cfg.output_path = out;
}

int cmd_run(const ExperimentConfig& cfg, const std::string& format) {
  RunRecord rec = run_experiment(cfg);
  if (!cfg.output_path.empty() && format == "csv") {
    export_record(rec, cfg.output_path, ExportFormat::csv);
  }
  std::cout << "run finished: " << cfg.n_iters << " iterations, "
            << rec.trace.cumulative_samples.back() << " Monte Carlo samples\n";
  if (!rec.trace.objective_estimates.empty()) {
    std::cout << "  final objective " << rec.trace.objective_estimates.back();
    if (rec.f_star) {
      std::cout << "  (gap " << rec.trace.objective_estimates.back() - *rec.f_star << ")";
    }
    std::cout << "\n";
  }
  if (!cfg.output_path.empty()) {
    std::cout << "  wrote " << cfg.output_path << ".json";
    if (format == "csv") std::cout << " and " << cfg.output_path << ".csv";
    std::cout << "\n";
  }
  return 0;
}

int cmd_replicate(const ExperimentConfig& cfg, int reps, const std::string& out) {
  const AggregateRecord agg = replicate_and_aggregate(cfg, reps);
  std::cout << "aggregated " << agg.n_success << "/" << reps << " replications\n";
  if (!agg.failed_replications.empty()) {
    std::cout << "  failed replications:";
    for (int r : agg.failed_replications) std::cout << " " << r;
    std::cout << "\n";
  }
  if (agg.stats.series.count("objective.q50")) {
    std::cout << "  median final objective " << agg.stats.series.at("objective.q50").back()
              << "\n";
  }
  if (!out.empty()) {
    export_aggregate_csv(agg, out + ".csv");
    std::cout << "  wrote " << out << ".csv\n";
  }
  return 0;
}

int cmd_sweep(const std::string& out, std::int64_t seed) {
  std::cout << "preset       rate(iter)  rate(samples)  expected\n";
  nlohmann::json summary = nlohmann::json::array();
  for (const std::string name :
       {"table1.r1", "table1.r2", "table1.r3", "table2.r1", "table2.r2"}) {
    ExperimentConfig cfg = experiment_preset(name);
    if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
    const AggregateRecord agg = replicate_and_aggregate(cfg, cfg.replications);
    const bool averaged = cfg.algorithm == Algorithm::averaged_pg;
    const auto& gap = agg.stats.series.at(averaged ? "weighted_gap.mean" : "gap.mean");
    const int n = static_cast<int>(gap.size());
    const double s_iter = fit_rate(agg.stats.iterations, gap, n / 5, n, 0).slope;
    const double s_cum = fit_rate(agg.stats.cumulative_samples, gap, n / 5, n, 0).slope;
    const double expected = -(averaged ? 1.0 : 2.0) + cfg.steps.exponent_c;
    std::printf("%-12s %10.3f %14.3f %9.2f\n", name.c_str(), s_iter, s_cum, expected);
    summary.push_back({{"preset", name},
                       {"slope_iterations", s_iter},
                       {"slope_samples", s_cum},
                       {"expected_rate_exponent", expected}});
  }
  if (!out.empty()) {
    write_json_file(out + "/sweep_summary.json", summary);
    std::cout << "wrote " << out << "/sweep_summary.json\n";
  }
  return 0;
}

int cmd_validate() {
  int failures = 0;
  auto report = [&](const char* name, bool ok) {
    std::cout << (ok ? "[ok]   " : "[FAIL] ") << name << "\n";
    if (!ok) ++failures;
  };

  {
    const double lasso = prox_elastic_net(ParamVector::Constant(1, 3.0), 1.0,
                                          ElasticNetPenalty::lasso(1.0, 1))[0];
    report("soft-threshold closed form", std::abs(lasso - 2.0) < 1e-12);
  }
  {
    std::mt19937_64 rng = make_stream(1);
    std::normal_distribution<double> gauss(0, 1);
    bool ok = true;
    Penalty pen(ElasticNetPenalty::dense(1.5, 0.5, 3));
    for (int rep = 0; rep < 2000; ++rep) {
      ParamVector a(3), b(3);
      for (int i = 0; i < 3; ++i) {
        a[i] = 3.0 * gauss(rng);
        b[i] = 3.0 * gauss(rng);
      }
      const ParamVector pa = pen.prox(a, 0.7), pb = pen.prox(b, 0.7);
      ok = ok && (pa - pb).dot(a - b) >= (pa - pb).squaredNorm() - 1e-10;
    }
    report("firm nonexpansiveness (2000 pairs)", ok);
  }
  {
    const bool ok = !validate_t_gamma(StepSchedule::constant(0.1), TSequence::recursive(), 5000) &&
                    !validate_t_gamma(StepSchedule(1.0, 0.5), TSequence::linear_half(), 5000);
    report("t/gamma compatibility of the stock sequences", ok);
  }
  {
    LassoInstance inst = make_lasso_instance(LassoProblemConfig{}, 3);
    SolverOptions opts;
    opts.objective_eval = [&](const ParamVector& t) {
      return objective_value(inst.obj, inst.penalty, t);
    };
    ExactOracle oracle(inst.obj);
    const StepSchedule steps(1.0 / inst.lipschitz, 0.0);
    const RunTrace a = run_perturbed_pg(oracle, inst.penalty, inst.theta0, steps,
                                        BatchSchedule::constant(1), 50, 0, opts);
    const RunTrace b = run_proximal_gradient(inst.obj, inst.penalty, inst.theta0, steps, 50, opts);
    bool ok = a.objective_estimates == b.objective_estimates;
    for (size_t k = 1; k < a.objective_estimates.size(); ++k) {
      ok = ok && a.objective_estimates[k] <= a.objective_estimates[k - 1] + 1e-10;
    }
    report("exact-oracle reduction and monotone descent", ok);
  }
  {
    std::mt19937_64 rng = make_stream(2);
    double acc = 0.0;
    for (int i = 0; i < 20000; ++i) acc += sample_polya_gamma(0.0, rng);
    report("polya-gamma mean near 1/4", std::abs(acc / 20000 - 0.25) < 0.005);
  }
  std::cout << (failures == 0 ? "all checks passed\n" : "some checks FAILED\n");
  return failures;
}

int cmd_export(const std::string& in, const std::string& out, const std::string& format) {
  const RunRecord rec = import_record(in);
  export_record(rec, out, format == "csv" ? ExportFormat::csv : ExportFormat::json);
  std::cout << "wrote " << out << "." << format << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stochastic proximal gradient experiment harness"};
  app.require_subcommand(1);

  std::string preset, config_path, out, in, format = "json";
  std::int64_t seed = -1;
  int iters = 0, reps = 0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--preset", preset,
                    "named preset (table1.r1..r3, table2.r1..r2, algo1..3, algoF1, algoF2, algoW)");
    cmd->add_option("--config", config_path, "experiment config JSON file");
    cmd->add_option("--seed", seed, "override the base seed");
    cmd->add_option("--iters", iters, "override the iteration budget");
    cmd->add_option("--out", out, "output base path");
  };

  CLI::App* run = app.add_subcommand("run", "run one experiment");
  add_common(run);
  run->add_option("--format", format, "export format: csv or json")
      ->check(CLI::IsMember({"csv", "json"}));

  CLI::App* repl = app.add_subcommand("replicate", "run independent replications and aggregate");
  add_common(repl);
  repl->add_option("--reps", reps, "number of replications");

  CLI::App* sweep = app.add_subcommand("sweep", "run all tuning-table presets and fit rates");
  sweep->add_option("--out", out, "directory for the sweep summary");
  sweep->add_option("--seed", seed, "override the base seed");

  CLI::App* validate = app.add_subcommand("validate", "quick property self-checks");

  CLI::App* exp = app.add_subcommand("export", "convert a stored record to another format");
  exp->add_option("--in", in, "input record JSON")->required();
  exp->add_option("--out", out, "output base path")->required();
  exp->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      ExperimentConfig cfg = load_config(preset, config_path);
      apply_overrides(cfg, seed, iters, out);
      return cmd_run(cfg, format);
    }
    if (repl->parsed()) {
      ExperimentConfig cfg = load_config(preset, config_path);
      apply_overrides(cfg, seed, iters, "");
      return cmd_replicate(cfg, reps > 0 ? reps : cfg.replications, out);
    }
    if (sweep->parsed()) return cmd_sweep(out, seed);
    if (validate->parsed()) return cmd_validate();
    if (exp->parsed()) return cmd_export(in, out, format);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
