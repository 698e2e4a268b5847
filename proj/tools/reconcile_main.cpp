/*
 * Copyright 2026 The Reconcile Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Command-line front end: run experiments, audit external prediction
// matrices, and aggregate reports.

#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>

#include "reconcile/baselines.hpp"
#include "reconcile/harness.hpp"
#include "reconcile/report.hpp"
#include "reconcile/synthetic.hpp"

namespace fs = std::filesystem;
using namespace reconcile;

namespace {

struct DataOptions {
  std::string data;
  std::string target;
  std::vector<std::string> categoricals;
  std::string positive;
  std::string manifest;
  bool synthetic = false;
  std::size_t synthetic_samples = 3000;
  double synthetic_noise = 0.05;
  std::uint64_t synthetic_seed = 0;
};

struct RunOptions {
  DataOptions data;
  std::string methods = "all";
  std::size_t seeds = 10;
  std::uint64_t seed_base = 0;
  std::string out;
  bool dump_neighborhoods = false;
};

void add_data_options(CLI::App* cmd, DataOptions& o) {
  cmd->add_option("--data", o.data, "Input CSV with a header row");
  cmd->add_option("--target", o.target, "Binary target column");
  cmd->add_option("--categoricals", o.categoricals, "Categorical columns")->delimiter(',');
  cmd->add_option("--positive", o.positive, "Target value mapped to label 1");
  cmd->add_option("--manifest", o.manifest, "Dataset manifest (data, target, categoricals, positive, seed)");
  cmd->add_flag("--synthetic", o.synthetic, "Use the built-in Gaussian-mixture benchmark");
  cmd->add_option("--synthetic-samples", o.synthetic_samples, "Benchmark size")->capture_default_str();
  cmd->add_option("--synthetic-noise", o.synthetic_noise, "Benchmark label-noise rate")->capture_default_str();
  cmd->add_option("--synthetic-seed", o.synthetic_seed, "Benchmark generator seed")->capture_default_str();
}

void add_method_options(CLI::App* cmd, ExperimentConfig& c) {
  cmd->add_option("--pool-size", c.pool_size, "Models kept in the pool")->capture_default_str();
  cmd->add_option("--train-ratio", c.ratios.train)->capture_default_str();
  cmd->add_option("--val-ratio", c.ratios.val)->capture_default_str();
  cmd->add_option("--test-ratio", c.ratios.test)->capture_default_str();
  cmd->add_option("--disagreement-eps", c.disagreement_eps, "Disagreement-rate threshold")->capture_default_str();
  cmd->add_option("--lcae-k", c.lcae_k, "LCAE neighbors")->capture_default_str();
  cmd->add_option("--standardize", c.standardize, "Standardize numeric columns")->capture_default_str();
  cmd->add_option("--drop-first", c.drop_first, "Omit the first category of each categorical column")
      ->capture_default_str();
  cmd->add_option_function<std::string>(
         "--oc-mode",
         [&c](const std::string& v) { c.oc.mode = v == "rate" ? OutlierMode::kRate : OutlierMode::kThreshold; },
         "Outlier rule: rate (default) or threshold")
      ->check(CLI::IsMember({"rate", "threshold"}))
      ->default_str("rate");
  cmd->add_option("--tau-low", c.oc.tau_low)->capture_default_str();
  cmd->add_option("--tau-high", c.oc.tau_high)->capture_default_str();
  cmd->add_option("--rho-train", c.oc.rho_train)->capture_default_str();
  cmd->add_option("--rho-val", c.oc.rho_val)->capture_default_str();
  cmd->add_option("--oc-retrain", c.oc.retrain, "Refit the pool after flipping training labels")
      ->capture_default_str();
  cmd->add_option("--k", c.lp.k, "Patch neighborhood size")->capture_default_str();
  cmd->add_option("--k-max", c.lp.k_max, "Candidate neighbors before the radius filter (0: 5k)")
      ->capture_default_str();
  cmd->add_option("--tau-bias", c.lp.tau_bias)->capture_default_str();
  cmd->add_option("--eps", c.pr.eps, "Reconciliation disagreement threshold")->capture_default_str();
  cmd->add_option("--batch", c.pr.batch, "Pairs per iteration")->capture_default_str();
  cmd->add_option("--alpha", c.pr.alpha, "Minimum region size")->capture_default_str();
  cmd->add_option("--lambda", c.pr.lambda)->capture_default_str();
  cmd->add_option("--delta", c.pr.delta, "Minimum Brier improvement")->capture_default_str();
  cmd->add_option("--eta", c.pr.eta, "Convergence threshold")->capture_default_str();
  cmd->add_option("--t-max", c.pr.t_max, "Iteration cap")->capture_default_str();
}

struct LoadedData {
  TabularDataset data;
  std::string id;
  std::set<std::string> categoricals;
};

LoadedData load_data(const DataOptions& o) {
  if (o.synthetic) {
    SyntheticConfig sc;
    sc.samples = o.synthetic_samples;
    sc.noise_rate = o.synthetic_noise;
    sc.seed = o.synthetic_seed;
    return {make_gaussian_mixture(sc).data, "synthetic", {}};
  }
  std::string path = o.data;
  std::string target = o.target;
  std::set<std::string> categoricals(o.categoricals.begin(), o.categoricals.end());
  LoadOptions load;
  if (!o.positive.empty()) load.positive_label = o.positive;
  if (!o.manifest.empty()) {
    const auto m = read_manifest(o.manifest);
    if (path.empty()) path = (fs::path(o.manifest).parent_path() / m.data_path).string();
    if (target.empty()) target = m.target_column;
    if (categoricals.empty()) categoricals = m.categorical_columns;
    if (!load.positive_label) load.positive_label = m.positive_label;
  }
  if (path.empty() || target.empty()) throw InvalidArgument("need --data and --target, --manifest or --synthetic");
  return {load_csv(path, target, categoricals, load), fs::path(path).stem().string(), categoricals};
}

std::vector<std::uint64_t> seed_list(std::size_t count, std::uint64_t base) {
  std::vector<std::uint64_t> seeds(count);
  std::iota(seeds.begin(), seeds.end(), base);
  return seeds;
}

void write_reports(const std::vector<RunRow>& rows, const fs::path& out) {
  const auto deltas = report_delta(rows);
  write_delta_csv(deltas, (out / "delta_report.csv").string());
  write_delta_markdown(deltas, (out / "delta_report.md").string());
  std::cout << delta_markdown(deltas);
}

void dump_neighborhoods(const std::vector<SeedResult>& results, const std::vector<RunRow>& rows,
                        const fs::path& out) {
  std::size_t row = 0;
  for (const auto& r : results) {
    for (const auto& o : r.outcomes) {
      if (o.lp) write_neighborhoods_csv(o.lp->result.neighborhoods, (out / rows[row].events / "neighborhoods.csv").string());
      ++row;
    }
  }
}

int cmd_run(const RunOptions& o, ExperimentConfig config, const std::string& echo) {
  if (o.out.empty()) throw InvalidArgument("--out is required");
  auto loaded = load_data(o.data);
  config.categorical_columns = loaded.categoricals;
  config.methods = parse_methods(o.methods);
  if (std::find(config.methods.begin(), config.methods.end(), Method::kSoftVoting) == config.methods.end()) {
    // Every report is relative to soft voting.
    config.methods.insert(config.methods.begin(), Method::kSoftVoting);
  }
  if (o.seeds == 0) throw InvalidArgument("--seeds must be positive");
  const fs::path out(o.out);
  fs::create_directories(out);
  {
    // Every option with its effective value; loadable again with --config.
    std::ofstream config_out(out / "run_config.toml");
    config_out << echo;
  }

  const auto results = run_seeds(loaded.data, config, seed_list(o.seeds, o.seed_base));
  auto rows = to_rows(results, loaded.id);
  write_event_logs(results, out.string(), rows);
  if (o.dump_neighborhoods) dump_neighborhoods(results, rows, out);
  write_metrics_csv(rows, (out / "metrics.csv").string());
  write_reports(rows, out);
  return 0;
}

struct AuditOptions {
  std::string predictions;
  std::string labels;
  std::string val_predictions;
  std::string prepared;
  std::string methods = "all";
  std::string out;
  std::uint64_t seed = 0;
};

std::vector<double> read_labels(const std::string& path) {
  const auto table = csv::read_file(path);
  long column = table.column_index("label");
  if (column < 0) column = 0;
  std::vector<double> labels;
  for (const auto& row : table.rows) {
    try {
      labels.push_back(std::stod(row.at(static_cast<std::size_t>(column))));
    } catch (const std::exception&) {
      throw DataError(fmt::format("{}: malformed label", path));
    }
  }
  return labels;
}

int cmd_audit(const AuditOptions& o, ExperimentConfig config) {
  const auto test = read_prediction_csv(o.predictions, Split::kTest);
  const auto labels = read_labels(o.labels);
  if (labels.size() != test.points()) {
    throw DataError(fmt::format("{} predictions but {} labels", test.points(), labels.size()));
  }

  if (o.val_predictions.empty() || o.prepared.empty()) {
    // Matrix-only audit: no features, so no LCAE and no reconciliation.
    const auto ensemble = soft_voting(test);
    fmt::print("models,points,accuracy,brier,variance,ambiguity,discrepancy,disagreement_rate\n");
    fmt::print("{},{},{},{},{},{},{},{}\n", test.models(), test.points(), csv::format_real(accuracy(ensemble, labels), 17),
               csv::format_real(brier_loss(ensemble, labels), 17), csv::format_real(variance_metric(test), 17),
               csv::format_real(ambiguity_metric(test), 17), csv::format_real(discrepancy_metric(test), 17),
               csv::format_real(disagreement_rate(test, config.disagreement_eps), 17));
    return 0;
  }

  auto data = load_prepared_csv(o.prepared);
  const auto test_rows = data.indices(Split::kTest);
  if (test_rows.size() != labels.size()) throw DataError("prepared test split and label file differ in size");
  for (std::size_t t = 0; t < test_rows.size(); ++t) data.labels[test_rows[t]] = labels[t];

  RashomonPool pool;
  pool.val_preds = read_prediction_csv(o.val_predictions, Split::kVal);
  pool.test_preds = test;
  if (pool.val_preds.points() != data.indices(Split::kVal).size()) {
    throw DataError("validation predictions and prepared validation split differ in size");
  }
  if (pool.val_preds.model_ids() != pool.test_preds.model_ids()) {
    throw DataError("validation and test prediction files list different models");
  }
  const auto val_labels = data.labels_of(Split::kVal);
  for (std::size_t m = 0; m < pool.size(); ++m) {
    pool.val_brier.push_back(brier_loss(pool.val_preds.row(m), val_labels));
    pool.val_accuracy.push_back(accuracy(pool.val_preds.row(m), val_labels));
  }
  if (config.oc.retrain) spdlog::info("external predictions: outlier correction runs without retraining");
  config.oc.retrain = false;
  config.methods = parse_methods(o.methods);
  if (std::find(config.methods.begin(), config.methods.end(), Method::kSoftVoting) == config.methods.end()) {
    config.methods.insert(config.methods.begin(), Method::kSoftVoting);
  }

  const std::vector<SeedResult> results{run_methods(pool, data, config, o.seed)};
  auto rows = to_rows(results, fs::path(o.prepared).stem().string());
  if (!o.out.empty()) {
    const fs::path out(o.out);
    fs::create_directories(out);
    write_event_logs(results, out.string(), rows);
    write_metrics_csv(rows, (out / "metrics.csv").string());
    const auto deltas = report_delta(rows);
    write_delta_csv(deltas, (out / "delta_report.csv").string());
    write_delta_markdown(deltas, (out / "delta_report.md").string());
  }
  std::cout << delta_markdown(report_delta(rows));
  return 0;
}

int cmd_report(const std::string& in) {
  const fs::path dir(in);
  const auto rows = read_metrics_csv((dir / "metrics.csv").string());
  write_reports(rows, dir);
  return 0;
}

int cmd_prepare(const DataOptions& o, const ExperimentConfig& config, std::uint64_t seed, const std::string& out) {
  auto loaded = load_data(o);
  const auto split = stratified_split(loaded.data, config.ratios, seed);
  PreprocessSpec spec;
  spec.categorical_columns = loaded.categoricals;
  spec.standardize = config.standardize;
  spec.drop_first = config.drop_first;
  export_csv(fit_apply_preprocess(split, spec), out);
  return 0;
}

int cmd_synth(const DataOptions& o, const std::string& out) {
  SyntheticConfig sc;
  sc.samples = o.synthetic_samples;
  sc.noise_rate = o.synthetic_noise;
  sc.seed = o.synthetic_seed;
  export_csv(make_gaussian_mixture(sc).data, out);
  return 0;
}

// CLI11 reads config files at the top level only, so `--config` given after
// the subcommand is moved in front of it.
std::vector<std::string> hoist_config(int argc, char** argv) {
  std::vector<std::string> rest(argv + 1, argv + argc);
  std::vector<std::string> config;
  for (std::size_t i = 0; i < rest.size();) {
    if (rest[i] == "--config" && i + 1 < rest.size()) {
      config.insert(config.end(), {rest[i], rest[i + 1]});
      rest.erase(rest.begin() + static_cast<long>(i), rest.begin() + static_cast<long>(i) + 2);
    } else if (rest[i].rfind("--config=", 0) == 0) {
      config.push_back(rest[i]);
      rest.erase(rest.begin() + static_cast<long>(i));
    } else {
      ++i;
    }
  }
  std::vector<std::string> out{argv[0]};
  out.insert(out.end(), config.begin(), config.end());
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_mt("reconcile"));
  spdlog::set_pattern("[%l] %v");

  CLI::App app{"Multiplicity reduction for tabular model pools"};
  app.require_subcommand(1);
  std::string log_level = "warn";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off")->capture_default_str();
  app.set_config("--config", "", "Key-value file with a [run] or [audit] section mirroring the flags");

  ExperimentConfig config;
  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Train pools and evaluate every method over seeds");
  add_data_options(run_cmd, run.data);
  add_method_options(run_cmd, config);
  run_cmd->add_option("--methods", run.methods, "Comma-separated methods, or all")->capture_default_str();
  run_cmd->add_option("--seeds", run.seeds, "Number of seeds")->capture_default_str();
  run_cmd->add_option("--seed-base", run.seed_base, "First seed")->capture_default_str();
  run_cmd->add_option("--out", run.out, "Output directory");
  run_cmd->add_flag("--dump-neighborhoods", run.dump_neighborhoods, "Write patch neighborhoods per method");

  AuditOptions audit;
  auto* audit_cmd = app.add_subcommand("audit", "Evaluate externally produced prediction matrices");
  audit_cmd->add_option("--predictions", audit.predictions, "Test prediction matrix CSV")->required();
  audit_cmd->add_option("--labels", audit.labels, "Test labels CSV (column 'label')")->required();
  audit_cmd->add_option("--val-predictions", audit.val_predictions, "Validation prediction matrix CSV");
  audit_cmd->add_option("--prepared", audit.prepared, "Prepared dataset CSV with split column");
  audit_cmd->add_option("--methods", audit.methods, "Comma-separated methods, or all")->capture_default_str();
  audit_cmd->add_option("--seed", audit.seed, "Seed for random selection")->capture_default_str();
  audit_cmd->add_option("--out", audit.out, "Output directory");
  add_method_options(audit_cmd, config);

  std::string report_in;
  auto* report_cmd = app.add_subcommand("report", "Rebuild the delta report from metrics.csv");
  report_cmd->add_option("--in", report_in, "Run output directory")->required();

  DataOptions prepare_data;
  std::uint64_t prepare_seed = 0;
  std::string prepare_out;
  auto* prepare_cmd = app.add_subcommand("prepare", "Export a split, preprocessed dataset for external models");
  add_data_options(prepare_cmd, prepare_data);
  prepare_cmd->add_option("--seed", prepare_seed, "Split seed")->capture_default_str();
  prepare_cmd->add_option("--out", prepare_out, "Output CSV")->required();

  DataOptions synth_data;
  std::string synth_out;
  auto* synth_cmd = app.add_subcommand("synth", "Write the synthetic benchmark as CSV");
  synth_cmd->add_option("--samples", synth_data.synthetic_samples)->capture_default_str();
  synth_cmd->add_option("--noise", synth_data.synthetic_noise)->capture_default_str();
  synth_cmd->add_option("--seed", synth_data.synthetic_seed)->capture_default_str();
  synth_cmd->add_option("--out", synth_out, "Output CSV")->required();

  auto args = hoist_config(argc, argv);
  std::vector<char*> arg_ptrs;
  for (auto& a : args) arg_ptrs.push_back(a.data());
  CLI11_PARSE(app, static_cast<int>(arg_ptrs.size()), arg_ptrs.data());
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (*run_cmd) return cmd_run(run, config, "[run]\n" + run_cmd->config_to_str(true, false));
    if (*audit_cmd) return cmd_audit(audit, config);
    if (*report_cmd) return cmd_report(report_in);
    if (*prepare_cmd) return cmd_prepare(prepare_data, config, prepare_seed, prepare_out);
    if (*synth_cmd) return cmd_synth(synth_data, synth_out);
  } catch (const InvalidArgument& e) {
    spdlog::error("{}", e.what());
    return 2;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
