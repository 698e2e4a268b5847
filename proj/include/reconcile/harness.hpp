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

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "reconcile/learners.hpp"
#include "reconcile/local_patching.hpp"
#include "reconcile/metrics.hpp"
#include "reconcile/model_pool.hpp"
#include "reconcile/outlier_correction.hpp"
#include "reconcile/pairwise_reconciliation.hpp"
#include "reconcile/tabular_data.hpp"

namespace reconcile {

enum class Method : std::uint8_t {
  kSoftVoting,
  kMajorityVoting,
  kBestSingle,
  kRandomSelection,
  kOC,
  kLP,
  kPR,
  kOCLP,
  kOCPR,
  kPRLP,
  kOCPRLP,
};

std::string_view to_string(Method method);
Method parse_method(std::string_view name);
// Comma-separated method names; "all" expands to every method.
std::vector<Method> parse_methods(std::string_view list);
const std::vector<Method>& all_methods();

bool is_baseline(Method method);
bool uses_oc(Method method);
bool uses_pr(Method method);
bool uses_lp(Method method);

struct ExperimentConfig {
  SplitRatios ratios;
  std::set<std::string> categorical_columns;
  bool standardize = true;
  bool drop_first = false;
  std::size_t pool_size = 25;
  std::vector<LearnerSpec> grid = default_grid();
  OutlierPolicy oc;
  PatchConfig lp;
  PRConfig pr;
  double disagreement_eps = kDefaultDisagreementEps;
  std::size_t lcae_k = kLcaeNeighbors;
  std::vector<Method> methods = all_methods();

  void validate() const;
};

// Inputs and outputs of one reconciliation run, kept for replay.
struct PRTrace {
  PredictionMatrix val_in;
  PredictionMatrix test_in;
  std::vector<double> val_labels;
  ReconciliationResult result;
};

// Inputs and outputs of one patching run, kept for replay.
struct LPTrace {
  PredictionMatrix val_preds;
  PredictionMatrix test_in;
  std::vector<double> val_labels;
  PatchResult result;
};

struct MethodOutcome {
  Method method = Method::kSoftVoting;
  MetricsReport metrics;
  PredictionMatrix test_preds;    // final matrix the metrics were computed on
  std::vector<double> ensemble;   // final per-point prediction
  std::optional<PRTrace> pr;
  std::optional<LPTrace> lp;
};

struct SeedResult {
  std::uint64_t seed = 0;
  std::vector<MethodOutcome> outcomes;  // in config.methods order
  RashomonPool pool;
  std::optional<OutlierReport> oc;
  std::vector<double> val_labels;  // uncorrected
  std::vector<double> test_labels;
};

// Runs every configured method on a pool that has already been selected for
// a split, preprocessed dataset. Pools without trained members (external
// predictions) require light outlier correction.
SeedResult run_methods(const RashomonPool& pool, const TabularDataset& data, const ExperimentConfig& config,
                       std::uint64_t seed);

// Split, preprocess, train, select, then run_methods.
SeedResult run_seed(const TabularDataset& raw, const ExperimentConfig& config, std::uint64_t seed);

// Runs the given seeds, in parallel when RECONCILE_WORKERS > 1. Results are
// in seed order regardless of the worker count.
std::vector<SeedResult> run_seeds(const TabularDataset& raw, const ExperimentConfig& config,
                                  const std::vector<std::uint64_t>& seeds);

// Worker count from RECONCILE_WORKERS (default 1).
std::size_t worker_count();

// One metrics.csv row.
struct RunRow {
  std::string dataset;
  std::uint64_t seed = 0;
  std::string method;
  MetricsReport metrics;
  std::string events;  // event log directory, relative to the output root
};

std::vector<RunRow> to_rows(const std::vector<SeedResult>& results, const std::string& dataset);

// Writes per-seed, per-method event logs under `out_dir`, and fills in the
// event paths of `rows`.
void write_event_logs(const std::vector<SeedResult>& results, const std::string& out_dir,
                      std::vector<RunRow>& rows);

void write_metrics_csv(const std::vector<RunRow>& rows, const std::string& path);
std::vector<RunRow> read_metrics_csv(const std::string& path);

}  // namespace reconcile
