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

#include "reconcile/harness.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <array>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include "reconcile/baselines.hpp"
#include "reconcile/csv.hpp"

namespace reconcile {

namespace {

struct MethodInfo {
  Method method;
  std::string_view name;
  bool oc;
  bool pr;
  bool lp;
};

constexpr std::array<MethodInfo, 11> kMethods{{
    {Method::kSoftVoting, "soft_voting", false, false, false},
    {Method::kMajorityVoting, "majority_voting", false, false, false},
    {Method::kBestSingle, "best_single", false, false, false},
    {Method::kRandomSelection, "random_selection", false, false, false},
    {Method::kOC, "OC", true, false, false},
    {Method::kLP, "LP", false, false, true},
    {Method::kPR, "PR", false, true, false},
    {Method::kOCLP, "OC+LP", true, false, true},
    {Method::kOCPR, "OC+PR", true, true, false},
    {Method::kPRLP, "PR+LP", false, true, true},
    {Method::kOCPRLP, "OC+PR+LP", true, true, true},
}};

const MethodInfo& info(Method method) { return kMethods[static_cast<std::size_t>(method)]; }

constexpr std::uint64_t kRandomSelectionSalt = 0x52414e44;

std::string trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t");
  return std::string(text.substr(first, last - first + 1));
}

}  // namespace

std::string_view to_string(Method method) { return info(method).name; }

Method parse_method(std::string_view name) {
  for (const auto& m : kMethods) {
    if (m.name == name) return m.method;
  }
  throw InvalidArgument(fmt::format("unknown method '{}'", name));
}

std::vector<Method> parse_methods(std::string_view list) {
  std::vector<Method> out;
  std::size_t start = 0;
  while (start <= list.size()) {
    const auto end = std::min(list.find(',', start), list.size());
    const auto name = trim(list.substr(start, end - start));
    start = end + 1;
    if (name.empty()) continue;
    if (name == "all") {
      for (Method m : all_methods()) {
        if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
      }
      continue;
    }
    const Method m = parse_method(name);
    if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
  }
  if (out.empty()) throw InvalidArgument("no methods given");
  return out;
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> methods = [] {
    std::vector<Method> v;
    for (const auto& m : kMethods) v.push_back(m.method);
    return v;
  }();
  return methods;
}

bool is_baseline(Method method) {
  const auto& m = info(method);
  return !m.oc && !m.pr && !m.lp;
}
bool uses_oc(Method method) { return info(method).oc; }
bool uses_pr(Method method) { return info(method).pr; }
bool uses_lp(Method method) { return info(method).lp; }

void ExperimentConfig::validate() const {
  if (pool_size < 2) throw InvalidArgument("pool size must be at least 2");
  if (grid.empty()) throw InvalidArgument("learner grid is empty");
  if (!(disagreement_eps > 0.0)) throw InvalidArgument("disagreement eps must be positive");
  if (lcae_k == 0) throw InvalidArgument("LCAE neighbor count must be positive");
  if (methods.empty()) throw InvalidArgument("no methods selected");
  oc.validate();
  lp.validate();
  pr.validate();
}

namespace {

MetricsReport measure(const PredictionMatrix& test_preds, std::span<const double> ensemble,
                      std::span<const double> test_labels, const std::vector<Neighborhood>& lcae_neighborhoods,
                      std::span<const double> val_labels, double eps) {
  MetricsReport r;
  r.accuracy = accuracy(ensemble, test_labels);
  r.brier = brier_loss(ensemble, test_labels);
  r.variance = variance_metric(test_preds);
  r.ambiguity = ambiguity_metric(test_preds);
  r.discrepancy = discrepancy_metric(test_preds);
  r.disagreement_rate = disagreement_rate(test_preds, eps);
  r.lcae = lcae(ensemble, lcae_neighborhoods, val_labels);
  return r;
}

MethodOutcome run_one(Method method, const RashomonPool& pool, const TabularDataset& data,
                      const NeighborhoodIndex& val_index, const Matrix& test_features, const ExperimentConfig& config,
                      std::uint64_t seed) {
  MethodOutcome out;
  out.method = method;
  const auto val_labels = data.labels_of(Split::kVal);
  PredictionMatrix val = pool.val_preds;
  PredictionMatrix test = pool.test_preds;

  switch (method) {
    case Method::kSoftVoting:
      out.ensemble = soft_voting(test);
      break;
    case Method::kMajorityVoting:
      out.ensemble = majority_voting(test);
      break;
    case Method::kBestSingle: {
      const auto row = test.row(best_single(pool));
      out.ensemble.assign(row.begin(), row.end());
      break;
    }
    case Method::kRandomSelection:
      out.ensemble = random_selection(test, derive_seed(seed, kRandomSelectionSalt));
      break;
    default:
      if (uses_pr(method)) {
        PRTrace trace{val, test, val_labels, run_pr(val, test, val_labels, config.pr)};
        val = trace.result.state.val;
        test = trace.result.state.test;
        spdlog::debug("{}: PR stopped after {} iterations ({})", to_string(method), trace.result.iterations,
                      to_string(trace.result.stop));
        out.pr = std::move(trace);
      }
      if (uses_lp(method)) {
        LPTrace trace{val, test, val_labels, patch_all(val, test, val_labels, val_index, test_features, config.lp)};
        test = trace.result.test_preds;
        out.lp = std::move(trace);
      }
      out.ensemble = soft_voting(test);
      break;
  }
  out.test_preds = std::move(test);
  return out;
}

template <typename Fn>
auto annotated(Method method, Fn&& fn) {
  try {
    return fn();
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(fmt::format("{}: {}", to_string(method), e.what()));
  } catch (const DataError& e) {
    throw DataError(fmt::format("{}: {}", to_string(method), e.what()));
  }
}

}  // namespace

SeedResult run_methods(const RashomonPool& pool, const TabularDataset& data, const ExperimentConfig& config,
                       std::uint64_t seed) {
  config.validate();
  if (pool.size() < 2) throw InvalidArgument("run_methods: pool needs at least two models");
  if (pool.members.size() != pool.size() && config.oc.retrain &&
      std::any_of(config.methods.begin(), config.methods.end(), uses_oc)) {
    throw InvalidArgument("run_methods: outlier correction with retraining needs trained models");
  }

  SeedResult result;
  result.seed = seed;
  result.pool = pool;
  result.val_labels = data.labels_of(Split::kVal);

  const NeighborhoodIndex val_index(data.features_of(Split::kVal));
  const Matrix test_features = data.features_of(Split::kTest);
  if (val_index.size() < config.lcae_k) {
    spdlog::warn("LCAE uses all {} validation points (fewer than k = {})", val_index.size(), config.lcae_k);
  }
  std::vector<Neighborhood> lcae_neighborhoods;
  lcae_neighborhoods.reserve(test_features.rows());
  for (std::size_t i = 0; i < test_features.rows(); ++i) {
    lcae_neighborhoods.push_back(val_index.query(test_features.row(i), config.lcae_k));
  }

  // OC runs once per seed and is shared by every method that uses it.
  std::optional<OutlierResult> oc;
  if (std::any_of(config.methods.begin(), config.methods.end(), uses_oc)) {
    oc = run_oc(pool, data, config.oc);
    spdlog::debug("seed {}: OC changed {} train and {} validation labels", seed, oc->report.count(Split::kTrain),
                  oc->report.count(Split::kVal));
    result.oc = oc->report;
  }

  std::vector<MethodOutcome> outcomes;
  for (Method method : config.methods) {
    const bool corrected = uses_oc(method);
    const RashomonPool& p = corrected ? oc->pool : pool;
    const TabularDataset& d = corrected ? oc->data : data;
    outcomes.push_back(
        annotated(method, [&] { return run_one(method, p, d, val_index, test_features, config, seed); }));
  }

  // Test labels enter only here.
  result.test_labels = data.labels_of(Split::kTest);
  for (auto& o : outcomes) {
    o.metrics = annotated(o.method, [&] {
      return measure(o.test_preds, o.ensemble, result.test_labels, lcae_neighborhoods, result.val_labels,
                     config.disagreement_eps);
    });
  }
  result.outcomes = std::move(outcomes);
  return result;
}

SeedResult run_seed(const TabularDataset& raw, const ExperimentConfig& config, std::uint64_t seed) {
  config.validate();
  const auto split = stratified_split(raw, config.ratios, seed);
  PreprocessSpec spec;
  spec.categorical_columns = config.categorical_columns;
  spec.standardize = config.standardize;
  spec.drop_first = config.drop_first;
  const auto data = fit_apply_preprocess(split, spec);
  const auto candidates = train_candidates(data, config.grid, seed);
  const auto pool = select_rashomon(candidates, data, config.pool_size);
  return run_methods(pool, data, config, seed);
}

std::size_t worker_count() {
  const char* env = std::getenv("RECONCILE_WORKERS");
  if (env == nullptr || *env == '\0') return 1;
  char* end = nullptr;
  const long value = std::strtol(env, &end, 10);
  if (*end != '\0' || value < 1) {
    spdlog::warn("ignoring invalid RECONCILE_WORKERS='{}'", env);
    return 1;
  }
  return static_cast<std::size_t>(value);
}

std::vector<SeedResult> run_seeds(const TabularDataset& raw, const ExperimentConfig& config,
                                  const std::vector<std::uint64_t>& seeds) {
  config.validate();
  std::vector<SeedResult> results(seeds.size());
  const std::size_t workers = std::min(worker_count(), std::max<std::size_t>(seeds.size(), 1));
  if (workers <= 1) {
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      spdlog::info("seed {} ({}/{})", seeds[s], s + 1, seeds.size());
      results[s] = run_seed(raw, config, seeds[s]);
    }
    return results;
  }

  std::mutex mutex;
  std::size_t next = 0;
  std::exception_ptr failure;
  auto work = [&] {
    for (;;) {
      std::size_t s = 0;
      {
        std::lock_guard lock(mutex);
        if (next >= seeds.size() || failure) return;
        s = next++;
      }
      try {
        auto r = run_seed(raw, config, seeds[s]);
        results[s] = std::move(r);
      } catch (...) {
        std::lock_guard lock(mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> threads;
  for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(work);
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
  return results;
}

std::vector<RunRow> to_rows(const std::vector<SeedResult>& results, const std::string& dataset) {
  std::vector<RunRow> rows;
  for (const auto& r : results) {
    for (const auto& o : r.outcomes) rows.push_back({dataset, r.seed, std::string(to_string(o.method)), o.metrics, {}});
  }
  return rows;
}

namespace {

std::string method_dir(std::string_view name) {
  std::string out(name);
  std::replace(out.begin(), out.end(), '+', '_');
  return out;
}

}  // namespace

void write_event_logs(const std::vector<SeedResult>& results, const std::string& out_dir,
                      std::vector<RunRow>& rows) {
  namespace fs = std::filesystem;
  std::size_t row = 0;
  for (const auto& r : results) {
    const fs::path seed_dir = fs::path(out_dir) / fmt::format("seed_{}", r.seed);
    fs::create_directories(seed_dir);
    write_pool_manifest(r.pool, (seed_dir / "pool.csv").string());
    if (r.oc) write_outlier_report(*r.oc, (seed_dir / "outliers.csv").string());
    for (const auto& o : r.outcomes) {
      const fs::path rel = fs::path(fmt::format("seed_{}", r.seed)) / method_dir(to_string(o.method));
      const fs::path dir = fs::path(out_dir) / rel;
      fs::create_directories(dir);
      if (o.pr) write_reconciliation_events(o.pr->result.events, (dir / "reconciliation_events.csv").string());
      if (o.lp) write_patch_events(o.lp->result.events, (dir / "patch_events.csv").string());
      if (uses_oc(o.method) && r.oc) write_outlier_report(*r.oc, (dir / "outliers.csv").string());
      if (row < rows.size()) rows[row].events = rel.generic_string();
      ++row;
    }
  }
}

namespace {

constexpr std::array<std::string_view, 7> kMetricNames{"accuracy",    "brier",       "lcae",     "variance",
                                                       "ambiguity",   "discrepancy", "disagreement_rate"};

std::array<double, 7> metric_values(const MetricsReport& m) {
  return {m.accuracy, m.brier, m.lcae, m.variance, m.ambiguity, m.discrepancy, m.disagreement_rate};
}

MetricsReport from_values(const std::array<double, 7>& v) {
  MetricsReport m;
  m.accuracy = v[0];
  m.brier = v[1];
  m.lcae = v[2];
  m.variance = v[3];
  m.ambiguity = v[4];
  m.discrepancy = v[5];
  m.disagreement_rate = v[6];
  return m;
}

}  // namespace

void write_metrics_csv(const std::vector<RunRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << "dataset,seed,method";
  for (auto name : kMetricNames) out << ',' << name;
  out << ",events\n";
  for (const auto& r : rows) {
    out << csv::escape(r.dataset) << ',' << r.seed << ',' << csv::escape(r.method);
    for (double v : metric_values(r.metrics)) out << ',' << csv::format_real(v, 17);
    out << ',' << csv::escape(r.events) << '\n';
  }
}

std::vector<RunRow> read_metrics_csv(const std::string& path) {
  const auto table = csv::read_file(path);
  auto column = [&](std::string_view name) {
    const long index = table.column_index(name);
    if (index < 0) throw DataError(fmt::format("{}: missing column '{}'", path, name));
    return static_cast<std::size_t>(index);
  };
  const auto c_dataset = column("dataset");
  const auto c_seed = column("seed");
  const auto c_method = column("method");
  std::array<std::size_t, 7> c_metrics{};
  for (std::size_t k = 0; k < kMetricNames.size(); ++k) c_metrics[k] = column(kMetricNames[k]);
  const long c_events = table.column_index("events");

  std::vector<RunRow> rows;
  for (const auto& fields : table.rows) {
    RunRow r;
    r.dataset = fields[c_dataset];
    try {
      r.seed = std::stoull(fields[c_seed]);
      std::array<double, 7> values{};
      for (std::size_t k = 0; k < values.size(); ++k) values[k] = std::stod(fields[c_metrics[k]]);
      r.metrics = from_values(values);
    } catch (const std::exception&) {
      throw DataError(fmt::format("{}: malformed row", path));
    }
    r.method = fields[c_method];
    if (c_events >= 0) r.events = fields[static_cast<std::size_t>(c_events)];
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace reconcile
