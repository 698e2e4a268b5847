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

#include "reconcile/pairwise_reconciliation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "reconcile/csv.hpp"

namespace reconcile {

void PRConfig::validate() const {
  if (!(eps > 0.0)) throw InvalidArgument("PRConfig: eps must be positive");
  if (batch == 0) throw InvalidArgument("PRConfig: batch must be at least 1");
  if (alpha == 0) throw InvalidArgument("PRConfig: alpha must be at least 1");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidArgument("PRConfig: lambda must lie in [0,1]");
  if (!(delta >= 0.0)) throw InvalidArgument("PRConfig: delta must be non-negative");
  if (!(eta > 0.0)) throw InvalidArgument("PRConfig: eta must be positive");
}

std::string_view to_string(Sign sign) { return sign == Sign::kGreater ? ">" : "<"; }

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::kConverged:
      return "converged";
    case StopReason::kNoAcceptance:
      return "no_acceptance";
    case StopReason::kIterationCap:
      return "iteration_cap";
  }
  return "unknown";
}

SignedSets signed_sets(std::span<const double> preds_m, std::span<const double> preds_j, double eps) {
  if (preds_m.size() != preds_j.size()) throw InvalidArgument("signed_sets: length mismatch");
  SignedSets sets;
  for (std::size_t i = 0; i < preds_m.size(); ++i) {
    if (preds_m[i] - preds_j[i] > eps) {
      sets.greater.push_back(i);
    } else if (preds_j[i] - preds_m[i] > eps) {
      sets.less.push_back(i);
    }
  }
  return sets;
}

Region choose_region(const SignedSets& sets) {
  if (sets.greater.size() >= sets.less.size()) return {sets.greater, Sign::kGreater};
  return {sets.less, Sign::kLess};
}

std::vector<std::size_t> signed_region(std::span<const double> preds_m, std::span<const double> preds_j,
                                       double eps, Sign sign) {
  auto sets = signed_sets(preds_m, preds_j, eps);
  return sign == Sign::kGreater ? std::move(sets.greater) : std::move(sets.less);
}

double region_brier(std::span<const double> preds, std::span<const double> labels,
                    std::span<const std::size_t> region) {
  if (region.empty()) throw InvalidArgument("region_brier: empty region");
  double sum = 0.0;
  for (std::size_t i : region) {
    const double e = preds[i] - labels[i];
    sum += e * e;
  }
  return sum / static_cast<double>(region.size());
}

std::size_t falsified(std::span<const double> preds_m, std::span<const double> preds_j,
                      std::span<const double> labels, std::span<const std::size_t> region, std::size_t m,
                      std::size_t j) {
  if (region.empty()) throw InvalidArgument("falsified: empty region");
  const double loss_m = region_brier(preds_m, labels, region);
  const double loss_j = region_brier(preds_j, labels, region);
  if (loss_m > loss_j) return m;
  if (loss_j > loss_m) return j;
  return std::min(m, j);
}

double zstar(std::span<const double> falsified_preds, std::span<const double> labels,
             std::span<const double> consensus, double lambda) {
  if (falsified_preds.empty()) throw InvalidArgument("zstar: empty region");
  if (labels.size() != falsified_preds.size() || consensus.size() != falsified_preds.size()) {
    throw InvalidArgument("zstar: length mismatch");
  }
  const double f_bar = mean_of(falsified_preds);
  const double y_bar = mean_of(labels);
  const double c_bar = mean_of(consensus);
  return lambda * (y_bar - f_bar) + (1.0 - lambda) * (c_bar - f_bar);
}

ReconciliationEvent reconcile_pair(ReconciliationState& state, const ConsensusVector& consensus,
                                   std::span<const double> val_labels, ModelPair pair, const PRConfig& config,
                                   std::size_t iteration) {
  if (!consensus.frozen()) throw InvalidArgument("reconcile_pair: consensus must be frozen");
  const auto [m, j] = pair;
  ReconciliationEvent event;
  event.iteration = iteration;
  event.first = m;
  event.second = j;

  const auto region = choose_region(signed_sets(state.val.row(m), state.val.row(j), config.eps));
  event.sign = region.sign;
  event.region_size = region.indices.size();
  if (region.indices.size() < config.alpha) {
    event.skipped = true;
    return event;
  }

  const std::size_t k = falsified(state.val.row(m), state.val.row(j), val_labels, region.indices, m, j);
  event.falsified_model = k;
  const auto current = state.val.row(k);
  std::vector<double> f_s;
  std::vector<double> y_s;
  std::vector<double> c_s;
  for (std::size_t i : region.indices) {
    f_s.push_back(current[i]);
    y_s.push_back(val_labels[i]);
    c_s.push_back(consensus[i]);
  }
  const double z = zstar(f_s, y_s, c_s, config.lambda);
  event.zstar = z;

  std::vector<double> corrected(f_s.size());
  double before = 0.0;
  double after = 0.0;
  for (std::size_t t = 0; t < f_s.size(); ++t) {
    corrected[t] = clip_unit(f_s[t] + z);
    before += (f_s[t] - y_s[t]) * (f_s[t] - y_s[t]);
    after += (corrected[t] - y_s[t]) * (corrected[t] - y_s[t]);
  }
  const auto n = static_cast<double>(f_s.size());
  event.brier_before = before / n;
  event.brier_after = after / n;
  if (!(event.brier_after < event.brier_before - config.delta)) return event;

  event.accepted = true;
  for (std::size_t t = 0; t < region.indices.size(); ++t) state.val.set(k, region.indices[t], corrected[t]);
  const auto test_region = signed_region(state.test.row(m), state.test.row(j), config.eps, region.sign);
  event.test_region_size = test_region.size();
  for (std::size_t i : test_region) state.test.set(k, i, clip_unit(state.test(k, i) + z));
  return event;
}

ReconciliationResult run_pr(const PredictionMatrix& val_preds, const PredictionMatrix& test_preds,
                            std::span<const double> val_labels, const PRConfig& config) {
  config.validate();
  if (val_preds.models() < 2) throw InvalidArgument("run_pr: need at least two models");
  if (val_preds.models() != test_preds.models()) throw InvalidArgument("run_pr: model count mismatch");
  if (val_labels.size() != val_preds.points()) throw InvalidArgument("run_pr: validation label count mismatch");

  ReconciliationResult result;
  result.state = {val_preds, test_preds};
  const ConsensusVector consensus = ensemble_mean(val_preds, /*freeze=*/true);
  result.consensus.assign(consensus.values().begin(), consensus.values().end());

  std::size_t t = 0;
  result.stop = StopReason::kIterationCap;
  while (t < config.t_max) {
    result.consensus_checksums.push_back(checksum(consensus.values()));
    const Matrix d = pairwise_l1(result.state.val);
    double largest = 0.0;
    for (double v : d.data()) largest = std::max(largest, v);
    if (largest < config.eta) {
      result.stop = StopReason::kConverged;
      break;
    }
    bool accepted = false;
    for (const auto& pair : top_b_pairs(d, config.batch)) {
      auto event = reconcile_pair(result.state, consensus, val_labels, pair, config, t);
      accepted = accepted || event.accepted;
      result.events.push_back(event);
    }
    if (!accepted) {
      result.stop = StopReason::kNoAcceptance;
      break;
    }
    ++t;
  }
  result.iterations = t;
  return result;
}

void write_reconciliation_events(const std::vector<ReconciliationEvent>& events, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << "iteration,model_m,model_j,sign,region_size,falsified,zstar,skipped,accepted,brier_before,brier_after,"
         "test_region_size\n";
  for (const auto& e : events) {
    out << e.iteration << ',' << e.first << ',' << e.second << ',' << to_string(e.sign) << ',' << e.region_size
        << ',';
    if (e.falsified_model != kNoModel) out << e.falsified_model;
    out << ',' << csv::format_real(e.zstar, 17) << ',' << (e.skipped ? 1 : 0) << ',' << (e.accepted ? 1 : 0)
        << ',' << csv::format_real(e.brier_before, 17) << ',' << csv::format_real(e.brier_after, 17) << ','
        << e.test_region_size << '\n';
  }
}

}  // namespace reconcile
