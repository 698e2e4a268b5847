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

#include "reconcile/outlier_correction.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "reconcile/csv.hpp"

namespace reconcile {

namespace {

void check_scores(const SplitScores& s, const char* what) {
  if (s.rows.size() != s.means.size() || s.rows.size() != s.labels.size()) {
    throw InvalidArgument(std::string("outlier flags: misaligned ") + what + " scores");
  }
  for (double m : s.means) {
    if (!(m >= 0.0 && m <= 1.0)) throw InvalidArgument("outlier flags: ensemble mean outside [0,1]");
  }
}

std::vector<FlaggedPoint> threshold_rule(const SplitScores& s, double tau_low, double tau_high) {
  std::vector<FlaggedPoint> out;
  for (std::size_t i = 0; i < s.rows.size(); ++i) {
    const bool positive_outlier = s.labels[i] == 1.0 && s.means[i] < tau_low;
    const bool negative_outlier = s.labels[i] == 0.0 && s.means[i] > tau_high;
    if (positive_outlier || negative_outlier) out.push_back({s.rows[i], s.means[i]});
  }
  return out;
}

std::vector<FlaggedPoint> rank_rule(const SplitScores& s, double rate) {
  const auto count = static_cast<std::size_t>(std::floor(rate * static_cast<double>(s.rows.size()) + 1e-9));
  std::vector<std::size_t> order(s.rows.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(s.labels[a] - s.means[a]) > std::abs(s.labels[b] - s.means[b]);
  });
  order.resize(std::min(count, order.size()));
  std::sort(order.begin(), order.end());
  std::vector<FlaggedPoint> out;
  for (std::size_t i : order) out.push_back({s.rows[i], s.means[i]});
  return out;
}

}  // namespace

void OutlierPolicy::validate() const {
  if (mode == OutlierMode::kThreshold) {
    if (!(tau_low >= 0.0 && tau_high <= 1.0 && tau_low < tau_high)) {
      throw InvalidArgument("OutlierPolicy: need 0 <= tau_low < tau_high <= 1");
    }
  } else if (!(rho_train >= 0.0 && rho_train <= 0.5 && rho_val >= 0.0 && rho_val <= 0.5)) {
    throw InvalidArgument("OutlierPolicy: rates must lie in [0, 0.5]");
  }
}

std::size_t OutlierReport::count(Split split) const {
  return static_cast<std::size_t>(
      std::count_if(changes.begin(), changes.end(), [&](const LabelChange& c) { return c.split == split; }));
}

OutlierFlags flag_threshold(const SplitScores& train, const SplitScores& val, const OutlierPolicy& policy) {
  check_scores(train, "train");
  check_scores(val, "val");
  return {threshold_rule(train, policy.tau_low, policy.tau_high),
          threshold_rule(val, policy.tau_low, policy.tau_high)};
}

OutlierFlags flag_rate(const SplitScores& train, const SplitScores& val, const OutlierPolicy& policy) {
  check_scores(train, "train");
  check_scores(val, "val");
  policy.validate();
  return {rank_rule(train, policy.rho_train), rank_rule(val, policy.rho_val)};
}

CorrectedData apply_corrections(const TabularDataset& data, const OutlierFlags& flags) {
  CorrectedData out{data, {}};
  auto check = [&](const FlaggedPoint& f, Split expected) {
    if (f.row >= data.size()) throw InvalidArgument("apply_corrections: flagged row out of range");
    if (data.split[f.row] == Split::kTest) {
      throw InvalidArgument("apply_corrections: test labels must never be modified");
    }
    if (data.split[f.row] != expected) throw InvalidArgument("apply_corrections: flag in the wrong split");
  };
  for (const auto& f : flags.train) {
    check(f, Split::kTrain);
    const double old = out.data.labels[f.row];
    out.data.labels[f.row] = 1.0 - old;
    out.report.changes.push_back({Split::kTrain, f.row, old, out.data.labels[f.row], f.mean});
  }
  for (const auto& f : flags.val) {
    check(f, Split::kVal);
    const double old = out.data.labels[f.row];
    out.data.labels[f.row] = f.mean;
    out.report.changes.push_back({Split::kVal, f.row, old, f.mean, f.mean});
  }
  return out;
}

OutlierResult run_oc(const RashomonPool& pool, const TabularDataset& data, const OutlierPolicy& policy) {
  policy.validate();
  if (pool.size() == 0) throw InvalidArgument("run_oc: empty pool");

  const auto train_rows = data.indices(Split::kTrain);
  const auto val_rows = data.indices(Split::kVal);
  const auto train_labels = data.labels_of(Split::kTrain);
  const auto val_labels = data.labels_of(Split::kVal);
  const auto val_consensus = ensemble_mean(pool.val_preds);
  const std::vector<double> val_means(val_consensus.values().begin(), val_consensus.values().end());

  // Light correction never touches training labels, so training predictions
  // are only needed for the full variant.
  std::vector<double> train_means;
  std::vector<std::size_t> scored_train_rows;
  if (policy.retrain) {
    const auto consensus = ensemble_mean(predict_split(pool, data, Split::kTrain));
    train_means.assign(consensus.values().begin(), consensus.values().end());
    scored_train_rows = train_rows;
  } else if (policy.mode == OutlierMode::kRate && policy.rho_train > 0.0) {
    spdlog::warn("light outlier correction ignores rho_train = {}", policy.rho_train);
  }
  const std::vector<double> no_labels;
  const SplitScores train{scored_train_rows, train_means,
                          policy.retrain ? std::span<const double>(train_labels) : std::span<const double>(no_labels)};
  const SplitScores val{val_rows, val_means, val_labels};

  const OutlierFlags flags =
      policy.mode == OutlierMode::kRate ? flag_rate(train, val, policy) : flag_threshold(train, val, policy);
  if (flags.empty()) return {pool, data, {}};

  auto corrected = apply_corrections(data, flags);
  if (!policy.retrain) return {pool, std::move(corrected.data), std::move(corrected.report)};
  RashomonPool refit = retrain(pool, corrected.data);
  corrected.report.retrained = true;
  return {std::move(refit), std::move(corrected.data), std::move(corrected.report)};
}

void write_outlier_report(const OutlierReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << "split,index,old_label,new_label,ensemble_mean\n";
  for (const auto& c : report.changes) {
    out << to_string(c.split) << ',' << c.row << ',' << csv::format_real(c.old_label, 17) << ','
        << csv::format_real(c.new_label, 17) << ',' << csv::format_real(c.mean, 17) << '\n';
  }
}

}  // namespace reconcile
