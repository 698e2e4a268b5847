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

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "reconcile/model_pool.hpp"
#include "reconcile/tabular_data.hpp"

namespace reconcile {

enum class OutlierMode { kThreshold, kRate };

struct OutlierPolicy {
  OutlierMode mode = OutlierMode::kRate;
  // Threshold mode: a positive with mean < tau_low or a negative with
  // mean > tau_high is an outlier.
  double tau_low = 0.1;
  double tau_high = 0.9;
  // Rate mode: fraction of each split flagged, ranked by |y - mean|.
  double rho_train = 0.02;
  double rho_val = 0.01;
  // Full correction flips training outliers and refits the pool; light
  // correction only softens validation labels.
  bool retrain = true;

  void validate() const;
};

// A flagged point: row index into the dataset and its ensemble mean.
struct FlaggedPoint {
  std::size_t row;
  double mean;
};

struct OutlierFlags {
  std::vector<FlaggedPoint> train;
  std::vector<FlaggedPoint> val;
  bool empty() const { return train.empty() && val.empty(); }
};

// Aligned view of one split: dataset rows, ensemble means and labels.
struct SplitScores {
  std::span<const std::size_t> rows;
  std::span<const double> means;
  std::span<const double> labels;
};

OutlierFlags flag_threshold(const SplitScores& train, const SplitScores& val, const OutlierPolicy& policy);

// Top floor(rho * n) points of each split by |y - mean|; ties keep the
// earlier point.
OutlierFlags flag_rate(const SplitScores& train, const SplitScores& val, const OutlierPolicy& policy);

struct LabelChange {
  Split split;
  std::size_t row;
  double old_label;
  double new_label;
  double mean;
};

struct OutlierReport {
  std::vector<LabelChange> changes;
  bool retrained = false;

  std::size_t count(Split split) const;
};

struct CorrectedData {
  TabularDataset data;
  OutlierReport report;
};

// Flips flagged training labels and replaces flagged validation labels by
// the ensemble mean. A flag pointing at a test row, or at a row of another
// split, throws InvalidArgument.
CorrectedData apply_corrections(const TabularDataset& data, const OutlierFlags& flags);

struct OutlierResult {
  RashomonPool pool;
  TabularDataset data;
  OutlierReport report;
};

OutlierResult run_oc(const RashomonPool& pool, const TabularDataset& data, const OutlierPolicy& policy);

// split,index,old_label,new_label,ensemble_mean
void write_outlier_report(const OutlierReport& report, const std::string& path);

}  // namespace reconcile
