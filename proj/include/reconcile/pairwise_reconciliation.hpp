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
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "reconcile/prediction.hpp"

namespace reconcile {

struct PRConfig {
  double eps = 0.05;        // disagreement threshold for signed sets
  std::size_t batch = 10;   // pairs reconciled per iteration
  std::size_t alpha = 15;   // minimum region size (count)
  double lambda = 0.5;      // weight of the label term in the correction
  double delta = 1e-4;      // minimum Brier improvement on the region
  double eta = 1e-3;        // stop when the largest pairwise L1 drops below
  std::size_t t_max = 200;  // iteration cap

  void validate() const;
};

enum class Sign : std::uint8_t { kGreater, kLess };

std::string_view to_string(Sign sign);

struct SignedSets {
  std::vector<std::size_t> greater;  // f_m - f_j > eps
  std::vector<std::size_t> less;     // f_j - f_m > eps
};

SignedSets signed_sets(std::span<const double> preds_m, std::span<const double> preds_j, double eps);

struct Region {
  std::vector<std::size_t> indices;
  Sign sign = Sign::kGreater;
};

// The larger signed set; ties go to the `greater` set.
Region choose_region(const SignedSets& sets);

// Points where the pair disagrees with the given orientation.
std::vector<std::size_t> signed_region(std::span<const double> preds_m, std::span<const double> preds_j,
                                       double eps, Sign sign);

// Brier loss of `preds` restricted to `region`.
double region_brier(std::span<const double> preds, std::span<const double> labels,
                    std::span<const std::size_t> region);

// Which of (m, j) has the larger Brier loss on the region; ties return the
// smaller index.
std::size_t falsified(std::span<const double> preds_m, std::span<const double> preds_j,
                      std::span<const double> labels, std::span<const std::size_t> region, std::size_t m,
                      std::size_t j);

// Closed-form minimizer of
//   lambda * mean (f + z - y)^2 + (1 - lambda) * mean (f + z - c)^2
// over the region; inputs are already restricted to the region.
double zstar(std::span<const double> falsified_preds, std::span<const double> labels,
             std::span<const double> consensus, double lambda);

inline constexpr std::size_t kNoModel = std::numeric_limits<std::size_t>::max();

struct ReconciliationEvent {
  std::size_t iteration = 0;
  std::size_t first = 0;
  std::size_t second = 0;
  Sign sign = Sign::kGreater;
  std::size_t region_size = 0;
  std::size_t falsified_model = kNoModel;  // kNoModel when skipped
  double zstar = 0.0;
  bool skipped = false;  // region smaller than alpha
  bool accepted = false;
  double brier_before = 0.0;
  double brier_after = 0.0;
  std::size_t test_region_size = 0;
};

// Mutable validation and test predictions being reconciled.
struct ReconciliationState {
  PredictionMatrix val;
  PredictionMatrix test;
};

// Reconciles one pair against the frozen consensus. Test labels are never an
// input.
ReconciliationEvent reconcile_pair(ReconciliationState& state, const ConsensusVector& consensus,
                                   std::span<const double> val_labels, ModelPair pair, const PRConfig& config,
                                   std::size_t iteration = 0);

enum class StopReason : std::uint8_t { kConverged, kNoAcceptance, kIterationCap };

std::string_view to_string(StopReason reason);

struct ReconciliationResult {
  ReconciliationState state;
  std::vector<ReconciliationEvent> events;
  std::size_t iterations = 0;
  StopReason stop = StopReason::kIterationCap;
  // Checksum of the consensus at the start of every iteration.
  std::vector<std::uint64_t> consensus_checksums;
  std::vector<double> consensus;
};

ReconciliationResult run_pr(const PredictionMatrix& val_preds, const PredictionMatrix& test_preds,
                            std::span<const double> val_labels, const PRConfig& config);

// One row per event.
void write_reconciliation_events(const std::vector<ReconciliationEvent>& events, const std::string& path);

}  // namespace reconcile
