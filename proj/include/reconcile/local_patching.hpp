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

#include "reconcile/neighborhoods.hpp"
#include "reconcile/prediction.hpp"

namespace reconcile {

struct PatchConfig {
  std::size_t k = 5;
  // 0 selects 5 * k.
  std::size_t k_max = 0;
  double tau_bias = 0.6;

  std::size_t effective_k_max() const { return k_max == 0 ? 5 * k : k_max; }
  void validate() const;
};

// A nonzero patch proposed for one model at one test point.
struct PatchEvent {
  std::size_t test_index = 0;
  std::size_t model = 0;
  double delta = 0.0;
  bool accepted = false;
  double brier_before = 0.0;
  double brier_after = 0.0;
};

// y_j - f_m(x_j) for each neighbor j.
std::vector<double> residuals(std::span<const double> model_val_preds, std::span<const double> val_labels,
                              const Neighborhood& nb);

// Mean of the positive residuals when their share exceeds tau_bias, mean of
// the negative residuals when theirs does, else 0. Zero residuals count in
// the denominator only.
double compute_patch(std::span<const double> residuals, double tau_bias);

struct PatchCheck {
  bool accepted = true;
  double brier_before = 0.0;
  double brier_after = 0.0;
};

// Neighborhood Brier loss before and after shifting each neighbor
// prediction by `delta` (clipped). Rejected iff after > before.
PatchCheck verify_patch(std::span<const double> model_val_preds, std::span<const double> val_labels,
                        const Neighborhood& nb, double delta);

struct PointPatch {
  std::vector<double> patched;
  std::vector<PatchEvent> events;
};

// Patches the M model predictions at one test point independently.
PointPatch patch_point(std::span<const double> preds_at_point, const PredictionMatrix& val_preds,
                       std::span<const double> val_labels, const Neighborhood& nb,
                       const PatchConfig& config, std::size_t test_index = 0);

struct PatchResult {
  PredictionMatrix test_preds;
  std::vector<PatchEvent> events;
  std::vector<Neighborhood> neighborhoods;  // radius-filtered, one per test point
};

// Patches every test point. The validation matrix is read, never written.
PatchResult patch_all(const PredictionMatrix& val_preds, const PredictionMatrix& test_preds,
                      std::span<const double> val_labels, const NeighborhoodIndex& index,
                      const Matrix& test_features, const PatchConfig& config);

// test_index,model,delta,accepted,brier_before,brier_after
void write_patch_events(const std::vector<PatchEvent>& events, const std::string& path);

}  // namespace reconcile
