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
#include <vector>

#include "reconcile/neighborhoods.hpp"
#include "reconcile/prediction.hpp"

namespace reconcile {

struct MetricsReport {
  double accuracy = 0.0;
  double brier = 0.0;
  double variance = 0.0;
  double ambiguity = 0.0;
  double discrepancy = 0.0;
  double disagreement_rate = 0.0;
  double lcae = 0.0;
};

inline constexpr double kDefaultDisagreementEps = 0.05;
inline constexpr std::size_t kLcaeNeighbors = 30;

// Mean squared difference between predictions and (possibly soft) labels.
double brier_loss(std::span<const double> preds, std::span<const double> labels);

// Fraction of points where (p >= 0.5) matches (y >= 0.5).
double accuracy(std::span<const double> preds, std::span<const double> labels);

// Mean over points of the population variance across models.
double variance_metric(const PredictionMatrix& preds);

// Mean over points of max_m f_m - min_m f_m.
double ambiguity_metric(const PredictionMatrix& preds);

// Largest mean absolute difference over model pairs.
double discrepancy_metric(const PredictionMatrix& preds);

// Mean over model pairs of the fraction of points with |f_m - f_j| > eps.
double disagreement_rate(const PredictionMatrix& preds, double eps = kDefaultDisagreementEps);

// Mean over test points of the mean |prediction - y_j| over the point's k
// nearest validation neighbors. Uses every validation point (with a
// warning) when fewer than k exist.
double lcae(std::span<const double> ensemble_pred, const NeighborhoodIndex& index,
            const Matrix& test_features, std::span<const double> val_labels,
            std::size_t k = kLcaeNeighbors);

// Same, with neighborhoods computed once by the caller.
double lcae(std::span<const double> ensemble_pred, const std::vector<Neighborhood>& neighborhoods,
            std::span<const double> val_labels);

}  // namespace reconcile
