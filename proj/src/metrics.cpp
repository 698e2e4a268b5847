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

#include "reconcile/metrics.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>

namespace reconcile {

namespace {

void require_pairs(const PredictionMatrix& preds, const char* what) {
  if (preds.models() < 2) throw InvalidArgument(std::string(what) + ": need at least two models");
  if (preds.points() == 0) throw InvalidArgument(std::string(what) + ": no points");
}

}  // namespace

double brier_loss(std::span<const double> preds, std::span<const double> labels) {
  if (preds.empty()) throw InvalidArgument("brier_loss: empty index set");
  if (preds.size() != labels.size()) throw InvalidArgument("brier_loss: length mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const double e = preds[i] - labels[i];
    sum += e * e;
  }
  return sum / static_cast<double>(preds.size());
}

double accuracy(std::span<const double> preds, std::span<const double> labels) {
  if (preds.empty()) throw InvalidArgument("accuracy: empty input");
  if (preds.size() != labels.size()) throw InvalidArgument("accuracy: length mismatch");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    correct += (preds[i] >= 0.5) == (labels[i] >= 0.5) ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(preds.size());
}

double variance_metric(const PredictionMatrix& preds) {
  require_pairs(preds, "variance_metric");
  const auto M = static_cast<double>(preds.models());
  double total = 0.0;
  for (std::size_t i = 0; i < preds.points(); ++i) {
    double mean = 0.0;
    for (std::size_t m = 0; m < preds.models(); ++m) mean += preds(m, i);
    mean /= M;
    double ss = 0.0;
    for (std::size_t m = 0; m < preds.models(); ++m) ss += (preds(m, i) - mean) * (preds(m, i) - mean);
    total += ss / M;
  }
  return total / static_cast<double>(preds.points());
}

double ambiguity_metric(const PredictionMatrix& preds) {
  require_pairs(preds, "ambiguity_metric");
  double total = 0.0;
  for (std::size_t i = 0; i < preds.points(); ++i) {
    double lo = preds(0, i);
    double hi = lo;
    for (std::size_t m = 1; m < preds.models(); ++m) {
      lo = std::min(lo, preds(m, i));
      hi = std::max(hi, preds(m, i));
    }
    total += hi - lo;
  }
  return total / static_cast<double>(preds.points());
}

double discrepancy_metric(const PredictionMatrix& preds) {
  require_pairs(preds, "discrepancy_metric");
  const Matrix d = pairwise_l1(preds);
  double best = 0.0;
  for (double v : d.data()) best = std::max(best, v);
  return best;
}

double disagreement_rate(const PredictionMatrix& preds, double eps) {
  require_pairs(preds, "disagreement_rate");
  const std::size_t M = preds.models();
  double total = 0.0;
  for (std::size_t m = 0; m < M; ++m) {
    const auto a = preds.row(m);
    for (std::size_t j = m + 1; j < M; ++j) {
      const auto b = preds.row(j);
      std::size_t count = 0;
      for (std::size_t i = 0; i < a.size(); ++i) count += std::abs(a[i] - b[i]) > eps ? 1 : 0;
      total += static_cast<double>(count) / static_cast<double>(a.size());
    }
  }
  return total / static_cast<double>(M * (M - 1) / 2);
}

double lcae(std::span<const double> ensemble_pred, const std::vector<Neighborhood>& neighborhoods,
            std::span<const double> val_labels) {
  if (ensemble_pred.empty()) throw InvalidArgument("lcae: no test points");
  if (neighborhoods.size() != ensemble_pred.size()) throw InvalidArgument("lcae: neighborhood count mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < ensemble_pred.size(); ++i) {
    const auto& nb = neighborhoods[i];
    if (nb.empty()) throw InvalidArgument("lcae: empty neighborhood");
    double sum = 0.0;
    for (std::size_t j : nb.indices) sum += std::abs(ensemble_pred[i] - val_labels[j]);
    total += sum / static_cast<double>(nb.size());
  }
  return total / static_cast<double>(ensemble_pred.size());
}

double lcae(std::span<const double> ensemble_pred, const NeighborhoodIndex& index,
            const Matrix& test_features, std::span<const double> val_labels, std::size_t k) {
  if (test_features.rows() != ensemble_pred.size()) throw InvalidArgument("lcae: test feature rows mismatch");
  if (val_labels.size() != index.size()) throw InvalidArgument("lcae: validation label count mismatch");
  if (index.size() < k) {
    spdlog::warn("lcae: only {} validation points for k = {}; using all of them", index.size(), k);
  }
  std::vector<Neighborhood> neighborhoods;
  neighborhoods.reserve(test_features.rows());
  for (std::size_t i = 0; i < test_features.rows(); ++i) {
    neighborhoods.push_back(index.query(test_features.row(i), k));
  }
  return lcae(ensemble_pred, neighborhoods, val_labels);
}

}  // namespace reconcile
