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

#include "reconcile/baselines.hpp"

namespace reconcile {

std::vector<double> soft_voting(const PredictionMatrix& preds) {
  const auto consensus = ensemble_mean(preds);
  return {consensus.values().begin(), consensus.values().end()};
}

std::vector<double> majority_voting(const PredictionMatrix& preds) {
  if (preds.models() == 0) throw InvalidArgument("majority_voting: empty prediction matrix");
  std::vector<double> out(preds.points(), 0.0);
  for (std::size_t m = 0; m < preds.models(); ++m) {
    const auto row = preds.row(m);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += row[i] >= 0.5 ? 1.0 : 0.0;
  }
  for (double& v : out) v /= static_cast<double>(preds.models());
  return out;
}

std::size_t best_single(std::span<const double> val_accuracy, std::span<const double> val_brier) {
  if (val_accuracy.empty()) throw InvalidArgument("best_single: empty pool");
  if (val_accuracy.size() != val_brier.size()) throw InvalidArgument("best_single: length mismatch");
  std::size_t best = 0;
  for (std::size_t m = 1; m < val_accuracy.size(); ++m) {
    if (val_accuracy[m] > val_accuracy[best] ||
        (val_accuracy[m] == val_accuracy[best] && val_brier[m] < val_brier[best])) {
      best = m;
    }
  }
  return best;
}

std::size_t best_single(const RashomonPool& pool) { return best_single(pool.val_accuracy, pool.val_brier); }

std::vector<double> random_selection(const PredictionMatrix& preds, std::uint64_t seed) {
  if (preds.models() == 0) throw InvalidArgument("random_selection: empty prediction matrix");
  Rng rng(seed);
  std::vector<double> out(preds.points());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = preds(rng.uniform_index(preds.models()), i);
  return out;
}

}  // namespace reconcile
