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
#include <memory>
#include <string>
#include <vector>

#include "reconcile/learners.hpp"
#include "reconcile/prediction.hpp"
#include "reconcile/tabular_data.hpp"

namespace reconcile {

// A trained candidate with its stable identifier.
struct Candidate {
  std::string id;
  std::shared_ptr<const Predictor> model;
};

// The default candidate grid: logistic regression, CART trees, bagged trees,
// boosted stumps and neighbor voters (32 candidates).
std::vector<LearnerSpec> default_grid();

// Fits one candidate per grid point on the training split. Candidate `c`
// trains with seed derive_seed(seed, c). Failed fits are dropped with a
// warning.
std::vector<Candidate> train_candidates(const TabularDataset& data,
                                        const std::vector<LearnerSpec>& grid, std::uint64_t seed);

// Top-M candidates by validation Brier score, ascending, with cached
// validation and test prediction matrices.
struct RashomonPool {
  std::vector<Candidate> members;
  std::vector<double> val_brier;
  std::vector<double> val_accuracy;
  PredictionMatrix val_preds;
  PredictionMatrix test_preds;

  // Pools built from external prediction matrices have no members.
  std::size_t size() const { return val_preds.models(); }
};

// Keeps the M candidates with the smallest validation Brier score. Ties keep
// the lower candidate index.
RashomonPool select_rashomon(const std::vector<Candidate>& candidates, const TabularDataset& data,
                             std::size_t pool_size);

// Refits every member's family, hyperparameters and seed on the training
// labels of `corrected`, re-caches predictions and re-sorts by validation
// Brier score.
RashomonPool retrain(const RashomonPool& pool, const TabularDataset& corrected);

// Fresh predictions of every member on one split.
PredictionMatrix predict_split(const RashomonPool& pool, const TabularDataset& data, Split split);

// id,family,hyperparameters,seed,val_brier,val_accuracy
void write_pool_manifest(const RashomonPool& pool, const std::string& path);

}  // namespace reconcile
