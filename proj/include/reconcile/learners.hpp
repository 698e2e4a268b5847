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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "reconcile/common.hpp"

namespace reconcile {

enum class Family : std::uint8_t { kLogistic, kTree, kBaggedTrees, kBoostedStumps, kNeighborVote };

std::string_view to_string(Family family);

// Hyperparameters for one candidate. Only the fields of the chosen family
// are read.
struct LearnerSpec {
  Family family = Family::kLogistic;
  // logistic
  double l2 = 0.0;
  double learning_rate = 0.1;
  int max_iterations = 5000;
  double gradient_tolerance = 1e-6;
  // tree, bagged trees
  int max_depth = 4;
  int min_leaf = 1;
  int trees = 25;
  bool feature_subsample = false;
  // boosted stumps
  int rounds = 100;
  double shrinkage = 0.1;
  // neighbor vote
  int neighbors = 15;
  double distance_offset = 0.1;

  // Compact `key=value;...` description of the active hyperparameters.
  std::string describe() const;
};

// An immutable trained model producing P(y = 1 | x).
class Predictor {
 public:
  virtual ~Predictor() = default;

  // One probability in [0, 1] per row.
  virtual std::vector<double> predict_proba(const Matrix& rows) const = 0;

  const LearnerSpec& spec() const { return spec_; }
  std::uint64_t seed() const { return seed_; }
  // True when training labels were constant and the model predicts the prior.
  virtual bool degenerate() const { return false; }

 protected:
  Predictor(LearnerSpec spec, std::uint64_t seed) : spec_(spec), seed_(seed) {}

 private:
  LearnerSpec spec_;
  std::uint64_t seed_;
};

// Trains one model. `labels` lie in [0,1]. Training is deterministic in
// (spec, data, seed). Throws DataError on a non-finite fit.
std::shared_ptr<const Predictor> fit_predictor(const LearnerSpec& spec, const Matrix& features,
                                               std::span<const double> labels, std::uint64_t seed);

// Depth-1 CART split; exposed for testing the split search.
struct StumpSplit {
  std::size_t feature = 0;
  double threshold = 0.0;
  double impurity = 0.0;  // size-weighted mean Gini of the two children
  bool found = false;
};
StumpSplit best_gini_split(const Matrix& features, std::span<const double> labels, int min_leaf);

}  // namespace reconcile
