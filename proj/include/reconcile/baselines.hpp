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
#include <span>
#include <vector>

#include "reconcile/model_pool.hpp"
#include "reconcile/prediction.hpp"

namespace reconcile {

// Per-point mean over models.
std::vector<double> soft_voting(const PredictionMatrix& preds);

// Per-point fraction of models with p >= 0.5.
std::vector<double> majority_voting(const PredictionMatrix& preds);

// Highest validation accuracy; ties go to the lower validation Brier score,
// then to the lower index.
std::size_t best_single(std::span<const double> val_accuracy, std::span<const double> val_brier);
std::size_t best_single(const RashomonPool& pool);

// Each point takes the prediction of an independently drawn model.
std::vector<double> random_selection(const PredictionMatrix& preds, std::uint64_t seed);

}  // namespace reconcile
