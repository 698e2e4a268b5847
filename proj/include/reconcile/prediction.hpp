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
#include <utility>
#include <vector>

#include "reconcile/common.hpp"
#include "reconcile/tabular_data.hpp"

namespace reconcile {

// min(1, max(0, p)); throws on non-finite input.
double clip_unit(double p);

// M x n probabilities, one row per model, aligned to the rows of one split.
// Every write goes through set(), which rejects values outside [0, 1].
class PredictionMatrix {
 public:
  PredictionMatrix() = default;
  PredictionMatrix(Matrix values, Split split, std::vector<std::string> model_ids);

  std::size_t models() const { return values_.rows(); }
  std::size_t points() const { return values_.cols(); }
  Split split() const { return split_; }
  const std::vector<std::string>& model_ids() const { return model_ids_; }

  double operator()(std::size_t model, std::size_t point) const { return values_(model, point); }
  std::span<const double> row(std::size_t model) const { return values_.row(model); }
  const Matrix& values() const { return values_; }

  void set(std::size_t model, std::size_t point, double p);

  // Column i across models.
  std::vector<double> column(std::size_t point) const;

  std::uint64_t checksum() const { return reconcile::checksum(values_.data()); }

  bool operator==(const PredictionMatrix&) const = default;

 private:
  Matrix values_;
  Split split_ = Split::kVal;
  std::vector<std::string> model_ids_;
};

// Per-point ensemble mean. Once frozen the values cannot change; pairwise
// reconciliation keeps referencing the pre-reconciliation mean.
class ConsensusVector {
 public:
  ConsensusVector(std::vector<double> values, bool frozen)
      : values_(std::move(values)), frozen_(frozen) {}

  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }
  bool frozen() const { return frozen_; }

  void freeze() { frozen_ = true; }
  // Replaces the values; throws when frozen.
  void assign(std::vector<double> values);

 private:
  std::vector<double> values_;
  bool frozen_;
};

ConsensusVector ensemble_mean(const PredictionMatrix& preds, bool freeze = false);

// D[m][j] = mean_i |f_m(x_i) - f_j(x_i)|.
Matrix pairwise_l1(const PredictionMatrix& preds);

struct ModelPair {
  std::size_t first;
  std::size_t second;
  bool operator==(const ModelPair&) const = default;
};

// The B pairs (m < j) with largest D[m][j], descending. Ties go to the
// lexicographically smaller pair. B beyond the number of pairs returns all.
std::vector<ModelPair> top_b_pairs(const Matrix& distances, std::size_t count);

// `model_id,p_0,...,p_{n-1}` with 9 significant digits.
void write_prediction_csv(const PredictionMatrix& preds, const std::string& path);
PredictionMatrix read_prediction_csv(const std::string& path, Split split);

}  // namespace reconcile
