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

#include "reconcile/common.hpp"

namespace reconcile {

// Validation indices with their Euclidean distances, nearest first.
struct Neighborhood {
  std::vector<std::size_t> indices;
  std::vector<double> distances;

  std::size_t size() const { return indices.size(); }
  bool empty() const { return indices.empty(); }
};

// Exact nearest-neighbor search over a fixed reference set (the validation
// features). Distance ties go to the smaller reference index.
class NeighborhoodIndex {
 public:
  explicit NeighborhoodIndex(Matrix reference);

  std::size_t size() const { return reference_.rows(); }
  std::size_t dimension() const { return reference_.cols(); }

  // The `k_max` nearest reference points (all of them when fewer exist).
  Neighborhood query(std::span<const double> x, std::size_t k_max) const;

 private:
  Matrix reference_;
};

// Keeps neighbors with distance <= the k-th smallest distance. The result is
// a prefix of the input.
Neighborhood radius_filter(const Neighborhood& nb, std::size_t k);

// One row per (query, rank): query,rank,val_index,distance.
void write_neighborhoods_csv(const std::vector<Neighborhood>& neighborhoods, const std::string& path);

}  // namespace reconcile
