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
#include <vector>

#include "reconcile/tabular_data.hpp"

namespace reconcile {

struct SyntheticConfig {
  std::size_t samples = 3000;
  double noise_rate = 0.05;
  std::uint64_t seed = 0;
};

struct SyntheticData {
  TabularDataset data;        // unsplit, unpreprocessed
  std::vector<bool> flipped;  // true where the label was planted as noise
  std::vector<double> clean_labels;
};

// Two-dimensional mixture of four Gaussian components, two per class, with
// overlapping classes. Exactly round(noise_rate * samples) labels are
// flipped.
SyntheticData make_gaussian_mixture(const SyntheticConfig& config);

}  // namespace reconcile
