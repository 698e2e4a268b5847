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

#include "reconcile/synthetic.hpp"

#include <cmath>
#include <numeric>

namespace reconcile {

namespace {

struct Component {
  double cx;
  double cy;
  double sx;
  double sy;
  double label;
};

// Two blobs per class; each positive blob overlaps a negative one.
constexpr Component kComponents[] = {
    {-1.5, 0.5, 1.0, 0.9, 0.0},
    {0.0, 2.0, 1.1, 0.8, 0.0},
    {1.5, -0.5, 0.9, 1.0, 1.0},
    {0.2, -2.0, 1.0, 1.1, 1.0},
};

}  // namespace

SyntheticData make_gaussian_mixture(const SyntheticConfig& config) {
  if (config.samples < 4) throw InvalidArgument("make_gaussian_mixture: need at least 4 samples");
  if (!(config.noise_rate >= 0.0 && config.noise_rate < 0.5)) {
    throw InvalidArgument("make_gaussian_mixture: noise_rate must lie in [0, 0.5)");
  }
  Rng rng(config.seed);
  SyntheticData out;
  auto& data = out.data;
  data.features = Matrix(config.samples, 2);
  data.feature_names = {"x1", "x2"};
  data.column_kinds = {ColumnKind::kNumeric, ColumnKind::kNumeric};
  data.labels.resize(config.samples);
  data.split.assign(config.samples, Split::kTrain);
  for (std::size_t i = 0; i < config.samples; ++i) {
    const auto& c = kComponents[i % 4];
    data.features(i, 0) = rng.normal(c.cx, c.sx);
    data.features(i, 1) = rng.normal(c.cy, c.sy);
    data.labels[i] = c.label;
  }
  out.clean_labels = data.labels;

  const auto flips = static_cast<std::size_t>(std::llround(config.noise_rate * static_cast<double>(config.samples)));
  std::vector<std::size_t> order(config.samples);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  out.flipped.assign(config.samples, false);
  for (std::size_t t = 0; t < flips; ++t) {
    out.flipped[order[t]] = true;
    data.labels[order[t]] = 1.0 - data.labels[order[t]];
  }
  return out;
}

}  // namespace reconcile
