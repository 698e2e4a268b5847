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

#include "reconcile/neighborhoods.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <utility>

#include "reconcile/csv.hpp"

namespace reconcile {

NeighborhoodIndex::NeighborhoodIndex(Matrix reference) : reference_(std::move(reference)) {}

Neighborhood NeighborhoodIndex::query(std::span<const double> x, std::size_t k_max) const {
  if (k_max == 0) throw InvalidArgument("NeighborhoodIndex::query: k_max must be at least 1");
  if (x.size() != reference_.cols()) {
    throw InvalidArgument("NeighborhoodIndex::query: dimension mismatch");
  }
  const std::size_t n = reference_.rows();
  std::vector<std::pair<double, std::size_t>> order(n);
  for (std::size_t r = 0; r < n; ++r) {
    const auto ref = reference_.row(r);
    double s = 0.0;
    for (std::size_t c = 0; c < x.size(); ++c) {
      const double diff = x[c] - ref[c];
      s += diff * diff;
    }
    order[r] = {s, r};
  }
  const std::size_t k = std::min(k_max, n);
  // Lexicographic pair comparison applies the index tie-break.
  std::partial_sort(order.begin(), order.begin() + static_cast<long>(k), order.end());
  Neighborhood nb;
  nb.indices.reserve(k);
  nb.distances.reserve(k);
  for (std::size_t t = 0; t < k; ++t) {
    nb.indices.push_back(order[t].second);
    nb.distances.push_back(std::sqrt(order[t].first));
  }
  return nb;
}

Neighborhood radius_filter(const Neighborhood& nb, std::size_t k) {
  if (nb.empty()) throw InvalidArgument("radius_filter: empty neighborhood");
  if (k == 0) throw InvalidArgument("radius_filter: k must be at least 1");
  if (k >= nb.size()) return nb;
  const double radius = nb.distances[k - 1];
  std::size_t keep = k;
  while (keep < nb.size() && nb.distances[keep] <= radius) ++keep;
  Neighborhood out;
  out.indices.assign(nb.indices.begin(), nb.indices.begin() + static_cast<long>(keep));
  out.distances.assign(nb.distances.begin(), nb.distances.begin() + static_cast<long>(keep));
  return out;
}

void write_neighborhoods_csv(const std::vector<Neighborhood>& neighborhoods, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << "query,rank,val_index,distance\n";
  for (std::size_t q = 0; q < neighborhoods.size(); ++q) {
    const auto& nb = neighborhoods[q];
    for (std::size_t t = 0; t < nb.size(); ++t) {
      out << q << ',' << t << ',' << nb.indices[t] << ',' << csv::format_real(nb.distances[t], 9) << '\n';
    }
  }
}

}  // namespace reconcile
