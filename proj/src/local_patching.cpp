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

#include "reconcile/local_patching.hpp"

#include <cmath>
#include <fstream>

#include "reconcile/csv.hpp"

namespace reconcile {

void PatchConfig::validate() const {
  if (k == 0) throw InvalidArgument("PatchConfig: k must be at least 1");
  if (k > effective_k_max()) throw InvalidArgument("PatchConfig: k must not exceed k_max");
  if (!(tau_bias > 0.5 && tau_bias <= 1.0)) throw InvalidArgument("PatchConfig: tau_bias must lie in (0.5, 1]");
}

std::vector<double> residuals(std::span<const double> model_val_preds, std::span<const double> val_labels,
                              const Neighborhood& nb) {
  std::vector<double> out;
  out.reserve(nb.size());
  for (std::size_t j : nb.indices) {
    if (j >= model_val_preds.size() || j >= val_labels.size()) {
      throw InvalidArgument("residuals: neighbor index out of range");
    }
    out.push_back(val_labels[j] - model_val_preds[j]);
  }
  return out;
}

double compute_patch(std::span<const double> residuals, double tau_bias) {
  if (!(tau_bias > 0.5 && tau_bias <= 1.0)) throw InvalidArgument("compute_patch: tau_bias must lie in (0.5, 1]");
  if (residuals.empty()) return 0.0;
  double pos_sum = 0.0;
  double neg_sum = 0.0;
  std::size_t pos = 0;
  std::size_t neg = 0;
  for (double r : residuals) {
    if (r > 0.0) {
      pos_sum += r;
      ++pos;
    } else if (r < 0.0) {
      neg_sum += r;
      ++neg;
    }
  }
  const auto total = static_cast<double>(residuals.size());
  // tau_bias > 0.5, so at most one branch can fire.
  if (static_cast<double>(pos) / total > tau_bias) return pos_sum / static_cast<double>(pos);
  if (static_cast<double>(neg) / total > tau_bias) return neg_sum / static_cast<double>(neg);
  return 0.0;
}

PatchCheck verify_patch(std::span<const double> model_val_preds, std::span<const double> val_labels,
                        const Neighborhood& nb, double delta) {
  if (!std::isfinite(delta)) throw InvalidArgument("verify_patch: non-finite delta");
  PatchCheck check;
  if (nb.empty()) return check;
  double before = 0.0;
  double after = 0.0;
  for (std::size_t j : nb.indices) {
    const double p = model_val_preds[j];
    const double y = val_labels[j];
    const double shifted = clip_unit(p + delta);
    before += (p - y) * (p - y);
    after += (shifted - y) * (shifted - y);
  }
  const auto n = static_cast<double>(nb.size());
  check.brier_before = before / n;
  check.brier_after = after / n;
  check.accepted = !(check.brier_after > check.brier_before);
  return check;
}

PointPatch patch_point(std::span<const double> preds_at_point, const PredictionMatrix& val_preds,
                       std::span<const double> val_labels, const Neighborhood& nb,
                       const PatchConfig& config, std::size_t test_index) {
  if (preds_at_point.size() != val_preds.models()) {
    throw InvalidArgument("patch_point: prediction count does not match the model count");
  }
  PointPatch out{{preds_at_point.begin(), preds_at_point.end()}, {}};
  if (nb.empty()) return out;
  for (std::size_t m = 0; m < val_preds.models(); ++m) {
    const auto row = val_preds.row(m);
    const auto r = residuals(row, val_labels, nb);
    const double delta = compute_patch(r, config.tau_bias);
    if (delta == 0.0) continue;
    const auto check = verify_patch(row, val_labels, nb, delta);
    out.events.push_back({test_index, m, delta, check.accepted, check.brier_before, check.brier_after});
    if (check.accepted) out.patched[m] = clip_unit(preds_at_point[m] + delta);
  }
  return out;
}

PatchResult patch_all(const PredictionMatrix& val_preds, const PredictionMatrix& test_preds,
                      std::span<const double> val_labels, const NeighborhoodIndex& index,
                      const Matrix& test_features, const PatchConfig& config) {
  config.validate();
  if (test_features.rows() != test_preds.points()) throw InvalidArgument("patch_all: test feature rows mismatch");
  if (val_preds.points() != index.size() || val_labels.size() != index.size()) {
    throw InvalidArgument("patch_all: validation predictions, labels and index disagree in size");
  }
  if (val_preds.models() != test_preds.models()) throw InvalidArgument("patch_all: model count mismatch");
  PatchResult result{test_preds, {}, {}};
  result.neighborhoods.reserve(test_preds.points());
  for (std::size_t i = 0; i < test_preds.points(); ++i) {
    const auto nb = radius_filter(index.query(test_features.row(i), config.effective_k_max()), config.k);
    const auto column = test_preds.column(i);
    auto point = patch_point(column, val_preds, val_labels, nb, config, i);
    for (std::size_t m = 0; m < column.size(); ++m) result.test_preds.set(m, i, point.patched[m]);
    result.events.insert(result.events.end(), point.events.begin(), point.events.end());
    result.neighborhoods.push_back(nb);
  }
  return result;
}

void write_patch_events(const std::vector<PatchEvent>& events, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << "test_index,model,delta,accepted,brier_before,brier_after\n";
  for (const auto& e : events) {
    out << e.test_index << ',' << e.model << ',' << csv::format_real(e.delta, 17) << ','
        << (e.accepted ? 1 : 0) << ',' << csv::format_real(e.brier_before, 17) << ','
        << csv::format_real(e.brier_after, 17) << '\n';
  }
}

}  // namespace reconcile
