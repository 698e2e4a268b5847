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

#include "reconcile/prediction.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include "reconcile/csv.hpp"

namespace reconcile {

double clip_unit(double p) {
  if (!std::isfinite(p)) throw InvalidArgument("clip_unit: non-finite input");
  return std::min(1.0, std::max(0.0, p));
}

PredictionMatrix::PredictionMatrix(Matrix values, Split split, std::vector<std::string> model_ids)
    : values_(std::move(values)), split_(split), model_ids_(std::move(model_ids)) {
  if (model_ids_.empty()) {
    for (std::size_t m = 0; m < values_.rows(); ++m) model_ids_.push_back("model_" + std::to_string(m));
  }
  if (model_ids_.size() != values_.rows()) {
    throw InvalidArgument("PredictionMatrix: model id count does not match rows");
  }
  for (double p : values_.data()) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw InvalidArgument(fmt::format("PredictionMatrix: value {} outside [0,1]", p));
    }
  }
}

void PredictionMatrix::set(std::size_t model, std::size_t point, double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw InvalidArgument(fmt::format("PredictionMatrix::set: value {} outside [0,1]", p));
  }
  values_(model, point) = p;
}

std::vector<double> PredictionMatrix::column(std::size_t point) const {
  std::vector<double> out(models());
  for (std::size_t m = 0; m < models(); ++m) out[m] = values_(m, point);
  return out;
}

void ConsensusVector::assign(std::vector<double> values) {
  if (frozen_) throw InvalidArgument("ConsensusVector: cannot modify a frozen consensus");
  values_ = std::move(values);
}

ConsensusVector ensemble_mean(const PredictionMatrix& preds, bool freeze) {
  if (preds.models() == 0) throw InvalidArgument("ensemble_mean: empty prediction matrix");
  std::vector<double> mean(preds.points(), 0.0);
  for (std::size_t m = 0; m < preds.models(); ++m) {
    const auto row = preds.row(m);
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += row[i];
  }
  const double inv = 1.0 / static_cast<double>(preds.models());
  for (double& v : mean) v *= inv;
  return ConsensusVector(std::move(mean), freeze);
}

Matrix pairwise_l1(const PredictionMatrix& preds) {
  const std::size_t M = preds.models();
  if (M < 2) throw InvalidArgument("pairwise_l1: need at least two models");
  if (preds.points() == 0) throw InvalidArgument("pairwise_l1: no points");
  Matrix d(M, M, 0.0);
  const double inv_n = 1.0 / static_cast<double>(preds.points());
  for (std::size_t m = 0; m < M; ++m) {
    const auto a = preds.row(m);
    for (std::size_t j = m + 1; j < M; ++j) {
      const auto b = preds.row(j);
      double sum = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
      d(m, j) = d(j, m) = sum * inv_n;
    }
  }
  return d;
}

std::vector<ModelPair> top_b_pairs(const Matrix& distances, std::size_t count) {
  if (count == 0) throw InvalidArgument("top_b_pairs: B must be at least 1");
  if (distances.rows() != distances.cols()) throw InvalidArgument("top_b_pairs: matrix must be square");
  std::vector<ModelPair> pairs;
  for (std::size_t m = 0; m < distances.rows(); ++m) {
    for (std::size_t j = m + 1; j < distances.cols(); ++j) pairs.push_back({m, j});
  }
  // Pairs are generated in lexicographic order, so a stable sort on distance
  // alone applies the tie-break.
  std::stable_sort(pairs.begin(), pairs.end(), [&](const ModelPair& a, const ModelPair& b) {
    return distances(a.first, a.second) > distances(b.first, b.second);
  });
  if (pairs.size() > count) pairs.resize(count);
  return pairs;
}

void write_prediction_csv(const PredictionMatrix& preds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << "model_id";
  for (std::size_t i = 0; i < preds.points(); ++i) out << ",p_" << i;
  out << '\n';
  for (std::size_t m = 0; m < preds.models(); ++m) {
    out << csv::escape(preds.model_ids()[m]);
    for (double p : preds.row(m)) out << ',' << csv::format_real(p, 9);
    out << '\n';
  }
}

PredictionMatrix read_prediction_csv(const std::string& path, Split split) {
  const auto table = csv::read_file(path);
  if (table.header.empty() || table.header[0] != "model_id") {
    throw DataError(path + ": first column must be 'model_id'");
  }
  const std::size_t n = table.header.size() - 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (table.header[i + 1] != "p_" + std::to_string(i)) {
      throw DataError(fmt::format("{}: column {} must be named p_{}", path, i + 1, i));
    }
  }
  Matrix values(table.rows.size(), n);
  std::vector<std::string> ids;
  for (std::size_t m = 0; m < table.rows.size(); ++m) {
    ids.push_back(table.rows[m][0]);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& text = table.rows[m][i + 1];
      double p = 0.0;
      const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), p);
      if (ec != std::errc() || ptr != text.data() + text.size() || !(p >= 0.0 && p <= 1.0)) {
        throw DataError(fmt::format("{}: bad probability '{}' for model '{}'", path, text, ids.back()));
      }
      values(m, i) = p;
    }
  }
  return PredictionMatrix(std::move(values), split, std::move(ids));
}

}  // namespace reconcile
