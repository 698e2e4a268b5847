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

#include "reconcile/model_pool.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <fstream>
#include <numeric>

#include "reconcile/csv.hpp"
#include "reconcile/metrics.hpp"

namespace reconcile {

std::vector<LearnerSpec> default_grid() {
  std::vector<LearnerSpec> grid;
  for (double l2 : {0.0, 1e-3, 1e-2, 1e-1, 1.0}) {
    LearnerSpec s;
    s.family = Family::kLogistic;
    s.l2 = l2;
    grid.push_back(s);
  }
  for (int depth : {2, 3, 4, 6, 8}) {
    for (int min_leaf : {1, 5, 20}) {
      LearnerSpec s;
      s.family = Family::kTree;
      s.max_depth = depth;
      s.min_leaf = min_leaf;
      grid.push_back(s);
    }
  }
  for (int depth : {4, 6, 8}) {
    for (bool subsample : {false, true}) {
      LearnerSpec s;
      s.family = Family::kBaggedTrees;
      s.trees = 25;
      s.max_depth = depth;
      s.min_leaf = 5;
      s.feature_subsample = subsample;
      grid.push_back(s);
    }
  }
  for (int rounds : {25, 50, 100, 200}) {
    LearnerSpec s;
    s.family = Family::kBoostedStumps;
    s.rounds = rounds;
    s.shrinkage = 0.1;
    grid.push_back(s);
  }
  for (int k : {15, 51}) {
    LearnerSpec s;
    s.family = Family::kNeighborVote;
    s.neighbors = k;
    grid.push_back(s);
  }
  return grid;
}

std::vector<Candidate> train_candidates(const TabularDataset& data,
                                        const std::vector<LearnerSpec>& grid, std::uint64_t seed) {
  const auto x = data.features_of(Split::kTrain);
  const auto y = data.labels_of(Split::kTrain);
  if (y.empty()) throw InvalidArgument("train_candidates: training split is empty");
  std::vector<Candidate> out;
  for (std::size_t c = 0; c < grid.size(); ++c) {
    const std::string id = fmt::format("c{:02}_{}", c, to_string(grid[c].family));
    try {
      out.push_back({id, fit_predictor(grid[c], x, y, derive_seed(seed, c))});
    } catch (const DataError& e) {
      spdlog::warn("dropping candidate {}: {}", id, e.what());
    }
  }
  return out;
}

namespace {

PredictionMatrix predict_members(const std::vector<Candidate>& members, const Matrix& x, Split split) {
  Matrix values(members.size(), x.rows());
  std::vector<std::string> ids;
  for (std::size_t m = 0; m < members.size(); ++m) {
    const auto p = members[m].model->predict_proba(x);
    std::copy(p.begin(), p.end(), values.row(m).begin());
    ids.push_back(members[m].id);
  }
  return PredictionMatrix(std::move(values), split, std::move(ids));
}

// Scores every candidate on validation and keeps the best `pool_size`.
RashomonPool rank_and_keep(const std::vector<Candidate>& candidates, const TabularDataset& data,
                           std::size_t pool_size) {
  const auto x_val = data.features_of(Split::kVal);
  const auto y_val = data.labels_of(Split::kVal);
  if (y_val.empty()) throw InvalidArgument("select_rashomon: validation split is empty");
  const auto all_val = predict_members(candidates, x_val, Split::kVal);
  std::vector<double> brier(candidates.size());
  std::vector<double> acc(candidates.size());
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    brier[c] = brier_loss(all_val.row(c), y_val);
    acc[c] = accuracy(all_val.row(c), y_val);
  }
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return brier[a] < brier[b]; });
  if (order.size() > pool_size) order.resize(pool_size);

  RashomonPool pool;
  for (std::size_t c : order) {
    pool.members.push_back(candidates[c]);
    pool.val_brier.push_back(brier[c]);
    pool.val_accuracy.push_back(acc[c]);
  }
  pool.val_preds = predict_members(pool.members, x_val, Split::kVal);
  pool.test_preds = predict_members(pool.members, data.features_of(Split::kTest), Split::kTest);
  return pool;
}

}  // namespace

RashomonPool select_rashomon(const std::vector<Candidate>& candidates, const TabularDataset& data,
                             std::size_t pool_size) {
  if (candidates.empty()) throw InvalidArgument("select_rashomon: no candidates");
  if (pool_size == 0) throw InvalidArgument("select_rashomon: pool size must be positive");
  if (candidates.size() < pool_size) {
    spdlog::warn("only {} candidates for a pool of {}; keeping all", candidates.size(), pool_size);
  }
  return rank_and_keep(candidates, data, pool_size);
}

RashomonPool retrain(const RashomonPool& pool, const TabularDataset& corrected) {
  if (pool.members.size() != pool.size()) throw InvalidArgument("retrain: pool has no trained members");
  const auto x = corrected.features_of(Split::kTrain);
  const auto y = corrected.labels_of(Split::kTrain);
  for (double v : y) {
    if (v != 0.0 && v != 1.0) throw InvalidArgument("retrain: training labels must be 0 or 1");
  }
  std::vector<Candidate> refit;
  for (const auto& member : pool.members) {
    const auto& model = *member.model;
    refit.push_back({member.id, fit_predictor(model.spec(), x, y, model.seed())});
  }
  return rank_and_keep(refit, corrected, refit.size());
}

PredictionMatrix predict_split(const RashomonPool& pool, const TabularDataset& data, Split split) {
  if (pool.members.size() != pool.size()) throw InvalidArgument("predict_split: pool has no trained members");
  return predict_members(pool.members, data.features_of(split), split);
}

void write_pool_manifest(const RashomonPool& pool, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << "id,family,hyperparameters,seed,val_brier,val_accuracy\n";
  for (std::size_t m = 0; m < pool.size(); ++m) {
    const auto& model = *pool.members[m].model;
    out << pool.members[m].id << ',' << to_string(model.spec().family) << ','
        << csv::escape(model.spec().describe()) << ',' << model.seed() << ','
        << csv::format_real(pool.val_brier[m], 17) << ',' << csv::format_real(pool.val_accuracy[m], 17)
        << '\n';
  }
}

}  // namespace reconcile
