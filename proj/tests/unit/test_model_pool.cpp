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

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "reconcile/metrics.hpp"
#include "reconcile/model_pool.hpp"
#include "test_support.hpp"

using namespace reconcile;

namespace {

// Predicts a fixed probability everywhere.
class FixedPredictor : public Predictor {
 public:
  explicit FixedPredictor(double p) : Predictor(LearnerSpec{}, 0), p_(p) {}
  std::vector<double> predict_proba(const Matrix& rows) const override {
    return std::vector<double>(rows.rows(), p_);
  }

 private:
  double p_;
};

TabularDataset separable(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> z;
  TabularDataset d;
  for (std::size_t i = 0; i < n; ++i) {
    const double label = i % 2 == 0 ? 1.0 : 0.0;
    const double shift = label == 1.0 ? 3.0 : -3.0;
    d.features.push_row(std::vector<double>{shift + 0.5 * z(gen), 0.5 * z(gen)});
    d.labels.push_back(label);
  }
  d.feature_names = {"x", "y"};
  d.column_kinds = {ColumnKind::kNumeric, ColumnKind::kNumeric};
  d.split.assign(n, Split::kTrain);
  return d;
}

std::vector<Candidate> fixed_candidates(const std::vector<double>& ps) {
  std::vector<Candidate> out;
  for (std::size_t c = 0; c < ps.size(); ++c) {
    out.push_back({"c" + std::to_string(c), std::make_shared<FixedPredictor>(ps[c])});
  }
  return out;
}

TabularDataset all_positive_val(std::size_t n) {
  TabularDataset d;
  for (std::size_t i = 0; i < n; ++i) {
    d.features.push_row(std::vector<double>{static_cast<double>(i)});
    d.labels.push_back(1.0);
    d.split.push_back(i % 3 == 0 ? Split::kTrain : (i % 3 == 1 ? Split::kVal : Split::kTest));
  }
  d.feature_names = {"x"};
  d.column_kinds = {ColumnKind::kNumeric};
  return d;
}

}  // namespace

TEST_CASE("logistic regression separates separable data") {
  const auto d = separable(200, 1);
  LearnerSpec spec;
  spec.family = Family::kLogistic;
  const auto model = fit_predictor(spec, d.features, d.labels, 0);
  CHECK(accuracy(model->predict_proba(d.features), d.labels) == 1.0);
}

TEST_CASE("constant labels give the class prior for every family") {
  auto d = separable(40, 2);
  std::fill(d.labels.begin(), d.labels.end(), 1.0);
  for (const auto& spec : default_grid()) {
    const auto model = fit_predictor(spec, d.features, d.labels, 3);
    for (double p : model->predict_proba(d.features)) CHECK(p == 1.0);
  }
}

TEST_CASE("every family predicts in [0,1] and is deterministic per seed") {
  const auto d = separable(120, 4);
  const auto wild = testing::make_matrix({{1e6, -1e6}, {-1e9, 3.0}, {0.0, 0.0}});
  for (const auto& spec : default_grid()) {
    const auto a = fit_predictor(spec, d.features, d.labels, 11);
    const auto b = fit_predictor(spec, d.features, d.labels, 11);
    const auto pa = a->predict_proba(wild);
    CHECK(pa == b->predict_proba(wild));
    for (double p : pa) {
      CHECK(p >= 0.0);
      CHECK(p <= 1.0);
    }
  }
}

TEST_CASE("best Gini split matches exhaustive threshold search") {
  std::mt19937_64 gen(5);
  std::uniform_int_distribution<int> value(0, 30);
  std::bernoulli_distribution noise(0.1);
  for (int trial = 0; trial < 30; ++trial) {
    const double cut = 10.0 + trial % 10;
    Matrix x;
    std::vector<double> y;
    for (int i = 0; i < 60; ++i) {
      const double v = value(gen);
      x.push_row(std::vector<double>{v});
      const bool label = v > cut;
      y.push_back((noise(gen) ? !label : label) ? 1.0 : 0.0);
    }
    // Oracle: every midpoint between distinct sorted values.
    std::vector<double> values(x.data().begin(), x.data().end());
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    double best = 1e9;
    for (std::size_t t = 0; t + 1 < values.size(); ++t) {
      const double thr = 0.5 * (values[t] + values[t + 1]);
      double nl = 0, pl = 0, nr = 0, pr = 0;
      for (std::size_t i = 0; i < y.size(); ++i) {
        if (x(i, 0) <= thr) {
          ++nl;
          pl += y[i];
        } else {
          ++nr;
          pr += y[i];
        }
      }
      auto gini = [](double n, double p) { return n == 0 ? 0.0 : 1.0 - (p / n) * (p / n) - (1 - p / n) * (1 - p / n); };
      best = std::min(best, (nl * gini(nl, pl) + nr * gini(nr, pr)) / static_cast<double>(y.size()));
    }
    const auto split = best_gini_split(x, y, 1);
    REQUIRE(split.found);
    CHECK(split.impurity == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("depth-1 tree recovers a clean threshold") {
  Matrix x;
  std::vector<double> y;
  for (int i = 0; i < 40; ++i) {
    x.push_row(std::vector<double>{static_cast<double>(i)});
    y.push_back(i >= 17 ? 1.0 : 0.0);
  }
  const auto split = best_gini_split(x, y, 1);
  CHECK(split.threshold == 16.5);
  CHECK(split.impurity == 0.0);
  LearnerSpec spec;
  spec.family = Family::kTree;
  spec.max_depth = 1;
  CHECK(accuracy(fit_predictor(spec, x, y, 0)->predict_proba(x), y) == 1.0);
}

TEST_CASE("select_rashomon keeps the lowest validation Brier") {
  // Labels are all 1, so a constant p has Brier (1 - p)^2.
  const auto data = all_positive_val(30);
  const double b10 = 1.0 - std::sqrt(0.10);
  const double b30 = 1.0 - std::sqrt(0.30);
  const double b20 = 1.0 - std::sqrt(0.20);
  const auto pool = select_rashomon(fixed_candidates({b10, b30, b20}), data, 2);
  REQUIRE(pool.size() == 2);
  CHECK(pool.members[0].id == "c0");
  CHECK(pool.members[1].id == "c2");
  CHECK(pool.val_brier[0] == doctest::Approx(0.10));
  CHECK(pool.val_brier[1] == doctest::Approx(0.20));

  const auto tied = select_rashomon(fixed_candidates({0.5, 0.9, 0.5, 0.9}), data, 3);
  CHECK(tied.members[0].id == "c1");
  CHECK(tied.members[1].id == "c3");
  CHECK(tied.members[2].id == "c0");

  CHECK(select_rashomon(fixed_candidates({0.5, 0.6}), data, 5).size() == 2);
  CHECK_THROWS_AS(select_rashomon({}, data, 2), InvalidArgument);
}

TEST_CASE("select_rashomon matches the sort oracle and ignores input order") {
  std::mt19937_64 gen(21);
  std::uniform_int_distribution<int> level(0, 20);
  const auto data = all_positive_val(30);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> ps(40);
    for (auto& p : ps) p = level(gen) / 20.0;
    const auto pool = select_rashomon(fixed_candidates(ps), data, 25);
    std::vector<std::size_t> order(ps.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return (1 - ps[a]) * (1 - ps[a]) < (1 - ps[b]) * (1 - ps[b]); });
    for (std::size_t m = 0; m < 25; ++m) CHECK(pool.members[m].id == "c" + std::to_string(order[m]));
    for (std::size_t m = 1; m < 25; ++m) CHECK(pool.val_brier[m - 1] <= pool.val_brier[m]);

    // Reversed input order selects the same set of Brier values.
    auto reversed = fixed_candidates(ps);
    std::reverse(reversed.begin(), reversed.end());
    const auto again = select_rashomon(reversed, data, 25);
    CHECK(again.val_brier == pool.val_brier);
  }
}

TEST_CASE("cached matrices match fresh predictions") {
  auto d = stratified_split(separable(200, 6), {}, 6);
  const auto pool = select_rashomon(train_candidates(d, default_grid(), 6), d, 25);
  CHECK(pool.size() == 25);
  CHECK(predict_split(pool, d, Split::kVal) == pool.val_preds);
  CHECK(predict_split(pool, d, Split::kTest) == pool.test_preds);
}

TEST_CASE("retrain without corrections is a fixed point") {
  auto d = stratified_split(separable(150, 7), {}, 7);
  const auto pool = select_rashomon(train_candidates(d, default_grid(), 7), d, 10);
  const auto again = retrain(pool, d);
  CHECK(again.val_preds.values() == pool.val_preds.values());
  CHECK(again.test_preds.values() == pool.test_preds.values());
}

TEST_CASE("retrain reflects a logistic member when every label flips") {
  TabularDataset d;
  d.features = testing::make_matrix({{-1}, {1}, {-1}, {1}, {-1}, {1}});
  d.labels = {0, 1, 0, 1, 0, 1};
  d.split = {Split::kTrain, Split::kTrain, Split::kVal, Split::kVal, Split::kTest, Split::kTest};
  d.feature_names = {"x"};
  d.column_kinds = {ColumnKind::kNumeric};
  LearnerSpec spec;
  spec.family = Family::kLogistic;
  spec.l2 = 0.1;
  const auto pool = select_rashomon(train_candidates(d, {spec}, 0), d, 1);
  auto flipped = d;
  for (std::size_t i : d.indices(Split::kTrain)) flipped.labels[i] = 1.0 - d.labels[i];
  const auto refit = retrain(pool, flipped);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(refit.test_preds(0, i) == doctest::Approx(1.0 - pool.test_preds(0, i)).epsilon(1e-6));
  }
  auto soft = d;
  soft.labels[0] = 0.5;
  CHECK_THROWS_AS(retrain(pool, soft), InvalidArgument);
}

TEST_CASE("flipping a mislabeled point never lowers the best member's train accuracy") {
  auto d = stratified_split(separable(120, 8), {}, 8);
  const auto train = d.indices(Split::kTrain);
  auto noisy = d;
  noisy.labels[train[0]] = 1.0 - d.labels[train[0]];
  const auto pool = select_rashomon(train_candidates(noisy, default_grid(), 8), noisy, 25);
  const auto cleaned = retrain(pool, d);
  const auto x = d.features_of(Split::kTrain);
  const auto y = d.labels_of(Split::kTrain);
  const double before = accuracy(pool.members[0].model->predict_proba(x), y);
  const double after = accuracy(cleaned.members[0].model->predict_proba(x), y);
  CHECK(after >= before);
}
