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

#include <random>

#include "reconcile/local_patching.hpp"
#include "reconcile/metrics.hpp"
#include "test_support.hpp"

using namespace reconcile;

namespace {

Neighborhood first_n(std::size_t n) {
  Neighborhood nb;
  for (std::size_t i = 0; i < n; ++i) {
    nb.indices.push_back(i);
    nb.distances.push_back(static_cast<double>(i));
  }
  return nb;
}

}  // namespace

TEST_CASE("residuals") {
  const std::vector<double> y{1, 0, 1};
  for (double r : residuals(y, y, first_n(3))) CHECK(r == 0.0);
  const std::vector<double> ones{1, 1, 1};
  const std::vector<double> p{0.8, 0.8, 0.8};
  for (double r : residuals(p, ones, first_n(3))) CHECK(r == doctest::Approx(0.2));
  CHECK(residuals(p, ones, Neighborhood{}).empty());

  std::mt19937_64 gen(1);
  const auto preds = oracle::random_rows(gen, 1, 30)[0];
  const auto labels = oracle::random_labels(gen, 30, true);
  Neighborhood nb;
  for (std::size_t i : {3u, 17u, 4u, 29u, 0u, 11u, 8u, 21u, 2u, 5u}) nb.indices.push_back(i);
  nb.distances.assign(10, 1.0);
  const auto r = residuals(preds, labels, nb);
  for (std::size_t t = 0; t < 10; ++t) CHECK(r[t] == labels[nb.indices[t]] - preds[nb.indices[t]]);
}

TEST_CASE("compute_patch") {
  CHECK(compute_patch(std::vector<double>{0.2, 0.2, 0.2}, 0.6) == doctest::Approx(0.2));
  CHECK(compute_patch(std::vector<double>{0.3, -0.3}, 0.6) == 0.0);
  // 3 of 5 positive is exactly 0.6: not above the threshold.
  CHECK(compute_patch(std::vector<double>{0.1, 0.1, 0.1, -0.1, 0.0}, 0.6) == 0.0);
  // Zeros count in the denominator only: 3 negatives of 4 is 0.75.
  CHECK(compute_patch(std::vector<double>{-0.1, -0.2, -0.3, 0.0}, 0.6) == doctest::Approx(-0.2));
  CHECK(compute_patch(std::vector<double>{}, 0.6) == 0.0);
  CHECK_THROWS_AS(compute_patch(std::vector<double>{0.1}, 0.5), InvalidArgument);
}

TEST_CASE("verify_patch") {
  const std::vector<double> y{1, 1, 1};
  const std::vector<double> p{0.7, 0.7, 0.7};
  CHECK(verify_patch(p, y, first_n(3), 0.0).accepted);
  const auto up = verify_patch(p, y, first_n(3), 0.2);
  CHECK(up.accepted);
  CHECK(up.brier_before == doctest::Approx(0.09));
  CHECK(up.brier_after == doctest::Approx(0.01));
  const auto down = verify_patch(p, y, first_n(3), -0.2);
  CHECK_FALSE(down.accepted);
  CHECK(down.brier_after == doctest::Approx(0.25));
  // The shift is clipped before scoring.
  const auto clipped = verify_patch(p, y, first_n(3), 0.6);
  CHECK(clipped.brier_after == 0.0);
}

TEST_CASE("patch_point") {
  // Model 0 is calibrated; model 1 sits 0.2 low in a pure-positive region.
  const auto val = testing::make_preds({{1, 1, 1, 1, 1}, {0.8, 0.8, 0.8, 0.8, 0.8}});
  const std::vector<double> y{1, 1, 1, 1, 1};
  PatchConfig config;
  const std::vector<double> at_point{0.9, 0.7};
  const auto out = patch_point(at_point, val, y, first_n(5), config, 4);
  CHECK(out.patched[0] == 0.9);
  CHECK(out.patched[1] == doctest::Approx(0.9));
  REQUIRE(out.events.size() == 1);
  CHECK(out.events[0].model == 1);
  CHECK(out.events[0].test_index == 4);
  CHECK(out.events[0].accepted);

  const std::vector<double> high{0.9, 0.95};
  CHECK(patch_point(high, val, y, first_n(5), config).patched[1] == 1.0);

  const auto empty = patch_point(at_point, val, y, Neighborhood{}, config);
  CHECK(empty.patched == at_point);
  CHECK(empty.events.empty());

  const auto unbiased = testing::make_preds({{1, 1, 1, 1, 1}, {1, 1, 1, 1, 1}});
  CHECK(patch_point(at_point, unbiased, y, first_n(5), config).patched == at_point);
}

TEST_CASE("patch config validation") {
  PatchConfig c;
  c.tau_bias = 0.5;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = {};
  c.k = 10;
  c.k_max = 5;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = {};
  CHECK(c.effective_k_max() == 25);
}

namespace {

struct LineFixture {
  Matrix val_x;
  Matrix test_x;
  std::vector<double> val_y;
  PredictionMatrix val;
  PredictionMatrix test;
};

// Points on a line, labels from a smooth curve; model 1 under-predicts by 0.25.
LineFixture line_fixture(std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  LineFixture f;
  auto truth = [](double x) { return 0.5 + 0.4 * std::sin(6.0 * x); };
  oracle::Rows val_rows(3);
  oracle::Rows test_rows(3);
  for (int i = 0; i < 400; ++i) {
    const double x = u(gen);
    f.val_x.push_row(std::vector<double>{x});
    f.val_y.push_back(u(gen) < truth(x) ? 1.0 : 0.0);
    val_rows[0].push_back(truth(x));
    val_rows[1].push_back(std::max(0.0, truth(x) - 0.25));
    val_rows[2].push_back(std::min(1.0, truth(x) + 0.02));
  }
  for (int i = 0; i < 100; ++i) {
    const double x = u(gen);
    f.test_x.push_row(std::vector<double>{x});
    test_rows[0].push_back(truth(x));
    test_rows[1].push_back(std::max(0.0, truth(x) - 0.25));
    test_rows[2].push_back(std::min(1.0, truth(x) + 0.02));
  }
  f.val = testing::make_preds(val_rows);
  f.test = testing::make_preds(test_rows, Split::kTest);
  return f;
}

}  // namespace

TEST_CASE("patch_all invariants") {
  const auto f = line_fixture(2);
  const NeighborhoodIndex index(f.val_x);
  PatchConfig config;
  const auto result = patch_all(f.val, f.test, f.val_y, index, f.test_x, config);
  for (double v : result.test_preds.values().data()) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  for (const auto& e : result.events) {
    CHECK(e.delta != 0.0);
    if (e.accepted) CHECK(e.brier_after <= e.brier_before);
  }
  REQUIRE(result.neighborhoods.size() == f.test.points());
  for (const auto& nb : result.neighborhoods) {
    CHECK(nb.size() >= config.k);
    CHECK(nb.size() <= config.effective_k_max());
  }

  SUBCASE("the under-predicting model's LCAE decreases") {
    std::vector<Neighborhood> n30;
    for (std::size_t i = 0; i < f.test_x.rows(); ++i) n30.push_back(index.query(f.test_x.row(i), 30));
    const double before = lcae(f.test.row(1), n30, f.val_y);
    const double after = lcae(result.test_preds.row(1), n30, f.val_y);
    CHECK(after < before);
  }

  SUBCASE("model order permutes outputs identically") {
    const oracle::Rows v = testing::to_rows(f.val);
    const oracle::Rows t = testing::to_rows(f.test);
    const auto rv = testing::make_preds({v[2], v[0], v[1]});
    const auto rt = testing::make_preds({t[2], t[0], t[1]}, Split::kTest);
    const auto permuted = patch_all(rv, rt, f.val_y, index, f.test_x, config);
    for (std::size_t i = 0; i < f.test.points(); ++i) {
      CHECK(permuted.test_preds(0, i) == result.test_preds(2, i));
      CHECK(permuted.test_preds(1, i) == result.test_preds(0, i));
      CHECK(permuted.test_preds(2, i) == result.test_preds(1, i));
    }
  }

  SUBCASE("validation matrix is untouched") {
    CHECK(f.val == line_fixture(2).val);
  }
}

TEST_CASE("tau_bias = 1 with mixed-sign residuals is the identity") {
  // Alternating labels around a constant 0.5 predictor: every neighborhood
  // holds both residual signs.
  Matrix val_x;
  std::vector<double> y;
  for (int i = 0; i < 60; ++i) {
    val_x.push_row(std::vector<double>{static_cast<double>(i)});
    y.push_back(i % 2 == 0 ? 1.0 : 0.0);
  }
  const auto val = testing::make_preds({std::vector<double>(60, 0.5), std::vector<double>(60, 0.4)});
  const auto test_x = testing::make_matrix({{10.2}, {33.7}, {58.1}});
  const auto test = testing::make_preds({{0.5, 0.5, 0.5}, {0.4, 0.4, 0.4}}, Split::kTest);
  PatchConfig config;
  config.tau_bias = 1.0;
  const auto result = patch_all(val, test, y, NeighborhoodIndex(val_x), test_x, config);
  CHECK(result.test_preds == test);
}
