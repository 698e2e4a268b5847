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

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "reconcile/tabular_data.hpp"
#include "test_support.hpp"

using namespace reconcile;

namespace {

TabularDataset binary_dataset(std::size_t n_pos, std::size_t n_neg) {
  TabularDataset d;
  for (std::size_t i = 0; i < n_pos + n_neg; ++i) {
    d.features.push_row(std::vector<double>{static_cast<double>(i), static_cast<double>(i % 7)});
    d.labels.push_back(i < n_pos ? 1.0 : 0.0);
  }
  d.feature_names = {"a", "b"};
  d.column_kinds = {ColumnKind::kNumeric, ColumnKind::kNumeric};
  d.split.assign(d.labels.size(), Split::kTrain);
  return d;
}

std::size_t count(const TabularDataset& d, Split s, double label) {
  std::size_t c = 0;
  for (std::size_t i = 0; i < d.size(); ++i) c += d.split[i] == s && d.labels[i] == label;
  return c;
}

}  // namespace

TEST_CASE("binary target uses the lexicographically larger value as positive") {
  const auto t = testing::table("x,target\n1,yes\n2,no\n3,yes\n4,no\n");
  const auto d = from_table(t, "target", {});
  CHECK(d.labels == std::vector<double>{1, 0, 1, 0});
  CHECK(d.positive_label == "yes");
  LoadOptions opt;
  opt.positive_label = "no";
  CHECK(from_table(t, "target", {}, opt).labels == std::vector<double>{0, 1, 0, 1});
}

TEST_CASE("target errors") {
  CHECK_THROWS_AS(from_table(testing::table("x,t\n1,a\n2,b\n3,c\n"), "t", {}), DataError);
  CHECK_THROWS_AS(from_table(testing::table("x,t\n1,a\n2,a\n"), "t", {}), DataError);
  CHECK_THROWS_AS(from_table(testing::table("x,t\n1,a\n2,b\n"), "missing", {}), DataError);
  CHECK_THROWS_AS(from_table(testing::table("x,t\n1,?\n2,\n"), "t", {}), DataError);
  CHECK_THROWS_AS(load_csv("/nonexistent/file.csv", "t", {}), DataError);
}

TEST_CASE("rows with a missing target are dropped") {
  const auto d = from_table(testing::table("x,t\n1,a\n2,?\n3,b\n4,NA\n5,a\n"), "t", {});
  CHECK(d.size() == 3);
  CHECK(d.features(2, 0) == 5.0);
}

TEST_CASE("constant numeric column is dropped at load") {
  const auto d = from_table(testing::table("x,c,y,t\n1,5,2,a\n2,5,1,b\n3,5,7,a\n"), "t", {});
  CHECK(d.dimension() == 2);
  CHECK(d.feature_names == std::vector<std::string>{"x", "y"});
}

TEST_CASE("non-numeric column becomes categorical") {
  const auto d = from_table(testing::table("x,color,t\n1,red,a\n2,blue,b\n3,red,a\n"), "t", {});
  REQUIRE(d.categoricals.size() == 1);
  CHECK(d.categoricals[0].name == "color");
}

TEST_CASE("one-hot expansion counts distinct categories") {
  // Oracle: one indicator per distinct category seen in training.
  const std::string text =
      "x,sex,city,t\n1,f,a,p\n2,m,b,n\n3,f,c,p\n4,m,a,n\n5,f,b,p\n6,m,c,n\n";
  const auto raw = from_table(testing::table(text), "t", {"sex", "city"});
  PreprocessSpec spec;
  spec.categorical_columns = {"sex", "city"};
  const auto d = fit_apply_preprocess(raw, spec);
  std::size_t expected = 1;
  for (const auto& c : raw.categoricals) expected += std::set<std::string>(c.values.begin(), c.values.end()).size();
  CHECK(d.dimension() == expected);
  CHECK(d.dimension() == 6);
  // Each row has exactly one active indicator per categorical column.
  for (std::size_t i = 0; i < d.size(); ++i) {
    double sum = 0.0;
    for (std::size_t c = 1; c < d.dimension(); ++c) sum += d.features(i, c);
    CHECK(sum == 2.0);
  }
  CHECK(d.feature_names[1] == "sex=f");
}

TEST_CASE("drop_first keeps k-1 indicators per column") {
  const std::string text = "x,sex,city,t\n1,f,a,p\n2,m,b,n\n3,f,c,p\n4,m,a,n\n";
  const auto raw = from_table(testing::table(text), "t", {"sex", "city"});
  PreprocessSpec spec;
  spec.categorical_columns = {"sex", "city"};
  spec.drop_first = true;
  CHECK(fit_apply_preprocess(raw, spec).dimension() == 1 + 1 + 2);
}

TEST_CASE("unseen and missing categories map to all-zero indicators") {
  auto raw = from_table(testing::table("x,c,t\n1,a,p\n2,b,n\n3,z,p\n4,?,n\n"), "t", {"c"});
  raw.split = {Split::kTrain, Split::kTrain, Split::kTest, Split::kTest};
  PreprocessSpec spec;
  spec.categorical_columns = {"c"};
  const auto d = fit_apply_preprocess(raw, spec);
  REQUIRE(d.dimension() == 3);
  for (std::size_t row : {2u, 3u}) {
    CHECK(d.features(row, 1) == 0.0);
    CHECK(d.features(row, 2) == 0.0);
  }
}

TEST_CASE("standardization uses training statistics") {
  auto raw = binary_dataset(2, 2);
  raw.features = testing::make_matrix({{0, 1}, {2, 3}, {100, 1}, {-50, 3}});
  raw.split = {Split::kTrain, Split::kTrain, Split::kVal, Split::kTest};
  PreprocessSpec spec;
  const auto d = fit_apply_preprocess(raw, spec);
  CHECK(d.features(0, 0) == doctest::Approx(-1.0));
  CHECK(d.features(1, 0) == doctest::Approx(1.0));
  CHECK(d.features(2, 0) == doctest::Approx(99.0));
}

TEST_CASE("missing numeric values take the training median") {
  auto raw = from_table(testing::table("x,y,t\n1,0,a\n?,1,b\n3,0,a\n10,1,b\n?,0,a\n"), "t", {});
  raw.split = {Split::kTrain, Split::kTrain, Split::kTrain, Split::kVal, Split::kTest};
  PreprocessSpec spec;
  spec.standardize = false;
  const auto d = fit_apply_preprocess(raw, spec);
  CHECK(d.features(1, 0) == 2.0);  // median of {1, 3}
  CHECK(d.features(4, 0) == 2.0);
  for (double v : d.features.data()) CHECK(std::isfinite(v));
}

TEST_CASE("column constant on train is dropped in preprocessing") {
  auto raw = binary_dataset(3, 3);
  raw.features = testing::make_matrix({{1, 0}, {2, 0}, {3, 0}, {4, 0}, {5, 9}, {6, 9}});
  raw.split = {Split::kTrain, Split::kTrain, Split::kTrain, Split::kTrain, Split::kVal, Split::kTest};
  PreprocessSpec spec;
  const auto d = fit_apply_preprocess(raw, spec);
  CHECK(d.dimension() == 1);
  CHECK(d.feature_names[0] == "a");
}

TEST_CASE("preprocessing is idempotent and leaves standardized columns unchanged") {
  auto raw = stratified_split(binary_dataset(40, 60), {}, 5);
  PreprocessSpec spec;
  const auto once = fit_apply_preprocess(raw, spec);
  PreprocessSpec again;
  const auto twice = fit_apply_preprocess(once, again);
  REQUIRE(twice.dimension() == once.dimension());
  for (std::size_t k = 0; k < once.features.data().size(); ++k) {
    CHECK(std::fabs(twice.features.data()[k] - once.features.data()[k]) <= 1e-12);
  }
}

TEST_CASE("preprocessing ignores val and test rows") {
  auto raw = stratified_split(binary_dataset(30, 30), {}, 9);
  PreprocessSpec a;
  fit_preprocess(raw, a);
  // Scramble every non-train feature value.
  auto scrambled = raw;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw.split[i] != Split::kTrain) scrambled.features(i, 0) = 1e6 + static_cast<double>(i);
  }
  PreprocessSpec b;
  fit_preprocess(scrambled, b);
  REQUIRE(a.numeric.size() == b.numeric.size());
  for (std::size_t c = 0; c < a.numeric.size(); ++c) {
    CHECK(a.numeric[c].mean == b.numeric[c].mean);
    CHECK(a.numeric[c].scale == b.numeric[c].scale);
    CHECK(a.numeric[c].median == b.numeric[c].median);
  }
}

TEST_CASE("stratified split: balanced classes give exact ratios") {
  const auto d = stratified_split(binary_dataset(50, 50), {}, 1);
  CHECK(count(d, Split::kTrain, 1) == 30);
  CHECK(count(d, Split::kTrain, 0) == 30);
  CHECK(count(d, Split::kVal, 1) == 10);
  CHECK(count(d, Split::kVal, 0) == 10);
  CHECK(count(d, Split::kTest, 1) == 10);
  CHECK(count(d, Split::kTest, 0) == 10);
}

TEST_CASE("stratified split is deterministic and partitions the rows") {
  const auto a = stratified_split(binary_dataset(37, 63), {}, 4);
  const auto b = stratified_split(binary_dataset(37, 63), {}, 4);
  const auto c = stratified_split(binary_dataset(37, 63), {}, 5);
  CHECK(a.split == b.split);
  CHECK(a.split != c.split);
  std::set<std::size_t> all;
  for (Split s : {Split::kTrain, Split::kVal, Split::kTest}) {
    for (std::size_t i : a.indices(s)) CHECK(all.insert(i).second);
  }
  CHECK(all.size() == 100);
}

TEST_CASE("stratified split 30/70 matches the counting oracle") {
  const auto d = stratified_split(binary_dataset(300, 700), {}, 12);
  // Oracle: round(0.2 * 300) positives and round(0.2 * 700) negatives in test.
  const double test_pos = static_cast<double>(count(d, Split::kTest, 1));
  const double test_all = test_pos + static_cast<double>(count(d, Split::kTest, 0));
  CHECK(test_pos == 60);
  CHECK(test_all == 200);
  CHECK(test_pos / test_all >= 0.295);
  CHECK(test_pos / test_all <= 0.305);
  // Class-1 fraction of the test split matches the global 0.3 within 1/|split|.
  for (Split s : {Split::kTrain, Split::kVal, Split::kTest}) {
    const double pos = static_cast<double>(count(d, s, 1));
    const double all = pos + static_cast<double>(count(d, s, 0));
    CHECK(std::fabs(pos / all - 0.3) <= 1.0 / all);
  }
}

TEST_CASE("stratified split rejects tiny classes and bad ratios") {
  CHECK_THROWS_AS(stratified_split(binary_dataset(2, 50), {}, 0), InvalidArgument);
  CHECK_THROWS_AS(stratified_split(binary_dataset(20, 20), {0.5, 0.2, 0.2}, 0), InvalidArgument);
}

TEST_CASE("prepared csv round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "reconcile_unit_prepared";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "prepared.csv").string();
  auto raw = from_table(testing::table("x,c,t\n1.5,a,p\n2.25,b,n\n3,a,p\n4,b,n\n5,a,p\n6,b,n\n7,a,p\n8,b,n\n9,a,p\n"),
                        "t", {"c"});
  auto split = stratified_split(raw, {}, 0);
  PreprocessSpec spec;
  spec.categorical_columns = {"c"};
  const auto d = fit_apply_preprocess(split, spec);
  export_csv(d, path);
  const auto back = load_prepared_csv(path);
  CHECK(back.features == d.features);
  CHECK(back.labels == d.labels);
  CHECK(back.split == d.split);
  CHECK(back.feature_names == d.feature_names);
  CHECK(back.column_kinds == d.column_kinds);
}

TEST_CASE("manifest parsing") {
  const auto dir = std::filesystem::temp_directory_path() / "reconcile_unit_manifest";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "adult.manifest").string();
  std::ofstream(path) << "# comment\ndata = adult.csv\ntarget = income\ncategoricals = sex, race\npositive = >50K\nseed = 7\n";
  const auto m = read_manifest(path);
  CHECK(m.data_path == "adult.csv");
  CHECK(m.target_column == "income");
  CHECK(m.categorical_columns == std::set<std::string>{"race", "sex"});
  CHECK(m.positive_label == std::optional<std::string>(">50K"));
  CHECK(m.seed == 7);
}

// Set RECONCILE_ADULT_CSV to a headered Adult CSV to run this check. String
// columns are detected as categorical automatically.
TEST_CASE("Adult CSV yields 97 dummy-coded features" * doctest::skip(std::getenv("RECONCILE_ADULT_CSV") == nullptr)) {
  const char* target = std::getenv("RECONCILE_ADULT_TARGET");
  const char* positive = std::getenv("RECONCILE_ADULT_POSITIVE");
  LoadOptions options;
  options.positive_label = positive ? positive : ">50K";
  const auto raw = load_csv(std::getenv("RECONCILE_ADULT_CSV"), target ? target : "income", {}, options);
  auto split = stratified_split(raw, {}, 0);
  PreprocessSpec spec;
  spec.drop_first = true;
  CHECK(fit_apply_preprocess(split, spec).dimension() == 97);
}
