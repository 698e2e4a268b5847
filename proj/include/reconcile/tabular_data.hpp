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
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "reconcile/common.hpp"
#include "reconcile/csv.hpp"

namespace reconcile {

enum class Split : std::uint8_t { kTrain, kVal, kTest };

std::string_view to_string(Split split);
Split parse_split(std::string_view text);

enum class ColumnKind : std::uint8_t { kNumeric, kIndicator };

// A categorical column kept in raw form until preprocessing encodes it.
// An empty string marks a missing value.
struct CategoricalColumn {
  std::string name;
  std::vector<std::string> values;
};

// Feature matrix, labels and split assignment for a binary task.
//
// Before preprocessing, `features` holds the numeric columns (NaN marks a
// missing value) and `categoricals` the raw categorical columns. After
// preprocessing every column is numeric or a 0/1 indicator and
// `categoricals` is empty.
struct TabularDataset {
  Matrix features;
  std::vector<double> labels;
  std::vector<std::string> feature_names;
  std::vector<ColumnKind> column_kinds;
  std::vector<CategoricalColumn> categoricals;
  std::vector<Split> split;
  std::string positive_label = "1";
  std::string negative_label = "0";

  std::size_t size() const { return labels.size(); }
  std::size_t dimension() const { return features.cols(); }

  std::vector<std::size_t> indices(Split which) const;
  Matrix features_of(Split which) const;
  std::vector<double> labels_of(Split which) const;

  // Throws InvalidArgument when a structural invariant is broken.
  void validate() const;
};

struct LoadOptions {
  // Raw target value mapped to label 1. Defaults to the lexicographically
  // larger of the two observed values.
  std::optional<std::string> positive_label;
};

// Reads a CSV with a header row. Rows with a missing target are dropped,
// numeric columns that are constant over all rows are dropped, and columns
// that do not parse as numbers are treated as categorical. Every row starts
// in the training split.
TabularDataset load_csv(const std::string& path, const std::string& target_column,
                        const std::set<std::string>& categorical_columns,
                        const LoadOptions& options = {});

TabularDataset from_table(const csv::Table& table, const std::string& target_column,
                          const std::set<std::string>& categorical_columns,
                          const LoadOptions& options = {});

struct SplitRatios {
  double train = 0.6;
  double val = 0.2;
  double test = 0.2;
};

// Assigns split tags per class so that every split keeps the class ratio.
TabularDataset stratified_split(TabularDataset data, const SplitRatios& ratios,
                                std::uint64_t seed);

// Preprocessing configuration plus the statistics fitted on the training
// split. Numeric columns are median-imputed and standardized; categorical
// columns are expanded into indicators over the training vocabulary.
struct PreprocessSpec {
  std::set<std::string> categorical_columns;
  bool standardize = true;
  // Dummy coding: omit the lexicographically first category of each column.
  bool drop_first = false;

  // Fitted state.
  bool fitted = false;
  struct NumericStats {
    std::size_t source = 0;
    std::string name;
    double median = 0.0;
    double mean = 0.0;
    double scale = 1.0;
  };
  std::vector<NumericStats> numeric;
  std::vector<std::size_t> kept_indicators;  // source columns already 0/1
  struct Vocabulary {
    std::string column;
    std::vector<std::string> categories;
  };
  std::vector<Vocabulary> vocabularies;
};

// Fits the statistics of `spec` on the training split of `data`.
void fit_preprocess(const TabularDataset& data, PreprocessSpec& spec);

// Applies fitted statistics. Unseen or missing categories become an
// all-zero indicator block.
TabularDataset apply_preprocess(const TabularDataset& data, const PreprocessSpec& spec);

TabularDataset fit_apply_preprocess(const TabularDataset& data, PreprocessSpec& spec);

// Writes features, `label` and `split` columns.
void export_csv(const TabularDataset& data, const std::string& path);

// Reads a file produced by export_csv. Columns named `label` and `split` are
// required; every other column is a preprocessed feature.
TabularDataset load_prepared_csv(const std::string& path);

// `key = value` lines; `#` starts a comment.
std::map<std::string, std::string> read_key_values(const std::string& path);

struct DatasetManifest {
  std::string data_path;
  std::string target_column;
  std::set<std::string> categorical_columns;
  std::optional<std::string> positive_label;
  std::uint64_t seed = 0;
};

// Recognized keys: data, target, categoricals (comma list), positive, seed.
DatasetManifest read_manifest(const std::string& path);

}  // namespace reconcile
