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

#include "reconcile/tabular_data.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace reconcile {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool is_missing(std::string_view v) {
  return v.empty() || v == "?" || v == "NA" || v == "N/A" || v == "nan" || v == "NaN" ||
         v == "null";
}

std::optional<double> parse_number(std::string_view text) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = text.data() + text.size();
  if (begin != end && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) return std::nullopt;
  return value;
}

std::string trim_copy(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::set<std::string> split_list(std::string_view text) {
  std::set<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto piece = trim_copy(text.substr(start, comma == std::string_view::npos
                                                        ? std::string_view::npos
                                                        : comma - start));
    if (!piece.empty()) out.insert(piece);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

std::string_view to_string(Split split) {
  switch (split) {
    case Split::kTrain:
      return "train";
    case Split::kVal:
      return "val";
    case Split::kTest:
      return "test";
  }
  return "unknown";
}

Split parse_split(std::string_view text) {
  if (text == "train") return Split::kTrain;
  if (text == "val") return Split::kVal;
  if (text == "test") return Split::kTest;
  throw DataError(fmt::format("unknown split tag '{}'", text));
}

std::vector<std::size_t> TabularDataset::indices(Split which) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < split.size(); ++i) {
    if (split[i] == which) out.push_back(i);
  }
  return out;
}

Matrix TabularDataset::features_of(Split which) const {
  return features.select_rows(indices(which));
}

std::vector<double> TabularDataset::labels_of(Split which) const {
  std::vector<double> out;
  for (std::size_t i = 0; i < split.size(); ++i) {
    if (split[i] == which) out.push_back(labels[i]);
  }
  return out;
}

void TabularDataset::validate() const {
  const std::size_t n = labels.size();
  if (features.rows() != n) throw InvalidArgument("dataset: feature rows != label count");
  if (split.size() != n) throw InvalidArgument("dataset: split tags != label count");
  if (feature_names.size() != features.cols() || column_kinds.size() != features.cols()) {
    throw InvalidArgument("dataset: column metadata does not match feature columns");
  }
  for (const auto& c : categoricals) {
    if (c.values.size() != n) throw InvalidArgument("dataset: categorical column length mismatch");
  }
  for (double y : labels) {
    if (!(y >= 0.0 && y <= 1.0)) throw InvalidArgument("dataset: label outside [0,1]");
  }
}

TabularDataset from_table(const csv::Table& table, const std::string& target_column,
                          const std::set<std::string>& categorical_columns,
                          const LoadOptions& options) {
  const long target = table.column_index(target_column);
  if (target < 0) throw DataError(fmt::format("target column '{}' not found", target_column));
  for (const auto& name : categorical_columns) {
    if (table.column_index(name) < 0) {
      throw DataError(fmt::format("categorical column '{}' not found", name));
    }
  }

  std::vector<std::size_t> rows;
  std::set<std::string> target_values;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& v = table.rows[r][static_cast<std::size_t>(target)];
    if (is_missing(v)) continue;
    rows.push_back(r);
    target_values.insert(v);
  }
  if (rows.empty()) throw DataError("dataset is empty after dropping rows with a missing target");
  if (target_values.size() != 2) {
    throw DataError(fmt::format("target column '{}' must have exactly two distinct values, found {}",
                                target_column, target_values.size()));
  }
  if (rows.size() < table.rows.size()) {
    spdlog::warn("dropped {} rows with a missing target", table.rows.size() - rows.size());
  }

  TabularDataset data;
  data.positive_label = *target_values.rbegin();
  data.negative_label = *target_values.begin();
  if (options.positive_label) {
    if (!target_values.contains(*options.positive_label)) {
      throw DataError(fmt::format("positive label '{}' does not occur in the target column",
                                  *options.positive_label));
    }
    if (*options.positive_label != data.positive_label) std::swap(data.positive_label, data.negative_label);
  }
  for (std::size_t r : rows) {
    data.labels.push_back(table.rows[r][static_cast<std::size_t>(target)] == data.positive_label ? 1.0 : 0.0);
  }

  std::vector<std::vector<double>> numeric_columns;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (static_cast<long>(c) == target) continue;
    const auto& name = table.header[c];
    bool categorical = categorical_columns.contains(name);
    std::vector<double> parsed;
    if (!categorical) {
      parsed.reserve(rows.size());
      for (std::size_t r : rows) {
        const auto& v = table.rows[r][c];
        if (is_missing(v)) {
          parsed.push_back(kNaN);
          continue;
        }
        const auto x = parse_number(v);
        if (!x) {
          spdlog::warn("column '{}' has non-numeric value '{}'; treating it as categorical", name, v);
          categorical = true;
          break;
        }
        parsed.push_back(*x);
      }
    }
    if (categorical) {
      CategoricalColumn column{name, {}};
      column.values.reserve(rows.size());
      for (std::size_t r : rows) {
        const auto& v = table.rows[r][c];
        column.values.push_back(is_missing(v) ? std::string() : v);
      }
      data.categoricals.push_back(std::move(column));
      continue;
    }
    double first = kNaN;
    bool constant = true;
    for (double x : parsed) {
      if (std::isnan(x)) continue;
      if (std::isnan(first)) {
        first = x;
      } else if (x != first) {
        constant = false;
        break;
      }
    }
    if (constant) {
      spdlog::info("dropping constant column '{}'", name);
      continue;
    }
    data.feature_names.push_back(name);
    data.column_kinds.push_back(ColumnKind::kNumeric);
    numeric_columns.push_back(std::move(parsed));
  }

  data.features = Matrix(rows.size(), numeric_columns.size());
  for (std::size_t c = 0; c < numeric_columns.size(); ++c) {
    for (std::size_t r = 0; r < rows.size(); ++r) data.features(r, c) = numeric_columns[c][r];
  }
  data.split.assign(rows.size(), Split::kTrain);
  return data;
}

TabularDataset load_csv(const std::string& path, const std::string& target_column,
                        const std::set<std::string>& categorical_columns,
                        const LoadOptions& options) {
  return from_table(csv::read_file(path), target_column, categorical_columns, options);
}

TabularDataset stratified_split(TabularDataset data, const SplitRatios& ratios,
                                std::uint64_t seed) {
  if (ratios.train < 0.0 || ratios.val < 0.0 || ratios.test < 0.0 ||
      std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9) {
    throw InvalidArgument("stratified_split: ratios must be non-negative and sum to 1");
  }
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < data.size(); ++i) {
    by_class[data.labels[i] >= 0.5 ? 1 : 0].push_back(i);
  }
  data.split.assign(data.size(), Split::kTrain);
  for (int c = 0; c < 2; ++c) {
    auto& members = by_class[c];
    const std::size_t n = members.size();
    if (n < 3) {
      throw InvalidArgument(fmt::format("stratified_split: class {} has {} members, need at least 3", c, n));
    }
    const auto n_val = static_cast<std::size_t>(std::llround(ratios.val * static_cast<double>(n)));
    const auto n_test = static_cast<std::size_t>(std::llround(ratios.test * static_cast<double>(n)));
    if (n_val + n_test >= n || (ratios.val > 0 && n_val == 0) || (ratios.test > 0 && n_test == 0)) {
      throw InvalidArgument(fmt::format(
          "stratified_split: class {} with {} members cannot populate every split", c, n));
    }
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(c)));
    rng.shuffle(members);
    for (std::size_t k = 0; k < n; ++k) {
      const Split tag = k < n_val ? Split::kVal : (k < n_val + n_test ? Split::kTest : Split::kTrain);
      data.split[members[k]] = tag;
    }
  }
  return data;
}

void fit_preprocess(const TabularDataset& data, PreprocessSpec& spec) {
  for (const auto& name : spec.categorical_columns) {
    const bool found = std::any_of(data.categoricals.begin(), data.categoricals.end(),
                                   [&](const CategoricalColumn& c) { return c.name == name; });
    if (!found) throw InvalidArgument(fmt::format("preprocess: categorical column '{}' not found", name));
  }
  const auto train = data.indices(Split::kTrain);
  if (train.empty()) throw InvalidArgument("preprocess: training split is empty");

  spec.numeric.clear();
  spec.kept_indicators.clear();
  spec.vocabularies.clear();

  for (std::size_t c = 0; c < data.features.cols(); ++c) {
    std::vector<double> observed;
    for (std::size_t i : train) {
      const double x = data.features(i, c);
      if (!std::isnan(x)) observed.push_back(x);
    }
    if (observed.empty()) {
      spdlog::info("dropping column '{}' with no training values", data.feature_names[c]);
      continue;
    }
    const double median = median_of(observed);
    // Imputed values equal the median, so statistics run over the full
    // training column after imputation.
    double sum = 0.0;
    for (double x : observed) sum += x;
    sum += median * static_cast<double>(train.size() - observed.size());
    const double mean = sum / static_cast<double>(train.size());
    double ss = 0.0;
    for (double x : observed) ss += (x - mean) * (x - mean);
    ss += (median - mean) * (median - mean) * static_cast<double>(train.size() - observed.size());
    const double variance = ss / static_cast<double>(train.size());
    if (!(variance > 0.0)) {
      spdlog::info("dropping zero-variance column '{}'", data.feature_names[c]);
      continue;
    }
    if (data.column_kinds[c] == ColumnKind::kIndicator) {
      spec.kept_indicators.push_back(c);
      continue;
    }
    PreprocessSpec::NumericStats stats;
    stats.source = c;
    stats.name = data.feature_names[c];
    stats.median = median;
    stats.mean = spec.standardize ? mean : 0.0;
    stats.scale = spec.standardize ? std::sqrt(variance) : 1.0;
    spec.numeric.push_back(stats);
  }

  for (const auto& column : data.categoricals) {
    if (!spec.categorical_columns.contains(column.name)) {
      // Non-numeric columns detected at load time are encoded as well.
      spdlog::info("encoding auto-detected categorical column '{}'", column.name);
    }
    std::set<std::string> seen;
    for (std::size_t i : train) {
      if (!column.values[i].empty()) seen.insert(column.values[i]);
    }
    PreprocessSpec::Vocabulary vocab{column.name, {}};
    for (const auto& category : seen) {
      std::size_t count = 0;
      for (std::size_t i : train) count += column.values[i] == category ? 1 : 0;
      // An indicator equal to 1 on every training row has zero variance.
      if (count == train.size()) continue;
      vocab.categories.push_back(category);
    }
    if (spec.drop_first && !vocab.categories.empty()) vocab.categories.erase(vocab.categories.begin());
    spec.vocabularies.push_back(std::move(vocab));
  }
  spec.fitted = true;
}

TabularDataset apply_preprocess(const TabularDataset& data, const PreprocessSpec& spec) {
  if (!spec.fitted) throw InvalidArgument("apply_preprocess: spec has not been fitted");
  TabularDataset out;
  out.labels = data.labels;
  out.split = data.split;
  out.positive_label = data.positive_label;
  out.negative_label = data.negative_label;

  std::size_t d = spec.numeric.size() + spec.kept_indicators.size();
  std::vector<const CategoricalColumn*> sources;
  for (const auto& vocab : spec.vocabularies) {
    const auto it = std::find_if(data.categoricals.begin(), data.categoricals.end(),
                                 [&](const CategoricalColumn& c) { return c.name == vocab.column; });
    if (it == data.categoricals.end()) {
      throw InvalidArgument(fmt::format("apply_preprocess: categorical column '{}' not found", vocab.column));
    }
    sources.push_back(&*it);
    d += vocab.categories.size();
  }

  const std::size_t n = data.size();
  out.features = Matrix(n, d);
  std::size_t col = 0;
  for (const auto& stats : spec.numeric) {
    for (std::size_t i = 0; i < n; ++i) {
      double x = data.features(i, stats.source);
      if (std::isnan(x)) x = stats.median;
      out.features(i, col) = (x - stats.mean) / stats.scale;
    }
    out.feature_names.push_back(stats.name);
    out.column_kinds.push_back(ColumnKind::kNumeric);
    ++col;
  }
  for (std::size_t source : spec.kept_indicators) {
    for (std::size_t i = 0; i < n; ++i) out.features(i, col) = data.features(i, source);
    out.feature_names.push_back(data.feature_names[source]);
    out.column_kinds.push_back(ColumnKind::kIndicator);
    ++col;
  }
  for (std::size_t v = 0; v < spec.vocabularies.size(); ++v) {
    const auto& vocab = spec.vocabularies[v];
    const auto& values = sources[v]->values;
    std::size_t unseen = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto it = std::lower_bound(vocab.categories.begin(), vocab.categories.end(), values[i]);
      if (it != vocab.categories.end() && *it == values[i]) {
        out.features(i, col + static_cast<std::size_t>(it - vocab.categories.begin())) = 1.0;
      } else if (data.split[i] != Split::kTrain && !values[i].empty()) {
        ++unseen;
      }
    }
    if (unseen > 0) {
      spdlog::warn("column '{}': {} val/test rows have a category unseen in training", vocab.column, unseen);
    }
    for (const auto& category : vocab.categories) {
      out.feature_names.push_back(vocab.column + "=" + category);
      out.column_kinds.push_back(ColumnKind::kIndicator);
    }
    col += vocab.categories.size();
  }
  return out;
}

TabularDataset fit_apply_preprocess(const TabularDataset& data, PreprocessSpec& spec) {
  fit_preprocess(data, spec);
  return apply_preprocess(data, spec);
}

void export_csv(const TabularDataset& data, const std::string& path) {
  if (!data.categoricals.empty()) throw InvalidArgument("export_csv: dataset has unencoded categoricals");
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  for (const auto& name : data.feature_names) out << csv::escape(name) << ',';
  out << "label,split\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t c = 0; c < data.dimension(); ++c) out << csv::format_real(data.features(i, c), 17) << ',';
    out << csv::format_real(data.labels[i], 17) << ',' << to_string(data.split[i]) << '\n';
  }
}

TabularDataset load_prepared_csv(const std::string& path) {
  const auto table = csv::read_file(path);
  const long label_col = table.column_index("label");
  const long split_col = table.column_index("split");
  if (label_col < 0 || split_col < 0) throw DataError("prepared CSV needs 'label' and 'split' columns");
  TabularDataset data;
  std::vector<std::size_t> feature_cols;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (static_cast<long>(c) == label_col || static_cast<long>(c) == split_col) continue;
    feature_cols.push_back(c);
    data.feature_names.push_back(table.header[c]);
  }
  data.features = Matrix(table.rows.size(), feature_cols.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    for (std::size_t k = 0; k < feature_cols.size(); ++k) {
      const auto x = parse_number(row[feature_cols[k]]);
      if (!x) throw DataError(fmt::format("prepared CSV: bad number '{}' on row {}", row[feature_cols[k]], r + 1));
      data.features(r, k) = *x;
    }
    const auto y = parse_number(row[static_cast<std::size_t>(label_col)]);
    if (!y || *y < 0.0 || *y > 1.0) throw DataError(fmt::format("prepared CSV: bad label on row {}", r + 1));
    data.labels.push_back(*y);
    data.split.push_back(parse_split(row[static_cast<std::size_t>(split_col)]));
  }
  for (std::size_t k = 0; k < feature_cols.size(); ++k) {
    bool binary = true;
    for (std::size_t r = 0; r < data.size() && binary; ++r) {
      binary = data.features(r, k) == 0.0 || data.features(r, k) == 1.0;
    }
    data.column_kinds.push_back(binary ? ColumnKind::kIndicator : ColumnKind::kNumeric);
  }
  return data;
}

std::map<std::string, std::string> read_key_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim_copy(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw DataError(fmt::format("{}:{}: expected 'key = value'", path, line_no));
    out[trim_copy(std::string_view(line).substr(0, eq))] = trim_copy(std::string_view(line).substr(eq + 1));
  }
  return out;
}

DatasetManifest read_manifest(const std::string& path) {
  const auto kv = read_key_values(path);
  DatasetManifest manifest;
  for (const auto& [key, value] : kv) {
    if (key == "data") {
      manifest.data_path = value;
    } else if (key == "target") {
      manifest.target_column = value;
    } else if (key == "categoricals") {
      manifest.categorical_columns = split_list(value);
    } else if (key == "positive") {
      manifest.positive_label = value;
    } else if (key == "seed") {
      const auto x = parse_number(value);
      if (!x || *x < 0 || *x != std::floor(*x)) throw DataError("manifest: seed must be a non-negative integer");
      manifest.seed = static_cast<std::uint64_t>(*x);
    } else {
      throw DataError(fmt::format("manifest: unknown key '{}'", key));
    }
  }
  if (manifest.target_column.empty()) throw DataError("manifest: 'target' is required");
  return manifest;
}

}  // namespace reconcile
