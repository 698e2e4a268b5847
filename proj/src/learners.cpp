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

#include "reconcile/learners.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace reconcile {

namespace {

constexpr std::size_t kMaxBins = 256;

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

// Candidate split thresholds per feature and the bin of every training value.
// A value x goes left of threshold k iff bin(x) <= k.
struct Binning {
  std::vector<std::vector<double>> thresholds;
  std::vector<std::vector<std::uint16_t>> bins;  // [feature][row]

  explicit Binning(const Matrix& x) : thresholds(x.cols()), bins(x.cols()) {
    std::vector<double> values(x.rows());
    for (std::size_t f = 0; f < x.cols(); ++f) {
      for (std::size_t r = 0; r < x.rows(); ++r) values[r] = x(r, f);
      std::vector<double> distinct = values;
      std::sort(distinct.begin(), distinct.end());
      distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
      auto& thr = thresholds[f];
      if (distinct.size() <= kMaxBins) {
        for (std::size_t k = 0; k + 1 < distinct.size(); ++k) {
          thr.push_back(0.5 * (distinct[k] + distinct[k + 1]));
        }
      } else {
        for (std::size_t q = 1; q < kMaxBins; ++q) {
          const std::size_t idx = q * distinct.size() / kMaxBins;
          const double t = 0.5 * (distinct[idx - 1] + distinct[idx]);
          if (thr.empty() || t > thr.back()) thr.push_back(t);
        }
      }
      auto& b = bins[f];
      b.resize(x.rows());
      for (std::size_t r = 0; r < x.rows(); ++r) {
        b[r] = static_cast<std::uint16_t>(std::lower_bound(thr.begin(), thr.end(), values[r]) - thr.begin());
      }
    }
  }
};

struct Node {
  bool leaf = true;
  std::size_t feature = 0;
  double threshold = 0.0;
  std::size_t left = 0;
  std::size_t right = 0;
  double value = 0.0;
};

double walk(const std::vector<Node>& nodes, std::span<const double> x) {
  std::size_t i = 0;
  while (!nodes[i].leaf) i = x[nodes[i].feature] <= nodes[i].threshold ? nodes[i].left : nodes[i].right;
  return nodes[i].value;
}

struct SplitChoice {
  bool found = false;
  std::size_t feature = 0;
  std::size_t bin = 0;  // threshold index
  double impurity = 0.0;
};

double gini_mass(double weight, double positive) {
  if (weight <= 0.0) return 0.0;
  const double p = positive / weight;
  return weight * 2.0 * p * (1.0 - p);
}

// Scans every threshold of the listed features; strict improvement keeps the
// first minimum in (feature, threshold) order.
SplitChoice scan_gini(const Binning& binning, std::span<const std::size_t> rows,
                      std::span<const double> weights, std::span<const double> labels,
                      std::span<const std::size_t> features, double min_leaf) {
  SplitChoice best;
  std::vector<double> w_hist;
  std::vector<double> p_hist;
  for (std::size_t f : features) {
    const auto& thr = binning.thresholds[f];
    if (thr.empty()) continue;
    const std::size_t nb = thr.size() + 1;
    w_hist.assign(nb, 0.0);
    p_hist.assign(nb, 0.0);
    double total_w = 0.0;
    double total_p = 0.0;
    for (std::size_t r : rows) {
      const std::size_t b = binning.bins[f][r];
      w_hist[b] += weights[r];
      p_hist[b] += weights[r] * labels[r];
      total_w += weights[r];
      total_p += weights[r] * labels[r];
    }
    double left_w = 0.0;
    double left_p = 0.0;
    for (std::size_t k = 0; k < thr.size(); ++k) {
      left_w += w_hist[k];
      left_p += p_hist[k];
      const double right_w = total_w - left_w;
      if (left_w < min_leaf || right_w < min_leaf) continue;
      const double impurity = gini_mass(left_w, left_p) + gini_mass(right_w, total_p - left_p);
      if (!best.found || impurity < best.impurity) {
        best = {true, f, k, impurity};
      }
    }
  }
  return best;
}

class ConstantModel final : public Predictor {
 public:
  ConstantModel(LearnerSpec spec, std::uint64_t seed, double value)
      : Predictor(spec, seed), value_(value) {}
  std::vector<double> predict_proba(const Matrix& rows) const override {
    return std::vector<double>(rows.rows(), value_);
  }
  bool degenerate() const override { return true; }

 private:
  double value_;
};

class LogisticModel final : public Predictor {
 public:
  LogisticModel(LearnerSpec spec, std::uint64_t seed, const Matrix& x, std::span<const double> y)
      : Predictor(spec, seed), weights_(x.cols(), 0.0) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    const double inv_n = 1.0 / static_cast<double>(n);
    std::vector<double> z(n);

    auto loss_at = [&](std::span<const double> w, double b) {
      double loss = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double s = b;
        const auto row = x.row(i);
        for (std::size_t c = 0; c < d; ++c) s += w[c] * row[c];
        z[i] = s;
        loss += softplus(s) - y[i] * s;
      }
      double reg = 0.0;
      for (double v : w) reg += v * v;
      return loss * inv_n + 0.5 * spec.l2 * reg;
    };

    double rate = spec.learning_rate;
    double loss = loss_at(weights_, bias_);
    std::vector<double> grad(d);
    std::vector<double> trial(d);
    for (int it = 0; it < spec.max_iterations; ++it) {
      std::fill(grad.begin(), grad.end(), 0.0);
      double grad_b = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double r = sigmoid(z[i]) - y[i];
        const auto row = x.row(i);
        for (std::size_t c = 0; c < d; ++c) grad[c] += r * row[c];
        grad_b += r;
      }
      double norm = std::abs(grad_b * inv_n);
      for (std::size_t c = 0; c < d; ++c) {
        grad[c] = grad[c] * inv_n + spec.l2 * weights_[c];
        norm = std::max(norm, std::abs(grad[c]));
      }
      grad_b *= inv_n;
      if (norm < spec.gradient_tolerance) break;
      for (;;) {
        for (std::size_t c = 0; c < d; ++c) trial[c] = weights_[c] - rate * grad[c];
        const double trial_b = bias_ - rate * grad_b;
        const double trial_loss = loss_at(trial, trial_b);
        if (trial_loss <= loss || rate < 1e-12) {
          weights_ = trial;
          bias_ = trial_b;
          loss = trial_loss;
          break;
        }
        rate *= 0.5;
      }
    }
    if (!std::isfinite(loss) || !std::isfinite(bias_) ||
        !std::all_of(weights_.begin(), weights_.end(), [](double v) { return std::isfinite(v); })) {
      throw DataError("logistic regression diverged");
    }
  }

  std::vector<double> predict_proba(const Matrix& rows) const override {
    std::vector<double> out(rows.rows());
    for (std::size_t i = 0; i < rows.rows(); ++i) {
      double s = bias_;
      const auto row = rows.row(i);
      for (std::size_t c = 0; c < weights_.size(); ++c) s += weights_[c] * row[c];
      out[i] = sigmoid(s);
    }
    return out;
  }

 private:
  std::vector<double> weights_;
  double bias_ = 0.0;
};

// Grows a CART tree with Gini splits on weighted rows.
std::vector<Node> grow_tree(const Binning& binning, std::span<const double> labels,
                            std::span<const double> weights, const LearnerSpec& spec, Rng* rng) {
  std::vector<Node> nodes;
  std::vector<std::size_t> root_rows;
  for (std::size_t r = 0; r < labels.size(); ++r) {
    if (weights[r] > 0.0) root_rows.push_back(r);
  }
  const std::size_t d = binning.thresholds.size();
  std::vector<std::size_t> all_features(d);
  std::iota(all_features.begin(), all_features.end(), 0);
  const auto subsample = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(d))));

  struct Task {
    std::size_t node;
    std::vector<std::size_t> rows;
    int depth;
  };
  std::vector<Task> stack;
  nodes.emplace_back();
  stack.push_back({0, std::move(root_rows), 0});
  while (!stack.empty()) {
    Task task = std::move(stack.back());
    stack.pop_back();
    double w = 0.0;
    double p = 0.0;
    for (std::size_t r : task.rows) {
      w += weights[r];
      p += weights[r] * labels[r];
    }
    nodes[task.node].value = w > 0.0 ? p / w : 0.5;
    if (task.depth >= spec.max_depth || w < 2.0 * spec.min_leaf || p <= 0.0 || p >= w) continue;

    std::vector<std::size_t> features = all_features;
    if (spec.feature_subsample && rng != nullptr && subsample < d) {
      rng->shuffle(features);
      features.resize(subsample);
      std::sort(features.begin(), features.end());
    }
    const auto choice = scan_gini(binning, task.rows, weights, labels, features,
                                  static_cast<double>(spec.min_leaf));
    if (!choice.found || choice.impurity >= gini_mass(w, p) - 1e-12) continue;

    std::vector<std::size_t> left_rows;
    std::vector<std::size_t> right_rows;
    for (std::size_t r : task.rows) {
      (binning.bins[choice.feature][r] <= choice.bin ? left_rows : right_rows).push_back(r);
    }
    const std::size_t left = nodes.size();
    nodes.emplace_back();
    nodes.emplace_back();
    Node& parent = nodes[task.node];
    parent.leaf = false;
    parent.feature = choice.feature;
    parent.threshold = binning.thresholds[choice.feature][choice.bin];
    parent.left = left;
    parent.right = left + 1;
    stack.push_back({left + 1, std::move(right_rows), task.depth + 1});
    stack.push_back({left, std::move(left_rows), task.depth + 1});
  }
  return nodes;
}

class TreeModel final : public Predictor {
 public:
  TreeModel(LearnerSpec spec, std::uint64_t seed, const Matrix& x, std::span<const double> y)
      : Predictor(spec, seed) {
    const Binning binning(x);
    const std::vector<double> weights(x.rows(), 1.0);
    Rng rng(seed);
    nodes_ = grow_tree(binning, y, weights, spec, &rng);
  }
  std::vector<double> predict_proba(const Matrix& rows) const override {
    std::vector<double> out(rows.rows());
    for (std::size_t i = 0; i < rows.rows(); ++i) out[i] = walk(nodes_, rows.row(i));
    return out;
  }

 private:
  std::vector<Node> nodes_;
};

class BaggedTreesModel final : public Predictor {
 public:
  BaggedTreesModel(LearnerSpec spec, std::uint64_t seed, const Matrix& x, std::span<const double> y)
      : Predictor(spec, seed) {
    const Binning binning(x);
    Rng rng(seed);
    const std::size_t n = x.rows();
    std::vector<double> weights(n);
    for (int t = 0; t < spec.trees; ++t) {
      std::fill(weights.begin(), weights.end(), 0.0);
      for (std::size_t k = 0; k < n; ++k) weights[rng.uniform_index(n)] += 1.0;
      forest_.push_back(grow_tree(binning, y, weights, spec, &rng));
    }
  }
  std::vector<double> predict_proba(const Matrix& rows) const override {
    std::vector<double> out(rows.rows(), 0.0);
    for (std::size_t i = 0; i < rows.rows(); ++i) {
      double sum = 0.0;
      for (const auto& tree : forest_) sum += walk(tree, rows.row(i));
      out[i] = sum / static_cast<double>(forest_.size());
    }
    return out;
  }

 private:
  std::vector<std::vector<Node>> forest_;
};

// Gradient boosting with depth-1 trees on the logistic loss; leaf values are
// Newton steps.
class BoostedStumpsModel final : public Predictor {
 public:
  BoostedStumpsModel(LearnerSpec spec, std::uint64_t seed, const Matrix& x, std::span<const double> y)
      : Predictor(spec, seed) {
    constexpr double kLeafReg = 1.0;
    const Binning binning(x);
    const std::size_t n = x.rows();
    double prior = 0.0;
    for (double v : y) prior += v;
    prior = std::clamp(prior / static_cast<double>(n), 1e-6, 1.0 - 1e-6);
    base_ = std::log(prior / (1.0 - prior));
    std::vector<double> score(n, base_);
    std::vector<double> g(n);
    std::vector<double> h(n);
    for (int round = 0; round < spec.rounds; ++round) {
      double g_total = 0.0;
      double h_total = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double p = sigmoid(score[i]);
        g[i] = p - y[i];
        h[i] = std::max(p * (1.0 - p), 1e-12);
        g_total += g[i];
        h_total += h[i];
      }
      Stump best{};
      double best_gain = (g_total * g_total) / (h_total + kLeafReg);
      bool found = false;
      for (std::size_t f = 0; f < x.cols(); ++f) {
        const auto& thr = binning.thresholds[f];
        if (thr.empty()) continue;
        std::vector<double> gh(thr.size() + 1, 0.0);
        std::vector<double> hh(thr.size() + 1, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
          gh[binning.bins[f][i]] += g[i];
          hh[binning.bins[f][i]] += h[i];
        }
        double gl = 0.0;
        double hl = 0.0;
        for (std::size_t k = 0; k < thr.size(); ++k) {
          gl += gh[k];
          hl += hh[k];
          const double gr = g_total - gl;
          const double hr = h_total - hl;
          const double gain = gl * gl / (hl + kLeafReg) + gr * gr / (hr + kLeafReg);
          if (gain > best_gain + 1e-12) {
            best_gain = gain;
            best = {f, thr[k], -gl / (hl + kLeafReg), -gr / (hr + kLeafReg)};
            found = true;
          }
        }
      }
      if (!found) {
        const double step = -g_total / (h_total + kLeafReg);
        best = {0, std::numeric_limits<double>::infinity(), step, step};
      }
      best.left *= spec.shrinkage;
      best.right *= spec.shrinkage;
      for (std::size_t i = 0; i < n; ++i) score[i] += x(i, best.feature) <= best.threshold ? best.left : best.right;
      stumps_.push_back(best);
    }
    if (!std::isfinite(base_)) throw DataError("boosted stumps diverged");
  }

  std::vector<double> predict_proba(const Matrix& rows) const override {
    std::vector<double> out(rows.rows());
    for (std::size_t i = 0; i < rows.rows(); ++i) {
      double s = base_;
      for (const auto& stump : stumps_) s += rows(i, stump.feature) <= stump.threshold ? stump.left : stump.right;
      out[i] = sigmoid(s);
    }
    return out;
  }

 private:
  struct Stump {
    std::size_t feature;
    double threshold;
    double left;
    double right;
  };
  double base_ = 0.0;
  std::vector<Stump> stumps_;
};

// Inverse-distance weighted vote over the k nearest training rows.
class NeighborVoteModel final : public Predictor {
 public:
  NeighborVoteModel(LearnerSpec spec, std::uint64_t seed, const Matrix& x, std::span<const double> y)
      : Predictor(spec, seed), reference_(x), labels_(y.begin(), y.end()) {}

  std::vector<double> predict_proba(const Matrix& rows) const override {
    const std::size_t n = reference_.rows();
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(spec().neighbors), n);
    std::vector<std::pair<double, std::size_t>> dist(n);
    std::vector<double> out(rows.rows());
    for (std::size_t q = 0; q < rows.rows(); ++q) {
      const auto row = rows.row(q);
      for (std::size_t r = 0; r < n; ++r) {
        const auto ref = reference_.row(r);
        double s = 0.0;
        for (std::size_t c = 0; c < row.size(); ++c) s += (row[c] - ref[c]) * (row[c] - ref[c]);
        dist[r] = {s, r};
      }
      std::partial_sort(dist.begin(), dist.begin() + static_cast<long>(k), dist.end());
      double wsum = 0.0;
      double psum = 0.0;
      for (std::size_t t = 0; t < k; ++t) {
        const double w = 1.0 / (std::sqrt(dist[t].first) + spec().distance_offset);
        wsum += w;
        psum += w * labels_[dist[t].second];
      }
      out[q] = std::clamp(psum / wsum, 0.0, 1.0);
    }
    return out;
  }

 private:
  Matrix reference_;
  std::vector<double> labels_;
};

}  // namespace

std::string_view to_string(Family family) {
  switch (family) {
    case Family::kLogistic:
      return "logistic";
    case Family::kTree:
      return "tree";
    case Family::kBaggedTrees:
      return "bagged_trees";
    case Family::kBoostedStumps:
      return "boosted_stumps";
    case Family::kNeighborVote:
      return "neighbor_vote";
  }
  return "unknown";
}

std::string LearnerSpec::describe() const {
  switch (family) {
    case Family::kLogistic:
      return fmt::format("l2={}", l2);
    case Family::kTree:
      return fmt::format("max_depth={};min_leaf={}", max_depth, min_leaf);
    case Family::kBaggedTrees:
      return fmt::format("trees={};max_depth={};min_leaf={};feature_subsample={}", trees, max_depth,
                         min_leaf, feature_subsample ? 1 : 0);
    case Family::kBoostedStumps:
      return fmt::format("rounds={};shrinkage={}", rounds, shrinkage);
    case Family::kNeighborVote:
      return fmt::format("k={}", neighbors);
  }
  return {};
}

std::shared_ptr<const Predictor> fit_predictor(const LearnerSpec& spec, const Matrix& features,
                                               std::span<const double> labels, std::uint64_t seed) {
  if (features.rows() == 0) throw InvalidArgument("fit_predictor: no training rows");
  if (labels.size() != features.rows()) throw InvalidArgument("fit_predictor: label count mismatch");
  const auto [lo, hi] = std::minmax_element(labels.begin(), labels.end());
  if (*lo == *hi) return std::make_shared<ConstantModel>(spec, seed, *lo);
  switch (spec.family) {
    case Family::kLogistic:
      return std::make_shared<LogisticModel>(spec, seed, features, labels);
    case Family::kTree:
      return std::make_shared<TreeModel>(spec, seed, features, labels);
    case Family::kBaggedTrees:
      return std::make_shared<BaggedTreesModel>(spec, seed, features, labels);
    case Family::kBoostedStumps:
      return std::make_shared<BoostedStumpsModel>(spec, seed, features, labels);
    case Family::kNeighborVote:
      return std::make_shared<NeighborVoteModel>(spec, seed, features, labels);
  }
  throw InvalidArgument("fit_predictor: unknown family");
}

StumpSplit best_gini_split(const Matrix& features, std::span<const double> labels, int min_leaf) {
  const Binning binning(features);
  std::vector<std::size_t> rows(features.rows());
  std::iota(rows.begin(), rows.end(), 0);
  std::vector<std::size_t> all(features.cols());
  std::iota(all.begin(), all.end(), 0);
  const std::vector<double> weights(features.rows(), 1.0);
  const auto choice = scan_gini(binning, rows, weights, labels, all, static_cast<double>(min_leaf));
  StumpSplit out;
  if (!choice.found) return out;
  out.found = true;
  out.feature = choice.feature;
  out.threshold = binning.thresholds[choice.feature][choice.bin];
  out.impurity = choice.impurity / static_cast<double>(features.rows());
  return out;
}

}  // namespace reconcile
