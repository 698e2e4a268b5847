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

// Brute-force reference implementations used only by tests. They are
// written independently of the library: plain loops, full sorts, no shared
// helpers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <utility>
#include <vector>

namespace oracle {

using Rows = std::vector<std::vector<double>>;  // rows[m][i]

inline Rows random_rows(std::mt19937_64& gen, std::size_t m, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::bernoulli_distribution edge(0.05);
  Rows rows(m, std::vector<double>(n));
  for (auto& r : rows) {
    for (auto& v : r) v = edge(gen) ? (u(gen) < 0.5 ? 0.0 : 1.0) : u(gen);
  }
  return rows;
}

inline std::vector<double> random_labels(std::mt19937_64& gen, std::size_t n, bool soft = false) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> y(n);
  for (auto& v : y) v = soft && u(gen) < 0.2 ? u(gen) : (u(gen) < 0.5 ? 0.0 : 1.0);
  return y;
}

inline double brier(const std::vector<double>& p, const std::vector<double>& y) {
  long double s = 0.0L;
  for (std::size_t i = 0; i < p.size(); ++i) s += (long double)(p[i] - y[i]) * (p[i] - y[i]);
  return (double)(s / p.size());
}

inline double accuracy(const std::vector<double>& p, const std::vector<double>& y) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const int a = p[i] >= 0.5 ? 1 : 0;
    const int b = y[i] >= 0.5 ? 1 : 0;
    hits += a == b;
  }
  return (double)hits / p.size();
}

inline std::vector<double> column_mean(const Rows& rows) {
  std::vector<double> out(rows[0].size(), 0.0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    long double s = 0.0L;
    for (const auto& r : rows) s += r[i];
    out[i] = (double)(s / rows.size());
  }
  return out;
}

inline double variance(const Rows& rows) {
  const std::size_t n = rows[0].size();
  long double total = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    long double mean = 0.0L;
    for (const auto& r : rows) mean += r[i];
    mean /= rows.size();
    long double ss = 0.0L;
    for (const auto& r : rows) ss += (r[i] - mean) * (r[i] - mean);
    total += ss / rows.size();
  }
  return (double)(total / n);
}

inline double ambiguity(const Rows& rows) {
  const std::size_t n = rows[0].size();
  long double total = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    double lo = rows[0][i];
    double hi = rows[0][i];
    for (const auto& r : rows) {
      lo = std::min(lo, r[i]);
      hi = std::max(hi, r[i]);
    }
    total += hi - lo;
  }
  return (double)(total / n);
}

inline double l1(const std::vector<double>& a, const std::vector<double>& b) {
  long double s = 0.0L;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::fabs(a[i] - b[i]);
  return (double)(s / a.size());
}

inline double discrepancy(const Rows& rows) {
  double best = 0.0;
  for (std::size_t m = 0; m < rows.size(); ++m) {
    for (std::size_t j = 0; j < rows.size(); ++j) {
      if (m != j) best = std::max(best, l1(rows[m], rows[j]));
    }
  }
  return best;
}

inline double disagreement(const Rows& rows, double eps) {
  long double total = 0.0L;
  std::size_t pairs = 0;
  for (std::size_t m = 0; m < rows.size(); ++m) {
    for (std::size_t j = m + 1; j < rows.size(); ++j) {
      std::size_t count = 0;
      for (std::size_t i = 0; i < rows[m].size(); ++i) count += std::fabs(rows[m][i] - rows[j][i]) > eps;
      total += (long double)count / rows[m].size();
      ++pairs;
    }
  }
  return (double)(total / pairs);
}

// Indices of the k nearest reference points by Euclidean distance; ties go to
// the smaller index. Full sort over every reference point.
inline std::vector<std::size_t> knn(const std::vector<std::vector<double>>& reference,
                                    const std::vector<double>& x, std::size_t k) {
  std::vector<std::pair<double, std::size_t>> all;
  for (std::size_t j = 0; j < reference.size(); ++j) {
    double d = 0.0;
    for (std::size_t c = 0; c < x.size(); ++c) d += (reference[j][c] - x[c]) * (reference[j][c] - x[c]);
    all.emplace_back(std::sqrt(d), j);
  }
  std::sort(all.begin(), all.end());
  std::vector<std::size_t> out;
  for (std::size_t t = 0; t < std::min(k, all.size()); ++t) out.push_back(all[t].second);
  return out;
}

inline double lcae(const std::vector<double>& ensemble, const std::vector<std::vector<double>>& val_x,
                   const std::vector<double>& val_y, const std::vector<std::vector<double>>& test_x,
                   std::size_t k) {
  long double total = 0.0L;
  for (std::size_t i = 0; i < test_x.size(); ++i) {
    const auto nb = knn(val_x, test_x[i], k);
    long double s = 0.0L;
    for (std::size_t j : nb) s += std::fabs(ensemble[i] - val_y[j]);
    total += s / nb.size();
  }
  return (double)(total / test_x.size());
}

// Golden-section minimization of a unimodal function on [lo, hi], carried out
// in long double so the bracket can shrink below sqrt(double epsilon).
inline double golden_min(const std::function<long double(long double)>& f, double lo, double hi,
                         int iterations = 200) {
  const long double phi = (std::sqrt(5.0L) - 1.0L) / 2.0L;
  long double a = lo;
  long double b = hi;
  long double c = b - phi * (b - a);
  long double d = a + phi * (b - a);
  long double fc = f(c);
  long double fd = f(d);
  for (int t = 0; t < iterations && b - a > 1e-18L; ++t) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = f(d);
    }
  }
  return (double)(0.5L * (a + b));
}

// Sorted (descending D, then lexicographic) list of all pairs m < j.
inline std::vector<std::pair<std::size_t, std::size_t>> sorted_pairs(const std::vector<std::vector<double>>& d) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t m = 0; m < d.size(); ++m) {
    for (std::size_t j = m + 1; j < d.size(); ++j) pairs.emplace_back(m, j);
  }
  std::sort(pairs.begin(), pairs.end(), [&](const auto& a, const auto& b) {
    const double da = d[a.first][a.second];
    const double db = d[b.first][b.second];
    if (da != db) return da > db;
    return a < b;
  });
  return pairs;
}

}  // namespace oracle
