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

#include "reconcile/report.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <tuple>

#include "reconcile/csv.hpp"

namespace reconcile {

double percent_change(double value, double base) {
  if (base == 0.0) return value == 0.0 ? 0.0 : std::numeric_limits<double>::quiet_NaN();
  return 100.0 * (value - base) / base;
}

std::string_view label(ReportMetric metric) {
  switch (metric) {
    case ReportMetric::kAccuracy:
      return "Acc";
    case ReportMetric::kLcae:
      return "LCAE";
    case ReportMetric::kVariance:
      return "Var";
    case ReportMetric::kAmbiguity:
      return "Amb";
    case ReportMetric::kDiscrepancy:
      return "Disc";
    case ReportMetric::kDisagreement:
      return "Disag";
  }
  return "?";
}

double metric_value(const MetricsReport& m, ReportMetric metric) {
  switch (metric) {
    case ReportMetric::kAccuracy:
      return m.accuracy;
    case ReportMetric::kLcae:
      return m.lcae;
    case ReportMetric::kVariance:
      return m.variance;
    case ReportMetric::kAmbiguity:
      return m.ambiguity;
    case ReportMetric::kDiscrepancy:
      return m.discrepancy;
    case ReportMetric::kDisagreement:
      return m.disagreement_rate;
  }
  return 0.0;
}

bool higher_is_better(ReportMetric metric) { return metric == ReportMetric::kAccuracy; }

std::vector<DeltaRow> report_delta(const std::vector<RunRow>& rows) {
  std::map<std::tuple<std::string, std::uint64_t>, const RunRow*> baselines;
  for (const auto& r : rows) {
    if (r.method == "soft_voting") baselines[{r.dataset, r.seed}] = &r;
  }

  std::vector<DeltaRow> out;
  std::vector<std::array<std::vector<double>, 6>> samples;
  std::map<std::tuple<std::string, std::string>, std::size_t> slot;
  for (const auto& r : rows) {
    const auto base = baselines.find({r.dataset, r.seed});
    if (base == baselines.end()) {
      throw InvalidArgument(
          fmt::format("report_delta: no soft_voting row for dataset '{}' seed {}", r.dataset, r.seed));
    }
    auto [it, inserted] = slot.try_emplace({r.dataset, r.method}, out.size());
    if (inserted) {
      out.push_back({r.dataset, r.method, {}});
      samples.emplace_back();
    }
    for (std::size_t k = 0; k < kReportMetrics.size(); ++k) {
      const auto metric = kReportMetrics[k];
      samples[it->second][k].push_back(
          percent_change(metric_value(r.metrics, metric), metric_value(base->second->metrics, metric)));
    }
  }

  for (std::size_t s = 0; s < out.size(); ++s) {
    for (std::size_t k = 0; k < kReportMetrics.size(); ++k) {
      const auto& v = samples[s][k];
      DeltaCell cell;
      cell.count = v.size();
      cell.mean = mean_of(v);
      if (v.size() > 1) {
        double ss = 0.0;
        for (double x : v) ss += (x - cell.mean) * (x - cell.mean);
        cell.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
      }
      out[s].cells[k] = cell;
    }
  }
  return out;
}

void write_delta_csv(const std::vector<DeltaRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << "dataset,method,metric,mean_delta_pct,std_delta_pct,seeds\n";
  for (const auto& r : rows) {
    for (std::size_t k = 0; k < kReportMetrics.size(); ++k) {
      const auto& c = r.cells[k];
      out << csv::escape(r.dataset) << ',' << csv::escape(r.method) << ',' << label(kReportMetrics[k]) << ','
          << csv::format_real(c.mean, 17) << ',' << csv::format_real(c.std, 17) << ',' << c.count << '\n';
    }
  }
}

namespace {

// "(+)" marks an improvement, "(-)" a regression.
std::string tagged(const DeltaCell& c, ReportMetric metric) {
  std::string tag;
  if (std::isnan(c.mean)) {
    tag = "";
  } else if (c.mean != 0.0) {
    const bool better = (c.mean > 0.0) == higher_is_better(metric);
    tag = better ? " (+)" : " (-)";
  }
  return fmt::format("{:.2f} ± {:.2f}{}", c.mean, c.std, tag);
}

}  // namespace

std::string delta_markdown(const std::vector<DeltaRow>& rows) {
  std::string md;
  std::string dataset;
  bool first = true;
  for (const auto& r : rows) {
    if (first || r.dataset != dataset) {
      dataset = r.dataset;
      if (!first) md += '\n';
      first = false;
      md += fmt::format("## {}\n\nMean Δ% vs soft voting ± std over seeds. (+) improvement, (-) regression.\n\n",
                        dataset);
      md += "| Method |";
      for (auto m : kReportMetrics) md += fmt::format(" {} |", label(m));
      md += "\n|---|";
      for (std::size_t k = 0; k < kReportMetrics.size(); ++k) md += "---|";
      md += '\n';
    }
    md += fmt::format("| {} |", r.method);
    for (std::size_t k = 0; k < kReportMetrics.size(); ++k) md += fmt::format(" {} |", tagged(r.cells[k], kReportMetrics[k]));
    md += '\n';
  }
  return md;
}

void write_delta_markdown(const std::vector<DeltaRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << delta_markdown(rows);
}

}  // namespace reconcile
