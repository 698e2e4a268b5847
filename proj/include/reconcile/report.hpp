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

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "reconcile/harness.hpp"

namespace reconcile {

// Percent change of `value` against `base`. A zero base gives 0 when the
// value is also zero and NaN otherwise.
double percent_change(double value, double base);

enum class ReportMetric : std::uint8_t { kAccuracy, kLcae, kVariance, kAmbiguity, kDiscrepancy, kDisagreement };

inline constexpr std::array<ReportMetric, 6> kReportMetrics{
    ReportMetric::kAccuracy,  ReportMetric::kLcae,        ReportMetric::kVariance,
    ReportMetric::kAmbiguity, ReportMetric::kDiscrepancy, ReportMetric::kDisagreement};

std::string_view label(ReportMetric metric);
double metric_value(const MetricsReport& m, ReportMetric metric);
// Accuracy improves upward, every other reported metric downward.
bool higher_is_better(ReportMetric metric);

struct DeltaCell {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 for a single seed
  std::size_t count = 0;
};

struct DeltaRow {
  std::string dataset;
  std::string method;
  std::array<DeltaCell, 6> cells;  // kReportMetrics order
};

// Δ% of every row against the soft-voting row of the same dataset and seed,
// aggregated over seeds per (dataset, method). Methods keep their first
// appearance order. Throws InvalidArgument when a baseline row is missing.
std::vector<DeltaRow> report_delta(const std::vector<RunRow>& rows);

void write_delta_csv(const std::vector<DeltaRow>& rows, const std::string& path);
std::string delta_markdown(const std::vector<DeltaRow>& rows);
void write_delta_markdown(const std::vector<DeltaRow>& rows, const std::string& path);

}  // namespace reconcile
