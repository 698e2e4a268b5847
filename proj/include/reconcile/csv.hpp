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

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace reconcile::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Position of a header column, or -1.
  long column_index(std::string_view name) const;
};

// Parses comma-separated text with a header row. Fields may be double-quoted
// ("" escapes a quote). Surrounding whitespace of unquoted fields is trimmed.
Table parse(std::istream& in);
Table read_file(const std::string& path);

std::vector<std::string> split_line(std::string_view line);

// Quotes a field if it contains a separator, quote or newline.
std::string escape(std::string_view field);

// `digits` significant digits, printf %g style.
std::string format_real(double value, int digits);

}  // namespace reconcile::csv
