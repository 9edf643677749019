// Copyright 2026 The chartens Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace chartens {

// A cell value: a finite double, or missing.
using Value = std::optional<double>;

// Pre-normalization grid of string cells, one per sampled output.
struct RawTable {
  std::vector<std::vector<std::string>> rows;
  int source_id = 0;

  std::size_t width() const { return rows.empty() ? 0 : rows.front().size(); }
};

// Per-sample numeric table. Values are row-major; rows() >= cols() after ingest.
struct NormalizedTable {
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
  std::vector<Value> values;
  int source_id = 0;

  NormalizedTable() = default;
  NormalizedTable(std::vector<std::string> rows, std::vector<std::string> cols, int source = 0);

  std::size_t rows() const { return row_labels.size(); }
  std::size_t cols() const { return col_labels.size(); }
  const Value& at(std::size_t r, std::size_t c) const { return values[r * cols() + c]; }
  Value& at(std::size_t r, std::size_t c) { return values[r * cols() + c]; }

  // Equal labels and values; source_id is ignored.
  bool same_content(const NormalizedTable& other) const;

  friend bool operator==(const NormalizedTable&, const NormalizedTable&) = default;
};

struct AggregatedCell {
  Value value;
  std::size_t support = 0;
  // Relative MAD; defined iff value is present and non-zero.
  std::optional<double> uncertainty;

  friend bool operator==(const AggregatedCell&, const AggregatedCell&) = default;
};

// Consensus table. Labels are canonical cluster labels in lexicographic order.
struct AggregatedTable {
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
  std::vector<AggregatedCell> cells;

  std::size_t rows() const { return row_labels.size(); }
  std::size_t cols() const { return col_labels.size(); }
  const AggregatedCell& at(std::size_t r, std::size_t c) const { return cells[r * cols() + c]; }
  AggregatedCell& at(std::size_t r, std::size_t c) { return cells[r * cols() + c]; }

  // Drops support/uncertainty, keeping labels and consensus values.
  NormalizedTable values_table() const;

  friend bool operator==(const AggregatedTable&, const AggregatedTable&) = default;
};

NormalizedTable transpose(const NormalizedTable& t);

// Shortest decimal text that parses back to exactly the same double.
std::string format_number(double v);

// Canonical TSV: header row with empty top-left cell, first column row labels,
// missing cells as empty strings, '\n' row separators, no trailing newline.
std::string to_tsv(const NormalizedTable& t);
std::string to_tsv(const AggregatedTable& t);

}  // namespace chartens
