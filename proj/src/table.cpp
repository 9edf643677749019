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

#include "chartens/table.hpp"

#include <charconv>
#include <system_error>

namespace chartens {

NormalizedTable::NormalizedTable(std::vector<std::string> rows, std::vector<std::string> cols,
                                 int source)
    : row_labels(std::move(rows)), col_labels(std::move(cols)), source_id(source) {
  values.assign(row_labels.size() * col_labels.size(), std::nullopt);
}

bool NormalizedTable::same_content(const NormalizedTable& other) const {
  return row_labels == other.row_labels && col_labels == other.col_labels &&
         values == other.values;
}

NormalizedTable AggregatedTable::values_table() const {
  NormalizedTable out(row_labels, col_labels);
  for (std::size_t i = 0; i < cells.size(); ++i) out.values[i] = cells[i].value;
  return out;
}

NormalizedTable transpose(const NormalizedTable& t) {
  NormalizedTable out(t.col_labels, t.row_labels, t.source_id);
  for (std::size_t r = 0; r < t.rows(); ++r)
    for (std::size_t c = 0; c < t.cols(); ++c) out.at(c, r) = t.at(r, c);
  return out;
}

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  if (res.ec != std::errc()) return std::to_string(v);
  return std::string(buf, res.ptr);
}

namespace {

template <typename CellText>
std::string render_tsv(const std::vector<std::string>& rows, const std::vector<std::string>& cols,
                       CellText&& cell_text) {
  std::string out;
  for (const auto& c : cols) {
    out += '\t';
    out += c;
  }
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out += '\n';
    out += rows[r];
    for (std::size_t c = 0; c < cols.size(); ++c) {
      out += '\t';
      out += cell_text(r, c);
    }
  }
  return out;
}

std::string value_text(const Value& v) { return v ? format_number(*v) : std::string(); }

}  // namespace

std::string to_tsv(const NormalizedTable& t) {
  return render_tsv(t.row_labels, t.col_labels,
                    [&](std::size_t r, std::size_t c) { return value_text(t.at(r, c)); });
}

std::string to_tsv(const AggregatedTable& t) {
  return render_tsv(t.row_labels, t.col_labels,
                    [&](std::size_t r, std::size_t c) { return value_text(t.at(r, c).value); });
}

}  // namespace chartens
