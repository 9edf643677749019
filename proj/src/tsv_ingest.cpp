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

#include "chartens/tsv_ingest.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>

#include "chartens/error.hpp"

namespace chartens {
namespace {

constexpr std::string_view kFenceOpen = "```tsv";
constexpr std::string_view kFence = "```";

// Tabs are structural (the canonical header starts with one), so only spaces
// and line breaks are trimmed from block ends.
std::string_view trim_block(std::string_view s) {
  constexpr std::string_view ws = " \r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::string_view trim_cell(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n\f\v";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

bool consume_prefix(std::string_view& s, std::string_view prefix) {
  if (s.substr(0, prefix.size()) != prefix) return false;
  s.remove_prefix(prefix.size());
  return true;
}

// ASCII and U+2212 minus, or plus.
int consume_sign(std::string_view& s) {
  if (consume_prefix(s, "-") || consume_prefix(s, "\xE2\x88\x92")) return -1;
  if (consume_prefix(s, "+")) return 1;
  return 0;
}

bool consume_currency(std::string_view& s) {
  static constexpr std::array<std::string_view, 4> symbols = {"$", "\xE2\x82\xAC", "\xC2\xA3",
                                                              "\xC2\xA5"};
  for (auto sym : symbols)
    if (consume_prefix(s, sym)) return true;
  return false;
}

}  // namespace

std::string extract_tsv_block(std::string_view text) {
  std::string_view body;
  auto open = text.find(kFenceOpen);
  if (open == std::string_view::npos) {
    body = trim_block(text);
  } else {
    auto start = open + kFenceOpen.size();
    auto eol = text.find('\n', start);
    start = eol == std::string_view::npos ? text.size() : eol + 1;
    auto close = text.find(kFence, start);
    body = trim_block(text.substr(start, close == std::string_view::npos ? std::string_view::npos
                                                                          : close - start));
  }
  if (body.find_first_of("\t\n") == std::string_view::npos)
    throw Error(ErrorKind::EmptyOutput, "no tabular content in sampler output");
  return std::string(body);
}

RawTable parse_raw(std::string_view tsv, int source_id) {
  RawTable raw;
  raw.source_id = source_id;
  std::size_t pos = 0;
  while (pos <= tsv.size()) {
    auto eol = tsv.find('\n', pos);
    auto line = tsv.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(' ') != std::string_view::npos) {
      std::vector<std::string> cells;
      std::size_t cpos = 0;
      while (true) {
        auto tab = line.find('\t', cpos);
        cells.emplace_back(line.substr(cpos, tab == std::string_view::npos ? std::string_view::npos
                                                                           : tab - cpos));
        if (tab == std::string_view::npos) break;
        cpos = tab + 1;
      }
      raw.rows.push_back(std::move(cells));
    }
    if (eol == std::string_view::npos) break;
    pos = eol + 1;
  }
  if (raw.rows.size() < 2)
    throw Error(ErrorKind::ParseFailure, "need a header row and at least one data row");

  std::map<std::size_t, std::size_t> counts;
  for (const auto& row : raw.rows) ++counts[row.size()];
  std::size_t modal = 0, best = 0;
  for (auto [width, n] : counts)
    if (n >= best) {  // ascending widths, so >= prefers the wider on ties
      modal = width;
      best = n;
    }
  if (modal < 2) throw Error(ErrorKind::ParseFailure, "modal row width below two");
  for (auto& row : raw.rows) row.resize(modal);
  return raw;
}

Value parse_number(std::string_view cell) {
  auto s = trim_cell(cell);
  bool negate = false;
  if (s.size() >= 2 && s.front() == '(' && s.back() == ')') {
    negate = true;
    s = trim_cell(s.substr(1, s.size() - 2));
  }
  int sign = consume_sign(s);
  if (consume_currency(s) && sign == 0) sign = consume_sign(s);
  if (sign < 0) negate = !negate;
  if (!s.empty() && s.back() == '%') s = trim_cell(s.substr(0, s.size() - 1));

  std::string digits;
  digits.reserve(s.size());
  for (char ch : s)
    if (ch != ',') digits += ch;
  if (digits.empty()) return std::nullopt;
  if (!(std::isdigit(static_cast<unsigned char>(digits.front())) || digits.front() == '.'))
    return std::nullopt;

  double v = 0.0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
  if (ec != std::errc() || ptr != digits.data() + digits.size() || !std::isfinite(v))
    return std::nullopt;
  return negate ? -v : v;
}

NormalizedTable normalize(const RawTable& raw) {
  if (raw.rows.size() < 2 || raw.width() < 2)
    throw Error(ErrorKind::ParseFailure, "empty value region");
  const std::size_t width = raw.width();
  std::vector<std::string> cols(raw.rows[0].begin() + 1, raw.rows[0].end());
  std::vector<std::string> rows;
  rows.reserve(raw.rows.size() - 1);
  for (std::size_t r = 1; r < raw.rows.size(); ++r) rows.push_back(raw.rows[r][0]);

  NormalizedTable t(std::move(rows), std::move(cols), raw.source_id);
  for (std::size_t r = 0; r < t.rows(); ++r)
    for (std::size_t c = 0; c + 1 < width; ++c) t.at(r, c) = parse_number(raw.rows[r + 1][c + 1]);
  if (t.cols() > t.rows()) return transpose(t);
  return t;
}

NormalizedTable ingest(std::string_view text, int source_id) {
  return normalize(parse_raw(extract_tsv_block(text), source_id));
}

}  // namespace chartens
