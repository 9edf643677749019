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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ostream>
#include <set>
#include <sstream>

#include "chartens/cli/commands.hpp"
#include "chartens/error.hpp"
#include "chartens/tsv_ingest.hpp"

namespace chartens::cli {

using nlohmann::json;

const std::vector<std::string> kChartTypes = {"line", "area", "grouped_bar", "stacked_bar"};
const std::vector<std::string> kBackends = {"matplotlib", "seaborn", "plotly", "altair"};

namespace {

const std::vector<std::string> kFonts = {"DejaVu Sans", "Liberation Serif", "Liberation Mono", "Noto Sans",
                                         "Roboto", "Open Sans"};
const std::vector<std::string> kPalettes = {"tab10", "Set2", "Dark2", "viridis", "Paired", "colorblind", "pastel"};
const std::vector<std::string> kGridStyles = {"solid", "dashed", "dotted"};
const std::vector<std::string> kLineStyles = {"solid", "dashed", "dashdot", "dotted"};
const std::vector<std::string> kMarkers = {"o", "s", "^", "D", "x"};
const std::vector<std::pair<double, double>> kFigureSizes = {{6, 4}, {8, 5}, {10, 6}, {7, 7}, {9, 4.5}};
constexpr std::size_t kMaxGroupedBarYears = 12;

// Splits one CSV record; handles quoted fields with doubled quotes.
std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        out.back() += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.emplace_back();
    } else if (ch != '\r') {
      out.back() += ch;
    }
  }
  return out;
}

std::string clean_label(std::string s) {
  for (auto& ch : s)
    if (ch == '\t' || ch == '\n' || ch == '\r') ch = ' ';
  const auto b = s.find_first_not_of(' ');
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(' ') - b + 1);
}

template <typename T>
const T& pick(const std::vector<T>& v, std::mt19937_64& rng) {
  return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

json style_pools() {
  json sizes = json::array();
  for (auto [w, h] : kFigureSizes) sizes.push_back({w, h});
  return {{"font_family", kFonts},        {"palette", kPalettes},   {"grid_style", kGridStyles},
          {"line_style", kLineStyles},    {"marker", kMarkers},     {"figure_size", sizes},
          {"font_size", {8, 16}},         {"transparency", {0.6, 1.0}}};
}

json random_style(std::mt19937_64& rng, std::size_t n_series) {
  json line_styles = json::array(), markers = json::array();
  for (std::size_t i = 0; i < n_series; ++i) {
    line_styles.push_back(pick(kLineStyles, rng));
    markers.push_back(pick(kMarkers, rng));
  }
  const auto [w, h] = pick(kFigureSizes, rng);
  const double alpha = std::round(std::uniform_real_distribution<double>(0.6, 1.0)(rng) * 100.0) / 100.0;
  return {{"font_family", pick(kFonts, rng)},
          {"font_size", std::uniform_int_distribution<int>(8, 16)(rng)},
          {"palette", pick(kPalettes, rng)},
          {"grid", std::uniform_int_distribution<int>(0, 1)(rng) == 1},
          {"grid_style", pick(kGridStyles, rng)},
          {"line_styles", line_styles},
          {"markers", markers},
          {"transparency", alpha},
          {"figure_size", {w, h}}};
}

}  // namespace

std::vector<Series> read_long_csv(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::InsufficientSeries, "empty source table " + path.string());
  auto header = split_csv(line);
  for (auto& h : header) {
    h = clean_label(h);
    std::transform(h.begin(), h.end(), h.begin(), [](unsigned char c) { return std::tolower(c); });
  }
  auto col = [&](const char* name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw Error(ErrorKind::InvalidConfig, std::string("source table lacks column ") + name);
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t ci = col("indicator"), cc = col("country"), cy = col("year"), cv = col("value");

  std::map<std::pair<std::string, std::string>, Series> by_key;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \r") == std::string::npos) continue;
    auto f = split_csv(line);
    if (f.size() < header.size())
      throw Error(ErrorKind::InvalidConfig, "line " + std::to_string(lineno) + " has too few fields");
    const auto year = parse_number(f[cy]);
    if (!year || *year != std::floor(*year))
      throw Error(ErrorKind::InvalidConfig, "line " + std::to_string(lineno) + ": bad year '" + f[cy] + "'");
    Series& s = by_key[{clean_label(f[ci]), clean_label(f[cc])}];
    s.indicator = clean_label(f[ci]);
    s.country = clean_label(f[cc]);
    s.points[static_cast<int>(*year)] = parse_number(f[cv]);
  }
  std::vector<Series> out;
  for (auto& [_, s] : by_key) out.push_back(std::move(s));
  return out;
}

bool series_usable(const Series& s, int first_year, int last_year) {
  std::vector<int> observed;
  for (const auto& [year, v] : s.points)
    if (v && year >= first_year && year <= last_year) observed.push_back(year);
  const int span = last_year - first_year + 1;
  const int missing = span - static_cast<int>(observed.size());
  if (observed.size() < 3 || 2 * missing > span) return false;
  // Contiguous between the first and last observation.
  return observed.back() - observed.front() + 1 == static_cast<int>(observed.size());
}

BenchgenResult cmd_benchgen(const BenchgenOptions& opts, std::ostream& log) {
  if (opts.n_charts == 0) throw Error(ErrorKind::InvalidConfig, "number of charts must be positive");
  const auto all = read_long_csv(opts.source_csv);

  std::map<std::string, std::pair<int, int>> year_range;
  for (const auto& s : all)
    for (const auto& [year, _] : s.points) {
      auto [it, fresh] = year_range.try_emplace(s.indicator, year, year);
      if (!fresh) it->second = {std::min(it->second.first, year), std::max(it->second.second, year)};
    }
  std::map<std::string, std::vector<const Series*>> usable;
  std::size_t dropped = 0;
  for (const auto& s : all) {
    const auto [lo, hi] = year_range[s.indicator];
    if (series_usable(s, lo, hi))
      usable[s.indicator].push_back(&s);
    else
      ++dropped;
  }
  log << "usable series: " << all.size() - dropped << " of " << all.size() << "\n";

  std::mt19937_64 rng(opts.seed);
  std::vector<std::pair<std::string, std::string>> assignment;
  if (opts.balanced) {
    std::vector<std::pair<std::string, std::string>> combos;
    for (const auto& t : kChartTypes)
      for (const auto& b : kBackends) combos.emplace_back(t, b);
    while (assignment.size() < opts.n_charts) {
      std::shuffle(combos.begin(), combos.end(), rng);
      for (const auto& c : combos)
        if (assignment.size() < opts.n_charts) assignment.push_back(c);
    }
    std::shuffle(assignment.begin(), assignment.end(), rng);
  } else {
    for (std::size_t i = 0; i < opts.n_charts; ++i) assignment.emplace_back(pick(kChartTypes, rng), pick(kBackends, rng));
  }

  std::set<const Series*> used;
  json charts = json::array();
  DatasetIndex index;
  for (std::size_t i = 0; i < opts.n_charts; ++i) {
    std::vector<std::string> open;
    for (const auto& [ind, list] : usable) {
      std::size_t free = 0;
      for (const auto* s : list) free += !used.count(s);
      if (free >= 2) open.push_back(ind);
    }
    if (open.empty())
      throw Error(ErrorKind::InsufficientSeries, "only " + std::to_string(i) + " of " +
                                                     std::to_string(opts.n_charts) + " charts could be formed");
    const std::string& indicator = pick(open, rng);
    std::vector<const Series*> free;
    for (const auto* s : usable[indicator])
      if (!used.count(s)) free.push_back(s);
    std::shuffle(free.begin(), free.end(), rng);
    std::size_t k = std::min<std::size_t>(free.size(), std::uniform_int_distribution<int>(2, 3)(rng));
    // Never strand a single series of this indicator.
    if (free.size() - k == 1) k = free.size() == 4 ? 2 : 3;
    free.resize(k);
    std::sort(free.begin(), free.end(), [](auto* a, auto* b) { return a->country < b->country; });
    for (const auto* s : free) used.insert(s);

    std::set<int> year_set;
    for (const auto* s : free)
      for (const auto& [year, v] : s->points)
        if (v) year_set.insert(year);
    std::vector<int> years(year_set.begin(), year_set.end());
    const auto& [chart_type, backend] = assignment[i];
    if (chart_type == "grouped_bar" && years.size() > kMaxGroupedBarYears) {
      std::vector<int> sub;
      for (std::size_t j = 0; j < kMaxGroupedBarYears; ++j)
        sub.push_back(years[static_cast<std::size_t>(
            std::lround(static_cast<double>(j) * static_cast<double>(years.size() - 1) /
                        static_cast<double>(kMaxGroupedBarYears - 1)))]);
      years = std::move(sub);
    }

    std::vector<std::string> rows, cols;
    for (int y : years) rows.push_back(std::to_string(y));
    for (const auto* s : free) cols.push_back(s->country);
    NormalizedTable table(rows, cols);
    json values = json::array();
    for (std::size_t r = 0; r < years.size(); ++r) {
      json row = json::array();
      for (std::size_t c = 0; c < free.size(); ++c) {
        auto it = free[c]->points.find(years[r]);
        if (it != free[c]->points.end()) table.at(r, c) = it->second;
        row.push_back(table.at(r, c) ? json(*table.at(r, c)) : json());
      }
      values.push_back(row);
    }

    char id[32];
    std::snprintf(id, sizeof(id), "chart_%04zu", i);
    const std::string truth_rel = std::string("truth/") + id + ".tsv";
    const std::string image_rel = std::string("images/") + id + ".png";
    write_file(opts.out_dir / truth_rel, to_tsv(table) + "\n");
    charts.push_back({{"id", id},
                      {"chart_type", chart_type},
                      {"backend", backend},
                      {"indicator", indicator},
                      {"truth_path", truth_rel},
                      {"output_path", image_rel},
                      {"series", {{"row_labels", rows}, {"col_labels", cols}, {"values", values}}},
                      {"style", random_style(rng, free.size())}});
    index.entries.push_back({id, opts.out_dir / image_rel, opts.out_dir / truth_rel,
                             {{"chart_type", chart_type}, {"library", backend}, {"indicator", indicator}}});
  }

  BenchgenResult res;
  res.charts = opts.n_charts;
  res.spec_path = opts.out_dir / "spec.json";
  res.index_path = opts.out_dir / "index.json";
  json spec = {{"seed", opts.seed},
               {"balanced", opts.balanced},
               {"chart_types", kChartTypes},
               {"backends", kBackends},
               {"style_pools", style_pools()},
               {"charts", charts}};
  write_file(res.spec_path, spec.dump(2) + "\n");
  write_index(index, res.index_path);
  log << "wrote " << opts.n_charts << " chart specs to " << res.spec_path.string() << "\n";

  if (opts.render_cmd) {
    const std::string cmd = *opts.render_cmd + " '" + res.spec_path.string() + "'";
    log << "rendering: " << cmd << "\n";
    if (std::system(cmd.c_str()) != 0) throw Error(ErrorKind::Io, "render command failed: " + cmd);
  }
  return res;
}

}  // namespace chartens::cli
