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

#include "chartens/label_align.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "chartens/error.hpp"

namespace chartens {
namespace {

std::vector<char32_t> decode_utf8(std::string_view s) {
  std::vector<char32_t> out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    auto b0 = static_cast<unsigned char>(s[i]);
    std::size_t len = b0 < 0x80 ? 1 : (b0 >> 5) == 0x6 ? 2 : (b0 >> 4) == 0xE ? 3 : (b0 >> 3) == 0x1E ? 4 : 0;
    bool ok = len != 0 && i + len <= s.size();
    for (std::size_t k = 1; ok && k < len; ++k)
      ok = (static_cast<unsigned char>(s[i + k]) & 0xC0) == 0x80;
    if (!ok) {
      // Stray byte: keep it as its own unit, offset out of the code point range.
      out.push_back(0x110000u + b0);
      ++i;
      continue;
    }
    char32_t cp = len == 1 ? b0 : len == 2 ? (b0 & 0x1F) : len == 3 ? (b0 & 0x0F) : (b0 & 0x07);
    for (std::size_t k = 1; k < len; ++k) cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3F);
    out.push_back(cp);
    i += len;
  }
  return out;
}

}  // namespace

void AlignConfig::validate() const {
  if (!(cluster_tau >= 0.0 && cluster_tau <= 1.0))
    throw Error(ErrorKind::InvalidConfig, "cluster_tau must lie in [0,1]");
  if (!(prune_fraction >= 0.0 && prune_fraction <= 1.0))
    throw Error(ErrorKind::InvalidConfig, "prune_fraction must lie in [0,1]");
}

bool LabelCluster::has_source(int source_id) const {
  return std::any_of(members.begin(), members.end(),
                     [&](const ClusterMember& m) { return m.source_id == source_id; });
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
  auto x = decode_utf8(a);
  auto y = decode_utf8(b);
  if (x.size() < y.size()) std::swap(x, y);
  std::vector<std::size_t> row(y.size() + 1);
  for (std::size_t j = 0; j <= y.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= x.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= y.size(); ++j) {
      std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (x[i - 1] == y[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[y.size()];
}

std::string comparison_form(std::string_view label) {
  constexpr std::string_view ws = " \t\r\n\f\v";
  auto b = label.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = label.find_last_not_of(ws);
  std::string out(label.substr(b, e - b + 1));
  for (auto& ch : out)
    if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch - 'A' + 'a');
  return out;
}

std::size_t code_point_length(std::string_view s) { return decode_utf8(s).size(); }

double nls(std::string_view a, std::string_view b) {
  auto x = comparison_form(a);
  auto y = comparison_form(b);
  auto longest = std::max(code_point_length(x), code_point_length(y));
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(levenshtein(x, y)) / static_cast<double>(longest);
}

std::vector<LabelCluster> greedy_cluster(std::vector<LabelList> labels_by_table,
                                         const AlignConfig& cfg) {
  std::stable_sort(labels_by_table.begin(), labels_by_table.end(),
                   [](const LabelList& a, const LabelList& b) { return a.source_id < b.source_id; });

  std::vector<LabelCluster> clusters;
  // Comparison form of each representative, computed once.
  std::vector<std::string> rep_forms;
  for (const auto& table : labels_by_table) {
    for (std::size_t pos = 0; pos < table.labels.size(); ++pos) {
      const auto& label = table.labels[pos];
      const auto form = comparison_form(label);
      const auto form_len = code_point_length(form);
      std::size_t best = clusters.size();
      double best_sim = -1.0;
      for (std::size_t k = 0; k < clusters.size(); ++k) {
        if (clusters[k].has_source(table.source_id)) continue;
        auto longest = std::max(form_len, code_point_length(rep_forms[k]));
        double sim = longest == 0 ? 1.0
                                  : 1.0 - static_cast<double>(levenshtein(form, rep_forms[k])) /
                                              static_cast<double>(longest);
        if (sim >= cfg.cluster_tau && sim > best_sim) {
          best = k;
          best_sim = sim;
        }
      }
      if (best == clusters.size()) {
        clusters.emplace_back();
        clusters.back().representative = label;
        rep_forms.push_back(form);
      }
      auto& cluster = clusters[best];
      cluster.members.push_back({label, table.source_id, pos});
      ++cluster.support;
    }
  }
  for (auto& c : clusters) c.canonical = canonical(c);
  return clusters;
}

std::size_t prune_min_support(std::size_t n_tables, double prune_fraction) {
  if (prune_fraction <= 0.0) return 0;
  // The epsilon absorbs representation error such as 0.3 * 10 = 3.0000000000000004.
  return static_cast<std::size_t>(std::ceil(prune_fraction * static_cast<double>(n_tables) - 1e-9));
}

std::vector<LabelCluster> prune(std::vector<LabelCluster> clusters, std::size_t n_tables,
                                const AlignConfig& cfg) {
  const auto min_support = prune_min_support(n_tables, cfg.prune_fraction);
  std::erase_if(clusters, [&](const LabelCluster& c) { return c.support < min_support; });
  return clusters;
}

std::string canonical(const LabelCluster& cluster) {
  std::map<std::string, std::size_t> counts;
  for (const auto& m : cluster.members) ++counts[m.label];
  std::string best;
  std::size_t best_n = 0;
  for (const auto& [label, n] : counts)  // lexicographic order; strict > keeps the smallest on ties
    if (n > best_n) {
      best = label;
      best_n = n;
    }
  return best;
}

}  // namespace chartens
