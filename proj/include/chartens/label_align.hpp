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
#include <string>
#include <string_view>
#include <vector>

namespace chartens {

struct AlignConfig {
  double cluster_tau = 0.5;     // minimum similarity to a cluster representative
  double prune_fraction = 0.2;  // minimum fraction of tables a cluster must appear in

  void validate() const;
};

// Labels of one sampled table, in table order.
struct LabelList {
  int source_id = 0;
  std::vector<std::string> labels;
};

struct ClusterMember {
  std::string label;
  int source_id = 0;
  std::size_t position = 0;  // index within its table's label list
};

struct LabelCluster {
  std::vector<ClusterMember> members;
  std::string representative;  // first label assigned
  std::string canonical;       // most frequent member label
  std::size_t support = 0;     // distinct source tables

  bool has_source(int source_id) const;
};

// Edit distance over Unicode code points (invalid UTF-8 bytes count as one unit each).
std::size_t levenshtein(std::string_view a, std::string_view b);

// Lower-cased (ASCII) and whitespace-trimmed copy used for all label comparisons.
std::string comparison_form(std::string_view label);

// Number of code points in s.
std::size_t code_point_length(std::string_view s);

// 1 - lev/max_len on comparison forms; 1 for two empty labels.
double nls(std::string_view a, std::string_view b);

// Greedy single-pass clustering. Tables are processed by ascending source_id,
// labels by position; each label joins the most similar qualifying cluster
// (earliest cluster on ties) or starts a new one.
std::vector<LabelCluster> greedy_cluster(std::vector<LabelList> labels_by_table,
                                         const AlignConfig& cfg);

// Keeps clusters with support >= ceil(prune_fraction * n_tables); keeps all
// when prune_fraction is zero.
std::vector<LabelCluster> prune(std::vector<LabelCluster> clusters, std::size_t n_tables,
                                const AlignConfig& cfg);

// Minimum support a cluster needs to survive pruning.
std::size_t prune_min_support(std::size_t n_tables, double prune_fraction);

// Most frequent member label; ties go to the lexicographically smallest.
std::string canonical(const LabelCluster& cluster);

}  // namespace chartens
