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

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chartens/assignment.hpp"
#include "chartens/table.hpp"

namespace chartens {

struct Triple {
  std::string row_key;
  std::string col_key;
  double value = 0.0;

  friend bool operator==(const Triple&, const Triple&) = default;
};

struct MetricConfig {
  double tau_key = 0.5;    // key distances above this are clipped to 1
  double theta_val = 0.1;  // relative errors above this are clipped to 1

  void validate() const;
};

// Percentages in [0, 100].
struct RmsScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Percentages summing to 100; `correct` equals the example's RMS F1.
struct ErrorBreakdown {
  double correct = 0.0;
  double value_err = 0.0;
  double label_err = 0.0;
  double missing = 0.0;
  double extra = 0.0;
};

// One triple per non-missing cell.
std::vector<Triple> to_triples(const NormalizedTable& t);
std::vector<Triple> to_triples(const AggregatedTable& t);
std::vector<Triple> swap_keys(std::vector<Triple> triples);
std::vector<double> values_of(std::span<const Triple> triples);

// Separator placed between row and column header when forming a key.
inline constexpr char kKeySeparator = '\x1f';

// Thresholded normalized Levenshtein distance between concatenated keys.
double key_distance(const Triple& p, const Triple& t, const MetricConfig& cfg);
// Thresholded relative error; t == 0 scores 0 iff p == 0.
double value_distance(double p, double t, const MetricConfig& cfg);
double entry_similarity(const Triple& p, const Triple& t, const MetricConfig& cfg);

// Winning matching of the RMS computation, kept for the error breakdown.
struct RmsMatch {
  RmsScores scores;
  bool transposed = false;
  Assignment assignment;   // rows: predictions, cols: truth
  CostMatrix key_cost;     // key distances of the winning orientation
  std::vector<double> value_dist;  // per prediction row; meaningful when matched
};

RmsMatch rms_match(std::span<const Triple> prediction, std::span<const Triple> truth,
                   const MetricConfig& cfg);
RmsScores rms_scores(std::span<const Triple> prediction, std::span<const Triple> truth,
                     const MetricConfig& cfg);

// Relative number set similarity in [0, 1]; 1 when both sets are empty.
double rnss(std::span<const double> predicted, std::span<const double> truth);
// Mean clipped relative distance over matched pairs; throws NoMatchedPairs.
double rd(std::span<const double> predicted, std::span<const double> truth);

ErrorBreakdown error_breakdown(std::span<const Triple> prediction, std::span<const Triple> truth,
                               const MetricConfig& cfg);

// --- corpus reports --------------------------------------------------------

struct ExampleInput {
  std::string id;
  std::vector<Triple> prediction;
  std::vector<Triple> truth;
  std::map<std::string, std::string> metadata;
  std::optional<int> samples_used;
  std::optional<bool> converged;
};

struct ExampleScore {
  std::string id;
  RmsScores rms;
  double rnss = 0.0;
  std::optional<double> rd;
  ErrorBreakdown breakdown;
  std::map<std::string, std::string> metadata;
  std::optional<int> samples_used;
  std::optional<bool> converged;
};

struct GroupSummary {
  std::string key;    // "overall" for the whole corpus
  std::string value;  // "all" for the whole corpus
  std::size_t count = 0;
  RmsScores rms;  // macro averages
  double rnss = 0.0;
  std::optional<double> rd;
  ErrorBreakdown breakdown;
  std::optional<double> mean_samples;
  std::optional<double> convergence_rate;
};

struct CorpusReport {
  std::vector<ExampleScore> examples;
  GroupSummary overall;
  std::vector<GroupSummary> groups;
};

ExampleScore score_example(const ExampleInput& ex, const MetricConfig& cfg);

// Throws EmptyCorpus.
CorpusReport corpus_report(std::span<const ExampleInput> examples, const MetricConfig& cfg,
                           std::span<const std::string> group_by = {});

// Summary rows (overall first, then groups); percentages with two decimals.
std::string report_tsv(const CorpusReport& report);
std::string report_json(const CorpusReport& report);

}  // namespace chartens
