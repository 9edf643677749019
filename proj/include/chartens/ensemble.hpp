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

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "chartens/label_align.hpp"
#include "chartens/table.hpp"

namespace chartens {

enum class Strategy { Median, Mean, Huber, WeightedConfidence, Ransac };

std::string_view to_string(Strategy s);
// Accepts median, mean, huber, weighted_confidence, ransac.
Strategy parse_strategy(std::string_view name);

struct EnsembleConfig {
  Strategy strategy = Strategy::Median;
  int k_max = 20;
  int patience = 2;
  double coverage = 0.95;
  double tolerance = 0.01;
  int initial_samples = 2;
  // When false the controller always draws k_max samples but still records
  // when the stopping rule would have fired.
  bool early_stopping = true;
  AlignConfig align;

  void validate() const;
};

struct UpdateLog {
  int k = 0;  // samples drawn when the update happened
  double fraction_unchanged = 0.0;
  bool stable = false;

  friend bool operator==(const UpdateLog&, const UpdateLog&) = default;
};

struct ConvergenceState {
  int consecutive_stable = 0;
  bool converged = false;
  int samples_used = 0;
  // Sample count at which the stopping rule first held.
  std::optional<int> converged_at;
  std::vector<UpdateLog> per_update_log;
};

struct UncertaintySummary {
  std::optional<double> median;
  std::optional<double> mean;
  std::optional<double> max;
};

struct SampleRecord {
  int draw_index = 0;
  std::string text;
  bool parsed = false;
  std::string error;  // empty when parsed
};

struct EnsembleResult {
  AggregatedTable table;
  ConvergenceState convergence;
  UncertaintySummary uncertainty;
  std::vector<NormalizedTable> raw_samples;  // successfully parsed samples, in draw order
  std::vector<SampleRecord> samples;         // every draw, including failures
};

// --- robust location estimates -------------------------------------------

double median(std::span<const double> v);
// Median absolute deviation around center.
double mad(std::span<const double> v, double center);

// Location estimate of a non-empty multiset. Result always lies in [min(v), max(v)].
//  median:              middle value, mean of the middle two for even sizes
//  mean:                arithmetic mean
//  ransac:              median of values within 2*MAD of the median
//  weighted_confidence: mean of the ceil(0.6 n) values closest to the median
//  huber:               IRLS, c = 1.345, scale 1.4826*MAD, start at median
double robust_estimate(std::span<const double> v, Strategy strategy);

// median |v - estimate| / |estimate|; undefined for an empty set or a zero estimate.
std::optional<double> cell_uncertainty(std::span<const double> v, double estimate);

UncertaintySummary summarize_uncertainty(const AggregatedTable& table);

// --- aggregation and convergence -----------------------------------------

// Clusters row and column labels across tables, prunes, and estimates every
// retained cell. Throws EmptyEnsemble if no row or no column cluster survives.
AggregatedTable aggregate(std::span<const NormalizedTable> tables, const EnsembleConfig& cfg);

struct Stability {
  bool stable = false;
  double fraction_unchanged = 0.0;
};

// Compares two aggregates over the union of their (row, column) label keys.
Stability update_is_stable(const AggregatedTable& prev, const AggregatedTable& next,
                           const EnsembleConfig& cfg);

// --- sampling loop --------------------------------------------------------

// Source of raw text candidates. sample() must be safe to call concurrently
// for distinct draw indices.
class Sampler {
 public:
  virtual ~Sampler() = default;
  virtual std::string sample(int draw_index) = 0;
};

// Draws initial_samples candidates, then one at a time until the aggregate is
// stable for `patience` consecutive updates or k_max draws were spent. Failed
// draws spend budget but do not trigger an update. AuthError aborts the run.
// Throws NoValidSamples if nothing parsed, EmptyEnsemble if the final
// aggregate is empty.
EnsembleResult run_ensemble(Sampler& sampler, const EnsembleConfig& cfg);

// Runs the same controller over previously recorded draw texts (no sampling).
// The budget is min(k_max, texts.size()).
EnsembleResult replay_ensemble(std::span<const std::string> texts, const EnsembleConfig& cfg);

// Parses every text that ingests and aggregates them all at once.
AggregatedTable reaggregate(std::span<const std::string> texts, const EnsembleConfig& cfg);

}  // namespace chartens
