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

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <span>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "chartens/cli/config.hpp"
#include "chartens/cli/io.hpp"
#include "chartens/metrics.hpp"

namespace chartens::cli {

// --- extract ---------------------------------------------------------------

struct ExtractSummary {
  std::size_t entries = 0;
  std::size_t failed = 0;
  std::size_t converged = 0;
  double mean_samples = 0.0;       // over successful entries
  std::optional<double> mean_f1;   // over entries with ground truth
};

// One RunRecord per index entry under out_dir/<id>/, plus summary.tsv and
// config.json. Entry failures are recorded and do not stop the batch.
ExtractSummary cmd_extract(const DatasetIndex& index, const RunConfig& cfg, const fs::path& out_dir,
                           std::ostream& log);

// Sampler for one entry. The simulated sampler needs the truth table; its seed
// is derived from (cfg.noise.seed, cfg.seed, entry id).
std::unique_ptr<Sampler> make_sampler(const DatasetEntry& entry, const RunConfig& cfg,
                                      std::shared_ptr<RequestGate> gate,
                                      std::shared_ptr<RequestStats> stats);

std::uint64_t entry_seed(std::uint64_t base, std::string_view id);

// --- evaluate --------------------------------------------------------------

struct EvaluateSource {
  std::optional<fs::path> run_dir;   // reads <run_dir>/<id>/table.tsv and record.json
  std::optional<fs::path> pred_dir;  // reads <pred_dir>/<id>.tsv
};

struct EvaluateResult {
  CorpusReport report;
  std::vector<std::string> missing_truth;  // ids skipped for lack of ground truth
  std::vector<std::string> missing_prediction;
};

EvaluateResult cmd_evaluate(const DatasetIndex& index, const EvaluateSource& src, const MetricConfig& cfg,
                            const std::vector<std::string>& group_by, std::ostream& log);

// --- simulate --------------------------------------------------------------

// Year-by-country table with a random walk per column; labels are mutually
// dissimilar except for the years.
NormalizedTable synthetic_truth(std::mt19937_64& rng, std::size_t rows, std::size_t cols);
std::vector<NormalizedTable> synthetic_corpus(std::size_t n, std::size_t rows, std::size_t cols,
                                              std::uint64_t seed);

struct ChartOutcome {
  std::string id;
  bool failed = false;
  std::string error;
  double single_f1 = 0.0;  // mean F1 of the individual draws; unparsed draws score 0
  double f1 = 0.0;         // ensemble F1; 0 when failed
  ErrorBreakdown breakdown;
  ConvergenceState convergence;
  UncertaintySummary uncertainty;
  std::vector<std::string> texts;
  std::optional<AggregatedTable> table;
};

// Ensemble over the given texts (replayed, or sampled on demand) scored
// against truth.
ChartOutcome score_run(std::string id, const NormalizedTable& truth, const EnsembleResult& result,
                       const MetricConfig& metric);
ChartOutcome run_simulated_chart(std::string id, const NormalizedTable& truth, const NoiseModel& nm,
                                 const EnsembleConfig& ens, const MetricConfig& metric);

struct SimulateRow {
  std::string strategy;
  std::optional<double> sigma;  // absent when sigma varies per chart
  std::size_t charts = 0;
  std::size_t failed = 0;
  double single_f1 = 0.0;
  double ensemble_f1 = 0.0;
  double convergence_rate = 0.0;
  double mean_samples = 0.0;
  std::optional<double> spearman_u_mean_f1;
  ErrorBreakdown breakdown;
};

struct SimulateOptions {
  RunConfig cfg;
  std::vector<NormalizedTable> truths;
  std::vector<Strategy> strategies;  // empty = cfg.ensemble.strategy
  std::vector<double> sigmas;        // empty = cfg.noise.value_noise_rel
  bool sigma_per_chart = false;      // draw each chart's sigma from `sigmas`
  int repeats = 1;                   // independent noise seeds per chart
};

std::vector<SimulateRow> cmd_simulate(const SimulateOptions& opts, std::vector<ChartOutcome>* outcomes = nullptr);
std::string simulate_tsv(const std::vector<SimulateRow>& rows);

// Average-rank Spearman correlation; nullopt when fewer than two points or a
// constant input.
std::optional<double> spearman(std::span<const double> x, std::span<const double> y);

// --- sweep -----------------------------------------------------------------

enum class SweepAxis { Patience, Coverage, Tolerance, Prune, K, Temperature };
SweepAxis parse_axis(std::string_view name);  // throws UnknownAxis
std::string_view to_string(SweepAxis axis);

struct SweepRow {
  double value = 0.0;
  std::size_t charts = 0;
  double f1 = 0.0;
  double mean_samples = 0.0;
  double convergence_rate = 0.0;
};

RunConfig with_axis(RunConfig cfg, SweepAxis axis, double value);

// Replays the stored samples of every record in run_dir (no sampling).
std::vector<SweepRow> sweep_stored(const DatasetIndex& index, const fs::path& run_dir, const RunConfig& base,
                                   SweepAxis axis, const std::vector<double>& values, std::ostream& log);
// Fresh simulated ensembles per value.
std::vector<SweepRow> sweep_simulated(const std::vector<NormalizedTable>& truths, const RunConfig& base,
                                      SweepAxis axis, const std::vector<double>& values);
// Live extraction per value over an index; nothing is persisted.
std::vector<SweepRow> sweep_live(const DatasetIndex& index, const RunConfig& base, SweepAxis axis,
                                 const std::vector<double>& values, std::ostream& log);
std::string sweep_tsv(SweepAxis axis, const std::vector<SweepRow>& rows);

// --- benchgen --------------------------------------------------------------

struct BenchgenOptions {
  fs::path source_csv;  // long format: indicator,country,year,value
  std::size_t n_charts = 16;
  std::uint64_t seed = 0;
  fs::path out_dir;
  bool balanced = true;  // exact type x backend balance; i.i.d. uniform otherwise
  std::optional<std::string> render_cmd;
};

extern const std::vector<std::string> kChartTypes;
extern const std::vector<std::string> kBackends;

struct Series {
  std::string indicator;
  std::string country;
  std::map<int, std::optional<double>> points;  // year -> value
};

std::vector<Series> read_long_csv(const fs::path& path);
// Fewer than half of the indicator's years missing and no interior gap.
bool series_usable(const Series& s, int first_year, int last_year);

struct BenchgenResult {
  fs::path spec_path;
  fs::path index_path;
  std::size_t charts = 0;
};

BenchgenResult cmd_benchgen(const BenchgenOptions& opts, std::ostream& log);

// --- entry point -----------------------------------------------------------

int run_cli(int argc, char** argv);

}  // namespace chartens::cli
