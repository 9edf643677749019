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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "chartens/cli/commands.hpp"
#include "chartens/error.hpp"
#include "chartens/metrics.hpp"
#include "oracles.hpp"

using namespace chartens;
using namespace chartens::cli;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(const std::string& name, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.pass) ++failures;
  std::printf("%s  %-28s %s [%.2fs]\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), secs);
  std::fflush(stdout);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

std::vector<Triple> random_triples(std::mt19937_64& rng, std::size_t n) {
  static const std::vector<std::string> rows = {"2019", "2020", "2021", "1999", "Total", "Q1", "Q2"};
  static const std::vector<std::string> cols = {"Kenya", "Kenia", "Peru", "Chile", "GDP", "gdp", "Exports"};
  std::uniform_real_distribution<double> u(-50.0, 150.0);
  std::vector<Triple> out;
  for (std::size_t i = 0; i < n; ++i)
    out.push_back({rows[rng() % rows.size()], cols[rng() % cols.size()], std::round(u(rng))});
  return out;
}

// Corpus used by the gain and aggregator-ordering criteria.
RunConfig noisy_config() {
  RunConfig cfg;
  cfg.noise.value_noise_rel = 0.08;
  cfg.noise.p_drop_row = 0.1;
  cfg.noise.p_label_typo = 0.1;
  cfg.noise.p_extra_row = 0.1;
  cfg.noise.seed = 2024;
  cfg.ensemble.k_max = 15;
  cfg.seed = 17;
  return cfg;
}

}  // namespace

int main() {
  criterion("matching-oracle", [] {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(1);
    MetricConfig cfg;
    double worst = 0.0;
    for (int i = 0; i < 500; ++i) {
      auto p = random_triples(rng, 1 + rng() % 6);
      auto t = random_triples(rng, 1 + rng() % 6);
      auto m = rms_match(p, t, cfg);
      worst = std::max(worst, std::fabs(m.assignment.total_cost -
                                        chartens::testing::brute_force_assignment_cost(m.key_cost)));
    }
    const double secs = seconds_since(t0);
    return Outcome{worst <= 1e-9 && secs < 10.0,
                   "500 sets, max |hungarian - exhaustive| = " + fmt("%.3g", worst) + ", " + fmt("%.2f", secs) + "s"};
  });

  criterion("metric-identities", [] {
    std::mt19937_64 rng(2);
    MetricConfig cfg;
    int bad = 0;
    for (int i = 0; i < 200; ++i) {
      auto t = chartens::testing::random_table(rng, 2 + rng() % 10, 1 + rng() % 5);
      auto tt = to_triples(t);
      auto v = values_of(tt);
      if (rms_scores(tt, tt, cfg).f1 != 100.0) ++bad;
      if (rms_scores(to_triples(transpose(t)), tt, cfg).f1 != 100.0) ++bad;
      if (rnss(v, v) != 1.0) ++bad;
      if (rd(v, v) != 0.0) ++bad;
    }
    return Outcome{bad == 0, "200 tables, " + std::to_string(bad) + " violations"};
  });

  criterion("hand-checked-metrics", [] {
    MetricConfig cfg;
    std::vector<std::string> wrong;
    auto expect = [&](bool ok, const std::string& what) {
      if (!ok) wrong.push_back(what);
    };
    expect(value_distance(105, 100, cfg) == 0.05, "D(105,100)=0.05");
    expect(value_distance(115, 100, cfg) == 1.0, "D(115,100)=1");
    Triple p{"abcde", "fgxy", 105.0}, t{"abcde", "fghi", 100.0};
    expect(key_distance(p, t, cfg) == 0.2, "key distance 0.2");
    expect(std::fabs(entry_similarity(p, t, cfg) - 0.76) < 1e-15, "s = 0.8*0.95 = 0.76");
    std::vector<Triple> T = {{"a", "x", 100.0}}, P = {{"a", "x", 100.0}, {"b", "y", 5.0}};
    auto r = rms_scores(P, T, cfg);
    expect(r.precision == 50.0 && r.recall == 100.0 && fmt("%.2f", r.f1) == "66.67", "RMS 50/100/66.67");
    expect(rnss(std::vector<double>{100, 50}, std::vector<double>{100}) == 0.5, "RNSS 0.5");
    expect(rnss(std::vector<double>{}, std::vector<double>{100}) == 0.0, "RNSS 0");
    std::vector<Triple> two = {{"a", "x", 1.0}, {"b", "y", 2.0}}, one = {two[0]};
    auto b = error_breakdown(one, two, cfg);
    expect(fmt("%.2f", b.correct) == "66.67" && fmt("%.2f", b.missing) == "33.33" && b.value_err == 0.0 &&
               b.label_err == 0.0 && b.extra == 0.0,
           "breakdown 66.67/33.33");
    auto e = error_breakdown({}, two, cfg);
    expect(e.correct == 0 && e.value_err == 0 && e.label_err == 0 && e.missing == 100 && e.extra == 0,
           "breakdown (0,0,0,100,0)");
    std::string detail = "9 values";
    for (const auto& w : wrong) detail += "; wrong: " + w;
    return Outcome{wrong.empty(), detail};
  });

  criterion("end-to-end-identity", [] {
    SimulateOptions opts;
    opts.truths = synthetic_corpus(100, 8, 3, 3);
    std::vector<ChartOutcome> out;
    cmd_simulate(opts, &out);
    int bad = 0;
    for (const auto& o : out)
      if (o.failed || o.f1 != 100.0 || !o.convergence.converged || o.convergence.samples_used != 4 ||
          *o.convergence.converged_at != 4)
        ++bad;
    return Outcome{bad == 0 && out.size() == 100,
                   "100 tables, " + std::to_string(bad) + " not exact or not converged at 4"};
  });

  criterion("ensemble-gain", [] {
    const auto t0 = std::chrono::steady_clock::now();
    SimulateOptions opts;
    opts.cfg = noisy_config();
    opts.truths = synthetic_corpus(200, 10, 3, 4);
    auto row = cmd_simulate(opts).at(0);
    const double gain = row.ensemble_f1 - row.single_f1;
    const double secs = seconds_since(t0);
    return Outcome{gain >= 3.0 && secs < 120.0, "single " + fmt("%.2f", row.single_f1) + " -> ensemble " +
                                                    fmt("%.2f", row.ensemble_f1) + " (gain " + fmt("%.2f", gain) +
                                                    ", need >= 3)"};
  });

  criterion("aggregator-ordering", [] {
    SimulateOptions opts;
    opts.cfg = noisy_config();
    opts.cfg.noise.p_outlier = 0.1;
    opts.cfg.noise.outlier_factor = 10.0;
    opts.truths = synthetic_corpus(200, 10, 3, 4);
    opts.strategies = {Strategy::Median, Strategy::Mean};
    auto rows = cmd_simulate(opts);
    return Outcome{rows[0].ensemble_f1 >= rows[1].ensemble_f1,
                   "median " + fmt("%.2f", rows[0].ensemble_f1) + " vs mean " + fmt("%.2f", rows[1].ensemble_f1)};
  });

  // Stored run shared by the monotonicity and replay criteria.
  const fs::path run_root = fs::temp_directory_path() / ("chartens_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(run_root);
  DatasetIndex index;
  {
    auto truths = synthetic_corpus(60, 8, 3, 5);
    for (std::size_t i = 0; i < truths.size(); ++i) {
      DatasetEntry e;
      e.id = "chart_" + std::to_string(i);
      e.truth_path = run_root / "truth" / (e.id + ".tsv");
      write_file(e.truth_path, to_tsv(truths[i]) + "\n");
      index.entries.push_back(e);
    }
    RunConfig cfg;
    cfg.sampler_kind = SamplerKind::Simulated;
    cfg.noise.value_noise_rel = 0.03;
    cfg.noise.p_drop_row = 0.05;
    cfg.noise.p_cell_blank = 0.05;
    cfg.noise.seed = 99;
    cfg.ensemble.early_stopping = false;
    std::ostringstream log;
    cmd_extract(index, cfg, run_root / "run", log);
  }

  criterion("convergence-monotonicity", [&] {
    std::ostringstream log;
    RunConfig base;
    auto tol = sweep_stored(index, run_root / "run", base, SweepAxis::Tolerance, {0.001, 0.01, 0.1}, log);
    auto pat = sweep_stored(index, run_root / "run", base, SweepAxis::Patience, {1, 2, 3}, log);
    const bool tol_ok = tol[0].mean_samples >= tol[1].mean_samples && tol[1].mean_samples >= tol[2].mean_samples;
    const bool pat_ok = pat[0].mean_samples <= pat[1].mean_samples && pat[1].mean_samples <= pat[2].mean_samples;
    return Outcome{tol_ok && pat_ok, "S tolerance {.001,.01,.1}: " + fmt("%.2f", tol[0].mean_samples) + " " +
                                         fmt("%.2f", tol[1].mean_samples) + " " + fmt("%.2f", tol[2].mean_samples) +
                                         "; patience {1,2,3}: " + fmt("%.2f", pat[0].mean_samples) + " " +
                                         fmt("%.2f", pat[1].mean_samples) + " " + fmt("%.2f", pat[2].mean_samples)};
  });

  criterion("uncertainty-anticorrelation", [] {
    const auto t0 = std::chrono::steady_clock::now();
    SimulateOptions opts;
    opts.cfg.seed = 23;
    opts.cfg.noise.seed = 7;
    opts.truths = synthetic_corpus(200, 10, 3, 6);
    opts.sigmas = {0.01, 0.02, 0.03, 0.05, 0.08, 0.1, 0.12, 0.15, 0.2};
    opts.sigma_per_chart = true;
    auto row = cmd_simulate(opts).at(0);
    const double secs = seconds_since(t0);
    const bool ok = row.spearman_u_mean_f1 && *row.spearman_u_mean_f1 < -0.3 && secs < 120.0;
    return Outcome{ok, "rho(U_mean, F1) = " +
                           (row.spearman_u_mean_f1 ? fmt("%.3f", *row.spearman_u_mean_f1) : std::string("undefined")) +
                           " over 200 charts (need < -0.3)"};
  });

  criterion("pruning-efficacy", [] {
    SimulateOptions opts;
    opts.cfg.noise.value_noise_rel = 0.03;
    opts.cfg.noise.p_extra_row = 0.15;
    opts.cfg.noise.seed = 31;
    opts.truths = synthetic_corpus(200, 10, 3, 7);
    opts.cfg.ensemble.align.prune_fraction = 0.0;
    const double none = cmd_simulate(opts).at(0).breakdown.extra;
    opts.cfg.ensemble.align.prune_fraction = 0.2;
    const double pruned = cmd_simulate(opts).at(0).breakdown.extra;
    return Outcome{pruned < none, "Extra mass " + fmt("%.2f", pruned) + " (prune 0.2) vs " + fmt("%.2f", none) + " (0.0)"};
  });

  criterion("replay-determinism", [&] {
    int bad = 0, n = 0;
    RunConfig cfg;
    cfg.ensemble.early_stopping = false;
    for (const auto& e : index.entries) {
      auto rec = read_record(run_root / "run" / e.id);
      ++n;
      if (!rec.table) {
        ++bad;
        continue;
      }
      auto again = reaggregate(sample_texts(rec), cfg.ensemble);
      if (!(again == *rec.table) || to_tsv(again) + "\n" != read_file(run_root / "run" / e.id / "table.tsv")) ++bad;
    }
    return Outcome{bad == 0 && n > 0, std::to_string(n) + " records, " + std::to_string(bad) + " mismatches"};
  });

  fs::remove_all(run_root);
  std::printf("%s: %d criteria failed\n", failures ? "FAILED" : "ALL PASSED", failures);
  return failures ? 1 : 0;
}
