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

#include <cmath>
#include <cstdio>
#include <ostream>

#include "chartens/cli/commands.hpp"
#include "chartens/error.hpp"

namespace chartens::cli {

namespace {

constexpr std::pair<SweepAxis, std::string_view> kAxes[] = {
    {SweepAxis::Patience, "patience"}, {SweepAxis::Coverage, "coverage"}, {SweepAxis::Tolerance, "tolerance"},
    {SweepAxis::Prune, "prune"},       {SweepAxis::K, "k"},               {SweepAxis::Temperature, "temperature"}};

int as_int(double v, const char* what) {
  if (v != std::floor(v) || v < 0 || v > 1e6)
    throw Error(ErrorKind::InvalidConfig, std::string(what) + " values must be non-negative integers");
  return static_cast<int>(v);
}

struct Accumulator {
  double f1 = 0.0, samples = 0.0;
  std::size_t n = 0, ok = 0, converged = 0;

  void add(double f, const ConvergenceState* conv) {
    f1 += f;
    ++n;
    if (!conv) return;
    ++ok;
    samples += conv->samples_used;
    if (conv->converged) ++converged;
  }
  SweepRow row(double value) const {
    SweepRow r;
    r.value = value;
    r.charts = n;
    if (n) r.f1 = f1 / static_cast<double>(n);
    if (ok) {
      r.mean_samples = samples / static_cast<double>(ok);
      r.convergence_rate = static_cast<double>(converged) / static_cast<double>(ok);
    }
    return r;
  }
};

std::string fmt(double v, const char* f) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

}  // namespace

SweepAxis parse_axis(std::string_view name) {
  for (const auto& [axis, n] : kAxes)
    if (n == name) return axis;
  throw Error(ErrorKind::UnknownAxis,
              "'" + std::string(name) + "' (expected patience, coverage, tolerance, prune, k or temperature)");
}

std::string_view to_string(SweepAxis axis) {
  for (const auto& [a, n] : kAxes)
    if (a == axis) return n;
  return "?";
}

RunConfig with_axis(RunConfig cfg, SweepAxis axis, double value) {
  switch (axis) {
    case SweepAxis::Patience: cfg.ensemble.patience = as_int(value, "patience"); break;
    case SweepAxis::Coverage: cfg.ensemble.coverage = value; break;
    case SweepAxis::Tolerance: cfg.ensemble.tolerance = value; break;
    case SweepAxis::Prune: cfg.ensemble.align.prune_fraction = value; break;
    case SweepAxis::K:
      // Fixed ensemble size: draw exactly k samples.
      cfg.ensemble.k_max = as_int(value, "k");
      cfg.ensemble.early_stopping = false;
      break;
    case SweepAxis::Temperature: cfg.sampler.temperature = value; break;
  }
  cfg.validate();
  return cfg;
}

std::vector<SweepRow> sweep_stored(const DatasetIndex& index, const fs::path& run_dir, const RunConfig& base,
                                   SweepAxis axis, const std::vector<double>& values, std::ostream& log) {
  if (axis == SweepAxis::Temperature)
    throw Error(ErrorKind::InvalidConfig, "temperature cannot be swept over stored samples; it needs fresh draws");
  struct Stored {
    std::vector<std::string> texts;
    std::vector<Triple> truth;
  };
  std::vector<Stored> stored;
  for (const auto& entry : index.entries) {
    const fs::path dir = run_dir / entry.id;
    if (!fs::exists(dir / "record.json")) {
      log << "warning: no record for " << entry.id << "\n";
      continue;
    }
    auto rec = read_record(dir);
    if (rec.samples.empty()) continue;
    try {
      stored.push_back({sample_texts(rec), to_triples(read_truth(entry.truth_path))});
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::MissingTruth) throw;
      log << "entry " << entry.id << ": " << e.what() << "\n";
    }
  }
  if (stored.empty()) throw Error(ErrorKind::EmptyCorpus, "no stored records with ground truth in " + run_dir.string());

  std::vector<SweepRow> rows;
  for (double v : values) {
    const RunConfig cfg = with_axis(base, axis, v);
    std::vector<std::optional<EnsembleResult>> results(stored.size());
    parallel_for(stored.size(), cfg.jobs, [&](std::size_t i) {
      try {
        results[i] = replay_ensemble(stored[i].texts, cfg.ensemble);
      } catch (const Error&) {
      }
    });
    Accumulator acc;
    for (std::size_t i = 0; i < stored.size(); ++i) {
      if (!results[i]) {
        acc.add(0.0, nullptr);
        continue;
      }
      const double f = rms_scores(to_triples(results[i]->table), stored[i].truth, cfg.metric).f1;
      acc.add(f, &results[i]->convergence);
    }
    rows.push_back(acc.row(v));
  }
  return rows;
}

std::vector<SweepRow> sweep_simulated(const std::vector<NormalizedTable>& truths, const RunConfig& base,
                                      SweepAxis axis, const std::vector<double>& values) {
  if (axis == SweepAxis::Temperature)
    throw Error(ErrorKind::InvalidConfig, "simulated samples do not depend on temperature; use the vlm sampler");
  std::vector<SweepRow> rows;
  for (double v : values) {
    SimulateOptions opts;
    opts.cfg = with_axis(base, axis, v);
    opts.truths = truths;
    std::vector<ChartOutcome> outcomes;
    cmd_simulate(opts, &outcomes);
    Accumulator acc;
    for (const auto& o : outcomes) acc.add(o.f1, o.failed ? nullptr : &o.convergence);
    rows.push_back(acc.row(v));
  }
  return rows;
}

std::vector<SweepRow> sweep_live(const DatasetIndex& index, const RunConfig& base, SweepAxis axis,
                                 const std::vector<double>& values, std::ostream& log) {
  std::vector<SweepRow> rows;
  auto gate = std::make_shared<RequestGate>(base.max_concurrent_requests, base.max_requests_per_s);
  for (double v : values) {
    const RunConfig cfg = with_axis(base, axis, v);
    std::vector<std::optional<ChartOutcome>> out(index.entries.size());
    parallel_for(index.entries.size(), cfg.jobs, [&](std::size_t i) {
      const auto& entry = index.entries[i];
      try {
        auto truth = read_truth(entry.truth_path);
        auto sampler = make_sampler(entry, cfg, gate, nullptr);
        out[i] = score_run(entry.id, truth, run_ensemble(*sampler, cfg.ensemble), cfg.metric);
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::AuthError) throw;
        ChartOutcome o;
        o.id = entry.id;
        o.failed = true;
        o.error = e.what();
        out[i] = o;
      }
    });
    Accumulator acc;
    for (const auto& o : out) {
      if (o->failed) log << "entry " << o->id << " failed: " << o->error << "\n";
      acc.add(o->f1, o->failed ? nullptr : &o->convergence);
    }
    rows.push_back(acc.row(v));
  }
  return rows;
}

std::string sweep_tsv(SweepAxis axis, const std::vector<SweepRow>& rows) {
  std::string out = std::string(to_string(axis)) + "\tcharts\trms_f1\tmean_samples\tconvergence_rate\n";
  for (const auto& r : rows)
    out += fmt(r.value, "%g") + '\t' + std::to_string(r.charts) + '\t' + fmt(r.f1, "%.2f") + '\t' +
           fmt(r.mean_samples, "%.2f") + '\t' + fmt(100.0 * r.convergence_rate, "%.2f") + '\n';
  return out;
}

}  // namespace chartens::cli
