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
#include <numeric>

#include "chartens/cli/commands.hpp"
#include "chartens/error.hpp"
#include "chartens/tsv_ingest.hpp"

namespace chartens::cli {

namespace {

const std::vector<std::string> kCountries = {
    "Brazil", "Kenya",  "Norway", "Japan",  "Chile", "Egypt",   "Poland", "Vietnam",
    "Canada", "Mexico", "Ghana",  "Sweden", "Peru",  "Morocco", "India",  "Fiji"};

std::string chart_id(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "sim_%04zu", i);
  return buf;
}

std::string fmt(double v, const char* f = "%.2f") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

}  // namespace

NormalizedTable synthetic_truth(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
  if (cols > kCountries.size()) throw Error(ErrorKind::InvalidConfig, "at most 16 synthetic columns");
  const int y0 = std::uniform_int_distribution<int>(1960, 2000)(rng);
  std::vector<std::string> row_labels, col_labels;
  for (std::size_t r = 0; r < rows; ++r) row_labels.push_back(std::to_string(y0 + static_cast<int>(r)));
  std::vector<std::string> pool = kCountries;
  std::shuffle(pool.begin(), pool.end(), rng);
  col_labels.assign(pool.begin(), pool.begin() + static_cast<long>(cols));
  NormalizedTable t(row_labels, col_labels);
  std::uniform_real_distribution<double> magnitude(0.5, 4.0), step(-0.05, 0.05);
  for (std::size_t c = 0; c < cols; ++c) {
    double v = std::pow(10.0, magnitude(rng));
    for (std::size_t r = 0; r < rows; ++r) {
      v *= 1.0 + step(rng);
      t.at(r, c) = std::round(v * 100.0) / 100.0;
    }
  }
  return t;
}

std::vector<NormalizedTable> synthetic_corpus(std::size_t n, std::size_t rows, std::size_t cols,
                                              std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<NormalizedTable> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(synthetic_truth(rng, rows, cols));
  return out;
}

ChartOutcome score_run(std::string id, const NormalizedTable& truth, const EnsembleResult& result,
                       const MetricConfig& metric) {
  ChartOutcome o;
  o.id = std::move(id);
  const auto t = to_triples(truth);
  double single = 0.0;
  for (const auto& s : result.samples) {
    o.texts.push_back(s.text);
    if (!s.parsed) continue;
    single += rms_scores(to_triples(ingest(s.text, s.draw_index)), t, metric).f1;
  }
  if (!result.samples.empty()) o.single_f1 = single / static_cast<double>(result.samples.size());
  const auto p = to_triples(result.table);
  o.breakdown = error_breakdown(p, t, metric);
  o.f1 = o.breakdown.correct;
  o.convergence = result.convergence;
  o.uncertainty = result.uncertainty;
  o.table = result.table;
  return o;
}

ChartOutcome run_simulated_chart(std::string id, const NormalizedTable& truth, const NoiseModel& nm,
                                 const EnsembleConfig& ens, const MetricConfig& metric) {
  SimulatedSampler sampler(truth, nm);
  try {
    return score_run(std::move(id), truth, run_ensemble(sampler, ens), metric);
  } catch (const Error& e) {
    ChartOutcome o;
    o.id = std::move(id);
    o.failed = true;
    o.error = e.what();
    o.breakdown.missing = 100.0;
    return o;
  }
}

std::optional<double> spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) return std::nullopt;
  auto ranks = [](std::span<const double> v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < order.size();) {
      std::size_t j = i;
      while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
      const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

std::vector<SimulateRow> cmd_simulate(const SimulateOptions& opts, std::vector<ChartOutcome>* outcomes) {
  opts.cfg.validate();
  if (opts.truths.empty()) throw Error(ErrorKind::EmptyCorpus, "no truth tables to simulate");
  if (opts.repeats < 1) throw Error(ErrorKind::InvalidConfig, "repeats must be >= 1");
  const std::vector<Strategy> strategies =
      opts.strategies.empty() ? std::vector<Strategy>{opts.cfg.ensemble.strategy} : opts.strategies;
  const std::vector<double> sigmas =
      opts.sigmas.empty() ? std::vector<double>{opts.cfg.noise.value_noise_rel} : opts.sigmas;
  for (double s : sigmas)
    if (!(s >= 0.0)) throw Error(ErrorKind::InvalidConfig, "sigma must be >= 0");

  // Each row is one (strategy, sigma) setting; per-chart sigma collapses the sigma axis.
  std::vector<std::pair<Strategy, std::optional<double>>> settings;
  for (Strategy st : strategies) {
    if (opts.sigma_per_chart)
      settings.emplace_back(st, std::nullopt);
    else
      for (double s : sigmas) settings.emplace_back(st, s);
  }

  const std::size_t per_setting = opts.truths.size() * static_cast<std::size_t>(opts.repeats);
  std::vector<SimulateRow> rows;
  for (const auto& [strategy, sigma] : settings) {
    EnsembleConfig ens = opts.cfg.ensemble;
    ens.strategy = strategy;
    std::vector<ChartOutcome> out(per_setting);
    parallel_for(per_setting, opts.cfg.jobs, [&](std::size_t k) {
      const std::size_t chart = k / static_cast<std::size_t>(opts.repeats);
      const std::size_t rep = k % static_cast<std::size_t>(opts.repeats);
      const std::string id = chart_id(chart) + (opts.repeats > 1 ? "_r" + std::to_string(rep) : "");
      NoiseModel nm = opts.cfg.noise;
      nm.seed = entry_seed(opts.cfg.noise.seed ^ opts.cfg.seed, id);
      nm.value_noise_rel = sigma ? *sigma : sigmas[entry_seed(opts.cfg.seed, "sigma/" + id) % sigmas.size()];
      out[k] = run_simulated_chart(id, opts.truths[chart], nm, ens, opts.cfg.metric);
    });

    SimulateRow row;
    row.strategy = std::string(to_string(strategy));
    row.sigma = sigma;
    row.charts = out.size();
    std::vector<double> u, f;
    std::size_t converged = 0;
    double samples = 0.0;
    for (const auto& o : out) {
      row.single_f1 += o.single_f1;
      row.ensemble_f1 += o.f1;
      row.breakdown.correct += o.breakdown.correct;
      row.breakdown.value_err += o.breakdown.value_err;
      row.breakdown.label_err += o.breakdown.label_err;
      row.breakdown.missing += o.breakdown.missing;
      row.breakdown.extra += o.breakdown.extra;
      if (o.failed) {
        ++row.failed;
        continue;
      }
      samples += o.convergence.samples_used;
      if (o.convergence.converged) ++converged;
      if (o.uncertainty.mean) u.push_back(*o.uncertainty.mean), f.push_back(o.f1);
    }
    const double n = static_cast<double>(out.size());
    row.single_f1 /= n;
    row.ensemble_f1 /= n;
    for (double* x : {&row.breakdown.correct, &row.breakdown.value_err, &row.breakdown.label_err,
                      &row.breakdown.missing, &row.breakdown.extra})
      *x /= n;
    const double ok = static_cast<double>(out.size() - row.failed);
    if (ok > 0) {
      row.mean_samples = samples / ok;
      row.convergence_rate = static_cast<double>(converged) / ok;
    }
    row.spearman_u_mean_f1 = spearman(u, f);
    rows.push_back(row);
    if (outcomes) outcomes->insert(outcomes->end(), out.begin(), out.end());
  }
  return rows;
}

std::string simulate_tsv(const std::vector<SimulateRow>& rows) {
  std::string out =
      "strategy\tsigma\tcharts\tfailed\tsingle_f1\tensemble_f1\tgain\tconvergence_rate\tmean_samples\t"
      "spearman_u_mean_f1\tvalue_err\tlabel_err\tmissing\textra\n";
  for (const auto& r : rows) {
    out += r.strategy + '\t' + (r.sigma ? fmt(*r.sigma, "%g") : std::string("per-chart")) + '\t' +
           std::to_string(r.charts) + '\t' + std::to_string(r.failed) + '\t' + fmt(r.single_f1) + '\t' +
           fmt(r.ensemble_f1) + '\t' + fmt(r.ensemble_f1 - r.single_f1) + '\t' + fmt(100.0 * r.convergence_rate) +
           '\t' + fmt(r.mean_samples) + '\t' + (r.spearman_u_mean_f1 ? fmt(*r.spearman_u_mean_f1, "%.3f") : "") +
           '\t' + fmt(r.breakdown.value_err) + '\t' + fmt(r.breakdown.label_err) + '\t' + fmt(r.breakdown.missing) +
           '\t' + fmt(r.breakdown.extra) + '\n';
  }
  return out;
}

}  // namespace chartens::cli
