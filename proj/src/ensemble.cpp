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

#include "chartens/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <map>
#include <numeric>
#include <tuple>

#include "chartens/error.hpp"
#include "chartens/kernels.hpp"
#include "chartens/tsv_ingest.hpp"

namespace chartens {

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::Median: return "median";
    case Strategy::Mean: return "mean";
    case Strategy::Huber: return "huber";
    case Strategy::WeightedConfidence: return "weighted_confidence";
    case Strategy::Ransac: return "ransac";
  }
  return "median";
}

Strategy parse_strategy(std::string_view name) {
  for (auto s : {Strategy::Median, Strategy::Mean, Strategy::Huber, Strategy::WeightedConfidence,
                 Strategy::Ransac})
    if (to_string(s) == name) return s;
  throw Error(ErrorKind::InvalidConfig, "unknown strategy '" + std::string(name) + "'");
}

void EnsembleConfig::validate() const {
  if (initial_samples < 2) throw Error(ErrorKind::InvalidConfig, "initial_samples must be >= 2");
  if (k_max < initial_samples)
    throw Error(ErrorKind::InvalidConfig, "k_max must be >= initial_samples (" +
                                              std::to_string(initial_samples) + ")");
  if (patience < 1) throw Error(ErrorKind::InvalidConfig, "patience must be >= 1");
  if (!(coverage > 0.0 && coverage <= 1.0))
    throw Error(ErrorKind::InvalidConfig, "coverage must lie in (0,1]");
  if (!(tolerance > 0.0 && tolerance <= 1.0))
    throw Error(ErrorKind::InvalidConfig, "tolerance must lie in (0,1]");
  align.validate();
}

// ---------------------------------------------------------------------------
// Robust statistics

namespace {

double sorted_median(std::span<const double> s) {
  const auto n = s.size();
  if (n % 2 == 1) return s[n / 2];
  return (s[n / 2 - 1] + s[n / 2]) / 2.0;
}

double clamp_to_range(double x, std::span<const double> sorted) {
  return std::clamp(x, sorted.front(), sorted.back());
}

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double huber_location(std::span<const double> sorted) {
  constexpr double kTuning = 1.345;
  constexpr double kMadToSigma = 1.4826;
  constexpr int kMaxIter = 50;
  constexpr double kStepTol = 1e-8;

  double mu = sorted_median(sorted);
  const double spread = mad(sorted, mu);
  if (spread == 0.0) return mu;
  const double scale = kMadToSigma * spread;
  for (int it = 0; it < kMaxIter; ++it) {
    double num = 0.0, den = 0.0;
    for (double v : sorted) {
      double r = std::fabs(v - mu) / scale;
      double w = r <= kTuning ? 1.0 : kTuning / r;
      num += w * v;
      den += w;
    }
    double next = num / den;
    bool done = std::fabs(next - mu) < kStepTol;
    mu = next;
    if (done) break;
  }
  return mu;
}

}  // namespace

double median(std::span<const double> v) {
  if (v.empty()) throw Error(ErrorKind::InvalidConfig, "median of an empty set");
  std::vector<double> s(v.begin(), v.end());
  std::sort(s.begin(), s.end());
  return sorted_median(s);
}

double mad(std::span<const double> v, double center) {
  std::vector<double> dev(v.size());
  kernels::absolute_deviations(v, center, dev);
  return median(dev);
}

double robust_estimate(std::span<const double> v, Strategy strategy) {
  if (v.empty()) throw Error(ErrorKind::InvalidConfig, "robust_estimate of an empty set");
  std::vector<double> s(v.begin(), v.end());
  std::sort(s.begin(), s.end());
  const double med = sorted_median(s);

  switch (strategy) {
    case Strategy::Median:
      return med;
    case Strategy::Mean:
      return clamp_to_range(mean_of(s), s);
    case Strategy::Ransac: {
      const double limit = 2.0 * mad(s, med);
      std::vector<double> inliers;
      for (double x : s)
        if (std::fabs(x - med) <= limit) inliers.push_back(x);
      return sorted_median(inliers);
    }
    case Strategy::WeightedConfidence: {
      const std::size_t keep = (6 * s.size() + 9) / 10;  // ceil(0.6 n), exact in integers
      std::vector<double> by_closeness = s;
      std::stable_sort(by_closeness.begin(), by_closeness.end(), [&](double a, double b) {
        double da = std::fabs(a - med), db = std::fabs(b - med);
        return da != db ? da < db : a < b;
      });
      return clamp_to_range(mean_of(std::span(by_closeness).first(keep)), s);
    }
    case Strategy::Huber:
      return clamp_to_range(huber_location(s), s);
  }
  return med;
}

std::optional<double> cell_uncertainty(std::span<const double> v, double estimate) {
  if (v.empty() || estimate == 0.0) return std::nullopt;
  return mad(v, estimate) / std::fabs(estimate);
}

UncertaintySummary summarize_uncertainty(const AggregatedTable& table) {
  std::vector<double> u;
  for (const auto& cell : table.cells)
    if (cell.uncertainty) u.push_back(*cell.uncertainty);
  UncertaintySummary out;
  if (u.empty()) return out;
  out.median = median(u);
  out.mean = mean_of(u);
  out.max = *std::max_element(u.begin(), u.end());
  return out;
}

// ---------------------------------------------------------------------------
// Aggregation

namespace {

struct AxisAlignment {
  std::vector<std::string> labels;  // canonical labels, sorted
  // For each table (input order), position -> output index or -1.
  std::vector<std::vector<int>> index;
};

AxisAlignment align_axis(std::span<const NormalizedTable> tables, bool rows,
                         const AlignConfig& cfg) {
  std::vector<LabelList> lists;
  lists.reserve(tables.size());
  for (const auto& t : tables) lists.push_back({t.source_id, rows ? t.row_labels : t.col_labels});
  auto clusters = prune(greedy_cluster(lists, cfg), tables.size(), cfg);

  std::vector<std::size_t> order(clusters.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return clusters[a].canonical < clusters[b].canonical;
  });

  AxisAlignment out;
  std::map<int, std::size_t> table_of_source;
  for (std::size_t i = 0; i < tables.size(); ++i) {
    table_of_source.emplace(tables[i].source_id, i);
    out.index.emplace_back(rows ? tables[i].rows() : tables[i].cols(), -1);
  }
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto& cluster = clusters[order[k]];
    out.labels.push_back(cluster.canonical);
    for (const auto& m : cluster.members)
      out.index[table_of_source.at(m.source_id)][m.position] = static_cast<int>(k);
  }
  return out;
}

}  // namespace

AggregatedTable aggregate(std::span<const NormalizedTable> tables, const EnsembleConfig& cfg) {
  if (tables.empty()) throw Error(ErrorKind::EmptyEnsemble, "no tables to aggregate");
  {
    std::vector<int> ids;
    for (const auto& t : tables) ids.push_back(t.source_id);
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
      throw Error(ErrorKind::InvalidConfig, "duplicate source_id in ensemble");
  }
  auto rows = align_axis(tables, true, cfg.align);
  auto cols = align_axis(tables, false, cfg.align);
  if (rows.labels.empty() || cols.labels.empty())
    throw Error(ErrorKind::EmptyEnsemble, "every label cluster was pruned");

  const std::size_t nr = rows.labels.size(), nc = cols.labels.size();
  std::vector<std::vector<double>> pool(nr * nc);
  for (std::size_t t = 0; t < tables.size(); ++t) {
    const auto& table = tables[t];
    for (std::size_t r = 0; r < table.rows(); ++r) {
      int ar = rows.index[t][r];
      if (ar < 0) continue;
      for (std::size_t c = 0; c < table.cols(); ++c) {
        int ac = cols.index[t][c];
        if (ac < 0 || !table.at(r, c)) continue;
        pool[static_cast<std::size_t>(ar) * nc + static_cast<std::size_t>(ac)].push_back(*table.at(r, c));
      }
    }
  }

  AggregatedTable out;
  out.row_labels = std::move(rows.labels);
  out.col_labels = std::move(cols.labels);
  out.cells.resize(nr * nc);
  for (std::size_t i = 0; i < pool.size(); ++i) {
    auto& values = pool[i];
    if (values.empty()) continue;
    // Sorted input makes every strategy independent of sample order.
    std::sort(values.begin(), values.end());
    auto& cell = out.cells[i];
    cell.value = robust_estimate(values, cfg.strategy);
    cell.support = values.size();
    cell.uncertainty = cell_uncertainty(values, *cell.value);
  }
  return out;
}

namespace {

// (row label, occurrence, col label, occurrence); occurrences disambiguate
// clusters that share a canonical label.
using CellKey = std::tuple<std::string, int, std::string, int>;

std::map<CellKey, Value> keyed_cells(const AggregatedTable& t) {
  auto occurrences = [](const std::vector<std::string>& labels) {
    std::map<std::string, int> seen;
    std::vector<int> occ;
    for (const auto& l : labels) occ.push_back(seen[l]++);
    return occ;
  };
  auto row_occ = occurrences(t.row_labels);
  auto col_occ = occurrences(t.col_labels);
  std::map<CellKey, Value> out;
  for (std::size_t r = 0; r < t.rows(); ++r)
    for (std::size_t c = 0; c < t.cols(); ++c)
      out.emplace(CellKey{t.row_labels[r], row_occ[r], t.col_labels[c], col_occ[c]}, t.at(r, c).value);
  return out;
}

}  // namespace

Stability update_is_stable(const AggregatedTable& prev, const AggregatedTable& next,
                           const EnsembleConfig& cfg) {
  const auto a = keyed_cells(prev);
  const auto b = keyed_cells(next);
  std::size_t universe = 0, unchanged = 0;
  std::vector<double> old_values, new_values;

  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() || ib != b.end()) {
    ++universe;
    if (ib == b.end() || (ia != a.end() && ia->first < ib->first)) {
      ++ia;  // only in prev: changed
    } else if (ia == a.end() || ib->first < ia->first) {
      ++ib;  // only in next: changed
    } else {
      const auto& va = ia->second;
      const auto& vb = ib->second;
      if (!va && !vb) {
        ++unchanged;
      } else if (va && vb) {
        old_values.push_back(*va);
        new_values.push_back(*vb);
      }
      ++ia;
      ++ib;
    }
  }
  unchanged += kernels::count_unchanged(old_values, new_values, cfg.tolerance);

  Stability s;
  s.fraction_unchanged =
      universe == 0 ? 1.0 : static_cast<double>(unchanged) / static_cast<double>(universe);
  s.stable = s.fraction_unchanged >= cfg.coverage;
  return s;
}

// ---------------------------------------------------------------------------
// Sampling controller

namespace {

using DrawFn = std::function<std::string(int)>;

SampleRecord draw_one(const DrawFn& draw, int index) {
  SampleRecord rec;
  rec.draw_index = index;
  try {
    rec.text = draw(index);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::AuthError) throw;
    rec.error = e.what();
  }
  return rec;
}

class Controller {
 public:
  explicit Controller(const EnsembleConfig& cfg) : cfg_(cfg) {}

  // Ingests one draw; returns true when the stopping rule fires.
  bool add(SampleRecord rec, bool compare) {
    ++result_.convergence.samples_used;
    bool new_table = false;
    if (rec.error.empty()) {
      try {
        result_.raw_samples.push_back(ingest(rec.text, rec.draw_index));
        rec.parsed = true;
        new_table = true;
      } catch (const Error& e) {
        rec.error = e.what();
      }
    }
    result_.samples.push_back(std::move(rec));
    if (!new_table) return false;

    std::optional<AggregatedTable> next;
    try {
      next = aggregate(result_.raw_samples, cfg_);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::EmptyEnsemble) throw;
    }
    bool fired = false;
    if (compare && current_) {
      Stability s = next ? update_is_stable(*current_, *next, cfg_) : Stability{};
      auto& conv = result_.convergence;
      conv.consecutive_stable = s.stable ? conv.consecutive_stable + 1 : 0;
      conv.per_update_log.push_back({conv.samples_used, s.fraction_unchanged, s.stable});
      if (conv.consecutive_stable >= cfg_.patience) {
        fired = true;
        if (!conv.converged_at) conv.converged_at = conv.samples_used;
      }
    }
    current_ = std::move(next);
    return fired;
  }

  EnsembleResult finish() && {
    if (result_.raw_samples.empty())
      throw Error(ErrorKind::NoValidSamples,
                  "all " + std::to_string(result_.convergence.samples_used) + " draws failed");
    if (!current_) throw Error(ErrorKind::EmptyEnsemble, "final aggregate is empty");
    auto& conv = result_.convergence;
    conv.converged = conv.converged_at.has_value();
    result_.table = std::move(*current_);
    result_.uncertainty = summarize_uncertainty(result_.table);
    return std::move(result_);
  }

 private:
  const EnsembleConfig& cfg_;
  EnsembleResult result_;
  std::optional<AggregatedTable> current_;
};

EnsembleResult run_controller(const DrawFn& draw, int budget, bool parallel_initial,
                              const EnsembleConfig& cfg) {
  cfg.validate();
  Controller ctl(cfg);
  const int initial = std::min(cfg.initial_samples, budget);

  std::vector<SampleRecord> first;
  if (parallel_initial && initial > 1) {
    std::vector<std::future<SampleRecord>> pending;
    for (int i = 0; i < initial; ++i)
      pending.push_back(std::async(std::launch::async, draw_one, std::cref(draw), i));
    for (auto& f : pending) first.push_back(f.get());
  } else {
    for (int i = 0; i < initial; ++i) first.push_back(draw_one(draw, i));
  }
  for (auto& rec : first) ctl.add(std::move(rec), false);

  for (int k = initial; k < budget; ++k) {
    bool fired = ctl.add(draw_one(draw, k), true);
    if (fired && cfg.early_stopping) break;
  }
  return std::move(ctl).finish();
}

}  // namespace

EnsembleResult run_ensemble(Sampler& sampler, const EnsembleConfig& cfg) {
  return run_controller([&](int i) { return sampler.sample(i); }, cfg.k_max, true, cfg);
}

EnsembleResult replay_ensemble(std::span<const std::string> texts, const EnsembleConfig& cfg) {
  const int budget = std::min<int>(cfg.k_max, static_cast<int>(texts.size()));
  return run_controller([&](int i) { return texts[static_cast<std::size_t>(i)]; }, budget, false,
                        cfg);
}

AggregatedTable reaggregate(std::span<const std::string> texts, const EnsembleConfig& cfg) {
  std::vector<NormalizedTable> tables;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    try {
      tables.push_back(ingest(texts[i], static_cast<int>(i)));
    } catch (const Error&) {
    }
  }
  if (tables.empty()) throw Error(ErrorKind::NoValidSamples, "no stored sample parses");
  return aggregate(tables, cfg);
}

}  // namespace chartens
