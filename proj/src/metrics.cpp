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

#include "chartens/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <json.hpp>

#include "chartens/error.hpp"
#include "chartens/kernels.hpp"
#include "chartens/label_align.hpp"

namespace chartens {

void MetricConfig::validate() const {
  if (!(tau_key > 0.0 && tau_key <= 1.0)) throw Error(ErrorKind::InvalidConfig, "tau_key must lie in (0,1]");
  if (!(theta_val > 0.0 && theta_val <= 1.0))
    throw Error(ErrorKind::InvalidConfig, "theta_val must lie in (0,1]");
}

namespace {

template <typename Table, typename ValueAt>
std::vector<Triple> triples_of(const Table& t, ValueAt&& value_at) {
  std::vector<Triple> out;
  for (std::size_t r = 0; r < t.rows(); ++r)
    for (std::size_t c = 0; c < t.cols(); ++c)
      if (const Value& v = value_at(r, c)) out.push_back({t.row_labels[r], t.col_labels[c], *v});
  return out;
}

struct KeyForm {
  std::string text;
  std::size_t length = 0;
};

KeyForm key_form(const Triple& t) {
  KeyForm k;
  k.text = comparison_form(t.row_key) + kKeySeparator + comparison_form(t.col_key);
  k.length = code_point_length(k.text);
  return k;
}

double key_distance_forms(const KeyForm& a, const KeyForm& b, double tau) {
  const auto longest = std::max(a.length, b.length);
  const double nl = longest == 0 ? 0.0
                                 : static_cast<double>(levenshtein(a.text, b.text)) /
                                       static_cast<double>(longest);
  return nl > tau ? 1.0 : nl;
}

RmsMatch match_orientation(std::span<const Triple> pred, std::span<const Triple> truth,
                           const MetricConfig& cfg) {
  RmsMatch m;
  const std::size_t n = pred.size(), k = truth.size();
  if (n == 0 || k == 0) {
    const double s = (n == 0 && k == 0) ? 100.0 : 0.0;
    m.scores = {s, s, s};
    m.assignment.row_to_col.assign(n, -1);
    m.assignment.col_to_row.assign(k, -1);
    m.key_cost = CostMatrix(n, k);
    m.value_dist.assign(n, 0.0);
    return m;
  }
  std::vector<KeyForm> pk, tk;
  for (const auto& p : pred) pk.push_back(key_form(p));
  for (const auto& t : truth) tk.push_back(key_form(t));
  m.key_cost = CostMatrix(n, k);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < k; ++j) m.key_cost(i, j) = key_distance_forms(pk[i], tk[j], cfg.tau_key);

  m.assignment = solve_assignment(m.key_cost);
  m.value_dist.assign(n, 0.0);
  double similarity = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const long j = m.assignment.row_to_col[i];
    if (j < 0) continue;
    const double kappa = m.key_cost(i, static_cast<std::size_t>(j));
    const double delta = value_distance(pred[i].value, truth[static_cast<std::size_t>(j)].value, cfg);
    m.value_dist[i] = delta;
    similarity += (1.0 - kappa) * (1.0 - delta);
  }
  m.scores.precision = 100.0 * similarity / static_cast<double>(n);
  m.scores.recall = 100.0 * similarity / static_cast<double>(k);
  const double sum = m.scores.precision + m.scores.recall;
  m.scores.f1 = sum > 0.0 ? 2.0 * m.scores.precision * m.scores.recall / sum : 0.0;
  return m;
}

}  // namespace

std::vector<Triple> to_triples(const NormalizedTable& t) {
  return triples_of(t, [&](std::size_t r, std::size_t c) -> const Value& { return t.at(r, c); });
}

std::vector<Triple> to_triples(const AggregatedTable& t) {
  return triples_of(t, [&](std::size_t r, std::size_t c) -> const Value& { return t.at(r, c).value; });
}

std::vector<Triple> swap_keys(std::vector<Triple> triples) {
  for (auto& t : triples) std::swap(t.row_key, t.col_key);
  return triples;
}

std::vector<double> values_of(std::span<const Triple> triples) {
  std::vector<double> out;
  out.reserve(triples.size());
  for (const auto& t : triples) out.push_back(t.value);
  return out;
}

double key_distance(const Triple& p, const Triple& t, const MetricConfig& cfg) {
  return key_distance_forms(key_form(p), key_form(t), cfg.tau_key);
}

double value_distance(double p, double t, const MetricConfig& cfg) {
  double d;
  kernels::scalar::clipped_relative_distances(p, std::span(&t, 1), std::span(&d, 1));
  return d > cfg.theta_val ? 1.0 : d;
}

double entry_similarity(const Triple& p, const Triple& t, const MetricConfig& cfg) {
  return (1.0 - key_distance(p, t, cfg)) * (1.0 - value_distance(p.value, t.value, cfg));
}

RmsMatch rms_match(std::span<const Triple> prediction, std::span<const Triple> truth,
                   const MetricConfig& cfg) {
  auto direct = match_orientation(prediction, truth, cfg);
  auto swapped_pred = swap_keys({prediction.begin(), prediction.end()});
  auto swapped = match_orientation(swapped_pred, truth, cfg);
  if (swapped.scores.f1 > direct.scores.f1) {
    swapped.transposed = true;
    return swapped;
  }
  return direct;
}

RmsScores rms_scores(std::span<const Triple> prediction, std::span<const Triple> truth,
                     const MetricConfig& cfg) {
  return rms_match(prediction, truth, cfg).scores;
}

namespace {

struct NumberMatch {
  CostMatrix dist;
  Assignment assignment;
};

NumberMatch match_numbers(std::span<const double> p, std::span<const double> g) {
  NumberMatch m{CostMatrix(p.size(), g.size()), {}};
  for (std::size_t i = 0; i < p.size(); ++i)
    kernels::clipped_relative_distances(p[i], g, std::span(m.dist.data).subspan(i * g.size(), g.size()));
  m.assignment = solve_assignment(m.dist);
  return m;
}

}  // namespace

double rnss(std::span<const double> predicted, std::span<const double> truth) {
  const std::size_t n = predicted.size(), k = truth.size();
  if (n == 0 && k == 0) return 1.0;
  const std::size_t larger = std::max(n, k);
  const double penalty = static_cast<double>(larger - std::min(n, k));
  if (n == 0 || k == 0) return 1.0 - penalty / static_cast<double>(larger);
  const auto m = match_numbers(predicted, truth);
  return 1.0 - (m.assignment.total_cost + penalty) / static_cast<double>(larger);
}

double rd(std::span<const double> predicted, std::span<const double> truth) {
  if (predicted.empty() || truth.empty())
    throw Error(ErrorKind::NoMatchedPairs, "relative deviation needs values on both sides");
  const auto m = match_numbers(predicted, truth);
  return m.assignment.total_cost / static_cast<double>(std::min(predicted.size(), truth.size()));
}

ErrorBreakdown error_breakdown(std::span<const Triple> prediction, std::span<const Triple> truth,
                               const MetricConfig& cfg) {
  const auto m = rms_match(prediction, truth, cfg);
  double value_mass = 0.0, label_mass = 0.0, missing_mass = 0.0, extra_mass = 0.0;
  for (std::size_t i = 0; i < prediction.size(); ++i) {
    const long j = m.assignment.row_to_col[i];
    if (j < 0) {
      extra_mass += 1.0;
      continue;
    }
    const double kappa = m.key_cost(i, static_cast<std::size_t>(j));
    value_mass += (1.0 - kappa) * m.value_dist[i];
    label_mass += kappa;
  }
  for (long i : m.assignment.col_to_row)
    if (i < 0) missing_mass += 1.0;

  ErrorBreakdown out;
  out.correct = m.scores.f1;
  const double total = value_mass + label_mass + missing_mass + extra_mass;
  if (total > 0.0) {
    const double scale = (100.0 - out.correct) / total;
    out.value_err = value_mass * scale;
    out.label_err = label_mass * scale;
    out.missing = missing_mass * scale;
    out.extra = extra_mass * scale;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Corpus reports

ExampleScore score_example(const ExampleInput& ex, const MetricConfig& cfg) {
  ExampleScore s;
  s.id = ex.id;
  s.metadata = ex.metadata;
  s.samples_used = ex.samples_used;
  s.converged = ex.converged;
  s.breakdown = error_breakdown(ex.prediction, ex.truth, cfg);
  s.rms = rms_scores(ex.prediction, ex.truth, cfg);
  const auto pv = values_of(ex.prediction);
  const auto tv = values_of(ex.truth);
  s.rnss = rnss(pv, tv);
  if (!pv.empty() && !tv.empty()) s.rd = rd(pv, tv);
  return s;
}

namespace {

GroupSummary summarize(std::string key, std::string value, const std::vector<const ExampleScore*>& xs) {
  GroupSummary g;
  g.key = std::move(key);
  g.value = std::move(value);
  g.count = xs.size();
  const double n = static_cast<double>(xs.size());
  double rd_sum = 0.0, samples_sum = 0.0, conv_sum = 0.0;
  std::size_t rd_n = 0, samples_n = 0, conv_n = 0;
  for (const auto* x : xs) {
    g.rms.precision += x->rms.precision;
    g.rms.recall += x->rms.recall;
    g.rms.f1 += x->rms.f1;
    g.rnss += x->rnss;
    g.breakdown.correct += x->breakdown.correct;
    g.breakdown.value_err += x->breakdown.value_err;
    g.breakdown.label_err += x->breakdown.label_err;
    g.breakdown.missing += x->breakdown.missing;
    g.breakdown.extra += x->breakdown.extra;
    if (x->rd) rd_sum += *x->rd, ++rd_n;
    if (x->samples_used) samples_sum += *x->samples_used, ++samples_n;
    if (x->converged) conv_sum += *x->converged ? 1.0 : 0.0, ++conv_n;
  }
  for (double* field : {&g.rms.precision, &g.rms.recall, &g.rms.f1, &g.rnss, &g.breakdown.correct,
                        &g.breakdown.value_err, &g.breakdown.label_err, &g.breakdown.missing,
                        &g.breakdown.extra})
    *field /= n;
  if (rd_n) g.rd = rd_sum / static_cast<double>(rd_n);
  if (samples_n) g.mean_samples = samples_sum / static_cast<double>(samples_n);
  if (conv_n) g.convergence_rate = conv_sum / static_cast<double>(conv_n);
  return g;
}

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string opt2(const std::optional<double>& v, double scale = 1.0) {
  return v ? fixed2(*v * scale) : std::string();
}

nlohmann::json opt_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); }

nlohmann::json breakdown_json(const ErrorBreakdown& b) {
  return {{"correct", b.correct}, {"value_err", b.value_err}, {"label_err", b.label_err},
          {"missing", b.missing}, {"extra", b.extra}};
}

nlohmann::json group_json(const GroupSummary& g) {
  return {{"key", g.key},
          {"value", g.value},
          {"count", g.count},
          {"rms_precision", g.rms.precision},
          {"rms_recall", g.rms.recall},
          {"rms_f1", g.rms.f1},
          {"rnss", g.rnss},
          {"rd", opt_json(g.rd)},
          {"breakdown", breakdown_json(g.breakdown)},
          {"mean_samples", opt_json(g.mean_samples)},
          {"convergence_rate", opt_json(g.convergence_rate)}};
}

}  // namespace

CorpusReport corpus_report(std::span<const ExampleInput> examples, const MetricConfig& cfg,
                           std::span<const std::string> group_by) {
  if (examples.empty()) throw Error(ErrorKind::EmptyCorpus, "no examples to score");
  cfg.validate();
  CorpusReport report;
  for (const auto& ex : examples) report.examples.push_back(score_example(ex, cfg));

  std::vector<const ExampleScore*> all;
  for (const auto& s : report.examples) all.push_back(&s);
  report.overall = summarize("overall", "all", all);

  for (const auto& key : group_by) {
    std::map<std::string, std::vector<const ExampleScore*>> buckets;
    for (const auto& s : report.examples) {
      auto it = s.metadata.find(key);
      buckets[it == s.metadata.end() ? std::string("(none)") : it->second].push_back(&s);
    }
    for (const auto& [value, xs] : buckets) report.groups.push_back(summarize(key, value, xs));
  }
  return report;
}

std::string report_tsv(const CorpusReport& report) {
  std::string out =
      "group\tvalue\tn\trms_precision\trms_recall\trms_f1\trnss\trd\tcorrect\tvalue_err\tlabel_"
      "err\tmissing\textra\tmean_samples\tconvergence_rate\n";
  auto row = [&](const GroupSummary& g) {
    out += g.key + '\t' + g.value + '\t' + std::to_string(g.count) + '\t' + fixed2(g.rms.precision) +
           '\t' + fixed2(g.rms.recall) + '\t' + fixed2(g.rms.f1) + '\t' + fixed2(100.0 * g.rnss) +
           '\t' + opt2(g.rd, 100.0) + '\t' + fixed2(g.breakdown.correct) + '\t' +
           fixed2(g.breakdown.value_err) + '\t' + fixed2(g.breakdown.label_err) + '\t' +
           fixed2(g.breakdown.missing) + '\t' + fixed2(g.breakdown.extra) + '\t' +
           opt2(g.mean_samples) + '\t' + opt2(g.convergence_rate, 100.0) + '\n';
  };
  row(report.overall);
  for (const auto& g : report.groups) row(g);
  return out;
}

std::string report_json(const CorpusReport& report) {
  nlohmann::json doc;
  doc["overall"] = group_json(report.overall);
  doc["groups"] = nlohmann::json::array();
  for (const auto& g : report.groups) doc["groups"].push_back(group_json(g));
  doc["examples"] = nlohmann::json::array();
  for (const auto& s : report.examples) {
    nlohmann::json e = {{"id", s.id},
                        {"rms_precision", s.rms.precision},
                        {"rms_recall", s.rms.recall},
                        {"rms_f1", s.rms.f1},
                        {"rnss", s.rnss},
                        {"rd", opt_json(s.rd)},
                        {"breakdown", breakdown_json(s.breakdown)},
                        {"metadata", s.metadata}};
    if (s.samples_used) e["samples_used"] = *s.samples_used;
    if (s.converged) e["converged"] = *s.converged;
    doc["examples"].push_back(std::move(e));
  }
  return doc.dump(2);
}

}  // namespace chartens
