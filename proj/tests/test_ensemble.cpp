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

#include <doctest.h>

#include <algorithm>
#include <random>

#include "chartens/ensemble.hpp"
#include "chartens/error.hpp"
#include "chartens/sampler.hpp"
#include "chartens/tsv_ingest.hpp"
#include "oracles.hpp"

using namespace chartens;
using chartens::testing::make_table;

namespace {

constexpr Strategy kAll[] = {Strategy::Median, Strategy::Mean, Strategy::Huber,
                             Strategy::WeightedConfidence, Strategy::Ransac};

// 10x10 aggregate with distinct labels and value 100 everywhere.
AggregatedTable grid(std::size_t rows, std::size_t cols) {
  AggregatedTable t;
  for (std::size_t r = 0; r < rows; ++r) t.row_labels.push_back("r" + std::to_string(r));
  for (std::size_t c = 0; c < cols; ++c) t.col_labels.push_back("c" + std::to_string(c));
  t.cells.assign(rows * cols, AggregatedCell{100.0, 1, 0.0});
  return t;
}

class FunctionSampler : public Sampler {
 public:
  explicit FunctionSampler(std::function<std::string(int)> f) : f_(std::move(f)) {}
  std::string sample(int i) override { return f_(i); }

 private:
  std::function<std::string(int)> f_;
};

std::string fenced(const NormalizedTable& t) { return "```tsv\n" + to_tsv(t) + "\n```"; }

}  // namespace

TEST_CASE("robust_estimate examples") {
  for (Strategy s : kAll) CHECK(robust_estimate(std::vector<double>{5.0}, s) == 5.0);
  CHECK(robust_estimate(std::vector<double>{10, 10, 10, 100}, Strategy::Ransac) == 10.0);
  std::vector<double> v = {1, 2, 3, 4, 100};
  CHECK(robust_estimate(v, Strategy::Median) == 3.0);
  CHECK(robust_estimate(v, Strategy::Mean) == 22.0);
  CHECK(robust_estimate(std::vector<double>{10, 12}, Strategy::Median) == 11.0);
  // ceil(0.6 * 5) = 3 values closest to 3: {2, 3, 4}.
  CHECK(robust_estimate(v, Strategy::WeightedConfidence) == 3.0);
  // MAD = 1: inliers {1, 2, 3, 4}, median 2.5.
  CHECK(robust_estimate(v, Strategy::Ransac) == 2.5);
  CHECK(robust_estimate(std::vector<double>{7, 7, 7, 50}, Strategy::Huber) == 7.0);
  double h = robust_estimate(v, Strategy::Huber);
  CHECK(h > 2.0);
  CHECK(h < 5.0);
}

TEST_CASE("strategy names round-trip") {
  for (Strategy s : kAll) CHECK(parse_strategy(to_string(s)) == s);
  CHECK_THROWS_AS(parse_strategy("mode"), Error);
}

TEST_CASE("cell uncertainty and summaries") {
  CHECK(cell_uncertainty(std::vector<double>{10, 10, 10}, 10.0) == 0.0);
  CHECK(*cell_uncertainty(std::vector<double>{9, 10, 11}, 10.0) == doctest::Approx(0.1));
  CHECK_FALSE(cell_uncertainty(std::vector<double>{0, 0}, 0.0).has_value());
  CHECK_FALSE(cell_uncertainty(std::vector<double>{}, 1.0).has_value());

  AggregatedTable t = grid(1, 3);
  t.cells[0].uncertainty = 0.0;
  t.cells[1].uncertainty = 0.1;
  t.cells[2].uncertainty = 0.2;
  auto s = summarize_uncertainty(t);
  CHECK(*s.median == 0.1);
  CHECK(*s.mean == doctest::Approx(0.1));
  CHECK(*s.max == 0.2);

  AggregatedTable none = grid(2, 2);
  for (auto& c : none.cells) c = AggregatedCell{0.0, 1, std::nullopt};
  auto e = summarize_uncertainty(none);
  CHECK_FALSE(e.median.has_value());
  CHECK_FALSE(e.mean.has_value());
  CHECK_FALSE(e.max.has_value());

  AggregatedTable one = grid(1, 1);
  one.cells[0].uncertainty = 0.05;
  auto o = summarize_uncertainty(one);
  CHECK(*o.median == 0.05);
  CHECK(*o.mean == 0.05);
  CHECK(*o.max == 0.05);
}

TEST_CASE("update_is_stable examples") {
  EnsembleConfig cfg;
  auto a = grid(10, 10);
  auto same = update_is_stable(a, a, cfg);
  CHECK(same.stable);
  CHECK(same.fraction_unchanged == 1.0);

  auto b = a;
  b.at(3, 4).value = 150.0;
  b.at(5, 5).value = 100.5;  // within 1%
  auto one = update_is_stable(a, b, cfg);
  CHECK(one.stable);
  CHECK(one.fraction_unchanged == doctest::Approx(0.99));

  // prev has 9 rows, next adds a tenth: 10 of the 100 union cells changed.
  auto prev = grid(9, 10);
  auto grow = update_is_stable(prev, a, cfg);
  CHECK_FALSE(grow.stable);
  CHECK(grow.fraction_unchanged == doctest::Approx(0.90));

  auto z = grid(1, 3);
  z.cells[0].value = 0.0;
  z.cells[1].value = std::nullopt;
  auto z2 = z;
  CHECK(update_is_stable(z, z2, cfg).fraction_unchanged == 1.0);
  z2.cells[0].value = 1e-9;
  CHECK(update_is_stable(z, z2, cfg).fraction_unchanged == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("aggregate examples") {
  EnsembleConfig cfg;
  std::vector<NormalizedTable> ts = {make_table({"2020"}, {"A"}, {10.0}, 0),
                                     make_table({"2020"}, {"A"}, {12.0}, 1),
                                     make_table({"2020"}, {"A"}, {11.0}, 2)};
  auto agg = aggregate(ts, cfg);
  REQUIRE(agg.rows() == 1);
  CHECK(agg.at(0, 0).value == 11.0);
  CHECK(agg.at(0, 0).support == 3);

  std::vector<NormalizedTable> two = {ts[0], ts[1]};
  CHECK(aggregate(two, cfg).at(0, 0).value == 11.0);

  std::vector<NormalizedTable> gap = {make_table({"x", "y"}, {"A", "B"}, {1.0, std::nullopt, 2.0, 3.0}, 0)};
  auto g = aggregate(gap, cfg);
  CHECK_FALSE(g.at(0, 1).value.has_value());
  CHECK(g.at(0, 1).support == 0);

  // Canonical labels sorted lexicographically.
  std::vector<NormalizedTable> order = {make_table({"b", "a"}, {"Z", "Y"}, {1, 2, 3, 4}, 0)};
  auto o = aggregate(order, cfg);
  CHECK(o.row_labels == std::vector<std::string>{"a", "b"});
  CHECK(o.col_labels == std::vector<std::string>{"Y", "Z"});
  CHECK(o.at(0, 0).value == 4.0);

  CHECK_THROWS_AS(aggregate(std::vector<NormalizedTable>{}, cfg), Error);
}

TEST_CASE("controller traces") {
  auto truth = make_table({"2019", "2020", "2021"}, {"Kenya", "Peru"}, {1, 2, 3, 4, 5, 6});
  FunctionSampler same([&](int) { return fenced(truth); });

  EnsembleConfig cfg;
  auto r = run_ensemble(same, cfg);
  CHECK(r.convergence.converged);
  CHECK(r.convergence.samples_used == 4);
  CHECK(*r.convergence.converged_at == 4);
  REQUIRE(r.convergence.per_update_log.size() == 2);
  CHECK(r.convergence.per_update_log[0] == UpdateLog{3, 1.0, true});
  CHECK(r.convergence.per_update_log[1] == UpdateLog{4, 1.0, true});
  CHECK(r.table.values_table().same_content(truth));

  cfg.patience = 1;
  CHECK(run_ensemble(same, cfg).convergence.samples_used == 3);

  // The median of {1, 100, 1, 100, ...} flips with every draw.
  FunctionSampler flip([](int i) {
    return fenced(make_table({"2020", "2021"}, {"A"}, {i % 2 ? 100.0 : 1.0, 5.0}));
  });
  EnsembleConfig dflt;
  auto nf = run_ensemble(flip, dflt);
  CHECK_FALSE(nf.convergence.converged);
  CHECK(nf.convergence.samples_used == 20);
  CHECK(nf.samples.size() == 20);

  dflt.early_stopping = false;
  auto fixed = run_ensemble(same, dflt);
  CHECK(fixed.convergence.samples_used == 20);
  CHECK(*fixed.convergence.converged_at == 4);
}

TEST_CASE("failed draws consume budget") {
  auto truth = make_table({"2019", "2020"}, {"A"}, {1, 2});
  FunctionSampler bad([](int) { return std::string("I cannot read this chart."); });
  EnsembleConfig cfg;
  cfg.k_max = 5;
  try {
    run_ensemble(bad, cfg);
    FAIL("expected NoValidSamples");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NoValidSamples);
  }

  FunctionSampler some([&](int i) { return i == 1 ? std::string("sorry") : fenced(truth); });
  auto r = run_ensemble(some, EnsembleConfig{});
  CHECK(r.samples[1].parsed == false);
  CHECK_FALSE(r.samples[1].error.empty());
  CHECK(r.raw_samples.size() + 1 == r.samples.size());
  CHECK(r.convergence.converged);

  FunctionSampler auth([](int) -> std::string { throw Error(ErrorKind::AuthError, "no key"); });
  CHECK_THROWS_AS(run_ensemble(auth, EnsembleConfig{}), Error);
}

TEST_CASE("estimates stay within the sample range") {
  std::mt19937_64 rng(17);
  std::lognormal_distribution<double> d(0.0, 2.0);
  for (int i = 0; i < 500; ++i) {
    std::vector<double> v(1 + rng() % 12);
    for (auto& x : v) x = (rng() % 2 ? 1 : -1) * d(rng);
    if (rng() % 4 == 0) std::fill(v.begin(), v.begin() + static_cast<long>(v.size() / 2), v.back());
    std::sort(v.begin(), v.end());
    for (Strategy s : kAll) {
      double e = robust_estimate(v, s);
      CHECK(e >= v.front());
      CHECK(e <= v.back());
    }
  }
}

TEST_CASE("strict majority determines the median") {
  std::mt19937_64 rng(18);
  std::uniform_real_distribution<double> u(-1e4, 1e4);
  for (int i = 0; i < 300; ++i) {
    const std::size_t n = 1 + rng() % 15;
    const double g = u(rng);
    std::vector<double> v(n, g);
    for (std::size_t k = 0; k < n - (n + 2) / 2; ++k) v[k] = u(rng);
    std::sort(v.begin(), v.end());
    CHECK(robust_estimate(v, Strategy::Median) == g);
  }
}

TEST_CASE("cell uncertainty is scale-invariant") {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> u(1.0, 2.0);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> v(1 + rng() % 9);
    for (auto& x : v) x = u(rng);
    std::sort(v.begin(), v.end());
    const double y = robust_estimate(v, Strategy::Median);
    const double base = *cell_uncertainty(v, y);
    for (double s : {-3.0, 0.5, 1024.0}) {
      std::vector<double> w = v;
      for (auto& x : w) x *= s;
      CHECK(*cell_uncertainty(w, y * s) == doctest::Approx(base).epsilon(1e-12));
    }
  }
}

TEST_CASE("median aggregation ignores sample order") {
  std::mt19937_64 rng(20);
  NoiseModel nm;
  nm.value_noise_rel = 0.05;
  nm.p_drop_row = 0.1;
  nm.p_label_typo = 0.1;
  nm.seed = 4;
  EnsembleConfig cfg;
  for (int trial = 0; trial < 20; ++trial) {
    auto truth = chartens::testing::random_table(rng, 6, 3);
    std::vector<NormalizedTable> ts;
    for (int i = 0; i < 7; ++i) {
      auto s = chartens::ingest(simulated_sample(truth, nm, trial * 10 + i), i);
      ts.push_back(s);
    }
    auto a = aggregate(ts, cfg);
    std::shuffle(ts.begin(), ts.end(), rng);
    CHECK(aggregate(ts, cfg) == a);
  }
}

TEST_CASE("raising patience or coverage, or lowering tolerance, never stops earlier") {
  std::mt19937_64 rng(21);
  NoiseModel nm;
  nm.value_noise_rel = 0.03;
  nm.p_drop_row = 0.05;
  nm.p_cell_blank = 0.05;
  for (int trial = 0; trial < 30; ++trial) {
    nm.seed = static_cast<std::uint64_t>(trial);
    auto truth = chartens::testing::random_table(rng, 5, 2);
    std::vector<std::string> texts;
    for (int i = 0; i < 20; ++i) texts.push_back(simulated_sample(truth, nm, i));
    auto used = [&](int patience, double coverage, double tolerance) {
      EnsembleConfig cfg;
      cfg.patience = patience;
      cfg.coverage = coverage;
      cfg.tolerance = tolerance;
      return replay_ensemble(texts, cfg).convergence.samples_used;
    };
    CHECK(used(1, 0.95, 0.01) <= used(2, 0.95, 0.01));
    CHECK(used(2, 0.95, 0.01) <= used(3, 0.95, 0.01));
    CHECK(used(2, 0.8, 0.01) <= used(2, 0.95, 0.01));
    CHECK(used(2, 0.95, 0.01) <= used(2, 1.0, 0.01));
    CHECK(used(2, 0.95, 0.1) <= used(2, 0.95, 0.01));
    CHECK(used(2, 0.95, 0.01) <= used(2, 0.95, 0.001));
  }
}

TEST_CASE("runs are deterministic and replayable") {
  std::mt19937_64 rng(22);
  NoiseModel nm;
  nm.value_noise_rel = 0.05;
  nm.p_drop_col = 0.1;
  nm.p_extra_row = 0.2;
  nm.p_transpose = 0.1;
  nm.p_ragged = 0.1;
  nm.seed = 9;
  for (int trial = 0; trial < 10; ++trial) {
    SimulatedSampler s(chartens::testing::random_table(rng, 8, 3), nm);
    EnsembleConfig cfg;
    cfg.strategy = kAll[trial % 5];
    auto a = run_ensemble(s, cfg);
    auto b = run_ensemble(s, cfg);
    CHECK(a.table == b.table);
    CHECK(a.convergence.per_update_log == b.convergence.per_update_log);

    std::vector<std::string> texts;
    for (const auto& rec : a.samples) texts.push_back(rec.text);
    auto replay = replay_ensemble(texts, cfg);
    CHECK(replay.table == a.table);
    CHECK(replay.convergence.samples_used == a.convergence.samples_used);
    CHECK(reaggregate(texts, cfg) == a.table);
  }
}

TEST_CASE("config validation") {
  EnsembleConfig cfg;
  cfg.k_max = 1;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.coverage = 1.5;
  CHECK_THROWS_AS(cfg.validate(), Error);
}
