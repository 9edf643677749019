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

#include <random>
#include <set>

#include "chartens/assignment.hpp"
#include "oracles.hpp"

using namespace chartens;

TEST_CASE("known square instance") {
  CostMatrix m(4, 4);
  const double v[] = {82, 83, 69, 92, 77, 37, 49, 92, 11, 69, 5, 86, 8, 9, 98, 23};
  m.data.assign(std::begin(v), std::end(v));
  auto a = solve_assignment(m);
  CHECK(a.total_cost == 140.0);
  CHECK(a.total_cost == chartens::testing::brute_force_assignment_cost(m));
}

TEST_CASE("empty and degenerate shapes") {
  CHECK(solve_assignment(CostMatrix(0, 3)).row_to_col.empty());
  auto a = solve_assignment(CostMatrix(3, 0));
  CHECK(a.row_to_col == std::vector<long>{-1, -1, -1});
  CostMatrix one(1, 3);
  one.data = {0.7, 0.2, 0.9};
  auto b = solve_assignment(one);
  CHECK(b.row_to_col[0] == 1);
  CHECK(b.col_to_row == std::vector<long>{-1, 0, -1});
}

TEST_CASE("rectangular assignments match exhaustive search") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t r = 1 + rng() % 6, c = 1 + rng() % 6;
    CostMatrix m(r, c);
    for (auto& x : m.data) x = rng() % 4 == 0 ? 1.0 : u(rng);  // include clipped-cost ties
    auto a = solve_assignment(m);
    CHECK(a.total_cost == doctest::Approx(chartens::testing::brute_force_assignment_cost(m)).epsilon(1e-12));
    std::set<long> used;
    std::size_t matched = 0;
    for (std::size_t i = 0; i < r; ++i) {
      if (a.row_to_col[i] < 0) continue;
      ++matched;
      CHECK(used.insert(a.row_to_col[i]).second);
      CHECK(a.col_to_row[static_cast<std::size_t>(a.row_to_col[i])] == static_cast<long>(i));
    }
    CHECK(matched == std::min(r, c));
  }
}
