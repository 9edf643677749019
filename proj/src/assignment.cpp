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

#include "chartens/assignment.hpp"

#include <algorithm>
#include <limits>

namespace chartens {
namespace {

// Requires n <= m. Returns, for each of the n rows, its column.
std::vector<long> hungarian_wide(std::size_t n, std::size_t m, const auto& at) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  // 1-based with a virtual column 0, as in the classic potentials formulation.
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0), minv(m + 1);
  std::vector<std::size_t> match(m + 1, 0), way(m + 1, 0);
  std::vector<char> used(m + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = match[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        double cur = at(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<long> row_to_col(n, -1);
  for (std::size_t j = 1; j <= m; ++j)
    if (match[j] != 0) row_to_col[match[j] - 1] = static_cast<long>(j - 1);
  return row_to_col;
}

}  // namespace

Assignment solve_assignment(const CostMatrix& cost) {
  Assignment out;
  out.row_to_col.assign(cost.rows, -1);
  out.col_to_row.assign(cost.cols, -1);
  if (cost.rows == 0 || cost.cols == 0) return out;

  if (cost.rows <= cost.cols) {
    auto rc = hungarian_wide(cost.rows, cost.cols,
                             [&](std::size_t r, std::size_t c) { return cost(r, c); });
    for (std::size_t r = 0; r < rc.size(); ++r) {
      out.row_to_col[r] = rc[r];
      out.col_to_row[static_cast<std::size_t>(rc[r])] = static_cast<long>(r);
    }
  } else {
    auto cr = hungarian_wide(cost.cols, cost.rows,
                             [&](std::size_t c, std::size_t r) { return cost(r, c); });
    for (std::size_t c = 0; c < cr.size(); ++c) {
      out.col_to_row[c] = cr[c];
      out.row_to_col[static_cast<std::size_t>(cr[c])] = static_cast<long>(c);
    }
  }
  // Sum from the matrix rather than the potentials to avoid drift.
  for (std::size_t r = 0; r < cost.rows; ++r)
    if (out.row_to_col[r] >= 0) out.total_cost += cost(r, static_cast<std::size_t>(out.row_to_col[r]));
  return out;
}

}  // namespace chartens
