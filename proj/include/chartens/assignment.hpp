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

#include <cstddef>
#include <vector>

namespace chartens {

// Dense row-major cost matrix.
struct CostMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  CostMatrix() = default;
  CostMatrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

struct Assignment {
  // row_to_col[r] is the matched column, or -1 when row r is left unmatched.
  std::vector<long> row_to_col;
  // col_to_row[c] is the matched row, or -1.
  std::vector<long> col_to_row;
  double total_cost = 0.0;
};

// Minimum-cost assignment for a rectangular matrix (Hungarian method with
// potentials, O(n^2 m)). Exactly min(rows, cols) pairs are matched; entries
// on the larger side that stay unmatched cost nothing.
Assignment solve_assignment(const CostMatrix& cost);

}  // namespace chartens
