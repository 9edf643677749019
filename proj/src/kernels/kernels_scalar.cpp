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

#include "chartens/kernels.hpp"

namespace chartens::kernels::scalar {

void clipped_relative_distances(double p, std::span<const double> g, std::span<double> out) {
  for (std::size_t j = 0; j < g.size(); ++j) {
    if (g[j] == 0.0)
      out[j] = p == 0.0 ? 0.0 : 1.0;
    else
      out[j] = std::min(std::fabs(p - g[j]) / std::fabs(g[j]), 1.0);
  }
}

std::size_t count_unchanged(std::span<const double> prev, std::span<const double> cur,
                            double tolerance) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < prev.size(); ++i) {
    if (prev[i] == 0.0)
      n += cur[i] == 0.0;
    else
      n += std::fabs(cur[i] - prev[i]) / std::fabs(prev[i]) <= tolerance;
  }
  return n;
}

void absolute_deviations(std::span<const double> v, double center, std::span<double> out) {
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::fabs(v[i] - center);
}

}  // namespace chartens::kernels::scalar
