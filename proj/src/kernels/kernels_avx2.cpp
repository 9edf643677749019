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

// Compiled with -mavx2; only reached through the runtime dispatcher.
#include <immintrin.h>

#include <bit>

#include "chartens/kernels.hpp"

namespace chartens::kernels::avx2 {
namespace {

inline __m256d abs_pd(__m256d x) { return _mm256_andnot_pd(_mm256_set1_pd(-0.0), x); }

}  // namespace

void clipped_relative_distances(double p, std::span<const double> g, std::span<double> out) {
  const __m256d vp = _mm256_set1_pd(p);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d zero = _mm256_setzero_pd();
  // Result for zero denominators does not depend on g, so hoist it.
  const __m256d zero_case = p == 0.0 ? zero : one;
  std::size_t j = 0;
  for (; j + 4 <= g.size(); j += 4) {
    __m256d vg = _mm256_loadu_pd(g.data() + j);
    __m256d q = _mm256_div_pd(abs_pd(_mm256_sub_pd(vp, vg)), abs_pd(vg));
    // min(q, 1) with q first: NaN from 0/0 propagates 1, overwritten below anyway.
    __m256d clipped = _mm256_min_pd(q, one);
    __m256d g_zero = _mm256_cmp_pd(vg, zero, _CMP_EQ_OQ);
    _mm256_storeu_pd(out.data() + j, _mm256_blendv_pd(clipped, zero_case, g_zero));
  }
  if (j < g.size())
    scalar::clipped_relative_distances(p, g.subspan(j), out.subspan(j));
}

std::size_t count_unchanged(std::span<const double> prev, std::span<const double> cur,
                            double tolerance) {
  const __m256d tol = _mm256_set1_pd(tolerance);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t n = 0;
  std::size_t i = 0;
  for (; i + 4 <= prev.size(); i += 4) {
    __m256d a = _mm256_loadu_pd(prev.data() + i);
    __m256d b = _mm256_loadu_pd(cur.data() + i);
    __m256d q = _mm256_div_pd(abs_pd(_mm256_sub_pd(b, a)), abs_pd(a));
    __m256d a_zero = _mm256_cmp_pd(a, zero, _CMP_EQ_OQ);
    __m256d within = _mm256_andnot_pd(a_zero, _mm256_cmp_pd(q, tol, _CMP_LE_OQ));
    __m256d both_zero = _mm256_and_pd(a_zero, _mm256_cmp_pd(b, zero, _CMP_EQ_OQ));
    int mask = _mm256_movemask_pd(_mm256_or_pd(within, both_zero));
    n += static_cast<std::size_t>(std::popcount(static_cast<unsigned>(mask)));
  }
  if (i < prev.size()) n += scalar::count_unchanged(prev.subspan(i), cur.subspan(i), tolerance);
  return n;
}

void absolute_deviations(std::span<const double> v, double center, std::span<double> out) {
  const __m256d c = _mm256_set1_pd(center);
  std::size_t i = 0;
  for (; i + 4 <= v.size(); i += 4)
    _mm256_storeu_pd(out.data() + i, abs_pd(_mm256_sub_pd(_mm256_loadu_pd(v.data() + i), c)));
  if (i < v.size()) scalar::absolute_deviations(v.subspan(i), center, out.subspan(i));
}

}  // namespace chartens::kernels::avx2
