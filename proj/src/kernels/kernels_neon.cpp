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

#include "chartens/kernels.hpp"

#if defined(CHARTENS_HAVE_NEON_KERNELS)
#include <arm_neon.h>

namespace chartens::kernels::neon {

void clipped_relative_distances(double p, std::span<const double> g, std::span<double> out) {
  const float64x2_t vp = vdupq_n_f64(p);
  const float64x2_t one = vdupq_n_f64(1.0);
  const float64x2_t zero_case = vdupq_n_f64(p == 0.0 ? 0.0 : 1.0);
  std::size_t j = 0;
  for (; j + 2 <= g.size(); j += 2) {
    float64x2_t vg = vld1q_f64(g.data() + j);
    float64x2_t q = vdivq_f64(vabsq_f64(vsubq_f64(vp, vg)), vabsq_f64(vg));
    float64x2_t clipped = vminq_f64(q, one);
    uint64x2_t g_zero = vceqzq_f64(vg);
    vst1q_f64(out.data() + j, vbslq_f64(g_zero, zero_case, clipped));
  }
  if (j < g.size())
    scalar::clipped_relative_distances(p, g.subspan(j), out.subspan(j));
}

std::size_t count_unchanged(std::span<const double> prev, std::span<const double> cur,
                            double tolerance) {
  const float64x2_t tol = vdupq_n_f64(tolerance);
  std::size_t n = 0;
  std::size_t i = 0;
  for (; i + 2 <= prev.size(); i += 2) {
    float64x2_t a = vld1q_f64(prev.data() + i);
    float64x2_t b = vld1q_f64(cur.data() + i);
    float64x2_t q = vdivq_f64(vabsq_f64(vsubq_f64(b, a)), vabsq_f64(a));
    uint64x2_t a_zero = vceqzq_f64(a);
    uint64x2_t within = vbicq_u64(vcleq_f64(q, tol), a_zero);
    uint64x2_t both_zero = vandq_u64(a_zero, vceqzq_f64(b));
    uint64x2_t hit = vshrq_n_u64(vorrq_u64(within, both_zero), 63);
    n += vgetq_lane_u64(hit, 0) + vgetq_lane_u64(hit, 1);
  }
  if (i < prev.size()) n += scalar::count_unchanged(prev.subspan(i), cur.subspan(i), tolerance);
  return n;
}

void absolute_deviations(std::span<const double> v, double center, std::span<double> out) {
  const float64x2_t c = vdupq_n_f64(center);
  std::size_t i = 0;
  for (; i + 2 <= v.size(); i += 2)
    vst1q_f64(out.data() + i, vabsq_f64(vsubq_f64(vld1q_f64(v.data() + i), c)));
  if (i < v.size()) scalar::absolute_deviations(v.subspan(i), center, out.subspan(i));
}

}  // namespace chartens::kernels::neon
#endif
