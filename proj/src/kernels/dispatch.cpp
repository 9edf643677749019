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

#include <atomic>
#include <cstdlib>
#include <string>

#include "chartens/kernels.hpp"

namespace chartens::kernels {
namespace {

struct KernelTable {
  void (*clipped_relative_distances)(double, std::span<const double>, std::span<double>);
  std::size_t (*count_unchanged)(std::span<const double>, std::span<const double>, double);
  void (*absolute_deviations)(std::span<const double>, double, std::span<double>);
};

constexpr KernelTable kScalar{scalar::clipped_relative_distances, scalar::count_unchanged,
                              scalar::absolute_deviations};
#if defined(CHARTENS_HAVE_AVX2_KERNELS)
constexpr KernelTable kAvx2{avx2::clipped_relative_distances, avx2::count_unchanged,
                            avx2::absolute_deviations};
#endif
#if defined(CHARTENS_HAVE_NEON_KERNELS)
constexpr KernelTable kNeon{neon::clipped_relative_distances, neon::count_unchanged,
                            neon::absolute_deviations};
#endif

const KernelTable& table_for(Isa isa) {
  switch (isa) {
#if defined(CHARTENS_HAVE_AVX2_KERNELS)
    case Isa::Avx2: return kAvx2;
#endif
#if defined(CHARTENS_HAVE_NEON_KERNELS)
    case Isa::Neon: return kNeon;
#endif
    default: return kScalar;
  }
}

Isa best_isa() {
  if (const char* env = std::getenv("CHARTENS_SIMD")) {
    std::string want(env);
    if (want == "scalar") return Isa::Scalar;
    if (want == "avx2" && isa_available(Isa::Avx2)) return Isa::Avx2;
    if (want == "neon" && isa_available(Isa::Neon)) return Isa::Neon;
  }
  if (isa_available(Isa::Avx2)) return Isa::Avx2;
  if (isa_available(Isa::Neon)) return Isa::Neon;
  return Isa::Scalar;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{best_isa()};
  return isa;
}

const KernelTable& active() { return table_for(current().load(std::memory_order_relaxed)); }

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "unknown";
}

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return true;
    case Isa::Avx2:
#if defined(CHARTENS_HAVE_AVX2_KERNELS)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Isa::Neon:
#if defined(CHARTENS_HAVE_NEON_KERNELS)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Isa active_isa() { return current().load(std::memory_order_relaxed); }

bool set_active_isa(Isa isa) {
  if (!isa_available(isa)) return false;
  current().store(isa, std::memory_order_relaxed);
  return true;
}

void clipped_relative_distances(double p, std::span<const double> g, std::span<double> out) {
  active().clipped_relative_distances(p, g, out);
}

std::size_t count_unchanged(std::span<const double> prev, std::span<const double> cur,
                            double tolerance) {
  return active().count_unchanged(prev, cur, tolerance);
}

void absolute_deviations(std::span<const double> v, double center, std::span<double> out) {
  active().absolute_deviations(v, center, out);
}

}  // namespace chartens::kernels
