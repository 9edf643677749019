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

// Data-parallel numeric kernels shared by aggregation, convergence and metrics.
//
// Every kernel has a scalar reference implementation plus AVX2 (x86-64) and
// NEON (aarch64) variants. The dispatching entry points pick the widest ISA the
// CPU supports at first use; CHARTENS_SIMD=scalar|avx2|neon overrides the
// choice. All variants produce bit-identical results: the kernels use only
// IEEE-exact operations (subtract, divide, abs, min, compare).

#include <cstddef>
#include <span>
#include <string_view>

namespace chartens::kernels {

enum class Isa { Scalar, Avx2, Neon };

std::string_view isa_name(Isa isa);
bool isa_available(Isa isa);
Isa active_isa();
// Forces a variant; returns false (and changes nothing) if it is unavailable.
bool set_active_isa(Isa isa);

// out[j] = min(1, |p - g[j]| / |g[j]|); for g[j] == 0 the distance is 0 when
// p == 0 and 1 otherwise.
void clipped_relative_distances(double p, std::span<const double> g, std::span<double> out);

// Number of positions where the value is unchanged: |cur - prev| / |prev| <= tolerance
// for prev != 0, or both zero.
std::size_t count_unchanged(std::span<const double> prev, std::span<const double> cur,
                            double tolerance);

// out[i] = |v[i] - center|
void absolute_deviations(std::span<const double> v, double center, std::span<double> out);

namespace scalar {
void clipped_relative_distances(double p, std::span<const double> g, std::span<double> out);
std::size_t count_unchanged(std::span<const double> prev, std::span<const double> cur,
                            double tolerance);
void absolute_deviations(std::span<const double> v, double center, std::span<double> out);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define CHARTENS_HAVE_AVX2_KERNELS 1
namespace avx2 {
void clipped_relative_distances(double p, std::span<const double> g, std::span<double> out);
std::size_t count_unchanged(std::span<const double> prev, std::span<const double> cur,
                            double tolerance);
void absolute_deviations(std::span<const double> v, double center, std::span<double> out);
}  // namespace avx2
#endif

#if defined(__aarch64__) || defined(_M_ARM64)
#define CHARTENS_HAVE_NEON_KERNELS 1
namespace neon {
void clipped_relative_distances(double p, std::span<const double> g, std::span<double> out);
std::size_t count_unchanged(std::span<const double> prev, std::span<const double> cur,
                            double tolerance);
void absolute_deviations(std::span<const double> v, double center, std::span<double> out);
}  // namespace neon
#endif

}  // namespace chartens::kernels
