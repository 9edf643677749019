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

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "chartens/ensemble.hpp"
#include "chartens/metrics.hpp"
#include "chartens/sampler.hpp"

namespace chartens::cli {

enum class SamplerKind { Vlm, Simulated };

std::string_view to_string(SamplerKind k);
SamplerKind parse_sampler_kind(std::string_view name);

// Everything a batch run depends on. JSON keys mirror the field names.
struct RunConfig {
  EnsembleConfig ensemble;
  SamplerConfig sampler;
  NoiseModel noise;
  MetricConfig metric;
  SamplerKind sampler_kind = SamplerKind::Vlm;
  int jobs = 1;
  std::uint64_t seed = 0;
  int max_concurrent_requests = 4;
  double max_requests_per_s = 0.0;  // 0 = unlimited

  void validate() const;
};

nlohmann::json config_to_json(const RunConfig& cfg);
// Overlays the keys present in doc. Unknown keys throw InvalidConfig.
void apply_config_json(RunConfig& cfg, const nlohmann::json& doc);
RunConfig load_config_file(const std::filesystem::path& path);
// FNV-1a of the canonical JSON dump, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

}  // namespace chartens::cli
