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

#include "chartens/cli/config.hpp"

#include <cstdio>

#include "chartens/cli/io.hpp"
#include "chartens/error.hpp"

namespace chartens::cli {

using nlohmann::json;

std::string_view to_string(SamplerKind k) { return k == SamplerKind::Vlm ? "vlm" : "simulated"; }

SamplerKind parse_sampler_kind(std::string_view name) {
  if (name == "vlm") return SamplerKind::Vlm;
  if (name == "simulated") return SamplerKind::Simulated;
  throw Error(ErrorKind::InvalidConfig, "unknown sampler '" + std::string(name) + "'");
}

void RunConfig::validate() const {
  ensemble.validate();
  sampler.validate();
  noise.validate();
  metric.validate();
  if (jobs < 1) throw Error(ErrorKind::InvalidConfig, "jobs must be >= 1");
  if (max_concurrent_requests < 1) throw Error(ErrorKind::InvalidConfig, "max_concurrent_requests must be >= 1");
  if (!(max_requests_per_s >= 0.0)) throw Error(ErrorKind::InvalidConfig, "max_requests_per_s must be >= 0");
}

json config_to_json(const RunConfig& c) {
  const auto& e = c.ensemble;
  const auto& s = c.sampler;
  const auto& n = c.noise;
  return {
      {"ensemble",
       {{"strategy", to_string(e.strategy)},
        {"k_max", e.k_max},
        {"patience", e.patience},
        {"coverage", e.coverage},
        {"tolerance", e.tolerance},
        {"initial_samples", e.initial_samples},
        {"early_stopping", e.early_stopping},
        {"cluster_tau", e.align.cluster_tau},
        {"prune_fraction", e.align.prune_fraction}}},
      {"sampler",
       {{"endpoint_url", s.endpoint_url},
        {"model_id", s.model_id},
        {"temperature", s.temperature},
        {"api_key_env", s.api_key_env},
        {"request_timeout_s", s.request_timeout_s},
        {"max_retries", s.max_retries},
        {"backoff_base_s", s.backoff_base_s},
        {"prompt_text", s.prompt_text}}},
      {"noise",
       {{"value_noise_rel", n.value_noise_rel},
        {"p_drop_row", n.p_drop_row},
        {"p_drop_col", n.p_drop_col},
        {"p_extra_row", n.p_extra_row},
        {"p_label_typo", n.p_label_typo},
        {"p_transpose", n.p_transpose},
        {"p_cell_blank", n.p_cell_blank},
        {"p_ragged", n.p_ragged},
        {"p_outlier", n.p_outlier},
        {"outlier_factor", n.outlier_factor},
        {"seed", n.seed}}},
      {"metric", {{"tau_key", c.metric.tau_key}, {"theta_val", c.metric.theta_val}}},
      {"sampler_kind", to_string(c.sampler_kind)},
      {"jobs", c.jobs},
      {"seed", c.seed},
      {"max_concurrent_requests", c.max_concurrent_requests},
      {"max_requests_per_s", c.max_requests_per_s},
  };
}

namespace {

template <typename T>
void take(const json& obj, const char* key, T& out, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidConfig, where + "." + key + ": " + e.what());
  }
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw Error(ErrorKind::InvalidConfig, where + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok |= key == a;
    if (!ok) throw Error(ErrorKind::InvalidConfig, "unknown config key " + where + "." + key);
  }
}

}  // namespace

void apply_config_json(RunConfig& c, const json& doc) {
  check_keys(doc, {"ensemble", "sampler", "noise", "metric", "sampler_kind", "jobs", "seed",
                   "max_concurrent_requests", "max_requests_per_s"},
             "config");
  if (auto it = doc.find("ensemble"); it != doc.end()) {
    const json& e = *it;
    check_keys(e, {"strategy", "k_max", "patience", "coverage", "tolerance", "initial_samples",
                   "early_stopping", "cluster_tau", "prune_fraction"},
               "ensemble");
    std::string strategy(to_string(c.ensemble.strategy));
    take(e, "strategy", strategy, "ensemble");
    c.ensemble.strategy = parse_strategy(strategy);
    take(e, "k_max", c.ensemble.k_max, "ensemble");
    take(e, "patience", c.ensemble.patience, "ensemble");
    take(e, "coverage", c.ensemble.coverage, "ensemble");
    take(e, "tolerance", c.ensemble.tolerance, "ensemble");
    take(e, "initial_samples", c.ensemble.initial_samples, "ensemble");
    take(e, "early_stopping", c.ensemble.early_stopping, "ensemble");
    take(e, "cluster_tau", c.ensemble.align.cluster_tau, "ensemble");
    take(e, "prune_fraction", c.ensemble.align.prune_fraction, "ensemble");
  }
  if (auto it = doc.find("sampler"); it != doc.end()) {
    const json& s = *it;
    check_keys(s, {"endpoint_url", "model_id", "temperature", "api_key_env", "request_timeout_s",
                   "max_retries", "backoff_base_s", "prompt_text"},
               "sampler");
    take(s, "endpoint_url", c.sampler.endpoint_url, "sampler");
    take(s, "model_id", c.sampler.model_id, "sampler");
    take(s, "temperature", c.sampler.temperature, "sampler");
    take(s, "api_key_env", c.sampler.api_key_env, "sampler");
    take(s, "request_timeout_s", c.sampler.request_timeout_s, "sampler");
    take(s, "max_retries", c.sampler.max_retries, "sampler");
    take(s, "backoff_base_s", c.sampler.backoff_base_s, "sampler");
    take(s, "prompt_text", c.sampler.prompt_text, "sampler");
  }
  if (auto it = doc.find("noise"); it != doc.end()) {
    const json& n = *it;
    check_keys(n, {"value_noise_rel", "p_drop_row", "p_drop_col", "p_extra_row", "p_label_typo",
                   "p_transpose", "p_cell_blank", "p_ragged", "p_outlier", "outlier_factor", "seed"},
               "noise");
    take(n, "value_noise_rel", c.noise.value_noise_rel, "noise");
    take(n, "p_drop_row", c.noise.p_drop_row, "noise");
    take(n, "p_drop_col", c.noise.p_drop_col, "noise");
    take(n, "p_extra_row", c.noise.p_extra_row, "noise");
    take(n, "p_label_typo", c.noise.p_label_typo, "noise");
    take(n, "p_transpose", c.noise.p_transpose, "noise");
    take(n, "p_cell_blank", c.noise.p_cell_blank, "noise");
    take(n, "p_ragged", c.noise.p_ragged, "noise");
    take(n, "p_outlier", c.noise.p_outlier, "noise");
    take(n, "outlier_factor", c.noise.outlier_factor, "noise");
    take(n, "seed", c.noise.seed, "noise");
  }
  if (auto it = doc.find("metric"); it != doc.end()) {
    check_keys(*it, {"tau_key", "theta_val"}, "metric");
    take(*it, "tau_key", c.metric.tau_key, "metric");
    take(*it, "theta_val", c.metric.theta_val, "metric");
  }
  std::string kind(to_string(c.sampler_kind));
  take(doc, "sampler_kind", kind, "config");
  c.sampler_kind = parse_sampler_kind(kind);
  take(doc, "jobs", c.jobs, "config");
  take(doc, "seed", c.seed, "config");
  take(doc, "max_concurrent_requests", c.max_concurrent_requests, "config");
  take(doc, "max_requests_per_s", c.max_requests_per_s, "config");
}

RunConfig load_config_file(const std::filesystem::path& path) {
  auto doc = json::parse(read_file(path), nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorKind::InvalidConfig, "config is not valid JSON: " + path.string());
  RunConfig cfg;
  apply_config_json(cfg, doc);
  return cfg;
}

std::string config_hash(const RunConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : config_to_json(cfg).dump()) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace chartens::cli
