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

#include <chrono>
#include <cstdio>
#include <mutex>
#include <ostream>

#include "chartens/cli/commands.hpp"
#include "chartens/error.hpp"

namespace chartens::cli {

std::uint64_t entry_seed(std::uint64_t base, std::string_view id) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : id) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  // splitmix64 finalizer over the combined value
  std::uint64_t z = base + 0x9e3779b97f4a7c15ull * (h | 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::unique_ptr<Sampler> make_sampler(const DatasetEntry& entry, const RunConfig& cfg,
                                      std::shared_ptr<RequestGate> gate, std::shared_ptr<RequestStats> stats) {
  if (cfg.sampler_kind == SamplerKind::Simulated) {
    NoiseModel nm = cfg.noise;
    nm.seed = entry_seed(cfg.noise.seed ^ cfg.seed, entry.id);
    return std::make_unique<SimulatedSampler>(read_truth(entry.truth_path), nm);
  }
  if (!entry.image_path) throw Error(ErrorKind::Io, "entry " + entry.id + " has no image_path");
  std::string image = read_file(*entry.image_path);
  if (image.empty()) throw Error(ErrorKind::Io, "empty image " + entry.image_path->string());
  return std::make_unique<VlmSampler>(std::move(image), cfg.sampler, std::move(gate), std::move(stats));
}

namespace {

std::string fmt(double v, const char* f = "%.4f") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

std::string one_line(std::string s) {
  for (auto& ch : s)
    if (ch == '\t' || ch == '\n' || ch == '\r') ch = ' ';
  return s;
}

struct EntryOutcome {
  RunRecord record;
  std::optional<double> f1;
};

}  // namespace

ExtractSummary cmd_extract(const DatasetIndex& index, const RunConfig& cfg, const fs::path& out_dir,
                           std::ostream& log) {
  cfg.validate();
  const auto cfg_json = config_to_json(cfg);
  const std::string hash = config_hash(cfg);
  write_file(out_dir / "config.json", cfg_json.dump(2) + "\n");

  auto gate = std::make_shared<RequestGate>(cfg.max_concurrent_requests, cfg.max_requests_per_s);
  std::vector<EntryOutcome> outcomes(index.entries.size());
  std::mutex log_mu;

  parallel_for(index.entries.size(), cfg.jobs, [&](std::size_t i) {
    const auto& entry = index.entries[i];
    auto& out = outcomes[i];
    out.record.id = entry.id;
    out.record.config_hash = hash;
    out.record.config = cfg_json;
    auto stats = std::make_shared<RequestStats>();
    const auto t0 = std::chrono::steady_clock::now();
    try {
      auto sampler = make_sampler(entry, cfg, gate, stats);
      auto result = run_ensemble(*sampler, cfg.ensemble);
      out.record.samples = std::move(result.samples);
      out.record.table = std::move(result.table);
      out.record.convergence = result.convergence;
      out.record.uncertainty = result.uncertainty;
      if (fs::exists(entry.truth_path)) {
        auto truth = to_triples(read_truth(entry.truth_path));
        out.f1 = rms_scores(to_triples(*out.record.table), truth, cfg.metric).f1;
      }
    } catch (const Error& e) {
      out.record.error = e.what();
    } catch (const std::exception& e) {
      out.record.error = std::string("unexpected: ") + e.what();
    }
    out.record.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.record.requests = stats->requests;
    out.record.prompt_tokens = stats->prompt_tokens;
    out.record.completion_tokens = stats->completion_tokens;
    try {
      write_record(out_dir / entry.id, out.record);
    } catch (const Error& e) {
      if (out.record.error.empty()) out.record.error = e.what();
    }
    if (!out.record.error.empty()) {
      std::lock_guard lock(log_mu);
      log << "entry " << entry.id << " failed: " << out.record.error << "\n";
    }
  });

  ExtractSummary s;
  s.entries = outcomes.size();
  std::string tsv = "id\tstatus\tsamples_used\tconverged\tu_med\tu_mean\tu_max\trms_f1\trequests\twall_time_s\terror\n";
  double samples_sum = 0.0, f1_sum = 0.0;
  std::size_t f1_n = 0;
  auto opt4 = [](const std::optional<double>& v) { return v ? fmt(*v) : std::string(); };
  for (const auto& o : outcomes) {
    const auto& r = o.record;
    const bool ok = r.error.empty();
    if (!ok) ++s.failed;
    if (ok) {
      samples_sum += r.convergence.samples_used;
      if (r.convergence.converged) ++s.converged;
    }
    if (o.f1) f1_sum += *o.f1, ++f1_n;
    tsv += r.id + '\t' + (ok ? "ok" : "failed") + '\t' +
           (ok ? std::to_string(r.convergence.samples_used) : std::string()) + '\t' +
           (ok ? (r.convergence.converged ? "1" : "0") : std::string()) + '\t' + opt4(r.uncertainty.median) +
           '\t' + opt4(r.uncertainty.mean) + '\t' + opt4(r.uncertainty.max) + '\t' +
           (o.f1 ? fmt(*o.f1, "%.2f") : std::string()) + '\t' + std::to_string(r.requests) + '\t' +
           fmt(r.wall_time_s, "%.3f") + '\t' + one_line(r.error) + '\n';
  }
  write_file(out_dir / "summary.tsv", tsv);
  const std::size_t ok = s.entries - s.failed;
  if (ok) s.mean_samples = samples_sum / static_cast<double>(ok);
  if (f1_n) s.mean_f1 = f1_sum / static_cast<double>(f1_n);

  log << "extracted " << ok << "/" << s.entries << " entries; convergence rate "
      << fmt(ok ? 100.0 * static_cast<double>(s.converged) / static_cast<double>(ok) : 0.0, "%.1f")
      << "%; mean samples " << fmt(s.mean_samples, "%.2f");
  if (s.mean_f1) log << "; mean RMS_F1 " << fmt(*s.mean_f1, "%.2f");
  log << "\n";
  return s;
}

}  // namespace chartens::cli
