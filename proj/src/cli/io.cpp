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

#include "chartens/cli/io.hpp"

#include <atomic>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "chartens/error.hpp"
#include "chartens/tsv_ingest.hpp"

namespace chartens::cli {

using nlohmann::json;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(ErrorKind::Io, "short write to " + path.string());
}

// ---------------------------------------------------------------------------
// Dataset index

DatasetIndex load_index(const fs::path& path) {
  auto doc = json::parse(read_file(path), nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorKind::InvalidConfig, "index is not valid JSON: " + path.string());
  const json* entries = &doc;
  if (doc.is_object()) {
    if (!doc.contains("entries")) throw Error(ErrorKind::InvalidConfig, "index has no entries array");
    entries = &doc["entries"];
  }
  if (!entries->is_array()) throw Error(ErrorKind::InvalidConfig, "index entries must be an array");

  const fs::path base = path.parent_path();
  DatasetIndex index;
  std::set<std::string> seen;
  for (const auto& e : *entries) {
    if (!e.is_object() || !e.contains("id") || !e["id"].is_string() || !e.contains("truth_path") ||
        !e["truth_path"].is_string())
      throw Error(ErrorKind::InvalidConfig, "index entry needs string id and truth_path: " + e.dump());
    DatasetEntry d;
    d.id = e["id"].get<std::string>();
    if (!seen.insert(d.id).second) throw Error(ErrorKind::InvalidConfig, "duplicate id in index: " + d.id);
    d.truth_path = base / e["truth_path"].get<std::string>();
    if (e.contains("image_path") && e["image_path"].is_string())
      d.image_path = base / e["image_path"].get<std::string>();
    if (e.contains("metadata")) {
      if (!e["metadata"].is_object()) throw Error(ErrorKind::InvalidConfig, "metadata must be an object");
      for (const auto& [k, v] : e["metadata"].items())
        d.metadata[k] = v.is_string() ? v.get<std::string>() : v.dump();
    }
    index.entries.push_back(std::move(d));
  }
  return index;
}

void write_index(const DatasetIndex& index, const fs::path& path) {
  const fs::path base = path.parent_path().empty() ? fs::path(".") : path.parent_path();
  auto rel = [&](const fs::path& p) { return p.lexically_relative(base).generic_string(); };
  json entries = json::array();
  for (const auto& d : index.entries) {
    json e = {{"id", d.id}, {"truth_path", rel(d.truth_path)}, {"metadata", d.metadata}};
    if (d.image_path) e["image_path"] = rel(*d.image_path);
    entries.push_back(std::move(e));
  }
  write_file(path, json{{"entries", entries}}.dump(2) + "\n");
}

NormalizedTable read_truth(const fs::path& path) {
  if (!fs::exists(path)) throw Error(ErrorKind::MissingTruth, "no ground truth at " + path.string());
  return ingest(read_file(path), 0);
}

// ---------------------------------------------------------------------------
// Run records

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(); }

std::optional<double> opt_of(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<double>();
}

std::string sample_name(int draw_index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%03d.txt", draw_index);
  return buf;
}

json table_json(const AggregatedTable& t) {
  json cells = json::array();
  for (const auto& c : t.cells)
    cells.push_back({{"value", opt(c.value)}, {"support", c.support}, {"uncertainty", opt(c.uncertainty)}});
  return {{"row_labels", t.row_labels}, {"col_labels", t.col_labels}, {"cells", cells}};
}

AggregatedTable table_of(const json& j) {
  AggregatedTable t;
  t.row_labels = j.at("row_labels").get<std::vector<std::string>>();
  t.col_labels = j.at("col_labels").get<std::vector<std::string>>();
  for (const auto& c : j.at("cells"))
    t.cells.push_back({opt_of(c, "value"), c.at("support").get<std::size_t>(), opt_of(c, "uncertainty")});
  if (t.cells.size() != t.rows() * t.cols()) throw Error(ErrorKind::Io, "stored table has wrong cell count");
  return t;
}

}  // namespace

void write_record(const fs::path& dir, const RunRecord& rec) {
  json samples = json::array();
  for (const auto& s : rec.samples) {
    const std::string name = sample_name(s.draw_index);
    write_file(dir / "samples" / name, s.text);
    samples.push_back({{"draw_index", s.draw_index}, {"file", "samples/" + name}, {"parsed", s.parsed},
                       {"error", s.error}});
  }
  json log = json::array();
  for (const auto& u : rec.convergence.per_update_log)
    log.push_back({{"k", u.k}, {"fraction_unchanged", u.fraction_unchanged}, {"stable", u.stable}});
  const auto& c = rec.convergence;
  json doc = {
      {"id", rec.id},
      {"config_hash", rec.config_hash},
      {"config", rec.config},
      {"samples", samples},
      {"convergence",
       {{"samples_used", c.samples_used},
        {"converged", c.converged},
        {"converged_at", c.converged_at ? json(*c.converged_at) : json()},
        {"consecutive_stable", c.consecutive_stable},
        {"per_update_log", log}}},
      {"uncertainty",
       {{"u_med", opt(rec.uncertainty.median)}, {"u_mean", opt(rec.uncertainty.mean)}, {"u_max", opt(rec.uncertainty.max)}}},
      {"wall_time_s", rec.wall_time_s},
      {"requests", rec.requests},
      {"prompt_tokens", rec.prompt_tokens},
      {"completion_tokens", rec.completion_tokens},
      {"error", rec.error},
      {"table", rec.table ? table_json(*rec.table) : json()},
  };
  if (rec.table) write_file(dir / "table.tsv", to_tsv(*rec.table) + "\n");
  write_file(dir / "record.json", doc.dump(2) + "\n");
}

RunRecord read_record(const fs::path& dir) {
  auto doc = json::parse(read_file(dir / "record.json"), nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorKind::Io, "corrupt record in " + dir.string());
  try {
    RunRecord rec;
    rec.id = doc.at("id").get<std::string>();
    rec.config_hash = doc.value("config_hash", "");
    rec.config = doc.value("config", json::object());
    for (const auto& s : doc.at("samples")) {
      SampleRecord r;
      r.draw_index = s.at("draw_index").get<int>();
      r.parsed = s.at("parsed").get<bool>();
      r.error = s.value("error", "");
      r.text = read_file(dir / s.at("file").get<std::string>());
      rec.samples.push_back(std::move(r));
    }
    const auto& c = doc.at("convergence");
    rec.convergence.samples_used = c.at("samples_used").get<int>();
    rec.convergence.converged = c.at("converged").get<bool>();
    if (!c.at("converged_at").is_null()) rec.convergence.converged_at = c["converged_at"].get<int>();
    rec.convergence.consecutive_stable = c.value("consecutive_stable", 0);
    for (const auto& u : c.at("per_update_log"))
      rec.convergence.per_update_log.push_back(
          {u.at("k").get<int>(), u.at("fraction_unchanged").get<double>(), u.at("stable").get<bool>()});
    const auto& u = doc.at("uncertainty");
    rec.uncertainty = {opt_of(u, "u_med"), opt_of(u, "u_mean"), opt_of(u, "u_max")};
    rec.wall_time_s = doc.value("wall_time_s", 0.0);
    rec.requests = doc.value("requests", 0L);
    rec.prompt_tokens = doc.value("prompt_tokens", 0L);
    rec.completion_tokens = doc.value("completion_tokens", 0L);
    rec.error = doc.value("error", "");
    if (!doc.at("table").is_null()) rec.table = table_of(doc["table"]);
    return rec;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Io, "malformed record in " + dir.string() + ": " + e.what());
  }
}

std::vector<std::string> sample_texts(const RunRecord& rec) {
  std::vector<std::string> out;
  for (const auto& s : rec.samples) out.push_back(s.text);
  return out;
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next++) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!first) first = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

}  // namespace chartens::cli
