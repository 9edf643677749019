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
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "chartens/ensemble.hpp"
#include "chartens/table.hpp"

namespace chartens::cli {

namespace fs = std::filesystem;

// Throw Io on failure. write_file creates parent directories.
std::string read_file(const fs::path& path);
void write_file(const fs::path& path, std::string_view content);

struct DatasetEntry {
  std::string id;
  std::optional<fs::path> image_path;  // absent for simulation-only corpora
  fs::path truth_path;
  std::map<std::string, std::string> metadata;
};

// Paths in memory are absolute or relative to the working directory; on disk
// they are relative to the index file.
struct DatasetIndex {
  std::vector<DatasetEntry> entries;
};

// Throws InvalidConfig on malformed documents or duplicate ids.
DatasetIndex load_index(const fs::path& path);
void write_index(const DatasetIndex& index, const fs::path& path);

// Canonical TSV ground truth; throws MissingTruth when the file is absent.
NormalizedTable read_truth(const fs::path& path);

// One chart's persisted extraction.
struct RunRecord {
  std::string id;
  std::string config_hash;
  nlohmann::json config;
  std::vector<SampleRecord> samples;
  std::optional<AggregatedTable> table;  // absent when the entry failed
  ConvergenceState convergence;
  UncertaintySummary uncertainty;
  double wall_time_s = 0.0;
  long requests = 0;
  long prompt_tokens = 0;
  long completion_tokens = 0;
  std::string error;  // empty on success
};

// entry_dir/samples/NNN.txt, entry_dir/table.tsv, entry_dir/record.json.
void write_record(const fs::path& entry_dir, const RunRecord& rec);
RunRecord read_record(const fs::path& entry_dir);

// Raw texts of the stored draws, in draw order.
std::vector<std::string> sample_texts(const RunRecord& rec);

// Runs fn(i) for i in [0, n) on up to `jobs` threads. The first exception is
// rethrown after all workers finish.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace chartens::cli
