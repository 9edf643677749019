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

#include <ostream>

#include "chartens/cli/commands.hpp"
#include "chartens/error.hpp"
#include "chartens/tsv_ingest.hpp"

namespace chartens::cli {

EvaluateResult cmd_evaluate(const DatasetIndex& index, const EvaluateSource& src, const MetricConfig& cfg,
                            const std::vector<std::string>& group_by, std::ostream& log) {
  if (src.run_dir.has_value() == src.pred_dir.has_value())
    throw Error(ErrorKind::InvalidConfig, "give exactly one of a run directory or a predictions directory");
  cfg.validate();
  EvaluateResult res;
  std::vector<ExampleInput> examples;
  for (const auto& entry : index.entries) {
    ExampleInput ex;
    ex.id = entry.id;
    ex.metadata = entry.metadata;
    try {
      ex.truth = to_triples(read_truth(entry.truth_path));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::MissingTruth) throw;
      log << "entry " << entry.id << ": " << e.what() << "\n";
      res.missing_truth.push_back(entry.id);
      continue;
    }
    const fs::path pred = src.run_dir ? *src.run_dir / entry.id / "table.tsv" : *src.pred_dir / (entry.id + ".tsv");
    if (fs::exists(pred)) {
      try {
        ex.prediction = to_triples(ingest(read_file(pred), 0));
      } catch (const Error& e) {
        log << "warning: entry " << entry.id << ": unreadable prediction scored as empty (" << e.what() << ")\n";
      }
    } else {
      log << "warning: entry " << entry.id << ": no prediction at " << pred.string() << ", scored as empty\n";
      res.missing_prediction.push_back(entry.id);
    }
    if (src.run_dir && fs::exists(*src.run_dir / entry.id / "record.json")) {
      auto rec = read_record(*src.run_dir / entry.id);
      if (rec.error.empty()) {
        ex.samples_used = rec.convergence.samples_used;
        ex.converged = rec.convergence.converged;
      }
    }
    examples.push_back(std::move(ex));
  }
  res.report = corpus_report(examples, cfg, group_by);
  return res;
}

}  // namespace chartens::cli
