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

#include <CLI11.hpp>

#include <functional>
#include <iostream>
#include <sstream>

#include "chartens/cli/commands.hpp"
#include "chartens/error.hpp"

namespace chartens::cli {

namespace {

// Flag values land here first; only flags given on the command line are
// copied over the (default or file-loaded) RunConfig.
struct Flags {
  std::string config_path;
  std::string strategy, sampler, endpoint, model, api_key_env;
  int k_max = 0, patience = 0, jobs = 0, max_retries = 0, max_concurrent = 0;
  double coverage = 0, tolerance = 0, prune = 0, cluster_tau = 0, temperature = 0, timeout = 0, max_rps = 0;
  double tau_key = 0, theta_val = 0;
  std::uint64_t seed = 0, noise_seed = 0;
  double sigma = 0, p_drop_row = 0, p_drop_col = 0, p_extra_row = 0, p_label_typo = 0, p_transpose = 0,
         p_cell_blank = 0, p_ragged = 0, p_outlier = 0, outlier_factor = 0;
  bool no_early_stop = false;

  std::vector<std::pair<CLI::Option*, std::function<void(RunConfig&)>>> overrides;

  template <typename T, typename F>
  void option(CLI::App* app, const std::string& name, T& slot, const std::string& desc, F apply) {
    CLI::Option* o = app->add_option(name, slot, desc);
    overrides.emplace_back(o, [&slot, apply](RunConfig& c) { apply(c, slot); });
  }

  RunConfig resolve() const {
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_config_file(config_path);
    for (const auto& [opt, apply] : overrides)
      if (opt->count() > 0) apply(cfg);
    cfg.validate();
    return cfg;
  }
};

void add_shared(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config_path, "JSON config file (flags override it)")->check(CLI::ExistingFile);
  f.option(app, "--seed", f.seed, "Base random seed", [](RunConfig& c, auto v) { c.seed = v; });
  f.option(app, "--jobs", f.jobs, "Parallel entries", [](RunConfig& c, auto v) { c.jobs = v; });
}

void add_ensemble(CLI::App* app, Flags& f, bool strategy_list) {
  if (strategy_list)
    app->add_option("--strategy", f.strategy, "Aggregation strategies, comma separated");
  else
    f.option(app, "--strategy", f.strategy, "median, mean, huber, weighted_confidence or ransac",
             [](RunConfig& c, const std::string& v) { c.ensemble.strategy = parse_strategy(v); });
  f.option(app, "--k-max", f.k_max, "Maximum samples per chart", [](RunConfig& c, auto v) { c.ensemble.k_max = v; });
  f.option(app, "--patience", f.patience, "Consecutive stable updates required",
           [](RunConfig& c, auto v) { c.ensemble.patience = v; });
  f.option(app, "--coverage", f.coverage, "Fraction of cells that must be stable",
           [](RunConfig& c, auto v) { c.ensemble.coverage = v; });
  f.option(app, "--tolerance", f.tolerance, "Relative change counted as stable",
           [](RunConfig& c, auto v) { c.ensemble.tolerance = v; });
  f.option(app, "--prune-threshold", f.prune, "Minimum label support fraction",
           [](RunConfig& c, auto v) { c.ensemble.align.prune_fraction = v; });
  f.option(app, "--cluster-tau", f.cluster_tau, "Label clustering similarity threshold",
           [](RunConfig& c, auto v) { c.ensemble.align.cluster_tau = v; });
  auto* nes = app->add_flag("--no-early-stop", f.no_early_stop, "Always draw k-max samples");
  f.overrides.emplace_back(nes, [&f](RunConfig& c) { c.ensemble.early_stopping = !f.no_early_stop; });
  f.option(app, "--tau-key", f.tau_key, "Metric key distance threshold", [](RunConfig& c, auto v) { c.metric.tau_key = v; });
  f.option(app, "--theta-val", f.theta_val, "Metric value error threshold",
           [](RunConfig& c, auto v) { c.metric.theta_val = v; });
}

void add_sampler(CLI::App* app, Flags& f) {
  f.option(app, "--sampler", f.sampler, "vlm or simulated",
           [](RunConfig& c, const std::string& v) { c.sampler_kind = parse_sampler_kind(v); });
  f.option(app, "--temperature", f.temperature, "Sampling temperature",
           [](RunConfig& c, auto v) { c.sampler.temperature = v; });
  f.option(app, "--endpoint", f.endpoint, "Chat-completions URL",
           [](RunConfig& c, const std::string& v) { c.sampler.endpoint_url = v; });
  f.option(app, "--model", f.model, "Model id", [](RunConfig& c, const std::string& v) { c.sampler.model_id = v; });
  f.option(app, "--api-key-env", f.api_key_env, "Environment variable holding the API key",
           [](RunConfig& c, const std::string& v) { c.sampler.api_key_env = v; });
  f.option(app, "--timeout", f.timeout, "Request timeout in seconds",
           [](RunConfig& c, auto v) { c.sampler.request_timeout_s = v; });
  f.option(app, "--max-retries", f.max_retries, "Retries on 429, 5xx and transport errors",
           [](RunConfig& c, auto v) { c.sampler.max_retries = v; });
  f.option(app, "--max-concurrent", f.max_concurrent, "Concurrent requests across the batch",
           [](RunConfig& c, auto v) { c.max_concurrent_requests = v; });
  f.option(app, "--max-rps", f.max_rps, "Request starts per second (0 = unlimited)",
           [](RunConfig& c, auto v) { c.max_requests_per_s = v; });
}

void add_noise(CLI::App* app, Flags& f) {
  f.option(app, "--noise-sigma", f.sigma, "Multiplicative value noise", [](RunConfig& c, auto v) { c.noise.value_noise_rel = v; });
  f.option(app, "--p-drop-row", f.p_drop_row, "", [](RunConfig& c, auto v) { c.noise.p_drop_row = v; });
  f.option(app, "--p-drop-col", f.p_drop_col, "", [](RunConfig& c, auto v) { c.noise.p_drop_col = v; });
  f.option(app, "--p-extra-row", f.p_extra_row, "", [](RunConfig& c, auto v) { c.noise.p_extra_row = v; });
  f.option(app, "--p-label-typo", f.p_label_typo, "", [](RunConfig& c, auto v) { c.noise.p_label_typo = v; });
  f.option(app, "--p-transpose", f.p_transpose, "", [](RunConfig& c, auto v) { c.noise.p_transpose = v; });
  f.option(app, "--p-cell-blank", f.p_cell_blank, "", [](RunConfig& c, auto v) { c.noise.p_cell_blank = v; });
  f.option(app, "--p-ragged", f.p_ragged, "", [](RunConfig& c, auto v) { c.noise.p_ragged = v; });
  f.option(app, "--p-outlier", f.p_outlier, "", [](RunConfig& c, auto v) { c.noise.p_outlier = v; });
  f.option(app, "--outlier-factor", f.outlier_factor, "", [](RunConfig& c, auto v) { c.noise.outlier_factor = v; });
  f.option(app, "--noise-seed", f.noise_seed, "", [](RunConfig& c, auto v) { c.noise.seed = v; });
}

std::vector<Strategy> parse_strategy_list(const std::string& s) {
  std::vector<Strategy> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) out.push_back(parse_strategy(item));
  return out;
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty())
    std::cout << text;
  else
    write_file(out_path, text);
}

// Synthetic corpus parameters shared by simulate and sweep.
struct CorpusFlags {
  std::string index;
  std::size_t tables = 50, rows = 10, cols = 3;

  void add(CLI::App* app) {
    app->add_option("--index", index, "Use the ground truths of this dataset index")->check(CLI::ExistingFile);
    app->add_option("--tables", tables, "Synthetic tables to generate")->check(CLI::PositiveNumber);
    app->add_option("--rows", rows, "Rows per synthetic table")->check(CLI::PositiveNumber);
    app->add_option("--cols", cols, "Columns per synthetic table")->check(CLI::Range(1, 16));
  }
  std::vector<NormalizedTable> truths(std::uint64_t seed) const {
    if (index.empty()) return synthetic_corpus(tables, rows, cols, seed);
    std::vector<NormalizedTable> out;
    for (const auto& e : load_index(index).entries) out.push_back(read_truth(e.truth_path));
    return out;
  }
};

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Chart-to-table extraction by self-ensembling"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "chartens 1.0");

  // extract
  Flags ef;
  std::string ex_index, ex_out;
  auto* extract = app.add_subcommand("extract", "Run ensembles over a dataset index");
  extract->add_option("--index", ex_index, "Dataset index JSON")->required()->check(CLI::ExistingFile);
  extract->add_option("--out", ex_out, "Run directory")->required();
  add_shared(extract, ef);
  add_ensemble(extract, ef, false);
  add_sampler(extract, ef);
  add_noise(extract, ef);

  // evaluate
  Flags vf;
  std::string ev_index, ev_run, ev_pred, ev_out;
  std::vector<std::string> group_by;
  auto* evaluate = app.add_subcommand("evaluate", "Score predictions against ground truth");
  evaluate->add_option("--index", ev_index, "Dataset index JSON")->required()->check(CLI::ExistingFile);
  auto* run_opt = evaluate->add_option("--run-dir", ev_run, "Run directory from extract")->check(CLI::ExistingDirectory);
  auto* pred_opt = evaluate->add_option("--pred-dir", ev_pred, "Directory of <id>.tsv predictions")->check(CLI::ExistingDirectory);
  run_opt->excludes(pred_opt);
  evaluate->add_option("--group-by", group_by, "Metadata keys to group by")->delimiter(',');
  evaluate->add_option("--out", ev_out, "Directory for report.tsv and report.json");
  add_shared(evaluate, vf);
  vf.option(evaluate, "--tau-key", vf.tau_key, "Key distance threshold", [](RunConfig& c, auto v) { c.metric.tau_key = v; });
  vf.option(evaluate, "--theta-val", vf.theta_val, "Value error threshold",
            [](RunConfig& c, auto v) { c.metric.theta_val = v; });

  // simulate
  Flags sf;
  CorpusFlags sim_corpus;
  std::vector<double> sim_sigmas;
  bool sigma_per_chart = false;
  int repeats = 1;
  std::string sim_out;
  auto* simulate = app.add_subcommand("simulate", "Ensembles over simulated samples");
  sim_corpus.add(simulate);
  simulate->add_option("--sigma", sim_sigmas, "Value noise levels, comma separated")->delimiter(',');
  simulate->add_flag("--sigma-per-chart", sigma_per_chart, "Draw each chart's noise level from --sigma");
  simulate->add_option("--repeats", repeats, "Noise seeds per table")->check(CLI::PositiveNumber);
  simulate->add_option("--out", sim_out, "Report TSV path (stdout when absent)");
  add_shared(simulate, sf);
  add_ensemble(simulate, sf, true);
  add_noise(simulate, sf);

  // sweep
  Flags wf;
  CorpusFlags sweep_corpus;
  std::string axis_name, sw_run, sw_out;
  std::vector<double> sw_values;
  auto* sweep = app.add_subcommand("sweep", "Vary one setting and report F1, mean samples and convergence");
  sweep->add_option("--axis", axis_name, "patience, coverage, tolerance, prune, k or temperature")->required();
  sweep->add_option("--values", sw_values, "Values, comma separated")->required()->delimiter(',');
  sweep->add_option("--run-dir", sw_run, "Replay stored samples instead of sampling")->check(CLI::ExistingDirectory);
  sweep->add_option("--out", sw_out, "Result TSV path (stdout when absent)");
  sweep_corpus.add(sweep);
  add_shared(sweep, wf);
  add_ensemble(sweep, wf, false);
  add_sampler(sweep, wf);
  add_noise(sweep, wf);

  // benchgen
  BenchgenOptions bg;
  std::string bg_source, bg_out, bg_render;
  bool iid = false;
  auto* benchgen = app.add_subcommand("benchgen", "Build chart specs and ground truths from a long-format table");
  benchgen->add_option("--source", bg_source, "CSV with indicator,country,year,value")->required()->check(CLI::ExistingFile);
  benchgen->add_option("--n", bg.n_charts, "Number of charts")->check(CLI::PositiveNumber);
  benchgen->add_option("--seed", bg.seed, "Random seed");
  benchgen->add_option("--out", bg_out, "Output directory")->required();
  benchgen->add_flag("--iid", iid, "Draw type and backend independently instead of balancing");
  benchgen->add_option("--render", bg_render, "Renderer command; receives the spec path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*extract) {
      const auto s = cmd_extract(load_index(ex_index), ef.resolve(), ex_out, std::cout);
      return s.failed ? 1 : 0;
    }
    if (*evaluate) {
      if (ev_run.empty() == ev_pred.empty()) throw Error(ErrorKind::InvalidConfig, "give --run-dir or --pred-dir");
      const RunConfig cfg = vf.resolve();
      EvaluateSource src;
      if (!ev_run.empty()) src.run_dir = ev_run;
      if (!ev_pred.empty()) src.pred_dir = ev_pred;
      auto res = cmd_evaluate(load_index(ev_index), src, cfg.metric, group_by, std::cerr);
      if (ev_out.empty()) {
        std::cout << report_tsv(res.report);
      } else {
        write_file(fs::path(ev_out) / "report.tsv", report_tsv(res.report));
        write_file(fs::path(ev_out) / "report.json", report_json(res.report) + "\n");
        std::cout << report_tsv(res.report);
      }
      return res.missing_truth.empty() ? 0 : 1;
    }
    if (*simulate) {
      SimulateOptions opts;
      opts.cfg = sf.resolve();
      if (!sf.strategy.empty()) opts.strategies = parse_strategy_list(sf.strategy);
      opts.sigmas = sim_sigmas;
      opts.sigma_per_chart = sigma_per_chart;
      opts.repeats = repeats;
      opts.truths = sim_corpus.truths(opts.cfg.seed);
      emit(simulate_tsv(cmd_simulate(opts)), sim_out);
      return 0;
    }
    if (*sweep) {
      const SweepAxis axis = parse_axis(axis_name);
      const RunConfig cfg = wf.resolve();
      std::vector<SweepRow> rows;
      if (!sw_run.empty()) {
        if (sweep_corpus.index.empty()) throw Error(ErrorKind::InvalidConfig, "--run-dir needs --index");
        rows = sweep_stored(load_index(sweep_corpus.index), sw_run, cfg, axis, sw_values, std::cerr);
      } else if (cfg.sampler_kind == SamplerKind::Vlm && axis == SweepAxis::Temperature) {
        if (sweep_corpus.index.empty()) throw Error(ErrorKind::InvalidConfig, "live sweeps need --index");
        rows = sweep_live(load_index(sweep_corpus.index), cfg, axis, sw_values, std::cerr);
      } else {
        rows = sweep_simulated(sweep_corpus.truths(cfg.seed), cfg, axis, sw_values);
      }
      emit(sweep_tsv(axis, rows), sw_out);
      return 0;
    }
    if (*benchgen) {
      bg.source_csv = bg_source;
      bg.out_dir = bg_out;
      bg.balanced = !iid;
      if (!bg_render.empty()) bg.render_cmd = bg_render;
      cmd_benchgen(bg, std::cout);
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    const bool usage = e.kind() == ErrorKind::InvalidConfig || e.kind() == ErrorKind::UnknownAxis;
    return usage ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace chartens::cli
