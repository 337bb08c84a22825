// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 The hybridad Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// hybridad: command-line front end.
//
//   hybridad run     --preset fig2a_iterations --trials 500 --out fig2a.csv
//   hybridad analyze --out report            (report.bound.csv, report.json)
//   hybridad trace   --trial 3 --out t3      (t3.trace.csv, t3.fronthaul.csv, t3.scenario.json)
//
// Failures print a single JSON error record on stderr and exit with 1
// (2 for argument errors).

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "hybridad/analysis.hpp"
#include "hybridad/config_io.hpp"
#include "hybridad/consensus.hpp"
#include "hybridad/harness.hpp"

using namespace hybridad;

namespace {

struct ScenarioFlags {
  std::string config_path;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
};

void add_scenario_flags(CLI::App* cmd, ScenarioFlags& f) {
  cmd->add_option("--config", f.config_path, "Scenario config file (key = value lines)")->check(CLI::ExistingFile);
  cmd->add_option("--set", f.sets, "Override one field, KEY=VALUE (repeatable)");
  cmd->add_option("--seed", f.seed, "Master seed");
}

std::map<std::string, std::string> split_sets(const std::vector<std::string>& sets) {
  std::map<std::string, std::string> out;
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw std::invalid_argument("--set expects KEY=VALUE, got '" + s + "'");
    out[s.substr(0, eq)] = s.substr(eq + 1);
  }
  return out;
}

// Base config from file and seed; overrides applied by the caller (run
// hands them to the preset validator instead).
ScenarioConfig base_config(const ScenarioFlags& f) {
  ScenarioConfig cfg;
  if (!f.config_path.empty()) cfg = load_scenario_config(f.config_path);
  if (f.seed) cfg.seed = *f.seed;
  return cfg;
}

ScenarioConfig resolved_config(const ScenarioFlags& f) {
  ScenarioConfig cfg = base_config(f);
  for (const auto& [k, v] : split_sets(f.sets)) apply_override(cfg, k, v);
  cfg.validate();
  return cfg;
}

struct SolverFlags {
  std::size_t max_iters = 30;
  double tol = 1e-4;
  SolverParams params;
};

void add_solver_flags(CLI::App* cmd, SolverFlags& f) {
  cmd->add_option("--max-iters", f.max_iters, "Consensus outer iterations")->check(CLI::PositiveNumber);
  cmd->add_option("--tol", f.tol, "Stop when max |a change| falls below this");
  cmd->add_option("--mu", f.params.mu, "Consensus penalty")->check(CLI::PositiveNumber);
  cmd->add_option("--omega", f.params.omega, "Proximal weight")->check(CLI::NonNegativeNumber);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output: " + path);
  return out;
}

void write_json(const std::string& path, const nlohmann::json& j) { open_out(path) << j.dump(2) << '\n'; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid near/far-field activity detection experiments"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Monte-Carlo experiment from a preset");
  ScenarioFlags run_sc;
  SolverFlags run_sv;
  ExperimentRequest req;
  std::size_t workers = 1;
  bool centralized = false, no_distributed = false;
  add_scenario_flags(run, run_sc);
  add_solver_flags(run, run_sv);
  run->add_option("--preset", req.preset, "Experiment preset")->check(CLI::IsMember(preset_names()));
  run->add_option("--trials", req.campaign.trials, "Trials per point")->check(CLI::PositiveNumber);
  run->add_option("--first-trial", req.campaign.first_trial, "Index of the first trial");
  run->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
  run->add_option("--out", req.out_path, "CSV output; the manifest goes next to it");
  run->add_flag("--centralized", centralized, "Also run centralized coordinate descent");
  run->add_flag("--no-distributed", no_distributed, "Skip the distributed method");

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Similarity bound and null-space reports");
  ScenarioFlags an_sc;
  std::size_t pairs = 1000;
  std::uint64_t an_trial = 0;
  bool nullspace = false;
  std::string an_out = "analysis";
  add_scenario_flags(analyze, an_sc);
  analyze->add_option("--pairs", pairs, "Random (AP, n, n') triples")->check(CLI::PositiveNumber);
  analyze->add_option("--trial", an_trial, "Trial index of the drawn scenario");
  analyze->add_flag("--nullspace", nullspace, "Also run the null-space probe (small scenarios only)");
  analyze->add_option("--out", an_out, "Output prefix");

  // trace
  auto* trace = app.add_subcommand("trace", "Single-trial convergence dump");
  ScenarioFlags tr_sc;
  SolverFlags tr_sv;
  std::uint64_t tr_trial = 0;
  std::string tr_out = "trace";
  add_scenario_flags(trace, tr_sc);
  add_solver_flags(trace, tr_sv);
  trace->add_option("--trial", tr_trial, "Trial index");
  trace->add_option("--out", tr_out, "Output prefix");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << nlohmann::json{{"error", "usage"}, {"message", e.what()}}.dump() << '\n';
    return 2;
  }

  try {
    if (*run) {
      req.base = base_config(run_sc);
      req.overrides = split_sets(run_sc.sets);
      req.solver = run_sv.params;
      req.campaign.max_iters = run_sv.max_iters;
      req.campaign.consensus_tol = run_sv.tol;
      req.campaign.workers = workers;
      req.campaign.centralized = centralized;
      req.campaign.distributed = !no_distributed;
      const auto summary = run_experiment(req, [](const std::string& line) { std::cerr << line << '\n'; });
      std::cout << nlohmann::json{{"csv", summary.csv_path},
                                  {"manifest", summary.manifest_path},
                                  {"rows", summary.rows}}
                       .dump()
                << '\n';
    } else if (*analyze) {
      const ScenarioConfig cfg = resolved_config(an_sc);
      const Scenario sc = generate_scenario(cfg, an_trial);
      const ChannelModel model = build_channel_model(sc);
      Rng rng = Rng::substream(cfg.seed, Stream::analysis, an_trial);
      const auto rep = similarity_bound_sweep(model, sc.signatures, pairs, rng);
      {
        auto csv = open_out(an_out + ".bound.csv");
        rep.write_csv(csv);
      }
      nlohmann::json j{{"config", to_json(cfg)}, {"trial", an_trial}, {"similarity_bound", rep.to_json()}};
      if (nullspace) j["nullspace"] = nullspace_probe(model, sc.signatures, sc.truth).to_json();
      write_json(an_out + ".json", j);
      std::cout << nlohmann::json{{"csv", an_out + ".bound.csv"},
                                  {"report", an_out + ".json"},
                                  {"violations", rep.violations}}
                       .dump()
                << '\n';
    } else if (*trace) {
      const ScenarioConfig cfg = resolved_config(tr_sc);
      const Scenario sc = generate_scenario(cfg, tr_trial);
      const ChannelModel model = build_channel_model(sc);
      Rng ch = Rng::substream(cfg.seed, Stream::channels, tr_trial);
      Rng nz = Rng::substream(cfg.seed, Stream::noise, tr_trial);
      const auto received = synthesize_received(model, sc.signatures, sc.truth, ch, nz);
      ConsensusOptions opts;
      opts.max_iters = tr_sv.max_iters;
      opts.tol = tr_sv.tol;
      opts.trace_objectives = true;
      const auto res = run_consensus(received, model, sc.signatures, tr_sv.params, opts);
      {
        auto out = open_out(tr_out + ".trace.csv");
        write_trace_csv(out, res.trace);
      }
      {
        auto out = open_out(tr_out + ".fronthaul.csv");
        res.fronthaul.write_csv(out);
      }
      nlohmann::json sj = scenario_to_json(sc);
      sj["estimate"] = std::vector<double>(res.estimate.values.begin(), res.estimate.values.end());
      sj["iterations"] = res.iterations;
      sj["converged"] = res.converged;
      write_json(tr_out + ".scenario.json", sj);
      std::cout << nlohmann::json{{"iterations", res.iterations},
                                  {"converged", res.converged},
                                  {"uplink_reals", res.fronthaul.total_payload(Direction::up)}}
                       .dump()
                << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << nlohmann::json{{"error", "failure"}, {"message", e.what()}}.dump() << '\n';
    return 1;
  }
  return 0;
}
