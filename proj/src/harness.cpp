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


#include "hybridad/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "hybridad/channel.hpp"
#include "hybridad/config_io.hpp"

namespace hybridad {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<TrialResult> collect(const std::vector<TrialOutcome>& outcomes, Method method,
                                       std::optional<std::size_t> iteration) {
  std::vector<TrialResult> out;
  out.reserve(outcomes.size());
  for (const auto& o : outcomes) {
    const auto& res = method == Method::distributed ? o.distributed : o.centralized;
    if (!res) throw std::invalid_argument(std::string("no ") + to_string(method) + " results");
    TrialResult r = *res;
    if (iteration) {
      const auto& hist = method == Method::distributed ? o.distributed_history : o.centralized_history;
      r.a_cont = hist.at(std::min(*iteration, hist.size() - 1));
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

}  // namespace

const char* to_string(Method m) { return m == Method::distributed ? "distributed" : "centralized"; }

TrialOutcome run_trial(const ScenarioConfig& cfg, const SolverParams& params,
                       const CampaignOptions& opts, std::uint64_t trial) {
  const Scenario sc = generate_scenario(cfg, trial);
  const ChannelModel model = build_channel_model(sc);
  Rng channel_rng = Rng::substream(cfg.seed, Stream::channels, trial);
  Rng noise_rng = Rng::substream(cfg.seed, Stream::noise, trial);
  const auto received = synthesize_received(model, sc.signatures, sc.truth, channel_rng, noise_rng);

  TrialOutcome out;
  out.trial = trial;
  out.truth = sc.truth.values;
  if (opts.distributed) {
    const auto t0 = std::chrono::steady_clock::now();
    ConsensusOptions copts;
    copts.max_iters = opts.max_iters;
    copts.tol = opts.consensus_tol;
    ConsensusResult res = run_consensus(received, model, sc.signatures, params, copts);
    out.distributed = TrialResult{res.estimate.values, sc.truth.values, res.iterations, seconds_since(t0)};
    out.distributed_history = std::move(res.history);
  }
  if (opts.centralized) {
    const auto t0 = std::chrono::steady_clock::now();
    CentralizedResult res =
        centralized_cd(received, model, sc.signatures, params, opts.centralized_sweeps, opts.centralized_tol);
    out.centralized = TrialResult{res.estimate.values, sc.truth.values, res.sweeps, seconds_since(t0)};
    out.centralized_history = std::move(res.history);
  }
  return out;
}

std::vector<TrialOutcome> run_campaign(const ScenarioConfig& cfg, const SolverParams& params,
                                       const CampaignOptions& opts) {
  cfg.validate();
  params.validate();
  std::vector<TrialOutcome> out(opts.trials);
  const std::size_t workers = std::max<std::size_t>(1, std::min(opts.workers, opts.trials));
  if (workers == 1) {
    for (std::size_t i = 0; i < opts.trials; ++i) out[i] = run_trial(cfg, params, opts, opts.first_trial + i);
    return out;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < opts.trials; i += workers) {
          out[i] = run_trial(cfg, params, opts, opts.first_trial + i);
        }
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

RocCurve pooled_roc(const std::vector<TrialOutcome>& outcomes, Method method) {
  const auto trials = collect(outcomes, method, std::nullopt);
  return equal_error(trials);
}

RocCurve pooled_roc_at(const std::vector<TrialOutcome>& outcomes, Method method,
                       std::size_t iteration) {
  const auto trials = collect(outcomes, method, iteration);
  return equal_error(trials);
}

std::vector<std::string> preset_names() {
  return {"fig2a_iterations", "fig2b_ap_sweep", "fig3a_device_sweep", "fig3b_seqlen_sweep", "custom"};
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

ExperimentSummary run_experiment(const ExperimentRequest& req,
                                 const std::function<void(const std::string&)>& log) {
  const auto presets = preset_names();
  if (std::find(presets.begin(), presets.end(), req.preset) == presets.end()) {
    throw std::invalid_argument("unknown preset: " + req.preset);
  }
  // Fields each preset sets itself.
  static const std::map<std::string, std::vector<std::string>> swept = {
      {"fig2a_iterations", {"K"}},
      {"fig2b_ap_sweep", {"M", "K", "ap_positions"}},
      {"fig3a_device_sweep", {"lambda_c", "N"}},
      {"fig3b_seqlen_sweep", {"lambda_c", "L"}},
      {"custom", {}},
  };
  ScenarioConfig base = req.base;
  for (const auto& [key, value] : req.overrides) {
    const auto& fixed = swept.at(req.preset);
    if (std::find(fixed.begin(), fixed.end(), key) != fixed.end()) {
      throw std::invalid_argument("override of '" + key + "' conflicts with preset " + req.preset +
                                  ", which sweeps that field");
    }
    apply_override(base, key, value);
  }

  const std::vector<double> wavelengths = {0.05, 0.1, 0.15, 0.2, 0.25, 0.3};
  struct Point {
    ScenarioConfig cfg;
    bool per_iteration = false;
  };
  std::vector<Point> points;
  nlohmann::json skipped = nlohmann::json::array();
  if (req.preset == "fig2a_iterations") {
    for (std::size_t k : {24u, 32u}) {
      ScenarioConfig c = base;
      c.antennas_per_ap = k;
      points.push_back({c, true});
    }
  } else if (req.preset == "fig2b_ap_sweep") {
    constexpr std::size_t total = 72;
    for (std::size_t m = 1; m <= 12; ++m) {
      if (total % m != 0) {
        skipped.push_back({{"M", m}, {"reason", "72 antennas do not split equally"}});
        if (log) log("fig2b: skipping M=" + std::to_string(m) + " (72 not divisible)");
        continue;
      }
      ScenarioConfig c = base;
      c.num_aps = m;
      c.antennas_per_ap = total / m;
      c.ap_positions.clear();
      points.push_back({c, false});
    }
  } else if (req.preset == "fig3a_device_sweep") {
    for (double lam : wavelengths) {
      for (std::size_t n : {60u, 80u, 100u, 120u, 140u}) {
        ScenarioConfig c = base;
        c.wavelength = lam;
        c.num_devices = n;
        points.push_back({c, false});
      }
    }
  } else if (req.preset == "fig3b_seqlen_sweep") {
    for (double lam : wavelengths) {
      for (std::size_t l : {4u, 5u, 6u, 7u, 8u}) {
        ScenarioConfig c = base;
        c.wavelength = lam;
        c.signature_length = l;
        points.push_back({c, false});
      }
    }
  } else {
    points.push_back({base, false});
  }
  for (const auto& p : points) p.cfg.validate();
  req.solver.validate();

  CampaignOptions copts = req.campaign;
  if (req.preset == "fig2a_iterations") copts.centralized = true;

  ExperimentSummary summary;
  summary.csv_path = req.out_path;
  std::filesystem::path mp(req.out_path);
  mp.replace_extension(".manifest.json");
  summary.manifest_path = mp.string();

  std::ofstream csv(summary.csv_path, std::ios::binary);
  if (!csv) throw std::runtime_error("cannot open output: " + summary.csv_path);
  csv << "preset,method,K,M,N,L,lambda_c,rayleigh_m,iteration,trials,eer,eer_std_error,crossing_found\n";

  double wall = 0.0;
  nlohmann::json point_json = nlohmann::json::array();
  for (const auto& p : points) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto outcomes = run_campaign(p.cfg, req.solver, copts);
    wall += seconds_since(t0);
    const double rayleigh = rayleigh_distance(p.cfg.antennas_per_ap, p.cfg.wavelength);
    auto emit = [&](Method method, std::size_t iteration, const RocCurve& roc) {
      if (!roc.monotone()) throw std::logic_error("ROC curve is not monotone");
      csv << csv_field(req.preset) << ',' << to_string(method) << ',' << p.cfg.antennas_per_ap << ','
          << p.cfg.num_aps << ',' << p.cfg.num_devices << ',' << p.cfg.signature_length << ','
          << fmt(p.cfg.wavelength) << ',' << fmt(rayleigh) << ',' << iteration << ',' << copts.trials
          << ',' << fmt(roc.eer) << ',' << fmt(roc.eer_std_error) << ',' << (roc.crossing_found ? 1 : 0)
          << '\n';
      ++summary.rows;
    };
    for (Method method : {Method::distributed, Method::centralized}) {
      const bool enabled = method == Method::distributed ? copts.distributed : copts.centralized;
      if (!enabled) continue;
      if (p.per_iteration) {
        const std::size_t last =
            method == Method::distributed ? copts.max_iters : copts.centralized_sweeps;
        for (std::size_t i = 0; i <= last; ++i) emit(method, i, pooled_roc_at(outcomes, method, i));
      } else {
        std::size_t used = 0;
        for (const auto& o : outcomes) {
          used = std::max(used, (method == Method::distributed ? o.distributed : o.centralized)->iterations_used);
        }
        emit(method, used, pooled_roc(outcomes, method));
      }
    }
    point_json.push_back({{"K", p.cfg.antennas_per_ap},
                          {"M", p.cfg.num_aps},
                          {"N", p.cfg.num_devices},
                          {"L", p.cfg.signature_length},
                          {"lambda_c", p.cfg.wavelength},
                          {"rayleigh_distance_m", rayleigh}});
    if (log) {
      log("point K=" + std::to_string(p.cfg.antennas_per_ap) + " M=" + std::to_string(p.cfg.num_aps) +
          " N=" + std::to_string(p.cfg.num_devices) + " L=" + std::to_string(p.cfg.signature_length) +
          " lambda_c=" + fmt(p.cfg.wavelength) + " done");
    }
  }
  csv.close();

  nlohmann::json m;
  m["format"] = "hybridad.manifest";
  m["version"] = 1;
  m["preset"] = req.preset;
  m["csv"] = std::filesystem::path(summary.csv_path).filename().string();
  m["config"] = to_json(base);
  m["overrides"] = req.overrides;
  m["solver"] = {{"omega", req.solver.omega},
                 {"mu", req.solver.mu},
                 {"sweeps_per_call", req.solver.sweeps_per_call},
                 {"refactor_every", req.solver.refactor_every},
                 {"max_omega_doublings", req.solver.max_omega_doublings},
                 {"safeguard", req.solver.safeguard},
                 {"randomized_order", req.solver.randomized_order}};
  m["campaign"] = {{"trials", copts.trials},
                   {"first_trial", copts.first_trial},
                   {"distributed", copts.distributed},
                   {"centralized", copts.centralized},
                   {"max_iters", copts.max_iters},
                   {"consensus_tol", copts.consensus_tol},
                   {"centralized_sweeps", copts.centralized_sweeps},
                   {"centralized_tol", copts.centralized_tol}};
  m["points"] = point_json;
  m["skipped"] = skipped;
  m["rows"] = summary.rows;
  m["wall_time_s"] = wall;
  std::ofstream mf(summary.manifest_path);
  if (!mf) throw std::runtime_error("cannot open manifest: " + summary.manifest_path);
  mf << m.dump(2) << '\n';
  summary.manifest = std::move(m);
  return summary;
}

}  // namespace hybridad
