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


#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hybridad/consensus.hpp"
#include "hybridad/roc.hpp"
#include "hybridad/scenario.hpp"
#include "hybridad/solver.hpp"

namespace hybridad {

struct CampaignOptions {
  std::size_t trials = 500;
  std::uint64_t first_trial = 0;
  std::size_t workers = 1;
  bool distributed = true;
  bool centralized = false;
  std::size_t max_iters = 30;        // consensus outer iterations
  double consensus_tol = 1e-4;
  std::size_t centralized_sweeps = 30;
  double centralized_tol = 1e-6;
};

/// One Monte-Carlo trial: scenario draw, channel model, received signals,
/// and the requested detectors.
struct TrialOutcome {
  std::uint64_t trial = 0;
  Eigen::VectorXd truth;
  std::optional<TrialResult> distributed;
  std::optional<TrialResult> centralized;
  std::vector<Eigen::VectorXd> distributed_history;  // a^(0) .. a^(T)
  std::vector<Eigen::VectorXd> centralized_history;  // after each sweep
};

TrialOutcome run_trial(const ScenarioConfig& cfg, const SolverParams& params,
                       const CampaignOptions& opts, std::uint64_t trial);

/// Trials first_trial .. first_trial + trials - 1, results in trial order
/// regardless of the worker count.
std::vector<TrialOutcome> run_campaign(const ScenarioConfig& cfg, const SolverParams& params,
                                       const CampaignOptions& opts);

enum class Method { distributed, centralized };
const char* to_string(Method m);

/// Pooled ROC of the final estimates.
RocCurve pooled_roc(const std::vector<TrialOutcome>& outcomes, Method method);

/// Pooled ROC of the iterate after `iteration` steps (outer iterations or
/// sweeps); runs that stopped earlier contribute their last iterate.
RocCurve pooled_roc_at(const std::vector<TrialOutcome>& outcomes, Method method,
                       std::size_t iteration);

/// Campaign presets.
std::vector<std::string> preset_names();

struct ExperimentRequest {
  std::string preset = "custom";
  ScenarioConfig base;
  SolverParams solver;
  CampaignOptions campaign;
  /// Scenario-field overrides from the command line; validated against the
  /// preset's swept fields.
  std::map<std::string, std::string> overrides;
  std::string out_path = "results.csv";
};

struct ExperimentSummary {
  std::string csv_path;
  std::string manifest_path;
  std::size_t rows = 0;
  nlohmann::json manifest;
};

/// Runs the campaign, writes the CSV and `<stem>.manifest.json` next to it.
/// Throws std::invalid_argument for an unknown preset or an override of a
/// field the preset sweeps.
ExperimentSummary run_experiment(const ExperimentRequest& req,
                                 const std::function<void(const std::string&)>& log = {});

/// RFC 4180 quoting for one CSV field.
std::string csv_field(const std::string& s);

}  // namespace hybridad
