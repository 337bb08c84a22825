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
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace hybridad {

struct TrialResult {
  Eigen::VectorXd a_cont;
  Eigen::VectorXd truth;
  std::size_t iterations_used = 0;
  double wall_time = 0.0;  // seconds
};

struct RocPoint {
  double gamma = 0.0;
  double pm = 0.0;
  double pf = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;
  double eer = 0.0;
  double eer_gamma = 0.0;
  /// False when PM - PF never changes sign; eer is then (PM + PF) / 2 at
  /// the gamma minimizing |PM - PF|.
  bool crossing_found = false;
  /// Standard error of the per-trial (PM + PF) / 2 at the grid point
  /// nearest the crossing.
  double eer_std_error = 0.0;

  /// PM non-decreasing and PF non-increasing in gamma.
  bool monotone() const;
};

/// (PM, PF) of the decision a_n >= gamma. Throws when truth has no active
/// or no inactive device.
std::pair<double, double> pm_pf(const Eigen::VectorXd& a_cont, const Eigen::VectorXd& truth,
                                double gamma);

/// `n` uniform thresholds on [0, 1].
std::vector<double> uniform_gamma_grid(std::size_t n = 512);

/// Pooled ROC: PM and PF averaged over trials per threshold, EER by linear
/// interpolation at the sign change of PM - PF.
RocCurve equal_error(std::span<const TrialResult> trials, const std::vector<double>& gammas);
RocCurve equal_error(std::span<const TrialResult> trials);

}  // namespace hybridad
