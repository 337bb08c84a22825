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


#include "hybridad/roc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hybridad {

bool RocCurve::monotone() const {
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (points[i].pm < points[i - 1].pm || points[i].pf > points[i - 1].pf) return false;
  }
  return true;
}

std::pair<double, double> pm_pf(const Eigen::VectorXd& a_cont, const Eigen::VectorXd& truth,
                                double gamma) {
  if (a_cont.size() != truth.size()) throw std::invalid_argument("pm_pf: length mismatch");
  std::size_t active = 0;
  std::size_t missed = 0;
  std::size_t inactive = 0;
  std::size_t false_alarm = 0;
  for (Eigen::Index n = 0; n < truth.size(); ++n) {
    const bool on = a_cont(n) >= gamma;
    if (truth(n) >= 0.5) {
      ++active;
      if (!on) ++missed;
    } else {
      ++inactive;
      if (on) ++false_alarm;
    }
  }
  if (active == 0 || inactive == 0) {
    throw std::invalid_argument("pm_pf: truth needs at least one active and one inactive device");
  }
  return {static_cast<double>(missed) / static_cast<double>(active),
          static_cast<double>(false_alarm) / static_cast<double>(inactive)};
}

std::vector<double> uniform_gamma_grid(std::size_t n) {
  if (n < 2) throw std::invalid_argument("gamma grid needs at least two points");
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = static_cast<double>(i) / static_cast<double>(n - 1);
  return g;
}

RocCurve equal_error(std::span<const TrialResult> trials, const std::vector<double>& gammas) {
  if (trials.empty()) throw std::invalid_argument("equal_error: no trials");
  if (gammas.empty()) throw std::invalid_argument("equal_error: empty gamma grid");
  const std::size_t G = gammas.size();
  const std::size_t T = trials.size();
  // per_trial[t * G + g] = (PM + PF) / 2 of trial t at gamma g
  std::vector<double> per_trial(T * G);
  RocCurve curve;
  curve.points.resize(G);
  for (std::size_t g = 0; g < G; ++g) curve.points[g].gamma = gammas[g];
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t g = 0; g < G; ++g) {
      const auto [pm, pf] = pm_pf(trials[t].a_cont, trials[t].truth, gammas[g]);
      curve.points[g].pm += pm;
      curve.points[g].pf += pf;
      per_trial[t * G + g] = 0.5 * (pm + pf);
    }
  }
  for (auto& p : curve.points) {
    p.pm /= static_cast<double>(T);
    p.pf /= static_cast<double>(T);
  }

  std::size_t at = 0;
  for (std::size_t g = 0; g + 1 < G; ++g) {
    const double d0 = curve.points[g].pm - curve.points[g].pf;
    const double d1 = curve.points[g + 1].pm - curve.points[g + 1].pf;
    if (d0 == 0.0) {
      curve.crossing_found = true;
      curve.eer = curve.points[g].pm;
      curve.eer_gamma = gammas[g];
      at = g;
      break;
    }
    if ((d0 < 0.0 && d1 >= 0.0) || (d0 > 0.0 && d1 <= 0.0)) {
      const double t = d0 / (d0 - d1);
      const auto& p0 = curve.points[g];
      const auto& p1 = curve.points[g + 1];
      curve.crossing_found = true;
      curve.eer = p0.pm + t * (p1.pm - p0.pm);
      curve.eer_gamma = p0.gamma + t * (p1.gamma - p0.gamma);
      at = t < 0.5 ? g : g + 1;
      break;
    }
  }
  if (!curve.crossing_found) {
    double best = INFINITY;
    for (std::size_t g = 0; g < G; ++g) {
      const double gap = std::abs(curve.points[g].pm - curve.points[g].pf);
      if (gap < best) {
        best = gap;
        at = g;
      }
    }
    curve.eer = 0.5 * (curve.points[at].pm + curve.points[at].pf);
    curve.eer_gamma = gammas[at];
  }

  if (T > 1) {
    double mean = 0.0;
    for (std::size_t t = 0; t < T; ++t) mean += per_trial[t * G + at];
    mean /= static_cast<double>(T);
    double var = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      const double e = per_trial[t * G + at] - mean;
      var += e * e;
    }
    var /= static_cast<double>(T - 1);
    curve.eer_std_error = std::sqrt(var / static_cast<double>(T));
  }
  return curve;
}

RocCurve equal_error(std::span<const TrialResult> trials) {
  return equal_error(trials, uniform_gamma_grid());
}

}  // namespace hybridad
