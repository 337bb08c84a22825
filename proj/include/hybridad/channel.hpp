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
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "hybridad/rng.hpp"
#include "hybridad/scenario.hpp"

namespace hybridad {

/// Second-order statistics of one AP-device link.
///
/// The covariance is kept as a factor B (K x J) with B B^H equal to the
/// channel covariance: g I_K for far-field links (J = K) and the sum of
/// scatterer outer products for near-field links (J = L_m).
struct ChannelStats {
  Field field = Field::far;
  Eigen::VectorXcd mean;        // zero for far-field links
  Eigen::MatrixXcd cov_factor;  // B
  double gain = 0.0;            // g, far-field only

  Eigen::Index rank() const { return cov_factor.cols(); }
  Eigen::MatrixXcd covariance() const { return cov_factor * cov_factor.adjoint(); }
};

/// Per-AP link statistics plus the AP's noise variance (linear watts).
struct ChannelModel {
  std::vector<std::vector<ChannelStats>> links;  // [ap][device]
  std::vector<double> noise_var;                 // [ap]

  std::size_t num_aps() const { return links.size(); }
};

/// X = B (x) s, kept factored. `mean_part` is hbar (x) s and is empty for
/// far-field links.
struct XFactor {
  Eigen::Index device = 0;
  Field field = Field::far;
  double gain = 0.0;  // far-field: cov_part = sqrt(gain) I
  Eigen::MatrixXcd cov_part;
  Eigen::VectorXcd signature;
  Eigen::VectorXcd channel_mean;  // hbar, near-field only
  Eigen::VectorXcd mean_part;

  bool has_mean() const { return mean_part.size() > 0; }
  Eigen::Index rank() const { return cov_part.cols(); }
  Eigen::Index dim() const { return cov_part.rows() * signature.size(); }
  /// Dense LK x J matrix; tests and small oracles only.
  Eigen::MatrixXcd materialize() const;
};

/// Vectorized received signal of one AP, vec(Y_m) with Y_m of size L x K.
struct ReceivedSignal {
  Eigen::VectorXcd y;
  double noise_var = 0.0;
};

struct ElementDistances {
  Eigen::VectorXd per_element;  // [r]_k
  double center = 0.0;          // r_0, distance to the array center
};

/// Element k of the ULA at `ap` sits at offset (k - (K-1)/2) lambda/2 along
/// `axis`; distances use the toroidal displacement from the array center.
ElementDistances element_distances(const Point& source, const Point& ap, const Point& axis,
                                   std::size_t antennas, double wavelength, double side);
ElementDistances element_distances(const Point& device, std::size_t ap_index,
                                   const Placement& placement, const ScenarioConfig& cfg);

/// Spherical-wave response exp(-j 2 pi / lambda ([r]_k - r0)).
Eigen::VectorXcd array_response(const Eigen::VectorXd& distances, double center,
                                double wavelength);

ChannelStats build_channel_stats(std::size_t ap, std::size_t device, const Placement& placement,
                                 const ScenarioConfig& cfg);
ChannelModel build_channel_model(const Scenario& sc);

/// h = mean + B z with z ~ CN(0, I_J).
Eigen::VectorXcd sample_channel(const ChannelStats& stats, Rng& rng);

Eigen::VectorXcd kron(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b);
Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

XFactor make_x_factor(const ChannelStats& stats, const Eigen::VectorXcd& signature,
                      Eigen::Index device);
std::vector<XFactor> make_x_factors(const std::vector<ChannelStats>& row,
                                    const SignatureMatrix& signatures);

/// Realizations behind one synthesized block, for audit and tests.
struct SampledDraws {
  std::vector<std::vector<Eigen::VectorXcd>> channels;  // [ap][device]
  std::vector<Eigen::VectorXcd> noise;                  // [ap], vectorized
};

/// y_m = sum_n a_n h_{m,n} (x) s_n + w_m for every AP. Channels are drawn from
/// `channel_rng` for every link (active or not), noise from `noise_rng`;
/// `add_noise = false` is for tests.
std::vector<ReceivedSignal> synthesize_received(const ChannelModel& model,
                                                const SignatureMatrix& signatures,
                                                const ActivityVector& activity, Rng& channel_rng,
                                                Rng& noise_rng, bool add_noise = true,
                                                SampledDraws* draws = nullptr);

/// Same construction in matrix form, Y_m = sum_n a_n s_n h^T + W, using the
/// supplied channel realizations [ap][device] and noise matrices [ap].
std::vector<Eigen::MatrixXcd> received_matrix_form(
    const std::vector<std::vector<Eigen::VectorXcd>>& channels, const SignatureMatrix& signatures,
    const ActivityVector& activity, const std::vector<Eigen::MatrixXcd>& noise);

inline constexpr Eigen::Index kDefaultOracleCap = 256;

/// Dense model moments (mean, covariance) for activity `theta` at one AP.
/// Throws std::length_error when LK exceeds `oracle_cap`.
std::pair<Eigen::VectorXcd, Eigen::MatrixXcd> model_mean_cov(
    const Eigen::VectorXd& theta, const std::vector<ChannelStats>& row,
    const SignatureMatrix& signatures, double noise_var, Eigen::Index oracle_cap = kDefaultOracleCap);

/// Sampled channels as JSON (format "hybridad.channels", version 1).
nlohmann::json channels_to_json(const std::vector<std::vector<Eigen::VectorXcd>>& channels);

}  // namespace hybridad
