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
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace hybridad {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

/// Full description of one experiment. Units: meters, dBm, counts.
struct ScenarioConfig {
  double area_side = 200.0;
  std::size_t num_devices = 100;        // N
  std::size_t num_aps = 3;              // M
  std::size_t antennas_per_ap = 24;     // K
  std::size_t signature_length = 6;     // L
  double wavelength = 0.2;              // lambda_c
  std::size_t scatterers_per_ap = 8;    // L_m
  double scatter_variance = 1.0;        // sigma^2_{m,l}
  double active_ratio = 0.1;
  double noise_power_dbm = -99.0;
  double tx_power_dbm = 23.0;
  std::uint64_t seed = 1;
  /// Empty means the built-in layout (regular polygon of radius 40 m,
  /// first AP on the positive x axis).
  std::vector<Point> ap_positions;
  /// Common orientation of every ULA; normalized on use.
  Point array_axis{1.0, 0.0};

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;

  std::size_t num_active() const;
};

struct Placement {
  std::vector<Point> ap_positions;
  std::vector<Point> device_positions;
  std::vector<std::vector<Point>> scatterer_positions;  // [ap][scatterer]
  Point array_axis{1.0, 0.0};
};

/// L x N matrix of QPSK-valued signatures, one column per device.
struct SignatureMatrix {
  Eigen::MatrixXcd values;

  Eigen::Index length() const { return values.rows(); }
  Eigen::Index num_devices() const { return values.cols(); }
  auto column(Eigen::Index n) const { return values.col(n); }
};

/// Activity indicator: {0,1} for ground truth, [0,1] for estimates.
struct ActivityVector {
  Eigen::VectorXd values;

  std::size_t count_active(double threshold = 0.5) const;
};

enum class Field { near, far };

const char* to_string(Field f);

struct Scenario {
  ScenarioConfig config;
  Placement placement;
  SignatureMatrix signatures;
  ActivityVector truth;
};

/// Reduce a coordinate onto the torus [-side/2, side/2).
double wrap_coordinate(double v, double side);
/// Shortest displacement q - p on the torus.
Point wrap_displacement(const Point& p, const Point& q, double side);
double wrap_distance(const Point& p, const Point& q, double side);

/// 2 D^2 / lambda with aperture D = (K - 1) lambda / 2.
double rayleigh_distance(std::size_t antennas, double wavelength);

/// 128.1 + 37.6 log10(tau), tau in km.
double path_loss_db(double tau_km);

/// Path loss for a distance in meters after applying the 1 m floor.
double path_loss_db_meters(double meters);

double dbm_to_watts(double dbm);

std::vector<Point> default_ap_layout(std::size_t num_aps);

/// Placement, signatures and ground truth for trial `trial` of `cfg`.
/// Each draw class uses its own substream of (cfg.seed, trial).
Scenario generate_scenario(const ScenarioConfig& cfg, std::uint64_t trial = 0);

Field classify_field(const Point& device, std::size_t ap_index, const Placement& placement,
                     const ScenarioConfig& cfg);

}  // namespace hybridad
