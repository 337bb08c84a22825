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


#include "hybridad/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

#include "hybridad/rng.hpp"

namespace hybridad {

namespace {

void require(bool ok, const char* field, const char* what) {
  if (!ok) {
    throw std::invalid_argument(std::string("invalid ") + field + ": " + what);
  }
}

constexpr double kDefaultApRadius = 40.0;
constexpr double kDefaultAreaSide = 200.0;

}  // namespace

void ScenarioConfig::validate() const {
  require(area_side > 0.0 && std::isfinite(area_side), "area_side", "must be positive");
  require(num_devices >= 1, "N", "need at least one device");
  require(num_aps >= 1, "M", "need at least one AP");
  require(antennas_per_ap >= 2, "K", "need at least two antennas");
  require(signature_length >= 1, "L", "signature length must be >= 1");
  require(wavelength > 0.0 && std::isfinite(wavelength), "lambda_c", "must be positive");
  require(scatterers_per_ap >= 1, "L_m", "need at least one scatterer");
  require(scatter_variance > 0.0, "sigma_scatter_sq", "must be positive");
  require(active_ratio > 0.0 && active_ratio < 1.0, "active_ratio", "must lie in (0, 1)");
  require(std::isfinite(noise_power_dbm), "noise_power_dbm", "must be finite");
  require(std::isfinite(tx_power_dbm), "tx_power_dbm", "must be finite");
  require(std::hypot(array_axis.x, array_axis.y) > 0.0, "array_axis", "must be nonzero");
  if (!ap_positions.empty()) {
    require(ap_positions.size() == num_aps, "ap_positions", "count must equal M");
    for (const auto& p : ap_positions) {
      require(std::abs(p.x) <= area_side / 2 && std::abs(p.y) <= area_side / 2, "ap_positions",
              "outside the area");
    }
  } else {
    require(area_side == kDefaultAreaSide, "ap_positions",
            "default AP layout is defined for area_side = 200 only; give explicit positions");
  }
}

std::size_t ScenarioConfig::num_active() const {
  return static_cast<std::size_t>(std::llround(active_ratio * static_cast<double>(num_devices)));
}

std::size_t ActivityVector::count_active(double threshold) const {
  return static_cast<std::size_t>((values.array() >= threshold).count());
}

const char* to_string(Field f) { return f == Field::near ? "near" : "far"; }

double wrap_coordinate(double v, double side) {
  double r = std::fmod(v + side / 2, side);
  if (r < 0) r += side;
  return r - side / 2;
}

Point wrap_displacement(const Point& p, const Point& q, double side) {
  auto reduce = [side](double delta) {
    delta = std::fmod(delta, side);
    if (delta > side / 2) delta -= side;
    if (delta < -side / 2) delta += side;
    return delta;
  };
  return {reduce(q.x - p.x), reduce(q.y - p.y)};
}

double wrap_distance(const Point& p, const Point& q, double side) {
  const Point d = wrap_displacement(p, q, side);
  return std::hypot(d.x, d.y);
}

double rayleigh_distance(std::size_t antennas, double wavelength) {
  const double aperture = static_cast<double>(antennas - 1) * wavelength / 2.0;
  return 2.0 * aperture * aperture / wavelength;
}

double path_loss_db(double tau_km) { return 128.1 + 37.6 * std::log10(tau_km); }

double path_loss_db_meters(double meters) {
  return path_loss_db(std::max(meters, 1.0) / 1000.0);
}

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

std::vector<Point> default_ap_layout(std::size_t num_aps) {
  std::vector<Point> aps;
  aps.reserve(num_aps);
  for (std::size_t m = 0; m < num_aps; ++m) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(m) /
                         static_cast<double>(num_aps);
    aps.push_back({kDefaultApRadius * std::cos(angle), kDefaultApRadius * std::sin(angle)});
  }
  // Exact values for the three-AP layout so comparisons are bitwise.
  if (num_aps == 3) {
    const double h = 20.0 * std::sqrt(3.0);
    aps = {{40.0, 0.0}, {-20.0, h}, {-20.0, -h}};
  }
  return aps;
}

Scenario generate_scenario(const ScenarioConfig& cfg, std::uint64_t trial) {
  cfg.validate();
  Scenario sc;
  sc.config = cfg;
  const double half = cfg.area_side / 2;
  const auto N = static_cast<Eigen::Index>(cfg.num_devices);
  const auto L = static_cast<Eigen::Index>(cfg.signature_length);

  Placement& pl = sc.placement;
  const double axis_norm = std::hypot(cfg.array_axis.x, cfg.array_axis.y);
  pl.array_axis = {cfg.array_axis.x / axis_norm, cfg.array_axis.y / axis_norm};
  pl.ap_positions = cfg.ap_positions.empty() ? default_ap_layout(cfg.num_aps) : cfg.ap_positions;

  Rng placement_rng = Rng::substream(cfg.seed, Stream::placement, trial);
  pl.device_positions.reserve(cfg.num_devices);
  for (std::size_t n = 0; n < cfg.num_devices; ++n) {
    const double x = placement_rng.uniform(-half, half);
    const double y = placement_rng.uniform(-half, half);
    pl.device_positions.push_back({x, y});
  }

  // Scatterers: uniform by area in an annulus around each AP out to the
  // Rayleigh distance, so their responses are spherical-wave.
  Rng scatter_rng = Rng::substream(cfg.seed, Stream::scatterers, trial);
  const double outer = rayleigh_distance(cfg.antennas_per_ap, cfg.wavelength);
  const double inner = std::min(1.0, outer / 2);
  pl.scatterer_positions.resize(cfg.num_aps);
  for (std::size_t m = 0; m < cfg.num_aps; ++m) {
    for (std::size_t l = 0; l < cfg.scatterers_per_ap; ++l) {
      const double r = std::sqrt(scatter_rng.uniform(inner * inner, outer * outer));
      const double phi = scatter_rng.uniform(0.0, 2.0 * std::numbers::pi);
      const Point& ap = pl.ap_positions[m];
      pl.scatterer_positions[m].push_back({wrap_coordinate(ap.x + r * std::cos(phi), cfg.area_side),
                                           wrap_coordinate(ap.y + r * std::sin(phi), cfg.area_side)});
    }
  }

  Rng sig_rng = Rng::substream(cfg.seed, Stream::signatures, trial);
  const double c = std::numbers::sqrt2 / 2.0;
  sc.signatures.values.resize(L, N);
  for (Eigen::Index n = 0; n < N; ++n) {
    for (Eigen::Index l = 0; l < L; ++l) {
      const auto sym = sig_rng.below(4);
      sc.signatures.values(l, n) = {(sym & 1) ? -c : c, (sym & 2) ? -c : c};
    }
  }

  // Partial Fisher-Yates: the first K slots are a uniform K-subset.
  Rng act_rng = Rng::substream(cfg.seed, Stream::activity, trial);
  std::vector<std::size_t> order(cfg.num_devices);
  std::iota(order.begin(), order.end(), 0);
  const std::size_t k_active = cfg.num_active();
  for (std::size_t i = 0; i < k_active; ++i) {
    const std::size_t j = i + act_rng.below(cfg.num_devices - i);
    std::swap(order[i], order[j]);
  }
  sc.truth.values = Eigen::VectorXd::Zero(N);
  for (std::size_t i = 0; i < k_active; ++i) {
    sc.truth.values(static_cast<Eigen::Index>(order[i])) = 1.0;
  }
  return sc;
}

Field classify_field(const Point& device, std::size_t ap_index, const Placement& placement,
                     const ScenarioConfig& cfg) {
  const double dist = wrap_distance(device, placement.ap_positions.at(ap_index), cfg.area_side);
  return dist <= rayleigh_distance(cfg.antennas_per_ap, cfg.wavelength) ? Field::near : Field::far;
}

}  // namespace hybridad
