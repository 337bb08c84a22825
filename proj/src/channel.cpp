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


#include "hybridad/channel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace hybridad {

Eigen::MatrixXcd XFactor::materialize() const {
  const Eigen::Index L = signature.size();
  Eigen::MatrixXcd x(cov_part.rows() * L, cov_part.cols());
  for (Eigen::Index j = 0; j < cov_part.cols(); ++j) {
    for (Eigen::Index k = 0; k < cov_part.rows(); ++k) {
      x.col(j).segment(k * L, L) = cov_part(k, j) * signature;
    }
  }
  return x;
}

ElementDistances element_distances(const Point& source, const Point& ap, const Point& axis,
                                   std::size_t antennas, double wavelength, double side) {
  const Point d = wrap_displacement(ap, source, side);
  const double len = std::hypot(axis.x, axis.y);
  if (!(len > 0.0)) throw std::invalid_argument("array axis must be nonzero");
  const Point unit{axis.x / len, axis.y / len};
  const auto K = static_cast<Eigen::Index>(antennas);
  const double half_index = static_cast<double>(antennas - 1) / 2.0;
  ElementDistances out;
  out.per_element.resize(K);
  for (Eigen::Index k = 0; k < K; ++k) {
    const double offset = (static_cast<double>(k) - half_index) * wavelength / 2.0;
    out.per_element(k) = std::hypot(d.x - offset * unit.x, d.y - offset * unit.y);
  }
  out.center = std::hypot(d.x, d.y);
  return out;
}

ElementDistances element_distances(const Point& device, std::size_t ap_index,
                                   const Placement& placement, const ScenarioConfig& cfg) {
  return element_distances(device, placement.ap_positions.at(ap_index), placement.array_axis,
                           cfg.antennas_per_ap, cfg.wavelength, cfg.area_side);
}

Eigen::VectorXcd array_response(const Eigen::VectorXd& distances, double center,
                                double wavelength) {
  const double k0 = 2.0 * std::numbers::pi / wavelength;
  Eigen::VectorXcd b(distances.size());
  for (Eigen::Index k = 0; k < distances.size(); ++k) {
    b(k) = std::polar(1.0, -k0 * (distances(k) - center));
  }
  return b;
}

ChannelStats build_channel_stats(std::size_t ap, std::size_t device, const Placement& placement,
                                 const ScenarioConfig& cfg) {
  const auto K = static_cast<Eigen::Index>(cfg.antennas_per_ap);
  const double tx = dbm_to_watts(cfg.tx_power_dbm);
  const Point& dev = placement.device_positions.at(device);
  const Point& ap_pos = placement.ap_positions.at(ap);
  const double dist = wrap_distance(dev, ap_pos, cfg.area_side);

  ChannelStats st;
  st.field = classify_field(dev, ap, placement, cfg);
  if (st.field == Field::far) {
    st.gain = tx * std::pow(10.0, -path_loss_db_meters(dist) / 10.0);
    st.mean = Eigen::VectorXcd::Zero(K);
    st.cov_factor = std::sqrt(st.gain) * Eigen::MatrixXcd::Identity(K, K);
    return st;
  }

  const auto los = element_distances(dev, ap, placement, cfg);
  const double beta = std::sqrt(tx * std::pow(10.0, -path_loss_db_meters(dist) / 10.0));
  st.mean = beta * array_response(los.per_element, los.center, cfg.wavelength);

  const auto& scatterers = placement.scatterer_positions.at(ap);
  const double sigma = std::sqrt(cfg.scatter_variance);
  st.cov_factor.resize(K, static_cast<Eigen::Index>(scatterers.size()));
  for (std::size_t l = 0; l < scatterers.size(); ++l) {
    const Point& sc = scatterers[l];
    // Two-hop length device -> scatterer -> AP sets the NLoS gain.
    const double hops = wrap_distance(dev, sc, cfg.area_side) + wrap_distance(sc, ap_pos, cfg.area_side);
    const double nlos_amp = std::sqrt(tx * std::pow(10.0, -path_loss_db_meters(hops) / 10.0));
    const auto r = element_distances(sc, ap_pos, placement.array_axis, cfg.antennas_per_ap,
                                     cfg.wavelength, cfg.area_side);
    st.cov_factor.col(static_cast<Eigen::Index>(l)) =
        sigma * nlos_amp * array_response(r.per_element, r.center, cfg.wavelength);
  }
  return st;
}

ChannelModel build_channel_model(const Scenario& sc) {
  const auto& cfg = sc.config;
  ChannelModel model;
  model.links.resize(cfg.num_aps);
  model.noise_var.assign(cfg.num_aps, dbm_to_watts(cfg.noise_power_dbm));
  for (std::size_t m = 0; m < cfg.num_aps; ++m) {
    model.links[m].reserve(cfg.num_devices);
    for (std::size_t n = 0; n < cfg.num_devices; ++n) {
      model.links[m].push_back(build_channel_stats(m, n, sc.placement, cfg));
    }
  }
  return model;
}

Eigen::VectorXcd sample_channel(const ChannelStats& stats, Rng& rng) {
  Eigen::VectorXcd z(stats.rank());
  for (Eigen::Index j = 0; j < z.size(); ++j) z(j) = rng.complex_normal();
  return stats.mean + stats.cov_factor * z;
}

Eigen::VectorXcd kron(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
  Eigen::VectorXcd out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

XFactor make_x_factor(const ChannelStats& stats, const Eigen::VectorXcd& signature,
                      Eigen::Index device) {
  XFactor x;
  x.device = device;
  x.field = stats.field;
  x.gain = stats.gain;
  x.cov_part = stats.cov_factor;
  x.signature = signature;
  if (stats.field == Field::near) {
    x.channel_mean = stats.mean;
    x.mean_part = kron(stats.mean, signature);
  }
  return x;
}

std::vector<XFactor> make_x_factors(const std::vector<ChannelStats>& row,
                                    const SignatureMatrix& signatures) {
  std::vector<XFactor> out;
  out.reserve(row.size());
  for (std::size_t n = 0; n < row.size(); ++n) {
    const auto idx = static_cast<Eigen::Index>(n);
    out.push_back(make_x_factor(row[n], signatures.column(idx), idx));
  }
  return out;
}

std::vector<ReceivedSignal> synthesize_received(const ChannelModel& model,
                                                const SignatureMatrix& signatures,
                                                const ActivityVector& activity, Rng& channel_rng,
                                                Rng& noise_rng, bool add_noise,
                                                SampledDraws* draws) {
  const Eigen::Index L = signatures.length();
  std::vector<ReceivedSignal> out;
  out.reserve(model.num_aps());
  if (draws) {
    draws->channels.assign(model.num_aps(), {});
    draws->noise.assign(model.num_aps(), {});
  }
  for (std::size_t m = 0; m < model.num_aps(); ++m) {
    const auto& row = model.links[m];
    const Eigen::Index K = row.empty() ? 0 : row.front().cov_factor.rows();
    ReceivedSignal rs;
    rs.noise_var = model.noise_var[m];
    rs.y = Eigen::VectorXcd::Zero(L * K);
    for (std::size_t n = 0; n < row.size(); ++n) {
      const auto idx = static_cast<Eigen::Index>(n);
      Eigen::VectorXcd h = sample_channel(row[n], channel_rng);
      if (activity.values(idx) != 0.0) {
        rs.y += activity.values(idx) * kron(h, Eigen::VectorXcd(signatures.column(idx)));
      }
      if (draws) draws->channels[m].push_back(std::move(h));
    }
    Eigen::VectorXcd w = Eigen::VectorXcd::Zero(L * K);
    if (add_noise) {
      const double sd = std::sqrt(rs.noise_var);
      for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = sd * noise_rng.complex_normal();
    }
    rs.y += w;
    if (draws) draws->noise[m] = std::move(w);
    out.push_back(std::move(rs));
  }
  return out;
}

std::vector<Eigen::MatrixXcd> received_matrix_form(
    const std::vector<std::vector<Eigen::VectorXcd>>& channels, const SignatureMatrix& signatures,
    const ActivityVector& activity, const std::vector<Eigen::MatrixXcd>& noise) {
  std::vector<Eigen::MatrixXcd> out;
  for (std::size_t m = 0; m < channels.size(); ++m) {
    Eigen::MatrixXcd y = noise.at(m);
    for (std::size_t n = 0; n < channels[m].size(); ++n) {
      const auto idx = static_cast<Eigen::Index>(n);
      y += activity.values(idx) * signatures.column(idx) * channels[m][n].transpose();
    }
    out.push_back(std::move(y));
  }
  return out;
}

std::pair<Eigen::VectorXcd, Eigen::MatrixXcd> model_mean_cov(const Eigen::VectorXd& theta,
                                                             const std::vector<ChannelStats>& row,
                                                             const SignatureMatrix& signatures,
                                                             double noise_var,
                                                             Eigen::Index oracle_cap) {
  const Eigen::Index L = signatures.length();
  const Eigen::Index K = row.empty() ? 0 : row.front().cov_factor.rows();
  const Eigen::Index dim = L * K;
  if (dim > oracle_cap) {
    throw std::length_error("model_mean_cov: LK = " + std::to_string(dim) +
                            " exceeds the oracle cap " + std::to_string(oracle_cap));
  }
  Eigen::VectorXcd mean = Eigen::VectorXcd::Zero(dim);
  Eigen::MatrixXcd cov = noise_var * Eigen::MatrixXcd::Identity(dim, dim);
  for (std::size_t n = 0; n < row.size(); ++n) {
    const auto idx = static_cast<Eigen::Index>(n);
    const double t = theta(idx);
    if (t == 0.0) continue;
    const Eigen::VectorXcd s = signatures.column(idx);
    if (row[n].field == Field::near) mean += t * kron(row[n].mean, s);
    cov += t * kron(row[n].covariance(), Eigen::MatrixXcd(s * s.adjoint()));
  }
  return {mean, cov};
}

nlohmann::json channels_to_json(const std::vector<std::vector<Eigen::VectorXcd>>& channels) {
  nlohmann::json j;
  j["format"] = "hybridad.channels";
  j["version"] = 1;
  auto aps = nlohmann::json::array();
  for (const auto& row : channels) {
    auto devs = nlohmann::json::array();
    for (const auto& h : row) {
      auto v = nlohmann::json::array();
      for (Eigen::Index k = 0; k < h.size(); ++k) v.push_back({h(k).real(), h(k).imag()});
      devs.push_back(v);
    }
    aps.push_back(devs);
  }
  j["channels"] = aps;
  return j;
}

}  // namespace hybridad
