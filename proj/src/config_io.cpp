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


#include "hybridad/config_io.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>


namespace hybridad {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw std::invalid_argument("invalid value for " + std::string(key) + ": '" +
                              std::string(value) + "'");
}

double parse_double(std::string_view key, std::string_view value) {
  const std::string s(trim(value));
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) bad_value(key, value);
    return v;
  } catch (const std::logic_error&) {
    bad_value(key, value);
  }
}

std::uint64_t parse_u64(std::string_view key, std::string_view value) {
  const auto s = trim(value);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) bad_value(key, value);
  return v;
}

Point parse_point(std::string_view key, std::string_view text) {
  const auto comma = text.find(',');
  if (comma == std::string_view::npos) bad_value(key, text);
  return {parse_double(key, text.substr(0, comma)), parse_double(key, text.substr(comma + 1))};
}

// "x1,y1; x2,y2; ..."
std::vector<Point> parse_points(std::string_view key, std::string_view text) {
  std::vector<Point> pts;
  text = trim(text);
  if (text.empty() || text == "default") return pts;
  while (!text.empty()) {
    const auto semi = text.find(';');
    pts.push_back(parse_point(key, trim(text.substr(0, semi))));
    if (semi == std::string_view::npos) break;
    text = trim(text.substr(semi + 1));
  }
  return pts;
}

using Setter = std::function<void(ScenarioConfig&, std::string_view)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"area_side", [](auto& c, auto v) { c.area_side = parse_double("area_side", v); }},
      {"N", [](auto& c, auto v) { c.num_devices = parse_u64("N", v); }},
      {"M", [](auto& c, auto v) { c.num_aps = parse_u64("M", v); }},
      {"K", [](auto& c, auto v) { c.antennas_per_ap = parse_u64("K", v); }},
      {"L", [](auto& c, auto v) { c.signature_length = parse_u64("L", v); }},
      {"lambda_c", [](auto& c, auto v) { c.wavelength = parse_double("lambda_c", v); }},
      {"L_m", [](auto& c, auto v) { c.scatterers_per_ap = parse_u64("L_m", v); }},
      {"sigma_scatter_sq",
       [](auto& c, auto v) { c.scatter_variance = parse_double("sigma_scatter_sq", v); }},
      {"active_ratio", [](auto& c, auto v) { c.active_ratio = parse_double("active_ratio", v); }},
      {"noise_power_dbm",
       [](auto& c, auto v) { c.noise_power_dbm = parse_double("noise_power_dbm", v); }},
      {"tx_power_dbm", [](auto& c, auto v) { c.tx_power_dbm = parse_double("tx_power_dbm", v); }},
      {"seed", [](auto& c, auto v) { c.seed = parse_u64("seed", v); }},
      {"ap_positions", [](auto& c, auto v) { c.ap_positions = parse_points("ap_positions", v); }},
      {"array_axis", [](auto& c, auto v) { c.array_axis = parse_point("array_axis", trim(v)); }},
  };
  return table;
}

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

const std::vector<std::string>& scenario_config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, _] : setters()) k.push_back(name);
    return k;
  }();
  return keys;
}

void apply_override(ScenarioConfig& cfg, std::string_view key, std::string_view value) {
  const auto it = setters().find(key);
  if (it == setters().end()) {
    throw std::invalid_argument("unknown config key: " + std::string(key));
  }
  it->second(cfg, value);
}

ScenarioConfig parse_scenario_config(std::istream& in, ScenarioConfig base) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view(line);
    view = trim(view.substr(0, view.find('#')));
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
    }
    apply_override(base, trim(view.substr(0, eq)), trim(view.substr(eq + 1)));
  }
  return base;
}

ScenarioConfig load_scenario_config(const std::string& path, ScenarioConfig base) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  return parse_scenario_config(in, std::move(base));
}

void write_scenario_config(std::ostream& out, const ScenarioConfig& cfg) {
  out << "area_side = " << format_double(cfg.area_side) << '\n'
      << "N = " << cfg.num_devices << '\n'
      << "M = " << cfg.num_aps << '\n'
      << "K = " << cfg.antennas_per_ap << '\n'
      << "L = " << cfg.signature_length << '\n'
      << "lambda_c = " << format_double(cfg.wavelength) << '\n'
      << "L_m = " << cfg.scatterers_per_ap << '\n'
      << "sigma_scatter_sq = " << format_double(cfg.scatter_variance) << '\n'
      << "active_ratio = " << format_double(cfg.active_ratio) << '\n'
      << "noise_power_dbm = " << format_double(cfg.noise_power_dbm) << '\n'
      << "tx_power_dbm = " << format_double(cfg.tx_power_dbm) << '\n'
      << "seed = " << cfg.seed << '\n';
  out << "ap_positions = ";
  if (cfg.ap_positions.empty()) out << "default";
  for (std::size_t i = 0; i < cfg.ap_positions.size(); ++i) {
    if (i) out << "; ";
    out << format_double(cfg.ap_positions[i].x) << ',' << format_double(cfg.ap_positions[i].y);
  }
  out << '\n'
      << "array_axis = " << format_double(cfg.array_axis.x) << ','
      << format_double(cfg.array_axis.y) << '\n';
}

nlohmann::json to_json(const ScenarioConfig& cfg) {
  nlohmann::json j;
  j["area_side"] = cfg.area_side;
  j["N"] = cfg.num_devices;
  j["M"] = cfg.num_aps;
  j["K"] = cfg.antennas_per_ap;
  j["L"] = cfg.signature_length;
  j["lambda_c"] = cfg.wavelength;
  j["L_m"] = cfg.scatterers_per_ap;
  j["sigma_scatter_sq"] = cfg.scatter_variance;
  j["active_ratio"] = cfg.active_ratio;
  j["noise_power_dbm"] = cfg.noise_power_dbm;
  j["tx_power_dbm"] = cfg.tx_power_dbm;
  j["seed"] = cfg.seed;
  j["rayleigh_distance_m"] = rayleigh_distance(cfg.antennas_per_ap, cfg.wavelength);
  auto aps = nlohmann::json::array();
  for (const auto& p : cfg.ap_positions) aps.push_back({p.x, p.y});
  j["ap_positions"] = aps;
  j["array_axis"] = {cfg.array_axis.x, cfg.array_axis.y};
  return j;
}

nlohmann::json scenario_to_json(const Scenario& sc) {
  nlohmann::json j;
  j["config"] = to_json(sc.config);
  auto pts = [](const std::vector<Point>& v) {
    auto a = nlohmann::json::array();
    for (const auto& p : v) a.push_back({p.x, p.y});
    return a;
  };
  j["ap_positions"] = pts(sc.placement.ap_positions);
  j["device_positions"] = pts(sc.placement.device_positions);
  auto scat = nlohmann::json::array();
  for (const auto& v : sc.placement.scatterer_positions) scat.push_back(pts(v));
  j["scatterer_positions"] = scat;
  auto fields = nlohmann::json::array();
  for (std::size_t m = 0; m < sc.placement.ap_positions.size(); ++m) {
    auto row = nlohmann::json::array();
    for (const auto& d : sc.placement.device_positions) {
      row.push_back(to_string(classify_field(d, m, sc.placement, sc.config)));
    }
    fields.push_back(row);
  }
  j["field"] = fields;
  auto sig = nlohmann::json::array();
  for (Eigen::Index n = 0; n < sc.signatures.num_devices(); ++n) {
    auto col = nlohmann::json::array();
    for (Eigen::Index l = 0; l < sc.signatures.length(); ++l) {
      const auto z = sc.signatures.values(l, n);
      col.push_back({z.real(), z.imag()});
    }
    sig.push_back(col);
  }
  j["signatures"] = sig;
  auto truth = nlohmann::json::array();
  for (Eigen::Index n = 0; n < sc.truth.values.size(); ++n) truth.push_back(sc.truth.values(n));
  j["truth"] = truth;
  return j;
}

}  // namespace hybridad
