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


#include "hybridad/quartic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hybridad {

namespace {

constexpr double kDegenerate = 1e-14;

double polish(double x, double c0, double c1, double c2, double c3) {
  for (int it = 0; it < 3; ++it) {
    const double f = c0 + x * (c1 + x * (c2 + x * c3));
    const double df = c1 + x * (2.0 * c2 + x * 3.0 * c3);
    if (df == 0.0 || !std::isfinite(df)) break;
    const double step = f / df;
    if (!std::isfinite(step)) break;
    x -= step;
  }
  return x;
}

void quadratic_roots(double c0, double c1, double c2, std::vector<double>& out) {
  const double disc = c1 * c1 - 4.0 * c2 * c0;
  if (disc < 0.0) return;
  const double sq = std::sqrt(disc);
  // Stable pairing avoids cancellation in -c1 +- sq.
  const double t = -0.5 * (c1 + std::copysign(sq, c1));
  if (t != 0.0) {
    out.push_back(t / c2);
    out.push_back(c0 / t);
  } else {
    out.push_back(0.0);
  }
}

}  // namespace

double surrogate_value(const QuarticCoeffs& c, double omega, double d) {
  return c(d) + 0.5 * omega * d * d;
}

std::vector<double> real_cubic_roots(double c0, double c1, double c2, double c3) {
  std::vector<double> roots;
  const double scale = std::max({std::abs(c0), std::abs(c1), std::abs(c2), std::abs(c3)});
  if (scale == 0.0) return roots;
  const double eps = kDegenerate * scale;

  if (std::abs(c3) <= eps) {
    if (std::abs(c2) <= eps) {
      if (std::abs(c1) > eps) roots.push_back(-c0 / c1);
      return roots;
    }
    quadratic_roots(c0, c1, c2, roots);
    for (auto& r : roots) r = polish(r, c0, c1, c2, 0.0);
    return roots;
  }

  // Monic x^3 + a x^2 + b x + c, depressed with x = t - a/3.
  const double a = c2 / c3;
  const double b = c1 / c3;
  const double c = c0 / c3;
  const double p = b - a * a / 3.0;
  const double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
  const double shift = -a / 3.0;
  const double disc = q * q / 4.0 + p * p * p / 27.0;

  if (disc > 0.0) {
    const double big = -std::copysign(std::cbrt(std::abs(q) / 2.0 + std::sqrt(disc)), q);
    const double t = big != 0.0 ? big - p / (3.0 * big) : 0.0;
    roots.push_back(t + shift);
  } else if (p == 0.0) {
    roots.push_back(shift);
  } else {
    const double r = 2.0 * std::sqrt(-p / 3.0);
    const double arg = std::clamp(3.0 * q / (p * r), -1.0, 1.0);
    const double phi = std::acos(arg) / 3.0;
    for (int k = 0; k < 3; ++k) {
      roots.push_back(r * std::cos(phi - 2.0 * std::numbers::pi * k / 3.0) + shift);
    }
  }
  for (auto& x : roots) x = polish(x, c0, c1, c2, c3);
  return roots;
}

double minimize_quartic(const QuarticCoeffs& c, double omega, double lo, double hi) {
  if (!std::isfinite(c.rho1) || !std::isfinite(c.rho2) || !std::isfinite(c.rho3) ||
      !std::isfinite(c.rho4) || !std::isfinite(omega) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw std::invalid_argument("minimize_quartic: nonfinite input");
  }
  if (lo > hi) throw std::invalid_argument("minimize_quartic: empty interval");

  // q'(d) = rho1 + (2 rho2 + omega) d + 3 rho3 d^2 + 4 rho4 d^3
  const auto stationary =
      real_cubic_roots(c.rho1, 2.0 * c.rho2 + omega, 3.0 * c.rho3, 4.0 * c.rho4);

  double best_d = 0.0;
  double best_v = 0.0;
  auto consider = [&](double d) {
    if (!(d >= lo && d <= hi)) return;
    const double v = surrogate_value(c, omega, d);
    if (!std::isfinite(v)) return;
    if (v < best_v || (v == best_v && std::abs(d) < std::abs(best_d))) {
      best_v = v;
      best_d = d;
    }
  };
  if (lo <= 0.0 && hi >= 0.0) {
    best_v = 0.0;
    best_d = 0.0;
  } else {
    best_d = lo;
    best_v = surrogate_value(c, omega, lo);
  }
  consider(lo);
  consider(hi);
  for (double r : stationary) consider(r);
  return best_d;
}

}  // namespace hybridad
