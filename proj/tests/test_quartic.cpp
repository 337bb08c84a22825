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


#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hybridad/quartic.hpp"
#include "hybridad/rng.hpp"

using namespace hybridad;

namespace {

double grid_min(const QuarticCoeffs& c, double omega, double lo, double hi, double step) {
  double best = INFINITY;
  const auto n = static_cast<long>(std::floor((hi - lo) / step));
  for (long i = 0; i <= n; ++i) best = std::min(best, surrogate_value(c, omega, lo + step * i));
  return std::min(best, surrogate_value(c, omega, hi));
}

}  // namespace

TEST_CASE("minimize_quartic closed cases") {
  CHECK(minimize_quartic({1.0, 1.0, 0.0, 0.0}, 0.0, -1.0, 1.0) == doctest::Approx(-0.5));
  CHECK(minimize_quartic({1.0, 0.0, 0.0, 0.0}, 0.0, -0.4, 0.6) == doctest::Approx(-0.4));
  CHECK(minimize_quartic({0.0, 0.0, 0.0, 0.0}, 0.0, -0.4, 0.6) == 0.0);
  // omega widens the quadratic: vertex at -rho1 / (2 rho2 + omega).
  CHECK(minimize_quartic({1.0, 1.0, 0.0, 0.0}, 2.0, -1.0, 1.0) == doctest::Approx(-0.25));
  // Positive slope at 0 with the box starting at 0 stays put.
  CHECK(minimize_quartic({3.0, 1.0, 0.0, 0.0}, 0.0, 0.0, 1.0) == 0.0);
  CHECK_THROWS_AS(minimize_quartic({NAN, 0.0, 0.0, 0.0}, 0.0, -1.0, 1.0), std::invalid_argument);
}

TEST_CASE("symmetric double well ties go to the smaller |d|") {
  // q = d^4 - 2 d^2 has equal minima at +-1; with interval [-1, 1] both tie.
  const double d = minimize_quartic({0.0, -2.0, 0.0, 1.0}, 0.0, -1.0, 1.0);
  CHECK(std::abs(std::abs(d) - 1.0) < 1e-12);
}

TEST_CASE("real_cubic_roots") {
  auto roots = real_cubic_roots(-6.0, 11.0, -6.0, 1.0);  // (x-1)(x-2)(x-3)
  REQUIRE(roots.size() == 3);
  std::sort(roots.begin(), roots.end());
  CHECK(roots[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(roots[1] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(roots[2] == doctest::Approx(3.0).epsilon(1e-12));
  roots = real_cubic_roots(-1.0, 0.0, 0.0, 1.0);  // x^3 = 1
  REQUIRE(roots.size() == 1);
  CHECK(roots[0] == doctest::Approx(1.0));
  roots = real_cubic_roots(2.0, -3.0, 1.0, 1e-20);  // degenerates to quadratic
  REQUIRE(roots.size() == 2);
  CHECK(real_cubic_roots(4.0, 2.0, 0.0, 0.0).front() == doctest::Approx(-2.0));
}

TEST_CASE("global minimum property against dense sampling") {
  Rng rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    QuarticCoeffs c{rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(0, 5)};
    const double omega = rng.uniform(0, 2);
    const double theta = rng.uniform();
    const double lo = -theta;
    const double hi = 1.0 - theta;
    const double d = minimize_quartic(c, omega, lo, hi);
    REQUIRE(d >= lo);
    REQUIRE(d <= hi);
    const double v = surrogate_value(c, omega, d);
    for (int i = 0; i <= 1000; ++i) {
      REQUIRE(v <= surrogate_value(c, omega, lo + (hi - lo) * i / 1000.0) + 1e-12);
    }
    CHECK(v <= grid_min(c, omega, lo, hi, 1e-4) + 1e-10);
  }
}
