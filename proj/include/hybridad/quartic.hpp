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

#include <vector>

namespace hybridad {

/// q(d) = rho1 d + rho2 d^2 + rho3 d^3 + rho4 d^4.
struct QuarticCoeffs {
  double rho1 = 0.0;
  double rho2 = 0.0;
  double rho3 = 0.0;
  double rho4 = 0.0;

  double operator()(double d) const { return d * (rho1 + d * (rho2 + d * (rho3 + d * rho4))); }
  QuarticCoeffs& operator+=(const QuarticCoeffs& o) {
    rho1 += o.rho1;
    rho2 += o.rho2;
    rho3 += o.rho3;
    rho4 += o.rho4;
    return *this;
  }
};

/// Surrogate with the proximal term: q(d) + omega/2 d^2.
double surrogate_value(const QuarticCoeffs& c, double omega, double d);

/// Real roots of c0 + c1 x + c2 x^2 + c3 x^3, degrading to lower degree when
/// a leading coefficient is below 1e-14 of the largest one. Roots are
/// Newton-polished.
std::vector<double> real_cubic_roots(double c0, double c1, double c2, double c3);

/// Global minimizer of surrogate_value over [lo, hi]; lo <= 0 <= hi.
/// Candidates are the stationary points inside the interval, both ends and
/// 0; ties go to the smaller |d|. Throws on nonfinite input.
double minimize_quartic(const QuarticCoeffs& c, double omega, double lo, double hi);

}  // namespace hybridad
