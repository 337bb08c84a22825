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

#include <complex>
#include <cstdint>
#include <random>

namespace hybridad {

/// Named random substreams. Each draw class gets its own engine so that
/// changing how many numbers one class consumes never shifts another.
enum class Stream : std::uint64_t {
  placement = 1,
  scatterers = 2,
  signatures = 3,
  activity = 4,
  channels = 5,
  noise = 6,
  analysis = 7,
  test = 99,
};

std::uint64_t splitmix64(std::uint64_t x);

/// Deterministic, platform-independent random source. Built on
/// std::mt19937_64 (whose output sequence is fixed by the standard); the
/// floating-point transforms are done here rather than through the
/// implementation-defined <random> distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Engine for (root seed, stream, index). `index` is typically the trial.
  static Rng substream(std::uint64_t root, Stream stream, std::uint64_t index = 0);

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer on [0, n).
  std::uint64_t below(std::uint64_t n);
  /// Standard normal (Box-Muller, one cached deviate).
  double normal();
  /// Circularly-symmetric complex Gaussian with E|z|^2 = 1.
  std::complex<double> complex_normal();

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace hybridad
