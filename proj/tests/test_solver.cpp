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

#include "hybridad/channel.hpp"
#include "hybridad/solver.hpp"
#include "test_support.hpp"

using namespace hybridad;
using namespace hybridad::testing;

namespace {

struct Instance {
  Scenario scenario;
  ChannelModel model;
  std::vector<ReceivedSignal> received;
};

Instance make_instance(const ScenarioConfig& cfg, std::uint64_t salt = 0) {
  Instance in;
  in.scenario = generate_scenario(cfg);
  in.model = build_channel_model(in.scenario);
  Rng ch = Rng::substream(cfg.seed + salt, Stream::channels, 0);
  Rng nz = Rng::substream(cfg.seed + salt, Stream::noise, 0);
  in.received = synthesize_received(in.model, in.scenario.signatures, in.scenario.truth, ch, nz);
  return in;
}

Eigen::VectorXd random_theta(Rng& rng, Eigen::Index n) {
  Eigen::VectorXd t(n);
  for (auto& v : t) v = rng.uniform();
  return t;
}

bool has_both_fields(const std::vector<ChannelStats>& row) {
  bool near = false, far = false;
  for (const auto& s : row) (s.field == Field::near ? near : far) = true;
  return near && far;
}

}  // namespace

TEST_CASE("init_local_state") {
  const auto in = make_instance(small_config(3));
  const auto& rx = in.received[0];
  const auto& row = in.model.links[0];
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(8);
  LocalState st = init_local_state(rx, row, in.scenario.signatures, zero, zero);
  CHECK(rel_fro(st.cov_inv(), Eigen::MatrixXcd::Identity(12, 12) / rx.noise_var) < 1e-15);
  CHECK(st.residual() == rx.y);

  SolverParams params;
  const double expected = 12.0 * std::log(rx.noise_var) + rx.y.squaredNorm() / rx.noise_var;
  CHECK(local_objective(st, zero, params) == doctest::Approx(expected).epsilon(1e-12));

  Rng rng(4);
  const Eigen::VectorXd theta = random_theta(rng, 8);
  LocalState st2 = init_local_state(rx, row, in.scenario.signatures, theta, zero);
  const Eigen::MatrixXcd c = dense_covariance(theta, row, in.scenario.signatures, rx.noise_var);
  CHECK((st2.cov_inv() * c - Eigen::MatrixXcd::Identity(12, 12)).norm() < 1e-8);
  CHECK((st2.residual() - dense_residual(rx.y, theta, row, in.scenario.signatures)).norm() <
        1e-8 * rx.y.norm());

  Eigen::VectorXd bad = theta;
  bad(0) = 1.5;
  CHECK_THROWS_AS(LocalState(rx, row, in.scenario.signatures, bad, zero), std::invalid_argument);
  bad(0) = NAN;
  CHECK_THROWS_AS(LocalState(rx, row, in.scenario.signatures, bad, zero), std::invalid_argument);
  CHECK_THROWS_AS(LocalState(rx, row, in.scenario.signatures, Eigen::VectorXd::Zero(3), zero),
                  std::invalid_argument);
}

TEST_CASE("solver params validation") {
  SolverParams p;
  CHECK_NOTHROW(p.validate());
  p.mu = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = SolverParams{};
  p.omega = -1.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("quartic_coeffs against direct substitution") {
  std::size_t instances = 0;
  for (std::uint64_t seed = 100; instances < 30; ++seed) {
    const auto in = make_instance(small_config(seed));
    const std::size_t m = seed % 3;
    const auto& row = in.model.links[m];
    if (!has_both_fields(row)) continue;
    ++instances;
    Rng rng = Rng::substream(seed, Stream::test, 1);
    const Eigen::VectorXd theta = random_theta(rng, 8);
    Eigen::VectorXd lambda(8);
    for (auto& v : lambda) v = rng.uniform(-5, 5);
    const Eigen::VectorXd a = random_theta(rng, 8);
    SolverParams params;
    params.mu = rng.uniform(1, 100);
    LocalState st(in.received[m], row, in.scenario.signatures, theta, lambda);
    for (Eigen::Index n = 0; n < 8; ++n) {
      const QuarticCoeffs c = quartic_coeffs(st, n, a(n), params);
      CHECK(c.rho4 >= 0.0);
      if (row[static_cast<std::size_t>(n)].field == Field::far) {
        CHECK(c.rho3 == 0.0);
        CHECK(c.rho4 == 0.0);
      }
      DenseCoordinate dc = dense_coordinate(in.received[m].y, theta, row, in.scenario.signatures,
                                            in.received[m].noise_var, n);
      dc.lambda = lambda(n);
      dc.a = a(n);
      dc.mu = params.mu;
      CHECK(c(0.0) == 0.0);
      for (const double d : {-0.3, 0.1, 0.7}) {
        const double want = dc.surrogate_change(d);
        REQUIRE(std::abs(c(d) - want) <= 1e-8 * std::abs(want));
      }
    }
  }
}

TEST_CASE("all far-field devices give quadratic surrogates") {
  auto cfg = small_config(9);
  cfg.wavelength = 0.01;  // Rayleigh distance well under the 1 m scatterer floor
  const auto in = make_instance(cfg);
  for (std::size_t m = 0; m < 3; ++m) {
    Rng rng(m);
    LocalState st(in.received[m], in.model.links[m], in.scenario.signatures, random_theta(rng, 8),
                  Eigen::VectorXd::Zero(8));
    for (Eigen::Index n = 0; n < 8; ++n) {
      const auto c = quartic_coeffs(st, n, 0.0, SolverParams{});
      CHECK(c.rho3 == 0.0);
      CHECK(c.rho4 == 0.0);
    }
  }
}

TEST_CASE("first-order agreement at the origin and quadratic error decay") {
  auto cfg = small_config(17);
  cfg.noise_power_dbm = -50.0;  // moderate SNR so d * |A| stays below one over the halvings
  const auto in = make_instance(cfg);
  const auto& row = in.model.links[0];
  Rng rng(2);
  const Eigen::VectorXd theta = random_theta(rng, 8);
  LocalState st(in.received[0], row, in.scenario.signatures, theta, Eigen::VectorXd::Zero(8));
  for (Eigen::Index n = 0; n < 8; ++n) {
    const QuarticCoeffs c = quartic_coeffs(st, n, theta(n), SolverParams{});
    DenseCoordinate dc = dense_coordinate(in.received[0].y, theta, row, in.scenario.signatures,
                                          in.received[0].noise_var, n);
    dc.a = theta(n);
    dc.mu = SolverParams{}.mu;
    const double h = 1e-6;
    const double slope = (dc.exact_change(h) - dc.exact_change(-h)) / (2 * h);
    CHECK(std::abs(slope - c.rho1) <= 1e-5 * std::max(1.0, std::abs(c.rho1)));

    double prev = std::abs(c(0.2) - dc.exact_change(0.2));
    for (int k = 1; k <= 4; ++k) {
      const double d = 0.2 / std::pow(2.0, k);
      const double err = std::abs(c(d) - dc.exact_change(d));
      CHECK(std::log2(prev / err) >= 1.9);
      prev = err;
    }
  }
}

TEST_CASE("apply_step keeps the exact inverse") {
  const auto in = make_instance(small_config(23));
  const auto& row = in.model.links[1];
  const auto& sig = in.scenario.signatures;
  const auto& rx = in.received[1];
  LocalState st(rx, row, sig, Eigen::VectorXd::Zero(8), Eigen::VectorXd::Zero(8));
  Rng rng(8);
  for (int i = 0; i < 50; ++i) {
    const Eigen::Index n = static_cast<Eigen::Index>(rng.below(8));
    const double t = st.theta()(n);
    apply_step(st, n, rng.uniform(-t, 1.0 - t));
    const Eigen::MatrixXcd ref = dense_inverse(dense_covariance(st.theta(), row, sig, rx.noise_var));
    REQUIRE(rel_fro(st.cov_inv(), ref) < 1e-8);
    REQUIRE((st.residual() - dense_residual(rx.y, st.theta(), row, sig)).norm() <= 1e-8 * rx.y.norm());
    REQUIRE(st.theta().minCoeff() >= 0.0);
    REQUIRE(st.theta().maxCoeff() <= 1.0);
  }
  CHECK(st.refactorizations() == 0);

  SUBCASE("a tiny step leaves the inverse unchanged to first order") {
    const Eigen::MatrixXcd before = st.cov_inv();
    const double t = st.theta()(2);
    apply_step(st, 2, t > 0.5 ? -1e-15 : 1e-15);
    CHECK(rel_fro(st.cov_inv(), before) < 1e-10);
  }
}

TEST_CASE("rank-one update is Sherman-Morrison") {
  auto cfg = small_config(29);
  cfg.scatterers_per_ap = 1;
  const auto in = make_instance(cfg);
  for (std::size_t m = 0; m < 3; ++m) {
    const auto& row = in.model.links[m];
    for (Eigen::Index n = 0; n < 8; ++n) {
      if (row[static_cast<std::size_t>(n)].field != Field::near) continue;
      Rng rng(n);
      LocalState st(in.received[m], row, in.scenario.signatures, random_theta(rng, 8),
                    Eigen::VectorXd::Zero(8));
      const Eigen::MatrixXcd ci = st.cov_inv();
      const Eigen::VectorXcd x = x_dense(row[static_cast<std::size_t>(n)], in.scenario.signatures.column(n)).col(0);
      const double d = 0.5 * (1.0 - st.theta()(n));
      const Eigen::VectorXcd cx = ci * x;
      const Eigen::MatrixXcd sm = ci - d * cx * cx.adjoint() / (1.0 + d * x.dot(cx).real());
      apply_step(st, n, d);
      CHECK(rel_fro(st.cov_inv(), sm) < 1e-8);
      return;
    }
  }
  FAIL("no near-field link in the instance");
}

TEST_CASE("local_objective") {
  const auto in = make_instance(small_config(41));
  const auto& row = in.model.links[2];
  const auto& rx = in.received[2];
  Rng rng(41);
  for (int t = 0; t < 10; ++t) {
    const Eigen::VectorXd theta = random_theta(rng, 8);
    Eigen::VectorXd lambda(8);
    for (auto& v : lambda) v = rng.uniform(-1, 1);
    const Eigen::VectorXd a = random_theta(rng, 8);
    SolverParams params;
    LocalState st(rx, row, in.scenario.signatures, theta, lambda);
    const auto [mean, cov] = model_mean_cov(theta, row, in.scenario.signatures, rx.noise_var);
    const Eigen::VectorXcd u = rx.y - mean;
    const double f = dense_logdet(cov) + u.dot(dense_inverse(cov) * u).real();
    const double want = f + lambda.dot(theta - a) + 0.5 * params.mu * (theta - a).squaredNorm();
    CHECK(local_objective(st, a, params) == doctest::Approx(want).epsilon(1e-9));
    LocalState plain(rx, row, in.scenario.signatures, theta, Eigen::VectorXd::Zero(8));
    CHECK(local_objective(plain, theta, params) == doctest::Approx(f).epsilon(1e-9));
  }
  SolverParams capped;
  capped.oracle_cap = 4;
  LocalState st(rx, row, in.scenario.signatures, Eigen::VectorXd::Zero(8), Eigen::VectorXd::Zero(8));
  CHECK_THROWS_AS(local_objective(st, Eigen::VectorXd::Zero(8), capped), std::length_error);
}

TEST_CASE("cd_sweep") {
  SUBCASE("zero observation stays at zero") {
    const auto in = make_instance(small_config(6));
    ReceivedSignal rx{Eigen::VectorXcd::Zero(12), in.received[0].noise_var};
    LocalState st(rx, in.model.links[0], in.scenario.signatures, Eigen::VectorXd::Zero(8),
                  Eigen::VectorXd::Zero(8));
    for (int s = 0; s < 3; ++s) cd_sweep(st, Eigen::VectorXd::Zero(8), SolverParams{});
    CHECK(st.theta().norm() == 0.0);
  }

  SUBCASE("exact local objective never rises") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const auto in = make_instance(small_config(seed));
      Rng rng(seed);
      Eigen::VectorXd lambda(8);
      for (auto& v : lambda) v = rng.uniform(-2, 2);
      const Eigen::VectorXd a = random_theta(rng, 8);
      SolverParams params;
      for (std::size_t m = 0; m < 3; ++m) {
        LocalState st(in.received[m], in.model.links[m], in.scenario.signatures,
                      Eigen::VectorXd::Zero(8), lambda);
        double prev = local_objective(st, a, params);
        for (int s = 0; s < 5; ++s) {
          cd_sweep(st, a, params);
          const double now = local_objective(st, a, params);
          REQUIRE(now <= prev + 1e-9 * std::max(1.0, std::abs(prev)));
          prev = now;
          REQUIRE(st.theta().minCoeff() >= 0.0);
          REQUIRE(st.theta().maxCoeff() <= 1.0);
        }
      }
    }
  }

  SUBCASE("single far-field device reaches the scalar estimate") {
    ScenarioConfig cfg = small_config(50);
    cfg.num_devices = 1;
    cfg.active_ratio = 1.0 - 1e-9;
    cfg.num_aps = 1;
    cfg.ap_positions = {{0.0, 0.0}};
    cfg.noise_power_dbm = -60.0;
    Scenario sc = generate_scenario(cfg);
    sc.placement.device_positions[0] = {70.0, 10.0};
    sc.truth.values(0) = 1.0;
    const auto model = build_channel_model(sc);
    REQUIRE(model.links[0][0].field == Field::far);
    Rng ch(1), nz(2);
    const auto rx = synthesize_received(model, sc.signatures, sc.truth, ch, nz);
    SolverParams params;
    params.mu = 1e-12;
    params.omega = 0.0;
    LocalState st(rx[0], model.links[0], sc.signatures, Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1));
    for (int s = 0; s < 50; ++s) cd_sweep(st, Eigen::VectorXd::Zero(1), params);

    double best = INFINITY, best_theta = 0.0;
    for (int i = 0; i <= 100000; ++i) {
      const double th = i / 100000.0;
      const auto [mean, cov] = model_mean_cov(Eigen::VectorXd::Constant(1, th), model.links[0],
                                              sc.signatures, rx[0].noise_var);
      const double f = dense_logdet(cov) + rx[0].y.dot(dense_inverse(cov) * rx[0].y).real();
      if (f < best) {
        best = f;
        best_theta = th;
      }
      if (i % 100 != 0 && std::abs(th - st.theta()(0)) > 0.01) i += 99;  // coarse away from the answer
    }
    CHECK(st.theta()(0) == doctest::Approx(best_theta).epsilon(2e-5));
  }
}

TEST_CASE("centralized_cd") {
  SUBCASE("one AP follows the single-state sweep") {
    auto cfg = small_config(61);
    cfg.num_aps = 1;
    cfg.ap_positions = {{0.0, 0.0}};
    const auto in = make_instance(cfg);
    SolverParams params;
    const auto res = centralized_cd(in.received, in.model, in.scenario.signatures, params, 3, 0.0);
    SolverParams tiny = params;
    tiny.mu = 1e-300;
    LocalState st(in.received[0], in.model.links[0], in.scenario.signatures, Eigen::VectorXd::Zero(8),
                  Eigen::VectorXd::Zero(8));
    for (int s = 0; s < 3; ++s) {
      cd_sweep(st, st.theta(), tiny);
      CHECK((st.theta() - res.history[static_cast<std::size_t>(s + 1)]).lpNorm<Eigen::Infinity>() < 1e-9);
    }
  }

  SUBCASE("noise only gives a near-zero estimate") {
    const auto in = make_instance(small_config(71));
    std::vector<ReceivedSignal> noise;
    Rng nz(3);
    for (const auto& r : in.received) {
      ReceivedSignal w{Eigen::VectorXcd(12), r.noise_var};
      for (auto& v : w.y) v = std::sqrt(r.noise_var) * nz.complex_normal();
      noise.push_back(w);
    }
    const auto res = centralized_cd(noise, in.model, in.scenario.signatures, SolverParams{}, 30);
    CHECK(res.estimate.values.maxCoeff() < 0.05);
  }

  SUBCASE("strong single device is found") {
    int good = 0;
    SolverParams params;
    params.refactor_every = 10;
    for (std::uint64_t t = 0; t < 200; ++t) {
      ScenarioConfig cfg = small_config(1000 + t);
      cfg.num_devices = 3;
      cfg.signature_length = 6;
      cfg.antennas_per_ap = 32;  // enough antennas for the estimate to concentrate
      cfg.active_ratio = 0.34;
      const auto in = make_instance(cfg);
      const auto res = centralized_cd(in.received, in.model, in.scenario.signatures, params, 200);
      bool ok = true;
      for (Eigen::Index n = 0; n < 3; ++n) {
        const double v = res.estimate.values(n);
        ok = ok && (in.scenario.truth.values(n) == 1.0 ? v > 0.9 : v < 0.1);
      }
      good += ok;
    }
    CHECK(good >= 190);
  }
}
