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
#include <sstream>

#include "hybridad/analysis.hpp"
#include "test_support.hpp"

using namespace hybridad;
using namespace hybridad::testing;

namespace {

ChannelStats near_stats(Rng& rng, Eigen::Index k, Eigen::Index rank) {
  ChannelStats st;
  st.field = Field::near;
  st.mean = Eigen::VectorXcd::Zero(k);
  st.cov_factor.resize(k, rank);
  for (auto& v : st.cov_factor.reshaped()) v = rng.complex_normal();
  return st;
}

}  // namespace

TEST_CASE("psi column norm and the factored similarity") {
  const Scenario sc = generate_scenario(small_config(13));
  const auto model = build_channel_model(sc);
  for (const auto& row : model.links) {
    for (std::size_t n = 0; n < 8; ++n) {
      const Eigen::VectorXcd s = sc.signatures.column(static_cast<Eigen::Index>(n));
      const Eigen::VectorXcd psi = psi_column(row[n], s);
      CHECK(psi.size() == 144);
      CHECK(psi.norm() == doctest::Approx(row[n].covariance().norm() * s.squaredNorm()).epsilon(1e-12));
      for (std::size_t n2 = 0; n2 < 8; ++n2) {
        if (n2 == n) continue;
        const Eigen::VectorXcd s2 = sc.signatures.column(static_cast<Eigen::Index>(n2));
        const double dense = vector_cosine(psi, psi_column(row[n2], s2));
        const double sim = cosine_similarity(n, n2, row, sc.signatures);
        const double bound = signature_bound(s, s2);
        CHECK(std::abs(sim - dense) < 1e-10);
        CHECK(sim <= bound + 1e-12);
        const double ratio = covariance_trace_ratio(row[n].cov_factor, row[n2].cov_factor);
        CHECK(std::abs(sim - ratio * bound) < 1e-10);
        const bool equal = std::abs(sim - bound) < 1e-10;
        CHECK(equal == covariances_proportional(row[n].covariance(), row[n2].covariance()));
        if (row[n].field == Field::far && row[n2].field == Field::far) {
          CHECK(std::abs(sim - bound) < 1e-12);
        }
      }
    }
  }
  CHECK_THROWS_AS(cosine_similarity(1, 1, model.links[0], sc.signatures), std::invalid_argument);
  CHECK_THROWS_AS(psi_column(model.links[0][0], sc.signatures.column(0), 100), std::length_error);
}

TEST_CASE("proportional covariances reach the bound") {
  Rng rng(3);
  SignatureMatrix sig{Eigen::MatrixXcd(3, 2)};
  for (auto& v : sig.values.reshaped()) v = rng.complex_normal();
  for (int t = 0; t < 50; ++t) {
    const ChannelStats a = near_stats(rng, 4, 2);
    ChannelStats b = a;
    b.cov_factor *= rng.uniform(0.1, 10.0);
    const std::vector<ChannelStats> row{a, b};
    const double bound = signature_bound(sig.column(0), sig.column(1));
    CHECK(std::abs(cosine_similarity(0, 1, row, sig) - bound) < 1e-10);
    CHECK(covariances_proportional(a.covariance(), b.covariance()));
    // A different factor is generically strictly below the bound.
    const std::vector<ChannelStats> other{a, near_stats(rng, 4, 2)};
    CHECK(cosine_similarity(0, 1, other, sig) < bound - 1e-10);
  }
  ChannelStats zero = near_stats(rng, 4, 2);
  zero.cov_factor.setZero();
  const std::vector<ChannelStats> bad{zero, near_stats(rng, 4, 2)};
  CHECK_THROWS_AS(cosine_similarity(0, 1, bad, sig), std::invalid_argument);
}

TEST_CASE("similarity_bound_sweep") {
  SUBCASE("hybrid scenario") {
    const Scenario sc = generate_scenario(small_config(19));
    const auto model = build_channel_model(sc);
    Rng rng(19);
    const auto rep = similarity_bound_sweep(model, sc.signatures, 1000, rng);
    CHECK(rep.pairs.size() == 1000);
    CHECK(rep.violations == 0);
    CHECK(rep.max_excess <= 1e-12);
    std::size_t total = 0;
    for (const auto& s : rep.by_type) total += s.count;
    CHECK(total == 1000);
    const auto& nn = rep.summary(PairType::near_near);
    const auto& ff = rep.summary(PairType::far_far);
    REQUIRE(nn.count > 0);
    REQUIRE(ff.count > 0);
    CHECK(ff.mean_ratio == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(nn.mean_ratio <= ff.mean_ratio);
    std::ostringstream csv;
    rep.write_csv(csv);
    CHECK(csv.str().rfind("ap,device,other,pair_type,similarity,bound", 0) == 0);
    const auto j = rep.to_json();
    CHECK(j["violations"] == 0);
  }

  SUBCASE("all far-field scenario") {
    auto cfg = small_config(20);
    cfg.wavelength = 0.01;
    const Scenario sc = generate_scenario(cfg);
    const auto model = build_channel_model(sc);
    Rng rng(1);
    const auto rep = similarity_bound_sweep(model, sc.signatures, 200, rng);
    CHECK(rep.summary(PairType::far_far).count == 200);
    for (const auto& p : rep.pairs) CHECK(std::abs(p.similarity - p.bound) < 1e-12);
  }
}

TEST_CASE("nullspace_probe") {
  const Scenario sc = generate_scenario(small_config(27));
  const auto model = build_channel_model(sc);

  SUBCASE("distinct devices at small scale are identifiable") {
    const auto rep = nullspace_probe(model, sc.signatures, sc.truth);
    CHECK(rep.null_dim == 0);
    CHECK(rep.singular_values.size() == 8);
    CHECK(rep.sigma_min > 1e-10 * rep.sigma_max);
    CHECK_FALSE(rep.sign_feasible);
    CHECK(rep.to_json()["null_dim"] == 0);
  }

  SUBCASE("one device") {
    ChannelModel one = model;
    for (auto& row : one.links) row.resize(1);
    SignatureMatrix s1{sc.signatures.values.leftCols(1)};
    ActivityVector t1{Eigen::VectorXd::Ones(1)};
    CHECK(nullspace_probe(one, s1, t1).null_dim == 0);
  }

  SUBCASE("a duplicated device is a collision") {
    ChannelModel dup = model;
    for (auto& row : dup.links) row[1] = row[0];
    SignatureMatrix sig = sc.signatures;
    sig.values.col(1) = sig.values.col(0);
    ActivityVector truth{Eigen::VectorXd::Zero(8)};
    truth.values(1) = 1.0;
    const auto rep = nullspace_probe(dup, sig, truth);
    REQUIRE(rep.null_dim >= 1);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(8);
    c(0) = 1.0;
    c(1) = -1.0;
    c.normalize();
    // c lies in the span of the reported basis.
    const Eigen::VectorXd proj = rep.null_basis * (rep.null_basis.transpose() * c);
    CHECK((proj - c).norm() < 1e-8);
    CHECK(rep.sign_feasible);
    REQUIRE(rep.witness.has_value());
    CHECK((*rep.witness)(0) > 0.0);
    CHECK((*rep.witness)(1) < 0.0);

    ActivityVector silent{Eigen::VectorXd::Zero(8)};
    CHECK_FALSE(nullspace_probe(dup, sig, silent).sign_feasible);
  }

  SUBCASE("scale cap") {
    CHECK_THROWS_AS(nullspace_probe(model, sc.signatures, sc.truth, 1e-10, 1000), std::length_error);
  }
}

TEST_CASE("find_cone_ray") {
  Eigen::MatrixXd w = Eigen::MatrixXd::Identity(3, 3);
  auto ray = find_cone_ray(w);
  REQUIRE(ray.has_value());
  CHECK(((w * *ray).array() >= -1e-12).all());
  CHECK(ray->norm() > 0.0);
  Eigen::MatrixXd opp(2, 1);
  opp << 1.0, -1.0;
  CHECK_FALSE(find_cone_ray(opp).has_value());
  Rng rng(4);
  for (int t = 0; t < 50; ++t) {
    Eigen::MatrixXd r(6, 3);
    for (auto& v : r.reshaped()) v = rng.normal();
    const auto c = find_cone_ray(r);
    if (c) CHECK(((r * *c).array() >= -1e-9).all());
  }
}
