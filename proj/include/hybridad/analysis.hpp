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

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "hybridad/channel.hpp"
#include "hybridad/rng.hpp"

namespace hybridad {

/// vec(X X^H) = vec(Xi (x) s s^H) for one device, dense. Throws
/// std::length_error when (LK)^2 exceeds `cap`.
Eigen::VectorXcd psi_column(const ChannelStats& stats, const Eigen::VectorXcd& signature,
                            Eigen::Index cap = 1 << 16);

/// Re(a^H b) / (|a| |b|).
double vector_cosine(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b);

/// (|s^H s'| / (|s| |s'|))^2, the far-field value of the similarity.
double signature_bound(const Eigen::VectorXcd& s, const Eigen::VectorXcd& s_other);

/// tr(Xi Xi') / (|Xi|_F |Xi'|_F) from the covariance factors.
double covariance_trace_ratio(const Eigen::MatrixXcd& b, const Eigen::MatrixXcd& b_other);

/// Cosine similarity of the Psi columns of devices n and n' at one AP,
/// evaluated in factored form. Throws for n == n' or a zero factor.
double cosine_similarity(std::size_t n, std::size_t n_other, const std::vector<ChannelStats>& row,
                         const SignatureMatrix& signatures);

/// Xi / |Xi|_F and Xi' / |Xi'|_F agree within `tol` (Frobenius).
bool covariances_proportional(const Eigen::MatrixXcd& xi, const Eigen::MatrixXcd& xi_other,
                              double tol = 1e-8);

enum class PairType { near_near, near_far, far_far };
const char* to_string(PairType t);

struct PairRecord {
  std::size_t ap = 0;
  std::size_t device = 0;
  std::size_t other = 0;
  PairType type = PairType::far_far;
  double similarity = 0.0;
  double bound = 0.0;
};

struct PairTypeSummary {
  std::size_t count = 0;
  double mean_similarity = 0.0;
  double max_similarity = 0.0;
  double mean_bound = 0.0;
  /// Mean of similarity / bound over pairs with a nonzero bound.
  double mean_ratio = 0.0;
};

struct SimilarityBoundReport {
  std::vector<PairRecord> pairs;
  std::array<PairTypeSummary, 3> by_type{};  // indexed by PairType
  std::size_t violations = 0;                // similarity > bound + slack
  double max_excess = 0.0;                   // max(similarity - bound)
  double slack = 1e-12;

  const PairTypeSummary& summary(PairType t) const { return by_type[static_cast<std::size_t>(t)]; }
  void write_csv(std::ostream& out) const;
  nlohmann::json to_json() const;
};

/// Samples `num_pairs` (AP, n, n') triples uniformly and checks the
/// far-field bound on each.
SimilarityBoundReport similarity_bound_sweep(const ChannelModel& model, const SignatureMatrix& signatures,
                                      std::size_t num_pairs, Rng& rng, double slack = 1e-12);

struct NullspaceReport {
  std::size_t null_dim = 0;
  Eigen::VectorXd singular_values;  // descending
  double sigma_max = 0.0;
  double sigma_min = 0.0;
  Eigen::MatrixXd null_basis;  // N x null_dim
  /// A nonzero null vector with the sign pattern of a feasible deviation
  /// from `truth` exists.
  bool sign_feasible = false;
  std::optional<Eigen::VectorXd> witness;

  nlohmann::json to_json() const;
};

/// Null space of the stacked real [Re; Im] Psi_1..Psi_M (N columns), with
/// singular values below rel_tol * sigma_max treated as zero. Throws
/// std::length_error when 2 M (LK)^2 N exceeds `cap` entries.
NullspaceReport nullspace_probe(const ChannelModel& model, const SignatureMatrix& signatures,
                                const ActivityVector& truth, double rel_tol = 1e-10,
                                Eigen::Index cap = 1 << 24);

/// Does some c != 0 satisfy W c >= 0 entrywise? Enumerates the extreme rays
/// of the (pointed) cone; W must have full column rank.
std::optional<Eigen::VectorXd> find_cone_ray(const Eigen::MatrixXd& w, double tol = 1e-9,
                                             std::size_t max_subsets = 200000);

}  // namespace hybridad
