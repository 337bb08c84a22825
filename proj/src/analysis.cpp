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


#include "hybridad/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>
#include <string>

namespace hybridad {

Eigen::VectorXcd psi_column(const ChannelStats& stats, const Eigen::VectorXcd& signature,
                            Eigen::Index cap) {
  const Eigen::Index dim = stats.cov_factor.rows() * signature.size();
  if (dim * dim > cap) throw std::length_error("psi_column: (LK)^2 exceeds the cap");
  const Eigen::MatrixXcd full =
      kron(stats.covariance(), Eigen::MatrixXcd(signature * signature.adjoint()));
  return full.reshaped();
}

double vector_cosine(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
  return a.dot(b).real() / (a.norm() * b.norm());
}

double signature_bound(const Eigen::VectorXcd& s, const Eigen::VectorXcd& s_other) {
  const double c = std::abs(s.dot(s_other)) / (s.norm() * s_other.norm());
  return c * c;
}

double covariance_trace_ratio(const Eigen::MatrixXcd& b, const Eigen::MatrixXcd& b_other) {
  // tr(B B^H B' B'^H) = |B^H B'|_F^2 and |B B^H|_F = |B^H B|_F.
  const double cross = (b.adjoint() * b_other).squaredNorm();
  const double self = (b.adjoint() * b).norm();
  const double self_other = (b_other.adjoint() * b_other).norm();
  if (!(self > 0.0) || !(self_other > 0.0)) {
    throw std::invalid_argument("covariance_trace_ratio: zero covariance factor");
  }
  return cross / (self * self_other);
}

double cosine_similarity(std::size_t n, std::size_t n_other, const std::vector<ChannelStats>& row,
                         const SignatureMatrix& signatures) {
  if (n == n_other) throw std::invalid_argument("cosine_similarity: devices must differ");
  const auto i = static_cast<Eigen::Index>(n);
  const auto j = static_cast<Eigen::Index>(n_other);
  return covariance_trace_ratio(row.at(n).cov_factor, row.at(n_other).cov_factor) *
         signature_bound(signatures.column(i), signatures.column(j));
}

bool covariances_proportional(const Eigen::MatrixXcd& xi, const Eigen::MatrixXcd& xi_other,
                              double tol) {
  return (xi / xi.norm() - xi_other / xi_other.norm()).norm() < tol;
}

const char* to_string(PairType t) {
  switch (t) {
    case PairType::near_near:
      return "near-near";
    case PairType::near_far:
      return "near-far";
    case PairType::far_far:
      return "far-far";
  }
  return "?";
}

void SimilarityBoundReport::write_csv(std::ostream& out) const {
  out << "ap,device,other,pair_type,similarity,bound\n" << std::setprecision(17);
  for (const auto& p : pairs) {
    out << p.ap << ',' << p.device << ',' << p.other << ',' << to_string(p.type) << ','
        << p.similarity << ',' << p.bound << '\n';
  }
}

nlohmann::json SimilarityBoundReport::to_json() const {
  nlohmann::json j;
  j["pairs"] = pairs.size();
  j["violations"] = violations;
  j["max_excess"] = max_excess;
  j["slack"] = slack;
  for (std::size_t t = 0; t < by_type.size(); ++t) {
    const auto& s = by_type[t];
    j["by_type"][to_string(static_cast<PairType>(t))] = {
        {"count", s.count},
        {"mean_similarity", s.mean_similarity},
        {"max_similarity", s.max_similarity},
        {"mean_bound", s.mean_bound},
        {"mean_ratio", s.mean_ratio},
    };
  }
  return j;
}

SimilarityBoundReport similarity_bound_sweep(const ChannelModel& model, const SignatureMatrix& signatures,
                                      std::size_t num_pairs, Rng& rng, double slack) {
  const auto N = static_cast<std::size_t>(signatures.num_devices());
  if (N < 2) throw std::invalid_argument("similarity_bound_sweep: need at least two devices");
  SimilarityBoundReport rep;
  rep.slack = slack;
  std::array<std::size_t, 3> ratio_count{};
  for (std::size_t i = 0; i < num_pairs; ++i) {
    PairRecord p;
    p.ap = rng.below(model.num_aps());
    p.device = rng.below(N);
    p.other = rng.below(N - 1);
    if (p.other >= p.device) ++p.other;
    const auto& row = model.links[p.ap];
    const bool near_a = row[p.device].field == Field::near;
    const bool near_b = row[p.other].field == Field::near;
    p.type = near_a && near_b ? PairType::near_near
                              : (near_a || near_b ? PairType::near_far : PairType::far_far);
    p.similarity = cosine_similarity(p.device, p.other, row, signatures);
    p.bound = signature_bound(signatures.column(static_cast<Eigen::Index>(p.device)),
                              signatures.column(static_cast<Eigen::Index>(p.other)));
    const double excess = p.similarity - p.bound;
    rep.max_excess = i == 0 ? excess : std::max(rep.max_excess, excess);
    if (excess > slack) ++rep.violations;

    auto& s = rep.by_type[static_cast<std::size_t>(p.type)];
    ++s.count;
    s.mean_similarity += p.similarity;
    s.max_similarity = std::max(s.max_similarity, p.similarity);
    s.mean_bound += p.bound;
    if (p.bound > 0.0) {
      s.mean_ratio += p.similarity / p.bound;
      ++ratio_count[static_cast<std::size_t>(p.type)];
    }
    rep.pairs.push_back(p);
  }
  for (std::size_t t = 0; t < 3; ++t) {
    auto& s = rep.by_type[t];
    if (s.count) {
      s.mean_similarity /= static_cast<double>(s.count);
      s.mean_bound /= static_cast<double>(s.count);
    }
    if (ratio_count[t]) s.mean_ratio /= static_cast<double>(ratio_count[t]);
  }
  return rep;
}

nlohmann::json NullspaceReport::to_json() const {
  nlohmann::json j;
  j["null_dim"] = null_dim;
  j["sigma_max"] = sigma_max;
  j["sigma_min"] = sigma_min;
  j["sign_feasible"] = sign_feasible;
  auto sv = nlohmann::json::array();
  for (Eigen::Index i = 0; i < singular_values.size(); ++i) sv.push_back(singular_values(i));
  j["singular_values"] = sv;
  if (witness) {
    auto w = nlohmann::json::array();
    for (Eigen::Index i = 0; i < witness->size(); ++i) w.push_back((*witness)(i));
    j["witness"] = w;
  }
  return j;
}

namespace {

// Visit every k-subset of {0..n-1} in lexicographic order until `f` returns true.
template <typename F>
bool for_each_subset(std::size_t n, std::size_t k, std::size_t limit, F&& f) {
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  std::size_t visited = 0;
  while (true) {
    if (++visited > limit) throw std::length_error("find_cone_ray: too many subsets");
    if (f(idx)) return true;
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
    if (i == 0) return false;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace

std::optional<Eigen::VectorXd> find_cone_ray(const Eigen::MatrixXd& w, double tol,
                                             std::size_t max_subsets) {
  const Eigen::Index k = w.cols();
  const Eigen::Index rows = w.rows();
  if (k == 0) return std::nullopt;
  auto feasible = [&](const Eigen::VectorXd& c) -> std::optional<Eigen::VectorXd> {
    const double scale = c.norm() * std::max(1.0, w.norm());
    for (const double sign : {1.0, -1.0}) {
      const Eigen::VectorXd v = sign * w * c;
      if ((v.array() >= -tol * scale).all()) return Eigen::VectorXd(sign * c);
    }
    return std::nullopt;
  };
  if (k == 1) return feasible(Eigen::VectorXd::Ones(1));

  std::optional<Eigen::VectorXd> found;
  // Extreme rays of {c : W c >= 0} have k-1 linearly independent active rows.
  for_each_subset(static_cast<std::size_t>(rows), static_cast<std::size_t>(k - 1), max_subsets,
                  [&](const std::vector<std::size_t>& idx) {
                    Eigen::MatrixXd sub(static_cast<Eigen::Index>(idx.size()), k);
                    for (std::size_t i = 0; i < idx.size(); ++i) {
                      sub.row(static_cast<Eigen::Index>(i)) = w.row(static_cast<Eigen::Index>(idx[i]));
                    }
                    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(sub, Eigen::ComputeFullV);
                    const auto& sv = svd.singularValues();
                    if (sv.size() < k - 1 || sv(k - 2) <= 1e-12 * std::max(1.0, sv(0))) return false;
                    found = feasible(svd.matrixV().col(k - 1));
                    return found.has_value();
                  });
  return found;
}

NullspaceReport nullspace_probe(const ChannelModel& model, const SignatureMatrix& signatures,
                                const ActivityVector& truth, double rel_tol, Eigen::Index cap) {
  const Eigen::Index N = signatures.num_devices();
  if (truth.values.size() != N) throw std::invalid_argument("nullspace_probe: truth length mismatch");
  const Eigen::Index L = signatures.length();
  Eigen::Index rows = 0;
  for (const auto& row : model.links) {
    const Eigen::Index dim = row.front().cov_factor.rows() * L;
    rows += 2 * dim * dim;
  }
  if (rows * N > cap) throw std::length_error("nullspace_probe: stacked Psi exceeds the cap");

  Eigen::MatrixXd stacked(rows, N);
  Eigen::Index offset = 0;
  for (const auto& row : model.links) {
    Eigen::Index len = 0;
    for (Eigen::Index n = 0; n < N; ++n) {
      const Eigen::VectorXcd psi = psi_column(row[static_cast<std::size_t>(n)], signatures.column(n), cap);
      len = psi.size();
      stacked.col(n).segment(offset, len) = psi.real();
      stacked.col(n).segment(offset + len, len) = psi.imag();
    }
    offset += 2 * len;
  }

  NullspaceReport rep;
  const Eigen::BDCSVD<Eigen::MatrixXd> svd(stacked, Eigen::ComputeFullV);
  rep.singular_values = svd.singularValues();
  rep.sigma_max = rep.singular_values.size() ? rep.singular_values(0) : 0.0;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < rep.singular_values.size(); ++i) {
    if (rep.singular_values(i) > rel_tol * rep.sigma_max) ++rank;
  }
  rep.sigma_min = rep.singular_values.size() == N ? rep.singular_values(N - 1) : 0.0;
  rep.null_dim = static_cast<std::size_t>(N - rank);
  rep.null_basis = svd.matrixV().rightCols(N - rank);

  if (rep.null_dim > 0) {
    // Feasible deviations: xi_n >= 0 where a_n = 0, xi_n <= 0 where a_n = 1.
    Eigen::VectorXd sign(N);
    for (Eigen::Index n = 0; n < N; ++n) sign(n) = truth.values(n) >= 0.5 ? -1.0 : 1.0;
    const Eigen::MatrixXd w = sign.asDiagonal() * rep.null_basis;
    if (auto c = find_cone_ray(w)) {
      rep.sign_feasible = true;
      rep.witness = rep.null_basis * *c;
    }
  }
  return rep;
}

}  // namespace hybridad
