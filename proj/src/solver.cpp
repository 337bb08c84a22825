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


#include "hybridad/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "hybridad/rng.hpp"

namespace hybridad {

namespace {

constexpr double kDeadStep = 1e-12;
constexpr double kMaxWoodburyCondition = 1e12;

void check_finite(const Eigen::VectorXd& v, const char* what) {
  if (!v.allFinite()) throw std::invalid_argument(std::string(what) + " has nonfinite entries");
}

std::vector<Eigen::Index> sweep_order(Eigen::Index n, const SolverParams& params,
                                      std::size_t sweep) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  if (params.randomized_order) {
    Rng rng = Rng::substream(params.order_seed, Stream::test, sweep);
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng.below(i)]);
    }
  }
  return order;
}

}  // namespace

void SolverParams::validate() const {
  if (!(omega >= 0.0) || !std::isfinite(omega)) throw std::invalid_argument("omega must be >= 0");
  if (!(mu > 0.0) || !std::isfinite(mu)) throw std::invalid_argument("mu must be > 0");
  if (sweeps_per_call == 0) throw std::invalid_argument("sweeps_per_call must be >= 1");
}

SweepStats& SweepStats::operator+=(const SweepStats& o) {
  steps += o.steps;
  omega_doublings += o.omega_doublings;
  rejected += o.rejected;
  max_abs_step = std::max(max_abs_step, o.max_abs_step);
  return *this;
}

LocalState::LocalState(const ReceivedSignal& received, const std::vector<ChannelStats>& row,
                       const SignatureMatrix& signatures, Eigen::VectorXd theta0,
                       Eigen::VectorXd lambda0)
    : y_(received.y),
      noise_var_(received.noise_var),
      signature_length_(signatures.length()),
      x_(make_x_factors(row, signatures)),
      theta_(std::move(theta0)),
      lambda_(std::move(lambda0)) {
  const auto N = static_cast<Eigen::Index>(row.size());
  if (theta_.size() != N || lambda_.size() != N) {
    throw std::invalid_argument("theta0/lambda0 length must equal the device count");
  }
  if (signatures.num_devices() != N) throw std::invalid_argument("signature count mismatch");
  check_finite(theta_, "theta0");
  check_finite(lambda_, "lambda0");
  if ((theta_.array() < 0.0).any() || (theta_.array() > 1.0).any()) {
    throw std::invalid_argument("theta0 must lie in [0,1]");
  }
  if (!y_.allFinite()) throw std::invalid_argument("received signal has nonfinite entries");
  if (!(noise_var_ > 0.0)) throw std::invalid_argument("noise variance must be positive");
  const Eigen::Index K = row.empty() ? 0 : row.front().cov_factor.rows();
  if (y_.size() != K * signature_length_) {
    throw std::invalid_argument("received signal length must be L*K");
  }
  if ((theta_.array() == 0.0).all()) {
    cov_inv_ = Eigen::MatrixXcd::Identity(dim(), dim()) / noise_var_;
    residual_ = y_;
  } else {
    refactorize();
    refactorizations_ = 0;
  }
}

void LocalState::set_lambda(Eigen::VectorXd lambda) {
  if (lambda.size() != theta_.size()) throw std::invalid_argument("lambda length mismatch");
  check_finite(lambda, "lambda");
  lambda_ = std::move(lambda);
}

Eigen::MatrixXcd LocalState::covariance() const {
  const Eigen::Index L = signature_length_;
  Eigen::MatrixXcd c = noise_var_ * Eigen::MatrixXcd::Identity(dim(), dim());
  for (const auto& x : x_) {
    const double t = theta_(x.device);
    if (t == 0.0) continue;
    const Eigen::MatrixXcd sst = x.signature * x.signature.adjoint();
    const Eigen::Index K = x.cov_part.rows();
    if (x.field == Field::far) {
      for (Eigen::Index k = 0; k < K; ++k) c.block(k * L, k * L, L, L) += (t * x.gain) * sst;
    } else {
      const Eigen::MatrixXcd r = x.cov_part * x.cov_part.adjoint();
      for (Eigen::Index i = 0; i < K; ++i) {
        for (Eigen::Index j = 0; j < K; ++j) c.block(i * L, j * L, L, L) += (t * r(i, j)) * sst;
      }
    }
  }
  return c;
}

void LocalState::refactorize() {
  const Eigen::LLT<Eigen::MatrixXcd> llt(covariance());
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("covariance factorization failed");
  }
  cov_inv_ = llt.solve(Eigen::MatrixXcd::Identity(dim(), dim()));
  cov_inv_ = (0.5 * (cov_inv_ + cov_inv_.adjoint())).eval();
  residual_ = y_;
  for (const auto& x : x_) {
    if (x.has_mean() && theta_(x.device) != 0.0) residual_ -= theta_(x.device) * x.mean_part;
  }
  ++refactorizations_;
}

CoordinateTerms LocalState::coordinate_terms(Eigen::Index n) const {
  const XFactor& x = x_.at(static_cast<std::size_t>(n));
  const Eigen::Index L = signature_length_;
  const Eigen::Index K = x.cov_part.rows();
  const Eigen::VectorXcd& s = x.signature;

  // C^-1 (I_K (x) s) and its K x K compression (I_K (x) s)^H C^-1 (I_K (x) s).
  Eigen::MatrixXcd cinv_s(dim(), K);
  for (Eigen::Index k = 0; k < K; ++k) cinv_s.col(k).noalias() = cov_inv_.middleCols(k * L, L) * s;
  Eigen::MatrixXcd compressed(K, K);
  for (Eigen::Index k = 0; k < K; ++k) {
    compressed.row(k).noalias() = s.adjoint() * cinv_s.middleRows(k * L, L);
  }
  const Eigen::VectorXcd s_cinv_u = cinv_s.adjoint() * residual_;

  CoordinateTerms t;
  t.device = n;
  if (x.field == Field::far) {
    const double sg = std::sqrt(x.gain);
    t.cinv_x = sg * cinv_s;
    t.gram = x.gain * compressed;
    t.x_cinv_u = sg * s_cinv_u;
  } else {
    const Eigen::MatrixXcd& b = x.cov_part;
    t.cinv_x.noalias() = cinv_s * b;
    t.gram.noalias() = b.adjoint() * compressed * b;
    t.x_cinv_u.noalias() = b.adjoint() * s_cinv_u;
    const Eigen::VectorXcd comp_mean = compressed * x.channel_mean;
    t.x_cinv_mean.noalias() = b.adjoint() * comp_mean;
    t.u_cinv_mean = s_cinv_u.dot(x.channel_mean);
    t.mean_cinv_mean = x.channel_mean.dot(comp_mean).real();
  }
  t.trace_gram = t.gram.trace().real();
  return t;
}

void LocalState::apply_step(const CoordinateTerms& terms, double d) {
  const Eigen::Index n = terms.device;
  const double target = std::clamp(theta_(n) + d, 0.0, 1.0);
  d = target - theta_(n);
  if (d == 0.0) return;

  const Eigen::Index J = terms.gram.rows();
  Eigen::MatrixXcd core = Eigen::MatrixXcd::Identity(J, J) + d * terms.gram;
  core = (0.5 * (core + core.adjoint())).eval();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(core);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  theta_(n) = target;
  if (eig.info() != Eigen::Success || !(lo > 0.0) || hi / lo > kMaxWoodburyCondition) {
    refactorize();
    return;
  }
  // (C + d X X^H)^-1 = C^-1 - d (C^-1 X) core^-1 (C^-1 X)^H, core^-1 = V D^-1 V^H.
  const Eigen::MatrixXcd w =
      terms.cinv_x * (eig.eigenvectors() * eig.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal());
  cov_inv_.selfadjointView<Eigen::Lower>().rankUpdate(w, -d);
  cov_inv_.triangularView<Eigen::StrictlyUpper>() = cov_inv_.adjoint();
  const XFactor& x = x_[static_cast<std::size_t>(n)];
  if (x.has_mean()) residual_ -= d * x.mean_part;
}

void LocalState::apply_step(Eigen::Index n, double d) { apply_step(coordinate_terms(n), d); }

LocalState init_local_state(const ReceivedSignal& received, const std::vector<ChannelStats>& row,
                            const SignatureMatrix& signatures, Eigen::VectorXd theta0,
                            Eigen::VectorXd lambda0) {
  return LocalState(received, row, signatures, std::move(theta0), std::move(lambda0));
}

QuarticCoeffs quartic_from_terms(const CoordinateTerms& t, double lambda_n, double theta_n,
                                 double a_n, double mu) {
  const Eigen::VectorXcd& p = t.x_cinv_u;
  const double p_sq = p.squaredNorm();
  const double p_gram_p = p.dot(t.gram * p).real();

  QuarticCoeffs c;
  c.rho1 = t.trace_gram - 2.0 * t.u_cinv_mean.real() - p_sq + lambda_n + mu * (theta_n - a_n);
  c.rho2 = t.mean_cinv_mean + p_gram_p + 0.5 * mu;
  if (t.x_cinv_mean.size() > 0) {
    const Eigen::VectorXcd& q = t.x_cinv_mean;
    const Eigen::VectorXcd gram_q = t.gram * q;
    c.rho2 += 2.0 * p.dot(q).real();
    c.rho3 = -2.0 * p.dot(gram_q).real() - q.squaredNorm();
    c.rho4 = q.dot(gram_q).real();
  }
  return c;
}

QuarticCoeffs quartic_coeffs(const LocalState& state, Eigen::Index n, double a_n,
                             const SolverParams& params) {
  return quartic_from_terms(state.coordinate_terms(n), state.lambda_dual()(n), state.theta()(n),
                            a_n, params.mu);
}

double exact_step_change(const CoordinateTerms& t, double d, double lambda_n, double theta_n,
                         double a_n, double mu) {
  const Eigen::Index J = t.gram.rows();
  const Eigen::MatrixXcd core = Eigen::MatrixXcd::Identity(J, J) + d * t.gram;
  const Eigen::LLT<Eigen::MatrixXcd> llt(core);
  if (llt.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
  double logdet = 0.0;
  const auto diag = llt.matrixLLT().diagonal();
  for (Eigen::Index j = 0; j < J; ++j) {
    const double v = diag(j).real();
    if (!(v > 0.0)) return std::numeric_limits<double>::infinity();
    logdet += 2.0 * std::log(v);
  }
  Eigen::VectorXcd r = t.x_cinv_u;
  double quad = 0.0;
  if (t.x_cinv_mean.size() > 0) {
    r -= d * t.x_cinv_mean;
    quad += -2.0 * d * t.u_cinv_mean.real() + d * d * t.mean_cinv_mean;
  }
  quad -= d * r.dot(llt.solve(r)).real();
  const double penalty = lambda_n * d + mu * (theta_n - a_n) * d + 0.5 * mu * d * d;
  return logdet + quad + penalty;
}

void apply_step(LocalState& state, Eigen::Index n, double d) { state.apply_step(n, d); }

SweepStats cd_sweep(LocalState& state, const Eigen::VectorXd& a, const SolverParams& params) {
  if (a.size() != state.num_devices()) throw std::invalid_argument("cd_sweep: a length mismatch");
  SweepStats stats;
  for (const Eigen::Index n : sweep_order(state.num_devices(), params, state.sweeps_done())) {
    const CoordinateTerms terms = state.coordinate_terms(n);
    const double theta_n = state.theta()(n);
    const double lambda_n = state.lambda_dual()(n);
    const QuarticCoeffs c = quartic_from_terms(terms, lambda_n, theta_n, a(n), params.mu);
    double omega = params.omega;
    double step = 0.0;
    for (std::size_t attempt = 0;; ++attempt) {
      const double d = minimize_quartic(c, omega, -theta_n, 1.0 - theta_n);
      if (std::abs(d) <= kDeadStep) break;
      if (!params.safeguard || exact_step_change(terms, d, lambda_n, theta_n, a(n), params.mu) <= 0.0) {
        step = d;
        break;
      }
      if (attempt == params.max_omega_doublings) {
        ++stats.rejected;
        break;
      }
      omega = omega > 0.0 ? 2.0 * omega : 1.0;
      ++stats.omega_doublings;
    }
    if (step != 0.0) {
      state.apply_step(terms, step);
      ++stats.steps;
      stats.max_abs_step = std::max(stats.max_abs_step, std::abs(step));
    }
  }
  state.note_sweep();
  if (params.refactor_every > 0 && state.sweeps_done() % params.refactor_every == 0) {
    state.refactorize();
  }
  return stats;
}

double local_objective(const LocalState& state, const Eigen::VectorXd& a, const SolverParams& params) {
  if (state.dim() > params.oracle_cap) {
    throw std::length_error("local_objective: LK = " + std::to_string(state.dim()) +
                            " exceeds the oracle cap");
  }
  const Eigen::LLT<Eigen::MatrixXcd> llt(state.covariance());
  if (llt.info() != Eigen::Success) throw std::runtime_error("covariance factorization failed");
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < state.dim(); ++i) logdet += 2.0 * std::log(llt.matrixLLT()(i, i).real());
  const Eigen::VectorXcd& u = state.residual();
  const double quad = u.dot(llt.solve(u)).real();
  const Eigen::VectorXd gap = state.theta() - a;
  return logdet + quad + state.lambda_dual().dot(gap) + 0.5 * params.mu * gap.squaredNorm();
}

CentralizedResult centralized_cd(const std::vector<ReceivedSignal>& received,
                                 const ChannelModel& model, const SignatureMatrix& signatures,
                                 const SolverParams& params, std::size_t max_sweeps, double tol) {
  if (received.size() != model.num_aps()) {
    throw std::invalid_argument("centralized_cd: one received signal per AP required");
  }
  const Eigen::Index N = signatures.num_devices();
  std::vector<LocalState> states;
  states.reserve(model.num_aps());
  for (std::size_t m = 0; m < model.num_aps(); ++m) {
    states.emplace_back(received[m], model.links[m], signatures, Eigen::VectorXd::Zero(N),
                        Eigen::VectorXd::Zero(N));
  }

  CentralizedResult out;
  Eigen::VectorXd a = Eigen::VectorXd::Zero(N);
  out.history.push_back(a);
  std::vector<CoordinateTerms> terms(states.size());
  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    const Eigen::VectorXd before = a;
    for (const Eigen::Index n : sweep_order(N, params, sweep)) {
      QuarticCoeffs c;
      for (std::size_t m = 0; m < states.size(); ++m) {
        terms[m] = states[m].coordinate_terms(n);
        c += quartic_from_terms(terms[m], 0.0, a(n), a(n), 0.0);
      }
      double omega = params.omega;
      double step = 0.0;
      for (std::size_t attempt = 0;; ++attempt) {
        const double d = minimize_quartic(c, omega, -a(n), 1.0 - a(n));
        if (std::abs(d) <= kDeadStep) break;
        if (params.safeguard) {
          double change = 0.0;
          for (const auto& t : terms) change += exact_step_change(t, d, 0.0, a(n), a(n), 0.0);
          if (!(change <= 0.0)) {
            if (attempt == params.max_omega_doublings) break;
            omega = omega > 0.0 ? 2.0 * omega : 1.0;
            continue;
          }
        }
        step = d;
        break;
      }
      if (step != 0.0) {
        for (std::size_t m = 0; m < states.size(); ++m) states[m].apply_step(terms[m], step);
        a(n) = states.front().theta()(n);
      }
    }
    for (auto& s : states) {
      s.note_sweep();
      if (params.refactor_every > 0 && s.sweeps_done() % params.refactor_every == 0) s.refactorize();
    }
    out.history.push_back(a);
    out.sweeps = sweep + 1;
    if ((a - before).lpNorm<Eigen::Infinity>() < tol) {
      out.converged = true;
      break;
    }
  }
  out.estimate.values = a;
  return out;
}

}  // namespace hybridad
