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

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "hybridad/channel.hpp"
#include "hybridad/quartic.hpp"

namespace hybridad {

struct SolverParams {
  double omega = 1.0;  // proximal weight on d^2
  double mu = 50.0;    // consensus penalty
  std::size_t sweeps_per_call = 1;
  /// Rebuild cov_inv from scratch every this many sweeps; 0 disables.
  std::size_t refactor_every = 1;
  Eigen::Index oracle_cap = kDefaultOracleCap;
  /// When a step would raise the exact objective, omega is doubled up to
  /// this many times before the coordinate is left unchanged.
  std::size_t max_omega_doublings = 10;
  bool safeguard = true;
  bool randomized_order = false;
  std::uint64_t order_seed = 0;

  void validate() const;
};

/// Everything a coordinate update needs about device n, built from the
/// maintained inverse without forming any LK x LK temporary.
struct CoordinateTerms {
  Eigen::Index device = 0;
  Eigen::MatrixXcd cinv_x;       // C^-1 X, LK x J
  Eigen::MatrixXcd gram;         // X^H C^-1 X, J x J
  Eigen::VectorXcd x_cinv_u;     // X^H C^-1 u
  Eigen::VectorXcd x_cinv_mean;  // X^H C^-1 (hbar (x) s); empty for far-field
  double trace_gram = 0.0;
  std::complex<double> u_cinv_mean{0.0, 0.0};
  double mean_cinv_mean = 0.0;
};

/// Per-AP solver state for the local subproblem.
///
/// Keeps theta, the dual variable, C^-1 = (s^2 I + sum theta_n X_n X_n^H)^-1
/// and the residual u = y - sum_{near} theta_n hbar_n (x) s_n. The inverse is
/// updated by the exact Woodbury identity on every step.
class LocalState {
 public:
  LocalState(const ReceivedSignal& received, const std::vector<ChannelStats>& row,
             const SignatureMatrix& signatures, Eigen::VectorXd theta0, Eigen::VectorXd lambda0);

  const Eigen::VectorXd& theta() const { return theta_; }
  const Eigen::VectorXd& lambda_dual() const { return lambda_; }
  void set_lambda(Eigen::VectorXd lambda);
  const Eigen::MatrixXcd& cov_inv() const { return cov_inv_; }
  const Eigen::VectorXcd& residual() const { return residual_; }
  const Eigen::VectorXcd& observation() const { return y_; }
  const std::vector<XFactor>& x_factors() const { return x_; }
  double noise_var() const { return noise_var_; }
  Eigen::Index dim() const { return y_.size(); }
  Eigen::Index num_devices() const { return theta_.size(); }
  Eigen::Index signature_length() const { return signature_length_; }
  std::size_t sweeps_done() const { return sweeps_; }
  std::size_t refactorizations() const { return refactorizations_; }

  CoordinateTerms coordinate_terms(Eigen::Index n) const;

  /// theta_n += d with the exact low-rank update of cov_inv and residual.
  void apply_step(Eigen::Index n, double d);
  void apply_step(const CoordinateTerms& terms, double d);

  /// Rebuild cov_inv and residual directly from theta.
  void refactorize();

  /// Dense s^2 I + sum theta_n X_n X_n^H.
  Eigen::MatrixXcd covariance() const;

  void note_sweep() { ++sweeps_; }

 private:
  Eigen::VectorXcd y_;
  double noise_var_ = 0.0;
  Eigen::Index signature_length_ = 0;
  std::vector<XFactor> x_;
  Eigen::VectorXd theta_;
  Eigen::VectorXd lambda_;
  Eigen::MatrixXcd cov_inv_;
  Eigen::VectorXcd residual_;
  std::size_t sweeps_ = 0;
  std::size_t refactorizations_ = 0;
};

LocalState init_local_state(const ReceivedSignal& received, const std::vector<ChannelStats>& row,
                            const SignatureMatrix& signatures, Eigen::VectorXd theta0,
                            Eigen::VectorXd lambda0);

/// Surrogate coefficients from precomputed terms; theta_n, a_n, lambda_n and
/// mu enter rho1 and rho2 only.
QuarticCoeffs quartic_from_terms(const CoordinateTerms& t, double lambda_n, double theta_n,
                                 double a_n, double mu);
QuarticCoeffs quartic_coeffs(const LocalState& state, Eigen::Index n, double a_n,
                             const SolverParams& params);

/// Exact change of the local objective when theta_n moves by d, including
/// the dual and penalty terms. +inf if the step leaves the PD cone.
double exact_step_change(const CoordinateTerms& t, double d, double lambda_n, double theta_n,
                         double a_n, double mu);

void apply_step(LocalState& state, Eigen::Index n, double d);

struct SweepStats {
  std::size_t steps = 0;
  std::size_t omega_doublings = 0;
  std::size_t rejected = 0;  // coordinates left unchanged after all doublings
  double max_abs_step = 0.0;

  SweepStats& operator+=(const SweepStats& o);
};

/// One coordinate pass over all devices of one AP (ascending order unless
/// params.randomized_order).
SweepStats cd_sweep(LocalState& state, const Eigen::VectorXd& a, const SolverParams& params);

/// f_m(theta) + lambda^T (theta - a) + mu/2 |theta - a|^2 with
/// f_m = log|C| + u^H C^-1 u (no pi terms). Throws std::length_error when
/// LK exceeds params.oracle_cap.
double local_objective(const LocalState& state, const Eigen::VectorXd& a, const SolverParams& params);

struct CentralizedResult {
  ActivityVector estimate;
  std::vector<Eigen::VectorXd> history;  // after each sweep, history[0] = start
  std::size_t sweeps = 0;
  bool converged = false;
};

/// Coordinate descent on the full likelihood: per device, the per-AP
/// surrogates (mu = 0, lambda = 0) are summed and one step is applied to all
/// APs. Stops when |delta a|_inf < tol or after max_sweeps.
CentralizedResult centralized_cd(const std::vector<ReceivedSignal>& received,
                                 const ChannelModel& model, const SignatureMatrix& signatures,
                                 const SolverParams& params, std::size_t max_sweeps,
                                 double tol = 1e-6);

}  // namespace hybridad
