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
#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "hybridad/channel.hpp"
#include "hybridad/solver.hpp"

namespace hybridad {

struct CpuState {
  Eigen::VectorXd a;
  std::size_t iteration = 0;
  std::vector<Eigen::VectorXd> history;  // a^(0), a^(1), ...
};

enum class Direction { up, down };

/// One fronthaul message. Broadcasts carry no AP index.
struct FronthaulRecord {
  Direction direction = Direction::up;
  std::size_t iteration = 0;
  std::optional<std::size_t> ap_index;
  std::size_t payload_len = 0;  // real scalars
};

class FronthaulLog {
 public:
  void record(FronthaulRecord r) { records_.push_back(r); }
  const std::vector<FronthaulRecord>& records() const { return records_; }
  std::size_t total_payload(Direction dir) const;
  /// CSV with header `iteration,ap,direction,payload_len`; broadcasts use ap "all".
  void write_csv(std::ostream& out) const;

 private:
  std::vector<FronthaulRecord> records_;
};

/// lambda + mu (theta - a).
Eigen::VectorXd dual_ascent(const Eigen::VectorXd& lambda, const Eigen::VectorXd& theta,
                            const Eigen::VectorXd& a, double mu);

/// a_n = clamp(sum_m msg_{m,n} / (M mu), 0, 1) with msg_m = mu theta_m + lambda_m.
Eigen::VectorXd cpu_aggregate(const std::vector<Eigen::VectorXd>& messages, double mu,
                              std::size_t num_aps);

struct ConsensusOptions {
  std::size_t max_iters = 30;
  double tol = 1e-4;
  /// Order in which APs are driven inside an iteration; empty = 0..M-1.
  std::vector<std::size_t> ap_order;
  /// Threads for the per-AP phase (1 = run inline).
  std::size_t workers = 1;
  /// Evaluate each AP's local objective after its sweep (dense; small LK).
  bool trace_objectives = false;
};

struct IterationTrace {
  std::size_t iteration = 0;
  double delta_inf = 0.0;
  std::vector<double> local_objective;  // empty unless trace_objectives
  double consensus_residual = 0.0;      // sum_m |theta_m - a^(i-1)|^2
  SweepStats sweep;
};

struct ConsensusResult {
  ActivityVector estimate;
  std::vector<Eigen::VectorXd> history;  // a^(0) .. a^(T)
  std::vector<IterationTrace> trace;
  FronthaulLog fronthaul;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Distributed consensus detection: broadcast a, local coordinate sweeps and
/// dual ascent at every AP, closed-form aggregation at the CPU.
ConsensusResult run_consensus(const std::vector<ReceivedSignal>& received,
                               const ChannelModel& model, const SignatureMatrix& signatures,
                               const SolverParams& params, const ConsensusOptions& options = {});

/// Binary decisions a_n >= gamma, gamma clamped to [0,1].
Eigen::VectorXd detect(const Eigen::VectorXd& a, double gamma);

/// Header `iteration,delta_inf,consensus_residual,obj_ap0,...`.
void write_trace_csv(std::ostream& out, const std::vector<IterationTrace>& trace);

}  // namespace hybridad
