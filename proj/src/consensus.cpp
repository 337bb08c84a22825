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


#include "hybridad/consensus.hpp"

#include <algorithm>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>

namespace hybridad {

std::size_t FronthaulLog::total_payload(Direction dir) const {
  std::size_t total = 0;
  for (const auto& r : records_) {
    if (r.direction == dir) total += r.payload_len;
  }
  return total;
}

void FronthaulLog::write_csv(std::ostream& out) const {
  out << "iteration,ap,direction,payload_len\n";
  for (const auto& r : records_) {
    out << r.iteration << ',';
    if (r.ap_index) {
      out << *r.ap_index;
    } else {
      out << "all";
    }
    out << ',' << (r.direction == Direction::up ? "up" : "down") << ',' << r.payload_len << '\n';
  }
}

Eigen::VectorXd dual_ascent(const Eigen::VectorXd& lambda, const Eigen::VectorXd& theta,
                            const Eigen::VectorXd& a, double mu) {
  return lambda + mu * (theta - a);
}

Eigen::VectorXd cpu_aggregate(const std::vector<Eigen::VectorXd>& messages, double mu,
                              std::size_t num_aps) {
  if (messages.size() != num_aps || num_aps == 0) {
    throw std::invalid_argument("cpu_aggregate: expected " + std::to_string(num_aps) +
                                " messages, got " + std::to_string(messages.size()));
  }
  if (!(mu > 0.0)) throw std::invalid_argument("cpu_aggregate: mu must be positive");
  Eigen::VectorXd sum = messages.front();
  for (std::size_t m = 1; m < messages.size(); ++m) {
    if (messages[m].size() != sum.size()) throw std::invalid_argument("cpu_aggregate: length mismatch");
    sum += messages[m];
  }
  return (sum / (static_cast<double>(num_aps) * mu)).cwiseMax(0.0).cwiseMin(1.0);
}

ConsensusResult run_consensus(const std::vector<ReceivedSignal>& received,
                               const ChannelModel& model, const SignatureMatrix& signatures,
                               const SolverParams& params, const ConsensusOptions& options) {
  params.validate();
  const std::size_t M = model.num_aps();
  if (received.size() != M) throw std::invalid_argument("run_consensus: one signal per AP required");
  const Eigen::Index N = signatures.num_devices();
  const auto n_reals = static_cast<std::size_t>(N);

  std::vector<std::size_t> order = options.ap_order;
  if (order.empty()) {
    order.resize(M);
    std::iota(order.begin(), order.end(), std::size_t{0});
  }
  {
    std::vector<std::size_t> sorted = order;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < M; ++i) {
      if (sorted.size() != M || sorted[i] != i) throw std::invalid_argument("ap_order must be a permutation");
    }
  }

  std::vector<LocalState> states;
  states.reserve(M);
  for (std::size_t m = 0; m < M; ++m) {
    try {
      states.emplace_back(received[m], model.links[m], signatures, Eigen::VectorXd::Zero(N),
                          Eigen::VectorXd::Zero(N));
    } catch (const std::exception& e) {
      throw std::runtime_error("AP " + std::to_string(m) + ": " + e.what());
    }
  }
  std::vector<Eigen::VectorXd> messages(M);
  for (std::size_t m = 0; m < M; ++m) {
    messages[m] = params.mu * states[m].theta() + states[m].lambda_dual();
  }

  CpuState cpu;
  cpu.a = cpu_aggregate(messages, params.mu, M);
  cpu.history.push_back(cpu.a);

  ConsensusResult out;
  std::vector<SweepStats> ap_stats(M);
  std::vector<double> ap_objective(M, 0.0);
  std::vector<double> ap_gap(M, 0.0);

  for (std::size_t iter = 1; iter <= options.max_iters; ++iter) {
    cpu.iteration = iter;
    out.fronthaul.record({Direction::down, iter, std::nullopt, n_reals});
    const Eigen::VectorXd& a_prev = cpu.a;

    auto work = [&](std::size_t m) {
      try {
        LocalState& st = states[m];
        SweepStats s;
        for (std::size_t k = 0; k < params.sweeps_per_call; ++k) s += cd_sweep(st, a_prev, params);
        if (options.trace_objectives) ap_objective[m] = local_objective(st, a_prev, params);
        ap_gap[m] = (st.theta() - a_prev).squaredNorm();
        st.set_lambda(dual_ascent(st.lambda_dual(), st.theta(), a_prev, params.mu));
        messages[m] = params.mu * st.theta() + st.lambda_dual();
        ap_stats[m] = s;
      } catch (const std::exception& e) {
        throw std::runtime_error("AP " + std::to_string(m) + ": " + e.what());
      }
    };

    if (options.workers <= 1 || M == 1) {
      for (const std::size_t m : order) work(m);
    } else {
      std::vector<std::exception_ptr> errors(M);
      const std::size_t nthreads = std::min(options.workers, M);
      std::vector<std::thread> pool;
      for (std::size_t t = 0; t < nthreads; ++t) {
        pool.emplace_back([&, t] {
          for (std::size_t i = t; i < M; i += nthreads) {
            try {
              work(order[i]);
            } catch (...) {
              errors[order[i]] = std::current_exception();
            }
          }
        });
      }
      for (auto& th : pool) th.join();
      for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
      }
    }
    for (std::size_t m = 0; m < M; ++m) out.fronthaul.record({Direction::up, iter, m, n_reals});

    Eigen::VectorXd a_next = cpu_aggregate(messages, params.mu, M);
    IterationTrace tr;
    tr.iteration = iter;
    tr.delta_inf = (a_next - a_prev).lpNorm<Eigen::Infinity>();
    tr.consensus_residual = std::accumulate(ap_gap.begin(), ap_gap.end(), 0.0);
    if (options.trace_objectives) tr.local_objective = ap_objective;
    for (const auto& s : ap_stats) tr.sweep += s;
    out.trace.push_back(std::move(tr));

    cpu.a = std::move(a_next);
    cpu.history.push_back(cpu.a);
    out.iterations = iter;
    if (out.trace.back().delta_inf < options.tol) {
      out.converged = true;
      break;
    }
  }
  out.estimate.values = cpu.a;
  out.history = std::move(cpu.history);
  return out;
}

Eigen::VectorXd detect(const Eigen::VectorXd& a, double gamma) {
  gamma = std::clamp(gamma, 0.0, 1.0);
  return (a.array() >= gamma).cast<double>();
}

void write_trace_csv(std::ostream& out, const std::vector<IterationTrace>& trace) {
  out << "iteration,delta_inf,consensus_residual";
  const std::size_t aps = trace.empty() ? 0 : trace.front().local_objective.size();
  for (std::size_t m = 0; m < aps; ++m) out << ",obj_ap" << m;
  out << '\n' << std::setprecision(17);
  for (const auto& t : trace) {
    out << t.iteration << ',' << t.delta_inf << ',' << t.consensus_residual;
    for (double v : t.local_objective) out << ',' << v;
    out << '\n';
  }
}

}  // namespace hybridad
