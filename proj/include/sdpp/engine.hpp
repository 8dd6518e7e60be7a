// Copyright 2026 The sdpushpull Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SDPP_ENGINE_HPP
#define SDPP_ENGINE_HPP

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "sdpp/graph.hpp"
#include "sdpp/privacy.hpp"
#include "sdpp/problem.hpp"

namespace sdpp {

enum class InitKind { kUniform01, kZero, kGiven };
enum class StepKind { kMatrix, kAgentwise };

struct RunOptions {
  double eta = 0.01;
  int horizon = 1000;  // K >= 0; the trace has K+1 rows
  std::uint64_t seed = 1;
  int replica = 0;
  InitKind init = InitKind::kUniform01;
  Eigen::MatrixXd x0;  // used with InitKind::kGiven
  /// When false (default) every replica shares the initialization of
  /// replica 0 and only the noise varies.
  bool vary_init_across_replicas = false;
  StepKind stepper = StepKind::kMatrix;
  bool record_observations = false;
  bool record_gradients = false;
  bool record_noise = false;
  bool record_iterates = false;
};

/// Mutable per-run state.  y_alpha is the shared tracker block, y_beta the
/// private one; prev_y_alpha holds the previous shared block so the pulled
/// difference is formed from real state, never re-derived.
struct RunState {
  Eigen::MatrixXd x;             // n x p
  Eigen::MatrixXd y_alpha;       // n x p
  Eigen::MatrixXd y_beta;        // n x p
  Eigen::MatrixXd prev_y_alpha;  // n x p
  long k = 0;
  double eta = 0.0;
};

/// Laplace noise xi_{i,k}; a draw depends only on (seed, replica, agent,
/// iteration, coordinate), so any consumption order produces the same
/// values.  Default-constructed source is identically zero.
class NoiseSource {
 public:
  NoiseSource() = default;
  NoiseSource(const PrivacyBudget& budget, std::uint64_t seed, int replica);

  bool active() const { return theta_.size() > 0; }
  int dimension() const { return p_; }
  Eigen::VectorXd draw(int agent, long iteration) const;

 private:
  Eigen::VectorXd theta_;
  std::uint64_t seed_ = 0;
  int replica_ = 0;
  int p_ = 0;
};

/// Everything an eavesdropper on the links can see at one iteration: the
/// pulled payload x_j - eta (y^a_{j,k+1} - y^a_{j,k}) and the pushed payload
/// Ctilde_li y^a_i, one entry per directed edge.  The private tracker block
/// and raw gradients have no representation here by construction.
struct ObservationLog {
  struct Entry {
    long iteration;
    int receiver;
    int sender;
    Eigen::VectorXd pulled;
    Eigen::VectorXd pushed;
  };
  std::vector<Entry> entries;
};

/// Optional per-step outputs shared by both steppers.
struct StepRecord {
  Eigen::MatrixXd gradient;  // n x p, grad f_i(x_{i,k})
  Eigen::MatrixXd noise;     // n x p, xi_{i,k}
};

struct Trace {
  // Per-iteration series, length horizon + 1 (row 0 is the initial state).
  Eigen::VectorXd residual;         // (1/n) sum_i ||x_i - x*||^2 / ||x_i0 - x*||^2
  Eigen::VectorXd consensus_error;  // ||x_k - 1 xbar_k||_F with xbar = u^T x / n
  Eigen::VectorXd tracking_error;   // tracker-sum identity deviation; last row 0

  double eta = 0.0;
  int horizon = 0;
  std::uint64_t seed = 0;
  int replica = 0;
  double wallclock_sec = 0.0;

  Eigen::MatrixXd x0;
  Eigen::MatrixXd x_final;
  Eigen::VectorXd beta;
  std::vector<std::uint64_t> fingerprints;

  // Optional recordings, empty unless requested.
  std::vector<Eigen::MatrixXd> gradients;
  std::vector<Eigen::MatrixXd> noise;
  std::vector<Eigen::MatrixXd> iterates;
  ObservationLog observations;

  GradientRecord adjacency_record() const;
};

/// One iteration in per-agent form:
///   y^a_{i,k+1} = sum_j Ctilde_ij y^a_{j,k} + (1-beta_i) y^b_{i,k} + xi_{i,k}
///   y^b_{i,k+1} = alpha_i y^a_{i,k} + beta_i y^b_{i,k} + grad f_i(x_{i,k})
///   x_{i,k+1}   = sum_j R_ij [x_{j,k} - eta (y^a_{j,k+1} - y^a_{j,k})]
void step_agentwise(RunState& state, const WeightSystem& weights,
                    const ObjectiveSuite& suite, const NoiseSource& noise,
                    StepRecord* record = nullptr,
                    ObservationLog* log = nullptr);

/// The same iteration in stacked form, y = [y^a; y^b]:
///   y_{k+1} = C y_k + [xi_k; grad F(x_k)]
///   x_{k+1} = R [x_k - eta T (y_{k+1} - y_k)]
/// Trajectory-identical to step_agentwise for the same noise source.
void step_matrix(RunState& state, const WeightSystem& weights,
                 const ObjectiveSuite& suite, const NoiseSource& noise,
                 StepRecord* record = nullptr, ObservationLog* log = nullptr);

/// Runs the full iteration for opt.horizon steps.  budget == nullptr means a
/// noise-free run (xi = 0).  Requires a validated weight system, a suite
/// with x_star, and an initialization distinct from x_star (the residual is
/// normalized by the initial distance).  Any non-finite state aborts with a
/// diagnostic.
Trace run(const WeightSystem& weights, const ObjectiveSuite& suite,
          const RunOptions& opt, const PrivacyBudget* budget = nullptr);

/// Plain push-pull gradient tracking(no decomposition, no noise): the
/// accuracy yardstick.  Same trace conventions; with n = 1 it reduces to
/// gradient descent.
struct BaselineWeights {
  Eigen::MatrixXd R;       // row-stochastic
  Eigen::MatrixXd C_push;  // n x n column-stochastic
  Eigen::VectorXd u;
  SpanningTreeReport trees;
};

BaselineWeights build_baseline_weights(const NetworkTopology& topo,
                                       double c_R = 1.0, double c_C = 1.0);

Trace run_baseline_push_pull(const BaselineWeights& weights,
                             const ObjectiveSuite& suite,
                             const RunOptions& opt);

}  // namespace sdpp

#endif  // SDPP_ENGINE_HPP
