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

#ifndef SDPP_PROBLEM_HPP
#define SDPP_PROBLEM_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace sdpp {

/// Per-agent objective gradients plus the global convexity constants.
///
/// Evaluators are pure functions of their inputs and safe for concurrent
/// evaluation.  Any user-supplied gradients with declared mu and L are
/// accepted; the ridge generator below is the only built-in.
struct ObjectiveSuite {
  int n = 0;
  int p = 0;
  double mu = 0.0;  // strong convexity modulus, must be > 0
  double L = 0.0;   // gradient Lipschitz constant, mu <= L
  std::vector<std::function<Eigen::VectorXd(const Eigen::VectorXd&)>> grad;
  Eigen::VectorXd x_star;  // reference optimum; empty when unknown

  /// Per-agent function identities, used by the sensitivity verifier to
  /// detect adjacency.  Empty when the functions carry no fingerprint.
  std::vector<std::uint64_t> fingerprints;

  /// Rows: gradient of f_i at x.row(i).
  Eigen::MatrixXd gradient_matrix(const Eigen::MatrixXd& x) const;
};

/// Ridge-regression benchmark data: one private sample (u_i, v_i) per agent,
/// generated as v_i = u_i^T xtilde_i + gamma_i with the draws recorded.
struct RidgeInstance {
  int n = 0;
  int p = 0;
  double rho_pen = 0.0;
  std::uint64_t seed = 0;
  Eigen::MatrixXd samples;  // n x p, rows u_i in [-1,1]^p
  Eigen::VectorXd outputs;  // v_i
  Eigen::MatrixXd anchors;  // n x p, rows xtilde_i
  Eigen::VectorXd noise;    // gamma_i ~ N(0, 5)  (variance 5)

  void save(const std::string& path) const;
  static RidgeInstance load(const std::string& path);

  /// Adjacent instance: agent i0's sample (u, v) is redrawn from
  /// perturb_seed, everything else is shared.
  RidgeInstance perturb_agent(int i0, std::uint64_t perturb_seed) const;

  std::vector<std::uint64_t> fingerprints() const;
};

/// f_i(x) = (u_i^T x - v_i)^2 + rho_pen ||x||^2, mu = 2 rho_pen,
/// L = 2 (max_i ||u_i||^2 + rho_pen).  The suite's x_star is the
/// first-order-condition optimum below.
std::pair<RidgeInstance, ObjectiveSuite> generate_ridge(int n, int p,
                                                        double rho_pen,
                                                        std::uint64_t seed);

/// Suite for an existing instance (same construction as generate_ridge).
ObjectiveSuite make_ridge_suite(const RidgeInstance& inst);

/// Minimizer of sum_i f_i: solves (sum_i u_i u_i^T + n rho I) x = sum_i u_i v_i.
/// Verified against the gradient first-order condition on construction.
Eigen::VectorXd closed_form_optimum(const RidgeInstance& inst);

/// Anchor-based variant with right-hand side sum_i (u_i u_i^T) xtilde_i.
/// Coincides with closed_form_optimum only when the output noise is zero;
/// reported alongside it in run metadata.
Eigen::VectorXd anchor_form_optimum(const RidgeInstance& inst);

/// safety_factor * max_{i,k} ||grad f_i(x_{i,k})|| over a recorded
/// trajectory of iterate matrices (each n x p).  Throws on an empty
/// trajectory.  A zero bound is possible (all-zero gradients) and is
/// rejected downstream by the privacy calibration.
double estimate_gradient_bound(const ObjectiveSuite& suite,
                               const std::vector<Eigen::MatrixXd>& iterates,
                               double safety_factor = 2.0);

}  // namespace sdpp

#endif  // SDPP_PROBLEM_HPP
