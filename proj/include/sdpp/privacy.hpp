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

#ifndef SDPP_PRIVACY_HPP
#define SDPP_PRIVACY_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sdpp/rng.hpp"

namespace sdpp {

/// Per-agent Laplace scales calibrated for an epsilon budget over a fixed
/// horizon.  Invariant: theta_i strictly exceeds 2 sqrt(p) C K / epsilon_i.
struct PrivacyBudget {
  Eigen::VectorXd epsilon;  // per-agent, positive
  int horizon = 0;          // K
  double gradient_bound = 0.0;
  int p = 0;
  double slack = 0.0;
  Eigen::VectorXd theta;

  double theta_bar() const { return theta.size() ? theta.maxCoeff() : 0.0; }
  std::string report_text() const;
};

/// theta_i = (1 + slack) * 2 sqrt(p) * C * K / epsilon_i.  slack must be
/// positive so the scale is strictly above the threshold; rejects
/// nonpositive epsilon and a zero gradient bound.
PrivacyBudget calibrate(const Eigen::VectorXd& epsilon, int K, double C_bound,
                        int p, double slack = 1e-6);

/// Inverse CDF of the zero-mean Laplace distribution with scale theta,
/// parameterized by w in (-0.5, 0.5):  x = -theta sign(w) ln(1 - 2|w|).
double laplace_icdf(double w, double theta);

/// One Laplace draw; mean 0, variance 2 theta^2.  theta must be positive.
double sample_laplace(double theta, StreamRng& rng);

/// The per-run data the sensitivity verifier consumes: the gradient stream
/// of every agent along its own trajectory, plus enough identity to check
/// that two runs form an adjacent pair.
struct GradientRecord {
  std::uint64_t seed = 0;
  Eigen::MatrixXd x0;                       // n x p
  Eigen::VectorXd beta;                     // decomposition weights
  std::vector<Eigen::MatrixXd> gradients;   // per iteration, each n x p
  std::vector<std::uint64_t> fingerprints;  // per agent
};

struct SensitivityReport {
  int i0 = -1;                  // differing agent; -1 when the sets coincide
  double delta_xi_l1 = 0.0;     // sum_k ||Delta xi_{i0,k}||_1
  double bound = 0.0;           // 2 sqrt(p) C K
  double gradient_bound = 0.0;  // C measured over both runs
  int horizon = 0;
  bool within_bound = false;
};

/// Replays the compensating-noise recursion between two runs whose function
/// sets differ in at most one agent:
///   dy_k = beta_i0 dy_{k-1} + (g1_{i0,k-1} - g2_{i0,k-1}),   dy_0 = 0,
///   dxi_k = -(1 - beta_i0) dy_k  for k >= 1,  dxi_0 = 0,
/// and compares sum_k ||dxi_k||_1 against 2 sqrt(p) C K with C the largest
/// gradient norm observed in either run.  Throws when the records disagree
/// on seed or initialization, or differ at two or more agents.
SensitivityReport verify_sensitivity(const GradientRecord& run_1,
                                     const GradientRecord& run_2,
                                     double beta_i0, int K);

}  // namespace sdpp

#endif  // SDPP_PRIVACY_HPP
