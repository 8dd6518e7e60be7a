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

#ifndef SDPP_ANALYSIS_HPP
#define SDPP_ANALYSIS_HPP

#include <array>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "sdpp/graph.hpp"
#include "sdpp/problem.hpp"

namespace sdpp {

/// Surrogates for the contraction norms of the error system.
///
/// sigma_R and sigma_C are the deflated spectral radii plus a margin; the
/// delta constants are eigenbasis condition numbers standing in for the
/// norm-equivalence factors.  They make the convergence machinery computable
/// but are indicative, not certified; hence the flag.
struct NormSurrogates {
  double sigma_R = 0.0;
  double sigma_C = 0.0;
  double delta_RC = 1.0;  // ||.||_R <= delta_RC ||.||_C
  double delta_R2 = 1.0;  // ||.||_R <= delta_R2 ||.||_2
  double delta_C2 = 1.0;  // ||.||_C <= delta_C2 ||.||_2
  double delta_CR = 1.0;  // ||.||_C <= delta_CR ||.||_R
  bool certified = false;
};

/// sigma = deflated spectral radius + margin (margin must be positive and
/// small enough to keep sigma < 1), deltas from the eigenbases of R and C.
NormSurrogates default_norm_surrogates(const WeightSystem& weights,
                                       double margin = 0.05);

struct StepsizeBound {
  double eta_max = 0.0;            // min of the three contraction terms
  std::array<double, 3> terms{};   // consensus-R, consensus-C, determinant
  double cap_eta_prime = 0.0;      // eta' <= 1/(mu+L) converted to eta scale
  double cap_smoothness = 0.0;     // eta < 1/L
};

/// Numerical evaluation of the three-state error recursion
///   E_{k+1} <= A E_k + b
/// at a given stepsize and noise level.
struct AnalysisReport {
  std::array<double, 11> c{};  // coupling constants, eta-free
  std::array<double, 3> d{};   // determinant-condition aggregates
  Eigen::Matrix3d A;
  Eigen::Vector3d b;
  double rho_A = 0.0;
  StepsizeBound stepsize;

  double eta = 0.0;
  double eta_prime = 0.0;  // (eta/n) u^T T v
  double theta_bar = 0.0;
  double mu = 0.0;
  double L = 0.0;
  double uTv = 0.0;
  int n = 0;
  int p = 0;
  NormSurrogates norms;

  /// Filled by steady_state_bounds when rho_A < 1.
  std::optional<std::pair<double, double>> steady_bounds;

  std::string to_text() const;
};

/// Evaluates every coupling constant, assembles A and b, and computes the
/// spectral radius and stepsize bound.  Preconditions: a validated weight
/// system, 0 < mu <= L, eta >= 0 with eta' < 1/(mu+L) and eta < 1/L;
/// violations throw with the violated inequality spelled out.
AnalysisReport compute_constants(const WeightSystem& weights,
                                 const ObjectiveSuite& suite,
                                 const NormSurrogates& norms, double theta_bar,
                                 double eta);

/// eta_max = min{ sqrt((1-sigma_R^2)/(6 c5)), sqrt((1-sigma_C^2)/(6 c10)),
///                sqrt(2 d3 / (d2 + sqrt(d2^2 + 4 d1 d3))) },
/// plus the two precondition caps on eta scale.  The c's contain no eta, so
/// the bound is independent of the stepsize the report was built at.
StepsizeBound stepsize_bound(const AnalysisReport& report);

/// Third stepsize term in isolation (quadratic-formula root), exposed for
/// limit checks: d1 -> 0 gives sqrt(d3/d2).
double stepsize_determinant_term(double d1, double d2, double d3);

struct SteadyStateBounds {
  double bound_1 = 0.0;  // [(I-A)^{-1} b]_1
  double bound_2 = 0.0;  // [(I-A)^{-1} b]_2
  double closed_form_1 = 0.0;
  double closed_form_2 = 0.0;
  /// True when eta <= eta_max, the regime where the closed forms are valid
  /// relaxations and have been checked to dominate the solved bounds.
  bool relaxation_checked = false;
};

/// Solves (I - A) z = b.  Requires rho_A < 1 (refuses otherwise).  When the
/// report's eta is within the stepsize bound the closed-form relaxations are
/// evaluated and verified to dominate z; a violation throws, since it can
/// only come from a transcription fault.  Also records the pair into
/// report.steady_bounds.
SteadyStateBounds steady_state_bounds(AnalysisReport& report);

/// Determinant test for a nonnegative 3x3 matrix with diagonal entries
/// below 1: for irreducible such matrices, rho(M) < 1 iff det(I - M) > 0.
bool contraction_by_determinant(const Eigen::Matrix3d& M);

}  // namespace sdpp

#endif  // SDPP_ANALYSIS_HPP
