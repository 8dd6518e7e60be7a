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

#include "sdpp/privacy.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sdpp {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

std::string PrivacyBudget::report_text() const {
  std::ostringstream out;
  out.precision(17);
  out << "horizon " << horizon << "\ngradient_bound " << gradient_bound
      << "\ndimension " << p << "\nslack " << slack << "\n";
  for (Eigen::Index i = 0; i < epsilon.size(); ++i)
    out << "agent " << i + 1 << " epsilon " << epsilon(i) << " theta "
        << theta(i) << "\n";
  return out.str();
}

PrivacyBudget calibrate(const Eigen::VectorXd& epsilon, int K, double C_bound,
                        int p, double slack) {
  require(epsilon.size() >= 1, "calibrate: epsilon vector is empty");
  require(epsilon.minCoeff() > 0.0, "calibrate: every epsilon must be positive");
  require(K >= 1, "calibrate: horizon must be at least 1");
  require(C_bound > 0.0, "calibrate: gradient bound must be positive");
  require(p >= 1, "calibrate: dimension must be positive");
  require(slack > 0.0,
          "calibrate: slack must be positive; the scale must exceed the "
          "threshold strictly");

  PrivacyBudget budget;
  budget.epsilon = epsilon;
  budget.horizon = K;
  budget.gradient_bound = C_bound;
  budget.p = p;
  budget.slack = slack;
  const double base = 2.0 * std::sqrt(static_cast<double>(p)) * C_bound * K;
  budget.theta = (1.0 + slack) * base * epsilon.cwiseInverse();
  return budget;
}

double laplace_icdf(double w, double theta) {
  require(theta > 0.0, "laplace: scale must be positive");
  require(w > -0.5 && w < 0.5, "laplace: w must lie in (-0.5, 0.5)");
  if (w == 0.0) return 0.0;
  const double sign = (w > 0.0) ? 1.0 : -1.0;
  return -theta * sign * std::log(1.0 - 2.0 * std::abs(w));
}

double sample_laplace(double theta, StreamRng& rng) {
  return laplace_icdf(rng.next_symmetric(), theta);
}

SensitivityReport verify_sensitivity(const GradientRecord& run_1,
                                     const GradientRecord& run_2,
                                     double beta_i0, int K) {
  require(K >= 1, "verify_sensitivity: horizon must be at least 1");
  require(beta_i0 > 0.0 && beta_i0 < 1.0,
          "verify_sensitivity: beta must lie in (0,1)");
  require(run_1.seed == run_2.seed,
          "verify_sensitivity: runs must share a seed");
  require(run_1.x0.rows() == run_2.x0.rows() &&
              run_1.x0.cols() == run_2.x0.cols() &&
              (run_1.x0.array() == run_2.x0.array()).all(),
          "verify_sensitivity: runs must share the initialization");
  require(static_cast<int>(run_1.gradients.size()) >= K &&
              static_cast<int>(run_2.gradients.size()) >= K,
          "verify_sensitivity: recorded gradient streams shorter than K");
  require(run_1.fingerprints.size() == run_2.fingerprints.size() &&
              !run_1.fingerprints.empty(),
          "verify_sensitivity: runs must carry function fingerprints");

  const int n = static_cast<int>(run_1.fingerprints.size());
  int i0 = -1;
  int differing = 0;
  for (int i = 0; i < n; ++i) {
    if (run_1.fingerprints[i] != run_2.fingerprints[i]) {
      ++differing;
      i0 = i;
    }
  }
  require(differing <= 1,
          "verify_sensitivity: function sets differ at two or more agents "
          "(not adjacent)");

  const int p = static_cast<int>(run_1.gradients[0].cols());
  double gradient_bound = 0.0;
  for (int k = 0; k < K; ++k) {
    gradient_bound = std::max(
        gradient_bound, run_1.gradients[k].rowwise().norm().maxCoeff());
    gradient_bound = std::max(
        gradient_bound, run_2.gradients[k].rowwise().norm().maxCoeff());
  }

  SensitivityReport report;
  report.i0 = i0;
  report.horizon = K;
  report.gradient_bound = gradient_bound;
  report.bound = 2.0 * std::sqrt(static_cast<double>(p)) * gradient_bound * K;

  if (i0 >= 0) {
    // dxi_0 = 0; for k >= 1:  dy_k = beta dy_{k-1} + df_{k-1},
    // dxi_k = -(1 - beta) dy_k.
    Eigen::VectorXd dy = Eigen::VectorXd::Zero(p);
    double total = 0.0;
    for (int k = 1; k <= K; ++k) {
      const Eigen::VectorXd df = (run_1.gradients[k - 1].row(i0) -
                                  run_2.gradients[k - 1].row(i0))
                                     .transpose();
      dy = beta_i0 * dy + df;
      total += ((1.0 - beta_i0) * dy).lpNorm<1>();
    }
    report.delta_xi_l1 = total;
  }
  report.within_bound = report.delta_xi_l1 < report.bound;
  return report;
}

}  // namespace sdpp
