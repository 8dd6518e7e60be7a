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

#include "sdpp/analysis.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "sdpp/linalg.hpp"

namespace sdpp {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

NormSurrogates default_norm_surrogates(const WeightSystem& weights,
                                       double margin) {
  require(weights.validated(),
          "norm surrogates: weight system failed the spanning-tree check");
  require(margin > 0.0,
          "norm surrogates: margin must be positive; the contraction factor "
          "must sit strictly above the spectral radius");
  const int n = weights.n();
  const Eigen::MatrixXd R_defl =
      weights.R() -
      Eigen::VectorXd::Ones(n) * weights.u().transpose() / n;
  const Eigen::MatrixXd C_defl =
      weights.C() -
      weights.v() * Eigen::RowVectorXd::Ones(2 * n) / n;

  NormSurrogates s;
  s.sigma_R = spectral_radius(R_defl) + margin;
  s.sigma_C = spectral_radius(C_defl) + margin;
  if (s.sigma_R >= 1.0 || s.sigma_C >= 1.0)
    throw std::invalid_argument(
        "norm surrogates: spectral radius plus margin reaches 1; the "
        "topology mixes too weakly for this margin");
  s.delta_R2 = eigenbasis_condition(weights.R());
  s.delta_C2 = eigenbasis_condition(weights.C());
  s.delta_RC = s.delta_R2;
  s.delta_CR = s.delta_C2;
  s.certified = false;
  return s;
}

AnalysisReport compute_constants(const WeightSystem& weights,
                                 const ObjectiveSuite& suite,
                                 const NormSurrogates& norms, double theta_bar,
                                 double eta) {
  require(weights.validated(),
          "analysis: weight system failed the spanning-tree check");
  require(suite.mu > 0.0 && suite.L >= suite.mu,
          "analysis: need 0 < mu <= L");
  require(eta >= 0.0, "analysis: stepsize must be nonnegative");
  require(theta_bar >= 0.0, "analysis: noise scale must be nonnegative");
  require(norms.sigma_R > 0.0 && norms.sigma_R < 1.0 && norms.sigma_C > 0.0 &&
              norms.sigma_C < 1.0,
          "analysis: contraction factors must lie in (0,1)");

  const int n = weights.n();
  const double mu = suite.mu;
  const double L = suite.L;
  const double uTv = weights.uTv();
  require(uTv > 0.0, "analysis: u^T T v must be positive");
  const double eta_prime = eta / n * uTv;
  {
    std::ostringstream msg;
    if (eta_prime >= 1.0 / (mu + L)) {
      msg << "analysis: precondition violated: eta' = (eta/n) u^T T v = "
          << eta_prime << " must be < 1/(mu+L) = " << 1.0 / (mu + L);
      throw std::invalid_argument(msg.str());
    }
    if (eta >= 1.0 / L) {
      msg << "analysis: precondition violated: eta = " << eta
          << " must be < 1/L = " << 1.0 / L;
      throw std::invalid_argument(msg.str());
    }
  }

  // Operator norms of the fixed matrices entering the constants, all taken
  // in the 2-norm.
  const Eigen::MatrixXd T = weights.T();
  const Eigen::VectorXd& u = weights.u();
  const Eigen::VectorXd& v = weights.v();
  const double norm_uT = (u.transpose() * T).norm();
  const double norm_Tv = (T * v).norm();
  const double norm_T = operator_norm_2(T);
  const double norm_RT = operator_norm_2(weights.R() * T);
  const double norm_Iv = operator_norm_2(
      Eigen::MatrixXd::Identity(2 * n, 2 * n) -
      v * Eigen::RowVectorXd::Ones(2 * n) / n);
  const double norm_RI =
      operator_norm_2(weights.R() - Eigen::MatrixXd::Identity(n, n));
  const double norm_v = v.norm();

  const double sR2 = norms.sigma_R * norms.sigma_R;
  const double sC2 = norms.sigma_C * norms.sigma_C;
  const double p = static_cast<double>(suite.p);
  const double nn = static_cast<double>(n);

  AnalysisReport r;
  r.c[0] = 2.0 * uTv * L * L / (mu * nn * nn);
  r.c[1] = 2.0 * norm_uT * norm_uT / (uTv * mu * nn);
  r.c[2] = 2.0 * p * uTv * uTv / (nn * nn * nn);
  r.c[3] = 8.0 * sR2 * L * L * norms.delta_R2 * norm_Tv * norm_Tv / (1.0 - sR2);
  r.c[4] = r.c[3] / nn;
  r.c[5] = 4.0 * sR2 * norms.delta_RC * norm_T * norm_T / (1.0 - sR2);
  r.c[6] = 8.0 * p * sR2 * norms.delta_R2 * norm_Tv * norm_Tv /
           ((1.0 - sR2) * nn);
  const double dC2sq = norms.delta_C2 * norms.delta_C2;
  const double iv2 = norm_Iv * norm_Iv;
  const double rt2 = norm_RT * norm_RT;
  const double v2 = norm_v * norm_v;
  r.c[7] = 12.0 * dC2sq * L * L * L * L / (1.0 - sC2) * iv2 * rt2 * v2;
  r.c[8] = 2.0 * dC2sq / (1.0 - sC2) * iv2 *
           (3.0 * L * L * norm_RI * norm_RI + 6.0 * L * L * rt2 * v2 / nn);
  r.c[9] = 6.0 * dC2sq * L * L / (1.0 - sC2) * iv2 * rt2;
  r.c[10] = 12.0 * dC2sq * p / ((1.0 - sC2) * nn) * iv2 * rt2 * v2;

  r.d[0] = r.c[0] * r.c[5] * r.c[7];
  r.d[1] = r.c[1] * r.c[3] * r.c[8] + (1.0 - sR2) / 2.0 * r.c[1] * r.c[7] +
           (1.0 - sC2) / 2.0 * r.c[0] * r.c[3] +
           uTv * mu * r.c[5] * r.c[8] / nn;
  r.d[2] = uTv * mu / (18.0 * nn) * (1.0 - sR2) * (1.0 - sC2);

  r.A << 1.0 - eta_prime * mu, r.c[0] * eta, r.c[1] * eta,
      r.c[3] * eta * eta, (1.0 + sR2) / 2.0 + r.c[4] * eta * eta,
      r.c[5] * eta * eta,
      r.c[7] * eta * eta, r.c[8], (1.0 + sC2) / 2.0 + r.c[9] * eta * eta;
  r.b << r.c[2] * eta * eta, r.c[6] * eta * eta, r.c[10];
  r.b *= theta_bar * theta_bar;

  r.rho_A = spectral_radius(r.A);
  r.eta = eta;
  r.eta_prime = eta_prime;
  r.theta_bar = theta_bar;
  r.mu = mu;
  r.L = L;
  r.uTv = uTv;
  r.n = n;
  r.p = suite.p;
  r.norms = norms;
  r.stepsize = stepsize_bound(r);
  return r;
}

double stepsize_determinant_term(double d1, double d2, double d3) {
  require(d1 >= 0.0 && d2 >= 0.0 && d3 > 0.0,
          "stepsize bound: determinant aggregates must be nonnegative with "
          "d3 positive");
  const double denom = d2 + std::sqrt(d2 * d2 + 4.0 * d1 * d3);
  require(denom > 0.0, "stepsize bound: degenerate determinant condition");
  return std::sqrt(2.0 * d3 / denom);
}

StepsizeBound stepsize_bound(const AnalysisReport& report) {
  for (double ci : report.c)
    require(ci > 0.0, "stepsize bound: every coupling constant must be positive");
  const double sR2 = report.norms.sigma_R * report.norms.sigma_R;
  const double sC2 = report.norms.sigma_C * report.norms.sigma_C;

  StepsizeBound b;
  b.terms[0] = std::sqrt((1.0 - sR2) / (6.0 * report.c[4]));
  b.terms[1] = std::sqrt((1.0 - sC2) / (6.0 * report.c[9]));
  b.terms[2] = stepsize_determinant_term(report.d[0], report.d[1], report.d[2]);
  b.eta_max = std::min({b.terms[0], b.terms[1], b.terms[2]});
  b.cap_eta_prime = report.n / ((report.mu + report.L) * report.uTv);
  b.cap_smoothness = 1.0 / report.L;
  return b;
}

SteadyStateBounds steady_state_bounds(AnalysisReport& report) {
  if (report.rho_A >= 1.0) {
    std::ostringstream msg;
    msg << "steady-state bounds: rho(A) = " << report.rho_A
        << " is not below 1; no finite bound exists at eta = " << report.eta;
    throw std::invalid_argument(msg.str());
  }
  const Eigen::Matrix3d M = Eigen::Matrix3d::Identity() - report.A;
  const Eigen::Vector3d z = M.fullPivLu().solve(report.b);

  SteadyStateBounds out;
  out.bound_1 = z(0);
  out.bound_2 = z(1);

  const double eta = report.eta;
  const double etap_mu = report.eta_prime * report.mu;
  const double sR2 = report.norms.sigma_R * report.norms.sigma_R;
  const double sC2 = report.norms.sigma_C * report.norms.sigma_C;
  const auto& c = report.c;
  const double th2 = report.theta_bar * report.theta_bar;
  if (etap_mu > 0.0) {
    const double pref = 18.0 * th2 / (etap_mu * (1.0 - sR2) * (1.0 - sC2));
    out.closed_form_1 =
        pref * (((1.0 - sR2) * (1.0 - sC2) / 4.0 - c[5] * c[8] * eta * eta) *
                    c[2] * eta * eta +
                (c[1] * c[8] + c[0] * (1.0 - sC2) / 2.0) * c[6] * eta * eta * eta +
                (c[0] * c[5] * eta * eta * eta + c[1] * eta * (1.0 - sR2) / 2.0) *
                    c[10]);
    out.closed_form_2 =
        pref * ((c[5] * c[7] * eta * eta * eta * eta +
                 c[3] * eta * eta * (1.0 - sC2) / 2.0) *
                    c[2] * eta * eta +
                (etap_mu * (1.0 - sC2) / 2.0 - c[1] * c[7] * eta * eta * eta) *
                    c[6] * eta * eta +
                (c[1] * c[3] * eta * eta * eta + c[5] * eta * eta * etap_mu) *
                    c[10]);
  }

  // Within the stepsize bound the closed forms are relaxations of the solved
  // system; failing this dominance can only mean a transcription fault.
  out.relaxation_checked = report.eta <= report.stepsize.eta_max;
  if (out.relaxation_checked) {
    const double tol = 1e-9 * std::max(1.0, std::abs(out.bound_1));
    const double tol2 = 1e-9 * std::max(1.0, std::abs(out.bound_2));
    if (out.bound_1 > out.closed_form_1 + tol ||
        out.bound_2 > out.closed_form_2 + tol2)
      throw std::logic_error(
          "steady-state bounds: solved bounds exceed the closed-form "
          "relaxations inside the stepsize bound");
  }

  report.steady_bounds = std::make_pair(out.bound_1, out.bound_2);
  return out;
}

bool contraction_by_determinant(const Eigen::Matrix3d& M) {
  if (M.minCoeff() < 0.0)
    throw std::invalid_argument(
        "determinant criterion: matrix must be nonnegative");
  if (M(0, 0) >= 1.0 || M(1, 1) >= 1.0 || M(2, 2) >= 1.0) return false;
  return (Eigen::Matrix3d::Identity() - M).determinant() > 0.0;
}

std::string AnalysisReport::to_text() const {
  std::ostringstream out;
  out.precision(17);
  out << "eta " << eta << "\neta_prime " << eta_prime << "\ntheta_bar "
      << theta_bar << "\nmu " << mu << "\nL " << L << "\nuTv " << uTv
      << "\nsigma_R " << norms.sigma_R << "\nsigma_C " << norms.sigma_C
      << "\ndelta_R2 " << norms.delta_R2 << "\ndelta_C2 " << norms.delta_C2
      << "\ndelta_RC " << norms.delta_RC << "\ndelta_CR " << norms.delta_CR
      << "\nnorms_certified " << (norms.certified ? 1 : 0)
      << "  # surrogate norms: bounds indicative, not certified\n";
  for (int i = 0; i < 11; ++i) out << "c" << i + 1 << " " << c[i] << "\n";
  for (int i = 0; i < 3; ++i) out << "d" << i + 1 << " " << d[i] << "\n";
  out << "A";
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out << ' ' << A(i, j);
  out << "\nb " << b(0) << ' ' << b(1) << ' ' << b(2) << "\n";
  out << "rho_A " << rho_A << "\n";
  out << "eta_max " << stepsize.eta_max << "\nstepsize_terms "
      << stepsize.terms[0] << ' ' << stepsize.terms[1] << ' '
      << stepsize.terms[2] << "\ncap_eta_prime " << stepsize.cap_eta_prime
      << "\ncap_smoothness " << stepsize.cap_smoothness << "\n";
  if (steady_bounds)
    out << "steady_bound_1 " << steady_bounds->first << "\nsteady_bound_2 "
        << steady_bounds->second << "\n";
  else
    out << "steady_bounds unavailable (rho_A >= 1 at this stepsize)\n";
  return out.str();
}

}  // namespace sdpp
