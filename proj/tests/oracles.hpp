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
//
// Test-only oracles, kept independent of the library code paths they check.

#ifndef SDPP_TESTS_ORACLES_HPP
#define SDPP_TESTS_ORACLES_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <set>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sdpp/analysis.hpp"
#include "sdpp/graph.hpp"
#include "sdpp/problem.hpp"
#include "sdpp/rng.hpp"

namespace oracles {

// Central finite-difference gradient of a scalar function.
inline Eigen::VectorXd fd_gradient(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, double h = 1e-6) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index r = 0; r < x.size(); ++r) {
    Eigen::VectorXd hi = x, lo = x;
    hi(r) += h;
    lo(r) -= h;
    g(r) = (f(hi) - f(lo)) / (2.0 * h);
  }
  return g;
}

// Plain gradient-descent minimizer of sum_i f_i for a ridge instance, an
// iterative route independent of the closed-form solve.
inline Eigen::VectorXd gd_minimizer(const sdpp::RidgeInstance& inst,
                                    int max_iters = 2000000,
                                    double grad_tol = 1e-12) {
  const Eigen::MatrixXd H =
      2.0 * (inst.samples.transpose() * inst.samples +
             inst.n * inst.rho_pen *
                 Eigen::MatrixXd::Identity(inst.p, inst.p));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
  const double step = 1.0 / es.eigenvalues().maxCoeff();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(inst.p);
  for (int it = 0; it < max_iters; ++it) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(inst.p);
    for (int i = 0; i < inst.n; ++i) {
      const Eigen::VectorXd u = inst.samples.row(i).transpose();
      g += 2.0 * u * (u.dot(x) - inst.outputs(i)) + 2.0 * inst.rho_pen * x;
    }
    if (g.norm() <= grad_tol) break;
    x -= step * g;
  }
  return x;
}

inline double laplace_cdf(double x, double theta) {
  return x < 0.0 ? 0.5 * std::exp(x / theta)
                 : 1.0 - 0.5 * std::exp(-x / theta);
}

// Kolmogorov-Smirnov statistic against the Laplace(theta) CDF.
inline double ks_statistic(std::vector<double> samples, double theta) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = laplace_cdf(samples[i], theta);
    d = std::max(d, std::abs(f - (static_cast<double>(i) + 1.0) / n));
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
  }
  return d;
}

// Asymptotic KS critical value at the 1% level.
inline double ks_critical_1pct(std::size_t n) {
  return 1.62762 / std::sqrt(static_cast<double>(n));
}

// Ring plus random extra edges: strongly connected, so always a valid
// topology for both weight matrices.
inline sdpp::NetworkTopology random_valid_topology(int n, int extra_edges,
                                                   std::uint64_t seed) {
  sdpp::NetworkTopology topo = sdpp::ring_topology(n);
  sdpp::StreamRng rng(seed, sdpp::StreamRng::Kind::kGeneric, 1001);
  std::set<std::pair<int, int>> have(topo.edges.begin(), topo.edges.end());
  const int available = n * (n - 1) - static_cast<int>(topo.edges.size());
  extra_edges = std::min(extra_edges, available);
  int added = 0;
  while (added < extra_edges) {
    const int send = static_cast<int>(rng.next_u64() % n);
    const int recv = static_cast<int>(rng.next_u64() % n);
    if (send == recv) continue;
    if (!have.insert({recv, send}).second) continue;
    topo.edges.emplace_back(recv, send);
    ++added;
  }
  return sdpp::NetworkTopology::from_edges(n, topo.edges);
}

// A second, deliberately re-derived transcription of the coupling constants
// and the error-system matrices.  Shares nothing with the library path but
// the published formulas.
struct ConstantSet {
  std::array<double, 11> c;
  std::array<double, 3> d;
  Eigen::Matrix3d A;
  Eigen::Vector3d b;
};

inline ConstantSet transcribe_constants_again(const sdpp::WeightSystem& w,
                                              double mu, double L, int p,
                                              const sdpp::NormSurrogates& s,
                                              double theta_bar, double eta) {
  const int n = w.n();
  const Eigen::VectorXd u = w.u();
  const Eigen::VectorXd v = w.v();
  const double a = u.dot(v.head(n));  // alignment scalar u^T T v

  auto norm2 = [](const Eigen::MatrixXd& m) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
    return svd.singularValues()(0);
  };
  Eigen::MatrixXd T(n, 2 * n);
  T << Eigen::MatrixXd::Identity(n, n), Eigen::MatrixXd::Zero(n, n);
  const double uT_sq = (u.transpose() * T).squaredNorm();
  const double Tv_sq = (T * v).squaredNorm();
  const double T_sq = std::pow(norm2(T), 2);
  const double RT_sq = std::pow(norm2(w.R() * T), 2);
  const double Iv_sq = std::pow(
      norm2(Eigen::MatrixXd::Identity(2 * n, 2 * n) -
            v * Eigen::RowVectorXd::Ones(2 * n) / static_cast<double>(n)),
      2);
  const double RI_sq =
      std::pow(norm2(w.R() - Eigen::MatrixXd::Identity(n, n)), 2);
  const double v_sq = v.squaredNorm();

  const double qR = s.sigma_R * s.sigma_R;
  const double qC = s.sigma_C * s.sigma_C;
  const double gapR = 1.0 - qR;
  const double gapC = 1.0 - qC;
  const double dn = static_cast<double>(n);
  const double dp = static_cast<double>(p);

  ConstantSet out;
  out.c[0] = 2.0 * a * L * L / (mu * dn * dn);
  out.c[1] = (2.0 / (a * mu * dn)) * uT_sq;
  out.c[2] = (2.0 * dp / (dn * dn * dn)) * a * a;
  out.c[3] = (8.0 / gapR) * qR * (L * L) * s.delta_R2 * Tv_sq;
  out.c[4] = (8.0 / (gapR * dn)) * qR * (L * L) * s.delta_R2 * Tv_sq;
  out.c[5] = (4.0 / gapR) * qR * s.delta_RC * T_sq;
  out.c[6] = (8.0 / (gapR * dn)) * dp * qR * s.delta_R2 * Tv_sq;
  const double mC = s.delta_C2 * s.delta_C2 * Iv_sq / gapC;
  out.c[7] = 12.0 * mC * (L * L) * (L * L) * RT_sq * v_sq;
  out.c[8] = 2.0 * mC * (3.0 * L * L * RI_sq + (6.0 / dn) * L * L * RT_sq * v_sq);
  out.c[9] = 6.0 * mC * (L * L) * RT_sq;
  out.c[10] = (12.0 / dn) * mC * dp * RT_sq * v_sq;

  out.d[0] = out.c[0] * out.c[5] * out.c[7];
  out.d[1] = out.c[1] * out.c[3] * out.c[8] + 0.5 * gapR * out.c[1] * out.c[7] +
             0.5 * gapC * out.c[0] * out.c[3] +
             (a * mu / dn) * out.c[5] * out.c[8];
  out.d[2] = (a * mu / (18.0 * dn)) * gapR * gapC;

  const double ep = eta * a / dn;
  out.A(0, 0) = 1.0 - ep * mu;
  out.A(0, 1) = out.c[0] * eta;
  out.A(0, 2) = out.c[1] * eta;
  out.A(1, 0) = out.c[3] * eta * eta;
  out.A(1, 1) = 0.5 * (1.0 + qR) + out.c[4] * eta * eta;
  out.A(1, 2) = out.c[5] * eta * eta;
  out.A(2, 0) = out.c[7] * eta * eta;
  out.A(2, 1) = out.c[8];
  out.A(2, 2) = 0.5 * (1.0 + qC) + out.c[9] * eta * eta;
  out.b(0) = out.c[2] * eta * eta * theta_bar * theta_bar;
  out.b(1) = out.c[6] * eta * eta * theta_bar * theta_bar;
  out.b(2) = out.c[10] * theta_bar * theta_bar;
  return out;
}

}  // namespace oracles

#endif  // SDPP_TESTS_ORACLES_HPP
