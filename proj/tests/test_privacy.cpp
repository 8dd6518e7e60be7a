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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vector>

#include "oracles.hpp"
#include "sdpp/engine.hpp"
#include "sdpp/privacy.hpp"

using namespace sdpp;

TEST_CASE("calibration formula and strictness") {
  SUBCASE("boundary slack is rejected as non-strict") {
    CHECK_THROWS(calibrate(Eigen::VectorXd::Constant(1, 1.0), 10, 1.0, 1, 0.0));
  }
  SUBCASE("default slack sits just above the threshold") {
    PrivacyBudget b = calibrate(Eigen::VectorXd::Constant(1, 1.0), 10, 1.0, 1);
    CHECK(b.theta(0) == doctest::Approx(20.0 * (1.0 + 1e-6)).epsilon(1e-14));
    CHECK(b.theta(0) > 2.0 * 1.0 * 1.0 * 10.0 / 1.0);
  }
  SUBCASE("direct evaluation") {
    PrivacyBudget b =
        calibrate(Eigen::VectorXd::Constant(1, 10.0), 5, 2.0, 4, 0.25);
    CHECK(b.theta(0) == doctest::Approx(1.25 * 4.0).epsilon(1e-14));
  }
  SUBCASE("noise vanishes as the privacy requirement vanishes") {
    PrivacyBudget b =
        calibrate(Eigen::VectorXd::Constant(1, 1e12), 10, 1.0, 1);
    CHECK(b.theta(0) > 0.0);
    CHECK(b.theta(0) < 1e-10);
  }
  SUBCASE("invalid inputs") {
    CHECK_THROWS(calibrate(Eigen::VectorXd::Constant(1, 0.0), 10, 1.0, 1));
    CHECK_THROWS(calibrate(Eigen::VectorXd::Constant(1, -1.0), 10, 1.0, 1));
    CHECK_THROWS(calibrate(Eigen::VectorXd::Constant(1, 1.0), 10, 0.0, 1));
    CHECK_THROWS(calibrate(Eigen::VectorXd::Constant(1, 1.0), 0, 1.0, 1));
  }
}

TEST_CASE("calibration monotonicity") {
  auto theta = [](double eps, int K, double C, int p) {
    return calibrate(Eigen::VectorXd::Constant(1, eps), K, C, p).theta(0);
  };
  CHECK(theta(2.0, 10, 1.0, 4) < theta(1.0, 10, 1.0, 4));
  CHECK(theta(1.0, 20, 1.0, 4) > theta(1.0, 10, 1.0, 4));
  CHECK(theta(1.0, 10, 2.0, 4) > theta(1.0, 10, 1.0, 4));
  CHECK(theta(1.0, 10, 1.0, 9) > theta(1.0, 10, 1.0, 4));
  // Per-agent budgets calibrate independently.
  Eigen::VectorXd eps(3);
  eps << 1.0, 5.0, 10.0;
  PrivacyBudget b = calibrate(eps, 10, 1.0, 4);
  CHECK(b.theta(0) > b.theta(1));
  CHECK(b.theta(1) > b.theta(2));
  CHECK(b.theta_bar() == b.theta(0));
}

TEST_CASE("Laplace inverse CDF") {
  CHECK(laplace_icdf(0.0, 3.0) == 0.0);
  CHECK(laplace_icdf(0.25, 1.0) == doctest::Approx(-std::log(0.5)));
  CHECK(laplace_icdf(-0.25, 1.0) == doctest::Approx(std::log(0.5)));
  // Median symmetry: icdf(w) = -icdf(-w).
  for (double w : {0.1, 0.3, 0.49}) {
    CHECK(laplace_icdf(w, 2.0) == doctest::Approx(-laplace_icdf(-w, 2.0)));
  }
  CHECK_THROWS(laplace_icdf(0.2, 0.0));
  CHECK_THROWS(laplace_icdf(0.5, 1.0));
}

TEST_CASE("Laplace sampling statistics") {
  const std::size_t N = 200000;
  for (double theta : {0.5, 2.0}) {
    StreamRng rng(101, StreamRng::Kind::kGeneric, 8,
                  static_cast<std::uint64_t>(theta * 2));
    std::vector<double> samples(N);
    double sum = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      samples[i] = sample_laplace(theta, rng);
      sum += samples[i];
      sq += samples[i] * samples[i];
    }
    const double mean = sum / N;
    const double var = sq / N - mean * mean;
    CHECK(std::abs(mean) <= 0.02 * theta);
    CHECK(std::abs(var - 2.0 * theta * theta) <= 0.05 * 2.0 * theta * theta);
    CHECK(oracles::ks_statistic(samples, theta) <=
          oracles::ks_critical_1pct(N));
  }
}

TEST_CASE("stream determinism is bit-exact") {
  SUBCASE("frozen mirror values") {
    StreamRng a(42, StreamRng::Kind::kGeneric, 1, 2, 3);
    CHECK(a.next_u64() == 7646707126174882279ull);
    CHECK(a.next_u64() == 4226795510174378582ull);
    CHECK(a.next_u64() == 4677533378479929161ull);
    StreamRng b(42, StreamRng::Kind::kGeneric, 1, 2, 3);
    CHECK(b.next_unit_open() == 0.4145288239279598);
    CHECK(b.next_unit_open() == 0.2291350437391519);
    CHECK(b.next_unit_open() == 0.25356959254107);
    StreamRng c = noise_stream(7, 0, 2, 5);
    CHECK(c.next_unit_open() == 0.30462461967651583);
  }
  SUBCASE("identical keys give identical Laplace draws") {
    for (int trial = 0; trial < 16; ++trial) {
      StreamRng a = noise_stream(9, trial % 2, trial % 3, trial);
      StreamRng b = noise_stream(9, trial % 2, trial % 3, trial);
      for (int i = 0; i < 8; ++i) {
        const double x = sample_laplace(1.5, a);
        const double y = sample_laplace(1.5, b);
        CHECK(x == y);
      }
    }
  }
  SUBCASE("distinct agents and iterations give distinct streams") {
    StreamRng a = noise_stream(9, 0, 1, 5);
    StreamRng b = noise_stream(9, 0, 2, 5);
    StreamRng c = noise_stream(9, 0, 1, 6);
    const double xa = a.next_unit_open();
    CHECK(xa != b.next_unit_open());
    CHECK(xa != c.next_unit_open());
  }
}

TEST_CASE("mean injected noise obeys the aggregate variance bound") {
  // Sample mean of ||(1/n) 1^T xi_k||^2 over M iterations stays within
  // (1 + 3/sqrt(M)) of 2 p theta_bar^2 / n.
  const int n = 5, p = 10, M = 10000;
  Eigen::VectorXd theta(n);
  theta << 2.0, 1.5, 1.0, 0.8, 1.9;
  PrivacyBudget budget;
  budget.epsilon = Eigen::VectorXd::Ones(n);
  budget.horizon = M;
  budget.gradient_bound = 1.0;
  budget.p = p;
  budget.slack = 1e-6;
  budget.theta = theta;
  NoiseSource noise(budget, 31, 0);
  double acc = 0.0;
  for (int k = 0; k < M; ++k) {
    Eigen::RowVectorXd mean_noise = Eigen::RowVectorXd::Zero(p);
    for (int i = 0; i < n; ++i)
      mean_noise += noise.draw(i, k).transpose() / n;
    acc += mean_noise.squaredNorm();
  }
  const double theta_bar = theta.maxCoeff();
  const double bound = 2.0 * p * theta_bar * theta_bar / n;
  CHECK(acc / M <= bound * (1.0 + 3.0 / std::sqrt(static_cast<double>(M))));
}

TEST_CASE("sensitivity verification") {
  SUBCASE("identical function sets give a zero deviation") {
    GradientRecord rec;
    rec.seed = 5;
    rec.x0 = Eigen::MatrixXd::Zero(2, 3);
    rec.fingerprints = {11, 22};
    rec.gradients.assign(4, Eigen::MatrixXd::Ones(2, 3));
    SensitivityReport report = verify_sensitivity(rec, rec, 0.5, 4);
    CHECK(report.i0 == -1);
    CHECK(report.delta_xi_l1 == 0.0);
    CHECK(report.within_bound);
  }
  SUBCASE("hand-unrolled three-step recursion") {
    // df_t = [2, 0] each step, beta = 0.5:
    //   dy_1 = df_0, dy_2 = 1.5 df_0, dy_3 = 1.75 df_0,
    //   sum ||dxi||_1 = 0.5 (2 + 3 + 3.5) = 4.25,
    //   C = 2 and the bound is 2 sqrt(2) * 2 * 3.
    GradientRecord a, b;
    a.seed = b.seed = 1;
    a.x0 = b.x0 = Eigen::MatrixXd::Zero(1, 2);
    a.fingerprints = {111};
    b.fingerprints = {222};
    Eigen::MatrixXd ga(1, 2), gb(1, 2);
    ga << 2.0, 0.0;
    gb << 0.0, 0.0;
    a.gradients.assign(3, ga);
    b.gradients.assign(3, gb);
    SensitivityReport report = verify_sensitivity(a, b, 0.5, 3);
    CHECK(report.i0 == 0);
    CHECK(report.delta_xi_l1 == doctest::Approx(4.25).epsilon(1e-15));
    CHECK(report.gradient_bound == doctest::Approx(2.0));
    CHECK(report.bound ==
          doctest::Approx(2.0 * std::sqrt(2.0) * 2.0 * 3.0).epsilon(1e-15));
    CHECK(report.within_bound);
  }
  SUBCASE("non-adjacent records are rejected") {
    GradientRecord a, b;
    a.seed = b.seed = 1;
    a.x0 = b.x0 = Eigen::MatrixXd::Zero(3, 1);
    a.fingerprints = {1, 2, 3};
    b.fingerprints = {9, 2, 8};
    a.gradients.assign(2, Eigen::MatrixXd::Zero(3, 1));
    b.gradients.assign(2, Eigen::MatrixXd::Zero(3, 1));
    CHECK_THROWS(verify_sensitivity(a, b, 0.5, 2));
  }
  SUBCASE("mismatched seeds or initializations are rejected") {
    GradientRecord a, b;
    a.seed = 1;
    b.seed = 2;
    a.x0 = b.x0 = Eigen::MatrixXd::Zero(1, 1);
    a.fingerprints = b.fingerprints = {5};
    a.gradients.assign(2, Eigen::MatrixXd::Zero(1, 1));
    b.gradients.assign(2, Eigen::MatrixXd::Zero(1, 1));
    CHECK_THROWS(verify_sensitivity(a, b, 0.5, 2));
    b.seed = 1;
    b.x0 = Eigen::MatrixXd::Ones(1, 1);
    CHECK_THROWS(verify_sensitivity(a, b, 0.5, 2));
  }
  SUBCASE("replayed adjacent ridge runs stay within the bound") {
    auto [inst, suite] = generate_ridge(5, 10, 0.01, 40);
    RidgeInstance other = inst.perturb_agent(3, 41);
    ObjectiveSuite suite2 = make_ridge_suite(other);
    WeightSystem w = WeightSystem::build(sec6_topology());
    RunOptions opt;
    opt.eta = 0.01;
    opt.horizon = 50;
    opt.seed = 40;
    opt.record_gradients = true;
    Trace t1 = run(w, suite, opt);
    Trace t2 = run(w, suite2, opt);
    SensitivityReport report = verify_sensitivity(
        t1.adjacency_record(), t2.adjacency_record(), w.beta()(3), 50);
    CHECK(report.i0 == 3);
    CHECK(report.within_bound);
    CHECK(report.delta_xi_l1 < report.bound);
    CHECK(report.delta_xi_l1 > 0.0);
  }
}
