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

#include "sdpp/problem.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "sdpp/rng.hpp"

namespace sdpp {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

std::uint64_t hash_doubles(std::uint64_t h, const double* data,
                           Eigen::Index count) {
  for (Eigen::Index i = 0; i < count; ++i)
    h = mix64(h ^ std::bit_cast<std::uint64_t>(data[i]));
  return h;
}

// Anchors are evenly placed across [0, 10]^p: agent i sits at
// 10 (i-1)/(n-1) on every coordinate; a single agent sits at the midpoint.
Eigen::MatrixXd make_anchors(int n, int p) {
  Eigen::MatrixXd anchors(n, p);
  for (int i = 0; i < n; ++i) {
    const double level = (n > 1) ? 10.0 * i / (n - 1) : 5.0;
    anchors.row(i).setConstant(level);
  }
  return anchors;
}

constexpr std::uint64_t kPerturbField = 7;

}  // namespace

Eigen::MatrixXd ObjectiveSuite::gradient_matrix(const Eigen::MatrixXd& x) const {
  require(x.rows() == n && x.cols() == p,
          "gradient_matrix: iterate matrix has wrong shape");
  Eigen::MatrixXd g(n, p);
  for (int i = 0; i < n; ++i) g.row(i) = grad[i](x.row(i).transpose());
  return g;
}

void RidgeInstance::save(const std::string& path) const {
  std::ofstream out(path);
  require(out.good(), "ridge save: cannot open '" + path + "'");
  out.precision(17);
  out << "n " << n << "\np " << p << "\nrho_pen " << rho_pen << "\nseed "
      << seed << "\n";
  for (int i = 0; i < n; ++i) {
    out << "agent " << i + 1 << "\nu";
    for (int r = 0; r < p; ++r) out << ' ' << samples(i, r);
    out << "\nv " << outputs(i) << "\nxtilde";
    for (int r = 0; r < p; ++r) out << ' ' << anchors(i, r);
    out << "\ngamma " << noise(i) << "\n";
  }
}

RidgeInstance RidgeInstance::load(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "ridge load: cannot open '" + path + "'");
  RidgeInstance inst;
  std::string key;
  require(static_cast<bool>(in >> key >> inst.n) && key == "n",
          "ridge load: malformed header");
  require(static_cast<bool>(in >> key >> inst.p) && key == "p",
          "ridge load: malformed header");
  require(static_cast<bool>(in >> key >> inst.rho_pen) && key == "rho_pen",
          "ridge load: malformed header");
  require(static_cast<bool>(in >> key >> inst.seed) && key == "seed",
          "ridge load: malformed header");
  inst.samples.resize(inst.n, inst.p);
  inst.outputs.resize(inst.n);
  inst.anchors.resize(inst.n, inst.p);
  inst.noise.resize(inst.n);
  for (int i = 0; i < inst.n; ++i) {
    int idx;
    require(static_cast<bool>(in >> key >> idx) && key == "agent" && idx == i + 1,
            "ridge load: malformed agent block");
    require(static_cast<bool>(in >> key) && key == "u", "ridge load: missing u");
    for (int r = 0; r < inst.p; ++r)
      require(static_cast<bool>(in >> inst.samples(i, r)), "ridge load: short u row");
    require(static_cast<bool>(in >> key >> inst.outputs(i)) && key == "v",
            "ridge load: missing v");
    require(static_cast<bool>(in >> key) && key == "xtilde",
            "ridge load: missing xtilde");
    for (int r = 0; r < inst.p; ++r)
      require(static_cast<bool>(in >> inst.anchors(i, r)), "ridge load: short xtilde row");
    require(static_cast<bool>(in >> key >> inst.noise(i)) && key == "gamma",
            "ridge load: missing gamma");
  }
  return inst;
}

RidgeInstance RidgeInstance::perturb_agent(int i0,
                                           std::uint64_t perturb_seed) const {
  require(i0 >= 0 && i0 < n, "perturb_agent: agent index out of range");
  RidgeInstance out = *this;
  StreamRng rng(perturb_seed, StreamRng::Kind::kGeneric, i0, kPerturbField);
  for (int r = 0; r < p; ++r) out.samples(i0, r) = rng.next_uniform(-1.0, 1.0);
  out.noise(i0) = std::sqrt(5.0) * rng.next_gaussian();
  out.outputs(i0) = out.samples.row(i0).dot(out.anchors.row(i0)) + out.noise(i0);
  return out;
}

std::vector<std::uint64_t> RidgeInstance::fingerprints() const {
  std::vector<std::uint64_t> fp(n);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd u_i = samples.row(i).transpose();
    std::uint64_t acc = mix64(static_cast<std::uint64_t>(p) + kGolden);
    acc = hash_doubles(acc, u_i.data(), u_i.size());
    const double v_i = outputs(i);
    acc = hash_doubles(acc, &v_i, 1);
    acc = hash_doubles(acc, &rho_pen, 1);
    fp[i] = acc;
  }
  return fp;
}

ObjectiveSuite make_ridge_suite(const RidgeInstance& inst) {
  ObjectiveSuite suite;
  suite.n = inst.n;
  suite.p = inst.p;
  suite.mu = 2.0 * inst.rho_pen;
  suite.L = 2.0 * (inst.samples.rowwise().squaredNorm().maxCoeff() + inst.rho_pen);
  suite.grad.reserve(inst.n);
  for (int i = 0; i < inst.n; ++i) {
    Eigen::VectorXd u_i = inst.samples.row(i).transpose();
    const double v_i = inst.outputs(i);
    const double rho = inst.rho_pen;
    suite.grad.push_back([u_i, v_i, rho](const Eigen::VectorXd& x) {
      return Eigen::VectorXd(2.0 * u_i * (u_i.dot(x) - v_i) + 2.0 * rho * x);
    });
  }
  suite.x_star = closed_form_optimum(inst);
  suite.fingerprints = inst.fingerprints();
  return suite;
}

std::pair<RidgeInstance, ObjectiveSuite> generate_ridge(int n, int p,
                                                        double rho_pen,
                                                        std::uint64_t seed) {
  require(n >= 1 && p >= 1, "generate_ridge: n and p must be positive");
  require(rho_pen > 0.0, "generate_ridge: penalty must be positive");
  RidgeInstance inst;
  inst.n = n;
  inst.p = p;
  inst.rho_pen = rho_pen;
  inst.seed = seed;
  inst.samples.resize(n, p);
  inst.anchors = make_anchors(n, p);
  inst.outputs.resize(n);
  inst.noise.resize(n);
  for (int i = 0; i < n; ++i) {
    StreamRng feature_rng = problem_stream(seed, i, 0);
    for (int r = 0; r < p; ++r)
      inst.samples(i, r) = feature_rng.next_uniform(-1.0, 1.0);
    StreamRng noise_rng = problem_stream(seed, i, 1);
    inst.noise(i) = std::sqrt(5.0) * noise_rng.next_gaussian();
    inst.outputs(i) =
        inst.samples.row(i).dot(inst.anchors.row(i)) + inst.noise(i);
  }
  ObjectiveSuite suite = make_ridge_suite(inst);
  return {std::move(inst), std::move(suite)};
}

namespace {

Eigen::MatrixXd foc_matrix(const RidgeInstance& inst) {
  return inst.samples.transpose() * inst.samples +
         inst.n * inst.rho_pen *
             Eigen::MatrixXd::Identity(inst.p, inst.p);
}

}  // namespace

Eigen::VectorXd closed_form_optimum(const RidgeInstance& inst) {
  Eigen::LDLT<Eigen::MatrixXd> solver(foc_matrix(inst));
  require(solver.info() == Eigen::Success && solver.isPositive(),
          "closed_form_optimum: normal matrix not positive definite");
  Eigen::VectorXd rhs = inst.samples.transpose() * inst.outputs;
  Eigen::VectorXd x = solver.solve(rhs);

  // First-order condition check: the stationarity residual of sum_i f_i.
  Eigen::VectorXd grad_sum = Eigen::VectorXd::Zero(inst.p);
  for (int i = 0; i < inst.n; ++i) {
    Eigen::VectorXd u_i = inst.samples.row(i).transpose();
    grad_sum += 2.0 * u_i * (u_i.dot(x) - inst.outputs(i)) +
                2.0 * inst.rho_pen * x;
  }
  const double L = 2.0 * (inst.samples.rowwise().squaredNorm().maxCoeff() +
                          inst.rho_pen);
  const double budget = 1e-9 * inst.n * L * (1.0 + x.norm());
  if (grad_sum.norm() > budget)
    throw std::runtime_error(
        "closed_form_optimum: first-order-condition residual exceeds budget");
  return x;
}

Eigen::VectorXd anchor_form_optimum(const RidgeInstance& inst) {
  Eigen::LDLT<Eigen::MatrixXd> solver(foc_matrix(inst));
  require(solver.info() == Eigen::Success && solver.isPositive(),
          "anchor_form_optimum: normal matrix not positive definite");
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(inst.p);
  for (int i = 0; i < inst.n; ++i) {
    Eigen::VectorXd u_i = inst.samples.row(i).transpose();
    rhs += u_i * u_i.dot(inst.anchors.row(i));
  }
  return solver.solve(rhs);
}

double estimate_gradient_bound(const ObjectiveSuite& suite,
                               const std::vector<Eigen::MatrixXd>& iterates,
                               double safety_factor) {
  require(!iterates.empty(), "estimate_gradient_bound: empty trajectory");
  require(safety_factor > 0.0,
          "estimate_gradient_bound: safety factor must be positive");
  double worst = 0.0;
  for (const auto& x : iterates) {
    const Eigen::MatrixXd g = suite.gradient_matrix(x);
    worst = std::max(worst, g.rowwise().norm().maxCoeff());
  }
  return safety_factor * worst;
}

}  // namespace sdpp
