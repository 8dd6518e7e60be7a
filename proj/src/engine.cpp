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

#include "sdpp/engine.hpp"

#include <chrono>
#include <stdexcept>
#include <string>

namespace sdpp {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

Eigen::MatrixXd make_x0(const RunOptions& opt, int n, int p) {
  switch (opt.init) {
    case InitKind::kZero:
      return Eigen::MatrixXd::Zero(n, p);
    case InitKind::kGiven:
      require(opt.x0.rows() == n && opt.x0.cols() == p,
              "run: supplied x0 has wrong shape");
      return opt.x0;
    case InitKind::kUniform01: {
      const std::uint64_t init_replica =
          opt.vary_init_across_replicas ? static_cast<std::uint64_t>(opt.replica)
                                        : 0;
      Eigen::MatrixXd x(n, p);
      for (int i = 0; i < n; ++i) {
        StreamRng rng = init_stream(opt.seed, init_replica, i);
        for (int r = 0; r < p; ++r) x(i, r) = rng.next_unit_open();
      }
      return x;
    }
  }
  throw std::logic_error("run: unknown initialization kind");
}

void check_finite(const RunState& s, const char* who) {
  if (s.x.allFinite() && s.y_alpha.allFinite() && s.y_beta.allFinite()) return;
  std::string what(who);
  what += ": non-finite state at iteration " + std::to_string(s.k);
  if (!s.x.allFinite()) what += " [x]";
  if (!s.y_alpha.allFinite()) what += " [y_alpha]";
  if (!s.y_beta.allFinite()) what += " [y_beta]";
  what += "; the stepsize or noise scale is too large for this instance";
  throw std::runtime_error(what);
}

void log_observations(ObservationLog* log, const WeightSystem& w,
                      const RunState& before, const Eigen::MatrixXd& pulled) {
  if (!log) return;
  const int n = w.n();
  for (int sender = 0; sender < n; ++sender) {
    for (int receiver = 0; receiver < n; ++receiver) {
      if (receiver == sender) continue;
      const bool pull_edge = w.R()(receiver, sender) > 0.0;
      const bool push_edge = w.Ctilde()(receiver, sender) > 0.0;
      if (!pull_edge && !push_edge) continue;
      ObservationLog::Entry entry;
      entry.iteration = before.k;
      entry.receiver = receiver;
      entry.sender = sender;
      if (pull_edge) entry.pulled = pulled.row(sender).transpose();
      if (push_edge)
        entry.pushed =
            (w.Ctilde()(receiver, sender) * before.y_alpha.row(sender))
                .transpose();
      log->entries.push_back(std::move(entry));
    }
  }
}

struct MetricsScratch {
  Eigen::VectorXd denom;  // ||x_{i,0} - x*||^2 per agent
};

double residual_at(const Eigen::MatrixXd& x, const Eigen::VectorXd& x_star,
                   const MetricsScratch& scratch) {
  const int n = static_cast<int>(x.rows());
  double acc = 0.0;
  for (int i = 0; i < n; ++i)
    acc += (x.row(i).transpose() - x_star).squaredNorm() / scratch.denom(i);
  return acc / n;
}

double consensus_at(const Eigen::MatrixXd& x, const Eigen::VectorXd& u) {
  const Eigen::RowVectorXd xbar = u.transpose() * x / u.size();
  return (x.rowwise() - xbar).norm();
}

}  // namespace

NoiseSource::NoiseSource(const PrivacyBudget& budget, std::uint64_t seed,
                         int replica)
    : theta_(budget.theta), seed_(seed), replica_(replica), p_(budget.p) {
  if (theta_.size() && theta_.minCoeff() <= 0.0)
    throw std::invalid_argument("noise source: Laplace scales must be positive");
}

Eigen::VectorXd NoiseSource::draw(int agent, long iteration) const {
  Eigen::VectorXd xi = Eigen::VectorXd::Zero(p_);
  if (!active()) return xi;
  StreamRng rng = noise_stream(seed_, replica_, agent, iteration);
  const double theta = theta_(agent);
  for (int r = 0; r < p_; ++r) xi(r) = sample_laplace(theta, rng);
  return xi;
}

void step_agentwise(RunState& state, const WeightSystem& weights,
                    const ObjectiveSuite& suite, const NoiseSource& noise,
                    StepRecord* record, ObservationLog* log) {
  const int n = weights.n();
  const int p = suite.p;
  require(state.x.rows() == n && state.x.cols() == p,
          "step: state dimensions disagree with the problem");
  require(state.eta > 0.0, "step: stepsize must be positive");

  Eigen::MatrixXd grad = suite.gradient_matrix(state.x);
  Eigen::MatrixXd xi = Eigen::MatrixXd::Zero(n, p);
  if (noise.active())
    for (int i = 0; i < n; ++i) xi.row(i) = noise.draw(i, state.k).transpose();

  const Eigen::MatrixXd& Ct = weights.Ctilde();
  const Eigen::VectorXd& alpha = weights.alpha();
  const Eigen::VectorXd& beta = weights.beta();

  Eigen::MatrixXd y_alpha_next(n, p);
  Eigen::MatrixXd y_beta_next(n, p);
  for (int i = 0; i < n; ++i) {
    Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(p);
    for (int j = 0; j < n; ++j)
      if (Ct(i, j) != 0.0) acc += Ct(i, j) * state.y_alpha.row(j);
    y_alpha_next.row(i) =
        acc + (1.0 - beta(i)) * state.y_beta.row(i) + xi.row(i);
    y_beta_next.row(i) = alpha(i) * state.y_alpha.row(i) +
                         beta(i) * state.y_beta.row(i) + grad.row(i);
  }

  // Pulled payload of sender j: x_j - eta (y^a_{j,k+1} - y^a_{j,k}).
  Eigen::MatrixXd pulled =
      state.x - state.eta * (y_alpha_next - state.y_alpha);
  Eigen::MatrixXd x_next(n, p);
  const Eigen::MatrixXd& R = weights.R();
  for (int i = 0; i < n; ++i) {
    Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(p);
    for (int j = 0; j < n; ++j)
      if (R(i, j) != 0.0) acc += R(i, j) * pulled.row(j);
    x_next.row(i) = acc;
  }

  log_observations(log, weights, state, pulled);
  if (record) {
    record->gradient = std::move(grad);
    record->noise = std::move(xi);
  }
  state.prev_y_alpha = std::move(state.y_alpha);
  state.y_alpha = std::move(y_alpha_next);
  state.y_beta = std::move(y_beta_next);
  state.x = std::move(x_next);
  state.k += 1;
  check_finite(state, "step_agentwise");
}

void step_matrix(RunState& state, const WeightSystem& weights,
                 const ObjectiveSuite& suite, const NoiseSource& noise,
                 StepRecord* record, ObservationLog* log) {
  const int n = weights.n();
  const int p = suite.p;
  require(state.x.rows() == n && state.x.cols() == p,
          "step: state dimensions disagree with the problem");
  require(state.eta > 0.0, "step: stepsize must be positive");

  Eigen::MatrixXd grad = suite.gradient_matrix(state.x);
  Eigen::MatrixXd xi = Eigen::MatrixXd::Zero(n, p);
  if (noise.active())
    for (int i = 0; i < n; ++i) xi.row(i) = noise.draw(i, state.k).transpose();

  Eigen::MatrixXd y(2 * n, p);
  y.topRows(n) = state.y_alpha;
  y.bottomRows(n) = state.y_beta;
  Eigen::MatrixXd g_tilde(2 * n, p);
  g_tilde.topRows(n) = xi;
  g_tilde.bottomRows(n) = grad;

  Eigen::MatrixXd y_next = weights.C() * y + g_tilde;
  Eigen::MatrixXd pulled =
      state.x - state.eta * (y_next.topRows(n) - state.y_alpha);
  Eigen::MatrixXd x_next = weights.R() * pulled;

  log_observations(log, weights, state, pulled);
  if (record) {
    record->gradient = std::move(grad);
    record->noise = std::move(xi);
  }
  state.prev_y_alpha = std::move(state.y_alpha);
  state.y_alpha = y_next.topRows(n);
  state.y_beta = y_next.bottomRows(n);
  state.x = std::move(x_next);
  state.k += 1;
  check_finite(state, "step_matrix");
}

GradientRecord Trace::adjacency_record() const {
  GradientRecord record;
  record.seed = seed;
  record.x0 = x0;
  record.beta = beta;
  record.gradients = gradients;
  record.fingerprints = fingerprints;
  return record;
}

Trace run(const WeightSystem& weights, const ObjectiveSuite& suite,
          const RunOptions& opt, const PrivacyBudget* budget) {
  require(weights.validated(),
          "run: weight system failed validation: the pull and push graphs "
          "must each contain a spanning tree with a common root");
  require(suite.n == weights.n(), "run: suite and weights disagree on n");
  require(suite.x_star.size() == suite.p,
          "run: the objective suite must carry a reference optimum");
  require(opt.eta > 0.0, "run: stepsize must be positive");
  require(opt.horizon >= 0, "run: horizon must be nonnegative");
  if (budget) {
    require(budget->p == suite.p, "run: budget dimension disagrees");
    require(budget->theta.size() == suite.n,
            "run: budget must carry one scale per agent");
  }

  const int n = suite.n;
  const int p = suite.p;
  const int K = opt.horizon;
  const auto t_start = std::chrono::steady_clock::now();

  RunState state;
  state.x = make_x0(opt, n, p);
  state.y_alpha = Eigen::MatrixXd::Zero(n, p);
  state.y_beta = Eigen::MatrixXd::Zero(n, p);
  state.prev_y_alpha = Eigen::MatrixXd::Zero(n, p);
  state.eta = opt.eta;

  MetricsScratch scratch;
  scratch.denom.resize(n);
  for (int i = 0; i < n; ++i) {
    scratch.denom(i) = (state.x.row(i).transpose() - suite.x_star).squaredNorm();
    if (scratch.denom(i) == 0.0)
      throw std::invalid_argument(
          "run: agent " + std::to_string(i + 1) +
          " starts exactly at the optimum; the normalized residual is "
          "undefined; perturb the initialization or choose another seed");
  }

  NoiseSource noise =
      budget ? NoiseSource(*budget, opt.seed, opt.replica) : NoiseSource();

  Trace trace;
  trace.eta = opt.eta;
  trace.horizon = K;
  trace.seed = opt.seed;
  trace.replica = opt.replica;
  trace.x0 = state.x;
  trace.beta = weights.beta();
  trace.fingerprints = suite.fingerprints;
  trace.residual.resize(K + 1);
  trace.consensus_error.resize(K + 1);
  trace.tracking_error = Eigen::VectorXd::Zero(K + 1);
  if (opt.record_gradients) trace.gradients.reserve(K);
  if (opt.record_noise) trace.noise.reserve(K);
  if (opt.record_iterates) trace.iterates.reserve(K + 1);

  trace.residual(0) = residual_at(state.x, suite.x_star, scratch);
  trace.consensus_error(0) = consensus_at(state.x, weights.u());
  if (opt.record_iterates) trace.iterates.push_back(state.x);

  ObservationLog* log = opt.record_observations ? &trace.observations : nullptr;

  for (int k = 0; k < K; ++k) {
    const Eigen::RowVectorXd sum_y_before =
        state.y_alpha.colwise().sum() + state.y_beta.colwise().sum();
    StepRecord record;
    if (opt.stepper == StepKind::kAgentwise)
      step_agentwise(state, weights, suite, noise, &record, log);
    else
      step_matrix(state, weights, suite, noise, &record, log);

    // Tracker-sum identity: the mean increment of the stacked tracker must
    // equal the mean gradient plus the mean noise injected this step.
    const Eigen::RowVectorXd sum_y_after =
        state.y_alpha.colwise().sum() + state.y_beta.colwise().sum();
    const Eigen::RowVectorXd lhs = (sum_y_after - sum_y_before) / n;
    const Eigen::RowVectorXd rhs =
        (record.gradient.colwise().sum() + record.noise.colwise().sum()) / n;
    trace.tracking_error(k) = (lhs - rhs).lpNorm<Eigen::Infinity>();

    trace.residual(k + 1) = residual_at(state.x, suite.x_star, scratch);
    trace.consensus_error(k + 1) = consensus_at(state.x, weights.u());
    if (opt.record_gradients) trace.gradients.push_back(std::move(record.gradient));
    if (opt.record_noise) trace.noise.push_back(std::move(record.noise));
    if (opt.record_iterates) trace.iterates.push_back(state.x);
  }

  trace.x_final = state.x;
  trace.wallclock_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  return trace;
}

BaselineWeights build_baseline_weights(const NetworkTopology& topo, double c_R,
                                       double c_C) {
  BaselineWeights w;
  w.R = build_pull_matrix(topo, c_R);
  w.C_push = build_push_matrix(topo, c_C);
  w.trees = check_spanning_trees(w.R, w.C_push);
  if (w.trees.pass()) w.u = left_eigenvector_u(w.R);
  return w;
}

Trace run_baseline_push_pull(const BaselineWeights& weights,
                             const ObjectiveSuite& suite,
                             const RunOptions& opt) {
  require(weights.trees.pass(),
          "baseline: weight pair failed validation: the pull and push "
          "graphs must each contain a spanning tree with a common root");
  require(suite.n == static_cast<int>(weights.R.rows()),
          "baseline: suite and weights disagree on n");
  require(suite.x_star.size() == suite.p,
          "baseline: the objective suite must carry a reference optimum");
  require(opt.eta > 0.0, "baseline: stepsize must be positive");
  require(opt.horizon >= 0, "baseline: horizon must be nonnegative");

  const int n = suite.n;
  const int p = suite.p;
  const int K = opt.horizon;
  const auto t_start = std::chrono::steady_clock::now();

  Eigen::MatrixXd x = make_x0(opt, n, p);
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(n, p);

  MetricsScratch scratch;
  scratch.denom.resize(n);
  for (int i = 0; i < n; ++i) {
    scratch.denom(i) = (x.row(i).transpose() - suite.x_star).squaredNorm();
    if (scratch.denom(i) == 0.0)
      throw std::invalid_argument(
          "baseline: agent " + std::to_string(i + 1) +
          " starts exactly at the optimum; perturb the initialization");
  }

  Trace trace;
  trace.eta = opt.eta;
  trace.horizon = K;
  trace.seed = opt.seed;
  trace.replica = opt.replica;
  trace.x0 = x;
  trace.fingerprints = suite.fingerprints;
  trace.residual.resize(K + 1);
  trace.consensus_error.resize(K + 1);
  trace.tracking_error = Eigen::VectorXd::Zero(K + 1);
  if (opt.record_iterates) trace.iterates.reserve(K + 1);

  trace.residual(0) = residual_at(x, suite.x_star, scratch);
  trace.consensus_error(0) = consensus_at(x, weights.u);
  if (opt.record_iterates) trace.iterates.push_back(x);

  for (int k = 0; k < K; ++k) {
    const Eigen::MatrixXd grad = suite.gradient_matrix(x);
    const Eigen::RowVectorXd sum_y_before = y.colwise().sum();
    Eigen::MatrixXd y_next = weights.C_push * y + grad;
    x = weights.R * (x - opt.eta * (y_next - y));
    y = std::move(y_next);
    if (!x.allFinite() || !y.allFinite())
      throw std::runtime_error(
          "baseline: non-finite state at iteration " + std::to_string(k) +
          "; the stepsize is too large for this instance");

    const Eigen::RowVectorXd lhs = (y.colwise().sum() - sum_y_before) / n;
    const Eigen::RowVectorXd rhs = grad.colwise().sum() / n;
    trace.tracking_error(k) = (lhs - rhs).lpNorm<Eigen::Infinity>();
    trace.residual(k + 1) = residual_at(x, suite.x_star, scratch);
    trace.consensus_error(k + 1) = consensus_at(x, weights.u);
    if (opt.record_iterates) trace.iterates.push_back(x);
  }

  trace.x_final = x;
  trace.wallclock_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  return trace;
}

}  // namespace sdpp
