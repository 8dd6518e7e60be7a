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

#include "sdpp/graph.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace sdpp {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

std::vector<int> sorted_unique(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

// Nodes reachable from `root` over `adj`.
int reachable_count(const std::vector<std::vector<int>>& adj, int root) {
  std::vector<char> seen(adj.size(), 0);
  std::deque<int> queue{root};
  seen[root] = 1;
  int count = 1;
  while (!queue.empty()) {
    const int x = queue.front();
    queue.pop_front();
    for (int y : adj[x]) {
      if (!seen[y]) {
        seen[y] = 1;
        ++count;
        queue.push_back(y);
      }
    }
  }
  return count;
}

Eigen::VectorXd power_iteration(const Eigen::MatrixXd& M, int sum_target,
                                const PowerIterationOptions& opts,
                                const Eigen::VectorXd* init,
                                const char* what) {
  const Eigen::Index m = M.rows();
  Eigen::VectorXd w = init ? *init : Eigen::VectorXd::Ones(m);
  require(w.size() == m, std::string(what) + ": init vector has wrong size");
  require(w.minCoeff() >= 0.0 && w.sum() > 0.0,
          std::string(what) + ": init vector must be nonnegative with positive sum");
  w *= static_cast<double>(sum_target) / w.sum();
  for (int it = 0; it < opts.max_iterations; ++it) {
    Eigen::VectorXd next = M * w;
    const double residual = (next - w).lpNorm<Eigen::Infinity>();
    next *= static_cast<double>(sum_target) / next.sum();
    w = next;
    if (residual <= opts.tolerance) {
      const double final_residual = (M * w - w).lpNorm<Eigen::Infinity>();
      if (final_residual > 1e-12)
        throw std::runtime_error(std::string(what) +
                                 ": eigenvector residual above 1e-12 after convergence");
      return w;
    }
  }
  throw std::runtime_error(std::string(what) +
                           ": power iteration hit the iteration cap "
                           "(near-degenerate spectrum)");
}

}  // namespace

NetworkTopology NetworkTopology::from_edges(
    int n, std::vector<std::pair<int, int>> edges) {
  require(n >= 1, "topology: agent count must be positive");
  std::set<std::pair<int, int>> seen;
  for (const auto& [recv, send] : edges) {
    require(recv >= 0 && recv < n && send >= 0 && send < n,
            "topology: edge references an agent outside [1, n]");
    require(recv != send, "topology: self-loop edges are not stored");
    require(seen.insert({recv, send}).second, "topology: duplicate edge");
  }
  NetworkTopology topo;
  topo.n = n;
  topo.edges = std::move(edges);
  return topo;
}

NetworkTopology NetworkTopology::parse(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int n = -1;
  std::vector<std::pair<int, int>> edges;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    if (n < 0) {
      if (fields >> n) {
        require(n >= 1, "topology: agent count must be positive");
        int extra;
        require(!(fields >> extra), "topology: header line must contain only n");
      }
      continue;
    }
    int recv, send;
    if (!(fields >> recv)) continue;  // blank or comment-only line
    require(static_cast<bool>(fields >> send),
            "topology: malformed edge at line " + std::to_string(lineno));
    int extra;
    require(!(fields >> extra),
            "topology: trailing tokens at line " + std::to_string(lineno));
    edges.emplace_back(recv - 1, send - 1);  // file is 1-based
  }
  require(n >= 1, "topology: missing agent count header");
  return from_edges(n, std::move(edges));
}

NetworkTopology NetworkTopology::load(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "topology: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::vector<std::vector<int>> NetworkTopology::in_neighbors() const {
  std::vector<std::vector<int>> nb(n);
  for (const auto& [recv, send] : edges) nb[recv].push_back(send);
  for (auto& v : nb) v = sorted_unique(std::move(v));
  return nb;
}

std::vector<std::vector<int>> NetworkTopology::out_neighbors() const {
  std::vector<std::vector<int>> nb(n);
  for (const auto& [recv, send] : edges) nb[send].push_back(recv);
  for (auto& v : nb) v = sorted_unique(std::move(v));
  return nb;
}

NetworkTopology ring_topology(int n) {
  require(n >= 2, "ring topology needs at least two agents");
  std::vector<std::pair<int, int>> edges;
  edges.reserve(n);
  for (int i = 0; i < n; ++i) edges.emplace_back((i + 1) % n, i);
  return NetworkTopology::from_edges(n, std::move(edges));
}

NetworkTopology sec6_topology() {
  auto topo = ring_topology(5);
  topo.edges.emplace_back(2, 0);  // chord 0 -> 2
  topo.edges.emplace_back(4, 2);  // chord 2 -> 4
  return NetworkTopology::from_edges(5, topo.edges);
}

Eigen::MatrixXd build_pull_matrix(const NetworkTopology& topo, double c_R) {
  require(c_R > 0.0, "build_pull_matrix: c_R must be positive");
  const int n = topo.n;
  const auto in_nb = topo.in_neighbors();
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const double w = 1.0 / (static_cast<double>(in_nb[i].size()) + c_R);
    double off = 0.0;
    for (int j : in_nb[i]) {
      R(i, j) = w;
      off += w;
    }
    R(i, i) = 1.0 - off;
  }
  return R;
}

PushSystem build_push_system(const NetworkTopology& topo, double zeta,
                             double c_C, const Eigen::VectorXd& beta) {
  require(zeta > 0.0 && zeta < 1.0, "build_push_system: zeta must lie in (0,1)");
  require(c_C > 0.0, "build_push_system: c_C must be positive");
  const int n = topo.n;
  Eigen::VectorXd b = beta.size() ? beta : Eigen::VectorXd::Constant(n, 0.5);
  require(b.size() == n, "build_push_system: beta has wrong length");
  require(b.minCoeff() > 0.0 && b.maxCoeff() < 1.0,
          "build_push_system: beta entries must lie in (0,1)");

  const auto out_nb = topo.out_neighbors();
  Eigen::MatrixXd Ctilde = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const double w =
        (1.0 - zeta) / (static_cast<double>(out_nb[i].size()) + c_C);
    double off = 0.0;
    for (int l : out_nb[i]) {
      Ctilde(l, i) = w;
      off += w;
    }
    Ctilde(i, i) = 1.0 - zeta - off;
  }
  return {std::move(Ctilde), Eigen::VectorXd::Constant(n, zeta), std::move(b)};
}

Eigen::MatrixXd assemble_C(const Eigen::MatrixXd& Ctilde,
                           const Eigen::VectorXd& alpha,
                           const Eigen::VectorXd& beta) {
  const Eigen::Index n = Ctilde.rows();
  require(Ctilde.cols() == n, "assemble_C: Ctilde must be square");
  require(alpha.size() == n && beta.size() == n,
          "assemble_C: alpha/beta dimension mismatch");
  require(Ctilde.minCoeff() >= 0.0, "assemble_C: Ctilde must be nonnegative");
  require(alpha.minCoeff() > 0.0 && alpha.maxCoeff() < 1.0,
          "assemble_C: alpha entries must lie in (0,1)");
  require(beta.minCoeff() > 0.0 && beta.maxCoeff() < 1.0,
          "assemble_C: beta entries must lie in (0,1)");
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  C.topLeftCorner(n, n) = Ctilde;
  C.topRightCorner(n, n) =
      (Eigen::VectorXd::Ones(n) - beta).asDiagonal();
  C.bottomLeftCorner(n, n) = alpha.asDiagonal();
  C.bottomRightCorner(n, n) = beta.asDiagonal();
  return C;
}

Eigen::MatrixXd build_push_matrix(const NetworkTopology& topo, double c_C) {
  require(c_C > 0.0, "build_push_matrix: c_C must be positive");
  const int n = topo.n;
  const auto out_nb = topo.out_neighbors();
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const double w = 1.0 / (static_cast<double>(out_nb[i].size()) + c_C);
    double off = 0.0;
    for (int l : out_nb[i]) {
      C(l, i) = w;
      off += w;
    }
    C(i, i) = 1.0 - off;
  }
  return C;
}

SpanningTreeReport check_spanning_trees(const Eigen::MatrixXd& R,
                                        const Eigen::MatrixXd& C) {
  const int n = static_cast<int>(R.rows());
  require(R.cols() == n, "check_spanning_trees: R must be square");
  const int m = static_cast<int>(C.rows());
  require(C.cols() == m && (m == n || m == 2 * n),
          "check_spanning_trees: C must be n x n or 2n x 2n");

  // Pull side: agent j's decision variable reaches i when R(i, j) > 0, so
  // the spread adjacency of x is { y : R(y, x) > 0 }.
  std::vector<std::vector<int>> pull_adj(n);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      if (y != x && R(y, x) > 0.0) pull_adj[x].push_back(y);

  // Push side: BFS from each candidate root over the reversed push edges
  // { y : C(x, y) > 0 }; covering everything means every tracker reaches x.
  std::vector<std::vector<int>> push_adj(m);
  for (int x = 0; x < m; ++x)
    for (int y = 0; y < m; ++y)
      if (y != x && C(x, y) > 0.0) push_adj[x].push_back(y);

  // Candidate roots are agents; for the assembled 2n x 2n matrix a substate
  // root implies its agent is one too (the pair is strongly connected via
  // alpha_i and 1 - beta_i), so restricting to the first n loses nothing.
  SpanningTreeReport report;
  for (int r = 0; r < n; ++r)
    if (reachable_count(pull_adj, r) == n) report.pull_roots.push_back(r);
  for (int r = 0; r < n; ++r)
    if (reachable_count(push_adj, r) == m) report.push_roots.push_back(r);
  report.pull_has_tree = !report.pull_roots.empty();
  report.push_has_tree = !report.push_roots.empty();
  std::set_intersection(report.pull_roots.begin(), report.pull_roots.end(),
                        report.push_roots.begin(), report.push_roots.end(),
                        std::back_inserter(report.common_roots));
  return report;
}

Eigen::VectorXd left_eigenvector_u(const Eigen::MatrixXd& R,
                                   const PowerIterationOptions& opts,
                                   const Eigen::VectorXd* init) {
  require(R.rows() == R.cols(), "left_eigenvector_u: R must be square");
  return power_iteration(R.transpose(), static_cast<int>(R.rows()), opts, init,
                         "left_eigenvector_u");
}

Eigen::VectorXd right_eigenvector_v(const Eigen::MatrixXd& C,
                                    const PowerIterationOptions& opts,
                                    const Eigen::VectorXd* init) {
  require(C.rows() == C.cols(), "right_eigenvector_v: C must be square");
  const int m = static_cast<int>(C.rows());
  require(m % 2 == 0,
          "right_eigenvector_v: expects the assembled 2n x 2n matrix");
  return power_iteration(C, m / 2, opts, init, "right_eigenvector_v");
}

WeightSystem WeightSystem::build(const NetworkTopology& topo,
                                 const WeightParams& params) {
  WeightSystem w;
  w.n_ = topo.n;
  w.R_ = build_pull_matrix(topo, params.c_R);
  auto push = build_push_system(topo, params.zeta, params.c_C, params.beta);
  w.Ctilde_ = std::move(push.Ctilde);
  w.alpha_ = std::move(push.alpha);
  w.beta_ = std::move(push.beta);
  w.C_ = assemble_C(w.Ctilde_, w.alpha_, w.beta_);
  w.finalize();
  return w;
}

WeightSystem WeightSystem::from_matrices(const Eigen::MatrixXd& R,
                                         const Eigen::MatrixXd& Ctilde,
                                         const Eigen::VectorXd& alpha,
                                         const Eigen::VectorXd& beta) {
  const Eigen::Index n = R.rows();
  require(R.cols() == n && Ctilde.rows() == n && Ctilde.cols() == n,
          "weight system: dimension mismatch");
  require(R.minCoeff() >= 0.0, "weight system: R must be nonnegative");
  constexpr double kTol = 1e-12;
  require((R.rowwise().sum() - Eigen::VectorXd::Ones(n)).lpNorm<Eigen::Infinity>() <= kTol,
          "weight system: R must be row-stochastic");
  require(R.diagonal().minCoeff() > 0.0,
          "weight system: R must have a positive diagonal");
  require(Ctilde.diagonal().minCoeff() > 0.0,
          "weight system: Ctilde must have a positive diagonal");

  WeightSystem w;
  w.n_ = static_cast<int>(n);
  w.R_ = R;
  w.Ctilde_ = Ctilde;
  w.alpha_ = alpha;
  w.beta_ = beta;
  w.C_ = assemble_C(Ctilde, alpha, beta);
  require((w.C_.colwise().sum() - Eigen::RowVectorXd::Ones(2 * n))
                  .lpNorm<Eigen::Infinity>() <= kTol,
          "weight system: assembled C must be column-stochastic "
          "(each Ctilde column i must sum to 1 - alpha_i)");
  w.finalize();
  return w;
}

void WeightSystem::finalize() {
  trees_ = check_spanning_trees(R_, C_);
  if (trees_.pass()) {
    u_ = left_eigenvector_u(R_);
    v_ = right_eigenvector_v(C_);
  }
}

const Eigen::VectorXd& WeightSystem::u() const {
  if (!u_.size())
    throw std::logic_error(
        "weight system: u is only available after the spanning-tree check passes");
  return u_;
}

const Eigen::VectorXd& WeightSystem::v() const {
  if (!v_.size())
    throw std::logic_error(
        "weight system: v is only available after the spanning-tree check passes");
  return v_;
}

Eigen::MatrixXd WeightSystem::T() const {
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(n_, 2 * n_);
  t.leftCols(n_) = Eigen::MatrixXd::Identity(n_, n_);
  return t;
}

double WeightSystem::uTv() const { return u().dot(v().head(n_)); }

}  // namespace sdpp
