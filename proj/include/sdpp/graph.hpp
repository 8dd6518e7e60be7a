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

#ifndef SDPP_GRAPH_HPP
#define SDPP_GRAPH_HPP

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace sdpp {

/// Directed communication graph over n agents.
///
/// An edge is stored as (receiver, sender): the pair (j, i) means agent i
/// sends messages to agent j.  Indices are 0-based internally; the edge-list
/// text format is 1-based.  Self-loops are not stored; self-weights arise
/// from the weight-matrix construction, not from the topology.
struct NetworkTopology {
  int n = 0;
  std::vector<std::pair<int, int>> edges;  // (receiver, sender)

  /// Validates agent range, rejects self-loops and duplicate edges.
  static NetworkTopology from_edges(int n,
                                    std::vector<std::pair<int, int>> edges);

  /// Edge-list text format: first non-comment line "n", then lines "j i"
  /// (agent i sends to agent j, 1-based).  '#' starts a comment.
  static NetworkTopology load(const std::string& path);
  static NetworkTopology parse(const std::string& text);

  /// in_neighbors()[i] = agents that send to i, in sorted order.
  std::vector<std::vector<int>> in_neighbors() const;
  /// out_neighbors()[i] = agents that receive from i, in sorted order.
  std::vector<std::vector<int>> out_neighbors() const;
};

/// Directed ring 0 -> 1 -> ... -> n-1 -> 0.
NetworkTopology ring_topology(int n);

/// The 5-agent benchmark digraph: a directed ring with two chords
/// (0 -> 2 and 2 -> 4).  A stand-in; see README.
NetworkTopology sec6_topology();

/// Pull matrix: R_ij = 1/(|in(i)| + c_R) for senders j, diagonal takes the
/// remainder.  Row-stochastic with positive diagonal for every topology.
Eigen::MatrixXd build_pull_matrix(const NetworkTopology& topo, double c_R);

struct PushSystem {
  Eigen::MatrixXd Ctilde;  // n x n, column i sums to 1 - alpha_i
  Eigen::VectorXd alpha;   // entries in (0,1)
  Eigen::VectorXd beta;    // entries in (0,1)
};

/// Push weights: alpha_i = zeta, Ctilde_li = (1-zeta)/(|out(i)| + c_C) for
/// receivers l, diagonal takes the remainder.  Rejects zeta or beta outside
/// (0,1).
PushSystem build_push_system(const NetworkTopology& topo, double zeta,
                             double c_C, const Eigen::VectorXd& beta);

/// 2n x 2n block matrix [[Ctilde, I - diag(beta)], [diag(alpha), diag(beta)]].
/// Column-stochastic whenever each Ctilde column i sums to 1 - alpha_i.
Eigen::MatrixXd assemble_C(const Eigen::MatrixXd& Ctilde,
                           const Eigen::VectorXd& alpha,
                           const Eigen::VectorXd& beta);

/// Fully column-stochastic n x n push matrix (no state decomposition),
/// used by the plain push-pull baseline.
Eigen::MatrixXd build_push_matrix(const NetworkTopology& topo, double c_C);

/// Result of the spanning-tree validation of a weight pair.
///
/// pull_roots: agents whose decision variable reaches every agent through
/// the pull mixing.  push_roots: agents that every agent's tracker reaches
/// through the push mixing (computed by BFS from each candidate over the
/// reversed push edges).  Both matrices must admit a spanning tree and share
/// at least one common root.
struct SpanningTreeReport {
  bool pull_has_tree = false;
  bool push_has_tree = false;
  std::vector<int> pull_roots;
  std::vector<int> push_roots;    // restricted to the first n nodes
  std::vector<int> common_roots;  // pull_roots ∩ push_roots

  bool pass() const { return pull_has_tree && push_has_tree && !common_roots.empty(); }
};

/// R is n x n; C may be the assembled 2n x 2n matrix or an n x n push matrix.
/// Failing the check is a reported outcome, not an error.
SpanningTreeReport check_spanning_trees(const Eigen::MatrixXd& R,
                                        const Eigen::MatrixXd& C);

struct PowerIterationOptions {
  int max_iterations = 100000;
  double tolerance = 1e-13;
};

/// Nonnegative left eigenvector of a row-stochastic R for eigenvalue 1,
/// normalized so that sum(u) = n.  Power iteration on R^T with per-step
/// renormalization; throws when the iteration cap is hit (near-degenerate
/// spectrum) or the final residual exceeds 1e-12.
Eigen::VectorXd left_eigenvector_u(const Eigen::MatrixXd& R,
                                   const PowerIterationOptions& opts = {},
                                   const Eigen::VectorXd* init = nullptr);

/// Nonnegative right eigenvector of a column-stochastic C for eigenvalue 1,
/// normalized so that sum(v) = n where n = rows(C)/2 for the assembled
/// matrix.  See left_eigenvector_u for failure modes.
Eigen::VectorXd right_eigenvector_v(const Eigen::MatrixXd& C,
                                    const PowerIterationOptions& opts = {},
                                    const Eigen::VectorXd* init = nullptr);

struct WeightParams {
  double c_R = 1.0;
  double zeta = 0.01;  // shared alpha_i
  double c_C = 1.0;
  Eigen::VectorXd beta;  // empty -> 0.5 for every agent
};

/// Immutable after construction; safe to share read-only across replicas.
///
/// u and v are computed only when the spanning-tree check passes (they are
/// unique exactly in that case); a failing system can be inspected but the
/// engine refuses to run it.
class WeightSystem {
 public:
  WeightSystem() = default;  // empty, not validated

  static WeightSystem build(const NetworkTopology& topo,
                            const WeightParams& params = {});

  /// Wraps externally supplied matrices.  They are validated (stochasticity,
  /// positive diagonals, value ranges), never modified.
  static WeightSystem from_matrices(const Eigen::MatrixXd& R,
                                    const Eigen::MatrixXd& Ctilde,
                                    const Eigen::VectorXd& alpha,
                                    const Eigen::VectorXd& beta);

  int n() const { return n_; }
  const Eigen::MatrixXd& R() const { return R_; }
  const Eigen::MatrixXd& Ctilde() const { return Ctilde_; }
  const Eigen::MatrixXd& C() const { return C_; }
  const Eigen::VectorXd& alpha() const { return alpha_; }
  const Eigen::VectorXd& beta() const { return beta_; }
  const SpanningTreeReport& trees() const { return trees_; }
  bool validated() const { return trees_.pass(); }

  /// Perron vectors; only available when validated().
  const Eigen::VectorXd& u() const;
  const Eigen::VectorXd& v() const;

  /// Selection matrix [I_n, 0_n] mapping the stacked tracker to its shared
  /// block.
  Eigen::MatrixXd T() const;

  /// u^T T v, the alignment scalar entering the effective stepsize.
  double uTv() const;

 private:
  void finalize();

  int n_ = 0;
  Eigen::MatrixXd R_, Ctilde_, C_;
  Eigen::VectorXd alpha_, beta_;
  Eigen::VectorXd u_, v_;
  SpanningTreeReport trees_;
};

}  // namespace sdpp

#endif  // SDPP_GRAPH_HPP
