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

#include <Eigen/Dense>

#include "oracles.hpp"
#include "sdpp/graph.hpp"
#include "sdpp/linalg.hpp"

using namespace sdpp;

TEST_CASE("pull matrix construction") {
  SUBCASE("no edges gives the identity") {
    NetworkTopology topo = NetworkTopology::from_edges(3, {});
    CHECK((build_pull_matrix(topo, 2.5) - Eigen::MatrixXd::Identity(3, 3))
              .lpNorm<Eigen::Infinity>() == 0.0);
  }
  SUBCASE("two agents, one link") {
    NetworkTopology topo = NetworkTopology::from_edges(2, {{1, 0}});
    Eigen::MatrixXd R = build_pull_matrix(topo, 1.0);
    Eigen::MatrixXd expected(2, 2);
    expected << 1.0, 0.0, 0.5, 0.5;
    CHECK((R - expected).lpNorm<Eigen::Infinity>() == 0.0);
  }
  SUBCASE("directed ring splits rows in half") {
    Eigen::MatrixXd R = build_pull_matrix(ring_topology(3), 1.0);
    for (int i = 0; i < 3; ++i) {
      CHECK(R(i, i) == 0.5);
      CHECK(R(i, (i + 2) % 3) == 0.5);
    }
  }
  SUBCASE("c_R must be positive") {
    CHECK_THROWS_AS(build_pull_matrix(ring_topology(3), 0.0),
                    std::invalid_argument);
  }
}

TEST_CASE("push system construction") {
  SUBCASE("no edges gives a scaled identity") {
    NetworkTopology topo = NetworkTopology::from_edges(4, {});
    PushSystem push = build_push_system(topo, 0.5, 1.0, {});
    CHECK((push.Ctilde - 0.5 * Eigen::MatrixXd::Identity(4, 4))
              .lpNorm<Eigen::Infinity>() == 0.0);
  }
  SUBCASE("two agents, one link") {
    NetworkTopology topo = NetworkTopology::from_edges(2, {{1, 0}});
    PushSystem push = build_push_system(topo, 0.01, 1.0, {});
    CHECK(push.Ctilde(1, 0) == doctest::Approx(0.495).epsilon(1e-15));
    CHECK(push.Ctilde(0, 0) == doctest::Approx(0.495).epsilon(1e-15));
    CHECK(push.Ctilde(1, 1) == doctest::Approx(0.99).epsilon(1e-15));
  }
  SUBCASE("zeta outside (0,1) is rejected") {
    CHECK_THROWS(build_push_system(ring_topology(3), 0.0, 1.0, {}));
    CHECK_THROWS(build_push_system(ring_topology(3), 1.0, 1.0, {}));
  }
  SUBCASE("beta outside (0,1) is rejected") {
    Eigen::VectorXd bad = Eigen::VectorXd::Constant(3, 1.0);
    CHECK_THROWS(build_push_system(ring_topology(3), 0.5, 1.0, bad));
  }
}

TEST_CASE("assembled C") {
  SUBCASE("single agent block") {
    Eigen::MatrixXd Ct(1, 1);
    Ct << 0.99;
    Eigen::VectorXd alpha = Eigen::VectorXd::Constant(1, 0.01);
    Eigen::VectorXd beta = Eigen::VectorXd::Constant(1, 0.5);
    Eigen::MatrixXd C = assemble_C(Ct, alpha, beta);
    Eigen::MatrixXd expected(2, 2);
    expected << 0.99, 0.5, 0.01, 0.5;
    CHECK((C - expected).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(C.colwise().sum().isApproxToConstant(1.0, 1e-15));
  }
  SUBCASE("column sums are exactly one for every recipe output") {
    for (int n : {2, 3, 7}) {
      auto topo = oracles::random_valid_topology(n, n, 90 + n);
      PushSystem push = build_push_system(topo, 0.2, 2.0, {});
      Eigen::MatrixXd C = assemble_C(push.Ctilde, push.alpha, push.beta);
      CHECK((C.colwise().sum() - Eigen::RowVectorXd::Ones(2 * n))
                .lpNorm<Eigen::Infinity>() <= 1e-14);
    }
  }
  SUBCASE("dimension mismatch is rejected") {
    Eigen::MatrixXd Ct(2, 2);
    Ct.setConstant(0.4);
    CHECK_THROWS(assemble_C(Ct, Eigen::VectorXd::Constant(1, 0.1),
                            Eigen::VectorXd::Constant(2, 0.5)));
  }
}

TEST_CASE("edge-list ingestion") {
  SUBCASE("comments, header and 1-based indices") {
    const std::string text =
        "# five agents\n5\n2 1\n3 2  # ring\n4 3\n5 4\n1 5\n3 1\n5 3\n";
    NetworkTopology topo = NetworkTopology::parse(text);
    CHECK(topo.n == 5);
    CHECK(topo.edges.size() == 7);
    auto in_nb = topo.in_neighbors();
    CHECK(in_nb[2] == std::vector<int>{0, 1});
  }
  SUBCASE("self-loops are rejected") {
    CHECK_THROWS(NetworkTopology::parse("3\n1 1\n"));
  }
  SUBCASE("out-of-range agents are rejected") {
    CHECK_THROWS(NetworkTopology::parse("3\n4 1\n"));
    CHECK_THROWS(NetworkTopology::parse("3\n0 1\n"));
  }
  SUBCASE("duplicates are rejected") {
    CHECK_THROWS(NetworkTopology::parse("3\n2 1\n2 1\n"));
  }
  SUBCASE("malformed edge is rejected") {
    CHECK_THROWS(NetworkTopology::parse("3\n2\n"));
  }
}

TEST_CASE("spanning-tree validation") {
  SUBCASE("strongly connected digraph: every agent is a root") {
    WeightSystem w = WeightSystem::build(sec6_topology());
    CHECK(w.trees().pass());
    CHECK(w.trees().pull_roots == std::vector<int>{0, 1, 2, 3, 4});
    CHECK(w.trees().common_roots == std::vector<int>{0, 1, 2, 3, 4});
  }
  SUBCASE("two disconnected pairs: fail with empty root set") {
    NetworkTopology topo =
        NetworkTopology::from_edges(4, {{1, 0}, {0, 1}, {3, 2}, {2, 3}});
    WeightSystem w = WeightSystem::build(topo);
    CHECK_FALSE(w.trees().pass());
    CHECK(w.trees().pull_roots.empty());
    CHECK(w.trees().common_roots.empty());
    CHECK_THROWS(w.u());
  }
  SUBCASE("outward star in the pull graph, inward in the push graph") {
    // R built on links 0 -> i, Ctilde on links i -> 0: only agent 0 both
    // spreads its decision variable and collects every tracker.
    NetworkTopology star_out =
        NetworkTopology::from_edges(4, {{1, 0}, {2, 0}, {3, 0}});
    NetworkTopology star_in =
        NetworkTopology::from_edges(4, {{0, 1}, {0, 2}, {0, 3}});
    Eigen::MatrixXd R = build_pull_matrix(star_out, 1.0);
    PushSystem push = build_push_system(star_in, 0.01, 1.0, {});
    Eigen::MatrixXd C = assemble_C(push.Ctilde, push.alpha, push.beta);
    SpanningTreeReport report = check_spanning_trees(R, C);
    CHECK(report.pass());
    CHECK(report.common_roots == std::vector<int>{0});
  }
  SUBCASE("n x n push matrix is accepted") {
    NetworkTopology topo = ring_topology(4);
    SpanningTreeReport report = check_spanning_trees(
        build_pull_matrix(topo, 1.0), build_push_matrix(topo, 1.0));
    CHECK(report.pass());
    CHECK(report.common_roots.size() == 4);
  }
}

TEST_CASE("Perron eigenvectors") {
  SUBCASE("left eigenvector of a reducible pull matrix") {
    Eigen::MatrixXd R(2, 2);
    R << 1.0, 0.0, 0.5, 0.5;
    Eigen::VectorXd u = left_eigenvector_u(R);
    CHECK(u(0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(u(1) == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("right eigenvector of the single-agent assembled matrix") {
    Eigen::MatrixXd C(2, 2);
    C << 0.99, 0.5, 0.01, 0.5;
    Eigen::VectorXd v = right_eigenvector_v(C);
    CHECK(v(0) == doctest::Approx(1.0 / 1.02).epsilon(1e-12));
    CHECK(v(1) == doctest::Approx(0.02 / 1.02).epsilon(1e-12));
  }
  SUBCASE("doubly stochastic pull matrix has the flat eigenvector") {
    Eigen::MatrixXd R(4, 4);
    R.setZero();
    for (int i = 0; i < 4; ++i) {
      R(i, i) = 0.5;
      R(i, (i + 1) % 4) = 0.25;
      R(i, (i + 3) % 4) = 0.25;
    }
    Eigen::VectorXd u = left_eigenvector_u(R);
    CHECK((u - Eigen::VectorXd::Ones(4)).lpNorm<Eigen::Infinity>() <= 1e-12);
  }
  SUBCASE("frozen benchmark values") {
    WeightSystem w = WeightSystem::build(sec6_topology());
    // Independent eigensolver oracle values.
    Eigen::VectorXd u_expected(5);
    u_expected << 1.4285714285714268, 0.7142857142857142, 1.0714285714285727,
        0.7142857142857152, 1.0714285714285707;
    Eigen::VectorXd v_head_expected(5);
    v_head_expected << 1.0504201680672252, 0.7002801120448174,
        1.0504201680672278, 0.7002801120448193, 1.4005602240896362;
    CHECK((w.u() - u_expected).lpNorm<Eigen::Infinity>() <= 1e-10);
    CHECK((w.v().head(5) - v_head_expected).lpNorm<Eigen::Infinity>() <= 1e-10);
    CHECK(w.uTv() == doctest::Approx(5.12705082032813).epsilon(1e-11));
  }
}

TEST_CASE("constructed weight systems satisfy the stochasticity invariants") {
  for (int trial = 0; trial < 20; ++trial) {
    StreamRng rng(trial, StreamRng::Kind::kGeneric, 55);
    const int n = 2 + static_cast<int>(rng.next_u64() % 24);
    auto topo = oracles::random_valid_topology(
        n, static_cast<int>(rng.next_u64() % (2 * n)), 1000 + trial);
    WeightParams params;
    params.c_R = rng.next_uniform(0.2, 4.0);
    params.zeta = rng.next_uniform(0.01, 0.9);
    params.c_C = rng.next_uniform(0.2, 4.0);
    WeightSystem w = WeightSystem::build(topo, params);
    REQUIRE(w.validated());
    CHECK((w.R().rowwise().sum() - Eigen::VectorXd::Ones(n))
              .lpNorm<Eigen::Infinity>() <= 1e-14);
    CHECK((w.C().colwise().sum() - Eigen::RowVectorXd::Ones(2 * n))
              .lpNorm<Eigen::Infinity>() <= 1e-14);
    CHECK((w.R().transpose() * w.u() - w.u()).lpNorm<Eigen::Infinity>() <=
          1e-12);
    CHECK((w.C() * w.v() - w.v()).lpNorm<Eigen::Infinity>() <= 1e-12);
    CHECK(w.u().minCoeff() >= 0.0);
    CHECK(w.v().minCoeff() >= 0.0);
    CHECK(w.u().sum() == doctest::Approx(n).epsilon(1e-13));
    CHECK(w.v().sum() == doctest::Approx(n).epsilon(1e-13));
  }
}

TEST_CASE("deflated matrices contract whenever validation passes") {
  for (int trial = 0; trial < 8; ++trial) {
    const int n = 2 + trial;
    auto topo = oracles::random_valid_topology(n, trial % 3, 7000 + trial);
    WeightSystem w = WeightSystem::build(topo);
    REQUIRE(w.validated());
    const Eigen::MatrixXd R_defl =
        w.R() - Eigen::VectorXd::Ones(n) * w.u().transpose() / n;
    const Eigen::MatrixXd C_defl =
        w.C() - w.v() * Eigen::RowVectorXd::Ones(2 * n) / n;
    CHECK(spectral_radius(R_defl) < 1.0);
    CHECK(spectral_radius(C_defl) < 1.0);
  }
}

TEST_CASE("eigenvector uniqueness across random initializations") {
  WeightSystem w = WeightSystem::build(sec6_topology());
  StreamRng rng(3, StreamRng::Kind::kGeneric, 77);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::VectorXd init_u(5), init_v(10);
    for (int i = 0; i < 5; ++i) init_u(i) = rng.next_uniform(0.05, 1.0);
    for (int i = 0; i < 10; ++i) init_v(i) = rng.next_uniform(0.05, 1.0);
    Eigen::VectorXd u = left_eigenvector_u(w.R(), {}, &init_u);
    Eigen::VectorXd v = right_eigenvector_v(w.C(), {}, &init_v);
    CHECK((u - w.u()).lpNorm<Eigen::Infinity>() <= 1e-10);
    CHECK((v - w.v()).lpNorm<Eigen::Infinity>() <= 1e-10);
  }
}

TEST_CASE("single agent is supported end to end") {
  NetworkTopology topo = NetworkTopology::from_edges(1, {});
  WeightSystem w = WeightSystem::build(topo);
  CHECK(w.C().rows() == 2);
  CHECK(w.validated());
  CHECK(w.u()(0) == doctest::Approx(1.0));
  CHECK(w.uTv() == doctest::Approx(1.0 / 1.02).epsilon(1e-12));
}

TEST_CASE("injected matrices are validated, not trusted") {
  Eigen::MatrixXd R(2, 2);
  R << 0.9, 0.2,  // row sums 1.1: not stochastic
      0.5, 0.5;
  Eigen::MatrixXd Ct(2, 2);
  Ct << 0.5, 0.0, 0.0, 0.5;
  Eigen::VectorXd alpha = Eigen::VectorXd::Constant(2, 0.5);
  Eigen::VectorXd beta = Eigen::VectorXd::Constant(2, 0.5);
  CHECK_THROWS(WeightSystem::from_matrices(R, Ct, alpha, beta));

  R << 1.0, 0.0, 0.5, 0.5;
  WeightSystem w = WeightSystem::from_matrices(R, Ct, alpha, beta);
  CHECK(w.n() == 2);  // accepted; spanning-tree outcome is reported
  CHECK_FALSE(w.validated());
}
