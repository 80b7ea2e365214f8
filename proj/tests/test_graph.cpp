#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "dmed/graph.hpp"

using namespace dmed;

namespace {

StaticGraph path3() { return StaticGraph(3, {{0, 1}, {1, 2}}); }

StaticGraph complete(int n) {
  std::vector<Edge> e;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) e.emplace_back(i, j);
  return StaticGraph(n, std::move(e));
}

// Random connected graph on n nodes: a random spanning tree plus extras.
StaticGraph random_connected(int n, rng::Stream& s) {
  std::vector<Edge> edges;
  for (int i = 1; i < n; ++i) {
    edges.emplace_back(static_cast<int>(s.next_u64() % static_cast<std::uint64_t>(i)), i);
  }
  StaticGraph tree(n, edges);
  for (int tries = 0; tries < n; ++tries) {
    const int i = static_cast<int>(s.next_u64() % static_cast<std::uint64_t>(n));
    const int j = static_cast<int>(s.next_u64() % static_cast<std::uint64_t>(n));
    if (i != j && !tree.has_edge(i, j)) edges.emplace_back(i, j);
    tree = StaticGraph(n, edges);
  }
  return tree;
}

}  // namespace

TEST_CASE("StaticGraph rejects self-loops, duplicates and out-of-range nodes") {
  REQUIRE_THROWS_AS(StaticGraph(3, {{1, 1}}), std::invalid_argument);
  REQUIRE_THROWS_AS(StaticGraph(3, {{0, 1}, {1, 0}}), std::invalid_argument);
  REQUIRE_THROWS_AS(StaticGraph(3, {{0, 3}}), std::invalid_argument);
  const StaticGraph g(3, {{2, 0}, {0, 1}});
  REQUIRE(g.has_edge(0, 2));
  REQUIRE(g.has_edge(1, 0));
  REQUIRE(!g.has_edge(1, 2));
}

TEST_CASE("laplacian of the 3-node path") {
  const LaplacianMatrix l = build_laplacian(path3());
  Eigen::MatrixXd want(3, 3);
  want << 1, -1, 0, -1, 2, -1, 0, -1, 1;
  REQUIRE(l == want);
}

TEST_CASE("laplacian of the edgeless graph is zero") {
  const LaplacianMatrix l = build_laplacian(StaticGraph(3, {}));
  REQUIRE(l == Eigen::MatrixXd::Zero(3, 3));
}

TEST_CASE("laplacian of K4") {
  const LaplacianMatrix l = build_laplacian(complete(4));
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) REQUIRE(l(i, j) == (i == j ? 3.0 : -1.0));
}

TEST_CASE("lambda2 on known spectra") {
  // complete graph spectrum is {0, N (N-1 times)}
  REQUIRE(std::abs(lambda2(build_laplacian(complete(4))) - 4.0) < 1e-9);
  // path on 3 nodes has eigenvalues {0, 1, 3}
  REQUIRE(std::abs(lambda2(build_laplacian(path3())) - 1.0) < 1e-9);
  REQUIRE(std::abs(lambda2(build_laplacian(StaticGraph(3, {})))) < 1e-9);
}

TEST_CASE("laplacian invariants on random realizations") {
  rng::Stream s(2024);
  for (int rep = 0; rep < 200; ++rep) {
    const int n = 3 + static_cast<int>(s.next_u64() % 10);
    StaticGraph g = random_connected(n, s);
    GraphRealization r = sample_dropout(g, 0.4, s);
    const LaplacianMatrix l = build_laplacian(r);
    // rows sum exactly to zero (integer-valued construction)
    for (int i = 0; i < n; ++i) REQUIRE(l.row(i).sum() == 0.0);
    REQUIRE(l == l.transpose().eval());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(l, Eigen::EigenvaluesOnly);
    REQUIRE(es.eigenvalues()(0) >= -1e-10);
    // off-diagonals in {0, -1}, diagonal equals active degree
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j) REQUIRE((l(i, j) == 0.0 || l(i, j) == -1.0));
  }
}

TEST_CASE("lambda2 never decreases when an edge is added") {
  rng::Stream s(77);
  for (int rep = 0; rep < 100; ++rep) {
    const int n = 4 + static_cast<int>(s.next_u64() % 8);
    const StaticGraph g = random_connected(n, s);
    const double l2 = lambda2(build_laplacian(g));
    // first absent pair, if any
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (g.has_edge(i, j)) continue;
        std::vector<Edge> e = g.edges();
        e.emplace_back(i, j);
        const double l2b = lambda2(build_laplacian(StaticGraph(n, std::move(e))));
        REQUIRE(l2b >= l2 - 1e-9);
        i = n;  // one addition per rep is enough
        break;
      }
    }
  }
}

TEST_CASE("generate_random_geometric: two nodes at full radius give the single edge") {
  rng::Stream s(5);
  const StaticGraph g = generate_random_geometric(2, std::numbers::sqrt2, s);
  REQUIRE(g.n_nodes() == 2);
  REQUIRE(g.n_edges() == 1);
  REQUIRE(g.has_edge(0, 1));
}

TEST_CASE("generate_random_geometric: impossible radius fails naming the radius") {
  rng::Stream s(6);
  REQUIRE_THROWS_WITH(generate_random_geometric(30, 0.001, s, 20),
                      Catch::Matchers::ContainsSubstring("0.001"));
  REQUIRE_THROWS_AS(generate_random_geometric(1, 0.5, s), std::invalid_argument);
  REQUIRE_THROWS_AS(generate_random_geometric(5, 0.0, s), std::invalid_argument);
  REQUIRE_THROWS_AS(generate_random_geometric(5, 2.0, s), std::invalid_argument);
}

TEST_CASE("generated geometric graphs are connected") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    rng::Stream s(seed);
    const StaticGraph g = generate_random_geometric(25, 0.35, s);
    REQUIRE(lambda2(build_laplacian(g)) > 1e-8);
  }
}

TEST_CASE("radius search hits target connectivity within tolerance") {
  const auto sparse = generate_with_target_lambda2(40, 1.8, 11);
  REQUIRE(std::abs(sparse.lambda2 - 1.8) <= 0.5);
  REQUIRE(lambda2(build_laplacian(sparse.graph)) == sparse.lambda2);
  const auto dense = generate_with_target_lambda2(40, 7.2, 11);
  REQUIRE(std::abs(dense.lambda2 - 7.2) <= 0.5);
}

TEST_CASE("sample_dropout with p=0 keeps every edge") {
  rng::Stream s(9);
  const StaticGraph g = complete(6);
  for (int rep = 0; rep < 10; ++rep) {
    const GraphRealization r = sample_dropout(g, 0.0, s);
    REQUIRE(r.n_active() == g.n_edges());
  }
  REQUIRE_THROWS_AS(sample_dropout(g, 1.0, s), std::invalid_argument);
  REQUIRE_THROWS_AS(sample_dropout(g, -0.1, s), std::invalid_argument);
}

TEST_CASE("dropout retention frequency matches 1 - p") {
  const StaticGraph k2(2, {{0, 1}});
  const int n = 100000;
  int kept = 0;
  for (int t = 0; t < n; ++t) {
    rng::Stream s(rng::derive(31, {rng::to_word(rng::Purpose::kDropout),
                                   static_cast<std::uint64_t>(t)}));
    kept += sample_dropout(k2, 0.5, s).active[0];
  }
  REQUIRE(std::abs(static_cast<double>(kept) / n - 0.5) < 0.01);
}

TEST_CASE("mean sampled laplacian approaches (1-p) * L(base)") {
  rng::Stream gs(13);
  const StaticGraph g = random_connected(8, gs);
  const LaplacianMatrix base = build_laplacian(g);
  const double p = 0.3;
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(8, 8);
  const int draws = 10000;
  for (int t = 0; t < draws; ++t) {
    rng::Stream s(rng::derive(99, {rng::to_word(rng::Purpose::kDropout),
                                   static_cast<std::uint64_t>(t)}));
    mean += build_laplacian(sample_dropout(g, p, s));
  }
  mean /= draws;
  REQUIRE(((mean - (1.0 - p) * base).array().abs() < 0.05).all());
}

TEST_CASE("connected on average: lambda2 scales exactly with (1-p)") {
  rng::Stream gs(14);
  const StaticGraph g = random_connected(12, gs);
  const LaplacianMatrix l = build_laplacian(g);
  for (const double p : {0.1, 0.5, 0.9}) {
    const double scaled = lambda2(((1.0 - p) * l).eval());
    REQUIRE(std::abs(scaled - (1.0 - p) * lambda2(l)) < 1e-9);
    REQUIRE(scaled > 0.0);
  }
}

TEST_CASE("realizations at different steps are independent (chi-square smoke)") {
  const StaticGraph k2(2, {{0, 1}});
  // contingency table of the edge indicator at t=0 vs t=1 across trials
  long c[2][2] = {{0, 0}, {0, 0}};
  const int trials = 4000;
  for (int i = 0; i < trials; ++i) {
    const auto ts = rng::derive(555, {rng::to_word(rng::Purpose::kTrial),
                                      static_cast<std::uint64_t>(i)});
    rng::Stream s0(rng::derive(ts, {rng::to_word(rng::Purpose::kDropout), 0}));
    rng::Stream s1(rng::derive(ts, {rng::to_word(rng::Purpose::kDropout), 1}));
    const int a = sample_dropout(k2, 0.4, s0).active[0];
    const int b = sample_dropout(k2, 0.4, s1).active[0];
    ++c[a][b];
  }
  double chi2 = 0.0;
  const double row[2] = {static_cast<double>(c[0][0] + c[0][1]),
                         static_cast<double>(c[1][0] + c[1][1])};
  const double col[2] = {static_cast<double>(c[0][0] + c[1][0]),
                         static_cast<double>(c[0][1] + c[1][1])};
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      const double expect = row[a] * col[b] / trials;
      chi2 += (c[a][b] - expect) * (c[a][b] - expect) / expect;
    }
  }
  REQUIRE(chi2 < 6.6348966);  // chi-square(1) 0.99 quantile
}

TEST_CASE("edge-list round-trip") {
  rng::Stream s(17);
  const StaticGraph g = random_connected(9, s);
  std::stringstream buf;
  write_edge_list(buf, g);
  const StaticGraph h = read_edge_list(buf);
  REQUIRE(h.n_nodes() == g.n_nodes());
  REQUIRE(h.edges() == g.edges());
}

TEST_CASE("edge-list parser rejects malformed input") {
  std::stringstream a("3 nodes\n0 1\n");
  REQUIRE_THROWS_AS(read_edge_list(a), std::runtime_error);
  std::stringstream b("n_nodes=3\n0\n");
  REQUIRE_THROWS_AS(read_edge_list(b), std::runtime_error);
  std::stringstream c("");
  REQUIRE_THROWS_AS(read_edge_list(c), std::runtime_error);
}
