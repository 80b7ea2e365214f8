// Undirected network topology: static base graphs, per-step random
// realizations with link dropout, Laplacians and spectral connectivity.

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dmed/rng.hpp"

namespace dmed {

// Unordered node pair, stored normalized with a < b.
struct Edge {
  int a;
  int b;

  Edge(int i, int j) : a(std::min(i, j)), b(std::max(i, j)) {}
  friend bool operator==(const Edge& l, const Edge& r) = default;
  friend auto operator<=>(const Edge& l, const Edge& r) = default;
};

// Simple undirected graph: no self-loops, no duplicate edges.
class StaticGraph {
 public:
  StaticGraph(int n_nodes, std::vector<Edge> edges)
      : n_nodes_(n_nodes), edges_(std::move(edges)) {
    if (n_nodes_ < 1) throw std::invalid_argument("StaticGraph: n_nodes must be >= 1");
    for (const Edge& e : edges_) {
      if (e.a == e.b) throw std::invalid_argument("StaticGraph: self-loop on node " + std::to_string(e.a));
      if (e.a < 0 || e.b >= n_nodes_)
        throw std::invalid_argument("StaticGraph: edge (" + std::to_string(e.a) + "," +
                                    std::to_string(e.b) + ") out of range");
    }
    std::sort(edges_.begin(), edges_.end());
    if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end())
      throw std::invalid_argument("StaticGraph: duplicate edge");
  }

  int n_nodes() const { return n_nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t n_edges() const { return edges_.size(); }

  bool has_edge(int i, int j) const {
    return std::binary_search(edges_.begin(), edges_.end(), Edge(i, j));
  }

 private:
  int n_nodes_;
  std::vector<Edge> edges_;
};

// One random instantiation of a base graph: a subset of its edges is active.
// `active` is a mask parallel to base->edges().
struct GraphRealization {
  const StaticGraph* base;
  std::vector<std::uint8_t> active;

  std::size_t n_active() const {
    std::size_t c = 0;
    for (auto m : active) c += m;
    return c;
  }
};

using LaplacianMatrix = Eigen::MatrixXd;

namespace detail {
inline LaplacianMatrix laplacian_from_mask(const StaticGraph& g,
                                           const std::vector<std::uint8_t>* mask) {
  LaplacianMatrix l = LaplacianMatrix::Zero(g.n_nodes(), g.n_nodes());
  const auto& edges = g.edges();
  for (std::size_t k = 0; k < edges.size(); ++k) {
    if (mask != nullptr && !(*mask)[k]) continue;
    const Edge& e = edges[k];
    l(e.a, e.a) += 1.0;
    l(e.b, e.b) += 1.0;
    l(e.a, e.b) -= 1.0;
    l(e.b, e.a) -= 1.0;
  }
  return l;
}
}  // namespace detail

inline LaplacianMatrix build_laplacian(const StaticGraph& g) {
  return detail::laplacian_from_mask(g, nullptr);
}

inline LaplacianMatrix build_laplacian(const GraphRealization& r) {
  if (r.active.size() != r.base->n_edges())
    throw std::invalid_argument("build_laplacian: realization mask does not match base");
  return detail::laplacian_from_mask(*r.base, &r.active);
}

// Second-smallest eigenvalue of a symmetric PSD Laplacian (algebraic
// connectivity).  Dense solve; fine for the few-hundred-node graphs here.
inline double lambda2(const LaplacianMatrix& l) {
  if (l.rows() != l.cols()) throw std::invalid_argument("lambda2: matrix not square");
  if (l.rows() < 2) throw std::invalid_argument("lambda2: need at least 2 nodes");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(l, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw std::runtime_error("lambda2: eigensolver failed");
  return es.eigenvalues()(1);
}

// Spectral connectivity test, lambda2 > 1e-8.
inline bool is_connected(const StaticGraph& g) {
  if (g.n_nodes() == 1) return true;
  return lambda2(build_laplacian(g)) > 1e-8;
}

// Random geometric graph: n points uniform in the unit square, nodes linked
// when within `radius`.  Regenerates the point set until connected.
inline StaticGraph generate_random_geometric(int n_nodes, double radius, rng::Stream& stream,
                                             int max_retries = 1000) {
  if (n_nodes < 2) throw std::invalid_argument("generate_random_geometric: n_nodes must be >= 2");
  if (!(radius > 0.0) || radius > std::numbers::sqrt2 + 1e-12)
    throw std::invalid_argument("generate_random_geometric: radius must be in (0, sqrt(2)]");

  const double r2 = radius * radius;
  for (int attempt = 0; attempt < max_retries; ++attempt) {
    std::vector<double> px(n_nodes), py(n_nodes);
    for (int i = 0; i < n_nodes; ++i) {
      px[i] = stream.next_double();
      py[i] = stream.next_double();
    }
    std::vector<Edge> edges;
    for (int i = 0; i < n_nodes; ++i) {
      for (int j = i + 1; j < n_nodes; ++j) {
        const double dx = px[i] - px[j];
        const double dy = py[i] - py[j];
        if (dx * dx + dy * dy <= r2) edges.emplace_back(i, j);
      }
    }
    StaticGraph g(n_nodes, std::move(edges));
    if (is_connected(g)) return g;
  }
  throw std::runtime_error("generate_random_geometric: no connected graph on " +
                           std::to_string(n_nodes) + " nodes within " +
                           std::to_string(max_retries) + " attempts at radius " +
                           std::to_string(radius));
}

// Per-step link failure: each base edge is retained independently with
// probability 1 - p_drop.
inline GraphRealization sample_dropout(const StaticGraph& g, double p_drop, rng::Stream& stream) {
  if (!(p_drop >= 0.0) || p_drop >= 1.0)
    throw std::invalid_argument("sample_dropout: p_drop must be in [0, 1)");
  GraphRealization r{&g, std::vector<std::uint8_t>(g.n_edges(), 1)};
  if (p_drop == 0.0) return r;
  for (std::size_t k = 0; k < r.active.size(); ++k) {
    r.active[k] = stream.next_bernoulli(p_drop) ? 0 : 1;
  }
  return r;
}

// --- edge-list text format ----------------------------------------------
// Header line "n_nodes=<N>", then one "i j" pair per line.

inline void write_edge_list(std::ostream& out, const StaticGraph& g) {
  out << "n_nodes=" << g.n_nodes() << "\n";
  for (const Edge& e : g.edges()) out << e.a << " " << e.b << "\n";
}

inline StaticGraph read_edge_list(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("edge list: empty input");
  const std::string prefix = "n_nodes=";
  if (line.rfind(prefix, 0) != 0)
    throw std::runtime_error("edge list: expected header 'n_nodes=<N>', got '" + line + "'");
  int n = 0;
  try {
    n = std::stoi(line.substr(prefix.size()));
  } catch (const std::exception&) {
    throw std::runtime_error("edge list: bad node count in header '" + line + "'");
  }
  std::vector<Edge> edges;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    int i = 0, j = 0;
    if (!(ls >> i >> j))
      throw std::runtime_error("edge list: line " + std::to_string(lineno) + ": expected 'i j'");
    edges.emplace_back(i, j);
  }
  return StaticGraph(n, std::move(edges));
}

// --- radius search for a target algebraic connectivity -------------------

struct RadiusSearchResult {
  StaticGraph graph;
  double radius;
  double lambda2;
};

// Binary search over the connection radius, regenerating with fresh derived
// seeds, until the realized lambda2 lands within `tol` of `target`.
inline RadiusSearchResult generate_with_target_lambda2(int n_nodes, double target,
                                                       std::uint64_t seed, double tol = 0.5,
                                                       int max_probes = 64) {
  if (!(target > 0.0)) throw std::invalid_argument("generate_with_target_lambda2: target must be > 0");
  double lo = 0.0;
  double hi = std::numbers::sqrt2;
  for (int probe = 0; probe < max_probes; ++probe) {
    const double mid = 0.5 * (lo + hi);
    rng::Stream s(rng::derive(seed, {rng::to_word(rng::Purpose::kGraphGen),
                                     static_cast<std::uint64_t>(probe)}));
    try {
      StaticGraph g = generate_random_geometric(n_nodes, mid, s, /*max_retries=*/50);
      const double l2 = lambda2(build_laplacian(g));
      if (std::abs(l2 - target) <= tol) return {std::move(g), mid, l2};
      if (l2 < target) {
        lo = mid;
      } else {
        hi = mid;
      }
    } catch (const std::runtime_error&) {
      lo = mid;  // too sparse to even connect
    }
  }
  throw std::runtime_error("generate_with_target_lambda2: no graph with lambda2 within " +
                           std::to_string(tol) + " of " + std::to_string(target) + " on " +
                           std::to_string(n_nodes) + " nodes after " + std::to_string(max_probes) +
                           " probes");
}

}  // namespace dmed
