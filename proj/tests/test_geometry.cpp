#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <tuple>

#include "fsml/diagnostics.hpp"
#include "fsml/error.hpp"
#include "fsml/geodesic.hpp"
#include "fsml/graph.hpp"
#include "fsml/intrinsic_dim.hpp"
#include "fsml/local_pca.hpp"
#include "fsml/pipeline.hpp"
#include "fsml/synth.hpp"
#include "fsml/transport.hpp"
#include "helpers.hpp"

using namespace fsml;
using namespace fsml::geometry;
using testing::sine_basis;
using testing::span_curves;
using testing::unit_grid;

namespace {

struct WarningCounter {
  std::size_t count = 0;
  WarningHandler previous;
  WarningCounter() {
    previous = set_warning_handler([this](std::string_view) { ++count; });
  }
  ~WarningCounter() { set_warning_handler(previous); }
};

// Kruskal with its own union-find: an MST oracle independent of the library's Prim.
double mst_weight(const Eigen::MatrixXd& d) {
  const std::size_t n = static_cast<std::size_t>(d.rows());
  std::vector<std::tuple<double, std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) edges.emplace_back(d(i, j), i, j);
  std::sort(edges.begin(), edges.end());
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<std::size_t(std::size_t)> find = [&](std::size_t x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
  double total = 0.0;
  for (auto [w, i, j] : edges)
    if (find(i) != find(j)) {
      parent[find(i)] = find(j);
      total += w;
    }
  return total;
}

Eigen::MatrixXd floyd_warshall(const NeighborGraph& g) {
  const auto n = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXd d = Eigen::MatrixXd::Constant(n, n, std::numeric_limits<double>::infinity());
  for (Eigen::Index i = 0; i < n; ++i) {
    d(i, i) = 0.0;
    for (const auto& e : g.neighbors(static_cast<std::size_t>(i))) d(i, static_cast<Eigen::Index>(e.to)) = e.weight;
  }
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) d(i, j) = std::min(d(i, j), d(i, k) + d(k, j));
  return d;
}

// Integer weights keep every path sum exact, so equality is bitwise.
NeighborGraph random_graph(std::mt19937_64& rng, std::size_t n, double density) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> weight(1, 9);
  NeighborGraph g(n);
  for (std::size_t v = 1; v < n; ++v) {
    std::uniform_int_distribution<std::size_t> pick(0, v - 1);
    g.add_edge(v, pick(rng), weight(rng));
  }
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = u + 1; v < n; ++v)
      if (unit(rng) < density) g.add_edge(u, v, weight(rng));
  return g;
}

// Orthonormal frame with random basis in span{sqrt2 sin(2 pi k t)}, k < m.
TangentFrame random_frame(std::mt19937_64& rng, const fda::GridPtr& grid, std::size_t d, std::size_t m) {
  const Eigen::MatrixXd raw = testing::random_points(rng, static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(d));
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(raw).householderQ() *
                            Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(d));
  const auto set = span_curves(grid, q.transpose(), sine_basis);
  TangentFrame f;
  f.basis = set.values;
  f.weighted_basis = f.basis * grid->weights().asDiagonal();
  f.local_mean = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid->size()));
  return f;
}

fda::CurveSet flat_sample(std::mt19937_64& rng, std::size_t n, std::size_t dim, const fda::GridPtr& grid) {
  // Random affine 2-plane: offset plus coordinates on two orthonormal directions.
  const Eigen::MatrixXd coords = testing::random_points(rng, static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim), 1.0);
  Eigen::MatrixXd coef(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim) + 1);
  coef.leftCols(static_cast<Eigen::Index>(dim)) = coords;
  coef.col(static_cast<Eigen::Index>(dim)).setConstant(0.7);
  return span_curves(grid, coef, sine_basis);
}

}  // namespace

TEST_SUITE("geometry") {

TEST_CASE("three collinear curves with k=1 form a chain") {
  const auto g = unit_grid(33);
  Eigen::MatrixXd coef(3, 1);
  coef << 0.0, 1.0, 2.0;
  const auto curves = span_curves(g, coef, sine_basis);
  const auto graph = build_graph(curves, 1);
  CHECK(graph.connected());
  CHECK(graph.edge_count() == 2);
  CHECK(graph.has_edge(0, 1));
  CHECK(graph.has_edge(1, 2));
  CHECK_FALSE(graph.has_edge(0, 2));
}

TEST_CASE("two far clusters are joined by the MST bridge") {
  std::mt19937_64 rng(3);
  Eigen::MatrixXd pts = testing::random_points(rng, 20, 2, 0.3);
  pts.bottomRows(10).col(0).array() += 50.0;
  const Eigen::MatrixXd d = testing::euclidean_distances(pts);
  const auto graph = build_graph(d, 2);
  CHECK(graph.connected());
  // Brute-force bridge: the shortest cross-cluster pair.
  double best = std::numeric_limits<double>::infinity();
  std::pair<std::size_t, std::size_t> bridge;
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t j = 10; j < 20; ++j)
      if (d(i, j) < best) {
        best = d(i, j);
        bridge = {i, j};
      }
  std::size_t cross = 0;
  for (std::size_t i = 0; i < 10; ++i)
    for (const auto& e : graph.neighbors(i))
      if (e.to >= 10) ++cross;
  CHECK(cross == 1);
  CHECK(graph.has_edge(bridge.first, bridge.second));
}

TEST_CASE("library MST matches a Kruskal oracle") {
  std::mt19937_64 rng(8);
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::MatrixXd d = testing::euclidean_distances(testing::random_points(rng, 25, 3));
    double total = 0.0;
    const auto edges = minimum_spanning_tree(d);
    CHECK(edges.size() == 24);
    for (auto [u, v] : edges) total += d(u, v);
    CHECK(total == doctest::Approx(mst_weight(d)).epsilon(1e-12));
  }
}

TEST_CASE("identical curves are connected at the floor weight") {
  const auto g = unit_grid(33);
  const auto curves = span_curves(g, Eigen::MatrixXd::Constant(5, 1, 0.4), sine_basis);
  WarningCounter warnings;
  const auto graph = build_graph(curves, 2);
  CHECK(graph.connected());
  CHECK(warnings.count > 0);
  for (std::size_t v = 0; v < 5; ++v)
    for (const auto& e : graph.neighbors(v)) CHECK(e.weight == kMinEdgeWeight);
}

TEST_CASE("graph preconditions") {
  const Eigen::MatrixXd d = Eigen::MatrixXd::Ones(3, 3) - Eigen::MatrixXd::Identity(3, 3);
  CHECK_THROWS_AS(build_graph(d, 0), PreconditionError);
  CHECK_THROWS_AS(build_graph(d, 3), PreconditionError);
}

TEST_CASE("augmented graphs are connected on clustered data") {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> clusters(2, 6);
  for (int rep = 0; rep < 50; ++rep) {
    const int c = clusters(rng);
    Eigen::MatrixXd pts = testing::random_points(rng, 8 * c, 3, 0.1);
    for (int k = 0; k < c; ++k) pts.block(8 * k, 0, 8, 1).array() += 10.0 * k;
    const auto graph = build_graph(testing::euclidean_distances(pts), 1 + rep % 4);
    CHECK(graph.connected());
    for (std::size_t v = 0; v < graph.size(); ++v)
      for (const auto& e : graph.neighbors(v)) {
        CHECK(e.to != v);
        CHECK(e.weight > 0.0);
        CHECK(graph.weight(e.to, v) == e.weight);
      }
  }
}

TEST_CASE("Dijkstra on a unit path graph") {
  NeighborGraph g(3);
  g.add_edge(0, 1, 1.0);
  g.add_edge(1, 2, 1.0);
  const auto tree = dijkstra_all_paths(g, 0);
  CHECK(tree.distance[2] == 2.0);
  CHECK(tree.path_to(2) == std::vector<std::size_t>{0, 1, 2});
  CHECK(tree.distance[0] == 0.0);
  CHECK(tree.path_to(0).empty());
}

TEST_CASE("Dijkstra ties prefer the smaller predecessor") {
  // 0-1-3 and 0-2-3 have equal length; vertex 3 must hang off 1.
  NeighborGraph g(4);
  g.add_edge(0, 2, 1.0);
  g.add_edge(2, 3, 1.0);
  g.add_edge(0, 1, 1.0);
  g.add_edge(1, 3, 1.0);
  CHECK(dijkstra_all_paths(g, 0).predecessor[3] == 1);
}

TEST_CASE("Dijkstra agrees with Floyd-Warshall on random graphs") {
  std::mt19937_64 rng(17);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 2 + static_cast<std::size_t>(rep % 29);
    const auto g = random_graph(rng, n, 0.15);
    const Eigen::MatrixXd oracle = floyd_warshall(g);
    for (std::size_t s = 0; s < n; ++s) {
      const auto tree = dijkstra_all_paths(g, s);
      for (std::size_t t = 0; t < n; ++t) {
        CHECK(tree.distance[t] == oracle(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t)));
        // Path length equals the distance.
        const auto path = tree.path_to(t);
        double len = 0.0;
        for (std::size_t k = 1; k < path.size(); ++k) len += g.weight(path[k - 1], path[k]);
        CHECK(len == tree.distance[t]);
      }
    }
  }
}

TEST_CASE("local PCA on an exact 2-plane") {
  std::mt19937_64 rng(4);
  const auto g = unit_grid(101);
  const auto curves = flat_sample(rng, 40, 2, g);
  for (std::size_t anchor : {0u, 7u, 39u}) {
    const auto frame = local_pca(curves, anchor, 15, 2);
    CHECK(frame.dim() == 2);
    for (Eigen::Index k = 2; k < frame.eigenvalues.size(); ++k) CHECK(std::abs(frame.eigenvalues[k]) < 1e-10);
    const Eigen::MatrixXd gram = frame.weighted_basis * frame.basis.transpose();
    CHECK((gram - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-8);
    for (Eigen::Index k = 0; k < 2; ++k) {
      Eigen::Index arg;
      frame.basis.row(k).cwiseAbs().maxCoeff(&arg);
      CHECK(frame.basis(k, arg) > 0.0);
    }
  }
}

TEST_CASE("local PCA preconditions") {
  std::mt19937_64 rng(4);
  const auto curves = flat_sample(rng, 10, 2, unit_grid(33));
  CHECK_THROWS_AS(local_pca(curves, 0, 2, 2), PreconditionError);
  CHECK_THROWS_AS(local_pca(curves, 0, 11, 2), PreconditionError);
}

TEST_CASE("local PCA frames capture model (ii) neighbourhoods") {
  synth::SynthSpec spec;
  spec.model = synth::Model::swiss_rolls;
  spec.n = 200;
  spec.seed = 2;
  const auto data = synth::generate(spec);
  const auto grid = unit_grid(101);
  const auto curves = pipeline::smooth_all(data.curves, grid, fda::Kernel(), fda::BandwidthRule::plugin);
  std::vector<double> ratios;
  for (std::size_t i = 0; i < curves.size(); ++i) {
    const auto frame = local_pca(curves, i, 15, 2);
    // Oracle: least-squares residual of each centred neighbour after
    // projection, computed directly in the quadrature-weighted space.
    const Eigen::MatrixXd basis_w = frame.basis * grid->sqrt_weights().asDiagonal();
    double resid = 0.0, total = 0.0;
    for (std::size_t j : frame.neighbors) {
      const Eigen::VectorXd c = (curves.values.row(static_cast<Eigen::Index>(j)).transpose() - frame.local_mean)
                                    .cwiseProduct(grid->sqrt_weights());
      const Eigen::VectorXd p = basis_w.transpose() * (basis_w * c);
      resid += (c - p).squaredNorm();
      total += c.squaredNorm();
    }
    ratios.push_back(std::sqrt(resid / total));
  }
  CHECK(testing::median(ratios) < 0.15);
}

TEST_CASE("TWO-NN recovers the dimension of dense noiseless samples") {
  // Curves are evaluated directly on the grid: the estimator sees manifold
  // samples without presmoothing error.
  auto rate = [](synth::Model model, int expected) {
    int hits = 0;
    for (int seed = 0; seed < 50; ++seed) {
      synth::SynthSpec spec;
      spec.model = model;
      spec.n = 500;
      spec.J = 101;
      spec.noise = false;
      spec.seed = static_cast<std::uint64_t>(seed);
      const auto data = synth::generate(spec);
      const fda::CurveSet curves{unit_grid(101), data.clean};
      if (estimate_intrinsic_dim(curves).dimension == expected) ++hits;
    }
    return hits;
  };
  CHECK(rate(synth::Model::warping_family, 1) >= 40);
  CHECK(rate(synth::Model::swiss_rolls, 2) >= 40);
}

TEST_CASE("TWO-NN on exact planes and degenerate input") {
  std::mt19937_64 rng(9);
  for (std::size_t dim : {1u, 2u, 3u}) {
    const Eigen::MatrixXd pts = testing::random_points(rng, 800, static_cast<Eigen::Index>(dim));
    CHECK(estimate_intrinsic_dim(testing::euclidean_distances(pts)).dimension == static_cast<int>(dim));
  }
  CHECK_THROWS_AS(estimate_intrinsic_dim(Eigen::MatrixXd::Zero(30, 30)), InsufficientDataError);
  CHECK_THROWS_AS(estimate_intrinsic_dim(Eigen::MatrixXd::Ones(10, 10)), PreconditionError);
}

TEST_CASE("transport between identical and swapped frames") {
  std::mt19937_64 rng(1);
  const auto grid = unit_grid(101);
  const auto f = random_frame(rng, grid, 2, 6);
  CHECK((transport_operator(f, f) - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() < 1e-10);
  TangentFrame swapped = f;
  swapped.basis.row(0) = f.basis.row(1);
  swapped.basis.row(1) = f.basis.row(0);
  swapped.weighted_basis = swapped.basis * grid->weights().asDiagonal();
  Eigen::Matrix2d perm;
  perm << 0, 1, 1, 0;
  CHECK((transport_operator(f, swapped) - perm).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("transport operators are orthogonal") {
  std::mt19937_64 rng(12);
  const auto grid = unit_grid(101);
  for (std::size_t d : {1u, 2u, 3u, 5u}) {
    for (int rep = 0; rep < 50; ++rep) {
      const auto a = random_frame(rng, grid, d, 12);
      const auto b = random_frame(rng, grid, d, 12);
      const Eigen::MatrixXd r = transport_operator(a, b);
      const auto D = static_cast<Eigen::Index>(d);
      CHECK((r.transpose() * r - Eigen::MatrixXd::Identity(D, D)).cwiseAbs().maxCoeff() < 1e-8);
      CHECK(std::abs(std::abs(r.determinant()) - 1.0) < 1e-8);
    }
  }
  const auto a = random_frame(rng, grid, 2, 6);
  const auto b = random_frame(rng, grid, 3, 6);
  CHECK_THROWS_AS(transport_operator(a, b), ParameterError);
}

TEST_CASE("single-edge unfolded distance is the tangent projection") {
  std::mt19937_64 rng(6);
  const auto grid = unit_grid(101);
  Eigen::MatrixXd coef = testing::random_points(rng, 20, 4);
  const auto curves = span_curves(grid, coef, sine_basis);
  const auto l2 = fda::pairwise_l2_distances(curves);
  const auto graph = build_graph(l2, 4);
  const auto frames = tangent_frames(curves, l2, 6, 2);
  for (std::size_t j : {1u, 5u}) {
    const auto& e = graph.neighbors(j).front();
    GeodesicPath path{{e.to, j}};
    const double unfolded = unfolded_geodesic_distance(path, curves, frames);
    const Eigen::VectorXd v = path.edge_vector(curves, 1);
    // Oracle: project on the frame at j (the edge's endpoint nearer j).
    const double projected = frames[j].coordinates(v).norm();
    CHECK(unfolded == doctest::Approx(projected).epsilon(1e-12));
    CHECK(unfolded <= l2(static_cast<Eigen::Index>(e.to), static_cast<Eigen::Index>(j)) + 1e-12);
  }
}

TEST_CASE("two adjacent curves") {
  const auto grid = unit_grid(101);
  Eigen::MatrixXd coef(2, 2);
  coef << 0.0, 1.0, 1.0, 0.5;
  const auto curves = span_curves(grid, coef, sine_basis);
  const auto l2 = fda::pairwise_l2_distances(curves);
  const auto graph = build_graph(l2, 1);
  const auto frames = tangent_frames(curves, l2, 2, 1);
  const auto geo = geodesic_distance_matrix(curves, graph, frames);
  CHECK(geo.unfolded(0, 0) == 0.0);
  CHECK(geo.unfolded(1, 1) == 0.0);
  CHECK(geo.unfolded(0, 1) == geo.unfolded(1, 0));
  CHECK(geo.unfolded(0, 1) <= l2(0, 1) + 1e-12);
}

TEST_CASE("flat subspaces: unfolded distances equal L2 distances") {
  const auto grid = unit_grid(101);
  for (int seed = 0; seed < 10; ++seed) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(100 + seed));
    const auto curves = flat_sample(rng, 80, 2, grid);
    const auto geo = pipeline::compute_geometry(curves, 10, 10, 2);
    CHECK((geo.geodesics.unfolded - geo.l2).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(geo.geodesics.unfolded == geo.geodesics.unfolded.transpose());
  }
}

TEST_CASE("unfolded distance never exceeds the Dijkstra length") {
  synth::SynthSpec spec;
  spec.model = synth::Model::torus;
  spec.n = 150;
  spec.J = 101;
  spec.noise = false;
  spec.seed = 5;
  const auto data = synth::generate(spec);
  const auto geo = pipeline::compute_geometry(fda::CurveSet{unit_grid(101), data.clean}, 12, 12, 2);
  CHECK(((geo.geodesics.unfolded - geo.geodesics.path_lengths).array() <= 1e-9).all());
  CHECK((geo.geodesics.unfolded.array() >= 0.0).all());
  CHECK(geo.geodesics.unfolded == geo.geodesics.unfolded.transpose());
}

TEST_CASE("noiseless Swiss rolls: unfolded distances track the intrinsic chart") {
  synth::SynthSpec spec;
  spec.model = synth::Model::swiss_rolls;
  spec.n = 500;
  spec.J = 101;
  spec.noise = false;
  spec.seed = 0;
  const auto data = synth::generate(spec);
  // k_graph = 15 links the interleaved sheets of the two rolls in the sparse
  // outer layers at this n; a lighter graph with the default k_pca avoids that.
  const auto geo = pipeline::compute_geometry(fda::CurveSet{unit_grid(101), data.clean}, 15, 8, 2);
  const auto& chart = *data.intrinsic;
  std::vector<double> rel;
  for (Eigen::Index i = 0; i < chart.rows(); ++i)
    for (Eigen::Index j = i + 1; j < chart.rows(); ++j) {
      const double truth = (chart.row(i) - chart.row(j)).norm();
      rel.push_back(std::abs(geo.geodesics.unfolded(i, j) - truth) / truth);
    }
  CHECK(testing::median(rel) < 0.10);
}

}
