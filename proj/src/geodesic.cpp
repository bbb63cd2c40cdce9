#include "fsml/geodesic.hpp"

#include <map>

#include "fsml/error.hpp"
#include "fsml/parallel.hpp"
#include "fsml/transport.hpp"

namespace fsml::geometry {

Eigen::VectorXd GeodesicPath::edge_vector(const fda::CurveSet& curves, std::size_t k) const {
  if (k < 1 || k > steps()) throw ParameterError("path edge index out of range");
  return (curves.values.row(static_cast<Eigen::Index>(vertices[k - 1])) -
          curves.values.row(static_cast<Eigen::Index>(vertices[k])))
      .transpose();
}

double GeodesicPath::length(const NeighborGraph& graph) const {
  double total = 0.0;
  for (std::size_t k = 1; k < vertices.size(); ++k) total += graph.weight(vertices[k - 1], vertices[k]);
  return total;
}

GeodesicPath geodesic_path(const ShortestPathTree& tree_from_i, std::size_t j) {
  GeodesicPath p;
  p.vertices = tree_from_i.path_to(j);
  if (p.vertices.empty() && j != tree_from_i.source) throw PreconditionError("vertices are not connected");
  return p;
}

double unfolded_geodesic_distance(const GeodesicPath& path, const fda::CurveSet& curves,
                                  std::span<const TangentFrame> frames) {
  if (path.steps() == 0) return 0.0;
  Eigen::VectorXd acc;
  for (std::size_t k = 1; k <= path.steps(); ++k) {
    const std::size_t here = path.vertices[k];
    if (here >= frames.size()) throw PreconditionError("missing tangent frame at path vertex");
    const Eigen::VectorXd v = frames[here].coordinates(path.edge_vector(curves, k));
    if (k == 1) {
      acc = v;
    } else {
      acc = transport_operator(frames[path.vertices[k - 1]], frames[here]) * acc + v;
    }
  }
  return acc.norm();
}

GeodesicDistances GeodesicDistances::restrict_to(std::span<const std::size_t> indices) const {
  const auto m = static_cast<Eigen::Index>(indices.size());
  GeodesicDistances out{Eigen::MatrixXd(m, m), Eigen::MatrixXd(m, m)};
  for (Eigen::Index a = 0; a < m; ++a)
    for (Eigen::Index b = 0; b < m; ++b) {
      const auto i = static_cast<Eigen::Index>(indices[static_cast<std::size_t>(a)]);
      const auto j = static_cast<Eigen::Index>(indices[static_cast<std::size_t>(b)]);
      out.unfolded(a, b) = unfolded(i, j);
      out.path_lengths(a, b) = path_lengths(i, j);
    }
  return out;
}

GeodesicDistances geodesic_distance_matrix(const fda::CurveSet& curves, const NeighborGraph& graph,
                                           std::span<const TangentFrame> frames) {
  const std::size_t n = graph.size();
  if (curves.size() != n) throw ParameterError("graph and curve set sizes differ");
  if (frames.size() != n) throw PreconditionError("need one tangent frame per vertex");
  if (!graph.connected()) throw PreconditionError("neighbour graph is not connected");

  // Transport operators per undirected edge, stored for (lo -> hi).
  std::vector<std::vector<std::pair<std::size_t, Eigen::MatrixXd>>> transports(n);
  parallel_for(n, [&](std::size_t u) {
    for (const Edge& e : graph.neighbors(u))
      if (u < e.to) transports[u].emplace_back(e.to, transport_operator(frames[u], frames[e.to]));
  });
  auto transport = [&](std::size_t from, std::size_t to) -> Eigen::MatrixXd {
    const std::size_t lo = std::min(from, to), hi = std::max(from, to);
    for (const auto& [v, r] : transports[lo])
      if (v == hi) return from == lo ? r : Eigen::MatrixXd(r.transpose());
    throw PreconditionError("transport requested along a non-edge");
  };

  // toward(j, i): unfolded norm of the path i -> j, expressed in frame j.
  Eigen::MatrixXd toward(n, n);
  Eigen::MatrixXd lengths(n, n);
  parallel_for(n, [&](std::size_t j) {
    const ShortestPathTree tree = dijkstra_all_paths(graph, j);
    const std::size_t d = frames[j].dim();
    std::vector<Eigen::MatrixXd> to_root(n);  // frame u -> frame j
    std::vector<Eigen::VectorXd> aggregate(n);
    to_root[j] = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    aggregate[j] = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
    const auto jj = static_cast<Eigen::Index>(j);
    toward(jj, jj) = 0.0;
    lengths(jj, jj) = 0.0;
    for (std::size_t u : tree.settle_order) {
      if (u == j) continue;
      const std::size_t p = tree.predecessor[u];
      const Eigen::VectorXd edge =
          (curves.values.row(static_cast<Eigen::Index>(u)) - curves.values.row(static_cast<Eigen::Index>(p)))
              .transpose();
      const Eigen::VectorXd v = frames[p].coordinates(edge);
      aggregate[u] = to_root[p] * v + aggregate[p];
      to_root[u] = to_root[p] * transport(u, p);
      toward(jj, static_cast<Eigen::Index>(u)) = aggregate[u].norm();
      lengths(jj, static_cast<Eigen::Index>(u)) = tree.distance[u];
    }
  });

  GeodesicDistances out{Eigen::MatrixXd(n, n), Eigen::MatrixXd(n, n)};
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i)
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(n); ++j) {
      out.unfolded(i, j) = 0.5 * (toward(i, j) + toward(j, i));
      out.path_lengths(i, j) = 0.5 * (lengths(i, j) + lengths(j, i));
    }
  return out;
}

}  // namespace fsml::geometry
