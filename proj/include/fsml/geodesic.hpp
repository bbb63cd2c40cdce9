#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "fsml/curve.hpp"
#include "fsml/graph.hpp"
#include "fsml/local_pca.hpp"

namespace fsml::geometry {

/// A shortest graph path (i = i_0, ..., i_m = j).
struct GeodesicPath {
  std::vector<std::size_t> vertices;

  std::size_t steps() const { return vertices.empty() ? 0 : vertices.size() - 1; }
  /// Edge vector X_{i_{k-1}} - X_{i_k} for k in [1, steps()].
  Eigen::VectorXd edge_vector(const fda::CurveSet& curves, std::size_t k) const;
  /// Sum of graph edge weights along the path.
  double length(const NeighborGraph& graph) const;
};

GeodesicPath geodesic_path(const ShortestPathTree& tree_from_i, std::size_t j);

/// Norm of the unfolded path: each edge is projected on the tangent frame at
/// its endpoint nearer j, transported along the remaining path to the frame
/// at j, and the transported vectors are summed.
double unfolded_geodesic_distance(const GeodesicPath& path, const fda::CurveSet& curves,
                                  std::span<const TangentFrame> frames);

struct GeodesicDistances {
  Eigen::MatrixXd unfolded;      // symmetric, zero diagonal
  Eigen::MatrixXd path_lengths;  // Dijkstra lengths, same layout

  std::size_t size() const { return static_cast<std::size_t>(unfolded.rows()); }
  GeodesicDistances restrict_to(std::span<const std::size_t> indices) const;
};

/// Entry (i, j) averages the unfolded norms of the i->j and j->i paths.
GeodesicDistances geodesic_distance_matrix(const fda::CurveSet& curves, const NeighborGraph& graph,
                                           std::span<const TangentFrame> frames);

}  // namespace fsml::geometry
