#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "fsml/curve.hpp"

namespace fsml::geometry {

/// Smallest accepted edge weight; coincident curves are joined at this weight.
inline constexpr double kMinEdgeWeight = 1e-12;

struct Edge {
  std::size_t to;
  double weight;
};

/// Undirected weighted graph over curve indices. Adjacency lists are sorted
/// by neighbour index.
class NeighborGraph {
 public:
  explicit NeighborGraph(std::size_t n) : adjacency_(n) {}

  std::size_t size() const { return adjacency_.size(); }
  const std::vector<Edge>& neighbors(std::size_t v) const { return adjacency_[v]; }
  bool has_edge(std::size_t u, std::size_t v) const;
  double weight(std::size_t u, std::size_t v) const;
  std::size_t edge_count() const;

  /// Inserts (or keeps) the edge u-v; weights below kMinEdgeWeight are floored.
  void add_edge(std::size_t u, std::size_t v, double weight);

  bool connected() const;
  /// Component id per vertex, numbered in order of smallest member.
  std::vector<std::size_t> components() const;

 private:
  std::vector<std::vector<Edge>> adjacency_;
};

/// Indices of the k nearest rows (excluding `self`) by the given distances,
/// ties broken by smaller index.
std::vector<std::size_t> nearest_indices(const Eigen::Ref<const Eigen::VectorXd>& distances, std::size_t k,
                                         std::size_t self = static_cast<std::size_t>(-1));

/// Symmetric k-NN graph under L2 distance, augmented with minimum spanning
/// tree edges (lightest first) until connected.
NeighborGraph build_graph(const fda::CurveSet& curves, std::size_t k_graph);
NeighborGraph build_graph(const Eigen::MatrixXd& distances, std::size_t k_graph);

/// Minimum spanning tree edges (u < v) of the complete graph with the given
/// distances, sorted by (weight, u, v).
std::vector<std::pair<std::size_t, std::size_t>> minimum_spanning_tree(const Eigen::MatrixXd& distances);

inline constexpr std::size_t kNoVertex = static_cast<std::size_t>(-1);

struct ShortestPathTree {
  std::size_t source = kNoVertex;
  std::vector<double> distance;
  std::vector<std::size_t> predecessor;  // kNoVertex for the source
  std::vector<std::size_t> settle_order;

  /// Vertices source..target; empty when target == source.
  std::vector<std::size_t> path_to(std::size_t target) const;
};

/// Exact single-source shortest paths. Equal tentative distances keep the
/// predecessor with the smaller index, and the queue pops (distance, index)
/// in lexicographic order.
ShortestPathTree dijkstra_all_paths(const NeighborGraph& graph, std::size_t source);

}  // namespace fsml::geometry
