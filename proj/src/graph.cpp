#include "fsml/graph.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <queue>
#include <sstream>

#include "fsml/diagnostics.hpp"
#include "fsml/error.hpp"

namespace fsml::geometry {

bool NeighborGraph::has_edge(std::size_t u, std::size_t v) const {
  const auto& adj = adjacency_.at(u);
  auto it = std::lower_bound(adj.begin(), adj.end(), v, [](const Edge& e, std::size_t x) { return e.to < x; });
  return it != adj.end() && it->to == v;
}

double NeighborGraph::weight(std::size_t u, std::size_t v) const {
  const auto& adj = adjacency_.at(u);
  auto it = std::lower_bound(adj.begin(), adj.end(), v, [](const Edge& e, std::size_t x) { return e.to < x; });
  if (it == adj.end() || it->to != v) return std::numeric_limits<double>::infinity();
  return it->weight;
}

std::size_t NeighborGraph::edge_count() const {
  std::size_t twice = 0;
  for (const auto& adj : adjacency_) twice += adj.size();
  return twice / 2;
}

void NeighborGraph::add_edge(std::size_t u, std::size_t v, double weight) {
  if (u == v) throw ParameterError("self-loops are not allowed");
  if (u >= size() || v >= size()) throw ParameterError("edge endpoint out of range");
  if (has_edge(u, v)) return;
  if (weight < kMinEdgeWeight) {
    std::ostringstream msg;
    msg << "edge " << u << "-" << v << " has weight " << weight << "; floored at " << kMinEdgeWeight;
    warn(msg.str());
    weight = kMinEdgeWeight;
  }
  auto insert = [](std::vector<Edge>& adj, Edge e) {
    auto it = std::lower_bound(adj.begin(), adj.end(), e.to, [](const Edge& a, std::size_t x) { return a.to < x; });
    adj.insert(it, e);
  };
  insert(adjacency_[u], {v, weight});
  insert(adjacency_[v], {u, weight});
}

std::vector<std::size_t> NeighborGraph::components() const {
  std::vector<std::size_t> comp(size(), kNoVertex);
  std::size_t next = 0;
  std::vector<std::size_t> stack;
  for (std::size_t s = 0; s < size(); ++s) {
    if (comp[s] != kNoVertex) continue;
    comp[s] = next;
    stack.assign(1, s);
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      for (const Edge& e : adjacency_[v])
        if (comp[e.to] == kNoVertex) {
          comp[e.to] = next;
          stack.push_back(e.to);
        }
    }
    ++next;
  }
  return comp;
}

bool NeighborGraph::connected() const {
  const auto comp = components();
  return std::all_of(comp.begin(), comp.end(), [](std::size_t c) { return c == 0; });
}

std::vector<std::size_t> nearest_indices(const Eigen::Ref<const Eigen::VectorXd>& distances, std::size_t k,
                                         std::size_t self) {
  std::vector<std::size_t> idx;
  idx.reserve(static_cast<std::size_t>(distances.size()));
  for (Eigen::Index i = 0; i < distances.size(); ++i)
    if (static_cast<std::size_t>(i) != self) idx.push_back(static_cast<std::size_t>(i));
  k = std::min(k, idx.size());
  auto less = [&](std::size_t a, std::size_t b) {
    const double da = distances[static_cast<Eigen::Index>(a)];
    const double db = distances[static_cast<Eigen::Index>(b)];
    return da < db || (da == db && a < b);
  };
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(), less);
  idx.resize(k);
  return idx;
}

std::vector<std::pair<std::size_t, std::size_t>> minimum_spanning_tree(const Eigen::MatrixXd& distances) {
  const std::size_t n = static_cast<std::size_t>(distances.rows());
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  if (n < 2) return edges;
  // Prim on the dense matrix; ties resolved towards smaller indices.
  std::vector<bool> in_tree(n, false);
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> link(n, kNoVertex);
  best[0] = 0.0;
  for (std::size_t step = 0; step < n; ++step) {
    std::size_t u = kNoVertex;
    for (std::size_t v = 0; v < n; ++v)
      if (!in_tree[v] && (u == kNoVertex || best[v] < best[u])) u = v;
    in_tree[u] = true;
    if (link[u] != kNoVertex) edges.emplace_back(std::min(u, link[u]), std::max(u, link[u]));
    for (std::size_t v = 0; v < n; ++v) {
      if (in_tree[v]) continue;
      const double w = distances(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v));
      if (w < best[v] || (w == best[v] && u < link[v])) {
        best[v] = w;
        link[v] = u;
      }
    }
  }
  std::sort(edges.begin(), edges.end(), [&](const auto& a, const auto& b) {
    const double wa = distances(static_cast<Eigen::Index>(a.first), static_cast<Eigen::Index>(a.second));
    const double wb = distances(static_cast<Eigen::Index>(b.first), static_cast<Eigen::Index>(b.second));
    return wa < wb || (wa == wb && a < b);
  });
  return edges;
}

NeighborGraph build_graph(const Eigen::MatrixXd& distances, std::size_t k_graph) {
  const std::size_t n = static_cast<std::size_t>(distances.rows());
  if (distances.cols() != distances.rows()) throw ParameterError("distance matrix must be square");
  if (k_graph < 1) throw PreconditionError("k_graph must be at least 1");
  if (n < k_graph + 1)
    throw PreconditionError("graph needs n >= k_graph + 1 (n=" + std::to_string(n) +
                            ", k_graph=" + std::to_string(k_graph) + ")");

  NeighborGraph graph(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j : nearest_indices(distances.col(static_cast<Eigen::Index>(i)), k_graph, i))
      graph.add_edge(i, j, distances(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));

  if (!graph.connected()) {
    // Union-find over current components; add MST edges that merge two of them.
    auto comp = graph.components();
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    std::vector<std::size_t> representative(n, kNoVertex);
    for (std::size_t v = 0; v < n; ++v) {
      if (representative[comp[v]] == kNoVertex) representative[comp[v]] = v;
      parent[v] = representative[comp[v]];
    }
    std::size_t merges_needed = *std::max_element(comp.begin(), comp.end());
    for (const auto& [u, v] : minimum_spanning_tree(distances)) {
      if (merges_needed == 0) break;
      const std::size_t ru = find(u), rv = find(v);
      if (ru == rv) continue;
      parent[ru] = rv;
      graph.add_edge(u, v, distances(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v)));
      --merges_needed;
    }
  }
  return graph;
}

NeighborGraph build_graph(const fda::CurveSet& curves, std::size_t k_graph) {
  return build_graph(fda::pairwise_l2_distances(curves), k_graph);
}

std::vector<std::size_t> ShortestPathTree::path_to(std::size_t target) const {
  std::vector<std::size_t> path;
  if (target == source) return path;
  if (predecessor.at(target) == kNoVertex) return path;
  for (std::size_t v = target; v != kNoVertex; v = predecessor[v]) path.push_back(v);
  std::reverse(path.begin(), path.end());
  return path;
}

ShortestPathTree dijkstra_all_paths(const NeighborGraph& graph, std::size_t source) {
  const std::size_t n = graph.size();
  if (source >= n) throw ParameterError("source vertex out of range");
  ShortestPathTree tree;
  tree.source = source;
  tree.distance.assign(n, std::numeric_limits<double>::infinity());
  tree.predecessor.assign(n, kNoVertex);
  tree.settle_order.reserve(n);

  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  std::vector<bool> settled(n, false);
  tree.distance[source] = 0.0;
  queue.emplace(0.0, source);
  while (!queue.empty()) {
    const auto [d, u] = queue.top();
    queue.pop();
    if (settled[u] || d > tree.distance[u]) continue;
    settled[u] = true;
    tree.settle_order.push_back(u);
    for (const Edge& e : graph.neighbors(u)) {
      if (settled[e.to]) continue;
      const double candidate = d + e.weight;
      if (candidate < tree.distance[e.to]) {
        tree.distance[e.to] = candidate;
        tree.predecessor[e.to] = u;
        queue.emplace(candidate, e.to);
      } else if (candidate == tree.distance[e.to] && u < tree.predecessor[e.to]) {
        tree.predecessor[e.to] = u;
      }
    }
  }
  return tree;
}

}  // namespace fsml::geometry
