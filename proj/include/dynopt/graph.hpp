#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace dynopt {

struct Edge {
  std::size_t i;
  std::size_t j;
  double w;
};

/// Weighted graph on nodes 0..n-1. Construction validates the invariants:
/// positive finite weights, no self-loops, no duplicate edges.
class WeightedGraph {
 public:
  WeightedGraph() = default;
  WeightedGraph(std::size_t n, std::vector<Edge> edges, bool directed = false);

  std::size_t size() const noexcept { return n_; }
  bool directed() const noexcept { return directed_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  /// Dense weighted adjacency. Symmetric for undirected graphs.
  Eigen::MatrixXd adjacency() const;
  /// Row sums of the adjacency (weighted out-degree).
  Eigen::VectorXd degrees() const;
  double total_weight() const;

  /// Neighbour lists (both directions for undirected graphs).
  std::vector<std::vector<std::size_t>> neighbours() const;

 private:
  std::size_t n_ = 0;
  std::vector<Edge> edges_;
  bool directed_ = false;
};

enum class GraphFormat { EdgeList, MatrixMarket, Rudy };

GraphFormat parse_graph_format(std::string_view name);
std::string_view to_string(GraphFormat f);

WeightedGraph read_graph(std::istream& in, GraphFormat format);
WeightedGraph load_graph(const std::filesystem::path& path, GraphFormat format);

/// Number of connected components (edge direction ignored).
std::size_t connected_components(const WeightedGraph& g);
inline bool is_connected(const WeightedGraph& g) { return g.size() > 0 && connected_components(g) == 1; }

}  // namespace dynopt
