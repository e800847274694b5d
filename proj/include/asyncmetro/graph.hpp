#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "asyncmetro/types.hpp"

namespace asyncmetro {

/// Simple undirected graph stored as sorted adjacency lists (CSR).
class Graph {
 public:
  Graph() = default;

  /// Builds from an edge list. Self-loops and out-of-range endpoints throw
  /// std::invalid_argument; repeated edges collapse into one.
  Graph(NodeId n, std::span<const std::pair<NodeId, NodeId>> edges);

  NodeId num_nodes() const { return n_; }
  std::size_t num_edges() const { return targets_.size() / 2; }
  std::uint32_t max_degree() const { return max_degree_; }

  std::span<const NodeId> neighbors(NodeId v) const {
    return {targets_.data() + offsets_[v], targets_.data() + offsets_[v + 1]};
  }
  std::uint32_t degree(NodeId v) const { return offsets_[v + 1] - offsets_[v]; }

  /// Directed-edge id of (v -> neighbors(v)[k]); ids are dense in [0, 2|E|).
  std::size_t edge_id(NodeId v, std::uint32_t k) const { return offsets_[v] + k; }

  /// Position of u inside neighbors(v), or degree(v) if absent.
  std::uint32_t neighbor_slot(NodeId v, NodeId u) const;

  bool has_edge(NodeId u, NodeId v) const { return neighbor_slot(u, v) < degree(u); }

  std::vector<std::pair<NodeId, NodeId>> edges() const;

 private:
  NodeId n_ = 0;
  std::uint32_t max_degree_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<NodeId> targets_;
};

namespace graphs {

Graph empty(NodeId n);
Graph path(NodeId n);
Graph cycle(NodeId n);
Graph complete(NodeId n);
Graph star(NodeId leaves);
Graph grid(NodeId rows, NodeId cols);

/// Uniform-ish random d-regular simple graph (pairing model with restarts on
/// stuck pairings). Requires n*d even and d < n.
Graph random_regular(NodeId n, std::uint32_t d, std::uint64_t seed);

/// Parses "u v" pairs, one per line, 0-indexed. Blank lines and lines starting
/// with '#' are ignored. The node count is 1 + the largest id unless
/// `min_nodes` is larger.
Graph read_edge_list(std::istream& in, NodeId min_nodes = 0);
Graph load_edge_list(const std::string& path, NodeId min_nodes = 0);
void write_edge_list(std::ostream& out, const Graph& g);

}  // namespace graphs
}  // namespace asyncmetro
