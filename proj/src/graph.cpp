#include "asyncmetro/graph.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include "asyncmetro/random.hpp"

namespace asyncmetro {

Graph::Graph(NodeId n, std::span<const std::pair<NodeId, NodeId>> edges) : n_(n) {
  std::vector<std::vector<NodeId>> adj(n);
  for (auto [u, v] : edges) {
    if (u >= n || v >= n) {
      throw std::invalid_argument("edge (" + std::to_string(u) + "," + std::to_string(v) +
                                  ") out of range for n=" + std::to_string(n));
    }
    if (u == v) throw std::invalid_argument("self-loop at node " + std::to_string(u));
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  offsets_.assign(n + 1, 0);
  for (NodeId v = 0; v < n; ++v) {
    auto& list = adj[v];
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
    offsets_[v + 1] = offsets_[v] + list.size();
    max_degree_ = std::max<std::uint32_t>(max_degree_, static_cast<std::uint32_t>(list.size()));
  }
  targets_.reserve(offsets_[n]);
  for (auto& list : adj) targets_.insert(targets_.end(), list.begin(), list.end());
}

std::uint32_t Graph::neighbor_slot(NodeId v, NodeId u) const {
  auto nb = neighbors(v);
  auto it = std::lower_bound(nb.begin(), nb.end(), u);
  if (it == nb.end() || *it != u) return static_cast<std::uint32_t>(nb.size());
  return static_cast<std::uint32_t>(it - nb.begin());
}

std::vector<std::pair<NodeId, NodeId>> Graph::edges() const {
  std::vector<std::pair<NodeId, NodeId>> out;
  out.reserve(num_edges());
  for (NodeId u = 0; u < n_; ++u) {
    for (NodeId v : neighbors(u)) {
      if (u < v) out.emplace_back(u, v);
    }
  }
  return out;
}

namespace graphs {

Graph empty(NodeId n) { return Graph(n, {}); }

Graph path(NodeId n) {
  std::vector<std::pair<NodeId, NodeId>> e;
  for (NodeId v = 0; v + 1 < n; ++v) e.emplace_back(v, v + 1);
  return Graph(n, e);
}

Graph cycle(NodeId n) {
  if (n < 3) throw std::invalid_argument("cycle needs at least 3 nodes");
  std::vector<std::pair<NodeId, NodeId>> e;
  for (NodeId v = 0; v < n; ++v) e.emplace_back(v, (v + 1) % n);
  return Graph(n, e);
}

Graph complete(NodeId n) {
  std::vector<std::pair<NodeId, NodeId>> e;
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v = u + 1; v < n; ++v) e.emplace_back(u, v);
  return Graph(n, e);
}

Graph star(NodeId leaves) {
  std::vector<std::pair<NodeId, NodeId>> e;
  for (NodeId v = 1; v <= leaves; ++v) e.emplace_back(0, v);
  return Graph(leaves + 1, e);
}

Graph grid(NodeId rows, NodeId cols) {
  std::vector<std::pair<NodeId, NodeId>> e;
  for (NodeId r = 0; r < rows; ++r) {
    for (NodeId c = 0; c < cols; ++c) {
      const NodeId v = r * cols + c;
      if (c + 1 < cols) e.emplace_back(v, v + 1);
      if (r + 1 < rows) e.emplace_back(v, v + cols);
    }
  }
  return Graph(rows * cols, e);
}

Graph random_regular(NodeId n, std::uint32_t d, std::uint64_t seed) {
  if (d >= n && !(n == 0 && d == 0)) throw std::invalid_argument("random_regular: need d < n");
  if ((static_cast<std::uint64_t>(n) * d) % 2 != 0)
    throw std::invalid_argument("random_regular: n*d must be even");
  std::mt19937_64 gen(rng::derive_seed(seed, 0x7265677261706800ULL));

  // Pair points one edge at a time, choosing uniformly among the remaining
  // points and rejecting loops/multi-edges; restart when no admissible pair
  // is left.
  for (int attempt = 0; attempt < 10000; ++attempt) {
    std::vector<NodeId> points;
    points.reserve(static_cast<std::size_t>(n) * d);
    for (NodeId v = 0; v < n; ++v)
      for (std::uint32_t k = 0; k < d; ++k) points.push_back(v);
    std::vector<std::vector<NodeId>> adj(n);
    std::vector<std::pair<NodeId, NodeId>> edges;
    bool stuck = false;
    while (!points.empty()) {
      bool placed = false;
      for (int tries = 0; tries < 200 && !placed; ++tries) {
        const auto i = rng::below(gen, points.size());
        const auto j = rng::below(gen, points.size());
        const NodeId a = points[i], b = points[j];
        if (i == j || a == b) continue;
        if (std::find(adj[a].begin(), adj[a].end(), b) != adj[a].end()) continue;
        adj[a].push_back(b);
        adj[b].push_back(a);
        edges.emplace_back(a, b);
        const auto hi = std::max(i, j), lo = std::min(i, j);
        points[hi] = points.back();
        points.pop_back();
        points[lo] = points.back();
        points.pop_back();
        placed = true;
      }
      if (!placed) {
        stuck = true;
        break;
      }
    }
    if (!stuck) return Graph(n, edges);
  }
  throw std::runtime_error("random_regular: failed to build a simple graph");
}

Graph read_edge_list(std::istream& in, NodeId min_nodes) {
  std::vector<std::pair<NodeId, NodeId>> e;
  NodeId n = min_nodes;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    long long u = -1, v = -1;
    if (!(ls >> u >> v) || u < 0 || v < 0) {
      throw std::invalid_argument("edge list line " + std::to_string(lineno) + ": expected 'u v'");
    }
    e.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
    n = std::max<NodeId>(n, static_cast<NodeId>(std::max(u, v) + 1));
  }
  return Graph(n, e);
}

Graph load_edge_list(const std::string& path, NodeId min_nodes) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open edge list '" + path + "'");
  return read_edge_list(in, min_nodes);
}

void write_edge_list(std::ostream& out, const Graph& g) {
  for (auto [u, v] : g.edges()) out << u << ' ' << v << '\n';
}

}  // namespace graphs
}  // namespace asyncmetro
