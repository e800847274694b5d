#pragma once

// Hand-rolled generators for the property tests.

#include <algorithm>
#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include "asyncmetro/graph.hpp"
#include "asyncmetro/model.hpp"
#include "asyncmetro/random.hpp"
#include "asyncmetro/resolve.hpp"

namespace testgen {

using namespace asyncmetro;

inline std::uint32_t pick(std::mt19937_64& g, std::uint32_t lo, std::uint32_t hi) {
  return lo + static_cast<std::uint32_t>(rng::below(g, hi - lo + 1));
}

// Erdos-Renyi style graph, possibly disconnected, possibly with isolated nodes.
inline std::shared_ptr<const Graph> random_graph(std::mt19937_64& g, NodeId n, double p) {
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v = u + 1; v < n; ++v)
      if (rng::uniform01(g) < p) edges.emplace_back(u, v);
  return std::make_shared<const Graph>(n, edges);
}

inline std::vector<std::vector<double>> random_interaction(std::mt19937_64& g, State q) {
  std::vector<std::vector<double>> a(q, std::vector<double>(q));
  for (State i = 0; i < q; ++i)
    for (State j = i; j < q; ++j) a[i][j] = a[j][i] = 0.2 + 2.0 * rng::uniform01(g);
  return a;
}

// One of the built-in families with random parameters. kind_hint < 0 picks
// the family at random, otherwise 0 coloring, 1 hardcore, 2 Ising, 3 pairwise.
inline SpinModel random_model(std::mt19937_64& g, std::shared_ptr<const Graph> graph, int kind_hint = -1) {
  const int kind = kind_hint >= 0 ? kind_hint : static_cast<int>(rng::below(g, 4));
  switch (kind) {
    case 0: return make_coloring(graph, pick(g, 2, 7));
    case 1: return make_hardcore(graph, 0.1 + 2.0 * rng::uniform01(g));
    case 2: return make_ising(graph, (rng::uniform01(g) - 0.3) * 1.5);
    default: return make_pairwise(graph, random_interaction(g, pick(g, 2, 4)));
  }
}

inline Configuration random_configuration(std::mt19937_64& g, NodeId n, State q) {
  Configuration c;
  for (NodeId v = 0; v < n; ++v) c.values.push_back(static_cast<State>(rng::below(g, q)));
  return c;
}

inline StateSet random_set(std::mt19937_64& g, State q, std::uint32_t max_size) {
  StateSet s;
  const std::uint32_t size = pick(g, 1, std::min<std::uint32_t>(q, max_size));
  while (s.size() < size) {
    const auto x = static_cast<State>(rng::below(g, q));
    if (std::find(s.begin(), s.end(), x) == s.end()) s.push_back(x);
  }
  std::sort(s.begin(), s.end());
  return s;
}

}  // namespace testgen
