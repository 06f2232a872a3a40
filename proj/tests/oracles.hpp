#pragma once

// Brute-force reference implementations shared by the unit and acceptance
// tests. Everything here is written for clarity over speed.

#include <algorithm>
#include <array>
#include <cstdint>
#include <vector>

#include "rgm/graph.hpp"

namespace oracle {

using rgm::Graph;
using rgm::NodeId;

inline bool connected_subset(const Graph& g, const std::vector<NodeId>& nodes) {
  std::vector<bool> seen(nodes.size(), false);
  std::vector<std::size_t> stack = {0};
  seen[0] = true;
  while (!stack.empty()) {
    const auto i = stack.back();
    stack.pop_back();
    for (std::size_t j = 0; j < nodes.size(); ++j)
      if (!seen[j] && g.has_edge(nodes[i], nodes[j])) {
        seen[j] = true;
        stack.push_back(j);
      }
  }
  return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
}

// Orbit of position i inside the induced subgraph on `nodes` (2 to 4 nodes),
// read off the subgraph's edge count and degree pattern.
inline int small_orbit(const Graph& g, const std::vector<NodeId>& nodes, std::size_t i) {
  const std::size_t k = nodes.size();
  std::vector<int> deg(k, 0);
  int edges = 0;
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = a + 1; b < k; ++b)
      if (g.has_edge(nodes[a], nodes[b])) {
        ++deg[a];
        ++deg[b];
        ++edges;
      }
  const int d = deg[i];
  const int top = *std::max_element(deg.begin(), deg.end());
  if (k == 2) return 0;
  if (k == 3) return edges == 3 ? 3 : (d == 1 ? 1 : 2);
  if (edges == 3) return top == 3 ? (d == 3 ? 7 : 6) : (d == 1 ? 4 : 5);
  if (edges == 4) return top == 2 ? 8 : (d == 1 ? 9 : (d == 2 ? 10 : 11));
  if (edges == 5) return d == 2 ? 12 : 13;
  return 14;
}

// Per-node counts of orbits 0..14 over all connected induced subgraphs on
// 2, 3 and 4 nodes.
inline std::vector<std::array<std::int64_t, 15>> orbit_counts4(const Graph& g) {
  const NodeId n = g.num_nodes();
  std::vector<std::array<std::int64_t, 15>> out(n);
  for (auto& row : out) row.fill(0);
  auto visit = [&](const std::vector<NodeId>& nodes) {
    if (!connected_subset(g, nodes)) return;
    for (std::size_t i = 0; i < nodes.size(); ++i) ++out[nodes[i]][small_orbit(g, nodes, i)];
  };
  for (NodeId a = 0; a < n; ++a)
    for (NodeId b = a + 1; b < n; ++b) {
      visit({a, b});
      for (NodeId c = b + 1; c < n; ++c) {
        visit({a, b, c});
        for (NodeId d = c + 1; d < n; ++d) visit({a, b, c, d});
      }
    }
  return out;
}

// Number of connected induced 5-node subgraphs containing each node.
inline std::vector<std::int64_t> connected_five_sets(const Graph& g) {
  const NodeId n = g.num_nodes();
  std::vector<std::int64_t> out(n, 0);
  std::vector<NodeId> s(5);
  for (s[0] = 0; s[0] < n; ++s[0])
    for (s[1] = s[0] + 1; s[1] < n; ++s[1])
      for (s[2] = s[1] + 1; s[2] < n; ++s[2])
        for (s[3] = s[2] + 1; s[3] < n; ++s[3])
          for (s[4] = s[3] + 1; s[4] < n; ++s[4])
            if (connected_subset(g, s))
              for (NodeId v : s) ++out[v];
  return out;
}

inline std::int64_t triangles(const Graph& g) {
  std::int64_t t = 0;
  const NodeId n = g.num_nodes();
  for (NodeId a = 0; a < n; ++a)
    for (NodeId b = a + 1; b < n; ++b)
      if (g.has_edge(a, b))
        for (NodeId c = b + 1; c < n; ++c) t += g.has_edge(a, c) && g.has_edge(b, c);
  return t;
}

// Paths of length two (a center with two distinct neighbors).
inline std::int64_t connected_triples(const Graph& g) {
  std::int64_t t = 0;
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    const std::int64_t d = g.degree(v);
    t += d * (d - 1) / 2;
  }
  return t;
}

// All-pairs BFS distances, -1 for unreachable.
inline std::vector<std::vector<int>> all_distances(const Graph& g) {
  const NodeId n = g.num_nodes();
  std::vector<std::vector<int>> dist(n, std::vector<int>(n, -1));
  for (NodeId s = 0; s < n; ++s) {
    std::vector<NodeId> queue = {s};
    dist[s][s] = 0;
    for (std::size_t h = 0; h < queue.size(); ++h)
      for (NodeId u : g.neighbors(queue[h]))
        if (dist[s][u] < 0) {
          dist[s][u] = dist[s][queue[h]] + 1;
          queue.push_back(u);
        }
  }
  return dist;
}

// Repeatedly delete a minimum-degree node; a node's core number is the
// largest minimum degree seen up to its deletion.
inline std::vector<int> core_numbers(const Graph& g) {
  const int n = g.num_nodes();
  std::vector<int> deg = g.degrees();
  std::vector<bool> gone(n, false);
  std::vector<int> core(n, 0);
  int threshold = 0;
  for (int step = 0; step < n; ++step) {
    int best = -1;
    for (int v = 0; v < n; ++v)
      if (!gone[v] && (best < 0 || deg[v] < deg[best])) best = v;
    threshold = std::max(threshold, deg[best]);
    core[best] = threshold;
    gone[best] = true;
    for (NodeId u : g.neighbors(best))
      if (!gone[u]) --deg[u];
  }
  return core;
}

}  // namespace oracle
