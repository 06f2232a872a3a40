#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace rgm {

using NodeId = std::int32_t;
using Edge = std::pair<NodeId, NodeId>;

// Simple undirected unweighted graph on nodes 0..n-1.
//
// Immutable after construction. Edges are stored once as (u, v) with u < v in
// lexicographic order; adjacency is a CSR array of sorted neighbor lists.
class Graph {
 public:
  Graph() = default;

  // Canonicalizes `pairs`: drops self-loops, merges duplicates and reversed
  // duplicates. n = max id + 1, or `n_hint` if larger. Throws FormatError on a
  // negative id and ArgumentError if `n_hint` is smaller than max id + 1.
  static Graph from_edge_list(std::span<const std::pair<std::int64_t, std::int64_t>> pairs,
                              std::optional<std::int64_t> n_hint = std::nullopt);
  static Graph from_edge_list(std::span<const Edge> pairs,
                              std::optional<std::int64_t> n_hint = std::nullopt);

  // Same canonicalization with a fixed node count; every id must be in [0, n).
  static Graph from_edges(NodeId n, std::vector<Edge> edges);

  NodeId num_nodes() const { return n_; }
  std::size_t num_edges() const { return edges_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }

  std::span<const NodeId> neighbors(NodeId v) const {
    return {adjacency_.data() + offsets_[v], adjacency_.data() + offsets_[v + 1]};
  }
  int degree(NodeId v) const { return static_cast<int>(offsets_[v + 1] - offsets_[v]); }
  int max_degree() const;
  std::vector<int> degrees() const;
  bool has_edge(NodeId u, NodeId v) const;

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.n_ == b.n_ && a.edges_ == b.edges_;
  }

 private:
  NodeId n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_{0};
  std::vector<NodeId> adjacency_;
};

// Relabels node v as perm[v]. `perm` must be a permutation of 0..n-1.
Graph permute(const Graph& g, std::span<const NodeId> perm);

// Nodes of `b` are shifted by a.num_nodes().
Graph disjoint_union(const Graph& a, const Graph& b);

Graph complete_graph(int n);
Graph path_graph(int n);
Graph cycle_graph(int n);
// Star with one center (node 0) and `leaves` leaves.
Graph star_graph(int leaves);

struct ComponentPartition {
  // Component ids are ordered by size descending (ties: smallest member
  // first), so component 0 is the largest connected component.
  std::vector<int> labels;
  std::vector<int> sizes;
};

ComponentPartition connected_components(const Graph& g);

// Hop distances from `source`; -1 marks unreachable nodes.
std::vector<int> bfs_distances(const Graph& g, NodeId source);

struct DistanceSummary {
  int max_distance = 0;
  double mean_distance = 0.0;
};

// Runs one BFS per source and aggregates over all (source, target) pairs with
// target != source reachable from source. With restrict_to_lcc every source
// must lie in the largest connected component.
DistanceSummary bfs_eccentricity_sample(const Graph& g, std::span<const NodeId> sources,
                                        bool restrict_to_lcc);

// Diameter and average path length of the largest connected component.
// Exact when the component has at most `exact_limit` nodes; otherwise
// max(100, ceil(sqrt(|LCC|))) sources are sampled with `seed`.
DistanceSummary lcc_distance_summary(const Graph& g, std::uint64_t seed = 0,
                                     int exact_limit = 5000);

// Edge-list text I/O. One "u v" pair per line; '#' and '%' lines and blank
// lines are ignored. A leading "# nodes: N" comment is honored as a node-count
// hint so isolated trailing nodes survive a round trip.
struct EdgeListFile {
  Graph graph;
  // Original token for each node when the file used non-integer labels;
  // empty when ids were used as given.
  std::vector<std::string> labels;
};

EdgeListFile read_edge_list(std::istream& in);
EdgeListFile read_edge_list_file(const std::string& path);
void write_edge_list(const Graph& g, std::ostream& out);
void write_edge_list_file(const Graph& g, const std::string& path);

}  // namespace rgm
