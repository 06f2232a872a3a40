#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rgm/graph.hpp"

namespace rgm {

enum class HistogramKind { degree, clustering, spectral };

std::string to_string(HistogramKind k);

// Probability mass over ordered bins; edges has bins + 1 entries. The mass is
// all zero for an empty sample.
struct Histogram {
  HistogramKind kind = HistogramKind::degree;
  std::vector<double> edges;
  std::vector<double> mass;

  std::size_t bins() const { return mass.size(); }
};

// Integer bins 0..max_bin; larger degrees land in the last bin.
Histogram degree_histogram(const Graph& g, int max_bin);

// Local clustering values binned uniformly on [0, 1].
Histogram clustering_histogram(const Graph& g, int bins);

// Eigenvalues of the symmetric normalized Laplacian. Throws CapabilityError
// above `max_nodes`.
std::vector<double> normalized_laplacian_spectrum(const Graph& g, int max_nodes = 3000);

// Normalized Laplacian eigenvalues binned uniformly on [0, 2].
Histogram spectral_descriptor(const Graph& g, int bins, int max_nodes = 3000);

inline constexpr int kOrbits4 = 15;
inline constexpr int kOrbits5 = 73;
inline constexpr int kDefaultEnumerationCutoff = 600;

// Per-node automorphism-orbit counts of connected graphlets.
//
// Orbits 0-14 use the usual numbering: 0 edge, 1-2 path P3 (end, middle),
// 3 triangle, 4-5 P4 (end, inner), 6-7 star (leaf, center), 8 C4, 9-11 paw
// (tail, triangle degree 2, triangle degree 3), 12-13 diamond (degree 2,
// degree 3), 14 K4. Orbits 15-72 (5-node graphlets) are numbered by graphlet
// edge count, then by a canonical adjacency code; see five_node_orbit_table().
struct OrbitDescriptor {
  int orbits = kOrbits4;
  int nodes = 0;
  std::vector<std::int64_t> per_node;  // nodes x orbits, row-major
  std::vector<double> graph_vector;    // per-orbit mean over nodes

  std::int64_t operator()(int node, int orbit) const { return per_node[node * orbits + orbit]; }
};

// max_size 4 runs the combinatorial counter; max_size 5 adds 5-node orbits by
// connected-subgraph enumeration and throws CapabilityError when
// n > enumeration_cutoff.
OrbitDescriptor orbit_counts(const Graph& g, int max_size = 4,
                             int enumeration_cutoff = kDefaultEnumerationCutoff);

// For each labeled 5-node adjacency code (bit i*5+j style over the 10 pairs
// in lexicographic order), the orbit id of each of the 5 positions, or -1 for
// disconnected patterns.
struct FiveNodeOrbitTable {
  std::vector<std::array<int, 5>> orbit;  // 1024 entries
  int graphlets = 0;                      // 21
};
const FiveNodeOrbitTable& five_node_orbit_table();

// Sparse feature-hash -> count map, sorted by key, no zero entries.
struct SparseCounts {
  std::vector<std::pair<std::uint64_t, std::int64_t>> entries;

  std::int64_t get(std::uint64_t key) const;
  std::int64_t total() const;
  friend bool operator==(const SparseCounts&, const SparseCounts&) = default;
};

// Neighborhood subgraph pairwise distance features: for every node pair at
// distance d <= d_max (including d = 0 self pairs) and every radius
// r <= r_max, one feature for (r, d, unordered pair of rooted-neighborhood
// labels). Labels come from r + 2 rounds of color refinement seeded with
// (degree, distance to root) and are hashed to 64 bits.
SparseCounts nspdk_features(const Graph& g, int r_max = 2, int d_max = 3);

// Canonical 64-bit label of the radius-r neighborhood rooted at `root`.
std::uint64_t rooted_neighborhood_label(const Graph& g, NodeId root, int radius);

}  // namespace rgm
