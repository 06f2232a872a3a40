#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "rgm/graph.hpp"

namespace rgm {

// Core number of every node (bucket-based minimum-degree peeling, O(n + m)).
std::vector<int> k_core_numbers(const Graph& g);

// Triangles through each node, by sorted adjacency intersection.
std::vector<long long> triangle_counts(const Graph& g);

// 2 tri(v) / (deg(v) (deg(v) - 1)); 0 when deg(v) < 2.
std::vector<double> local_clustering(const Graph& g);

// Goodness of fit of neighbor degrees against their own mean:
// sum over u in N(v) of (deg(u) - mean)^2 / mean; 0 for isolated nodes.
std::vector<double> chi_square_neighborhood(const Graph& g);

enum class FeatureScaling {
  raw,
  // ln(1 + x) on degree, chi-square and k-core, then a per-graph z-score of
  // every column.
  log1p_standardized,
  // ln(1 + x) on degree, chi-square and k-core; clustering left as is.
  log1p,
};

std::string to_string(FeatureScaling s);
FeatureScaling scaling_from_string(const std::string& name);

inline constexpr int kNumNodeFeatures = 4;
inline constexpr std::array<const char*, kNumNodeFeatures> kFeatureNames = {
    "degree", "chi2", "clustering", "kcore"};

// Row-major n x 4 table; columns (degree, chi_square, local_clustering, k_core).
struct FeatureMatrix {
  int rows = 0;
  std::vector<double> values;
  FeatureScaling scaling = FeatureScaling::raw;

  double operator()(int row, int col) const { return values[row * kNumNodeFeatures + col]; }
  double& operator()(int row, int col) { return values[row * kNumNodeFeatures + col]; }
};

FeatureMatrix node_features(const Graph& g, FeatureScaling scaling);

// CSV with header "node,degree,chi2,clustering,kcore".
void write_feature_csv(const FeatureMatrix& f, std::ostream& out);

}  // namespace rgm
