#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "rgm/features.hpp"
#include "rgm/generators.hpp"
#include "rgm/random.hpp"

using namespace rgm;

namespace {

Graph k4_minus_edge() { return Graph::from_edges(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}}); }

}  // namespace

TEST(KCore, SmallGraphs) {
  EXPECT_EQ(k_core_numbers(complete_graph(4)), (std::vector<int>{3, 3, 3, 3}));
  EXPECT_EQ(k_core_numbers(path_graph(5)), (std::vector<int>(5, 1)));
  EXPECT_EQ(k_core_numbers(Graph::from_edges(2, {})), (std::vector<int>{0, 0}));
}

TEST(KCore, MatchesPeelingOracle) {
  for (int s = 0; s < 50; ++s) {
    const Graph g = gen_er(20, 0.3, s);
    EXPECT_EQ(k_core_numbers(g), oracle::core_numbers(g)) << s;
  }
  for (int s = 0; s < 10; ++s) {
    const Graph g = gen_ba(60, 3, s);
    EXPECT_EQ(k_core_numbers(g), oracle::core_numbers(g)) << s;
  }
}

TEST(KCore, BoundedByDegree) {
  for (int s = 0; s < 20; ++s) {
    const Graph g = gen_er(50, 0.1, s);
    const auto core = k_core_numbers(g);
    for (NodeId v = 0; v < g.num_nodes(); ++v) EXPECT_LE(core[v], g.degree(v));
  }
}

TEST(Clustering, KnownValues) {
  EXPECT_EQ(local_clustering(complete_graph(3)), (std::vector<double>{1, 1, 1}));
  EXPECT_EQ(local_clustering(star_graph(5))[0], 0.0);
  const auto c = local_clustering(k4_minus_edge());
  EXPECT_NEAR(c[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(c[1], 2.0 / 3.0, 1e-15);
  EXPECT_EQ(c[2], 1.0);
  EXPECT_EQ(c[3], 1.0);
}

TEST(ChiSquare, KnownValues) {
  for (const Graph& g : {complete_graph(5), cycle_graph(7), Graph::from_edges(3, {})}) {
    for (double x : chi_square_neighborhood(g)) EXPECT_EQ(x, 0.0);
  }
  for (double x : chi_square_neighborhood(star_graph(5))) EXPECT_EQ(x, 0.0);
  const auto chi = chi_square_neighborhood(path_graph(4));
  EXPECT_NEAR(chi[1], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(chi[2], 1.0 / 3.0, 1e-15);
}

TEST(ChiSquare, MatchesDirectFormula) {
  for (int s = 0; s < 20; ++s) {
    const Graph g = gen_ba(40, 2, s);
    const auto chi = chi_square_neighborhood(g);
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
      const auto nb = g.neighbors(v);
      if (nb.empty()) continue;
      double mean = 0.0;
      for (NodeId u : nb) mean += g.degree(u);
      mean /= nb.size();
      double expect = 0.0;
      for (NodeId u : nb) expect += (g.degree(u) - mean) * (g.degree(u) - mean) / mean;
      EXPECT_NEAR(chi[v], expect, 1e-9 * (1 + expect));
    }
  }
}

TEST(Features, TriangleRaw) {
  const auto f = node_features(complete_graph(3), FeatureScaling::raw);
  ASSERT_EQ(f.rows, 3);
  for (int r = 0; r < 3; ++r) {
    EXPECT_EQ(f(r, 0), 2.0);
    EXPECT_EQ(f(r, 1), 0.0);
    EXPECT_EQ(f(r, 2), 1.0);
    EXPECT_EQ(f(r, 3), 2.0);
  }
}

TEST(Features, EmptyGraphRawIsZero) {
  const auto f = node_features(Graph::from_edges(3, {}), FeatureScaling::raw);
  for (double x : f.values) EXPECT_EQ(x, 0.0);
}

TEST(Features, StandardizedColumns) {
  for (int s = 0; s < 20; ++s) {
    const Graph g = s % 2 ? gen_ba(80, 2, s) : cycle_graph(10 + s);
    const auto f = node_features(g, FeatureScaling::log1p_standardized);
    for (int c = 0; c < kNumNodeFeatures; ++c) {
      double mean = 0.0, sq = 0.0;
      for (int r = 0; r < f.rows; ++r) mean += f(r, c);
      mean /= f.rows;
      for (int r = 0; r < f.rows; ++r) sq += (f(r, c) - mean) * (f(r, c) - mean);
      const double var = sq / f.rows;
      EXPECT_LT(std::abs(mean), 1e-9);
      EXPECT_TRUE(std::abs(var - 1.0) < 1e-9 || var == 0.0) << var;
    }
  }
}

TEST(Features, FiniteInEveryMode) {
  for (auto mode : {FeatureScaling::raw, FeatureScaling::log1p, FeatureScaling::log1p_standardized}) {
    for (int s = 0; s < 10; ++s) {
      const Graph g = disjoint_union(gen_er(30, 0.1, s), Graph::from_edges(2, {}));
      const auto f = node_features(g, mode);
      for (double x : f.values) EXPECT_TRUE(std::isfinite(x));
    }
  }
}

TEST(Features, PermutationEquivariance) {
  Rng rng(11);
  for (int s = 0; s < 30; ++s) {
    const Graph g = gen_er(40, 0.12, s);
    std::vector<NodeId> perm(40);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    const Graph h = permute(g, perm);
    for (auto mode : {FeatureScaling::raw, FeatureScaling::log1p_standardized}) {
      const auto a = node_features(g, mode);
      const auto b = node_features(h, mode);
      for (int v = 0; v < 40; ++v)
        for (int c = 0; c < kNumNodeFeatures; ++c) ASSERT_EQ(a(v, c), b(perm[v], c));
    }
  }
}

TEST(Features, ScalingNames) {
  for (auto mode : {FeatureScaling::raw, FeatureScaling::log1p, FeatureScaling::log1p_standardized})
    EXPECT_EQ(scaling_from_string(to_string(mode)), mode);
}
