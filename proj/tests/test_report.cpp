#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "rgm/generators.hpp"
#include "rgm/random.hpp"
#include "rgm/report.hpp"

using namespace rgm;

namespace {

struct Naive {
  std::optional<double> assortativity;
  double density, avg_clustering, transitivity, apl;
  int diameter, n_components, lcc_size, slcc_size, max_kcore;
};

Naive naive_summary(const Graph& g) {
  Naive s{};
  const int n = g.num_nodes();
  std::vector<double> xs, ys;
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v)
      if (g.has_edge(u, v)) {
        xs.push_back(g.degree(u));
        ys.push_back(g.degree(v));
      }
  if (!xs.empty()) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      mx += xs[i];
      my += ys[i];
    }
    mx /= xs.size();
    my /= ys.size();
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxy += (xs[i] - mx) * (ys[i] - my);
      sxx += (xs[i] - mx) * (xs[i] - mx);
      syy += (ys[i] - my) * (ys[i] - my);
    }
    if (sxx > 0) s.assortativity = sxy / std::sqrt(sxx * syy);
  }
  s.density = n > 1 ? 2.0 * g.num_edges() / (n * (n - 1.0)) : 0.0;
  double csum = 0;
  for (int v = 0; v < n; ++v) {
    const auto nb = g.neighbors(v);
    int links = 0;
    for (std::size_t i = 0; i < nb.size(); ++i)
      for (std::size_t j = i + 1; j < nb.size(); ++j) links += g.has_edge(nb[i], nb[j]);
    const double d = nb.size();
    if (d >= 2) csum += links / (d * (d - 1) / 2);
  }
  s.avg_clustering = csum / n;
  const auto triples = oracle::connected_triples(g);
  s.transitivity = triples ? 3.0 * oracle::triangles(g) / triples : 0.0;

  const auto dist = oracle::all_distances(g);
  std::vector<int> comp(n, -1);
  std::vector<int> sizes;
  for (int v = 0; v < n; ++v) {
    if (comp[v] >= 0) continue;
    int size = 0;
    for (int u = 0; u < n; ++u)
      if (dist[v][u] >= 0) {
        comp[u] = static_cast<int>(sizes.size());
        ++size;
      }
    sizes.push_back(size);
  }
  s.n_components = static_cast<int>(sizes.size());
  auto order = sizes;
  std::sort(order.rbegin(), order.rend());
  s.lcc_size = order[0];
  s.slcc_size = order.size() > 1 ? order[1] : 0;
  // Largest component, smallest member first on ties.
  int lcc = 0;
  for (int c = 0; c < s.n_components; ++c)
    if (sizes[c] > sizes[lcc]) lcc = c;
  double total = 0;
  long pairs = 0;
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v)
      if (u != v && comp[u] == lcc && comp[v] == lcc) {
        total += dist[u][v];
        ++pairs;
        s.diameter = std::max(s.diameter, dist[u][v]);
      }
  s.apl = pairs ? total / pairs : 0.0;
  const auto core = oracle::core_numbers(g);
  s.max_kcore = *std::max_element(core.begin(), core.end());
  return s;
}

std::vector<TopoSummary> summaries_of(const std::vector<Graph>& graphs) { return topo_summaries(graphs); }

}  // namespace

TEST(Topo, Star) {
  const auto s = topo_summary(star_graph(5));
  ASSERT_TRUE(s.assortativity.has_value());
  EXPECT_DOUBLE_EQ(*s.assortativity, -1.0);
  EXPECT_EQ(s.max_kcore, 1);
  EXPECT_EQ(s.diameter, 2);
}

TEST(Topo, K4) {
  const auto s = topo_summary(complete_graph(4));
  EXPECT_EQ(s.transitivity, 1.0);
  EXPECT_EQ(s.avg_clustering, 1.0);
  EXPECT_EQ(s.density, 1.0);
  EXPECT_EQ(s.diameter, 1);
  EXPECT_EQ(s.max_kcore, 3);
  EXPECT_FALSE(s.assortativity.has_value());
  EXPECT_EQ(s.slcc_size, 0);
}

TEST(Topo, RegularGraphsHaveUndefinedAssortativity) {
  EXPECT_FALSE(topo_summary(cycle_graph(9)).assortativity.has_value());
  EXPECT_FALSE(topo_summary(Graph::from_edges(4, {})).assortativity.has_value());
  EXPECT_FALSE(topo_summary(disjoint_union(complete_graph(3), cycle_graph(5))).assortativity.has_value());
}

TEST(Topo, MatchesBruteForce) {
  std::vector<Graph> graphs;
  for (int s = 0; s < 30; ++s) graphs.push_back(gen_er(50, 0.1, s));
  for (int s = 0; s < 10; ++s) graphs.push_back(gen_er(60, 0.03, 100 + s));
  for (int s = 0; s < 5; ++s) graphs.push_back(gen_ba(40, 2, s));
  for (const auto& g : graphs) {
    const auto fast = topo_summary(g);
    const auto slow = naive_summary(g);
    ASSERT_EQ(fast.assortativity.has_value(), slow.assortativity.has_value());
    if (fast.assortativity) {
      EXPECT_NEAR(*fast.assortativity, *slow.assortativity, 1e-9);
      EXPECT_GE(*fast.assortativity, -1 - 1e-12);
      EXPECT_LE(*fast.assortativity, 1 + 1e-12);
    }
    EXPECT_NEAR(fast.density, slow.density, 1e-12);
    EXPECT_NEAR(fast.avg_clustering, slow.avg_clustering, 1e-9);
    EXPECT_NEAR(fast.transitivity, slow.transitivity, 1e-9);
    EXPECT_NEAR(fast.apl, slow.apl, 1e-9);
    EXPECT_EQ(fast.diameter, slow.diameter);
    EXPECT_EQ(fast.n_components, slow.n_components);
    EXPECT_EQ(fast.lcc_size, slow.lcc_size);
    EXPECT_EQ(fast.slcc_size, slow.slcc_size);
    EXPECT_EQ(fast.max_kcore, slow.max_kcore);
    EXPECT_GE(fast.lcc_size, fast.slcc_size);
    EXPECT_LE(fast.max_kcore, g.max_degree());
  }
}

TEST(Compare, IdenticalEnsemblesHaveNoGap) {
  std::vector<Graph> ref;
  for (int s = 0; s < 8; ++s) ref.push_back(gen_er(60, 0.1, s));
  for (const auto& row : compare_ensembles(ref, ref)) {
    EXPECT_EQ(row.gap, 0.0) << row.property;
    EXPECT_EQ(row.gap_to_iqr, 0.0) << row.property;
  }
}

TEST(Compare, SingleGraphEnsembles) {
  const std::vector<Graph> a = {star_graph(5)}, b = {complete_graph(4)};
  const auto rows = compare_ensembles(a, b);
  const auto sa = topo_summary(a[0]), sb = topo_summary(b[0]);
  for (std::size_t p = 0; p < rows.size(); ++p) {
    EXPECT_EQ(rows[p].ref.iqr, 0.0);
    const auto va = topo_property(sa, p), vb = topo_property(sb, p);
    if (va && vb) EXPECT_EQ(rows[p].gap, std::abs(*va - *vb));
  }
  // K4 assortativity is undefined and reported as excluded.
  EXPECT_EQ(rows[0].gen.excluded, 1);
  EXPECT_EQ(rows[0].gen.count, 0);
}

TEST(Compare, ErVersusBa) {
  std::vector<Graph> er, ba;
  for (int s = 0; s < 20; ++s) {
    er.push_back(gen_er(300, 6.0 / 299.0, s));
    ba.push_back(gen_ba(300, 3, 100 + s));
  }
  const auto rows = compare_ensembles(er, ba);
  for (const auto& row : rows) {
    if (row.property == "assortativity" || row.property == "max_kcore") {
      EXPECT_GT(row.gap, 0.0) << row.property;
      EXPECT_GT(row.gap_to_iqr, 1.0) << row.property;
    }
  }
}

TEST(Compare, OrderInvariant) {
  std::vector<Graph> a, b;
  for (int s = 0; s < 10; ++s) {
    a.push_back(gen_er(40, 0.1, s));
    b.push_back(gen_ba(40, 2, s));
  }
  auto sa = summaries_of(a), sb = summaries_of(b);
  const auto before = compare_ensembles(sa, sb);
  Rng rng(1);
  rng.shuffle(sa);
  rng.shuffle(sb);
  const auto after = compare_ensembles(sa, sb);
  for (std::size_t p = 0; p < before.size(); ++p) {
    EXPECT_EQ(before[p].ref.mean, after[p].ref.mean);
    EXPECT_EQ(before[p].gen.median, after[p].gen.median);
    EXPECT_EQ(before[p].gap, after[p].gap);
  }
}

TEST(Compare, CsvOutputs) {
  const std::vector<Graph> a = {star_graph(5), path_graph(4)}, b = {complete_graph(4)};
  std::ostringstream summary, longform;
  write_summary_csv_header(summary);
  write_summary_csv_rows("toy", compare_ensembles(a, b), summary);
  const std::string text = summary.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 11);
  write_long_csv_header(longform);
  write_long_csv_rows("toy", "gen", summaries_of(b), longform);
  EXPECT_NE(longform.str().find("toy,assortativity,gen,0,NA\n"), std::string::npos);
  EXPECT_NE(longform.str().find("toy,max_kcore,gen,0,3\n"), std::string::npos);
}
