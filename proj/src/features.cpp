#include "rgm/features.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "rgm/error.hpp"

namespace rgm {

std::vector<int> k_core_numbers(const Graph& g) {
  // Batagelj-Zaversnik: nodes kept sorted by current degree in an array with
  // bucket starts; peeling a node decrements each higher-degree neighbor by
  // moving it to the front of its bucket.
  const NodeId n = g.num_nodes();
  std::vector<int> deg = g.degrees();
  const int max_deg = n ? *std::max_element(deg.begin(), deg.end()) : 0;
  std::vector<int> bucket_start(static_cast<std::size_t>(max_deg) + 1, 0);
  for (int d : deg) ++bucket_start[d];
  for (int d = 0, start = 0; d <= max_deg; ++d) {
    const int count = bucket_start[d];
    bucket_start[d] = start;
    start += count;
  }
  std::vector<NodeId> order(n);
  std::vector<int> pos(n);
  {
    std::vector<int> next(bucket_start);
    for (NodeId v = 0; v < n; ++v) {
      pos[v] = next[deg[v]]++;
      order[pos[v]] = v;
    }
  }
  for (int i = 0; i < n; ++i) {
    const NodeId v = order[i];
    for (NodeId u : g.neighbors(v)) {
      if (deg[u] <= deg[v]) continue;
      const int du = deg[u];
      const int pu = pos[u];
      const int pw = bucket_start[du];
      const NodeId w = order[pw];
      if (u != w) {
        order[pu] = w;
        pos[w] = pu;
        order[pw] = u;
        pos[u] = pw;
      }
      ++bucket_start[du];
      --deg[u];
    }
  }
  return deg;
}

std::vector<long long> triangle_counts(const Graph& g) {
  std::vector<long long> tri(static_cast<std::size_t>(g.num_nodes()), 0);
  // Each triangle u < v < w is found once from its lowest edge (u, v).
  for (auto [u, v] : g.edges()) {
    auto a = g.neighbors(u);
    auto b = g.neighbors(v);
    auto ia = std::upper_bound(a.begin(), a.end(), v);
    auto ib = std::upper_bound(b.begin(), b.end(), v);
    while (ia != a.end() && ib != b.end()) {
      if (*ia < *ib) {
        ++ia;
      } else if (*ib < *ia) {
        ++ib;
      } else {
        ++tri[u];
        ++tri[v];
        ++tri[*ia];
        ++ia;
        ++ib;
      }
    }
  }
  return tri;
}

std::vector<double> local_clustering(const Graph& g) {
  const auto tri = triangle_counts(g);
  std::vector<double> c(tri.size(), 0.0);
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    const double d = g.degree(v);
    if (d >= 2) c[v] = 2.0 * static_cast<double>(tri[v]) / (d * (d - 1.0));
  }
  return c;
}

std::vector<double> chi_square_neighborhood(const Graph& g) {
  std::vector<double> chi(static_cast<std::size_t>(g.num_nodes()), 0.0);
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    auto nb = g.neighbors(v);
    if (nb.empty()) continue;
    // sum (d - s1/k)^2 / (s1/k) == (k s2 - s1^2) / s1, all in integers, so the
    // value does not depend on neighbor order.
    long long s1 = 0, s2 = 0;
    for (NodeId u : nb) {
      const long long d = g.degree(u);
      s1 += d;
      s2 += d * d;
    }
    const auto k = static_cast<long long>(nb.size());
    chi[v] = static_cast<double>(k * s2 - s1 * s1) / static_cast<double>(s1);
  }
  return chi;
}

std::string to_string(FeatureScaling s) {
  switch (s) {
    case FeatureScaling::raw: return "raw";
    case FeatureScaling::log1p_standardized: return "log1p_standardized";
    case FeatureScaling::log1p: return "log1p";
  }
  return "?";
}

FeatureScaling scaling_from_string(const std::string& name) {
  if (name == "raw") return FeatureScaling::raw;
  if (name == "log1p_standardized") return FeatureScaling::log1p_standardized;
  if (name == "log1p") return FeatureScaling::log1p;
  throw ArgumentError("unknown feature scaling '" + name + "'");
}

FeatureMatrix node_features(const Graph& g, FeatureScaling scaling) {
  const int n = g.num_nodes();
  FeatureMatrix f;
  f.rows = n;
  f.scaling = scaling;
  f.values.assign(static_cast<std::size_t>(n) * kNumNodeFeatures, 0.0);
  const auto chi = chi_square_neighborhood(g);
  const auto clustering = local_clustering(g);
  const auto core = k_core_numbers(g);
  for (int v = 0; v < n; ++v) {
    f(v, 0) = g.degree(v);
    f(v, 1) = chi[v];
    f(v, 2) = clustering[v];
    f(v, 3) = core[v];
  }
  if (scaling == FeatureScaling::raw) return f;

  for (int v = 0; v < n; ++v) {
    for (int col : {0, 1, 3}) f(v, col) = std::log1p(f(v, col));
  }
  if (scaling == FeatureScaling::log1p || n == 0) return f;

  // Sums run over sorted copies so the result is exactly permutation
  // equivariant.
  std::vector<double> column(static_cast<std::size_t>(n));
  auto sorted_sum = [&column]() {
    std::sort(column.begin(), column.end());
    double sum = 0.0;
    for (double x : column) sum += x;
    return sum;
  };
  for (int col = 0; col < kNumNodeFeatures; ++col) {
    for (int v = 0; v < n; ++v) column[v] = f(v, col);
    const double mean = sorted_sum() / n;
    for (int v = 0; v < n; ++v) column[v] = (f(v, col) - mean) * (f(v, col) - mean);
    const double var = sorted_sum() / n;
    // A column that is constant up to rounding counts as zero variance.
    const double scale = std::max(1.0, std::abs(mean));
    if (var <= 1e-24 * scale * scale) {
      for (int v = 0; v < n; ++v) f(v, col) = 0.0;
      continue;
    }
    const double sd = std::sqrt(var);
    for (int v = 0; v < n; ++v) f(v, col) = (f(v, col) - mean) / sd;
  }
  return f;
}

void write_feature_csv(const FeatureMatrix& f, std::ostream& out) {
  out << "node,degree,chi2,clustering,kcore\n";
  const auto old = out.precision(17);
  for (int v = 0; v < f.rows; ++v) {
    out << v;
    for (int col = 0; col < kNumNodeFeatures; ++col) out << ',' << f(v, col);
    out << '\n';
  }
  out.precision(old);
}

}  // namespace rgm
