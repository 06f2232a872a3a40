#include "rgm/report.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "rgm/error.hpp"
#include "rgm/features.hpp"
#include "rgm/format.hpp"
#include "rgm/parallel.hpp"

namespace rgm {

TopoSummary topo_summary(const Graph& g, std::uint64_t seed) {
  if (g.num_nodes() < 1) throw ArgumentError("topological summary needs at least one node");
  TopoSummary s;
  const double n = g.num_nodes();
  const double m = static_cast<double>(g.num_edges());
  s.density = g.num_nodes() >= 2 ? 2.0 * m / (n * (n - 1.0)) : 0.0;

  // Pearson correlation of (deg u, deg v) over both orientations of every
  // edge; both marginals are the same, so one mean and variance suffice.
  if (g.num_edges() > 0) {
    double sum = 0.0, sq = 0.0, cross = 0.0;
    for (auto [u, v] : g.edges()) {
      const double a = g.degree(u), b = g.degree(v);
      sum += a + b;
      sq += a * a + b * b;
      cross += 2.0 * a * b;
    }
    const double count = 2.0 * m;
    const double mean = sum / count;
    const double var = sq / count - mean * mean;
    if (var > 1e-12 * std::max(1.0, mean * mean)) s.assortativity = (cross / count - mean * mean) / var;
  }

  const auto tri = triangle_counts(g);
  long long triangles3 = 0, triples = 0;
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    triangles3 += tri[v];
    const long long d = g.degree(v);
    triples += d * (d - 1) / 2;
  }
  s.transitivity = triples > 0 ? static_cast<double>(triangles3) / static_cast<double>(triples) : 0.0;
  const auto clustering = local_clustering(g);
  double total = 0.0;
  for (double c : clustering) total += c;
  s.avg_clustering = total / n;

  const auto parts = connected_components(g);
  s.n_components = static_cast<int>(parts.sizes.size());
  s.lcc_size = parts.sizes[0];
  s.slcc_size = parts.sizes.size() > 1 ? parts.sizes[1] : 0;
  const auto dist = lcc_distance_summary(g, seed);
  s.diameter = dist.max_distance;
  s.apl = dist.mean_distance;
  const auto core = k_core_numbers(g);
  s.max_kcore = core.empty() ? 0 : *std::max_element(core.begin(), core.end());
  return s;
}

std::optional<double> topo_property(const TopoSummary& s, std::size_t property) {
  switch (property) {
    case 0: return s.assortativity;
    case 1: return s.density;
    case 2: return s.avg_clustering;
    case 3: return s.transitivity;
    case 4: return s.diameter;
    case 5: return s.apl;
    case 6: return s.n_components;
    case 7: return s.lcc_size;
    case 8: return s.slcc_size;
    case 9: return s.max_kcore;
  }
  throw ArgumentError("unknown topological property index");
}

std::vector<TopoSummary> topo_summaries(std::span<const Graph> graphs, int threads) {
  std::vector<TopoSummary> out(graphs.size());
  parallel_for(graphs.size(), [&](std::size_t i) { out[i] = topo_summary(graphs[i]); }, threads);
  return out;
}

namespace {

double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

EnsembleStats stats_of(std::span<const TopoSummary> ensemble, std::size_t property) {
  EnsembleStats st;
  std::vector<double> values;
  for (const auto& s : ensemble) {
    if (const auto v = topo_property(s, property)) {
      values.push_back(*v);
    } else {
      ++st.excluded;
    }
  }
  st.count = static_cast<int>(values.size());
  if (values.empty()) {
    st.mean = st.median = st.iqr = std::numeric_limits<double>::quiet_NaN();
    return st;
  }
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  st.mean = sum / static_cast<double>(values.size());
  st.median = quantile(values, 0.5);
  st.iqr = quantile(values, 0.75) - quantile(values, 0.25);
  return st;
}

}  // namespace

std::vector<PropertyComparison> compare_ensembles(std::span<const TopoSummary> ref,
                                                  std::span<const TopoSummary> gen) {
  if (ref.empty() || gen.empty()) throw ArgumentError("ensemble comparison needs two non-empty ensembles");
  std::vector<PropertyComparison> out;
  for (std::size_t p = 0; p < kTopoProperties.size(); ++p) {
    PropertyComparison row;
    row.property = kTopoProperties[p];
    row.ref = stats_of(ref, p);
    row.gen = stats_of(gen, p);
    row.gap = std::abs(row.ref.mean - row.gen.mean);
    const double spread = 0.5 * (row.ref.iqr + row.gen.iqr);
    if (std::isnan(row.gap)) {
      row.gap_to_iqr = row.gap;
    } else if (spread > 0.0) {
      row.gap_to_iqr = row.gap / spread;
    } else {
      row.gap_to_iqr = row.gap > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    }
    out.push_back(row);
  }
  return out;
}

std::vector<PropertyComparison> compare_ensembles(std::span<const Graph> ref, std::span<const Graph> gen,
                                                  int threads) {
  if (ref.empty() || gen.empty()) throw ArgumentError("ensemble comparison needs two non-empty ensembles");
  const auto a = topo_summaries(ref, threads);
  const auto b = topo_summaries(gen, threads);
  return compare_ensembles(a, b);
}

void write_summary_csv_header(std::ostream& out) {
  out << "class,property,ref_mean,ref_median,ref_iqr,ref_n,ref_excluded,gen_mean,gen_median,gen_iqr,"
         "gen_n,gen_excluded,gap,gap_to_iqr\n";
}

void write_summary_csv_rows(const std::string& cls, const std::vector<PropertyComparison>& rows,
                            std::ostream& out) {
  for (const auto& r : rows) {
    out << cls << ',' << r.property;
    for (const auto* s : {&r.ref, &r.gen}) {
      out << ',' << format_real(s->mean) << ',' << format_real(s->median) << ',' << format_real(s->iqr)
          << ',' << s->count << ',' << s->excluded;
    }
    out << ',' << format_real(r.gap) << ',' << format_real(r.gap_to_iqr) << '\n';
  }
}

void write_long_csv_header(std::ostream& out) { out << "class,property,ensemble,graph_index,value\n"; }

void write_long_csv_rows(const std::string& cls, const std::string& ensemble,
                         std::span<const TopoSummary> summaries, std::ostream& out) {
  for (std::size_t p = 0; p < kTopoProperties.size(); ++p)
    for (std::size_t i = 0; i < summaries.size(); ++i) {
      const auto v = topo_property(summaries[i], p);
      out << cls << ',' << kTopoProperties[p] << ',' << ensemble << ',' << i << ','
          << (v ? format_real(*v) : std::string("NA")) << '\n';
    }
}

}  // namespace rgm
