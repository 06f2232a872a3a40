#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rgm/graph.hpp"

namespace rgm {

struct TopoSummary {
  // Degree assortativity; empty when the endpoint-degree variance is zero.
  std::optional<double> assortativity;
  double density = 0.0;
  double avg_clustering = 0.0;
  double transitivity = 0.0;
  int diameter = 0;  // over the largest connected component
  double apl = 0.0;  // over the largest connected component
  int n_components = 0;
  int lcc_size = 0;
  int slcc_size = 0;  // 0 with a single component
  int max_kcore = 0;
};

// Diameter and APL follow lcc_distance_summary (sampled above 5000 nodes).
TopoSummary topo_summary(const Graph& g, std::uint64_t seed = 0);

inline constexpr std::array<const char*, 10> kTopoProperties = {
    "assortativity", "density",     "avg_clustering", "transitivity", "diameter",
    "apl",           "n_components", "lcc_size",      "slcc_size",    "max_kcore"};

// Value of a named property; empty only for undefined assortativity.
std::optional<double> topo_property(const TopoSummary& s, std::size_t property);

struct EnsembleStats {
  double mean = 0.0;
  double median = 0.0;
  double iqr = 0.0;  // linear-interpolation quartiles
  int count = 0;     // graphs with a defined value
  int excluded = 0;  // graphs with an undefined value
};

struct PropertyComparison {
  std::string property;
  EnsembleStats ref, gen;
  double gap = 0.0;        // |mean_ref - mean_gen|
  double gap_to_iqr = 0.0;  // gap / mean of the two IQRs; inf for gap > 0 over zero spread
};

// One row per property. Both ensembles must be non-empty.
std::vector<PropertyComparison> compare_ensembles(std::span<const TopoSummary> ref,
                                                  std::span<const TopoSummary> gen);
std::vector<PropertyComparison> compare_ensembles(std::span<const Graph> ref, std::span<const Graph> gen,
                                                  int threads = 0);

std::vector<TopoSummary> topo_summaries(std::span<const Graph> graphs, int threads = 0);

// "class,property,ref_mean,ref_median,ref_iqr,ref_n,ref_excluded,gen_mean,
// gen_median,gen_iqr,gen_n,gen_excluded,gap,gap_to_iqr"
void write_summary_csv_header(std::ostream& out);
void write_summary_csv_rows(const std::string& cls, const std::vector<PropertyComparison>& rows,
                            std::ostream& out);

// Long format "class,property,ensemble,graph_index,value"; undefined values
// are written as NA.
void write_long_csv_header(std::ostream& out);
void write_long_csv_rows(const std::string& cls, const std::string& ensemble,
                         std::span<const TopoSummary> summaries, std::ostream& out);

}  // namespace rgm
