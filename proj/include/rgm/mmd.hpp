#pragma once

#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "rgm/descriptors.hpp"
#include "rgm/graph.hpp"

namespace rgm {

enum class KernelKind {
  gaussian_tv,   // exp(-TV^2 / (2 sigma^2)), TV = half the L1 distance
  gaussian_emd,  // exp(-W1^2 / (2 sigma^2)) over the shared bin grid
  gaussian_rbf,  // exp(-|a - b|^2 / (2 sigma^2)) over dense vectors
  nspdk_dot,     // cosine of sparse count vectors
};

std::string to_string(KernelKind k);
KernelKind kernel_from_string(const std::string& name);

struct KernelSpec {
  KernelKind kind = KernelKind::gaussian_tv;
  double sigma = 1.0;
};

struct DenseVector {
  std::vector<double> values;
};

using Descriptor = std::variant<Histogram, DenseVector, SparseCounts>;

// Throws ArgumentError when the descriptors are of different kinds, when
// histograms do not share bin edges, or when the kernel does not apply to the
// descriptor kind.
double kernel_eval(const Descriptor& a, const Descriptor& b, const KernelSpec& spec);

// Biased three-term estimator
//   1/n^2 sum k(x, x') + 1/m^2 sum k(y, y') - 2/(nm) sum k(x, y),
// diagonal terms included. Each block is summed over its sorted entries, so
// the value is bitwise independent of ensemble order and of argument order.
// Results in [-1e-12, 0) are clamped to 0.
double mmd_squared(std::span<const Descriptor> x, std::span<const Descriptor> y,
                   const KernelSpec& spec);

inline const std::vector<std::string> kMmdMetrics = {"degree", "clustering", "orbits", "spectral",
                                                     "nspdk"};

struct MmdConfig {
  KernelSpec degree{KernelKind::gaussian_tv, 1.0};
  KernelSpec clustering{KernelKind::gaussian_tv, 1.0};
  KernelSpec orbits{KernelKind::gaussian_rbf, 1.0};
  KernelSpec spectral{KernelKind::gaussian_tv, 1.0};
  KernelSpec nspdk{KernelKind::nspdk_dot, 1.0};
  int degree_max_bin = 0;  // 0: max degree over both ensembles
  int clustering_bins = 100;
  int spectral_bins = 200;
  int orbit_max_size = 4;
  int nspdk_r_max = 2;
  int nspdk_d_max = 3;
  int spectral_max_nodes = 3000;
  int threads = 0;
  std::vector<std::string> metrics = kMmdMetrics;  // subset of kMmdMetrics, evaluated in order
};

struct MmdReport {
  std::map<std::string, double> values;
  std::size_t ref_size = 0;
  std::size_t gen_size = 0;
  MmdConfig config;
  int degree_max_bin = 0;  // as resolved
};

// One descriptor per graph for a named metric (see kMmdMetrics).
std::vector<Descriptor> compute_descriptors(std::span<const Graph> graphs, const std::string& metric,
                                            const MmdConfig& config, int degree_max_bin);

// Descriptor capability errors are rethrown with the metric name prefixed.
MmdReport mmd_suite(std::span<const Graph> ref, std::span<const Graph> gen, const MmdConfig& config);

}  // namespace rgm
