#include "rgm/mmd.hpp"

#include <algorithm>
#include <cmath>

#include "rgm/error.hpp"
#include "rgm/parallel.hpp"

namespace rgm {

std::string to_string(KernelKind k) {
  switch (k) {
    case KernelKind::gaussian_tv: return "gaussian_tv";
    case KernelKind::gaussian_emd: return "gaussian_emd";
    case KernelKind::gaussian_rbf: return "gaussian_rbf";
    case KernelKind::nspdk_dot: return "nspdk_dot";
  }
  return "?";
}

KernelKind kernel_from_string(const std::string& name) {
  if (name == "gaussian_tv") return KernelKind::gaussian_tv;
  if (name == "gaussian_emd") return KernelKind::gaussian_emd;
  if (name == "gaussian_rbf") return KernelKind::gaussian_rbf;
  if (name == "nspdk_dot") return KernelKind::nspdk_dot;
  throw ArgumentError("unknown kernel '" + name + "'");
}

namespace {

double gaussian(double distance, double sigma) {
  if (!(sigma > 0.0)) throw ArgumentError("kernel sigma must be positive");
  return std::exp(-distance * distance / (2.0 * sigma * sigma));
}

double histogram_kernel(const Histogram& a, const Histogram& b, const KernelSpec& spec) {
  if (a.kind != b.kind || a.edges != b.edges || a.mass.size() != b.mass.size()) {
    throw ArgumentError("histograms do not share bins");
  }
  switch (spec.kind) {
    case KernelKind::gaussian_tv: {
      double l1 = 0.0;
      for (std::size_t i = 0; i < a.mass.size(); ++i) l1 += std::abs(a.mass[i] - b.mass[i]);
      return gaussian(0.5 * l1, spec.sigma);
    }
    case KernelKind::gaussian_emd: {
      const double width = a.edges.size() > 1 ? a.edges[1] - a.edges[0] : 1.0;
      double cdf = 0.0, w1 = 0.0;
      for (std::size_t i = 0; i < a.mass.size(); ++i) {
        cdf += a.mass[i] - b.mass[i];
        w1 += std::abs(cdf);
      }
      return gaussian(w1 * width, spec.sigma);
    }
    default: throw ArgumentError("kernel " + to_string(spec.kind) + " does not apply to histograms");
  }
}

double dense_kernel(const DenseVector& a, const DenseVector& b, const KernelSpec& spec) {
  if (a.values.size() != b.values.size()) throw ArgumentError("dense vectors differ in length");
  if (spec.kind != KernelKind::gaussian_rbf) {
    throw ArgumentError("kernel " + to_string(spec.kind) + " does not apply to dense vectors");
  }
  double sq = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const double d = a.values[i] - b.values[i];
    sq += d * d;
  }
  return gaussian(std::sqrt(sq), spec.sigma);
}

double sparse_kernel(const SparseCounts& a, const SparseCounts& b, const KernelSpec& spec) {
  if (spec.kind != KernelKind::nspdk_dot) {
    throw ArgumentError("kernel " + to_string(spec.kind) + " does not apply to sparse counts");
  }
  auto norm = [](const SparseCounts& s) {
    double sq = 0.0;
    for (const auto& [key, count] : s.entries) sq += static_cast<double>(count) * count;
    return std::sqrt(sq);
  };
  const double na = norm(a), nb = norm(b);
  if (na == 0.0 || nb == 0.0) return na == nb ? 1.0 : 0.0;
  if (&a == &b || a == b) return 1.0;
  double dot = 0.0;
  auto ia = a.entries.begin();
  auto ib = b.entries.begin();
  while (ia != a.entries.end() && ib != b.entries.end()) {
    if (ia->first < ib->first) {
      ++ia;
    } else if (ib->first < ia->first) {
      ++ib;
    } else {
      dot += static_cast<double>(ia->second) * static_cast<double>(ib->second);
      ++ia;
      ++ib;
    }
  }
  return dot / (na * nb);
}

// Neumaier-compensated sum of the sorted values.
double sorted_sum(std::vector<double>& values) {
  std::sort(values.begin(), values.end());
  double sum = 0.0, carry = 0.0;
  for (double v : values) {
    const double t = sum + v;
    carry += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  return sum + carry;
}

double block_mean(std::span<const Descriptor> a, std::span<const Descriptor> b,
                  const KernelSpec& spec) {
  std::vector<double> values(a.size() * b.size());
  parallel_for(a.size(), [&](std::size_t i) {
    for (std::size_t j = 0; j < b.size(); ++j) values[i * b.size() + j] = kernel_eval(a[i], b[j], spec);
  });
  return sorted_sum(values) / static_cast<double>(values.size());
}

}  // namespace

double kernel_eval(const Descriptor& a, const Descriptor& b, const KernelSpec& spec) {
  if (a.index() != b.index()) throw ArgumentError("descriptor kinds differ");
  if (const auto* ha = std::get_if<Histogram>(&a)) return histogram_kernel(*ha, std::get<Histogram>(b), spec);
  if (const auto* da = std::get_if<DenseVector>(&a)) return dense_kernel(*da, std::get<DenseVector>(b), spec);
  return sparse_kernel(std::get<SparseCounts>(a), std::get<SparseCounts>(b), spec);
}

double mmd_squared(std::span<const Descriptor> x, std::span<const Descriptor> y,
                   const KernelSpec& spec) {
  if (x.empty() || y.empty()) throw ArgumentError("MMD needs two non-empty ensembles");
  const double kxx = block_mean(x, x, spec);
  const double kyy = block_mean(y, y, spec);
  // The cross block holds the same multiset of values either way round (the
  // kernels are symmetric), so the sorted sum is too.
  const double kxy = block_mean(x, y, spec);
  double value = (kxx + kyy) - 2.0 * kxy;
  if (value < 0.0 && value >= -1e-12) value = 0.0;
  return value;
}

std::vector<Descriptor> compute_descriptors(std::span<const Graph> graphs, const std::string& metric,
                                            const MmdConfig& config, int degree_max_bin) {
  std::vector<Descriptor> out(graphs.size());
  auto one = [&](const Graph& g) -> Descriptor {
    if (metric == "degree") return degree_histogram(g, degree_max_bin);
    if (metric == "clustering") return clustering_histogram(g, config.clustering_bins);
    if (metric == "spectral") return spectral_descriptor(g, config.spectral_bins, config.spectral_max_nodes);
    if (metric == "nspdk") return nspdk_features(g, config.nspdk_r_max, config.nspdk_d_max);
    if (metric == "orbits") {
      const auto orbits = orbit_counts(g, config.orbit_max_size);
      double norm = 0.0;
      for (double v : orbits.graph_vector) norm += v * v;
      norm = std::sqrt(norm);
      DenseVector dense{orbits.graph_vector};
      for (double& v : dense.values) v /= 1.0 + norm;
      return dense;
    }
    throw ArgumentError("unknown MMD metric '" + metric + "'");
  };
  parallel_for(graphs.size(), [&](std::size_t i) { out[i] = one(graphs[i]); }, config.threads);
  return out;
}

MmdReport mmd_suite(std::span<const Graph> ref, std::span<const Graph> gen, const MmdConfig& config) {
  if (ref.empty() || gen.empty()) throw ArgumentError("MMD suite needs two non-empty ensembles");
  MmdReport report;
  report.ref_size = ref.size();
  report.gen_size = gen.size();
  report.config = config;
  int max_bin = config.degree_max_bin;
  if (max_bin <= 0) {
    max_bin = 1;
    for (const auto& g : ref) max_bin = std::max(max_bin, g.max_degree());
    for (const auto& g : gen) max_bin = std::max(max_bin, g.max_degree());
  }
  report.degree_max_bin = max_bin;
  auto kernel_for = [&](const std::string& metric) -> const KernelSpec& {
    if (metric == "degree") return config.degree;
    if (metric == "clustering") return config.clustering;
    if (metric == "orbits") return config.orbits;
    if (metric == "spectral") return config.spectral;
    return config.nspdk;
  };
  for (const auto& metric : config.metrics) {
    if (std::find(kMmdMetrics.begin(), kMmdMetrics.end(), metric) == kMmdMetrics.end()) {
      throw ArgumentError("unknown MMD metric '" + metric + "'");
    }
    try {
      const auto x = compute_descriptors(ref, metric, config, max_bin);
      const auto y = compute_descriptors(gen, metric, config, max_bin);
      report.values[metric] = mmd_squared(x, y, kernel_for(metric));
    } catch (const CapabilityError& e) {
      throw CapabilityError(metric + ": " + e.what());
    }
  }
  return report;
}

}  // namespace rgm
