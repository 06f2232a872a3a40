#include <gtest/gtest.h>

#include <cmath>

#include "rgm/error.hpp"
#include "rgm/generators.hpp"
#include "rgm/mmd.hpp"
#include "rgm/random.hpp"

using namespace rgm;

namespace {

Histogram hist(std::vector<double> mass) {
  Histogram h;
  h.kind = HistogramKind::degree;
  h.edges.resize(mass.size() + 1);
  for (std::size_t i = 0; i < h.edges.size(); ++i) h.edges[i] = static_cast<double>(i);
  h.mass = std::move(mass);
  return h;
}

std::vector<Descriptor> random_histograms(Rng& rng, int count, int bins) {
  std::vector<Descriptor> out;
  for (int i = 0; i < count; ++i) {
    std::vector<double> mass(bins);
    double total = 0.0;
    for (double& m : mass) total += (m = rng.uniform());
    for (double& m : mass) m /= total;
    out.push_back(hist(mass));
  }
  return out;
}

std::vector<Descriptor> random_sparse(Rng& rng, int count) {
  std::vector<Descriptor> out;
  for (int i = 0; i < count; ++i) {
    SparseCounts s;
    for (std::uint64_t key = 0; key < 12; ++key)
      if (rng.bernoulli(0.5)) s.entries.emplace_back(key, rng.integer(1, 9));
    out.push_back(s);
  }
  return out;
}

std::vector<Graph> npso_ensemble(int count, std::uint64_t seed) {
  NpsoParams p;
  p.n = 300;
  p.m = 8;
  std::vector<Graph> out;
  for (int i = 0; i < count; ++i) out.push_back(gen_npso(p, derive_seed(seed, "npso", i)));
  return out;
}

}  // namespace

TEST(Kernel, SelfSimilarityIsOne) {
  const KernelSpec tv{KernelKind::gaussian_tv, 1.0};
  const KernelSpec emd{KernelKind::gaussian_emd, 0.5};
  const KernelSpec rbf{KernelKind::gaussian_rbf, 2.0};
  const KernelSpec dot{KernelKind::nspdk_dot, 1.0};
  const Descriptor h = hist({0.2, 0.5, 0.3});
  EXPECT_EQ(kernel_eval(h, h, tv), 1.0);
  EXPECT_EQ(kernel_eval(h, h, emd), 1.0);
  const Descriptor d = DenseVector{{1.0, -2.0, 0.5}};
  EXPECT_EQ(kernel_eval(d, d, rbf), 1.0);
  SparseCounts s;
  s.entries = {{3, 2}, {9, 5}};
  EXPECT_DOUBLE_EQ(kernel_eval(Descriptor{s}, Descriptor{s}, dot), 1.0);
}

TEST(Kernel, KnownValues) {
  const Descriptor a = hist({1, 0}), b = hist({0, 1});
  EXPECT_NEAR(kernel_eval(a, b, {KernelKind::gaussian_tv, 1.0}), std::exp(-0.5), 1e-15);
  const Descriptor c = hist({1, 0, 0}), d = hist({0, 0, 1});
  // W1 = 2 bins of width 1.
  EXPECT_NEAR(kernel_eval(c, d, {KernelKind::gaussian_emd, 1.0}), std::exp(-2.0), 1e-15);
  SparseCounts x, y;
  x.entries = {{1, 3}};
  y.entries = {{2, 4}};
  EXPECT_EQ(kernel_eval(Descriptor{x}, Descriptor{y}, {KernelKind::nspdk_dot, 1.0}), 0.0);
}

TEST(Kernel, Mismatches) {
  const KernelSpec tv{KernelKind::gaussian_tv, 1.0};
  EXPECT_THROW(kernel_eval(hist({1, 0}), hist({1, 0, 0}), tv), ArgumentError);
  EXPECT_THROW(kernel_eval(hist({1, 0}), Descriptor{DenseVector{{1, 0}}}, tv), ArgumentError);
  EXPECT_THROW(kernel_eval(hist({1, 0}), hist({0, 1}), {KernelKind::nspdk_dot, 1.0}), ArgumentError);
  EXPECT_THROW(kernel_eval(hist({1, 0}), hist({0, 1}), {KernelKind::gaussian_tv, 0.0}), ArgumentError);
}

TEST(Mmd, TwoVersusOne) {
  const std::vector<Descriptor> x = {hist({1, 0}), hist({1, 0})};
  const std::vector<Descriptor> y = {hist({0, 1})};
  const double v = mmd_squared(x, y, {KernelKind::gaussian_tv, 1.0});
  EXPECT_NEAR(v, 2.0 - 2.0 * std::exp(-0.5), 1e-12);
}

TEST(Mmd, IdenticalSetsGiveZero) {
  Rng rng(1);
  for (int t = 0; t < 100; ++t) {
    const auto x = random_histograms(rng, 1 + t % 7, 5);
    EXPECT_NEAR(mmd_squared(x, x, {KernelKind::gaussian_tv, 1.0}), 0.0, 1e-12);
    EXPECT_NEAR(mmd_squared(x, x, {KernelKind::gaussian_emd, 1.0}), 0.0, 1e-12);
  }
}

TEST(Mmd, SymmetricAndNonNegative) {
  Rng rng(2);
  for (int t = 0; t < 100; ++t) {
    const auto x = random_histograms(rng, 1 + t % 5, 6);
    const auto y = random_histograms(rng, 1 + t % 3, 6);
    for (auto kind : {KernelKind::gaussian_tv, KernelKind::gaussian_emd}) {
      const KernelSpec spec{kind, 0.7};
      const double xy = mmd_squared(x, y, spec);
      EXPECT_EQ(xy, mmd_squared(y, x, spec));
      EXPECT_GE(xy, 0.0);
    }
    const auto a = random_sparse(rng, 4), b = random_sparse(rng, 3);
    const KernelSpec dot{KernelKind::nspdk_dot, 1.0};
    EXPECT_EQ(mmd_squared(a, b, dot), mmd_squared(b, a, dot));
    EXPECT_GE(mmd_squared(a, b, dot), 0.0);
  }
}

TEST(Mmd, OrderInvariant) {
  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    auto x = random_histograms(rng, 6, 8);
    auto y = random_histograms(rng, 5, 8);
    const KernelSpec spec{KernelKind::gaussian_tv, 1.0};
    const double before = mmd_squared(x, y, spec);
    rng.shuffle(x);
    rng.shuffle(y);
    EXPECT_EQ(mmd_squared(x, y, spec), before);
  }
}

TEST(Mmd, CopiesOfReferenceNeverIncrease) {
  const std::vector<Descriptor> x = {hist({1, 0, 0}), hist({0, 1, 0}), hist({0.2, 0.3, 0.5})};
  const KernelSpec spec{KernelKind::gaussian_tv, 1.0};
  std::vector<Descriptor> y = {x[0]};
  double previous = mmd_squared(x, y, spec);
  for (std::size_t i = 1; i < x.size(); ++i) {
    y.push_back(x[i]);
    const double now = mmd_squared(x, y, spec);
    EXPECT_LE(now, previous);
    previous = now;
  }
  EXPECT_NEAR(previous, 0.0, 1e-12);
}

TEST(Mmd, EmptySetRejected) {
  const std::vector<Descriptor> x = {hist({1, 0})};
  EXPECT_THROW(mmd_squared(x, {}, {}), ArgumentError);
}

TEST(Suite, SameGraphsGiveZero) {
  std::vector<Graph> ref;
  for (int s = 0; s < 5; ++s) ref.push_back(gen_er(60, 0.1, s));
  const auto report = mmd_suite(ref, ref, {});
  ASSERT_EQ(report.values.size(), 5u);
  for (const auto& [metric, value] : report.values) EXPECT_NEAR(value, 0.0, 1e-12) << metric;
}

TEST(Suite, SameFamilyScoresLower) {
  std::vector<Graph> ref, same, other;
  for (int s = 0; s < 20; ++s) {
    ref.push_back(gen_er(300, 0.02, s));
    same.push_back(gen_er(300, 0.02, 100 + s));
    other.push_back(gen_ba(300, 3, 200 + s));
  }
  const auto near = mmd_suite(ref, same, {});
  const auto far = mmd_suite(ref, other, {});
  for (const auto& metric : kMmdMetrics)
    EXPECT_LT(near.values.at(metric), far.values.at(metric)) << metric;
}

TEST(Suite, RewiringBlindSpot) {
  const auto ref = npso_ensemble(30, 5);
  std::vector<Graph> gen;
  for (std::size_t i = 0; i < ref.size(); ++i)
    gen.push_back(rewire_preserving_degree(ref[i], 10.0, derive_seed(5, "rewire", i)));
  const auto report = mmd_suite(ref, gen, {});
  EXPECT_LT(report.values.at("degree"), 1e-3);
  EXPECT_GE(report.values.at("clustering"), 10 * report.values.at("degree"));
}

TEST(Suite, CapabilityErrorNamesMetric) {
  MmdConfig config;
  config.spectral_max_nodes = 10;
  const std::vector<Graph> ref = {path_graph(20)};
  try {
    mmd_suite(ref, ref, config);
    FAIL();
  } catch (const CapabilityError& e) {
    EXPECT_NE(std::string(e.what()).find("spectral"), std::string::npos);
  }
}

TEST(Suite, KernelNames) {
  for (auto k : {KernelKind::gaussian_tv, KernelKind::gaussian_emd, KernelKind::gaussian_rbf,
                 KernelKind::nspdk_dot})
    EXPECT_EQ(kernel_from_string(to_string(k)), k);
}
