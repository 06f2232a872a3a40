#include <gtest/gtest.h>

#include <Eigen/QR>
#include <cmath>
#include <sstream>

#include "rgm/anchor_knn.hpp"
#include "rgm/error.hpp"
#include "rgm/random.hpp"

using namespace rgm;

namespace {

AnchorIndex clustered_index(Rng& rng, int classes, int per_class, double spread, double gap,
                            std::vector<std::vector<double>>& centers) {
  std::vector<std::string> names;
  std::vector<std::vector<double>> emb;
  std::vector<int> labels;
  centers.clear();
  for (int c = 0; c < classes; ++c) {
    names.push_back("class" + std::to_string(c));
    std::vector<double> center(3, 0.0);
    center[c % 3] = gap * (1 + c / 3);
    centers.push_back(center);
    for (int i = 0; i < per_class; ++i) {
      std::vector<double> e(3);
      for (int k = 0; k < 3; ++k) e[k] = center[k] + spread * rng.normal();
      emb.push_back(e);
      labels.push_back(c);
    }
  }
  return AnchorIndex(names, emb, labels);
}

}  // namespace

TEST(DynamicK, Examples) {
  EXPECT_EQ(dynamic_k(100), 10);
  EXPECT_EQ(dynamic_k(1), 1);
  EXPECT_EQ(dynamic_k(10), 3);
  EXPECT_EQ(dynamic_k(2), 1);
  EXPECT_EQ(dynamic_k(3), 2);
  EXPECT_EQ(dynamic_k(192), 14);
  EXPECT_THROW(dynamic_k(0), ArgumentError);
  for (int n = 1; n < 2000; ++n) {
    const int k = dynamic_k(n);
    EXPECT_LE(std::abs(k - std::sqrt(n)), 0.5);
    EXPECT_GE(k, 1);
    EXPECT_LE(k, n);
  }
}

TEST(Classify, CoincidentAnchorWins) {
  AnchorIndex idx({"A", "B"}, {{0, 0}, {10, 0}, {0, 10}, {10, 10}}, {0, 1, 1, 1});
  const std::vector<double> h = {0, 0};
  const auto c = classify(h, idx);
  EXPECT_EQ(c.predicted, 0);
  EXPECT_EQ(c.scores[0], 0.0);
}

TEST(Classify, MirroredTieGoesToClassOrder) {
  AnchorIndex idx({"left", "right"}, {{-1, 0}, {-2, 1}, {1, 0}, {2, 1}}, {0, 0, 1, 1});
  const std::vector<double> h = {0, 5};
  const auto c = classify(h, idx);
  EXPECT_EQ(c.scores[0], c.scores[1]);
  EXPECT_EQ(c.predicted, 0);
  AnchorIndex swapped({"right", "left"}, {{-1, 0}, {-2, 1}, {1, 0}, {2, 1}}, {1, 1, 0, 0});
  EXPECT_EQ(classify(h, swapped).predicted, 0);
}

TEST(Classify, NearestBreaksScoreTie) {
  // Both classes score 1.5 with k = 2, but class b has the nearer anchor.
  AnchorIndex idx({"a", "b"}, {{1.5}, {1.5}, {9}, {-1}, {-2}, {-9}}, {0, 0, 0, 1, 1, 1});
  const std::vector<double> h = {0};
  const auto c = classify(h, idx);
  EXPECT_EQ(c.scores[0], c.scores[1]);
  EXPECT_EQ(c.predicted, 1);
}

TEST(Classify, SeparatedClustersPerfect) {
  Rng rng(3);
  std::vector<std::vector<double>> centers;
  const auto idx = clustered_index(rng, 3, 9, 0.1, 10.0, centers);
  for (int t = 0; t < 300; ++t) {
    const int c = t % 3;
    std::vector<double> h(3);
    for (int k = 0; k < 3; ++k) h[k] = centers[c][k] + 0.1 * rng.normal();
    EXPECT_EQ(classify(h, idx).predicted, c);
  }
}

TEST(Classify, IsometryInvariant) {
  Rng rng(7);
  std::vector<std::vector<double>> centers;
  const auto idx = clustered_index(rng, 4, 12, 1.5, 3.0, centers);
  for (int t = 0; t < 20; ++t) {
    Eigen::Matrix3d random;
    for (int i = 0; i < 9; ++i) random.data()[i] = rng.normal();
    const Eigen::Matrix3d q = Eigen::HouseholderQR<Eigen::Matrix3d>(random).householderQ();
    const Eigen::Vector3d shift(rng.normal(), rng.normal(), rng.normal());
    auto map = [&](const std::vector<double>& v) {
      const Eigen::Vector3d y = q * Eigen::Vector3d(v[0], v[1], v[2]) + shift;
      return std::vector<double>{y[0], y[1], y[2]};
    };
    std::vector<std::vector<double>> moved;
    std::vector<int> labels;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      moved.push_back(map(idx.embedding(i)));
      labels.push_back(idx.label(i));
    }
    const AnchorIndex rotated(idx.classes(), moved, labels);
    for (int p = 0; p < 30; ++p) {
      const std::vector<double> h = {3 * rng.normal(), 3 * rng.normal(), 3 * rng.normal()};
      const auto before = classify(h, idx);
      const auto after = classify(map(h), rotated);
      // Skip probes whose top two scores agree to rounding.
      auto sorted = before.scores;
      std::sort(sorted.begin(), sorted.end());
      if (sorted[1] - sorted[0] < 1e-9) continue;
      EXPECT_EQ(before.predicted, after.predicted);
    }
  }
}

TEST(Classify, PureFunction) {
  Rng rng(9);
  std::vector<std::vector<double>> centers;
  const auto idx = clustered_index(rng, 3, 20, 2.0, 2.0, centers);
  for (int p = 0; p < 50; ++p) {
    const std::vector<double> h = {rng.normal(), rng.normal(), rng.normal()};
    const auto a = classify(h, idx);
    const auto b = classify(h, idx);
    EXPECT_EQ(a.predicted, b.predicted);
    EXPECT_EQ(a.scores, b.scores);
  }
}

TEST(Classify, Errors) {
  AnchorIndex idx({"a", "b"}, {{0, 0}, {1, 1}}, {0, 1});
  const std::vector<double> h = {0, 0, 0};
  EXPECT_THROW(classify(h, idx), ArgumentError);
  EXPECT_THROW(AnchorIndex({"a", "b"}, {{0, 0}}, {0}), ArgumentError);
  EXPECT_THROW(AnchorIndex({"a"}, {{0, 0}, {1}}, {0, 0}), ArgumentError);
}

TEST(Confusion, Examples) {
  const std::vector<std::string> classes = {"x", "y", "z"};
  const std::vector<std::string> truth = {"x", "y", "z", "x"};
  const auto id = confusion_matrix(truth, truth, classes);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_EQ(id.percent[i][j], i == j ? 100.0 : 0.0);
  const std::vector<std::string> all_y(4, "y");
  const auto col = confusion_matrix(all_y, truth, classes);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(col.percent[i][1], 100.0);
  std::vector<std::string> t(100, "x"), p(100, "x");
  for (int i = 50; i < 100; ++i) p[i] = "z";
  const auto half = confusion_matrix(p, t, classes);
  EXPECT_EQ(half.percent[0][0], 50.0);
  EXPECT_EQ(half.percent[0][2], 50.0);
}

TEST(Confusion, RowsSumToHundred) {
  Rng rng(4);
  const std::vector<std::string> classes = {"a", "b", "c", "d", "e", "f", "g"};
  for (int t = 0; t < 200; ++t) {
    std::vector<std::string> p, tr;
    const int n = static_cast<int>(rng.integer(1, 300));
    for (int i = 0; i < n; ++i) {
      tr.push_back(classes[rng.below(7)]);
      p.push_back(classes[rng.below(7)]);
    }
    const auto m = confusion_matrix(p, tr, classes);
    for (std::size_t r = 0; r < classes.size(); ++r) {
      if (m.row_totals[r] == 0) continue;
      double sum = 0.0;
      for (double v : m.percent[r]) {
        EXPECT_GE(v, 0.0);
        sum += v;
      }
      EXPECT_NEAR(sum, 100.0, 0.1);
    }
  }
}

TEST(Confusion, UnknownLabel) {
  const std::vector<std::string> classes = {"a"};
  const std::vector<std::string> p = {"a"}, t = {"q"};
  EXPECT_THROW(confusion_matrix(p, t, classes), ArgumentError);
  const std::vector<std::string> longer = {"a", "a"};
  EXPECT_THROW(confusion_matrix(longer, p, classes), ArgumentError);
}

TEST(Confusion, CsvShape) {
  const std::vector<std::string> classes = {"BA", "ER"};
  const std::vector<std::string> p = {"BA", "ER", "ER"}, t = {"BA", "BA", "ER"};
  std::ostringstream out;
  write_confusion_csv(confusion_matrix(p, t, classes), out);
  EXPECT_EQ(out.str(), "true\\predicted,BA,ER,n\nBA,50,50,2\nER,0,100,1\n");
}
