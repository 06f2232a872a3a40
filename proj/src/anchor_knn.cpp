#include "rgm/anchor_knn.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "rgm/error.hpp"
#include "rgm/format.hpp"

namespace rgm {

int dynamic_k(int count) {
  if (count < 1) throw ArgumentError("dynamic_k needs count >= 1");
  // nearbyint rounds half to even under the default rounding mode.
  const int k = static_cast<int>(std::nearbyint(std::sqrt(static_cast<double>(count))));
  return std::clamp(k, 1, count);
}

AnchorIndex::AnchorIndex(std::vector<std::string> classes, std::vector<std::vector<double>> embeddings,
                         std::vector<int> labels)
    : classes_(std::move(classes)), embeddings_(std::move(embeddings)), labels_(std::move(labels)) {
  if (embeddings_.size() != labels_.size()) throw ArgumentError("anchor embeddings and labels differ in count");
  if (embeddings_.empty()) throw ArgumentError("anchor index needs at least one anchor");
  dim_ = embeddings_.front().size();
  counts_.assign(classes_.size(), 0);
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (embeddings_[i].size() != dim_) throw ArgumentError("anchor embeddings differ in length");
    if (labels_[i] < 0 || static_cast<std::size_t>(labels_[i]) >= classes_.size()) {
      throw ArgumentError("anchor " + std::to_string(i) + " has an unknown class index");
    }
    ++counts_[labels_[i]];
  }
  for (std::size_t c = 0; c < classes_.size(); ++c) {
    if (counts_[c] == 0) throw ArgumentError("class '" + classes_[c] + "' has no anchors");
  }
}

Classification classify(std::span<const double> h, const AnchorIndex& index) {
  if (h.size() != index.dim()) {
    throw ArgumentError("probe has dimension " + std::to_string(h.size()) + ", anchors have " +
                        std::to_string(index.dim()));
  }
  const std::size_t classes = index.classes().size();
  std::vector<std::vector<double>> dist(classes);
  for (std::size_t i = 0; i < index.size(); ++i) {
    const auto& e = index.embedding(i);
    double sq = 0.0;
    for (std::size_t k = 0; k < h.size(); ++k) sq += (h[k] - e[k]) * (h[k] - e[k]);
    dist[index.label(i)].push_back(std::sqrt(sq));
  }
  Classification out;
  out.scores.resize(classes);
  out.nearest.resize(classes);
  for (std::size_t c = 0; c < classes; ++c) {
    auto& d = dist[c];
    const int k = dynamic_k(static_cast<int>(d.size()));
    std::partial_sort(d.begin(), d.begin() + k, d.end());
    double sum = 0.0;
    for (int i = 0; i < k; ++i) sum += d[i];
    out.scores[c] = sum / k;
    out.nearest[c] = d.front();
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < classes; ++c) {
    if (out.scores[c] < out.scores[best] ||
        (out.scores[c] == out.scores[best] && out.nearest[c] < out.nearest[best])) {
      best = c;
    }
  }
  out.predicted = static_cast<int>(best);
  return out;
}

ConfusionMatrix confusion_matrix(std::span<const std::string> predicted, std::span<const std::string> truth,
                                 const std::vector<std::string>& classes) {
  if (predicted.size() != truth.size()) throw ArgumentError("prediction and truth lists differ in length");
  auto index_of = [&](const std::string& label) {
    const auto it = std::find(classes.begin(), classes.end(), label);
    if (it == classes.end()) throw ArgumentError("unknown class label '" + label + "'");
    return static_cast<std::size_t>(it - classes.begin());
  };
  ConfusionMatrix m;
  m.classes = classes;
  const std::size_t c = classes.size();
  m.counts.assign(c, std::vector<long long>(c, 0));
  m.row_totals.assign(c, 0);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const std::size_t t = index_of(truth[i]);
    ++m.counts[t][index_of(predicted[i])];
    ++m.row_totals[t];
  }
  m.percent.assign(c, std::vector<double>(c, 0.0));
  for (std::size_t t = 0; t < c; ++t) {
    if (m.row_totals[t] == 0) continue;
    for (std::size_t p = 0; p < c; ++p)
      m.percent[t][p] = 100.0 * static_cast<double>(m.counts[t][p]) / static_cast<double>(m.row_totals[t]);
  }
  return m;
}

void write_confusion_csv(const ConfusionMatrix& m, std::ostream& out) {
  out << "true\\predicted";
  for (const auto& c : m.classes) out << ',' << c;
  out << ",n\n";
  for (std::size_t t = 0; t < m.classes.size(); ++t) {
    out << m.classes[t];
    for (double v : m.percent[t]) out << ',' << format_real(v);
    out << ',' << m.row_totals[t] << '\n';
  }
}

}  // namespace rgm
