#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace rgm {

// max(1, round-half-even(sqrt(count))), capped at count.
int dynamic_k(int count);

class AnchorIndex {
 public:
  // labels[i] indexes `classes`; every class needs at least one anchor.
  // Throws ArgumentError on ragged embeddings or unknown / unused labels.
  AnchorIndex(std::vector<std::string> classes, std::vector<std::vector<double>> embeddings,
              std::vector<int> labels);

  const std::vector<std::string>& classes() const { return classes_; }
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return labels_.size(); }
  int count(int cls) const { return counts_[cls]; }
  const std::vector<double>& embedding(std::size_t i) const { return embeddings_[i]; }
  int label(std::size_t i) const { return labels_[i]; }

 private:
  std::vector<std::string> classes_;
  std::vector<std::vector<double>> embeddings_;
  std::vector<int> labels_;
  std::vector<int> counts_;
  std::size_t dim_ = 0;
};

struct Classification {
  int predicted = 0;
  std::vector<double> scores;   // per class: mean of its k_i nearest distances
  std::vector<double> nearest;  // per class: nearest single distance
};

// Per-class dynamic k-NN: predicts the class with the smallest score; ties go
// to the smaller nearest-anchor distance, then to the earlier class.
// Throws ArgumentError on a dimension mismatch.
Classification classify(std::span<const double> h, const AnchorIndex& index);

struct ConfusionMatrix {
  std::vector<std::string> classes;
  std::vector<std::vector<double>> percent;  // [true][predicted], rows sum to 100
  std::vector<std::vector<long long>> counts;
  std::vector<long long> row_totals;
};

// Rows follow `classes`; a row with no samples is all zero. Throws
// ArgumentError on unequal lengths or a label not in `classes`.
ConfusionMatrix confusion_matrix(std::span<const std::string> predicted,
                                 std::span<const std::string> truth,
                                 const std::vector<std::string>& classes);

// Rows "true\predicted,c1,c2,..." with percentages.
void write_confusion_csv(const ConfusionMatrix& m, std::ostream& out);

}  // namespace rgm
