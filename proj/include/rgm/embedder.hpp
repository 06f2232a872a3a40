#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "rgm/features.hpp"
#include "rgm/graph.hpp"
#include "rgm/random.hpp"

namespace rgm {

enum class Pooling { mean, sum, max };

std::string to_string(Pooling p);
Pooling pooling_from_string(const std::string& name);

// Graph-attention embedder. Each layer runs `heads` attention heads of width
// `hidden` over closed neighborhoods (self-loops included); heads are
// concatenated on every layer but the last, which averages them. ELU follows
// every layer, then node vectors are pooled and passed through
// FC(hidden -> fc_hidden, ReLU) and FC(fc_hidden -> out_dim).
struct Architecture {
  int in_dim = kNumNodeFeatures;
  int hidden = 8;
  int heads = 4;
  int layers = 3;
  int fc_hidden = 8;
  int out_dim = 2;
  Pooling pooling = Pooling::mean;
  double attention_slope = 0.2;

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

// Offsets of one attention layer inside the flat parameter vector. Head h's
// weight is the row-major (d_in x hidden) block at w + h * d_in * hidden; its
// attention vectors are the `hidden` entries at a_src / a_dst + h * hidden.
struct LayerLayout {
  int d_in = 0;
  int out_width = 0;  // heads * hidden when concatenating, hidden otherwise
  bool concat = true;
  std::size_t w = 0, a_src = 0, a_dst = 0, bias = 0;
};

struct ParamLayout {
  std::vector<LayerLayout> layers;
  std::size_t fc1_w = 0, fc1_b = 0, fc2_w = 0, fc2_b = 0;  // row-major (in x out)
  std::size_t size = 0;
};

ParamLayout param_layout(const Architecture& arch);

struct EmbedderParams {
  Architecture arch;
  std::vector<double> values;
};

// Glorot-uniform weights, zero biases. Throws ArgumentError for an invalid
// architecture (out_dim < 2, non-positive sizes).
EmbedderParams init_params(const Architecture& arch, std::uint64_t seed);

// Throws ArgumentError when f does not have g.num_nodes() rows or the
// parameter vector does not match the architecture.
std::vector<double> embed(const Graph& g, const FeatureMatrix& f, const EmbedderParams& p);

double triplet_margin_loss(std::span<const double> h_a, std::span<const double> h_p,
                           std::span<const double> h_n, double margin);

struct LabeledGraph {
  Graph graph;
  FeatureMatrix features;
  int label = 0;  // index into Dataset::classes
};

struct Dataset {
  std::vector<std::string> classes;
  std::vector<LabeledGraph> items;
};

// Indices into a Dataset.
struct Triplet {
  std::size_t anchor = 0, positive = 0, negative = 0;
  int anchor_class = 0, negative_class = 0;
};

// Class-balanced: anchor class uniform over classes, anchor and positive two
// distinct uniform draws within it, negative class uniform over the others.
// Throws SamplingError naming any class with fewer than two graphs.
std::vector<Triplet> sample_triplets(const Dataset& data, std::size_t count, Rng& rng);

struct Gradient {
  double loss = 0.0;  // mean triplet loss of the batch
  std::vector<double> values;
};

// Exact gradient of the mean triplet loss. The hinge is treated as inactive
// at exactly zero, and the distance gradient is zero at zero distance.
// Per-graph work may run in parallel; the reduction order is fixed.
Gradient grad(const Dataset& data, std::span<const Triplet> batch, const EmbedderParams& p,
              double margin, int threads = 0);

// Mean triplet loss without gradients.
double batch_loss(const Dataset& data, std::span<const Triplet> batch, const EmbedderParams& p,
                  double margin, int threads = 0);

struct AdamWConfig {
  double lr = 0.003;
  double weight_decay = 5e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct TrainState {
  EmbedderParams params;
  std::vector<double> m, v;
  std::int64_t step = 0;
  double best_val_loss = 0.0;
  int epochs_since_improvement = 0;
  std::uint64_t seed = 0;
};

TrainState make_train_state(EmbedderParams params, std::uint64_t seed);

// Decoupled weight decay: w <- w (1 - lr wd) - lr m_hat / (sqrt(v_hat) + eps).
void adamw_step(TrainState& state, std::span<const double> grads, const AdamWConfig& opt = {});

struct TrainConfig {
  AdamWConfig optimizer;
  double margin = 1.0;
  int max_epochs = 200;
  int patience = 20;
  double min_delta = 1e-4;
  int triplets_per_epoch = 200;
  int batch_size = 16;
  int val_triplets = 200;
  std::uint64_t seed = 0;
  int threads = 0;
};

struct TrainHistory {
  double initial_val_loss = 0.0;
  std::vector<double> train_loss;  // per epoch, mean over its batches
  std::vector<double> val_loss;    // per epoch
  int best_epoch = -1;             // index into val_loss, -1 when no epoch ran
  bool early_stopped = false;
};

struct TrainResult {
  EmbedderParams params;  // best validation params
  TrainHistory history;
};

// Throws TrainingError with the epoch index when a loss turns NaN.
TrainResult train(const Dataset& train_set, const Dataset& val_set, const Architecture& arch,
                  const TrainConfig& config);

// JSON checkpoint with the architecture, every weight, the training config and
// the seed. Doubles are written in shortest round-trip form, so
// load(save(p)) reproduces p bit for bit.
struct Checkpoint {
  EmbedderParams params;
  TrainConfig config;
  std::vector<std::string> classes;
};

void save_checkpoint(const Checkpoint& c, std::ostream& out);
Checkpoint load_checkpoint(std::istream& in);
void save_checkpoint_file(const Checkpoint& c, const std::string& path);
Checkpoint load_checkpoint_file(const std::string& path);

}  // namespace rgm
