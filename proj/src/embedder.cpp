#include "rgm/embedder.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "rgm/error.hpp"
#include "rgm/parallel.hpp"

namespace rgm {

std::string to_string(Pooling p) {
  switch (p) {
    case Pooling::mean: return "mean";
    case Pooling::sum: return "sum";
    case Pooling::max: return "max";
  }
  return "?";
}

Pooling pooling_from_string(const std::string& name) {
  if (name == "mean") return Pooling::mean;
  if (name == "sum") return Pooling::sum;
  if (name == "max") return Pooling::max;
  throw ArgumentError("unknown pooling '" + name + "'");
}

namespace {

void check_architecture(const Architecture& a) {
  if (a.in_dim < 1 || a.hidden < 1 || a.heads < 1 || a.layers < 1 || a.fc_hidden < 1) {
    throw ArgumentError("embedder dimensions must be positive");
  }
  if (a.out_dim < 2) throw ArgumentError("embedding dimension must be at least 2");
  if (!(a.attention_slope >= 0.0)) throw ArgumentError("attention slope must be >= 0");
}

}  // namespace

ParamLayout param_layout(const Architecture& arch) {
  check_architecture(arch);
  ParamLayout out;
  std::size_t at = 0;
  int d_in = arch.in_dim;
  for (int l = 0; l < arch.layers; ++l) {
    LayerLayout layer;
    layer.d_in = d_in;
    layer.concat = l + 1 < arch.layers;
    layer.out_width = layer.concat ? arch.heads * arch.hidden : arch.hidden;
    layer.w = at;
    at += static_cast<std::size_t>(arch.heads) * d_in * arch.hidden;
    layer.a_src = at;
    at += static_cast<std::size_t>(arch.heads) * arch.hidden;
    layer.a_dst = at;
    at += static_cast<std::size_t>(arch.heads) * arch.hidden;
    layer.bias = at;
    at += static_cast<std::size_t>(layer.out_width);
    out.layers.push_back(layer);
    d_in = layer.out_width;
  }
  out.fc1_w = at;
  at += static_cast<std::size_t>(arch.hidden) * arch.fc_hidden;
  out.fc1_b = at;
  at += static_cast<std::size_t>(arch.fc_hidden);
  out.fc2_w = at;
  at += static_cast<std::size_t>(arch.fc_hidden) * arch.out_dim;
  out.fc2_b = at;
  at += static_cast<std::size_t>(arch.out_dim);
  out.size = at;
  return out;
}

EmbedderParams init_params(const Architecture& arch, std::uint64_t seed) {
  const ParamLayout layout = param_layout(arch);
  EmbedderParams p{arch, std::vector<double>(layout.size, 0.0)};
  Rng rng(seed);
  auto fill = [&](std::size_t at, std::size_t count, double fan_in, double fan_out) {
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (std::size_t i = 0; i < count; ++i) p.values[at + i] = rng.uniform(-limit, limit);
  };
  const auto heads = static_cast<std::size_t>(arch.heads);
  const auto hidden = static_cast<std::size_t>(arch.hidden);
  for (const auto& layer : layout.layers) {
    fill(layer.w, heads * layer.d_in * hidden, layer.d_in, arch.hidden);
    fill(layer.a_src, heads * hidden, 2.0 * arch.hidden, 1.0);
    fill(layer.a_dst, heads * hidden, 2.0 * arch.hidden, 1.0);
  }
  fill(layout.fc1_w, hidden * arch.fc_hidden, arch.hidden, arch.fc_hidden);
  fill(layout.fc2_w, static_cast<std::size_t>(arch.fc_hidden) * arch.out_dim, arch.fc_hidden,
       arch.out_dim);
  return p;
}

namespace {

struct LayerCache {
  std::vector<double> x;      // n x d_in
  std::vector<double> z;      // heads x n x hidden
  std::vector<double> raw;    // heads x nnz, s_i + t_j before the leaky rectifier
  std::vector<double> alpha;  // heads x nnz
  std::vector<double> pre;    // n x out_width, before ELU
};

struct ForwardCache {
  int n = 0;
  std::vector<std::size_t> offsets;  // closed neighborhoods, self first
  std::vector<NodeId> cols;
  std::vector<LayerCache> layers;
  std::vector<double> node_out;  // n x hidden after the last ELU
  std::vector<double> pooled;
  std::vector<int> argmax;
  std::vector<double> fc_pre, fc_hidden, out;
};

double elu(double x) { return x > 0.0 ? x : std::expm1(x); }

// Pairwise sum of column c of a row-major block; the split is at the middle
// so two identical halves contribute identical partial sums.
double pairwise_column(const std::vector<double>& m, int width, int c, int lo, int hi) {
  if (hi - lo <= 8) {
    double s = 0.0;
    for (int i = lo; i < hi; ++i) s += m[static_cast<std::size_t>(i) * width + c];
    return s;
  }
  const int mid = lo + (hi - lo) / 2;
  return pairwise_column(m, width, c, lo, mid) + pairwise_column(m, width, c, mid, hi);
}

void check_inputs(const Graph& g, const FeatureMatrix& f, const EmbedderParams& p,
                  const ParamLayout& layout) {
  if (f.rows != g.num_nodes()) {
    throw ArgumentError("feature matrix has " + std::to_string(f.rows) + " rows for a graph with " +
                        std::to_string(g.num_nodes()) + " nodes");
  }
  if (p.arch.in_dim != kNumNodeFeatures ||
      f.values.size() != static_cast<std::size_t>(f.rows) * kNumNodeFeatures) {
    throw ArgumentError("feature width does not match the embedder input dimension");
  }
  if (p.values.size() != layout.size) {
    throw ArgumentError("parameter vector has " + std::to_string(p.values.size()) +
                        " entries, architecture needs " + std::to_string(layout.size));
  }
}

void forward(const Graph& g, const FeatureMatrix& f, const EmbedderParams& p,
             const ParamLayout& layout, ForwardCache& c) {
  check_inputs(g, f, p, layout);
  const Architecture& a = p.arch;
  const double* w = p.values.data();
  const int n = g.num_nodes();
  const int hid = a.hidden;
  c.n = n;
  c.offsets.assign(static_cast<std::size_t>(n) + 1, 0);
  c.cols.clear();
  for (NodeId v = 0; v < n; ++v) {
    c.cols.push_back(v);
    for (NodeId u : g.neighbors(v)) c.cols.push_back(u);
    c.offsets[v + 1] = c.cols.size();
  }
  const std::size_t nnz = c.cols.size();

  c.layers.resize(layout.layers.size());
  std::vector<double> input = f.values;
  std::vector<double> s(static_cast<std::size_t>(n)), t(static_cast<std::size_t>(n));
  std::vector<double> scores;
  for (std::size_t l = 0; l < layout.layers.size(); ++l) {
    const LayerLayout& L = layout.layers[l];
    LayerCache& lc = c.layers[l];
    lc.x = std::move(input);
    lc.z.assign(static_cast<std::size_t>(a.heads) * n * hid, 0.0);
    lc.raw.assign(static_cast<std::size_t>(a.heads) * nnz, 0.0);
    lc.alpha.assign(static_cast<std::size_t>(a.heads) * nnz, 0.0);
    lc.pre.assign(static_cast<std::size_t>(n) * L.out_width, 0.0);
    for (int h = 0; h < a.heads; ++h) {
      const double* W = w + L.w + static_cast<std::size_t>(h) * L.d_in * hid;
      const double* as = w + L.a_src + static_cast<std::size_t>(h) * hid;
      const double* ad = w + L.a_dst + static_cast<std::size_t>(h) * hid;
      double* z = lc.z.data() + static_cast<std::size_t>(h) * n * hid;
      for (int i = 0; i < n; ++i) {
        const double* xi = lc.x.data() + static_cast<std::size_t>(i) * L.d_in;
        double* zi = z + static_cast<std::size_t>(i) * hid;
        for (int k = 0; k < L.d_in; ++k) {
          const double xv = xi[k];
          if (xv == 0.0) continue;
          const double* wk = W + static_cast<std::size_t>(k) * hid;
          for (int q = 0; q < hid; ++q) zi[q] += xv * wk[q];
        }
        double si = 0.0, ti = 0.0;
        for (int q = 0; q < hid; ++q) {
          si += ad[q] * zi[q];
          ti += as[q] * zi[q];
        }
        s[i] = si;
        t[i] = ti;
      }
      double* raw = lc.raw.data() + static_cast<std::size_t>(h) * nnz;
      double* alpha = lc.alpha.data() + static_cast<std::size_t>(h) * nnz;
      for (int i = 0; i < n; ++i) {
        const std::size_t lo = c.offsets[i], hi = c.offsets[i + 1];
        double top = -std::numeric_limits<double>::infinity();
        for (std::size_t e = lo; e < hi; ++e) {
          raw[e] = s[i] + t[c.cols[e]];
          const double lr = raw[e] > 0.0 ? raw[e] : a.attention_slope * raw[e];
          alpha[e] = lr;
          top = std::max(top, lr);
        }
        double total = 0.0;
        for (std::size_t e = lo; e < hi; ++e) total += (alpha[e] = std::exp(alpha[e] - top));
        for (std::size_t e = lo; e < hi; ++e) alpha[e] /= total;
        double* pre = lc.pre.data() + static_cast<std::size_t>(i) * L.out_width;
        double* dst = L.concat ? pre + static_cast<std::size_t>(h) * hid : pre;
        const double scale = L.concat ? 1.0 : 1.0 / a.heads;
        for (std::size_t e = lo; e < hi; ++e) {
          const double* zj = z + static_cast<std::size_t>(c.cols[e]) * hid;
          const double coef = alpha[e] * scale;
          for (int q = 0; q < hid; ++q) dst[q] += coef * zj[q];
        }
      }
    }
    input.assign(lc.pre.size(), 0.0);
    const double* bias = w + L.bias;
    for (int i = 0; i < n; ++i)
      for (int q = 0; q < L.out_width; ++q) {
        const std::size_t at = static_cast<std::size_t>(i) * L.out_width + q;
        lc.pre[at] += bias[q];
        input[at] = elu(lc.pre[at]);
      }
  }
  c.node_out = std::move(input);

  c.pooled.assign(static_cast<std::size_t>(hid), 0.0);
  c.argmax.assign(static_cast<std::size_t>(hid), -1);
  if (n > 0) {
    for (int q = 0; q < hid; ++q) {
      if (a.pooling == Pooling::max) {
        int best = 0;
        for (int i = 1; i < n; ++i)
          if (c.node_out[static_cast<std::size_t>(i) * hid + q] > c.node_out[static_cast<std::size_t>(best) * hid + q])
            best = i;
        c.argmax[q] = best;
        c.pooled[q] = c.node_out[static_cast<std::size_t>(best) * hid + q];
      } else {
        const double sum = pairwise_column(c.node_out, hid, q, 0, n);
        c.pooled[q] = a.pooling == Pooling::mean ? sum / n : sum;
      }
    }
  }

  c.fc_pre.assign(static_cast<std::size_t>(a.fc_hidden), 0.0);
  c.fc_hidden.assign(static_cast<std::size_t>(a.fc_hidden), 0.0);
  for (int k = 0; k < a.fc_hidden; ++k) {
    double v = w[layout.fc1_b + k];
    for (int q = 0; q < hid; ++q) v += c.pooled[q] * w[layout.fc1_w + static_cast<std::size_t>(q) * a.fc_hidden + k];
    c.fc_pre[k] = v;
    c.fc_hidden[k] = v > 0.0 ? v : 0.0;
  }
  c.out.assign(static_cast<std::size_t>(a.out_dim), 0.0);
  for (int e = 0; e < a.out_dim; ++e) {
    double v = w[layout.fc2_b + e];
    for (int k = 0; k < a.fc_hidden; ++k)
      v += c.fc_hidden[k] * w[layout.fc2_w + static_cast<std::size_t>(k) * a.out_dim + e];
    c.out[e] = v;
  }
}

// Accumulates d(out . d_out)/d(params) into `grad`.
void backward(const EmbedderParams& p, const ParamLayout& layout, const ForwardCache& c,
              std::span<const double> d_out, std::vector<double>& grad) {
  const Architecture& a = p.arch;
  const double* w = p.values.data();
  double* G = grad.data();
  const int n = c.n;
  const int hid = a.hidden;

  std::vector<double> d_hidden(static_cast<std::size_t>(a.fc_hidden), 0.0);
  for (int e = 0; e < a.out_dim; ++e) {
    G[layout.fc2_b + e] += d_out[e];
    for (int k = 0; k < a.fc_hidden; ++k) {
      const std::size_t at = layout.fc2_w + static_cast<std::size_t>(k) * a.out_dim + e;
      G[at] += c.fc_hidden[k] * d_out[e];
      d_hidden[k] += w[at] * d_out[e];
    }
  }
  std::vector<double> d_pooled(static_cast<std::size_t>(hid), 0.0);
  for (int k = 0; k < a.fc_hidden; ++k) {
    if (!(c.fc_pre[k] > 0.0)) continue;
    const double d = d_hidden[k];
    G[layout.fc1_b + k] += d;
    for (int q = 0; q < hid; ++q) {
      const std::size_t at = layout.fc1_w + static_cast<std::size_t>(q) * a.fc_hidden + k;
      G[at] += c.pooled[q] * d;
      d_pooled[q] += w[at] * d;
    }
  }
  if (n == 0) return;

  std::vector<double> d_y(static_cast<std::size_t>(n) * hid, 0.0);
  for (int q = 0; q < hid; ++q) {
    if (a.pooling == Pooling::max) {
      d_y[static_cast<std::size_t>(c.argmax[q]) * hid + q] = d_pooled[q];
    } else {
      const double d = a.pooling == Pooling::mean ? d_pooled[q] / n : d_pooled[q];
      for (int i = 0; i < n; ++i) d_y[static_cast<std::size_t>(i) * hid + q] = d;
    }
  }

  const std::size_t nnz = c.cols.size();
  std::vector<double> d_pre, d_z, d_s(static_cast<std::size_t>(n)), d_t(static_cast<std::size_t>(n));
  std::vector<double> d_x, d_out_h(static_cast<std::size_t>(hid));
  for (std::size_t l = layout.layers.size(); l-- > 0;) {
    const LayerLayout& L = layout.layers[l];
    const LayerCache& lc = c.layers[l];
    d_pre.assign(lc.pre.size(), 0.0);
    for (std::size_t at = 0; at < lc.pre.size(); ++at) {
      const double x = lc.pre[at];
      d_pre[at] = d_y[at] * (x > 0.0 ? 1.0 : std::exp(x));
    }
    for (int i = 0; i < n; ++i)
      for (int q = 0; q < L.out_width; ++q) G[L.bias + q] += d_pre[static_cast<std::size_t>(i) * L.out_width + q];

    const bool need_dx = l > 0;
    if (need_dx) d_x.assign(static_cast<std::size_t>(n) * L.d_in, 0.0);
    for (int h = 0; h < a.heads; ++h) {
      const std::size_t w_at = L.w + static_cast<std::size_t>(h) * L.d_in * hid;
      const std::size_t as_at = L.a_src + static_cast<std::size_t>(h) * hid;
      const std::size_t ad_at = L.a_dst + static_cast<std::size_t>(h) * hid;
      const double* z = lc.z.data() + static_cast<std::size_t>(h) * n * hid;
      const double* raw = lc.raw.data() + static_cast<std::size_t>(h) * nnz;
      const double* alpha = lc.alpha.data() + static_cast<std::size_t>(h) * nnz;
      d_z.assign(static_cast<std::size_t>(n) * hid, 0.0);
      std::fill(d_s.begin(), d_s.end(), 0.0);
      std::fill(d_t.begin(), d_t.end(), 0.0);
      std::vector<double> d_alpha;
      for (int i = 0; i < n; ++i) {
        const double* dp = d_pre.data() + static_cast<std::size_t>(i) * L.out_width;
        if (L.concat) {
          for (int q = 0; q < hid; ++q) d_out_h[q] = dp[h * hid + q];
        } else {
          for (int q = 0; q < hid; ++q) d_out_h[q] = dp[q] / a.heads;
        }
        const std::size_t lo = c.offsets[i], hi = c.offsets[i + 1];
        d_alpha.assign(hi - lo, 0.0);
        double weighted = 0.0;
        for (std::size_t e = lo; e < hi; ++e) {
          const std::size_t j = static_cast<std::size_t>(c.cols[e]);
          const double* zj = z + j * hid;
          double* dzj = d_z.data() + j * hid;
          double da = 0.0;
          for (int q = 0; q < hid; ++q) {
            da += d_out_h[q] * zj[q];
            dzj[q] += alpha[e] * d_out_h[q];
          }
          d_alpha[e - lo] = da;
          weighted += alpha[e] * da;
        }
        for (std::size_t e = lo; e < hi; ++e) {
          const double de = alpha[e] * (d_alpha[e - lo] - weighted);
          const double du = de * (raw[e] > 0.0 ? 1.0 : a.attention_slope);
          d_s[i] += du;
          d_t[c.cols[e]] += du;
        }
      }
      for (int i = 0; i < n; ++i) {
        const double* zi = z + static_cast<std::size_t>(i) * hid;
        double* dzi = d_z.data() + static_cast<std::size_t>(i) * hid;
        for (int q = 0; q < hid; ++q) {
          G[ad_at + q] += d_s[i] * zi[q];
          G[as_at + q] += d_t[i] * zi[q];
          dzi[q] += d_s[i] * w[ad_at + q] + d_t[i] * w[as_at + q];
        }
      }
      for (int i = 0; i < n; ++i) {
        const double* xi = lc.x.data() + static_cast<std::size_t>(i) * L.d_in;
        const double* dzi = d_z.data() + static_cast<std::size_t>(i) * hid;
        for (int k = 0; k < L.d_in; ++k) {
          const std::size_t row = w_at + static_cast<std::size_t>(k) * hid;
          const double xv = xi[k];
          double dx = 0.0;
          for (int q = 0; q < hid; ++q) {
            G[row + q] += xv * dzi[q];
            dx += dzi[q] * w[row + q];
          }
          if (need_dx) d_x[static_cast<std::size_t>(i) * L.d_in + k] += dx;
        }
      }
    }
    if (need_dx) d_y.swap(d_x);
  }
}

double distance(std::span<const double> a, std::span<const double> b) {
  double sq = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sq += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(sq);
}

// Embeds each distinct graph of the batch once.
struct BatchForward {
  std::vector<std::size_t> graphs;  // sorted distinct dataset indices
  std::vector<ForwardCache> caches;

  std::size_t slot(std::size_t index) const {
    return static_cast<std::size_t>(std::lower_bound(graphs.begin(), graphs.end(), index) - graphs.begin());
  }
  const std::vector<double>& embedding(std::size_t index) const { return caches[slot(index)].out; }
};

BatchForward forward_batch(const Dataset& data, std::span<const Triplet> batch, const EmbedderParams& p,
                           const ParamLayout& layout, int threads) {
  if (batch.empty()) throw ArgumentError("empty triplet batch");
  BatchForward bf;
  for (const auto& t : batch) {
    for (std::size_t idx : {t.anchor, t.positive, t.negative}) {
      if (idx >= data.items.size()) throw ArgumentError("triplet index outside dataset");
      bf.graphs.push_back(idx);
    }
  }
  std::sort(bf.graphs.begin(), bf.graphs.end());
  bf.graphs.erase(std::unique(bf.graphs.begin(), bf.graphs.end()), bf.graphs.end());
  bf.caches.resize(bf.graphs.size());
  parallel_for(
      bf.graphs.size(),
      [&](std::size_t k) {
        const auto& item = data.items[bf.graphs[k]];
        forward(item.graph, item.features, p, layout, bf.caches[k]);
      },
      threads);
  return bf;
}

}  // namespace

std::vector<double> embed(const Graph& g, const FeatureMatrix& f, const EmbedderParams& p) {
  const ParamLayout layout = param_layout(p.arch);
  ForwardCache cache;
  forward(g, f, p, layout, cache);
  return cache.out;
}

double triplet_margin_loss(std::span<const double> h_a, std::span<const double> h_p,
                           std::span<const double> h_n, double margin) {
  if (h_a.size() != h_p.size() || h_a.size() != h_n.size()) {
    throw ArgumentError("triplet embeddings differ in length");
  }
  return std::max(0.0, distance(h_a, h_p) - distance(h_a, h_n) + margin);
}

std::vector<Triplet> sample_triplets(const Dataset& data, std::size_t count, Rng& rng) {
  const std::size_t classes = data.classes.size();
  if (classes < 2) throw SamplingError("triplet sampling needs at least two classes");
  std::vector<std::vector<std::size_t>> members(classes);
  for (std::size_t i = 0; i < data.items.size(); ++i) {
    const int label = data.items[i].label;
    if (label < 0 || static_cast<std::size_t>(label) >= classes) {
      throw SamplingError("graph " + std::to_string(i) + " has an unknown class index");
    }
    members[label].push_back(i);
  }
  for (std::size_t c = 0; c < classes; ++c) {
    if (members[c].size() < 2) {
      throw SamplingError("class '" + data.classes[c] + "' has " + std::to_string(members[c].size()) +
                          " graph(s); triplets need at least 2");
    }
  }
  std::vector<Triplet> out(count);
  for (auto& t : out) {
    const auto a_class = static_cast<int>(rng.below(classes));
    const auto& own = members[a_class];
    const std::size_t i = rng.below(own.size());
    std::size_t j = rng.below(own.size() - 1);
    if (j >= i) ++j;
    auto n_class = static_cast<int>(rng.below(classes - 1));
    if (n_class >= a_class) ++n_class;
    const auto& other = members[n_class];
    t.anchor = own[i];
    t.positive = own[j];
    t.negative = other[rng.below(other.size())];
    t.anchor_class = a_class;
    t.negative_class = n_class;
  }
  return out;
}

Gradient grad(const Dataset& data, std::span<const Triplet> batch, const EmbedderParams& p,
              double margin, int threads) {
  const ParamLayout layout = param_layout(p.arch);
  const BatchForward bf = forward_batch(data, batch, p, layout, threads);
  const auto dim = static_cast<std::size_t>(p.arch.out_dim);
  std::vector<std::vector<double>> d_emb(bf.graphs.size(), std::vector<double>(dim, 0.0));
  const double scale = 1.0 / static_cast<double>(batch.size());
  Gradient out;
  for (const auto& t : batch) {
    const auto& a = bf.embedding(t.anchor);
    const auto& pos = bf.embedding(t.positive);
    const auto& neg = bf.embedding(t.negative);
    const double d_ap = distance(a, pos), d_an = distance(a, neg);
    const double loss = d_ap - d_an + margin;
    if (!(loss > 0.0)) continue;
    out.loss += loss;
    auto& ga = d_emb[bf.slot(t.anchor)];
    auto& gp = d_emb[bf.slot(t.positive)];
    auto& gn = d_emb[bf.slot(t.negative)];
    for (std::size_t k = 0; k < dim; ++k) {
      const double up = d_ap > 0.0 ? (a[k] - pos[k]) / d_ap * scale : 0.0;
      const double un = d_an > 0.0 ? (a[k] - neg[k]) / d_an * scale : 0.0;
      ga[k] += up - un;
      gp[k] -= up;
      gn[k] += un;
    }
  }
  out.loss *= scale;

  std::vector<std::vector<double>> partial(bf.graphs.size());
  parallel_for(
      bf.graphs.size(),
      [&](std::size_t k) {
        partial[k].assign(layout.size, 0.0);
        if (std::any_of(d_emb[k].begin(), d_emb[k].end(), [](double x) { return x != 0.0; }))
          backward(p, layout, bf.caches[k], d_emb[k], partial[k]);
      },
      threads);
  out.values.assign(layout.size, 0.0);
  for (const auto& part : partial)
    for (std::size_t i = 0; i < layout.size; ++i) out.values[i] += part[i];
  return out;
}

double batch_loss(const Dataset& data, std::span<const Triplet> batch, const EmbedderParams& p,
                  double margin, int threads) {
  const ParamLayout layout = param_layout(p.arch);
  const BatchForward bf = forward_batch(data, batch, p, layout, threads);
  double total = 0.0;
  for (const auto& t : batch)
    total += triplet_margin_loss(bf.embedding(t.anchor), bf.embedding(t.positive),
                                 bf.embedding(t.negative), margin);
  return total / static_cast<double>(batch.size());
}

TrainState make_train_state(EmbedderParams params, std::uint64_t seed) {
  TrainState s;
  s.m.assign(params.values.size(), 0.0);
  s.v.assign(params.values.size(), 0.0);
  s.params = std::move(params);
  s.best_val_loss = std::numeric_limits<double>::infinity();
  s.seed = seed;
  return s;
}

void adamw_step(TrainState& state, std::span<const double> grads, const AdamWConfig& opt) {
  auto& w = state.params.values;
  if (grads.size() != w.size() || state.m.size() != w.size() || state.v.size() != w.size()) {
    throw ArgumentError("gradient shape does not match parameters");
  }
  ++state.step;
  const double bc1 = 1.0 - std::pow(opt.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(opt.beta2, static_cast<double>(state.step));
  const double decay = 1.0 - opt.lr * opt.weight_decay;
  for (std::size_t i = 0; i < w.size(); ++i) {
    state.m[i] = opt.beta1 * state.m[i] + (1.0 - opt.beta1) * grads[i];
    state.v[i] = opt.beta2 * state.v[i] + (1.0 - opt.beta2) * grads[i] * grads[i];
    const double m_hat = state.m[i] / bc1;
    const double v_hat = state.v[i] / bc2;
    w[i] *= decay;
    if (m_hat != 0.0) w[i] -= opt.lr * m_hat / (std::sqrt(v_hat) + opt.eps);
  }
}

TrainResult train(const Dataset& train_set, const Dataset& val_set, const Architecture& arch,
                  const TrainConfig& config) {
  if (train_set.items.empty() || val_set.items.empty()) {
    throw TrainingError("training needs non-empty train and validation sets");
  }
  if (config.batch_size < 1 || config.triplets_per_epoch < 1 || config.val_triplets < 1) {
    throw ArgumentError("batch size and triplet counts must be positive");
  }
  TrainState state = make_train_state(init_params(arch, derive_seed(config.seed, "init")), config.seed);
  Rng val_rng(derive_seed(config.seed, "val-triplets"));
  std::vector<Triplet> val_triplets;
  try {
    val_triplets = sample_triplets(val_set, static_cast<std::size_t>(config.val_triplets), val_rng);
  } catch (const SamplingError& e) {
    throw SamplingError(std::string("validation set: ") + e.what());
  }
  Rng train_rng(derive_seed(config.seed, "train-triplets"));

  TrainResult result;
  result.params = state.params;
  result.history.initial_val_loss = batch_loss(val_set, val_triplets, state.params, config.margin, config.threads);
  state.best_val_loss = result.history.initial_val_loss;

  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    std::vector<Triplet> triplets;
    try {
      triplets = sample_triplets(train_set, static_cast<std::size_t>(config.triplets_per_epoch), train_rng);
    } catch (const SamplingError& e) {
      throw SamplingError(std::string("training set: ") + e.what());
    }
    double epoch_loss = 0.0;
    for (std::size_t at = 0; at < triplets.size(); at += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t len = std::min<std::size_t>(config.batch_size, triplets.size() - at);
      const auto g = grad(train_set, std::span(triplets).subspan(at, len), state.params, config.margin,
                          config.threads);
      if (!std::isfinite(g.loss)) {
        throw TrainingError("training loss diverged in epoch " + std::to_string(epoch));
      }
      epoch_loss += g.loss * static_cast<double>(len);
      adamw_step(state, g.values, config.optimizer);
    }
    const double val = batch_loss(val_set, val_triplets, state.params, config.margin, config.threads);
    if (!std::isfinite(val)) {
      throw TrainingError("validation loss diverged in epoch " + std::to_string(epoch));
    }
    result.history.train_loss.push_back(epoch_loss / static_cast<double>(triplets.size()));
    result.history.val_loss.push_back(val);
    if (val < state.best_val_loss - config.min_delta) {
      state.best_val_loss = val;
      state.epochs_since_improvement = 0;
      result.params = state.params;
      result.history.best_epoch = epoch;
    } else if (++state.epochs_since_improvement >= config.patience) {
      result.history.early_stopped = true;
      break;
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

using nlohmann::json;

constexpr const char* kCheckpointFormat = "rgm-embedder";
constexpr int kCheckpointVersion = 1;

json to_json(const Architecture& a) {
  return {{"in_dim", a.in_dim},   {"hidden", a.hidden},       {"heads", a.heads},
          {"layers", a.layers},   {"fc_hidden", a.fc_hidden}, {"out_dim", a.out_dim},
          {"pooling", to_string(a.pooling)}, {"attention_slope", a.attention_slope}};
}

json to_json(const TrainConfig& c) {
  return {{"lr", c.optimizer.lr},
          {"weight_decay", c.optimizer.weight_decay},
          {"beta1", c.optimizer.beta1},
          {"beta2", c.optimizer.beta2},
          {"eps", c.optimizer.eps},
          {"margin", c.margin},
          {"max_epochs", c.max_epochs},
          {"patience", c.patience},
          {"min_delta", c.min_delta},
          {"triplets_per_epoch", c.triplets_per_epoch},
          {"batch_size", c.batch_size},
          {"val_triplets", c.val_triplets}};
}

}  // namespace

void save_checkpoint(const Checkpoint& c, std::ostream& out) {
  const json doc = {{"format", kCheckpointFormat},
                    {"version", kCheckpointVersion},
                    {"architecture", to_json(c.params.arch)},
                    {"classes", c.classes},
                    {"train_config", to_json(c.config)},
                    {"seed", c.config.seed},
                    {"params", c.params.values}};
  out << doc.dump(1) << '\n';
}

Checkpoint load_checkpoint(std::istream& in) {
  try {
    const json doc = json::parse(in);
    if (doc.at("format") != kCheckpointFormat) throw FormatError("not an embedder checkpoint");
    if (doc.at("version").get<int>() != kCheckpointVersion) {
      throw FormatError("unsupported checkpoint version " + doc.at("version").dump());
    }
    Checkpoint c;
    const json& a = doc.at("architecture");
    Architecture& arch = c.params.arch;
    arch.in_dim = a.at("in_dim").get<int>();
    arch.hidden = a.at("hidden").get<int>();
    arch.heads = a.at("heads").get<int>();
    arch.layers = a.at("layers").get<int>();
    arch.fc_hidden = a.at("fc_hidden").get<int>();
    arch.out_dim = a.at("out_dim").get<int>();
    arch.pooling = pooling_from_string(a.at("pooling").get<std::string>());
    arch.attention_slope = a.at("attention_slope").get<double>();
    c.params.values = doc.at("params").get<std::vector<double>>();
    if (c.params.values.size() != param_layout(arch).size) {
      throw FormatError("checkpoint parameter count does not match its architecture");
    }
    c.classes = doc.at("classes").get<std::vector<std::string>>();
    const json& t = doc.at("train_config");
    c.config.optimizer.lr = t.at("lr").get<double>();
    c.config.optimizer.weight_decay = t.at("weight_decay").get<double>();
    c.config.optimizer.beta1 = t.at("beta1").get<double>();
    c.config.optimizer.beta2 = t.at("beta2").get<double>();
    c.config.optimizer.eps = t.at("eps").get<double>();
    c.config.margin = t.at("margin").get<double>();
    c.config.max_epochs = t.at("max_epochs").get<int>();
    c.config.patience = t.at("patience").get<int>();
    c.config.min_delta = t.at("min_delta").get<double>();
    c.config.triplets_per_epoch = t.at("triplets_per_epoch").get<int>();
    c.config.batch_size = t.at("batch_size").get<int>();
    c.config.val_triplets = t.at("val_triplets").get<int>();
    c.config.seed = doc.at("seed").get<std::uint64_t>();
    return c;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint_file(const Checkpoint& c, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw LoadError("cannot write checkpoint '" + path + "'");
  save_checkpoint(c, out);
}

Checkpoint load_checkpoint_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open checkpoint '" + path + "'");
  return load_checkpoint(in);
}

}  // namespace rgm
