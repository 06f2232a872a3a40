#include "rgm/descriptors.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <map>
#include <numeric>
#include <unordered_map>

#include "rgm/error.hpp"
#include "rgm/features.hpp"
#include "rgm/random.hpp"

namespace rgm {

std::string to_string(HistogramKind k) {
  switch (k) {
    case HistogramKind::degree: return "degree";
    case HistogramKind::clustering: return "clustering";
    case HistogramKind::spectral: return "spectral";
  }
  return "?";
}

namespace {

Histogram uniform_histogram(HistogramKind kind, int bins, double lo, double hi,
                            const std::vector<double>& values) {
  Histogram h;
  h.kind = kind;
  h.edges.resize(static_cast<std::size_t>(bins) + 1);
  for (int i = 0; i <= bins; ++i) h.edges[i] = lo + (hi - lo) * i / bins;
  h.mass.assign(static_cast<std::size_t>(bins), 0.0);
  if (values.empty()) return h;
  std::vector<std::int64_t> counts(static_cast<std::size_t>(bins), 0);
  for (double x : values) {
    auto idx = static_cast<long long>(std::floor((x - lo) / (hi - lo) * bins));
    idx = std::clamp<long long>(idx, 0, bins - 1);
    ++counts[idx];
  }
  for (int i = 0; i < bins; ++i) h.mass[i] = static_cast<double>(counts[i]) / values.size();
  return h;
}

}  // namespace

Histogram degree_histogram(const Graph& g, int max_bin) {
  if (max_bin < 1) throw ArgumentError("degree histogram needs max_bin >= 1");
  Histogram h;
  h.kind = HistogramKind::degree;
  h.edges.resize(static_cast<std::size_t>(max_bin) + 2);
  std::iota(h.edges.begin(), h.edges.end(), 0.0);
  std::vector<std::int64_t> counts(static_cast<std::size_t>(max_bin) + 1, 0);
  for (NodeId v = 0; v < g.num_nodes(); ++v) ++counts[std::min(g.degree(v), max_bin)];
  h.mass.assign(counts.size(), 0.0);
  if (g.num_nodes() > 0) {
    for (std::size_t i = 0; i < counts.size(); ++i)
      h.mass[i] = static_cast<double>(counts[i]) / g.num_nodes();
  }
  return h;
}

Histogram clustering_histogram(const Graph& g, int bins) {
  if (bins < 1) throw ArgumentError("clustering histogram needs bins >= 1");
  return uniform_histogram(HistogramKind::clustering, bins, 0.0, 1.0, local_clustering(g));
}

std::vector<double> normalized_laplacian_spectrum(const Graph& g, int max_nodes) {
  const int n = g.num_nodes();
  if (n > max_nodes) {
    throw CapabilityError("spectral descriptor limited to " + std::to_string(max_nodes) +
                          " nodes, graph has " + std::to_string(n));
  }
  if (n == 0) return {};
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
  std::vector<double> inv_sqrt(static_cast<std::size_t>(n), 0.0);
  for (NodeId v = 0; v < n; ++v) {
    if (g.degree(v) > 0) {
      inv_sqrt[v] = 1.0 / std::sqrt(static_cast<double>(g.degree(v)));
      lap(v, v) = 1.0;
    }
  }
  for (auto [u, v] : g.edges()) {
    const double w = -inv_sqrt[u] * inv_sqrt[v];
    lap(u, v) = w;
    lap(v, u) = w;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(lap, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw CapabilityError("eigensolver did not converge");
  const auto& ev = solver.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

Histogram spectral_descriptor(const Graph& g, int bins, int max_nodes) {
  if (bins < 1) throw ArgumentError("spectral histogram needs bins >= 1");
  auto ev = normalized_laplacian_spectrum(g, max_nodes);
  // Eigenvalues on bin edges (0, 1, 2 are common) must not flip bins with
  // solver rounding, so snap to a 1e-9 grid first.
  for (double& x : ev) x = std::round(x * 1e9) * 1e-9;
  return uniform_histogram(HistogramKind::spectral, bins, 0.0, 2.0, ev);
}

// ---------------------------------------------------------------------------
// Graphlet orbits

namespace {

// Pairs of a 4-node pattern in bit order.
constexpr std::array<std::pair<int, int>, 6> kPairs4 = {
    {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

bool connected_pattern(int nodes, const std::vector<std::pair<int, int>>& pairs, unsigned mask) {
  unsigned seen = 1, frontier = 1;
  while (frontier) {
    unsigned next = 0;
    for (std::size_t b = 0; b < pairs.size(); ++b) {
      if (!(mask >> b & 1U)) continue;
      const auto [i, j] = pairs[b];
      if (frontier >> i & 1U) next |= 1U << j;
      if (frontier >> j & 1U) next |= 1U << i;
    }
    frontier = next & ~seen;
    seen |= next;
  }
  return seen == (1U << nodes) - 1;
}

// Orbit of `node` in the 4-node pattern `mask`, or -1 if disconnected.
int classify4(unsigned mask, int node) {
  static const std::vector<std::pair<int, int>> pairs(kPairs4.begin(), kPairs4.end());
  if (!connected_pattern(4, pairs, mask)) return -1;
  std::array<int, 4> deg{};
  int edges = 0;
  for (std::size_t b = 0; b < 6; ++b) {
    if (!(mask >> b & 1U)) continue;
    ++deg[kPairs4[b].first];
    ++deg[kPairs4[b].second];
    ++edges;
  }
  const int d = deg[node];
  const int max_deg = *std::max_element(deg.begin(), deg.end());
  switch (edges) {
    case 3:
      if (max_deg == 3) return d == 3 ? 7 : 6;
      return d == 1 ? 4 : 5;
    case 4:
      if (max_deg == 2) return 8;
      return d == 1 ? 9 : (d == 3 ? 11 : 10);
    case 5: return d == 2 ? 12 : 13;
    default: return 14;
  }
}

constexpr std::array<int, 15> kOrbitEdges = {1, 2, 2, 3, 3, 3, 3, 3, 4, 4, 4, 4, 5, 5, 6};

// overlap[o][o2]: number of (not necessarily induced) copies of the graphlet
// of orbit o, with the node in orbit o, inside the graphlet of orbit o2 with
// the node in orbit o2. Only 4-node orbits (4..14) are filled.
using Overlap = std::array<std::array<int, kOrbits4>, kOrbits4>;

const Overlap& overlap_matrix() {
  static const Overlap table = [] {
    Overlap c{};
    std::array<std::pair<unsigned, int>, kOrbits4> rep{};
    std::array<bool, kOrbits4> found{};
    for (unsigned mask = 0; mask < 64; ++mask)
      for (int node = 0; node < 4; ++node) {
        const int o = classify4(mask, node);
        if (o >= 0 && !found[o]) {
          found[o] = true;
          rep[o] = {mask, node};
        }
      }
    for (int o2 = 4; o2 < kOrbits4; ++o2) {
      const auto [mask, node] = rep[o2];
      for (unsigned sub = mask;; sub = (sub - 1) & mask) {
        const int o = classify4(sub, node);
        if (o >= 0) ++c[o][o2];
        if (sub == 0) break;
      }
    }
    return c;
  }();
  return table;
}

std::int64_t choose2(std::int64_t k) { return k * (k - 1) / 2; }
std::int64_t choose3(std::int64_t k) { return k * (k - 1) * (k - 2) / 6; }

void count_up_to_four(const Graph& g, OrbitDescriptor& out) {
  const NodeId n = g.num_nodes();
  const int stride = out.orbits;

  // Triangles through each adjacency slot (edge seen from one endpoint).
  std::vector<std::size_t> base(static_cast<std::size_t>(n) + 1, 0);
  for (NodeId v = 0; v < n; ++v) base[v + 1] = base[v] + g.degree(v);
  std::vector<std::int64_t> edge_tri(base[n], 0);
  std::vector<std::int64_t> tri(static_cast<std::size_t>(n), 0);
  std::vector<char> mark(static_cast<std::size_t>(n), 0);
  for (NodeId x = 0; x < n; ++x) {
    for (NodeId y : g.neighbors(x)) mark[y] = 1;
    auto nb = g.neighbors(x);
    for (std::size_t i = 0; i < nb.size(); ++i) {
      std::int64_t common = 0;
      for (NodeId z : g.neighbors(nb[i])) common += mark[z];
      edge_tri[base[x] + i] = common;
      tri[x] += common;
    }
    tri[x] /= 2;
    for (NodeId y : g.neighbors(x)) mark[y] = 0;
  }
  auto slot_tri = [&](NodeId u, NodeId v) {
    auto nb = g.neighbors(u);
    const auto it = std::lower_bound(nb.begin(), nb.end(), v);
    return edge_tri[base[u] + static_cast<std::size_t>(it - nb.begin())];
  };

  const Overlap& overlap = overlap_matrix();
  std::vector<std::int64_t> paths_to(static_cast<std::size_t>(n), 0);
  std::vector<NodeId> touched;
  std::vector<char> mark2(static_cast<std::size_t>(n), 0);
  std::vector<NodeId> common;

  for (NodeId x = 0; x < n; ++x) {
    const std::int64_t dx = g.degree(x);
    auto nb = g.neighbors(x);
    for (NodeId y : nb) mark[y] = 1;

    std::array<std::int64_t, kOrbits4> non_induced{};
    std::int64_t p3_end = 0;
    for (std::size_t i = 0; i < nb.size(); ++i) {
      const NodeId a = nb[i];
      const std::int64_t da = g.degree(a);
      const std::int64_t t_xa = edge_tri[base[x] + i];
      p3_end += da - 1;
      non_induced[5] += (dx - 1) * (da - 1) - t_xa;
      non_induced[6] += choose2(da - 1);
      non_induced[9] += tri[a] - t_xa;
      non_induced[10] += t_xa * (da - 2);
      non_induced[13] += choose2(t_xa);
      for (NodeId b : g.neighbors(a)) {
        if (b == x) continue;
        non_induced[4] += g.degree(b) - 1 - mark[b];
        if (paths_to[b]++ == 0) touched.push_back(b);
      }
      // Triangles (x, a, c) with a < c: diamonds and K4s hanging off them.
      common.clear();
      for (NodeId c : g.neighbors(a))
        if (mark[c]) common.push_back(c);
      for (NodeId c : common) mark2[c] = 1;
      for (NodeId c : common) {
        if (c <= a) continue;
        non_induced[12] += slot_tri(a, c) - 1;
        for (NodeId w : g.neighbors(c)) non_induced[14] += mark2[w];
      }
      for (NodeId c : common) mark2[c] = 0;
    }
    for (NodeId b : touched) {
      non_induced[8] += choose2(paths_to[b]);
      paths_to[b] = 0;
    }
    touched.clear();
    non_induced[7] = choose3(dx);
    non_induced[11] = tri[x] * (dx - 2);
    non_induced[14] /= 3;
    for (NodeId y : nb) mark[y] = 0;

    std::int64_t* row = &out.per_node[static_cast<std::size_t>(x) * stride];
    row[0] = dx;
    row[3] = tri[x];
    row[2] = choose2(dx) - tri[x];
    row[1] = p3_end - 2 * tri[x];
    // Peel from the densest graphlet down: each non-induced count is the
    // induced count plus copies sitting inside denser graphlets.
    for (int edges = 6; edges >= 3; --edges) {
      for (int o = 4; o < kOrbits4; ++o) {
        if (kOrbitEdges[o] != edges) continue;
        std::int64_t value = non_induced[o];
        for (int o2 = 4; o2 < kOrbits4; ++o2)
          if (o2 != o && overlap[o][o2] != 0) value -= overlap[o][o2] * row[o2];
        row[o] = value / overlap[o][o];
      }
    }
  }
}

// ---- 5-node table

constexpr std::array<std::pair<int, int>, 10> kPairs5 = {
    {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {1, 2}, {1, 3}, {1, 4}, {2, 3}, {2, 4}, {3, 4}}};

int pair_index5(int i, int j) {
  if (i > j) std::swap(i, j);
  for (int b = 0; b < 10; ++b)
    if (kPairs5[b].first == i && kPairs5[b].second == j) return b;
  return -1;
}

unsigned apply_perm5(unsigned mask, const std::array<int, 5>& perm) {
  unsigned out = 0;
  for (int b = 0; b < 10; ++b)
    if (mask >> b & 1U) out |= 1U << pair_index5(perm[kPairs5[b].first], perm[kPairs5[b].second]);
  return out;
}

}  // namespace

const FiveNodeOrbitTable& five_node_orbit_table() {
  static const FiveNodeOrbitTable table = [] {
    const std::vector<std::pair<int, int>> pairs(kPairs5.begin(), kPairs5.end());
    std::vector<std::array<int, 5>> perms;
    std::array<int, 5> perm{0, 1, 2, 3, 4};
    do perms.push_back(perm);
    while (std::next_permutation(perm.begin(), perm.end()));

    // Canonical code = smallest relabeled mask.
    std::vector<int> canon(1024, -1);
    for (unsigned mask = 0; mask < 1024; ++mask) {
      if (!connected_pattern(5, pairs, mask)) continue;
      unsigned best = mask;
      for (const auto& p : perms) best = std::min(best, apply_perm5(mask, p));
      canon[mask] = static_cast<int>(best);
    }
    std::vector<unsigned> codes;
    for (unsigned mask = 0; mask < 1024; ++mask)
      if (canon[mask] == static_cast<int>(mask)) codes.push_back(mask);
    std::stable_sort(codes.begin(), codes.end(), [](unsigned a, unsigned b) {
      const int ea = std::popcount(a), eb = std::popcount(b);
      return ea != eb ? ea < eb : a < b;
    });

    // Orbits of each canonical graphlet's positions, numbered in graphlet
    // order, then by ascending position degree, then smallest position.
    std::map<unsigned, std::array<int, 5>> canon_orbit;
    int next_orbit = kOrbits4;
    for (unsigned code : codes) {
      std::array<int, 5> cls{0, 1, 2, 3, 4};
      for (const auto& p : perms) {
        if (apply_perm5(code, p) != code) continue;
        for (int i = 0; i < 5; ++i) {
          const int a = cls[i], b = cls[p[i]];
          if (a == b) continue;
          const int lo = std::min(a, b), hi = std::max(a, b);
          for (int& c : cls)
            if (c == hi) c = lo;
        }
      }
      std::array<int, 5> deg{};
      for (int b = 0; b < 10; ++b)
        if (code >> b & 1U) {
          ++deg[kPairs5[b].first];
          ++deg[kPairs5[b].second];
        }
      std::vector<int> reps;
      for (int i = 0; i < 5; ++i)
        if (cls[i] == i) reps.push_back(i);
      std::stable_sort(reps.begin(), reps.end(), [&](int a, int b) { return deg[a] < deg[b]; });
      std::array<int, 5> ids{};
      for (int r : reps) {
        const int id = next_orbit++;
        for (int i = 0; i < 5; ++i)
          if (cls[i] == r) ids[i] = id;
      }
      canon_orbit[code] = ids;
    }

    FiveNodeOrbitTable t;
    t.graphlets = static_cast<int>(codes.size());
    t.orbit.assign(1024, {-1, -1, -1, -1, -1});
    for (unsigned mask = 0; mask < 1024; ++mask) {
      if (canon[mask] < 0) continue;
      const auto code = static_cast<unsigned>(canon[mask]);
      for (const auto& p : perms) {
        if (apply_perm5(mask, p) != code) continue;
        for (int i = 0; i < 5; ++i) t.orbit[mask][i] = canon_orbit[code][p[i]];
        break;
      }
    }
    return t;
  }();
  return table;
}

namespace {

// ESU enumeration of connected induced 5-node subgraphs.
void count_five(const Graph& g, OrbitDescriptor& out) {
  const auto& table = five_node_orbit_table();
  const NodeId n = g.num_nodes();
  std::array<NodeId, 5> sub{};
  std::vector<char> in_sub(static_cast<std::size_t>(n), 0);
  // Number of sub nodes adjacent to each node, to test exclusive neighborhoods.
  std::vector<int> touching(static_cast<std::size_t>(n), 0);

  auto record = [&]() {
    unsigned mask = 0;
    for (int b = 0; b < 10; ++b)
      if (g.has_edge(sub[kPairs5[b].first], sub[kPairs5[b].second])) mask |= 1U << b;
    const auto& ids = table.orbit[mask];
    for (int i = 0; i < 5; ++i) ++out.per_node[static_cast<std::size_t>(sub[i]) * out.orbits + ids[i]];
  };

  auto extend = [&](auto&& self, int size, std::vector<NodeId> ext, NodeId root) -> void {
    if (size == 5) {
      record();
      return;
    }
    while (!ext.empty()) {
      const NodeId w = ext.back();
      ext.pop_back();
      std::vector<NodeId> next = ext;
      for (NodeId u : g.neighbors(w)) {
        if (u > root && !in_sub[u] && touching[u] == 0) next.push_back(u);
      }
      sub[size] = w;
      in_sub[w] = 1;
      for (NodeId u : g.neighbors(w)) ++touching[u];
      self(self, size + 1, std::move(next), root);
      for (NodeId u : g.neighbors(w)) --touching[u];
      in_sub[w] = 0;
    }
  };

  for (NodeId v = 0; v < n; ++v) {
    std::vector<NodeId> ext;
    for (NodeId u : g.neighbors(v))
      if (u > v) ext.push_back(u);
    sub[0] = v;
    in_sub[v] = 1;
    for (NodeId u : g.neighbors(v)) ++touching[u];
    extend(extend, 1, std::move(ext), v);
    for (NodeId u : g.neighbors(v)) --touching[u];
    in_sub[v] = 0;
  }
}

}  // namespace

OrbitDescriptor orbit_counts(const Graph& g, int max_size, int enumeration_cutoff) {
  if (max_size != 4 && max_size != 5) throw ArgumentError("orbit max_size must be 4 or 5");
  if (max_size == 5 && g.num_nodes() > enumeration_cutoff) {
    throw CapabilityError("5-node orbit counting enumerates subgraphs and is limited to n <= " +
                          std::to_string(enumeration_cutoff) + " (graph has " +
                          std::to_string(g.num_nodes()) + " nodes); use max_size=4");
  }
  OrbitDescriptor out;
  out.orbits = max_size == 4 ? kOrbits4 : kOrbits5;
  out.nodes = g.num_nodes();
  out.per_node.assign(static_cast<std::size_t>(out.nodes) * out.orbits, 0);
  count_up_to_four(g, out);
  if (max_size == 5) count_five(g, out);
  out.graph_vector.assign(static_cast<std::size_t>(out.orbits), 0.0);
  if (out.nodes > 0) {
    for (int o = 0; o < out.orbits; ++o) {
      std::int64_t sum = 0;
      for (int v = 0; v < out.nodes; ++v) sum += out(v, o);
      out.graph_vector[o] = static_cast<double>(sum) / out.nodes;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// NSPDK

std::int64_t SparseCounts::get(std::uint64_t key) const {
  auto it = std::lower_bound(entries.begin(), entries.end(), key,
                             [](const auto& e, std::uint64_t k) { return e.first < k; });
  return it != entries.end() && it->first == key ? it->second : 0;
}

std::int64_t SparseCounts::total() const {
  std::int64_t sum = 0;
  for (const auto& e : entries) sum += e.second;
  return sum;
}

namespace {

std::uint64_t mix(std::uint64_t h, std::uint64_t x) { return splitmix64(h ^ splitmix64(x)); }

struct BallWorkspace {
  explicit BallWorkspace(NodeId n) : local(static_cast<std::size_t>(n), -1) {}
  std::vector<int> local;  // global id -> index in ball, -1 outside
  std::vector<NodeId> nodes;
  std::vector<int> dist;
  std::vector<std::uint64_t> color, next;
  std::vector<std::uint64_t> scratch;
};

std::uint64_t ball_label(const Graph& g, NodeId root, int radius, BallWorkspace& ws) {
  ws.nodes.assign(1, root);
  ws.dist.assign(1, 0);
  ws.local[root] = 0;
  for (std::size_t head = 0; head < ws.nodes.size(); ++head) {
    const NodeId v = ws.nodes[head];
    if (ws.dist[head] == radius) continue;
    for (NodeId u : g.neighbors(v)) {
      if (ws.local[u] >= 0) continue;
      ws.local[u] = static_cast<int>(ws.nodes.size());
      ws.nodes.push_back(u);
      ws.dist.push_back(ws.dist[head] + 1);
    }
  }
  const std::size_t size = ws.nodes.size();
  ws.color.resize(size);
  ws.next.resize(size);
  for (std::size_t i = 0; i < size; ++i) {
    ws.color[i] = mix(static_cast<std::uint64_t>(g.degree(ws.nodes[i])),
                      static_cast<std::uint64_t>(ws.dist[i]));
  }
  for (int round = 0; round < radius + 2; ++round) {
    for (std::size_t i = 0; i < size; ++i) {
      ws.scratch.clear();
      for (NodeId u : g.neighbors(ws.nodes[i]))
        if (ws.local[u] >= 0) ws.scratch.push_back(ws.color[ws.local[u]]);
      std::sort(ws.scratch.begin(), ws.scratch.end());
      std::uint64_t h = mix(0x6e737064ULL, ws.color[i]);
      for (std::uint64_t c : ws.scratch) h = mix(h, c);
      ws.next[i] = h;
    }
    ws.color.swap(ws.next);
  }
  std::uint64_t label = mix(static_cast<std::uint64_t>(radius), ws.color[0]);
  ws.scratch.assign(ws.color.begin(), ws.color.end());
  std::sort(ws.scratch.begin(), ws.scratch.end());
  for (std::uint64_t c : ws.scratch) label = mix(label, c);
  for (NodeId v : ws.nodes) ws.local[v] = -1;
  return label;
}

}  // namespace

std::uint64_t rooted_neighborhood_label(const Graph& g, NodeId root, int radius) {
  if (root < 0 || root >= g.num_nodes()) throw ArgumentError("root outside graph");
  if (radius < 0) throw ArgumentError("radius must be >= 0");
  BallWorkspace ws(g.num_nodes());
  return ball_label(g, root, radius, ws);
}

SparseCounts nspdk_features(const Graph& g, int r_max, int d_max) {
  if (r_max < 0 || d_max < 0) throw ArgumentError("NSPDK needs r_max >= 0 and d_max >= 0");
  const NodeId n = g.num_nodes();
  BallWorkspace ws(n);
  // labels[r * n + v]
  std::vector<std::uint64_t> labels(static_cast<std::size_t>(r_max + 1) * n);
  for (int r = 0; r <= r_max; ++r)
    for (NodeId v = 0; v < n; ++v) labels[static_cast<std::size_t>(r) * n + v] = ball_label(g, v, r, ws);

  std::unordered_map<std::uint64_t, std::int64_t> counts;
  std::vector<int> dist(static_cast<std::size_t>(n), -1);
  std::vector<NodeId> frontier;
  for (NodeId u = 0; u < n; ++u) {
    frontier.assign(1, u);
    dist[u] = 0;
    for (std::size_t head = 0; head < frontier.size(); ++head) {
      const NodeId v = frontier[head];
      if (dist[v] == d_max) continue;
      for (NodeId w : g.neighbors(v)) {
        if (dist[w] >= 0) continue;
        dist[w] = dist[v] + 1;
        frontier.push_back(w);
      }
    }
    for (NodeId v : frontier) {
      if (v < u) continue;
      for (int r = 0; r <= r_max; ++r) {
        std::uint64_t a = labels[static_cast<std::size_t>(r) * n + u];
        std::uint64_t b = labels[static_cast<std::size_t>(r) * n + v];
        if (a > b) std::swap(a, b);
        const std::uint64_t key =
            mix(mix(mix(static_cast<std::uint64_t>(r) << 32 | static_cast<std::uint32_t>(dist[v]), a), b),
                0x706169720000ULL);
        ++counts[key];
      }
    }
    for (NodeId v : frontier) dist[v] = -1;
  }
  SparseCounts out;
  out.entries.assign(counts.begin(), counts.end());
  std::sort(out.entries.begin(), out.entries.end());
  return out;
}

}  // namespace rgm
