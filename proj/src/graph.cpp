#include "rgm/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <queue>
#include <sstream>
#include <unordered_map>

#include "rgm/error.hpp"
#include "rgm/random.hpp"

namespace rgm {

Graph Graph::from_edge_list(std::span<const std::pair<std::int64_t, std::int64_t>> pairs,
                            std::optional<std::int64_t> n_hint) {
  std::int64_t max_id = -1;
  std::vector<Edge> edges;
  edges.reserve(pairs.size());
  for (const auto& [a, b] : pairs) {
    if (a < 0 || b < 0) {
      throw FormatError("negative node id in edge (" + std::to_string(a) + ", " +
                        std::to_string(b) + ")");
    }
    if (a >= INT32_MAX || b >= INT32_MAX) {
      throw FormatError("node id exceeds 32-bit range");
    }
    max_id = std::max({max_id, a, b});
    edges.emplace_back(static_cast<NodeId>(a), static_cast<NodeId>(b));
  }
  std::int64_t n = max_id + 1;
  if (n_hint) {
    if (*n_hint < n) {
      throw ArgumentError("n_hint " + std::to_string(*n_hint) +
                          " is smaller than max id + 1 = " + std::to_string(n));
    }
    n = *n_hint;
  }
  return from_edges(static_cast<NodeId>(n), std::move(edges));
}

Graph Graph::from_edge_list(std::span<const Edge> pairs, std::optional<std::int64_t> n_hint) {
  std::vector<std::pair<std::int64_t, std::int64_t>> wide(pairs.begin(), pairs.end());
  return from_edge_list(std::span<const std::pair<std::int64_t, std::int64_t>>(wide), n_hint);
}

Graph Graph::from_edges(NodeId n, std::vector<Edge> edges) {
  if (n < 0) throw ArgumentError("negative node count");
  std::size_t kept = 0;
  for (auto [u, v] : edges) {
    if (u < 0 || v < 0 || u >= n || v >= n) {
      throw ArgumentError("edge (" + std::to_string(u) + ", " + std::to_string(v) +
                          ") outside node range [0, " + std::to_string(n) + ")");
    }
    if (u == v) continue;
    edges[kept++] = {std::min(u, v), std::max(u, v)};
  }
  edges.resize(kept);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  Graph g;
  g.n_ = n;
  g.edges_ = std::move(edges);
  std::vector<std::size_t> counts(static_cast<std::size_t>(n) + 1, 0);
  for (auto [u, v] : g.edges_) {
    ++counts[u + 1];
    ++counts[v + 1];
  }
  for (std::size_t i = 1; i < counts.size(); ++i) counts[i] += counts[i - 1];
  g.offsets_ = counts;
  g.adjacency_.resize(2 * g.edges_.size());
  std::vector<std::size_t> cursor(counts.begin(), counts.end() - 1);
  // Edges are sorted by (u, v), so filling in this order leaves every list
  // sorted: lower neighbors arrive (as the v side) before higher ones.
  for (auto [u, v] : g.edges_) g.adjacency_[cursor[v]++] = u;
  for (auto [u, v] : g.edges_) g.adjacency_[cursor[u]++] = v;
  for (NodeId v = 0; v < n; ++v) {
    auto first = g.adjacency_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[v]);
    auto last = g.adjacency_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[v + 1]);
    if (!std::is_sorted(first, last)) std::sort(first, last);
  }
  return g;
}

int Graph::max_degree() const {
  int best = 0;
  for (NodeId v = 0; v < n_; ++v) best = std::max(best, degree(v));
  return best;
}

std::vector<int> Graph::degrees() const {
  std::vector<int> d(static_cast<std::size_t>(n_));
  for (NodeId v = 0; v < n_; ++v) d[v] = degree(v);
  return d;
}

bool Graph::has_edge(NodeId u, NodeId v) const {
  if (u < 0 || v < 0 || u >= n_ || v >= n_ || u == v) return false;
  if (degree(u) > degree(v)) std::swap(u, v);
  auto nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

Graph permute(const Graph& g, std::span<const NodeId> perm) {
  if (perm.size() != static_cast<std::size_t>(g.num_nodes())) {
    throw ArgumentError("permutation length does not match node count");
  }
  std::vector<Edge> edges;
  edges.reserve(g.num_edges());
  for (auto [u, v] : g.edges()) edges.emplace_back(perm[u], perm[v]);
  return Graph::from_edges(g.num_nodes(), std::move(edges));
}

Graph disjoint_union(const Graph& a, const Graph& b) {
  std::vector<Edge> edges(a.edges());
  const NodeId shift = a.num_nodes();
  for (auto [u, v] : b.edges()) edges.emplace_back(u + shift, v + shift);
  return Graph::from_edges(a.num_nodes() + b.num_nodes(), std::move(edges));
}

Graph complete_graph(int n) {
  std::vector<Edge> edges;
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v = u + 1; v < n; ++v) edges.emplace_back(u, v);
  return Graph::from_edges(n, std::move(edges));
}

Graph path_graph(int n) {
  std::vector<Edge> edges;
  for (NodeId u = 0; u + 1 < n; ++u) edges.emplace_back(u, u + 1);
  return Graph::from_edges(n, std::move(edges));
}

Graph cycle_graph(int n) {
  std::vector<Edge> edges;
  for (NodeId u = 0; u < n; ++u) edges.emplace_back(u, (u + 1) % n);
  return Graph::from_edges(n, std::move(edges));
}

Graph star_graph(int leaves) {
  std::vector<Edge> edges;
  for (NodeId v = 1; v <= leaves; ++v) edges.emplace_back(0, v);
  return Graph::from_edges(leaves + 1, std::move(edges));
}

ComponentPartition connected_components(const Graph& g) {
  const NodeId n = g.num_nodes();
  std::vector<int> raw(static_cast<std::size_t>(n), -1);
  std::vector<int> raw_sizes;
  std::vector<NodeId> stack;
  for (NodeId s = 0; s < n; ++s) {
    if (raw[s] != -1) continue;
    const int id = static_cast<int>(raw_sizes.size());
    raw_sizes.push_back(0);
    raw[s] = id;
    stack.push_back(s);
    while (!stack.empty()) {
      const NodeId v = stack.back();
      stack.pop_back();
      ++raw_sizes[id];
      for (NodeId u : g.neighbors(v)) {
        if (raw[u] == -1) {
          raw[u] = id;
          stack.push_back(u);
        }
      }
    }
  }
  // Raw ids follow smallest-member order, so a stable sort by size keeps the
  // smallest-member tie break.
  std::vector<int> order(raw_sizes.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return raw_sizes[a] > raw_sizes[b]; });
  std::vector<int> rank(order.size());
  ComponentPartition out;
  out.sizes.resize(order.size());
  for (std::size_t r = 0; r < order.size(); ++r) {
    rank[order[r]] = static_cast<int>(r);
    out.sizes[r] = raw_sizes[order[r]];
  }
  out.labels.resize(raw.size());
  for (std::size_t v = 0; v < raw.size(); ++v) out.labels[v] = rank[raw[v]];
  return out;
}

std::vector<int> bfs_distances(const Graph& g, NodeId source) {
  std::vector<int> dist(static_cast<std::size_t>(g.num_nodes()), -1);
  std::vector<NodeId> frontier{source};
  dist[source] = 0;
  for (std::size_t head = 0; head < frontier.size(); ++head) {
    const NodeId v = frontier[head];
    for (NodeId u : g.neighbors(v)) {
      if (dist[u] < 0) {
        dist[u] = dist[v] + 1;
        frontier.push_back(u);
      }
    }
  }
  return dist;
}

DistanceSummary bfs_eccentricity_sample(const Graph& g, std::span<const NodeId> sources,
                                        bool restrict_to_lcc) {
  if (sources.empty()) throw ArgumentError("no BFS sources given");
  std::vector<int> labels;
  if (restrict_to_lcc) labels = connected_components(g).labels;
  for (NodeId s : sources) {
    if (s < 0 || s >= g.num_nodes()) {
      throw ArgumentError("BFS source " + std::to_string(s) + " outside graph");
    }
    if (restrict_to_lcc && labels[s] != 0) {
      throw ArgumentError("BFS source " + std::to_string(s) + " outside the largest component");
    }
  }
  DistanceSummary out;
  long double total = 0.0L;
  std::uint64_t pairs = 0;
  for (NodeId s : sources) {
    const auto dist = bfs_distances(g, s);
    for (std::size_t t = 0; t < dist.size(); ++t) {
      if (dist[t] <= 0) continue;
      out.max_distance = std::max(out.max_distance, dist[t]);
      total += dist[t];
      ++pairs;
    }
  }
  out.mean_distance = pairs ? static_cast<double>(total / pairs) : 0.0;
  return out;
}

DistanceSummary lcc_distance_summary(const Graph& g, std::uint64_t seed, int exact_limit) {
  if (g.num_nodes() == 0) return {};
  const auto parts = connected_components(g);
  std::vector<NodeId> lcc;
  for (NodeId v = 0; v < g.num_nodes(); ++v)
    if (parts.labels[v] == 0) lcc.push_back(v);
  if (static_cast<int>(lcc.size()) > exact_limit) {
    const auto wanted = std::max<std::size_t>(
        100, static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(lcc.size())))));
    Rng rng(seed);
    rng.shuffle(lcc);
    lcc.resize(std::min(wanted, lcc.size()));
    std::sort(lcc.begin(), lcc.end());
  }
  return bfs_eccentricity_sample(g, lcc, /*restrict_to_lcc=*/false);
}

namespace {

bool parse_int(std::string_view token, std::int64_t& out) {
  if (token.empty()) return false;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

}  // namespace

EdgeListFile read_edge_list(std::istream& in) {
  std::vector<std::pair<std::string, std::string>> tokens;
  std::optional<std::int64_t> n_hint;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string a, b;
    if (!(fields >> a)) continue;
    if (a[0] == '#' || a[0] == '%') {
      std::string key;
      std::int64_t value = 0;
      std::istringstream comment(line.substr(1));
      if (comment >> key >> value && key == "nodes:") n_hint = value;
      continue;
    }
    if (!(fields >> b)) {
      throw FormatError("line " + std::to_string(line_no) + ": expected two node ids");
    }
    tokens.emplace_back(std::move(a), std::move(b));
  }

  EdgeListFile out;
  std::vector<std::pair<std::int64_t, std::int64_t>> pairs;
  pairs.reserve(tokens.size());
  bool numeric = true;
  for (const auto& [a, b] : tokens) {
    std::int64_t x = 0, y = 0;
    if (!parse_int(a, x) || !parse_int(b, y)) {
      // A '-' prefix on a parseable integer is a negative id, not a label.
      if ((parse_int(a, x) && x < 0) || (parse_int(b, y) && y < 0)) {
        throw FormatError("negative node id in edge list");
      }
      numeric = false;
      break;
    }
    pairs.emplace_back(x, y);
  }
  if (numeric) {
    out.graph = Graph::from_edge_list(
        std::span<const std::pair<std::int64_t, std::int64_t>>(pairs), n_hint);
    return out;
  }

  std::unordered_map<std::string, std::int64_t> ids;
  pairs.clear();
  auto intern = [&](const std::string& label) {
    auto [it, inserted] = ids.emplace(label, static_cast<std::int64_t>(out.labels.size()));
    if (inserted) out.labels.push_back(label);
    return it->second;
  };
  for (const auto& [a, b] : tokens) {
    const std::int64_t x = intern(a);
    pairs.emplace_back(x, intern(b));
  }
  out.graph = Graph::from_edge_list(
      std::span<const std::pair<std::int64_t, std::int64_t>>(pairs),
      static_cast<std::int64_t>(out.labels.size()));
  return out;
}

EdgeListFile read_edge_list_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open edge list '" + path + "'");
  try {
    return read_edge_list(in);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

void write_edge_list(const Graph& g, std::ostream& out) {
  out << "# nodes: " << g.num_nodes() << '\n';
  for (auto [u, v] : g.edges()) out << u << ' ' << v << '\n';
}

void write_edge_list_file(const Graph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw LoadError("cannot write edge list '" + path + "'");
  write_edge_list(g, out);
}

}  // namespace rgm
