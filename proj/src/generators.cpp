#include "rgm/generators.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "rgm/error.hpp"
#include "rgm/random.hpp"

namespace rgm {

namespace {

std::uint64_t edge_key(NodeId u, NodeId v) {
  if (u > v) std::swap(u, v);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(u)) << 32) |
         static_cast<std::uint32_t>(v);
}

void check_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ArgumentError(std::string(what) + " must lie in [0, 1], got " + std::to_string(p));
  }
}

}  // namespace

Graph gen_er(int n, double p, std::uint64_t seed) {
  if (n < 1) throw ArgumentError("ER needs n >= 1");
  check_probability(p, "ER edge probability");
  Rng rng(seed);
  std::vector<Edge> edges;
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v = u + 1; v < n; ++v)
      if (rng.uniform() < p) edges.emplace_back(u, v);
  return Graph::from_edges(n, std::move(edges));
}

Graph gen_er_match(int n, std::size_t edges, std::uint64_t seed) {
  if (n < 1) throw ArgumentError("G(n, M) needs n >= 1");
  const std::uint64_t pairs = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  if (edges > pairs) throw ArgumentError("G(n, M) asks for more edges than node pairs");
  Rng rng(seed);
  // Floyd's sampling of `edges` distinct pair indices.
  std::unordered_set<std::uint64_t> chosen;
  for (std::uint64_t j = pairs - edges; j < pairs; ++j) {
    const std::uint64_t t = rng.below(j + 1);
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  std::vector<std::uint64_t> indices(chosen.begin(), chosen.end());
  std::sort(indices.begin(), indices.end());
  std::vector<Edge> out;
  out.reserve(indices.size());
  // Pair index k enumerates (u, v), u < v, row by row.
  NodeId u = 0;
  std::uint64_t row_start = 0;
  for (std::uint64_t k : indices) {
    while (k >= row_start + static_cast<std::uint64_t>(n - 1 - u)) {
      row_start += static_cast<std::uint64_t>(n - 1 - u);
      ++u;
    }
    out.emplace_back(u, static_cast<NodeId>(u + 1 + (k - row_start)));
  }
  return Graph::from_edges(n, std::move(out));
}

Graph gen_ba(int n, int m, std::uint64_t seed) {
  if (m < 1 || m >= n) {
    throw ArgumentError("BA needs 1 <= m < n, got m=" + std::to_string(m) +
                        " n=" + std::to_string(n));
  }
  Rng rng(seed);
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(m - 1) + static_cast<std::size_t>(m) * (n - m));
  // Each node id appears once per unit of degree.
  std::vector<NodeId> endpoints;
  for (NodeId v = 0; v + 1 < m; ++v) {
    edges.emplace_back(v, v + 1);
    endpoints.push_back(v);
    endpoints.push_back(v + 1);
  }
  std::vector<NodeId> picked;
  std::vector<char> taken(static_cast<std::size_t>(n), 0);
  for (NodeId t = m; t < n; ++t) {
    picked.clear();
    while (static_cast<int>(picked.size()) < m) {
      const NodeId cand = endpoints.empty()
                              ? static_cast<NodeId>(rng.below(static_cast<std::uint64_t>(t)))
                              : endpoints[rng.below(endpoints.size())];
      if (taken[cand]) continue;
      taken[cand] = 1;
      picked.push_back(cand);
    }
    for (NodeId s : picked) {
      taken[s] = 0;
      edges.emplace_back(s, t);
      endpoints.push_back(s);
    }
    for (int k = 0; k < m; ++k) endpoints.push_back(t);
  }
  return Graph::from_edges(n, std::move(edges));
}

Graph gen_sbm(const std::vector<int>& block_sizes, const std::vector<std::vector<double>>& probs,
              std::uint64_t seed) {
  const std::size_t k = block_sizes.size();
  if (k == 0) throw ArgumentError("SBM needs at least one block");
  if (probs.size() != k) throw ArgumentError("SBM probability matrix has wrong row count");
  for (std::size_t i = 0; i < k; ++i) {
    if (probs[i].size() != k) throw ArgumentError("SBM probability matrix is not square");
    if (block_sizes[i] < 0) throw ArgumentError("SBM block size must be non-negative");
    for (std::size_t j = 0; j < k; ++j) {
      check_probability(probs[i][j], "SBM block probability");
      if (probs[i][j] != probs[j][i]) throw ArgumentError("SBM probability matrix is asymmetric");
    }
  }
  std::vector<int> block;
  for (std::size_t b = 0; b < k; ++b) block.insert(block.end(), block_sizes[b], static_cast<int>(b));
  const auto n = static_cast<NodeId>(block.size());
  if (n < 1) throw ArgumentError("SBM needs at least one node");
  Rng rng(seed);
  std::vector<Edge> edges;
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v = u + 1; v < n; ++v)
      if (rng.uniform() < probs[block[u]][block[v]]) edges.emplace_back(u, v);
  return Graph::from_edges(n, std::move(edges));
}

// ---------------------------------------------------------------------------
// LFR

namespace {

// Mean of the continuous power law x^-tau on [lo, hi].
double power_law_mean(double tau, double lo, double hi) {
  auto integral = [&](double exponent) {  // integral of x^(exponent) on [lo, hi]
    if (std::abs(exponent + 1.0) < 1e-12) return std::log(hi / lo);
    return (std::pow(hi, exponent + 1.0) - std::pow(lo, exponent + 1.0)) / (exponent + 1.0);
  };
  return integral(1.0 - tau) / integral(-tau);
}

double sample_power_law(Rng& rng, double tau, double lo, double hi) {
  const double u = rng.uniform();
  if (std::abs(tau - 1.0) < 1e-12) return lo * std::pow(hi / lo, u);
  const double a = std::pow(lo, 1.0 - tau);
  const double b = std::pow(hi, 1.0 - tau);
  return std::pow(a + u * (b - a), 1.0 / (1.0 - tau));
}

struct StubPair {
  NodeId a;
  NodeId b;
};

// Pairs shuffled stubs, then repairs invalid pairs by swapping with random
// accepted edges. `allowed(u, v)` decides whether an edge may exist at all
// (e.g. must cross communities). Unrepairable stubs are dropped.
void match_stubs(std::vector<NodeId> stubs, Rng& rng, std::unordered_set<std::uint64_t>& present,
                 std::vector<Edge>& accepted, const auto& allowed) {
  rng.shuffle(stubs);
  if (stubs.size() % 2 == 1) stubs.pop_back();
  std::vector<StubPair> bad;
  auto valid = [&](NodeId u, NodeId v) {
    return u != v && allowed(u, v) && !present.contains(edge_key(u, v));
  };
  const std::size_t first = accepted.size();
  for (std::size_t i = 0; i + 1 < stubs.size(); i += 2) {
    const NodeId a = stubs[i], b = stubs[i + 1];
    if (valid(a, b)) {
      present.insert(edge_key(a, b));
      accepted.emplace_back(a, b);
    } else {
      bad.push_back({a, b});
    }
  }
  constexpr int kAttempts = 50;
  for (const auto& [a, b] : bad) {
    for (int attempt = 0; attempt < kAttempts; ++attempt) {
      const std::size_t pool = accepted.size() - first;
      if (pool == 0) break;
      const std::size_t idx = first + rng.below(pool);
      auto [c, d] = accepted[idx];
      if (rng.uniform() < 0.5) std::swap(c, d);
      // (a, b) + (c, d) -> (a, c) + (b, d)
      if (!valid(a, c)) continue;
      if (edge_key(a, c) == edge_key(b, d)) continue;
      present.erase(edge_key(c, d));
      if (!valid(b, d)) {
        present.insert(edge_key(c, d));
        continue;
      }
      present.insert(edge_key(a, c));
      present.insert(edge_key(b, d));
      accepted[idx] = {a, c};
      accepted.emplace_back(b, d);
      break;
    }
  }
}

}  // namespace

LfrGraph gen_lfr_planted(const LfrParams& p, std::uint64_t seed) {
  if (p.n < 2) throw ArgumentError("LFR needs n >= 2");
  if (!(p.tau1 > 1.0) || !(p.tau2 > 1.0)) throw ArgumentError("LFR exponents must exceed 1");
  check_probability(p.mu, "LFR mixing parameter");
  if (!(p.avg_deg >= 1.0) || p.avg_deg > p.max_deg || p.max_deg >= p.n) {
    throw ArgumentError("LFR needs 1 <= avg_deg <= max_deg < n");
  }
  if (p.min_comm < 1 || p.min_comm > p.max_comm || p.max_comm > p.n) {
    throw ArgumentError("LFR needs 1 <= min_comm <= max_comm <= n");
  }

  // Degree lower cutoff chosen so the continuous mean hits avg_deg.
  const double hi = p.max_deg;
  double lo_x = 1.0, hi_x = hi;
  if (power_law_mean(p.tau1, lo_x, hi) > p.avg_deg) {
    throw GenerationError("LFR: avg_deg below the smallest attainable mean for tau1");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo_x + hi_x);
    (power_law_mean(p.tau1, mid, hi) < p.avg_deg ? lo_x : hi_x) = mid;
  }
  const double x_min = 0.5 * (lo_x + hi_x);

  Rng rng(seed);
  constexpr int kRetries = 50;
  std::string last_failure;
  for (int attempt = 0; attempt < kRetries; ++attempt) {
    const auto n = static_cast<std::size_t>(p.n);
    std::vector<int> degree(n);
    for (auto& k : degree) {
      k = static_cast<int>(std::lround(sample_power_law(rng, p.tau1, x_min, hi)));
      k = std::clamp(k, 1, p.max_deg);
    }

    // Internal share by stochastic rounding so the expected mixing is mu.
    std::vector<int> internal(n);
    for (std::size_t v = 0; v < n; ++v) {
      const double target = (1.0 - p.mu) * degree[v];
      const double base = std::floor(target);
      internal[v] = static_cast<int>(base) + (rng.uniform() < target - base ? 1 : 0);
    }

    std::vector<int> sizes;
    int total = 0;
    while (total < p.n) {
      int s = static_cast<int>(std::lround(sample_power_law(rng, p.tau2, p.min_comm, p.max_comm)));
      s = std::clamp(s, p.min_comm, p.max_comm);
      sizes.push_back(s);
      total += s;
    }
    int excess = total - p.n;
    sizes.back() -= excess;
    if (sizes.back() < p.min_comm) {
      int remainder = sizes.back();
      sizes.pop_back();
      while (remainder > 0) {
        std::vector<std::size_t> room;
        for (std::size_t c = 0; c < sizes.size(); ++c)
          if (sizes[c] < p.max_comm) room.push_back(c);
        if (room.empty()) break;
        ++sizes[room[rng.below(room.size())]];
        --remainder;
      }
      if (remainder > 0) {
        last_failure = "community sizes cannot absorb all nodes within max_comm";
        continue;
      }
    }

    // Place high internal-degree nodes first; a node fits a community only if
    // its internal degree is below the community size.
    std::vector<NodeId> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    std::stable_sort(order.begin(), order.end(),
                     [&](NodeId a, NodeId b) { return internal[a] > internal[b]; });
    std::vector<int> free_slots(sizes);
    std::vector<int> community(n, -1);
    bool placed_all = true;
    for (NodeId v : order) {
      long long slots = 0;
      for (std::size_t c = 0; c < sizes.size(); ++c)
        if (internal[v] < sizes[c]) slots += free_slots[c];
      if (slots == 0) {
        placed_all = false;
        last_failure = "node with internal degree " + std::to_string(internal[v]) +
                       " fits no community with free slots";
        break;
      }
      auto pick = static_cast<long long>(rng.below(static_cast<std::uint64_t>(slots)));
      for (std::size_t c = 0; c < sizes.size(); ++c) {
        if (internal[v] >= sizes[c]) continue;
        if (pick < free_slots[c]) {
          community[v] = static_cast<int>(c);
          --free_slots[c];
          break;
        }
        pick -= free_slots[c];
      }
    }
    if (!placed_all) continue;

    std::unordered_set<std::uint64_t> present;
    std::vector<Edge> edges;
    std::vector<std::vector<NodeId>> intra_stubs(sizes.size());
    std::vector<NodeId> inter_stubs;
    for (std::size_t v = 0; v < n; ++v) {
      intra_stubs[community[v]].insert(intra_stubs[community[v]].end(), internal[v],
                                       static_cast<NodeId>(v));
      inter_stubs.insert(inter_stubs.end(), degree[v] - internal[v], static_cast<NodeId>(v));
    }
    for (auto& stubs : intra_stubs) {
      match_stubs(std::move(stubs), rng, present, edges, [](NodeId, NodeId) { return true; });
    }
    match_stubs(std::move(inter_stubs), rng, present, edges,
                [&](NodeId u, NodeId v) { return community[u] != community[v]; });

    LfrGraph out;
    out.graph = Graph::from_edges(p.n, std::move(edges));
    out.community = std::move(community);
    return out;
  }
  throw GenerationError("LFR: infeasible after " + std::to_string(kRetries) +
                        " retries (" + last_failure + ")");
}

Graph gen_lfr(const LfrParams& params, std::uint64_t seed) {
  return gen_lfr_planted(params, seed).graph;
}

double realized_mixing(const Graph& g, const std::vector<int>& community) {
  double total = 0.0;
  int counted = 0;
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    if (g.degree(v) == 0) continue;
    int external = 0;
    for (NodeId u : g.neighbors(v)) external += community[u] != community[v];
    total += static_cast<double>(external) / g.degree(v);
    ++counted;
  }
  return counted ? total / counted : 0.0;
}

double modularity(const Graph& g, const std::vector<int>& community) {
  const double m = static_cast<double>(g.num_edges());
  if (m == 0.0) return 0.0;
  const int k = community.empty() ? 0 : *std::max_element(community.begin(), community.end()) + 1;
  std::vector<double> internal(k, 0.0), degree_sum(k, 0.0);
  for (auto [u, v] : g.edges())
    if (community[u] == community[v]) internal[community[u]] += 1.0;
  for (NodeId v = 0; v < g.num_nodes(); ++v) degree_sum[community[v]] += g.degree(v);
  double q = 0.0;
  for (int c = 0; c < k; ++c) {
    const double share = degree_sum[c] / (2.0 * m);
    q += internal[c] / m - share * share;
  }
  return q;
}

// ---------------------------------------------------------------------------
// nPSO

namespace {

double hyperbolic_distance(double r1, double theta1, double r2, double theta2) {
  double dtheta = std::abs(theta1 - theta2);
  dtheta = std::min(dtheta, 2.0 * std::numbers::pi - dtheta);
  const double s = std::sin(0.5 * dtheta);
  // cosh d = cosh(r1 - r2) + 2 sinh r1 sinh r2 sin^2(dtheta / 2), which avoids
  // the cancellation of the textbook form for nearby angles.
  const double x = std::cosh(r1 - r2) + 2.0 * std::sinh(r1) * std::sinh(r2) * s * s;
  return std::acosh(std::max(1.0, x));
}

}  // namespace

NpsoGraph gen_npso_embedded(const NpsoParams& p, std::uint64_t seed) {
  if (p.m < 1 || p.m >= p.n) throw ArgumentError("nPSO needs n > m >= 1");
  if (!(p.gamma > 2.0)) throw ArgumentError("nPSO needs gamma > 2");
  if (!(p.temperature >= 0.0)) throw ArgumentError("nPSO needs temperature >= 0");
  if (p.communities < 1) throw ArgumentError("nPSO needs at least one community");
  if (p.communities > p.n) throw ArgumentError("nPSO community count exceeds n");
  if (!(p.kappa >= 0.0)) throw ArgumentError("nPSO needs kappa >= 0");

  Rng rng(seed);
  const auto n = static_cast<std::size_t>(p.n);
  const double two_pi = 2.0 * std::numbers::pi;
  const double beta = 1.0 / (p.gamma - 1.0);

  NpsoGraph out;
  out.angle.resize(n);
  out.component.resize(n);
  for (std::size_t v = 0; v < n; ++v) {
    const int c = static_cast<int>(rng.below(static_cast<std::uint64_t>(p.communities)));
    double theta = two_pi * c / p.communities + p.kappa * rng.normal();
    theta = std::fmod(theta, two_pi);
    if (theta < 0.0) theta += two_pi;
    out.component[v] = c;
    out.angle[v] = theta;
  }

  std::vector<Edge> edges;
  std::vector<double> dist, weight;
  std::vector<NodeId> idx;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i + 1);
    const double r_new = 2.0 * std::log(t);
    if (static_cast<int>(i) <= p.m) {
      // The first m nodes form a clique; node m has exactly m predecessors.
      for (std::size_t s = 0; s < i; ++s) edges.emplace_back(static_cast<NodeId>(s), static_cast<NodeId>(i));
      continue;
    }
    dist.resize(i);
    for (std::size_t s = 0; s < i; ++s) {
      const double r_s = beta * 2.0 * std::log(static_cast<double>(s + 1)) + (1.0 - beta) * r_new;
      dist[s] = hyperbolic_distance(r_s, out.angle[s], r_new, out.angle[i]);
    }
    if (p.temperature == 0.0) {
      idx.resize(i);
      std::iota(idx.begin(), idx.end(), 0);
      std::partial_sort(idx.begin(), idx.begin() + p.m, idx.end(), [&](NodeId a, NodeId b) {
        return dist[a] != dist[b] ? dist[a] < dist[b] : a < b;
      });
      for (int k = 0; k < p.m; ++k) edges.emplace_back(idx[k], static_cast<NodeId>(i));
      continue;
    }
    // Fermi-Dirac link probabilities; the cutoff radius is tuned by bisection
    // so the expected number of links equals m.
    const double two_t = 2.0 * p.temperature;
    auto expected = [&](double cutoff) {
      double sum = 0.0;
      for (double d : dist) sum += 1.0 / (1.0 + std::exp((d - cutoff) / two_t));
      return sum;
    };
    const auto [dmin, dmax] = std::minmax_element(dist.begin(), dist.end());
    double lo = *dmin - 80.0 * two_t, hi = *dmax + 80.0 * two_t;
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (lo + hi);
      (expected(mid) < p.m ? lo : hi) = mid;
    }
    const double cutoff = 0.5 * (lo + hi);
    weight.resize(i);
    double total = 0.0;
    for (std::size_t s = 0; s < i; ++s) {
      weight[s] = 1.0 / (1.0 + std::exp((dist[s] - cutoff) / two_t));
      total += weight[s];
    }
    // m draws without replacement, proportional to the link probabilities.
    for (int k = 0; k < p.m; ++k) {
      double u = rng.uniform() * total;
      std::size_t chosen = i;
      for (std::size_t s = 0; s < i; ++s) {
        if (weight[s] <= 0.0) continue;
        chosen = s;
        u -= weight[s];
        if (u < 0.0) break;
      }
      edges.emplace_back(static_cast<NodeId>(chosen), static_cast<NodeId>(i));
      total -= weight[chosen];
      weight[chosen] = 0.0;
      if (total <= 0.0) {
        // Remaining weights underflowed; recompute from scratch.
        total = 0.0;
        for (double w : weight) total += w;
      }
    }
  }

  out.radius.resize(n);
  const double r_final = 2.0 * std::log(static_cast<double>(n));
  for (std::size_t s = 0; s < n; ++s)
    out.radius[s] = beta * 2.0 * std::log(static_cast<double>(s + 1)) + (1.0 - beta) * r_final;
  out.graph = Graph::from_edges(p.n, std::move(edges));
  return out;
}

Graph gen_npso(const NpsoParams& params, std::uint64_t seed) {
  return gen_npso_embedded(params, seed).graph;
}

// ---------------------------------------------------------------------------

Graph rewire_preserving_degree(const Graph& g, double swaps_per_edge, std::uint64_t seed) {
  if (!(swaps_per_edge >= 0.0)) throw ArgumentError("swaps_per_edge must be >= 0");
  std::vector<Edge> edges = g.edges();
  const auto target = static_cast<std::uint64_t>(std::llround(swaps_per_edge * edges.size()));
  if (edges.size() < 2 || target == 0) return g;
  std::unordered_set<std::uint64_t> present;
  present.reserve(edges.size() * 2);
  for (auto [u, v] : edges) present.insert(edge_key(u, v));
  Rng rng(seed);
  std::uint64_t done = 0;
  const std::uint64_t max_attempts = 20 * target;
  for (std::uint64_t attempt = 0; attempt < max_attempts && done < target; ++attempt) {
    const std::size_t i = rng.below(edges.size());
    const std::size_t j = rng.below(edges.size());
    if (i == j) continue;
    auto [a, b] = edges[i];
    auto [c, d] = edges[j];
    if (rng.uniform() < 0.5) std::swap(c, d);
    // (a, b), (c, d) -> (a, d), (c, b)
    if (a == d || c == b) continue;
    if (present.contains(edge_key(a, d)) || present.contains(edge_key(c, b))) continue;
    present.erase(edge_key(a, b));
    present.erase(edge_key(c, d));
    present.insert(edge_key(a, d));
    present.insert(edge_key(c, b));
    edges[i] = {a, d};
    edges[j] = {c, b};
    ++done;
  }
  return Graph::from_edges(g.num_nodes(), std::move(edges));
}

// ---------------------------------------------------------------------------

std::string to_string(Family f) {
  switch (f) {
    case Family::ER: return "ER";
    case Family::BA: return "BA";
    case Family::SBM: return "SBM";
    case Family::LFR: return "LFR";
    case Family::NPSO: return "nPSO";
    case Family::REWIRE: return "REWIRE";
    case Family::ER_MATCH: return "ER_MATCH";
  }
  return "?";
}

Family family_from_string(const std::string& name) {
  std::string up;
  for (char c : name) up.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  if (up == "ER") return Family::ER;
  if (up == "BA") return Family::BA;
  if (up == "SBM") return Family::SBM;
  if (up == "LFR") return Family::LFR;
  if (up == "NPSO") return Family::NPSO;
  if (up == "REWIRE") return Family::REWIRE;
  if (up == "ER_MATCH") return Family::ER_MATCH;
  throw ArgumentError("unknown generator family '" + name + "'");
}

Family GeneratorSpec::family() const { return static_cast<Family>(params.index()); }

void validate(const GeneratorSpec& spec) {
  std::visit(
      [](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ErParams>) {
          if (p.n < 1) throw ArgumentError("ER needs n >= 1");
          check_probability(p.p, "ER edge probability");
        } else if constexpr (std::is_same_v<T, BaParams>) {
          if (p.m < 1 || p.m >= p.n) throw ArgumentError("BA needs 1 <= m < n");
        } else if constexpr (std::is_same_v<T, SbmParams>) {
          const std::size_t k = p.block_sizes.size();
          if (k == 0 || p.probs.size() != k) throw ArgumentError("SBM shape mismatch");
          for (std::size_t i = 0; i < k; ++i) {
            if (p.probs[i].size() != k) throw ArgumentError("SBM shape mismatch");
            for (std::size_t j = 0; j < k; ++j) {
              check_probability(p.probs[i][j], "SBM block probability");
              if (p.probs[i][j] != p.probs[j][i]) throw ArgumentError("SBM matrix asymmetric");
            }
          }
        } else if constexpr (std::is_same_v<T, LfrParams>) {
          if (!(p.tau1 > 1.0 && p.tau2 > 1.0)) throw ArgumentError("LFR exponents must exceed 1");
          check_probability(p.mu, "LFR mixing parameter");
          if (!(p.avg_deg >= 1.0) || p.avg_deg > p.max_deg || p.max_deg >= p.n)
            throw ArgumentError("LFR needs 1 <= avg_deg <= max_deg < n");
          if (p.min_comm < 1 || p.min_comm > p.max_comm || p.max_comm > p.n)
            throw ArgumentError("LFR community bounds infeasible");
        } else if constexpr (std::is_same_v<T, NpsoParams>) {
          if (p.m < 1 || p.m >= p.n) throw ArgumentError("nPSO needs n > m >= 1");
          if (!(p.gamma > 2.0)) throw ArgumentError("nPSO needs gamma > 2");
          if (!(p.temperature >= 0.0)) throw ArgumentError("nPSO needs temperature >= 0");
          if (p.communities < 1 || p.communities > p.n)
            throw ArgumentError("nPSO community count must lie in [1, n]");
        } else if constexpr (std::is_same_v<T, RewireParams>) {
          if (!(p.swaps_per_edge >= 0.0)) throw ArgumentError("swaps_per_edge must be >= 0");
        } else if constexpr (std::is_same_v<T, ErMatchParams>) {
          if (p.n < 1) throw ArgumentError("G(n, M) needs n >= 1");
        }
      },
      spec.params);
}

Graph generate(const GeneratorSpec& spec) {
  validate(spec);
  return std::visit(
      [&](const auto& p) -> Graph {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ErParams>) return gen_er(p.n, p.p, spec.seed);
        else if constexpr (std::is_same_v<T, BaParams>) return gen_ba(p.n, p.m, spec.seed);
        else if constexpr (std::is_same_v<T, SbmParams>) return gen_sbm(p.block_sizes, p.probs, spec.seed);
        else if constexpr (std::is_same_v<T, LfrParams>) return gen_lfr(p, spec.seed);
        else if constexpr (std::is_same_v<T, NpsoParams>) return gen_npso(p, spec.seed);
        else if constexpr (std::is_same_v<T, RewireParams>)
          return rewire_preserving_degree(p.source, p.swaps_per_edge, spec.seed);
        else return gen_er_match(p.n, p.edges, spec.seed);
      },
      spec.params);
}

std::string describe(const GeneratorSpec& spec) {
  std::ostringstream out;
  out.precision(17);
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ErParams>) {
          out << "n=" << p.n << ";p=" << p.p;
        } else if constexpr (std::is_same_v<T, BaParams>) {
          out << "n=" << p.n << ";m=" << p.m;
        } else if constexpr (std::is_same_v<T, SbmParams>) {
          out << "sizes=";
          for (std::size_t i = 0; i < p.block_sizes.size(); ++i)
            out << (i ? "/" : "") << p.block_sizes[i];
          out << ";P=";
          for (std::size_t i = 0; i < p.probs.size(); ++i)
            for (std::size_t j = 0; j < p.probs[i].size(); ++j)
              out << (i + j ? "/" : "") << p.probs[i][j];
        } else if constexpr (std::is_same_v<T, LfrParams>) {
          out << "n=" << p.n << ";tau1=" << p.tau1 << ";tau2=" << p.tau2 << ";mu=" << p.mu
              << ";avg_deg=" << p.avg_deg << ";max_deg=" << p.max_deg
              << ";min_comm=" << p.min_comm << ";max_comm=" << p.max_comm;
        } else if constexpr (std::is_same_v<T, NpsoParams>) {
          out << "n=" << p.n << ";m=" << p.m << ";gamma=" << p.gamma << ";T=" << p.temperature
              << ";C=" << p.communities << ";kappa=" << p.kappa;
        } else if constexpr (std::is_same_v<T, RewireParams>) {
          out << "n=" << p.source.num_nodes() << ";swaps_per_edge=" << p.swaps_per_edge;
        } else {
          out << "n=" << p.n << ";edges=" << p.edges;
        }
      },
      spec.params);
  return to_string(spec.family()) + ":" + out.str();
}

}  // namespace rgm
