#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "rgm/graph.hpp"

namespace rgm {

Graph gen_er(int n, double p, std::uint64_t seed);

// Preferential attachment. The seed graph is a path on the first m nodes;
// every later node attaches to m distinct earlier nodes with probability
// proportional to degree. |E| = (m - 1) + m (n - m).
Graph gen_ba(int n, int m, std::uint64_t seed);

// `probs` is K x K, symmetric, entries in [0, 1]; nodes are assigned to blocks
// in order (block 0 gets ids 0..sizes[0]-1, ...).
Graph gen_sbm(const std::vector<int>& block_sizes,
              const std::vector<std::vector<double>>& probs, std::uint64_t seed);

struct LfrParams {
  int n = 1000;
  double tau1 = 2.5;  // degree exponent
  double tau2 = 1.5;  // community-size exponent
  double mu = 0.2;    // mixing
  double avg_deg = 15.0;
  int max_deg = 50;
  int min_comm = 20;
  int max_comm = 100;
};

struct LfrGraph {
  Graph graph;
  std::vector<int> community;  // planted community per node
};

// Stub-matching LFR variant: power-law degrees and community sizes, each
// node's stubs split into intra- and inter-community parts by mu, matched
// separately and repaired by random swaps. Throws GenerationError when the
// community assignment stays infeasible after bounded retries.
LfrGraph gen_lfr_planted(const LfrParams& params, std::uint64_t seed);
Graph gen_lfr(const LfrParams& params, std::uint64_t seed);

// Mean over nodes with degree > 0 of the fraction of incident edges leaving
// the node's community.
double realized_mixing(const Graph& g, const std::vector<int>& community);

// Newman modularity of a fixed partition.
double modularity(const Graph& g, const std::vector<int>& community);

struct NpsoParams {
  int n = 1000;
  int m = 8;            // links per new node
  double gamma = 2.5;   // target power-law exponent
  double temperature = 0.1;
  int communities = 8;  // Gaussian mixture components
  double kappa = 0.15;  // angular standard deviation (radians)
};

struct NpsoGraph {
  Graph graph;
  std::vector<double> radius;  // final radial coordinates
  std::vector<double> angle;
  std::vector<int> component;  // mixture component that placed each node
};

// Non-uniform popularity-similarity growth on the hyperbolic disk. Nodes
// 0..m-1 form a clique; every later node links to exactly m earlier nodes.
NpsoGraph gen_npso_embedded(const NpsoParams& params, std::uint64_t seed);
Graph gen_npso(const NpsoParams& params, std::uint64_t seed);

// Double-edge-swap randomization; performs round(swaps_per_edge * |E|)
// accepted swaps (attempts are capped at 20x that). Degrees are preserved.
Graph rewire_preserving_degree(const Graph& g, double swaps_per_edge, std::uint64_t seed);

// Edge-count-matched G(n, M): exactly `edges` distinct pairs, uniformly.
Graph gen_er_match(int n, std::size_t edges, std::uint64_t seed);

enum class Family { ER, BA, SBM, LFR, NPSO, REWIRE, ER_MATCH };

std::string to_string(Family f);
Family family_from_string(const std::string& name);

struct ErParams {
  int n = 0;
  double p = 0.0;
};
struct BaParams {
  int n = 0;
  int m = 1;
};
struct SbmParams {
  std::vector<int> block_sizes;
  std::vector<std::vector<double>> probs;
};
struct RewireParams {
  Graph source;
  double swaps_per_edge = 10.0;
};
struct ErMatchParams {
  int n = 0;
  std::size_t edges = 0;
};

using GeneratorParams =
    std::variant<ErParams, BaParams, SbmParams, LfrParams, NpsoParams, RewireParams, ErMatchParams>;

struct GeneratorSpec {
  GeneratorParams params;
  std::uint64_t seed = 0;

  Family family() const;
};

// Throws ArgumentError when the parameters are invalid for their family.
void validate(const GeneratorSpec& spec);
Graph generate(const GeneratorSpec& spec);

// Compact "key=value;..." rendering of the parameters, for manifests.
std::string describe(const GeneratorSpec& spec);

}  // namespace rgm
