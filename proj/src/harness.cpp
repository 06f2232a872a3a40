#include "rgm/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "rgm/format.hpp"
#include "rgm/parallel.hpp"
#include "rgm/random.hpp"
#include "rgm/report.hpp"

namespace rgm {

namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string join(const std::vector<std::string>& items, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? sep : "") + items[i];
  return out;
}

std::string row_name(std::size_t row) { return "manifest row " + std::to_string(row); }

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LoadError("cannot write " + path.string());
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Manifests

Manifest read_manifest(std::istream& in, const std::string& base_dir) {
  Manifest m;
  m.base_dir = base_dir;
  std::string line;
  std::size_t row = 0;
  bool has_meta = false;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (row == 1) {
      const std::string header = trim(line);
      if (header == "path,class,meta") {
        has_meta = true;
      } else if (header != "path,class") {
        throw LoadError(row_name(row) + ": expected header 'path,class[,meta]', got '" + header + "'");
      }
      continue;
    }
    if (trim(line).empty()) continue;
    const auto c1 = line.find(',');
    if (c1 == std::string::npos) throw LoadError(row_name(row) + ": expected at least 2 fields");
    const auto c2 = line.find(',', c1 + 1);
    ManifestRecord r;
    r.path = trim(line.substr(0, c1));
    r.cls = trim(line.substr(c1 + 1, c2 == std::string::npos ? std::string::npos : c2 - c1 - 1));
    if (c2 != std::string::npos) {
      if (!has_meta) throw LoadError(row_name(row) + ": extra field without a meta column");
      r.meta = trim(line.substr(c2 + 1));
    }
    if (r.path.empty()) throw LoadError(row_name(row) + ": empty path");
    if (r.cls.empty()) throw LoadError(row_name(row) + ": empty class label");
    if (!seen.insert(r.path).second) throw LoadError(row_name(row) + ": duplicate path " + r.path);
    m.records.push_back(std::move(r));
  }
  if (row == 0) throw LoadError("manifest is empty");
  return m;
}

Manifest read_manifest_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open manifest " + path);
  auto dir = fs::path(path).parent_path();
  if (dir.empty()) dir = ".";
  try {
    return read_manifest(in, dir.string());
  } catch (const LoadError& e) {
    throw LoadError(path + ": " + e.what());
  }
}

void write_manifest(const Manifest& m, std::ostream& out) {
  out << "path,class,meta\n";
  for (const auto& r : m.records) out << r.path << ',' << r.cls << ',' << r.meta << '\n';
}

std::string resolve_path(const Manifest& m, const ManifestRecord& r) {
  const fs::path p(r.path);
  if (p.is_absolute()) return p.string();
  return (fs::path(m.base_dir) / p).string();
}

Corpus make_corpus(Manifest manifest, std::vector<Graph> graphs) {
  if (graphs.size() != manifest.records.size()) throw ArgumentError("one graph per manifest record");
  Corpus c;
  std::set<std::string> names;
  for (const auto& r : manifest.records) names.insert(r.cls);
  c.classes.assign(names.begin(), names.end());
  for (const auto& r : manifest.records) {
    c.labels.push_back(static_cast<int>(
        std::lower_bound(c.classes.begin(), c.classes.end(), r.cls) - c.classes.begin()));
  }
  c.manifest = std::move(manifest);
  c.graphs = std::move(graphs);
  return c;
}

Corpus load_manifest(const std::string& path, int threads) {
  Manifest m = read_manifest_file(path);
  std::vector<Graph> graphs(m.records.size());
  parallel_for(
      m.records.size(),
      [&](std::size_t i) {
        try {
          graphs[i] = read_edge_list_file(resolve_path(m, m.records[i])).graph;
        } catch (const Error& e) {
          throw LoadError(path + ": " + row_name(i + 2) + " (" + m.records[i].path + "): " + e.what());
        }
      },
      threads);
  return make_corpus(std::move(m), std::move(graphs));
}

std::vector<ClassStats> class_stats(const Corpus& c) {
  std::vector<ClassStats> stats(c.classes.size());
  for (std::size_t k = 0; k < c.classes.size(); ++k) stats[k].cls = c.classes[k];
  for (std::size_t i = 0; i < c.graphs.size(); ++i) {
    auto& s = stats[c.labels[i]];
    const int n = c.graphs[i].num_nodes();
    const std::size_t m = c.graphs[i].num_edges();
    if (s.count == 0) {
      s.min_nodes = s.max_nodes = n;
      s.min_edges = s.max_edges = m;
    }
    s.min_nodes = std::min(s.min_nodes, n);
    s.max_nodes = std::max(s.max_nodes, n);
    s.min_edges = std::min(s.min_edges, m);
    s.max_edges = std::max(s.max_edges, m);
    ++s.count;
  }
  return stats;
}

void write_class_stats_csv(const std::vector<ClassStats>& stats, std::ostream& out) {
  out << "class,count,min_nodes,max_nodes,min_edges,max_edges\n";
  for (const auto& s : stats) {
    out << s.cls << ',' << s.count << ',' << s.min_nodes << ',' << s.max_nodes << ','
        << s.min_edges << ',' << s.max_edges << '\n';
  }
}

// ---------------------------------------------------------------------------
// Splits

namespace {

void part_sizes(std::size_t n, const SplitSpec& spec, bool at_least_one, std::size_t& tr,
                std::size_t& va, std::size_t& te) {
  auto t = static_cast<long long>(std::llround(static_cast<double>(n) * spec.train));
  auto v = static_cast<long long>(std::llround(static_cast<double>(n) * spec.val));
  const auto total = static_cast<long long>(n);
  if (at_least_one) {
    v = std::clamp(v, 1LL, total - 2);
    t = std::clamp(t, 1LL, total - 1 - v);
  } else if (t + v > total) {
    t = total - v;
  }
  const long long rest = total - t - v;
  tr = static_cast<std::size_t>(t);
  va = static_cast<std::size_t>(v);
  te = static_cast<std::size_t>(rest);
}

}  // namespace

Split split(const std::vector<std::string>& labels, const SplitSpec& spec) {
  const double fracs[] = {spec.train, spec.val, spec.test};
  for (double f : fracs) {
    if (!(f > 0.0)) throw ArgumentError("split fractions must be positive");
  }
  if (std::abs(spec.train + spec.val + spec.test - 1.0) > 1e-9) {
    throw ArgumentError("split fractions must sum to 1");
  }
  std::map<std::string, std::vector<std::size_t>> groups;
  if (spec.stratified) {
    for (std::size_t i = 0; i < labels.size(); ++i) groups[labels[i]].push_back(i);
    for (const auto& [cls, members] : groups) {
      if (members.size() < 3) {
        throw SplitError("class '" + cls + "' has " + std::to_string(members.size()) +
                         " graphs; a stratified split needs at least 3");
      }
    }
  } else {
    auto& all = groups[""];
    for (std::size_t i = 0; i < labels.size(); ++i) all.push_back(i);
  }
  Split out;
  for (auto& [cls, members] : groups) {
    Rng rng(derive_seed(spec.seed, "split:" + cls));
    rng.shuffle(members);
    std::size_t tr = 0, va = 0, te = 0;
    part_sizes(members.size(), spec, spec.stratified, tr, va, te);
    out.train.insert(out.train.end(), members.begin(), members.begin() + tr);
    out.val.insert(out.val.end(), members.begin() + tr, members.begin() + tr + va);
    out.test.insert(out.test.end(), members.begin() + tr + va, members.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.val.begin(), out.val.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

// ---------------------------------------------------------------------------
// Presets

GeneratorSpec preset_spec(const std::string& cls, int nodes, std::uint64_t seed) {
  if (nodes < 8) throw ArgumentError("presets need at least 8 nodes");
  Rng rng(derive_seed(seed, "preset"));
  GeneratorSpec spec;
  spec.seed = derive_seed(seed, "graph");
  const double n = nodes;
  // Mean-degree ranges are kept at their n = 1000 values and capped for small n.
  auto cap_degree = [&](double d) { return std::min(d, (n - 1.0) / 3.0); };
  if (cls == "ER") {
    const auto lo = static_cast<int>(std::ceil(0.996 * n));
    const int size = static_cast<int>(rng.integer(lo, nodes));
    const double degree = cap_degree(rng.uniform(16.0, 20.0));
    spec.params = ErParams{size, degree / (size - 1.0)};
  } else if (cls == "BA") {
    const int m = static_cast<int>(rng.integer(10, 16));
    spec.params = BaParams{nodes, std::max(1, std::min(m, (nodes - 1) / 6))};
  } else if (cls == "LFR") {
    LfrParams p;
    p.n = nodes;
    p.tau1 = rng.uniform(2.0, 3.0);
    p.tau2 = rng.uniform(1.1, 2.0);
    p.mu = rng.uniform(0.1, 0.4);
    p.avg_deg = cap_degree(rng.uniform(12.0, 30.0));
    p.max_comm = std::min(100, nodes);
    p.min_comm = std::min(20, std::max(1, nodes / 5));
    p.max_deg = std::min({static_cast<int>(std::lround(3.0 * p.avg_deg)), nodes - 1,
                          static_cast<int>(p.max_comm / (1.0 - p.mu)) - 1});
    p.max_deg = std::max(p.max_deg, static_cast<int>(std::ceil(p.avg_deg)));
    spec.params = p;
  } else if (cls == "NPSO") {
    NpsoParams p;
    p.n = nodes;
    p.m = std::max(1, std::min(static_cast<int>(rng.integer(14, 17)), (nodes - 1) / 6));
    p.gamma = rng.uniform(2.1, 3.0);
    p.temperature = rng.uniform(0.1, 0.5);
    p.communities = static_cast<int>(rng.integer(3, 8));
    p.kappa = rng.uniform(0.1, 0.3);
    spec.params = p;
  } else if (cls == "SBM") {
    const int k = static_cast<int>(rng.integer(2, 5));
    const double degree = cap_degree(rng.uniform(28.0, 35.0));
    const double within = rng.uniform(0.6, 0.9);
    SbmParams p;
    for (int b = 0; b < k; ++b) p.block_sizes.push_back(nodes / k + (b < nodes % k ? 1 : 0));
    const double block = n / k;
    const double p_in = std::min(1.0, within * degree / (block - 1.0));
    const double p_out = std::min(1.0, (1.0 - within) * degree / (n - block));
    p.probs.assign(k, std::vector<double>(k, p_out));
    for (int b = 0; b < k; ++b) p.probs[b][b] = p_in;
    spec.params = p;
  } else {
    throw ArgumentError("unknown preset class '" + cls + "'");
  }
  return spec;
}

Graph generate_preset(const std::string& cls, int nodes, std::uint64_t seed, GeneratorSpec* used) {
  constexpr int kRedraws = 20;
  std::string last;
  for (int attempt = 0; attempt < kRedraws; ++attempt) {
    const auto spec = preset_spec(cls, nodes, attempt == 0 ? seed : derive_seed(seed, "redraw", attempt));
    try {
      Graph g = generate(spec);
      if (used) *used = spec;
      return g;
    } catch (const GenerationError& e) {
      last = e.what();
    }
  }
  throw GenerationError(cls + " preset failed after " + std::to_string(kRedraws) + " draws: " + last);
}

Corpus generate_corpus(const std::vector<std::string>& classes, int per_class, int nodes,
                       std::uint64_t seed, int threads) {
  if (per_class < 1) throw ArgumentError("graphs_per_class must be positive");
  const std::size_t total = classes.size() * static_cast<std::size_t>(per_class);
  std::vector<Graph> graphs(total);
  std::vector<GeneratorSpec> specs(total);
  parallel_for(
      total,
      [&](std::size_t i) {
        const auto& cls = classes[i / per_class];
        graphs[i] = generate_preset(cls, nodes, derive_seed(seed, "corpus:" + cls, i % per_class), &specs[i]);
      },
      threads);
  Manifest m;
  m.base_dir = ".";
  for (std::size_t i = 0; i < total; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "%04zu.edges", i % per_class);
    const auto& cls = classes[i / per_class];
    m.records.push_back({cls + "/" + name, cls, describe(specs[i]) + ";seed=" + std::to_string(specs[i].seed)});
  }
  return make_corpus(std::move(m), std::move(graphs));
}

void write_corpus(const Corpus& c, const std::string& dir) {
  fs::create_directories(dir);
  for (std::size_t i = 0; i < c.graphs.size(); ++i) {
    const fs::path p = fs::path(dir) / c.manifest.records[i].path;
    fs::create_directories(p.parent_path());
    write_edge_list_file(c.graphs[i], p.string());
  }
  auto out = open_out(fs::path(dir) / "manifest.csv");
  write_manifest(c.manifest, out);
}

// ---------------------------------------------------------------------------
// Config

Config Config::parse(std::istream& in) {
  Config c;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw FormatError("config line " + std::to_string(number) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw FormatError("config line " + std::to_string(number) + ": empty key");
    if (c.has(key)) throw FormatError("config line " + std::to_string(number) + ": repeated key " + key);
    c.set(key, trim(line.substr(eq + 1)));
  }
  return c;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open config " + path);
  try {
    return parse(in);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

std::string Config::get(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double Config::get_real(const std::string& key, double fallback) const {
  if (!has(key)) return fallback;
  const std::string& v = values_.at(key);
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used == v.size()) return x;
  } catch (const std::exception&) {
  }
  throw ArgumentError("config key " + key + ": expected a number, got '" + v + "'");
}

std::int64_t Config::get_int(const std::string& key, std::int64_t fallback) const {
  if (!has(key)) return fallback;
  const std::string& v = values_.at(key);
  try {
    std::size_t used = 0;
    const long long x = std::stoll(v, &used);
    if (used == v.size()) return x;
  } catch (const std::exception&) {
  }
  throw ArgumentError("config key " + key + ": expected an integer, got '" + v + "'");
}

std::uint64_t Config::get_seed(const std::string& key, std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  const std::string& v = values_.at(key);
  try {
    std::size_t used = 0;
    const unsigned long long x = std::stoull(v, &used);
    if (used == v.size() && v.front() != '-') return x;
  } catch (const std::exception&) {
  }
  throw ArgumentError("config key " + key + ": expected an unsigned integer, got '" + v + "'");
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string& v = values_.at(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ArgumentError("config key " + key + ": expected true or false, got '" + v + "'");
}

std::vector<std::string> Config::get_list(const std::string& key,
                                          const std::vector<std::string>& fallback) const {
  if (!has(key)) return fallback;
  return split_list(values_.at(key), ',');
}

namespace {

const std::vector<std::string> kKernelMetrics = {"degree", "clustering", "orbits", "spectral", "nspdk"};

KernelSpec& kernel_of(MmdConfig& m, const std::string& metric) {
  if (metric == "degree") return m.degree;
  if (metric == "clustering") return m.clustering;
  if (metric == "orbits") return m.orbits;
  if (metric == "spectral") return m.spectral;
  return m.nspdk;
}

std::set<std::string> known_keys(const std::vector<std::string>& subjects) {
  std::set<std::string> keys = {
      "out", "seed", "threads", "manifest", "classes", "graphs_per_class", "nodes", "write_corpus",
      "features.scaling", "split.train", "split.val", "split.test", "split.stratified",
      "model.hidden", "model.heads", "model.layers", "model.fc_hidden", "model.pooling",
      "train.lr", "train.weight_decay", "train.beta1", "train.beta2", "train.eps", "train.margin",
      "train.max_epochs", "train.patience", "train.min_delta", "train.triplets_per_epoch",
      "train.batch_size", "train.val_triplets", "mmd.metrics", "mmd.degree_max_bin",
      "mmd.clustering_bins", "mmd.spectral_bins", "mmd.orbit_max_size", "mmd.nspdk_r_max",
      "mmd.nspdk_d_max", "mmd.spectral_max_nodes", "subjects"};
  for (const auto& m : kKernelMetrics) {
    keys.insert("mmd." + m + ".kernel");
    keys.insert("mmd." + m + ".sigma");
  }
  for (const auto& s : subjects) {
    for (const char* f : {"kind", "class", "count", "swaps_per_edge", "manifest"}) {
      keys.insert("subject." + s + "." + f);
    }
  }
  return keys;
}

int as_int(std::int64_t v, const std::string& key) {
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    throw ArgumentError("config key " + key + " is out of range");
  }
  return static_cast<int>(v);
}

}  // namespace

ExperimentConfig experiment_config(const Config& c) {
  ExperimentConfig cfg;
  const auto subject_names = c.get_list("subjects", {});
  const auto keys = known_keys(subject_names);
  for (const auto& [key, value] : c.values()) {
    if (!keys.count(key)) throw ArgumentError("unknown config key '" + key + "'");
  }
  auto get_int = [&](const std::string& key, int fallback) { return as_int(c.get_int(key, fallback), key); };

  cfg.out_dir = c.get("out", cfg.out_dir);
  cfg.seed = c.get_seed("seed", cfg.seed);
  cfg.threads = get_int("threads", cfg.threads);
  cfg.manifest = c.get("manifest", cfg.manifest);
  cfg.classes = c.get_list("classes", cfg.classes);
  cfg.graphs_per_class = get_int("graphs_per_class", cfg.graphs_per_class);
  cfg.nodes = get_int("nodes", cfg.nodes);
  cfg.write_corpus = c.get_bool("write_corpus", cfg.write_corpus);
  cfg.scaling = scaling_from_string(c.get("features.scaling", to_string(cfg.scaling)));

  cfg.split.train = c.get_real("split.train", cfg.split.train);
  cfg.split.val = c.get_real("split.val", cfg.split.val);
  cfg.split.test = c.get_real("split.test", cfg.split.test);
  cfg.split.stratified = c.get_bool("split.stratified", cfg.split.stratified);

  cfg.arch.hidden = get_int("model.hidden", cfg.arch.hidden);
  cfg.arch.heads = get_int("model.heads", cfg.arch.heads);
  cfg.arch.layers = get_int("model.layers", cfg.arch.layers);
  cfg.arch.fc_hidden = get_int("model.fc_hidden", cfg.arch.fc_hidden);
  cfg.arch.pooling = pooling_from_string(c.get("model.pooling", to_string(cfg.arch.pooling)));

  auto& t = cfg.train;
  t.optimizer.lr = c.get_real("train.lr", t.optimizer.lr);
  t.optimizer.weight_decay = c.get_real("train.weight_decay", t.optimizer.weight_decay);
  t.optimizer.beta1 = c.get_real("train.beta1", t.optimizer.beta1);
  t.optimizer.beta2 = c.get_real("train.beta2", t.optimizer.beta2);
  t.optimizer.eps = c.get_real("train.eps", t.optimizer.eps);
  t.margin = c.get_real("train.margin", t.margin);
  t.max_epochs = get_int("train.max_epochs", t.max_epochs);
  t.patience = get_int("train.patience", t.patience);
  t.min_delta = c.get_real("train.min_delta", t.min_delta);
  t.triplets_per_epoch = get_int("train.triplets_per_epoch", t.triplets_per_epoch);
  t.batch_size = get_int("train.batch_size", t.batch_size);
  t.val_triplets = get_int("train.val_triplets", t.val_triplets);

  auto& m = cfg.mmd;
  m.metrics = c.get_list("mmd.metrics", m.metrics);
  for (const auto& metric : m.metrics) {
    if (std::find(kMmdMetrics.begin(), kMmdMetrics.end(), metric) == kMmdMetrics.end()) {
      throw ArgumentError("config key mmd.metrics: unknown metric '" + metric + "'");
    }
  }
  for (const auto& metric : kKernelMetrics) {
    auto& k = kernel_of(m, metric);
    k.kind = kernel_from_string(c.get("mmd." + metric + ".kernel", to_string(k.kind)));
    k.sigma = c.get_real("mmd." + metric + ".sigma", k.sigma);
  }
  m.degree_max_bin = get_int("mmd.degree_max_bin", m.degree_max_bin);
  m.clustering_bins = get_int("mmd.clustering_bins", m.clustering_bins);
  m.spectral_bins = get_int("mmd.spectral_bins", m.spectral_bins);
  m.orbit_max_size = get_int("mmd.orbit_max_size", m.orbit_max_size);
  m.nspdk_r_max = get_int("mmd.nspdk_r_max", m.nspdk_r_max);
  m.nspdk_d_max = get_int("mmd.nspdk_d_max", m.nspdk_d_max);
  m.spectral_max_nodes = get_int("mmd.spectral_max_nodes", m.spectral_max_nodes);

  std::set<std::string> seen;
  for (const auto& name : subject_names) {
    if (!seen.insert(name).second) throw ArgumentError("subject '" + name + "' listed twice");
    SubjectConfig s;
    s.name = name;
    const std::string prefix = "subject." + name + ".";
    s.kind = c.get(prefix + "kind", s.kind);
    s.cls = c.get(prefix + "class", s.cls);
    s.count = get_int(prefix + "count", s.count);
    s.swaps_per_edge = c.get_real(prefix + "swaps_per_edge", s.swaps_per_edge);
    s.manifest = c.get(prefix + "manifest", s.manifest);
    if (s.kind != "rewire" && s.kind != "sample" && s.kind != "manifest") {
      throw ArgumentError("subject " + name + ": kind must be rewire, sample or manifest");
    }
    if (s.cls.empty()) throw ArgumentError("subject " + name + ": class is required");
    if (s.kind == "manifest" && s.manifest.empty()) {
      throw ArgumentError("subject " + name + ": manifest is required");
    }
    if (s.kind != "manifest" && s.count < 1) throw ArgumentError("subject " + name + ": count must be positive");
    cfg.subjects.push_back(s);
  }
  if (cfg.manifest.empty() && cfg.classes.empty()) throw ArgumentError("no classes configured");
  return cfg;
}

std::string config_text(const ExperimentConfig& cfg) {
  Config c;
  c.set("out", cfg.out_dir);
  c.set("seed", std::to_string(cfg.seed));
  c.set("threads", std::to_string(cfg.threads));
  c.set("manifest", cfg.manifest);
  c.set("classes", join(cfg.classes, ","));
  c.set("graphs_per_class", std::to_string(cfg.graphs_per_class));
  c.set("nodes", std::to_string(cfg.nodes));
  c.set("write_corpus", cfg.write_corpus ? "true" : "false");
  c.set("features.scaling", to_string(cfg.scaling));
  c.set("split.train", format_real(cfg.split.train));
  c.set("split.val", format_real(cfg.split.val));
  c.set("split.test", format_real(cfg.split.test));
  c.set("split.stratified", cfg.split.stratified ? "true" : "false");
  c.set("model.hidden", std::to_string(cfg.arch.hidden));
  c.set("model.heads", std::to_string(cfg.arch.heads));
  c.set("model.layers", std::to_string(cfg.arch.layers));
  c.set("model.fc_hidden", std::to_string(cfg.arch.fc_hidden));
  c.set("model.pooling", to_string(cfg.arch.pooling));
  const auto& t = cfg.train;
  c.set("train.lr", format_real(t.optimizer.lr));
  c.set("train.weight_decay", format_real(t.optimizer.weight_decay));
  c.set("train.beta1", format_real(t.optimizer.beta1));
  c.set("train.beta2", format_real(t.optimizer.beta2));
  c.set("train.eps", format_real(t.optimizer.eps));
  c.set("train.margin", format_real(t.margin));
  c.set("train.max_epochs", std::to_string(t.max_epochs));
  c.set("train.patience", std::to_string(t.patience));
  c.set("train.min_delta", format_real(t.min_delta));
  c.set("train.triplets_per_epoch", std::to_string(t.triplets_per_epoch));
  c.set("train.batch_size", std::to_string(t.batch_size));
  c.set("train.val_triplets", std::to_string(t.val_triplets));
  auto m = cfg.mmd;
  c.set("mmd.metrics", join(m.metrics, ","));
  for (const auto& metric : kKernelMetrics) {
    c.set("mmd." + metric + ".kernel", to_string(kernel_of(m, metric).kind));
    c.set("mmd." + metric + ".sigma", format_real(kernel_of(m, metric).sigma));
  }
  c.set("mmd.degree_max_bin", std::to_string(m.degree_max_bin));
  c.set("mmd.clustering_bins", std::to_string(m.clustering_bins));
  c.set("mmd.spectral_bins", std::to_string(m.spectral_bins));
  c.set("mmd.orbit_max_size", std::to_string(m.orbit_max_size));
  c.set("mmd.nspdk_r_max", std::to_string(m.nspdk_r_max));
  c.set("mmd.nspdk_d_max", std::to_string(m.nspdk_d_max));
  c.set("mmd.spectral_max_nodes", std::to_string(m.spectral_max_nodes));
  std::vector<std::string> names;
  for (const auto& s : cfg.subjects) {
    names.push_back(s.name);
    const std::string prefix = "subject." + s.name + ".";
    c.set(prefix + "kind", s.kind);
    c.set(prefix + "class", s.cls);
    c.set(prefix + "count", std::to_string(s.count));
    c.set(prefix + "swaps_per_edge", format_real(s.swaps_per_edge));
    c.set(prefix + "manifest", s.manifest);
  }
  c.set("subjects", join(names, ","));
  std::string text;
  for (const auto& [key, value] : c.values()) text += key + " = " + value + "\n";
  return text;
}

std::string fnv1a_hex(const std::string& bytes) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash_label(bytes)));
  return buf;
}

std::string file_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return fnv1a_hex(buf.str());
}

// ---------------------------------------------------------------------------
// Pipeline pieces

std::vector<FeatureMatrix> featurize(const std::vector<Graph>& graphs, FeatureScaling scaling, int threads) {
  std::vector<FeatureMatrix> out(graphs.size());
  parallel_for(graphs.size(), [&](std::size_t i) { out[i] = node_features(graphs[i], scaling); }, threads);
  return out;
}

std::vector<std::vector<double>> embed_all(const std::vector<Graph>& graphs,
                                           const std::vector<FeatureMatrix>& features,
                                           const EmbedderParams& params, int threads) {
  if (graphs.size() != features.size()) throw ArgumentError("one feature matrix per graph");
  std::vector<std::vector<double>> out(graphs.size());
  parallel_for(graphs.size(), [&](std::size_t i) { out[i] = embed(graphs[i], features[i], params); }, threads);
  return out;
}

namespace {

std::string json_string(const std::string& s) { return nlohmann::json(s).dump(); }

}  // namespace

void write_mmd_json(const std::vector<std::pair<std::string, MmdReport>>& reports, std::ostream& out) {
  out << "{\n  \"subjects\": {";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& [name, r] = reports[i];
    out << (i ? "," : "") << "\n    " << json_string(name) << ": {\n";
    out << "      \"ref_size\": " << r.ref_size << ",\n";
    out << "      \"gen_size\": " << r.gen_size << ",\n";
    out << "      \"degree_max_bin\": " << r.degree_max_bin << ",\n";
    out << "      \"mmd\": {";
    std::size_t j = 0;
    for (const auto& metric : r.config.metrics) {
      out << (j++ ? "," : "") << "\n        " << json_string(metric) << ": "
          << format_real(r.values.at(metric));
    }
    out << "\n      }\n    }";
  }
  out << (reports.empty() ? "}\n}\n" : "\n  }\n}\n");
}

void write_mmd_csv(const std::vector<std::pair<std::string, MmdReport>>& reports, std::ostream& out) {
  out << "subject,metric,kernel,sigma,value\n";
  for (const auto& [name, r] : reports) {
    auto config = r.config;
    for (const auto& metric : r.config.metrics) {
      const auto& k = kernel_of(config, metric);
      out << name << ',' << metric << ',' << to_string(k.kind) << ',' << format_real(k.sigma) << ','
          << format_real(r.values.at(metric)) << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// run_experiment

namespace {

struct Subject {
  SubjectConfig config;
  int cls = 0;
  std::vector<Graph> ref;
  std::vector<Graph> gen;
  std::vector<std::string> sources;
  std::vector<FeatureMatrix> features;
  std::vector<std::vector<double>> embeddings;
};

class Run {
 public:
  explicit Run(const ExperimentConfig& cfg) : cfg_(cfg), dir_(cfg.out_dir) {}

  ExperimentResult execute() {
    fs::create_directories(dir_);
    fs::remove(dir_ / "FAILED");
    stage("corpus", [&] { corpus(); });
    stage("features", [&] { features(); });
    stage("train", [&] { train_model(); });
    stage("embed", [&] { embed_graphs(); });
    stage("classify", [&] { classify_probes(); });
    stage("mmd", [&] { mmd(); });
    stage("report", [&] { report(); });
    write_log(true);
    result_.files = files_;
    result_.files.push_back("run_log.json");
    return result_;
  }

 private:
  template <typename Fn>
  void stage(const std::string& name, Fn&& fn) {
    try {
      fn();
      stages_.emplace_back(name, "ok");
    } catch (const Error& e) {
      fail(name, e.kind(), e.what());
    } catch (const std::exception& e) {
      fail(name, "internal error", e.what());
    }
  }

  [[noreturn]] void fail(const std::string& name, const std::string& kind, const std::string& what) {
    stages_.emplace_back(name, "failed");
    {
      std::ofstream marker(dir_ / "FAILED");
      marker << "stage: " << name << "\n" << kind << ": " << what << "\n";
    }
    try {
      write_log(false);
    } catch (const std::exception&) {
    }
    throw StageError(name, kind, what);
  }

  std::ofstream artifact(const std::string& rel) {
    files_.push_back(rel);
    return open_out(dir_ / rel);
  }

  std::uint64_t seed(const std::string& label) {
    const auto s = derive_seed(cfg_.seed, label);
    seeds_[label] = s;
    return s;
  }

  void corpus() {
    if (!cfg_.manifest.empty()) {
      corpus_ = load_manifest(cfg_.manifest, cfg_.threads);
    } else {
      for (const auto& cls : cfg_.classes) {
        if (std::count(cfg_.classes.begin(), cfg_.classes.end(), cls) > 1) {
          throw ArgumentError("class " + cls + " listed twice");
        }
      }
      corpus_ = generate_corpus(cfg_.classes, cfg_.graphs_per_class, cfg_.nodes, cfg_.seed, cfg_.threads);
      if (cfg_.write_corpus) {
        write_corpus(corpus_, (dir_ / "corpus").string());
        for (const auto& r : corpus_.manifest.records) files_.push_back("corpus/" + r.path);
        files_.push_back("corpus/manifest.csv");
      }
    }
    result_.classes = corpus_.classes;
    if (corpus_.classes.size() < 2) throw ArgumentError("the corpus needs at least 2 classes");
    {
      auto out = artifact("class_stats.csv");
      write_class_stats_csv(class_stats(corpus_), out);
    }
    SplitSpec spec = cfg_.split;
    spec.seed = seed("split");
    std::vector<std::string> labels;
    for (const auto& r : corpus_.manifest.records) labels.push_back(r.cls);
    split_ = split(labels, spec);
    {
      auto out = artifact("split.csv");
      out << "index,path,class,part\n";
      std::vector<std::string> part(labels.size());
      for (auto i : split_.train) part[i] = "train";
      for (auto i : split_.val) part[i] = "val";
      for (auto i : split_.test) part[i] = "test";
      for (std::size_t i = 0; i < labels.size(); ++i) {
        out << i << ',' << corpus_.manifest.records[i].path << ',' << labels[i] << ',' << part[i] << '\n';
      }
    }
    for (const auto& sc : cfg_.subjects) {
      Subject s;
      s.config = sc;
      const auto it = std::find(corpus_.classes.begin(), corpus_.classes.end(), sc.cls);
      if (it == corpus_.classes.end()) {
        throw ArgumentError("subject " + sc.name + ": class '" + sc.cls + "' is not in the corpus");
      }
      s.cls = static_cast<int>(it - corpus_.classes.begin());
      if (sc.kind == "manifest") {
        const auto loaded = load_manifest(sc.manifest, cfg_.threads);
        s.gen = loaded.graphs;
        for (const auto& r : loaded.manifest.records) s.sources.push_back(r.path);
      } else {
        const auto graph_seed = seed("subject:" + sc.name);
        std::vector<Graph> fresh(sc.count);
        parallel_for(
            fresh.size(),
            [&](std::size_t i) {
              fresh[i] = generate_preset(sc.cls, cfg_.nodes, derive_seed(graph_seed, "graph", i));
            },
            cfg_.threads);
        if (sc.kind == "rewire") {
          const auto rewire_seed = seed("rewire:" + sc.name);
          s.gen.resize(fresh.size());
          parallel_for(
              fresh.size(),
              [&](std::size_t i) {
                s.gen[i] = rewire_preserving_degree(fresh[i], sc.swaps_per_edge, derive_seed(rewire_seed, "graph", i));
              },
              cfg_.threads);
          s.ref = std::move(fresh);
        } else {
          s.gen = std::move(fresh);
        }
        for (std::size_t i = 0; i < s.gen.size(); ++i) s.sources.push_back(sc.kind + ":" + std::to_string(i));
      }
      if (s.gen.empty()) throw ArgumentError("subject " + sc.name + " has no graphs");
      if (s.ref.empty()) {
        for (std::size_t i = 0; i < corpus_.graphs.size(); ++i) {
          if (corpus_.labels[i] == s.cls) s.ref.push_back(corpus_.graphs[i]);
        }
      }
      subjects_.push_back(std::move(s));
    }
  }

  void features() {
    features_ = featurize(corpus_.graphs, cfg_.scaling, cfg_.threads);
    for (auto& s : subjects_) s.features = featurize(s.gen, cfg_.scaling, cfg_.threads);
  }

  Dataset dataset(const std::vector<std::size_t>& idx) const {
    Dataset d;
    d.classes = corpus_.classes;
    for (auto i : idx) d.items.push_back({corpus_.graphs[i], features_[i], corpus_.labels[i]});
    return d;
  }

  void train_model() {
    Architecture arch = cfg_.arch;
    arch.out_dim = static_cast<int>(corpus_.classes.size());
    TrainConfig tc = cfg_.train;
    tc.seed = seed("train");
    tc.threads = cfg_.threads;
    const auto result = train(dataset(split_.train), dataset(split_.val), arch, tc);
    params_ = result.params;
    result_.history = result.history;
    {
      auto out = artifact("train_history.csv");
      out << "epoch,train_loss,val_loss\n";
      out << "0,NA," << format_real(result.history.initial_val_loss) << '\n';
      for (std::size_t e = 0; e < result.history.val_loss.size(); ++e) {
        out << e + 1 << ',' << format_real(result.history.train_loss[e]) << ','
            << format_real(result.history.val_loss[e]) << '\n';
      }
    }
    files_.push_back("checkpoint.json");
    save_checkpoint_file({params_, tc, corpus_.classes}, (dir_ / "checkpoint.json").string());
  }

  void embed_graphs() {
    embeddings_ = embed_all(corpus_.graphs, features_, params_, cfg_.threads);
    for (auto& s : subjects_) s.embeddings = embed_all(s.gen, s.features, params_, cfg_.threads);
  }

  void classify_probes() {
    std::vector<std::vector<double>> anchors;
    std::vector<int> anchor_labels;
    for (auto i : split_.train) {
      anchors.push_back(embeddings_[i]);
      anchor_labels.push_back(corpus_.labels[i]);
    }
    const AnchorIndex index(corpus_.classes, anchors, anchor_labels);
    auto out = artifact("predictions.csv");
    out << "set,index,source,true,predicted";
    for (const auto& c : corpus_.classes) out << ",score_" << c;
    out << '\n';
    auto row = [&](const std::string& set, std::size_t i, const std::string& source, int truth,
                   const Classification& c) {
      out << set << ',' << i << ',' << source << ',' << corpus_.classes[truth] << ','
          << corpus_.classes[c.predicted];
      for (double s : c.scores) out << ',' << format_real(s);
      out << '\n';
    };
    std::vector<std::string> predicted, truth;
    for (auto i : split_.test) {
      const auto c = classify(embeddings_[i], index);
      row("test", i, corpus_.manifest.records[i].path, corpus_.labels[i], c);
      predicted.push_back(corpus_.classes[c.predicted]);
      truth.push_back(corpus_.classes[corpus_.labels[i]]);
    }
    result_.test_confusion = confusion_matrix(predicted, truth, corpus_.classes);
    {
      auto cm = artifact("confusion_test.csv");
      write_confusion_csv(result_.test_confusion, cm);
    }
    for (auto& s : subjects_) {
      SubjectResult r;
      r.name = s.config.name;
      r.cls = s.config.cls;
      std::vector<std::string> p, t;
      for (std::size_t i = 0; i < s.gen.size(); ++i) {
        const auto c = classify(s.embeddings[i], index);
        row(s.config.name, i, s.sources[i], s.cls, c);
        r.predicted.push_back(c.predicted);
        p.push_back(corpus_.classes[c.predicted]);
        t.push_back(s.config.cls);
      }
      r.fraction_as_class = static_cast<double>(std::count(r.predicted.begin(), r.predicted.end(), s.cls)) /
                            static_cast<double>(r.predicted.size());
      auto cm = artifact("confusion_" + s.config.name + ".csv");
      write_confusion_csv(confusion_matrix(p, t, corpus_.classes), cm);
      result_.subjects.push_back(std::move(r));
    }
  }

  void mmd() {
    std::vector<std::pair<std::string, MmdReport>> reports;
    MmdConfig mc = cfg_.mmd;
    mc.threads = cfg_.threads;
    for (std::size_t k = 0; k < subjects_.size(); ++k) {
      auto report = mmd_suite(subjects_[k].ref, subjects_[k].gen, mc);
      result_.subjects[k].mmd = report;
      reports.emplace_back(subjects_[k].config.name, std::move(report));
    }
    {
      auto out = artifact("mmd.json");
      write_mmd_json(reports, out);
    }
    auto out = artifact("mmd.csv");
    write_mmd_csv(reports, out);
  }

  void report() {
    auto summary = artifact("topo_summary.csv");
    auto longform = artifact("topo_long.csv");
    write_summary_csv_header(summary);
    write_long_csv_header(longform);
    for (const auto& s : subjects_) {
      const auto ref = topo_summaries(s.ref, cfg_.threads);
      const auto gen = topo_summaries(s.gen, cfg_.threads);
      write_summary_csv_rows(s.config.name, compare_ensembles(ref, gen), summary);
      write_long_csv_rows(s.config.name, "ref", ref, longform);
      write_long_csv_rows(s.config.name, "gen", gen, longform);
    }
  }

  void write_log(bool ok) {
    nlohmann::ordered_json log;
    log["tool"] = "rgm";
    log["version"] = kVersion;
    log["status"] = ok ? "ok" : "failed";
    const std::string text = config_text(cfg_);
    log["config_hash"] = fnv1a_hex(text);
    nlohmann::ordered_json config;
    for (const auto& line : split_list(text, '\n')) {
      const auto eq = line.find(" = ");
      config[line.substr(0, eq)] = eq + 3 <= line.size() ? line.substr(eq + 3) : "";
    }
    log["config"] = config;
    nlohmann::ordered_json seeds;
    seeds["master"] = cfg_.seed;
    seeds["corpus"] = "derive_seed(master, \"corpus:<class>\", index)";
    for (const auto& [label, value] : seeds_) seeds[label] = value;
    log["seeds"] = seeds;
    nlohmann::ordered_json stages = nlohmann::ordered_json::array();
    for (const auto& [name, status] : stages_) stages.push_back({{"name", name}, {"status", status}});
    log["stages"] = stages;
    nlohmann::ordered_json files = nlohmann::ordered_json::array();
    for (const auto& f : files_) {
      if (fs::exists(dir_ / f)) files.push_back({{"path", f}, {"fnv1a64", file_hash((dir_ / f).string())}});
    }
    log["files"] = files;
    std::ofstream out(dir_ / "run_log.json");
    out << log.dump(2) << '\n';
  }

  const ExperimentConfig& cfg_;
  fs::path dir_;
  Corpus corpus_;
  Split split_;
  std::vector<FeatureMatrix> features_;
  EmbedderParams params_;
  std::vector<std::vector<double>> embeddings_;
  std::vector<Subject> subjects_;
  std::vector<std::pair<std::string, std::string>> stages_;
  std::map<std::string, std::uint64_t> seeds_;
  std::vector<std::string> files_;
  ExperimentResult result_;
};

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  const int previous = default_thread_count().load();
  default_thread_count() = cfg.threads;
  try {
    auto result = Run(cfg).execute();
    default_thread_count() = previous;
    return result;
  } catch (...) {
    default_thread_count() = previous;
    throw;
  }
}

}  // namespace rgm
