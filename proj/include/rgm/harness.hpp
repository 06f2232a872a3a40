#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "rgm/anchor_knn.hpp"
#include "rgm/embedder.hpp"
#include "rgm/error.hpp"
#include "rgm/features.hpp"
#include "rgm/generators.hpp"
#include "rgm/graph.hpp"
#include "rgm/mmd.hpp"

namespace rgm {

// ---------------------------------------------------------------------------
// Manifests

struct ManifestRecord {
  std::string path;  // as written in the manifest
  std::string cls;
  std::string meta;
};

struct Manifest {
  std::vector<ManifestRecord> records;
  std::string base_dir;  // relative paths resolve against this
};

// CSV with header "path,class" or "path,class,meta". Throws LoadError naming
// the row number (1-based, header is row 1) for malformed rows, empty class
// labels and duplicate paths.
Manifest read_manifest(std::istream& in, const std::string& base_dir = ".");
Manifest read_manifest_file(const std::string& path);
void write_manifest(const Manifest& m, std::ostream& out);

std::string resolve_path(const Manifest& m, const ManifestRecord& r);

struct ClassStats {
  std::string cls;
  int count = 0;
  int min_nodes = 0, max_nodes = 0;
  std::size_t min_edges = 0, max_edges = 0;
};

struct Corpus {
  Manifest manifest;
  std::vector<Graph> graphs;        // one per record
  std::vector<std::string> classes;  // sorted distinct labels
  std::vector<int> labels;           // index into classes, one per record
};

// Reads every edge list. Missing or unreadable files raise LoadError naming
// the manifest row.
Corpus load_manifest(const std::string& path, int threads = 0);
Corpus make_corpus(Manifest manifest, std::vector<Graph> graphs);

std::vector<ClassStats> class_stats(const Corpus& c);
// Header "class,count,min_nodes,max_nodes,min_edges,max_edges".
void write_class_stats_csv(const std::vector<ClassStats>& stats, std::ostream& out);

// ---------------------------------------------------------------------------
// Splits

struct SplitSpec {
  double train = 0.64;
  double val = 0.16;
  double test = 0.20;
  bool stratified = true;
  std::uint64_t seed = 0;
};

struct Split {
  std::vector<std::size_t> train, val, test;  // ascending record indices
};

// Per class (or over everything when not stratified): shuffle with a seed
// derived from spec.seed and the class name, then take round(n * train) and
// round(n * val) graphs, the rest going to test. Stratified classes with at
// least 3 graphs get one graph in every part. Throws SplitError naming any
// class with fewer than 3 graphs, and ArgumentError for bad fractions.
Split split(const std::vector<std::string>& labels, const SplitSpec& spec);

// ---------------------------------------------------------------------------
// Synthetic class presets

inline const std::vector<std::string> kPresetClasses = {"BA", "ER", "LFR", "NPSO", "SBM"};

// Draws the parameters of one graph of a preset class on about `nodes` nodes.
// Ranges scale with `nodes`; see README for the table.
GeneratorSpec preset_spec(const std::string& cls, int nodes, std::uint64_t seed);

// Generates a preset graph. LFR draws whose community assignment fails are
// redrawn with derived seeds; the GeneratorSpec actually used is returned.
Graph generate_preset(const std::string& cls, int nodes, std::uint64_t seed, GeneratorSpec* used = nullptr);

// `per_class` graphs for every class; graph i of class c uses
// derive_seed(seed, "corpus:" + c, i). Records carry "cls/NNNN.edges" paths
// and the generator description as meta.
Corpus generate_corpus(const std::vector<std::string>& classes, int per_class, int nodes,
                       std::uint64_t seed, int threads = 0);

// Writes every graph under dir (creating it) plus dir/manifest.csv.
void write_corpus(const Corpus& c, const std::string& dir);

// ---------------------------------------------------------------------------
// Flat key = value configuration

class Config {
 public:
  // One "key = value" per line; '#' starts a comment. Throws FormatError with
  // the line number on lines without '=' and on repeated keys.
  static Config parse(std::istream& in);
  static Config parse_file(const std::string& path);

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::map<std::string, std::string>& values() const { return values_; }

  std::string get(const std::string& key, const std::string& fallback) const;
  double get_real(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  std::uint64_t get_seed(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<std::string> get_list(const std::string& key, const std::vector<std::string>& fallback) const;

 private:
  std::map<std::string, std::string> values_;
};

// A set of generated or loaded graphs evaluated against one reference class.
//   rewire:   `count` fresh preset graphs of `cls` (the reference) and their
//             degree-preserving rewires (the generated set)
//   sample:   `count` fresh preset graphs of `cls` against the corpus graphs of `cls`
//   manifest: graphs listed in `manifest` against the corpus graphs of `cls`
struct SubjectConfig {
  std::string name;
  std::string kind = "rewire";
  std::string cls;
  int count = 30;
  double swaps_per_edge = 10.0;
  std::string manifest;
};

struct ExperimentConfig {
  std::string out_dir = "rgm-run";
  std::uint64_t seed = 0;
  int threads = 0;

  // Corpus: loaded from `manifest` when set, otherwise generated from presets.
  std::string manifest;
  std::vector<std::string> classes = kPresetClasses;
  int graphs_per_class = 100;
  int nodes = 300;
  bool write_corpus = true;

  FeatureScaling scaling = FeatureScaling::log1p_standardized;
  SplitSpec split;
  Architecture arch;  // out_dim is set to the number of classes
  TrainConfig train;  // seed and threads are derived
  MmdConfig mmd;
  std::vector<SubjectConfig> subjects;
};

// Unknown keys raise ArgumentError so typos do not go unnoticed. The key list
// is documented in README.
ExperimentConfig experiment_config(const Config& c);

// Canonical "key = value" text of every resolved setting, sorted by key.
std::string config_text(const ExperimentConfig& cfg);

// FNV-1a 64 of a byte string, as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);
std::string file_hash(const std::string& path);

// ---------------------------------------------------------------------------
// Pipeline

inline const std::vector<std::string> kStages = {"corpus", "features", "train", "embed",
                                                 "classify", "mmd", "report"};

// Raised by run_experiment; `stage()` names the stage that failed and
// `kind()` the underlying error kind.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& kind, const std::string& what)
      : Error(kind, what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

struct SubjectResult {
  std::string name;
  std::string cls;
  MmdReport mmd;
  std::vector<int> predicted;  // class index per generated graph
  double fraction_as_class = 0.0;
};

struct ExperimentResult {
  std::vector<std::string> classes;
  ConfusionMatrix test_confusion;
  TrainHistory history;
  std::vector<SubjectResult> subjects;
  std::vector<std::string> files;  // written artifacts, relative to out_dir
};

// Runs the seven stages in kStages order and writes, under cfg.out_dir:
//   corpus/ (generated corpora), class_stats.csv, split.csv, train_history.csv,
//   checkpoint.json, predictions.csv, confusion_test.csv,
//   confusion_<subject>.csv, mmd.json, mmd.csv, topo_summary.csv,
//   topo_long.csv and run_log.json.
// On failure a FAILED file with the stage name is left next to the partial
// artifacts and StageError is thrown.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Pieces of the pipeline shared with the CLI.
std::vector<FeatureMatrix> featurize(const std::vector<Graph>& graphs, FeatureScaling scaling,
                                     int threads = 0);
std::vector<std::vector<double>> embed_all(const std::vector<Graph>& graphs,
                                           const std::vector<FeatureMatrix>& features,
                                           const EmbedderParams& params, int threads = 0);
void write_mmd_json(const std::vector<std::pair<std::string, MmdReport>>& reports, std::ostream& out);
void write_mmd_csv(const std::vector<std::pair<std::string, MmdReport>>& reports, std::ostream& out);

}  // namespace rgm
