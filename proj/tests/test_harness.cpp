#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "rgm/harness.hpp"
#include "rgm/random.hpp"

using namespace rgm;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("rgm_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> repeat_labels(const std::vector<std::pair<std::string, int>>& counts) {
  std::vector<std::string> out;
  for (const auto& [cls, n] : counts)
    for (int i = 0; i < n; ++i) out.push_back(cls);
  return out;
}

}  // namespace

TEST(Manifest, LoadsTwoFiles) {
  const auto dir = scratch("manifest_two");
  write_edge_list_file(complete_graph(4), (dir / "a.edges").string());
  fs::create_directories(dir / "sub");
  write_edge_list_file(path_graph(5), (dir / "sub" / "b.edges").string());
  std::ofstream(dir / "m.csv") << "path,class\na.edges,clique\nsub/b.edges,path\n";
  const auto c = load_manifest((dir / "m.csv").string());
  ASSERT_EQ(c.graphs.size(), 2u);
  EXPECT_EQ(c.classes, (std::vector<std::string>{"clique", "path"}));
  EXPECT_EQ(c.labels, (std::vector<int>{0, 1}));
  EXPECT_EQ(c.graphs[0].num_edges(), 6u);
  EXPECT_EQ(c.graphs[1].num_nodes(), 5);
  const auto stats = class_stats(c);
  EXPECT_EQ(stats[1].min_edges, 4u);
  EXPECT_EQ(stats[0].count, 1);
}

TEST(Manifest, MissingFileNamesRow) {
  const auto dir = scratch("manifest_missing");
  write_edge_list_file(complete_graph(3), (dir / "a.edges").string());
  std::ofstream(dir / "m.csv") << "path,class,meta\na.edges,x,\nnope.edges,y,seed=3\n";
  try {
    load_manifest((dir / "m.csv").string());
    FAIL() << "expected LoadError";
  } catch (const LoadError& e) {
    EXPECT_NE(std::string(e.what()).find("row 3"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("nope.edges"), std::string::npos) << e.what();
  }
}

TEST(Manifest, MalformedRows) {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return read_manifest(in);
  };
  EXPECT_THROW(parse("file,label\na,b\n"), LoadError);
  EXPECT_THROW(parse("path,class\nonly-one-field\n"), LoadError);
  EXPECT_THROW(parse("path,class\na,\n"), LoadError);
  EXPECT_THROW(parse("path,class\na,x\na,y\n"), LoadError);
  EXPECT_THROW(parse("path,class\na,x,meta\n"), LoadError);
  const auto m = parse("path,class,meta\r\na,x,n=3;p=0.5\r\n\r\n");
  ASSERT_EQ(m.records.size(), 1u);
  EXPECT_EQ(m.records[0].meta, "n=3;p=0.5");
  std::ostringstream out;
  write_manifest(m, out);
  EXPECT_EQ(out.str(), "path,class,meta\na,x,n=3;p=0.5\n");
}

TEST(Split, HundredGraphsOneClass) {
  const auto s = split(repeat_labels({{"A", 100}}), {});
  EXPECT_EQ(s.train.size(), 64u);
  EXPECT_EQ(s.val.size(), 16u);
  EXPECT_EQ(s.test.size(), 20u);
}

TEST(Split, TenClassesOfThreeHundred) {
  std::vector<std::pair<std::string, int>> counts;
  for (int c = 0; c < 10; ++c) counts.emplace_back("c" + std::to_string(c), 300);
  const auto labels = repeat_labels(counts);
  const auto s = split(labels, {});
  std::map<std::string, std::array<int, 3>> per;
  for (auto i : s.train) ++per[labels[i]][0];
  for (auto i : s.val) ++per[labels[i]][1];
  for (auto i : s.test) ++per[labels[i]][2];
  for (const auto& [cls, n] : per) EXPECT_EQ(n, (std::array<int, 3>{192, 48, 60})) << cls;
}

TEST(Split, SameSeedSameSplit) {
  const auto labels = repeat_labels({{"A", 40}, {"B", 17}});
  SplitSpec spec;
  spec.seed = 99;
  const auto a = split(labels, spec), b = split(labels, spec);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.val, b.val);
  EXPECT_EQ(a.test, b.test);
  spec.seed = 100;
  EXPECT_NE(split(labels, spec).train, a.train);
}

TEST(Split, SmallClassNamed) {
  try {
    split(repeat_labels({{"big", 10}, {"tiny", 2}}), {});
    FAIL() << "expected SplitError";
  } catch (const SplitError& e) {
    EXPECT_NE(std::string(e.what()).find("tiny"), std::string::npos);
  }
  SplitSpec loose;
  loose.stratified = false;
  EXPECT_NO_THROW(split(repeat_labels({{"big", 10}, {"tiny", 2}}), loose));
}

TEST(Split, BadFractions) {
  SplitSpec s;
  s.train = 0.7;
  EXPECT_THROW(split({"a", "a", "a"}, s), ArgumentError);
  s.train = 0.84;
  s.val = 0.0;
  EXPECT_THROW(split({"a", "a", "a"}, s), ArgumentError);
}

TEST(Split, DisjointExhaustiveAndWithinOneGraph) {
  Rng rng(5);
  for (int trial = 0; trial < 1000; ++trial) {
    const int classes = static_cast<int>(rng.integer(1, 6));
    std::vector<std::pair<std::string, int>> counts;
    for (int c = 0; c < classes; ++c) counts.emplace_back("k" + std::to_string(c), static_cast<int>(rng.integer(3, 60)));
    auto labels = repeat_labels(counts);
    rng.shuffle(labels);
    SplitSpec spec;
    spec.seed = rng();
    const auto s = split(labels, spec);
    std::vector<int> seen(labels.size(), 0);
    for (const auto* part : {&s.train, &s.val, &s.test})
      for (auto i : *part) ++seen[i];
    for (int v : seen) ASSERT_EQ(v, 1);
    std::map<std::string, std::array<int, 3>> per;
    for (auto i : s.train) ++per[labels[i]][0];
    for (auto i : s.val) ++per[labels[i]][1];
    for (auto i : s.test) ++per[labels[i]][2];
    for (const auto& [cls, n] : counts) {
      const double fr[3] = {spec.train, spec.val, spec.test};
      for (int p = 0; p < 3; ++p) {
        EXPECT_LE(std::abs(per[cls][p] - n * fr[p]), 1.0 + 1e-9) << cls << " n=" << n << " part " << p;
        EXPECT_GE(per[cls][p], 1);
      }
    }
  }
}

TEST(Config, ParsesFlatKeys) {
  std::istringstream in("# comment\nseed = 7\n  nodes=120   # trailing\n\nclasses = ER, BA\n");
  const auto c = Config::parse(in);
  EXPECT_EQ(c.get_seed("seed", 0), 7u);
  EXPECT_EQ(c.get_int("nodes", 0), 120);
  EXPECT_EQ(c.get_list("classes", {}), (std::vector<std::string>{"ER", "BA"}));
  std::istringstream bad("seed 7\n");
  EXPECT_THROW(Config::parse(bad), FormatError);
  std::istringstream repeated("a = 1\na = 2\n");
  EXPECT_THROW(Config::parse(repeated), FormatError);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  Config c;
  c.set("train.lr", "fast");
  EXPECT_THROW(experiment_config(c), ArgumentError);
  Config typo;
  typo.set("train.learning_rate", "0.1");
  EXPECT_THROW(experiment_config(typo), ArgumentError);
  Config subject;
  subject.set("subjects", "s");
  subject.set("subject.s.kind", "teleport");
  subject.set("subject.s.class", "ER");
  EXPECT_THROW(experiment_config(subject), ArgumentError);
}

TEST(Config, TextRoundTrip) {
  Config c;
  c.set("seed", "42");
  c.set("train.lr", "0.01");
  c.set("mmd.metrics", "degree,clustering");
  c.set("mmd.orbits.sigma", "0.3");
  c.set("subjects", "r");
  c.set("subject.r.class", "NPSO");
  c.set("subject.r.count", "5");
  const auto cfg = experiment_config(c);
  EXPECT_EQ(cfg.train.optimizer.lr, 0.01);
  EXPECT_EQ(cfg.mmd.orbits.sigma, 0.3);
  ASSERT_EQ(cfg.subjects.size(), 1u);
  EXPECT_EQ(cfg.subjects[0].kind, "rewire");
  const auto text = config_text(cfg);
  std::istringstream in(text);
  EXPECT_EQ(config_text(experiment_config(Config::parse(in))), text);
}

TEST(Presets, AllClassesGenerate) {
  for (const auto& cls : kPresetClasses) {
    for (int nodes : {40, 300}) {
      for (std::uint64_t s = 0; s < 3; ++s) {
        GeneratorSpec used;
        const auto g = generate_preset(cls, nodes, s, &used);
        EXPECT_NO_THROW(validate(used));
        EXPECT_LE(g.num_nodes(), nodes);
        EXPECT_GE(g.num_nodes(), nodes - 2);
        EXPECT_GT(g.num_edges(), 0u);
      }
    }
  }
  EXPECT_THROW(preset_spec("WS", 100, 0), ArgumentError);
}

TEST(Presets, ErNodeRangeAtThousand) {
  const auto c = generate_corpus({"ER"}, 300, 1000, 11);
  const auto stats = class_stats(c);
  ASSERT_EQ(stats.size(), 1u);
  EXPECT_EQ(stats[0].count, 300);
  EXPECT_EQ(stats[0].min_nodes, 996);
  EXPECT_EQ(stats[0].max_nodes, 1000);
}

TEST(Presets, CorpusIsDeterministic) {
  const auto a = generate_corpus({"BA", "SBM"}, 3, 60, 4);
  const auto b = generate_corpus({"BA", "SBM"}, 3, 60, 4);
  ASSERT_EQ(a.graphs.size(), 6u);
  for (std::size_t i = 0; i < a.graphs.size(); ++i) {
    EXPECT_EQ(a.graphs[i], b.graphs[i]);
    EXPECT_EQ(a.manifest.records[i].meta, b.manifest.records[i].meta);
  }
  EXPECT_EQ(a.manifest.records[4].path, "SBM/0001.edges");
}

TEST(Presets, WrittenCorpusLoadsBack) {
  const auto dir = scratch("corpus_roundtrip");
  const auto a = generate_corpus({"ER", "NPSO"}, 2, 50, 8);
  write_corpus(a, dir.string());
  const auto b = load_manifest((dir / "manifest.csv").string());
  ASSERT_EQ(b.graphs.size(), a.graphs.size());
  for (std::size_t i = 0; i < a.graphs.size(); ++i) EXPECT_EQ(a.graphs[i], b.graphs[i]);
  EXPECT_EQ(b.labels, a.labels);
}

namespace {

ExperimentConfig toy_config(const fs::path& out) {
  ExperimentConfig cfg;
  cfg.out_dir = out.string();
  cfg.seed = 3;
  cfg.threads = 1;
  cfg.classes = {"ER", "BA"};
  cfg.graphs_per_class = 10;
  cfg.nodes = 40;
  cfg.train.max_epochs = 0;
  cfg.mmd.metrics = {"degree", "clustering", "spectral"};
  SubjectConfig s;
  s.name = "ba_rewire";
  s.cls = "BA";
  s.count = 4;
  cfg.subjects.push_back(s);
  return cfg;
}

}  // namespace

TEST(Run, SmokeWithUntrainedEmbedder) {
  const auto dir = scratch("run_smoke");
  const auto result = run_experiment(toy_config(dir));
  EXPECT_FALSE(fs::exists(dir / "FAILED"));
  EXPECT_TRUE(result.history.val_loss.empty());
  ASSERT_EQ(result.test_confusion.classes.size(), 2u);
  for (std::size_t r = 0; r < 2; ++r) {
    EXPECT_EQ(result.test_confusion.row_totals[r], 2);
    EXPECT_NEAR(result.test_confusion.percent[r][0] + result.test_confusion.percent[r][1], 100.0, 0.1);
  }
  ASSERT_EQ(result.subjects.size(), 1u);
  EXPECT_EQ(result.subjects[0].predicted.size(), 4u);
  EXPECT_EQ(result.subjects[0].mmd.values.size(), 3u);
  for (const char* f : {"predictions.csv", "confusion_test.csv", "confusion_ba_rewire.csv", "mmd.json", "mmd.csv",
                        "topo_summary.csv", "topo_long.csv", "checkpoint.json", "split.csv", "class_stats.csv",
                        "train_history.csv", "run_log.json", "corpus/manifest.csv", "corpus/ER/0009.edges"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  const auto log = nlohmann::json::parse(slurp(dir / "run_log.json"));
  EXPECT_EQ(log["status"], "ok");
  EXPECT_EQ(log["stages"].size(), kStages.size());
  std::set<std::string> logged;
  for (const auto& f : log["files"]) {
    logged.insert(f["path"].get<std::string>());
    EXPECT_EQ(f["fnv1a64"].get<std::string>(), file_hash((dir / f["path"].get<std::string>()).string()));
  }
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), dir).generic_string();
    if (rel != "run_log.json") EXPECT_TRUE(logged.count(rel)) << rel << " missing from the run log";
  }
  EXPECT_EQ(log["config_hash"], fnv1a_hex(config_text(toy_config(dir))));
  // Predictions are CSV with a score column per class.
  const auto predictions = slurp(dir / "predictions.csv");
  EXPECT_EQ(predictions.substr(0, predictions.find('\n')), "set,index,source,true,predicted,score_BA,score_ER");
}

TEST(Run, RepeatedRunsAreIdenticalAcrossThreadCounts) {
  const auto a = scratch("run_repeat_a"), b = scratch("run_repeat_b");
  auto cfg = toy_config(a);
  cfg.train.max_epochs = 2;
  cfg.train.triplets_per_epoch = 16;
  cfg.train.val_triplets = 8;
  run_experiment(cfg);
  cfg.out_dir = b.string();
  cfg.threads = 3;
  run_experiment(cfg);
  for (const char* f : {"predictions.csv", "mmd.json", "topo_summary.csv", "topo_long.csv", "checkpoint.json"}) {
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
}

TEST(Run, FailureLeavesMarkerNamingStage) {
  const auto dir = scratch("run_fail");
  auto cfg = toy_config(dir);
  cfg.subjects[0].kind = "manifest";
  cfg.subjects[0].manifest = (dir / "does-not-exist.csv").string();
  try {
    run_experiment(cfg);
    FAIL() << "expected StageError";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "corpus");
    EXPECT_EQ(e.kind(), "load error");
  }
  ASSERT_TRUE(fs::exists(dir / "FAILED"));
  EXPECT_NE(slurp(dir / "FAILED").find("stage: corpus"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "class_stats.csv"));
  const auto log = nlohmann::json::parse(slurp(dir / "run_log.json"));
  EXPECT_EQ(log["status"], "failed");

  // A later successful run clears the marker.
  run_experiment(toy_config(dir));
  EXPECT_FALSE(fs::exists(dir / "FAILED"));
}

TEST(Run, SubjectClassMustExist) {
  const auto dir = scratch("run_bad_subject");
  auto cfg = toy_config(dir);
  cfg.subjects[0].cls = "LFR";
  try {
    run_experiment(cfg);
    FAIL() << "expected StageError";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "corpus");
    EXPECT_NE(std::string(e.what()).find("LFR"), std::string::npos);
  }
}
