// rgm: command-line front end for the graph-generation evaluation toolkit.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "rgm/anchor_knn.hpp"
#include "rgm/embedder.hpp"
#include "rgm/error.hpp"
#include "rgm/format.hpp"
#include "rgm/harness.hpp"
#include "rgm/parallel.hpp"
#include "rgm/report.hpp"

namespace fs = std::filesystem;
using namespace rgm;

namespace {

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<int> threads;
};

// Thrown out of a subcommand so main can name the stage.
struct StageFailure {
  std::string stage;
  std::string kind;
  std::string what;
};

template <typename Fn>
auto in_stage(const std::string& stage, Fn&& fn) {
  try {
    return fn();
  } catch (const StageError& e) {
    throw StageFailure{e.stage(), e.kind(), e.what()};
  } catch (const Error& e) {
    throw StageFailure{stage, e.kind(), e.what()};
  } catch (const std::exception& e) {
    throw StageFailure{stage, "internal error", e.what()};
  }
}

ExperimentConfig load_config(const Globals& g) {
  Config c = g.config.empty() ? Config{} : Config::parse_file(g.config);
  if (g.seed) c.set("seed", std::to_string(*g.seed));
  if (!g.out.empty()) c.set("out", g.out);
  if (g.threads) c.set("threads", std::to_string(*g.threads));
  auto cfg = experiment_config(c);
  default_thread_count() = cfg.threads;
  return cfg;
}

std::ofstream open_out(const fs::path& p) {
  fs::create_directories(p.parent_path().empty() ? fs::path(".") : p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw LoadError("cannot write " + p.string());
  return out;
}

Corpus corpus_for(const ExperimentConfig& cfg, const std::string& manifest) {
  if (!manifest.empty()) return load_manifest(manifest, cfg.threads);
  if (!cfg.manifest.empty()) return load_manifest(cfg.manifest, cfg.threads);
  return generate_corpus(cfg.classes, cfg.graphs_per_class, cfg.nodes, cfg.seed, cfg.threads);
}

void print_stats(const Corpus& c) { write_class_stats_csv(class_stats(c), std::cout); }

// --- subcommands -----------------------------------------------------------

void cmd_generate(const Globals& g) {
  const auto cfg = in_stage("config", [&] { return load_config(g); });
  const auto corpus = in_stage("corpus", [&] {
    auto c = generate_corpus(cfg.classes, cfg.graphs_per_class, cfg.nodes, cfg.seed, cfg.threads);
    write_corpus(c, (fs::path(cfg.out_dir) / "corpus").string());
    auto out = open_out(fs::path(cfg.out_dir) / "class_stats.csv");
    write_class_stats_csv(class_stats(c), out);
    return c;
  });
  print_stats(corpus);
}

void cmd_featurize(const Globals& g, const std::string& manifest) {
  const auto cfg = in_stage("config", [&] { return load_config(g); });
  const auto corpus = in_stage("corpus", [&] { return corpus_for(cfg, manifest); });
  in_stage("features", [&] {
    const auto features = featurize(corpus.graphs, cfg.scaling, cfg.threads);
    const fs::path dir = fs::path(cfg.out_dir) / "features";
    auto index = open_out(dir / "index.csv");
    index << "index,path,class,file\n";
    for (std::size_t i = 0; i < features.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "%06zu.csv", i);
      auto out = open_out(dir / name);
      write_feature_csv(features[i], out);
      index << i << ',' << corpus.manifest.records[i].path << ',' << corpus.manifest.records[i].cls << ','
            << name << '\n';
    }
    return 0;
  });
}

void cmd_train(const Globals& g, const std::string& manifest) {
  const auto cfg = in_stage("config", [&] { return load_config(g); });
  const auto corpus = in_stage("corpus", [&] { return corpus_for(cfg, manifest); });
  const fs::path dir(cfg.out_dir);
  const auto parts = in_stage("corpus", [&] {
    SplitSpec spec = cfg.split;
    spec.seed = derive_seed(cfg.seed, "split");
    std::vector<std::string> labels;
    for (const auto& r : corpus.manifest.records) labels.push_back(r.cls);
    return split(labels, spec);
  });
  const auto features = in_stage("features", [&] { return featurize(corpus.graphs, cfg.scaling, cfg.threads); });
  in_stage("train", [&] {
    auto dataset = [&](const std::vector<std::size_t>& idx) {
      Dataset d;
      d.classes = corpus.classes;
      for (auto i : idx) d.items.push_back({corpus.graphs[i], features[i], corpus.labels[i]});
      return d;
    };
    Architecture arch = cfg.arch;
    arch.out_dim = static_cast<int>(corpus.classes.size());
    TrainConfig tc = cfg.train;
    tc.seed = derive_seed(cfg.seed, "train");
    tc.threads = cfg.threads;
    const auto result = train(dataset(parts.train), dataset(parts.val), arch, tc);
    fs::create_directories(dir);
    save_checkpoint_file({result.params, tc, corpus.classes}, (dir / "checkpoint.json").string());
    auto hist = open_out(dir / "train_history.csv");
    hist << "epoch,train_loss,val_loss\n0,NA," << format_real(result.history.initial_val_loss) << '\n';
    for (std::size_t e = 0; e < result.history.val_loss.size(); ++e) {
      hist << e + 1 << ',' << format_real(result.history.train_loss[e]) << ','
           << format_real(result.history.val_loss[e]) << '\n';
    }
    // Anchors for `classify`: the training split, with absolute paths when the
    // corpus came from files.
    if (!manifest.empty() || !cfg.manifest.empty()) {
      Manifest anchors;
      anchors.base_dir = ".";
      for (auto i : parts.train) {
        auto r = corpus.manifest.records[i];
        r.path = fs::absolute(resolve_path(corpus.manifest, r)).string();
        anchors.records.push_back(r);
      }
      auto out = open_out(dir / "anchors.csv");
      write_manifest(anchors, out);
    }
    std::cout << "epochs: " << result.history.val_loss.size() << ", best val loss: "
              << format_real(result.history.best_epoch >= 0 ? result.history.val_loss[result.history.best_epoch]
                                                            : result.history.initial_val_loss)
              << '\n';
    return 0;
  });
}

void cmd_classify(const Globals& g, const std::string& checkpoint, const std::string& anchors_path,
                  const std::string& probes_path) {
  const auto cfg = in_stage("config", [&] { return load_config(g); });
  const auto ckpt = in_stage("corpus", [&] { return load_checkpoint_file(checkpoint); });
  const auto anchors = in_stage("corpus", [&] { return load_manifest(anchors_path, cfg.threads); });
  const auto probes = in_stage("corpus", [&] { return load_manifest(probes_path, cfg.threads); });
  const auto fa = in_stage("features", [&] { return featurize(anchors.graphs, cfg.scaling, cfg.threads); });
  const auto fp = in_stage("features", [&] { return featurize(probes.graphs, cfg.scaling, cfg.threads); });
  const auto ea = in_stage("embed", [&] { return embed_all(anchors.graphs, fa, ckpt.params, cfg.threads); });
  const auto ep = in_stage("embed", [&] { return embed_all(probes.graphs, fp, ckpt.params, cfg.threads); });
  in_stage("classify", [&] {
    const auto& classes = ckpt.classes;
    auto class_index = [&](const std::string& c) -> int {
      const auto it = std::find(classes.begin(), classes.end(), c);
      return it == classes.end() ? -1 : static_cast<int>(it - classes.begin());
    };
    std::vector<int> labels;
    for (const auto& r : anchors.manifest.records) {
      const int k = class_index(r.cls);
      if (k < 0) throw ArgumentError("anchor class '" + r.cls + "' is not in the checkpoint");
      labels.push_back(k);
    }
    const AnchorIndex index(classes, ea, labels);
    const fs::path dir(cfg.out_dir);
    auto out = open_out(dir / "predictions.csv");
    out << "set,index,source,true,predicted";
    for (const auto& c : classes) out << ",score_" << c;
    out << '\n';
    std::vector<std::string> predicted, truth;
    bool labeled = true;
    for (std::size_t i = 0; i < ep.size(); ++i) {
      const auto c = classify(ep[i], index);
      const auto& r = probes.manifest.records[i];
      out << "probe," << i << ',' << r.path << ',' << r.cls << ',' << classes[c.predicted];
      for (double s : c.scores) out << ',' << format_real(s);
      out << '\n';
      predicted.push_back(classes[c.predicted]);
      truth.push_back(r.cls);
      labeled = labeled && class_index(r.cls) >= 0;
    }
    if (labeled) {
      auto cm = open_out(dir / "confusion.csv");
      write_confusion_csv(confusion_matrix(predicted, truth, classes), cm);
    }
    return 0;
  });
}

void cmd_mmd(const Globals& g, const std::string& ref_path, const std::string& gen_path) {
  const auto cfg = in_stage("config", [&] { return load_config(g); });
  const auto ref = in_stage("corpus", [&] { return load_manifest(ref_path, cfg.threads); });
  const auto gen = in_stage("corpus", [&] { return load_manifest(gen_path, cfg.threads); });
  in_stage("mmd", [&] {
    MmdConfig mc = cfg.mmd;
    mc.threads = cfg.threads;
    std::vector<std::pair<std::string, MmdReport>> reports;
    reports.emplace_back(fs::path(gen_path).stem().string(), mmd_suite(ref.graphs, gen.graphs, mc));
    const fs::path dir(cfg.out_dir);
    {
      auto out = open_out(dir / "mmd.json");
      write_mmd_json(reports, out);
    }
    auto out = open_out(dir / "mmd.csv");
    write_mmd_csv(reports, out);
    write_mmd_csv(reports, std::cout);
    return 0;
  });
}

void cmd_report(const Globals& g, const std::string& ref_path, const std::string& gen_path,
                std::string label) {
  const auto cfg = in_stage("config", [&] { return load_config(g); });
  const auto ref = in_stage("corpus", [&] { return load_manifest(ref_path, cfg.threads); });
  const auto gen = in_stage("corpus", [&] { return load_manifest(gen_path, cfg.threads); });
  in_stage("report", [&] {
    if (label.empty()) label = ref.classes.size() == 1 ? ref.classes[0] : "all";
    const auto rs = topo_summaries(ref.graphs, cfg.threads);
    const auto gs = topo_summaries(gen.graphs, cfg.threads);
    const fs::path dir(cfg.out_dir);
    auto summary = open_out(dir / "topo_summary.csv");
    write_summary_csv_header(summary);
    write_summary_csv_rows(label, compare_ensembles(rs, gs), summary);
    auto longform = open_out(dir / "topo_long.csv");
    write_long_csv_header(longform);
    write_long_csv_rows(label, "ref", rs, longform);
    write_long_csv_rows(label, "gen", gs, longform);
    return 0;
  });
}

void cmd_run(const Globals& g) {
  const auto cfg = in_stage("config", [&] { return load_config(g); });
  const auto result = in_stage("run", [&] { return run_experiment(cfg); });
  std::cout << "test confusion (% of row):\n";
  write_confusion_csv(result.test_confusion, std::cout);
  for (const auto& s : result.subjects) {
    std::cout << "subject " << s.name << ": " << format_real(100.0 * s.fraction_as_class)
              << "% classified as " << s.cls << '\n';
    for (const auto& [metric, value] : s.mmd.values) {
      std::cout << "  mmd " << metric << " = " << format_real(value) << '\n';
    }
  }
  std::cout << "artifacts in " << cfg.out_dir << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rgm: random-graph-model evaluation toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  std::uint64_t seed = 0;
  int threads = 0;
  app.add_option("--config", g.config, "flat key = value config file")->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "master seed (overrides the config)");
  app.add_option("--out", g.out, "output directory (overrides the config)");
  auto* threads_opt = app.add_option("--threads", threads, "worker threads, 0 = all cores");

  std::string manifest, checkpoint, anchors, probes, ref, gen, label;

  auto* generate = app.add_subcommand("generate", "generate the synthetic corpus and its manifest");
  auto* featurize_cmd = app.add_subcommand("featurize", "write node-feature CSVs for a corpus");
  featurize_cmd->add_option("--manifest", manifest, "corpus manifest (default: config corpus)");
  auto* train_cmd = app.add_subcommand("train", "split the corpus and train the embedder");
  train_cmd->add_option("--manifest", manifest, "corpus manifest (default: config corpus)");
  auto* classify_cmd = app.add_subcommand("classify", "classify probe graphs against anchors");
  classify_cmd->add_option("--checkpoint", checkpoint, "trained checkpoint")->required();
  classify_cmd->add_option("--anchors", anchors, "anchor manifest")->required();
  classify_cmd->add_option("--probes", probes, "probe manifest")->required();
  auto* mmd_cmd = app.add_subcommand("mmd", "MMD suite between two graph sets");
  mmd_cmd->add_option("--ref", ref, "reference manifest")->required();
  mmd_cmd->add_option("--gen", gen, "generated manifest")->required();
  auto* report_cmd = app.add_subcommand("report", "topological comparison of two graph sets");
  report_cmd->add_option("--ref", ref, "reference manifest")->required();
  report_cmd->add_option("--gen", gen, "generated manifest")->required();
  report_cmd->add_option("--label", label, "class column value");
  auto* run = app.add_subcommand("run", "full pipeline");

  CLI11_PARSE(app, argc, argv);
  if (seed_opt->count()) g.seed = seed;
  if (threads_opt->count()) g.threads = threads;

  try {
    if (*generate) cmd_generate(g);
    if (*featurize_cmd) cmd_featurize(g, manifest);
    if (*train_cmd) cmd_train(g, manifest);
    if (*classify_cmd) cmd_classify(g, checkpoint, anchors, probes);
    if (*mmd_cmd) cmd_mmd(g, ref, gen);
    if (*report_cmd) cmd_report(g, ref, gen, label);
    if (*run) cmd_run(g);
  } catch (const StageFailure& f) {
    std::cerr << "rgm: stage " << f.stage << " failed: " << f.kind << ": " << f.what << '\n';
    return 2;
  }
  return 0;
}
