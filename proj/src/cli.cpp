// SPDX-License-Identifier: Apache-2.0
#include "ibpm/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ibpm/corpus.hpp"
#include "ibpm/detector.hpp"
#include "ibpm/graph_gen.hpp"
#include "ibpm/graph_io.hpp"
#include "ibpm/intervals.hpp"
#include "ibpm/minilang/method_graph.hpp"
#include "ibpm/minilang/parser.hpp"
#include "ibpm/minilang/printer.hpp"
#include "ibpm/propagation.hpp"

namespace ibpm {

namespace {

using json = nlohmann::ordered_json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot read " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InvalidArgument("cannot write " + path);
  f << text;
  if (!f) throw InvalidArgument("failed writing " + path);
}

std::vector<std::size_t> parse_ks(const std::string& text) {
  std::vector<std::size_t> ks;
  std::stringstream in(text);
  for (std::string item; std::getline(in, item, ',');) {
    try {
      std::size_t used = 0;
      const long v = std::stol(item, &used);
      if (used != item.size() || v <= 0) throw std::invalid_argument(item);
      ks.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw InvalidArgument("bad k value '" + item + "'");
    }
  }
  if (ks.empty()) throw InvalidArgument("no k values given");
  return ks;
}

std::vector<minilang::BugKind> parse_kinds(const std::string& text) {
  std::vector<minilang::BugKind> kinds;
  std::stringstream in(text);
  for (std::string item; std::getline(in, item, ',');) kinds.push_back(minilang::bug_kind_from_string(item));
  return kinds;
}

// Options shared by train and ablate.
struct TrainOptions {
  std::string corpus;
  std::string config;
  std::size_t hidden = 0;
  std::size_t rounds = 0;
  std::size_t interval_rounds = 0;
  std::string mode;
  TrainConfig train;
  bool seed_given = false;

  void add(CLI::App* cmd) {
    cmd->add_option("--corpus", corpus, "corpus file (JSON lines)")->required();
    cmd->add_option("--config", config, "model config JSON");
    cmd->add_option("--hidden", hidden, "hidden and embedding width");
    cmd->add_option("--rounds", rounds, "whole-graph rounds (standard mode)");
    cmd->add_option("--interval-rounds", interval_rounds, "rounds per interval (ibpm mode)");
    cmd->add_option("--epochs", train.epochs, "training epochs")->capture_default_str();
    cmd->add_option("--batch", train.batch, "batch size")->capture_default_str();
    cmd->add_option("--lr", train.lr, "learning rate")->capture_default_str();
    cmd->add_option("--clip", train.clip, "gradient norm clip (0 disables)")->capture_default_str();
    cmd->add_option("--holdout", train.holdout, "share of train held out for model selection")
        ->capture_default_str();
    cmd->add_option("--positive-weight", train.positive_weight, "buggy-method loss weight (0: class ratio)")
        ->capture_default_str();
    cmd->add_option("--threads", train.threads, "worker threads")->capture_default_str();
  }

  ModelConfig model_config(std::uint64_t seed) const {
    ModelConfig mc = config.empty() ? ModelConfig{} : config_from_json(nlohmann::json::parse(read_file(config)));
    if (hidden > 0) mc.hidden = mc.embedding = hidden;
    if (rounds > 0) mc.rounds = rounds;
    if (interval_rounds > 0) mc.interval_rounds = interval_rounds;
    if (!mode.empty()) mc.mode = propagation_mode_from_string(mode);
    mc.seed = seed;
    mc.validate();
    return mc;
  }
};

}  // namespace

std::uint64_t default_seed() {
  const char* env = std::getenv(kSeedEnv);
  if (env == nullptr || *env == '\0') return kDefaultSeed;
  try {
    std::size_t used = 0;
    const std::string text(env);
    const unsigned long long v = std::stoull(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw InvalidArgument(std::string(kSeedEnv) + " is not an unsigned integer: '" + env + "'");
  }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Interval-based propagation toolkit: CFG intervals, propagation simulation and a bug detector."};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "help for every subcommand");

  std::optional<std::uint64_t> seed_flag;
  bool quiet = false;
  std::string out_path;
  auto add_seed = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed_flag, "random seed (default " + std::to_string(kDefaultSeed) + ", or $" +
                                             kSeedEnv + ")");
  };
  auto add_out = [&](CLI::App* cmd) { cmd->add_option("--out", out_path, "output file (default stdout)"); };
  app.add_flag("-q,--quiet", quiet, "no progress logs on stderr");

  auto emit = [&](const std::string& text) {
    if (out_path.empty()) {
      out << text;
    } else {
      write_file(out_path, text);
    }
  };
  auto log = [&](const std::string& line) {
    if (!quiet) err << line << '\n';
  };

  // parse
  std::string source_path;
  auto* parse_cmd = app.add_subcommand("parse", "parse a MiniLang file and print it in canonical form");
  parse_cmd->add_option("file", source_path, "source file")->required();
  add_out(parse_cmd);

  // cfg
  std::string method;
  int depth = 1;
  bool dot = false;
  auto* cfg_cmd = app.add_subcommand("cfg", "build the method graph of one method as JSON");
  cfg_cmd->add_option("file", source_path, "source file")->required();
  cfg_cmd->add_option("--method", method, "target method (default: first method)");
  cfg_cmd->add_option("--depth", depth, "inlining depth 0, 1 or 2")->capture_default_str();
  cfg_cmd->add_flag("--dot", dot, "emit Graphviz instead of JSON");
  add_out(cfg_cmd);

  // intervals
  std::string graph_path;
  std::string dot_dir;
  auto* intervals_cmd = app.add_subcommand("intervals", "interval partition and derived sequence of a graph");
  intervals_cmd->add_option("--graph", graph_path, "graph JSON")->required();
  intervals_cmd->add_option("--dot", dot_dir, "directory for one DOT file per level");
  add_out(intervals_cmd);

  // simulate
  std::string sim_mode = "ibpm";
  std::size_t trials = 0;
  std::string family = "structured";
  std::size_t max_nodes = 40;
  auto* simulate_cmd = app.add_subcommand("simulate", "set-based message-passing simulation");
  auto* sim_graph = simulate_cmd->add_option("--graph", graph_path, "graph JSON");
  simulate_cmd->add_option("--mode", sim_mode, "standard or ibpm")
      ->check(CLI::IsMember({"standard", "ibpm"}))
      ->capture_default_str();
  auto* sim_trials = simulate_cmd->add_option("--trials", trials, "random trials, written as CSV");
  simulate_cmd->add_option("--family", family, "trial graphs: structured, irreducible or connected")
      ->check(CLI::IsMember({"structured", "irreducible", "connected"}))
      ->capture_default_str();
  simulate_cmd->add_option("--max-nodes", max_nodes, "largest trial graph")->capture_default_str();
  sim_graph->excludes(sim_trials);
  add_seed(simulate_cmd);
  add_out(simulate_cmd);

  // gen-corpus
  CorpusConfig corpus_config;
  std::string kinds_text = "NullDeref,IndexOob";
  auto* gen_cmd = app.add_subcommand("gen-corpus", "generate a labelled MiniLang corpus");
  gen_cmd->add_option("--n", corpus_config.n, "number of methods")->capture_default_str();
  gen_cmd->add_option("--kinds", kinds_text, "comma-separated bug kinds")->capture_default_str();
  gen_cmd->add_option("--ratio", corpus_config.ratio, "clean : buggy ratio")->capture_default_str();
  gen_cmd->add_option("--depth", corpus_config.depth, "inlining depth 0, 1 or 2")->capture_default_str();
  gen_cmd->add_option("--partners", corpus_config.partners, "clean partners per buggy method")
      ->capture_default_str();
  gen_cmd->add_option("--test-fraction", corpus_config.test_fraction, "share of methods in the test split")
      ->capture_default_str();
  add_seed(gen_cmd);
  add_out(gen_cmd);

  // train
  TrainOptions train_opts;
  std::string model_path;
  std::string log_path;
  auto* train_cmd = app.add_subcommand("train", "train a detector and save the best checkpoint");
  train_opts.add(train_cmd);
  train_cmd->add_option("--mode", train_opts.mode, "propagation: standard or ibpm")
      ->check(CLI::IsMember({"standard", "ibpm"}));
  train_cmd->add_option("--model", model_path, "checkpoint to write")->required();
  add_seed(train_cmd);
  add_out(train_cmd);

  // eval
  std::string split = "test";
  std::string ks_text = "1,3,5";
  std::string format = "json";
  double threshold = kMethodThreshold;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on a corpus split");
  eval_cmd->add_option("--model", model_path, "checkpoint")->required();
  eval_cmd->add_option("--corpus", train_opts.corpus, "corpus file")->required();
  eval_cmd->add_option("--split", split, "train or test")->capture_default_str();
  eval_cmd->add_option("--k", ks_text, "comma-separated top-k values")->capture_default_str();
  eval_cmd->add_option("--format", format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  eval_cmd->add_option("--threshold", threshold, "method-level decision threshold")->capture_default_str();
  add_out(eval_cmd);

  // predict
  std::size_t k = 3;
  auto* predict_cmd = app.add_subcommand("predict", "rank the statements of one method");
  predict_cmd->add_option("--model", model_path, "checkpoint")->required();
  predict_cmd->add_option("--source", source_path, "MiniLang source file")->required();
  predict_cmd->add_option("--method", method, "target method (default: first method)");
  predict_cmd->add_option("--k", k, "statements to report")->capture_default_str();
  predict_cmd->add_option("--depth", depth, "inlining depth 0, 1 or 2")->capture_default_str();
  predict_cmd->add_option("--threshold", threshold, "method-level decision threshold")->capture_default_str();
  add_out(predict_cmd);

  // ablate
  auto* ablate_cmd = app.add_subcommand("ablate", "train standard and ibpm models side by side");
  train_opts.add(ablate_cmd);
  add_seed(ablate_cmd);
  add_out(ablate_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    const std::uint64_t seed = seed_flag ? *seed_flag : default_seed();
    auto epoch_logger = [&](const std::string& prefix) {
      return [&, prefix](const EpochLog& e) {
        std::ostringstream line;
        line << prefix << "epoch " << e.epoch << " loss " << e.loss << " holdout_f1 " << e.holdout_f1;
        log(line.str());
      };
    };
    auto train_config = [&] {
      TrainConfig tc = train_opts.train;
      tc.seed = seed;
      return tc;
    };

    if (*parse_cmd) {
      minilang::Program p = minilang::parse(read_file(source_path));
      emit(minilang::print(p));
    } else if (*cfg_cmd) {
      const minilang::Program p = minilang::parse(read_file(source_path));
      if (p.methods.empty()) throw InvalidArgument("no methods in " + source_path);
      const std::string name = method.empty() ? p.methods.front().name : method;
      const minilang::ClassTable ct(p.classes);
      const auto mg = minilang::inline_calls(minilang::build_cfg(p, ct, name), p, ct, depth);
      emit(dot ? graph_to_dot(mg.graph, name) : minilang::method_graph_to_json(mg).dump(2) + "\n");
    } else if (*intervals_cmd) {
      const Graph g = load_graph_file(graph_path);
      const DerivedSequence seq = derive(g);
      json doc;
      doc["partition"] = partition_to_json(g, seq.levels.front().partition);
      doc["sequence"] = sequence_to_json(seq);
      if (!dot_dir.empty()) {
        std::filesystem::create_directories(dot_dir);
        for (std::size_t i = 0; i < seq.levels.size(); ++i) {
          const std::string name = "level" + std::to_string(i + 1);
          write_file((std::filesystem::path(dot_dir) / (name + ".dot")).string(),
                     graph_to_dot(seq.levels[i].graph, name));
        }
      }
      emit(doc.dump(2) + "\n");
    } else if (*simulate_cmd) {
      if (trials > 0) {
        Rng rng(seed);
        std::ostringstream csv;
        csv << "trial,n,edges,diameter,messages_std,messages_ibpm,tau,bound,holds,deduplicated\n";
        for (std::size_t t = 0; t < trials; ++t) {
          const Graph g = family == "structured"    ? random_structured_cfg(rng, 3, max_nodes)
                          : family == "irreducible" ? random_irreducible_cfg(rng, 4, max_nodes)
                                                    : random_weakly_connected(rng, std::min<std::size_t>(max_nodes, 12));
          const StandardRun std_run = run_to_fixed_point(g);
          csv << t << ',' << g.node_count() << ',' << message_edge_count(g) << ','
              << diameter(g, DistanceMode::Symmetrized) << ',' << std_run.ledger.total << ',';
          // Random connected graphs need not have an entry reaching every node.
          try {
            const DerivedSequence seq = derive(g);
            const std::uint64_t total = run_ibpm_to_fixed_point(seq).ledger.total;
            const IbpmBound b = ibpm_bound(seq, total);
            csv << total << ',' << b.tau << ',' << b.bound << ',' << (b.holds ? 1 : 0) << ','
                << (seq.deduplication_fired() ? 1 : 0) << '\n';
          } catch (const InvalidGraph&) {
            csv << ",,,,\n";
          }
        }
        emit(csv.str());
      } else {
        if (graph_path.empty()) throw CLI::RequiredError("--graph or --trials");
        const Graph g = load_graph_file(graph_path);
        json doc;
        doc["mode"] = sim_mode;
        const DerivedSequence seq = derive(g);
        const std::uint64_t ibpm_total = run_ibpm_to_fixed_point(seq).ledger.total;
        if (sim_mode == "standard") {
          const StandardRun run = run_to_fixed_point(g);
          doc["rounds"] = run.rounds;
          doc["total"] = run.ledger.total;
          doc["ledger"] = ledger_to_json(run.ledger);
        } else {
          const IbpmRun run = run_ibpm_to_fixed_point(seq);
          std::size_t rounds = 0;
          for (const LedgerEntry& e : run.ledger.breakdown) rounds += e.rounds;
          doc["rounds"] = rounds;
          doc["total"] = run.ledger.total;
          doc["ledger"] = ledger_to_json(run.ledger);
        }
        const IbpmBound b = ibpm_bound(seq, ibpm_total);
        doc["tau"] = b.tau;
        doc["bound"] = b.bound;
        doc["holds"] = b.holds;
        doc["deduplicated"] = seq.deduplication_fired();
        emit(doc.dump(2) + "\n");
      }
    } else if (*gen_cmd) {
      corpus_config.kinds = parse_kinds(kinds_text);
      corpus_config.seed = seed;
      const Corpus c = generate_corpus(corpus_config);
      log("generated " + std::to_string(c.examples.size()) + " methods (" +
          std::to_string(c.split("train").size()) + " train, " + std::to_string(c.split("test").size()) + " test)");
      emit(write_corpus(c));
    } else if (*train_cmd) {
      const Corpus c = load_corpus(train_opts.corpus);
      const TrainResult r = train(c, train_opts.model_config(seed), train_config(), epoch_logger(""));
      r.model.save(model_path);
      log("best epoch " + std::to_string(r.best_epoch) + ", checkpoint " + model_path);
      emit(train_log_json(r).dump(2) + "\n");
    } else if (*eval_cmd) {
      const Model m = Model::load(model_path);
      const EvalReport r = evaluate(m, load_corpus(train_opts.corpus), split, parse_ks(ks_text), threshold);
      emit(format == "csv" ? report_to_csv(r) : report_to_json(r).dump(2) + "\n");
    } else if (*predict_cmd) {
      const Model m = Model::load(model_path);
      emit(predict_source(m, read_file(source_path), method, k, depth, threshold).dump(2) + "\n");
    } else if (*ablate_cmd) {
      const Corpus c = load_corpus(train_opts.corpus);
      const json report = ablate(c, train_opts.model_config(seed), train_config(),
                                 [&](const std::string& mode, const EpochLog& e) { epoch_logger(mode + " ")(e); });
      emit(report.dump(2) + "\n");
    }
  } catch (const CLI::ParseError& e) {
    err << "error: usage: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.kind() << ": " << e.what() << '\n';
    return 1;
  } catch (const nlohmann::json::exception& e) {
    err << "error: format: " << e.what() << '\n';
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: io: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

int run_cli(int argc, const char* const* argv) { return run_cli(argc, argv, std::cout, std::cerr); }

}  // namespace ibpm
