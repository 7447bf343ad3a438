// SPDX-License-Identifier: Apache-2.0
//
// Synthetic labelled dataset: injected-bug methods, clean partners picked by
// token similarity, a train/test split, and a JSON-lines file format.
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ibpm/minilang/generator.hpp"
#include "ibpm/minilang/method_graph.hpp"
#include "ibpm/model.hpp"

namespace ibpm {

inline constexpr int kCorpusVersion = 1;

struct CorpusConfig {
  std::size_t n = 400;
  std::vector<minilang::BugKind> kinds = {minilang::BugKind::NullDeref, minilang::BugKind::IndexOob};
  double ratio = 3.0;  // clean : buggy
  std::uint64_t seed = 1;
  int depth = 1;              // inlining depth of the example graphs
  std::size_t partners = 3;   // clean partners per buggy method
  double test_fraction = 0.25;

  void validate() const;
  friend bool operator==(const CorpusConfig&, const CorpusConfig&) = default;
};

struct Example {
  std::size_t id = 0;
  std::string split;  // "train" or "test"
  minilang::BugKind kind = minilang::BugKind::Clean;
  int line = 0;  // faulty line, 0 when clean
  int depth = 0;
  std::uint64_t seed = 0;  // seed of the generated program
  std::string method;      // target method
  std::string source;      // whole program, printed
  std::int64_t partner_of = -1;  // id of the buggy example a clean one was paired with

  bool buggy() const { return kind != minilang::BugKind::Clean; }
  friend bool operator==(const Example&, const Example&) = default;
};

struct Corpus {
  CorpusConfig config;
  std::vector<Example> examples;

  std::vector<const Example*> split(const std::string& name) const;
  friend bool operator==(const Corpus&, const Corpus&) = default;
};

// Throws InvalidArgument when the configuration is out of range or when not
// enough injectable programs turn up for the requested ratio.
Corpus generate_corpus(const CorpusConfig& config, const minilang::GeneratorConfig& generator = {});

// Token sequence of one method's printed text; the basis of similarity and
// of the split-hygiene hash.
std::vector<std::string> method_tokens(const minilang::Program& program, const std::string& method);
std::uint64_t canonical_hash(const std::vector<std::string>& tokens);

// Cosine similarity of token-bigram count vectors; 0 when either side has no
// bigrams.
double bigram_cosine(const std::vector<std::string>& a, const std::vector<std::string>& b);

// Pool indices ranked by similarity to `query`, best first; ties keep pool
// order.
std::vector<std::pair<std::size_t, double>> pair_similar(const std::vector<std::string>& query,
                                                         const std::vector<std::vector<std::string>>& pool);

std::string write_corpus(const Corpus& corpus);
// Throws FormatError naming the offending line.
Corpus read_corpus(const std::string& text);
void save_corpus(const Corpus& corpus, const std::string& path);
Corpus load_corpus(const std::string& path);

// Rebuilds the labelled graph of an example (parse, CFG, inline, label).
minilang::MethodGraph example_graph(const Example& example);
GraphInput graph_input(const minilang::MethodGraph& mg);
// Statement labels aligned with the rankable nodes.
Labels graph_labels(const minilang::MethodGraph& mg);

}  // namespace ibpm
