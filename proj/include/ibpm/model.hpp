// SPDX-License-Identifier: Apache-2.0
//
// Gated graph network over statement-level graphs with two propagation
// engines: plain rounds over the whole graph, and interval-local rounds that
// climb and then descend the derived-graph hierarchy.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ibpm/autodiff.hpp"
#include "ibpm/graph.hpp"
#include "ibpm/gru.hpp"
#include "ibpm/intervals.hpp"
#include "ibpm/propagation.hpp"

namespace ibpm {

enum class PropagationMode { Standard, Ibpm };

std::string to_string(PropagationMode mode);
PropagationMode propagation_mode_from_string(const std::string& s);

struct ModelConfig {
  std::size_t hidden = 100;
  std::size_t embedding = 100;
  std::size_t rounds = 8;           // L, whole-graph rounds in Standard mode
  std::size_t interval_rounds = 2;  // L_int, rounds per interval per level
  std::size_t edge_kinds = kBuiltinEdgeKinds;
  PropagationMode mode = PropagationMode::Ibpm;
  std::size_t cycles = 1;  // ascent/descent passes per forward
  // Each interval runs as many rounds as its diameter instead of L_int. Used
  // to line the model's message count up with the set simulation.
  bool adaptive_rounds = false;
  std::uint64_t seed = 1;

  void validate() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

nlohmann::ordered_json config_to_json(const ModelConfig& c);
ModelConfig config_from_json(const nlohmann::json& j);

// Token vocabulary. Id 0 is the unknown token, id 1 marks an empty statement.
class Vocab {
 public:
  static constexpr std::size_t kUnknown = 0;
  static constexpr std::size_t kEmpty = 1;

  Vocab();
  // Every distinct token seen, in sorted order after the reserved ones.
  static Vocab build(const std::vector<std::vector<std::vector<std::string>>>& token_lists);

  std::size_t id(const std::string& token) const;
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  nlohmann::ordered_json to_json() const;
  static Vocab from_json(const nlohmann::json& j);
  friend bool operator==(const Vocab&, const Vocab&) = default;

 private:
  std::vector<std::string> tokens_;
  std::map<std::string, std::size_t> index_;
};

// What the model consumes: a typed-edge graph with an entry, token lists per
// node, and the nodes whose statement scores are ranked.
struct GraphInput {
  Graph graph;
  std::vector<std::vector<std::string>> tokens;
  std::vector<NodeId> rankable;
};

// Precomputed propagation plan for one graph. Building it runs the interval
// analysis once so that training epochs do not repeat it.
struct EncodedGraph {
  struct Unit {
    std::size_t interval = 0;
    std::vector<NodeId> members;
    // (src, dst) rows per edge kind, both directions of every internal edge.
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> pairs;
    std::uint64_t cf_edges = 0;
    std::size_t diameter = 0;
    std::vector<Edge> edges;
  };
  struct Level {
    std::size_t nodes = 0;
    std::vector<Unit> units;              // intervals with internal edges
    std::vector<std::size_t> merge_into;  // node -> node id one level up
  };

  std::size_t nodes = 0;
  std::vector<std::vector<std::size_t>> token_ids;
  std::vector<NodeId> rankable;
  Unit whole;  // the full first-order graph
  std::vector<Level> levels;
  std::optional<Unit> top;  // whole top graph of an irreducible sequence
  DerivedSequence sequence;
};

// Throws InvalidArgument for edge kinds the config does not know about. The
// interval plan is only built for Ibpm mode, which needs an entry node that
// reaches every node.
EncodedGraph encode(const GraphInput& input, const Vocab& vocab, const ModelConfig& config);

struct MergeRecord {
  nn::Var alpha;                      // [members x d], softmax per interval and dimension
  std::vector<std::size_t> segment;   // member row -> merged row
  std::size_t merged_rows = 0;
};

struct Merged {
  nn::Var embeddings;
  MergeRecord record;
};

// Merges rows sharing a segment id into one row: alpha = softmax over the
// segment per dimension, merged = sum(alpha * h).
Merged merge_interval(nn::Var h, std::span<const std::size_t> segment, std::size_t segments);
// Member rows receive alpha * merged, reusing the merge-time alpha.
nn::Var split_interval(nn::Var merged, const MergeRecord& record);

struct PhaseTrace {
  Phase phase = Phase::Ascend;
  std::size_t level = 0;
  std::vector<NodeId> active;  // sorted dense ids at that level
  std::vector<Edge> edges;     // edges that carried messages
};

struct ForwardTrace {
  MessageLedger ledger;  // ControlFlow messages only
  std::vector<PhaseTrace> phases;
  std::vector<Tensor> alphas;  // one per merge, in schedule order
};

struct ForwardResult {
  nn::Var embeddings;
  nn::Var method_logit;     // [1 x 1]
  nn::Var statement_logits;  // [rankable x 1]
};

struct Prediction {
  double method = 0.0;
  std::vector<double> statements;  // aligned with rankable
};

struct Labels {
  bool buggy = false;
  std::vector<double> statements;  // aligned with rankable
};

class Model {
 public:
  Model(ModelConfig config, Vocab vocab);
  Model(ModelConfig config, Vocab vocab, nn::ParamStore params);

  const ModelConfig& config() const { return config_; }
  const Vocab& vocab() const { return vocab_; }
  nn::ParamStore& params() { return params_; }
  const nn::ParamStore& params() const { return params_; }

  nn::Var init_nodes(nn::Tape& tape, const EncodedGraph& g) const;
  nn::Var propagate_standard(nn::Tape& tape, nn::Var h, const EncodedGraph& g, ForwardTrace* trace) const;
  nn::Var propagate_ibpm(nn::Tape& tape, nn::Var h, const EncodedGraph& g, ForwardTrace* trace) const;
  // Method logit from the mean embedding, statement logits per rankable node.
  ForwardResult readout(nn::Tape& tape, nn::Var h, const EncodedGraph& g) const;

  ForwardResult forward(nn::Tape& tape, const EncodedGraph& g, ForwardTrace* trace = nullptr) const;
  // Method BCE plus, for buggy methods, the mean statement BCE.
  // `positive_weight` scales the method term of buggy methods.
  nn::Var loss(nn::Tape& tape, const EncodedGraph& g, const Labels& labels, double positive_weight = 1.0) const;
  Prediction predict(const EncodedGraph& g) const;

  // One message-passing round restricted to `units`; nodes outside them keep
  // their state.
  nn::Var round(nn::Tape& tape, nn::Var h, const std::vector<const EncodedGraph::Unit*>& units) const;

  nlohmann::ordered_json checkpoint() const;
  static Model from_checkpoint(const nlohmann::json& j);
  void save(const std::string& path) const;
  static Model load(const std::string& path);

 private:
  void register_params();
  nn::Var run_units(nn::Tape& tape, nn::Var h, const std::vector<const EncodedGraph::Unit*>& units,
                    Phase phase, std::size_t level, ForwardTrace* trace) const;

  ModelConfig config_;
  Vocab vocab_;
  nn::ParamStore params_;
  nn::GruCell encoder_;
  nn::GruCell cell_;
};

// Indices of the n largest scores, highest first; ties go to the lower index.
std::vector<std::size_t> top_n(std::span<const double> scores, std::size_t n);

}  // namespace ibpm
