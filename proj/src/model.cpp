// SPDX-License-Identifier: Apache-2.0
#include "ibpm/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "ibpm/checkpoint.hpp"

namespace ibpm {

using nn::Tape;
using nn::Var;

std::string to_string(PropagationMode mode) {
  return mode == PropagationMode::Standard ? "standard" : "ibpm";
}

PropagationMode propagation_mode_from_string(const std::string& s) {
  if (s == "standard") return PropagationMode::Standard;
  if (s == "ibpm") return PropagationMode::Ibpm;
  throw InvalidArgument("unknown propagation mode '" + s + "' (expected standard or ibpm)");
}

void ModelConfig::validate() const {
  if (hidden == 0 || embedding == 0) throw InvalidArgument("hidden and embedding sizes must be positive");
  if (rounds == 0 || interval_rounds == 0) throw InvalidArgument("rounds and interval_rounds must be >= 1");
  if (edge_kinds == 0 || edge_kinds > 255) throw InvalidArgument("edge_kinds must be in [1, 255]");
  if (cycles == 0) throw InvalidArgument("cycles must be >= 1");
}

nlohmann::ordered_json config_to_json(const ModelConfig& c) {
  return {{"hidden", c.hidden},
          {"embedding", c.embedding},
          {"rounds", c.rounds},
          {"interval_rounds", c.interval_rounds},
          {"edge_kinds", c.edge_kinds},
          {"mode", to_string(c.mode)},
          {"cycles", c.cycles},
          {"adaptive_rounds", c.adaptive_rounds},
          {"seed", c.seed}};
}

ModelConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw FormatError("model config must be a JSON object");
  ModelConfig c;
  try {
    c.hidden = j.value("hidden", c.hidden);
    c.embedding = j.value("embedding", c.embedding);
    c.rounds = j.value("rounds", c.rounds);
    c.interval_rounds = j.value("interval_rounds", c.interval_rounds);
    c.edge_kinds = j.value("edge_kinds", c.edge_kinds);
    c.mode = propagation_mode_from_string(j.value("mode", to_string(c.mode)));
    c.cycles = j.value("cycles", c.cycles);
    c.adaptive_rounds = j.value("adaptive_rounds", c.adaptive_rounds);
    c.seed = j.value("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("model config: ") + e.what());
  }
  c.validate();
  return c;
}

// ---- Vocab ---------------------------------------------------------------

Vocab::Vocab() : tokens_{"<unk>", "<empty>"} {
  for (std::size_t i = 0; i < tokens_.size(); ++i) index_[tokens_[i]] = i;
}

Vocab Vocab::build(const std::vector<std::vector<std::vector<std::string>>>& token_lists) {
  std::set<std::string> seen;
  for (const auto& graph : token_lists)
    for (const auto& node : graph) seen.insert(node.begin(), node.end());
  Vocab v;
  for (const auto& t : seen) {
    if (v.index_.count(t)) continue;
    v.index_[t] = v.tokens_.size();
    v.tokens_.push_back(t);
  }
  return v;
}

std::size_t Vocab::id(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnknown : it->second;
}

nlohmann::ordered_json Vocab::to_json() const { return tokens_; }

Vocab Vocab::from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() < 2 || j[0] != "<unk>" || j[1] != "<empty>") {
    throw FormatError("vocabulary must be an array starting with <unk>, <empty>");
  }
  Vocab v;
  for (std::size_t i = 2; i < j.size(); ++i) {
    const std::string t = j[i].get<std::string>();
    if (v.index_.count(t)) throw FormatError("duplicate vocabulary token '" + t + "'");
    v.index_[t] = v.tokens_.size();
    v.tokens_.push_back(t);
  }
  return v;
}

// ---- encoding --------------------------------------------------------------

namespace {

EncodedGraph::Unit make_unit(const Graph& g, std::vector<NodeId> members, std::size_t interval,
                             bool all_kinds, std::size_t kinds) {
  EncodedGraph::Unit unit;
  unit.interval = interval;
  unit.members = std::move(members);
  unit.pairs.resize(kinds);
  std::vector<bool> inside(g.node_count(), false);
  for (NodeId v : unit.members) inside[v] = true;
  for (const Edge& e : g.edges()) {
    if (e.self_loop() || !inside[e.src] || !inside[e.dst]) continue;
    if (!all_kinds && e.kind != EdgeKind::ControlFlow) continue;
    const auto k = static_cast<std::size_t>(e.kind);
    unit.pairs[k].emplace_back(e.src, e.dst);
    unit.pairs[k].emplace_back(e.dst, e.src);
    unit.edges.push_back(e);
    if (e.kind == EdgeKind::ControlFlow) ++unit.cf_edges;
  }
  std::sort(unit.members.begin(), unit.members.end());
  if (unit.cf_edges > 0) {
    GraphBuilder b;
    std::vector<NodeId> local(g.node_count(), 0);
    for (std::size_t i = 0; i < unit.members.size(); ++i) local[unit.members[i]] = b.add_node();
    for (const Edge& e : unit.edges) {
      if (e.kind == EdgeKind::ControlFlow) b.add_edge(local[e.src], local[e.dst]);
    }
    const Graph sub = b.build();
    if (weakly_connected(sub)) unit.diameter = diameter(sub, DistanceMode::Symmetrized);
  }
  return unit;
}

}  // namespace

EncodedGraph encode(const GraphInput& input, const Vocab& vocab, const ModelConfig& config) {
  config.validate();
  const Graph& g = input.graph;
  if (input.tokens.size() != g.node_count()) {
    throw InvalidArgument("token lists (" + std::to_string(input.tokens.size()) + ") do not match nodes (" +
                          std::to_string(g.node_count()) + ")");
  }
  for (const Edge& e : g.edges()) {
    if (static_cast<std::size_t>(e.kind) >= config.edge_kinds) {
      throw InvalidArgument("unknown edge type " + to_string(e.kind));
    }
  }
  EncodedGraph out;
  out.nodes = g.node_count();
  for (const auto& tokens : input.tokens) {
    std::vector<std::size_t> ids;
    for (const auto& t : tokens) ids.push_back(vocab.id(t));
    if (ids.empty()) ids.push_back(Vocab::kEmpty);
    out.token_ids.push_back(std::move(ids));
  }
  for (NodeId v : input.rankable) {
    if (!g.contains(v)) throw InvalidArgument("rankable node " + std::to_string(v) + " is not in the graph");
  }
  out.rankable = input.rankable;

  std::vector<NodeId> all(g.node_count());
  std::iota(all.begin(), all.end(), NodeId{0});
  out.whole = make_unit(g, all, 0, true, config.edge_kinds);

  if (config.mode == PropagationMode::Standard) return out;

  out.sequence = derive(g);
  const auto& levels = out.sequence.levels;
  for (std::size_t k = 0; k < levels.size(); ++k) {
    EncodedGraph::Level level;
    level.nodes = levels[k].graph.node_count();
    const auto& intervals = levels[k].partition.intervals;
    for (std::size_t i = 0; i < intervals.size(); ++i) {
      auto unit = make_unit(levels[k].graph, intervals[i].members, i, k == 0, config.edge_kinds);
      if (!unit.edges.empty()) level.units.push_back(std::move(unit));
    }
    if (k + 1 < levels.size()) {
      const auto& up = levels[k + 1];
      std::vector<std::size_t> node_of_interval(up.provenance.size());
      for (std::size_t w = 0; w < up.provenance.size(); ++w) node_of_interval[up.provenance[w]] = w;
      for (NodeId v = 0; v < level.nodes; ++v) {
        level.merge_into.push_back(node_of_interval[levels[k].partition.node_to_interval[v]]);
      }
    }
    out.levels.push_back(std::move(level));
  }
  if (out.sequence.terminal == Terminal::Irreducible) {
    const Graph& top = levels.back().graph;
    std::vector<NodeId> nodes(top.node_count());
    std::iota(nodes.begin(), nodes.end(), NodeId{0});
    out.top = make_unit(top, nodes, 0, levels.size() == 1, config.edge_kinds);
  }
  return out;
}

// ---- merge / split ---------------------------------------------------------

Merged merge_interval(Var h, std::span<const std::size_t> segment, std::size_t segments) {
  Var alpha = nn::segment_softmax(h, segment, segments);
  Var merged = nn::segment_sum(nn::mul(alpha, h), segment, segments);
  return Merged{merged, MergeRecord{alpha, {segment.begin(), segment.end()}, segments}};
}

Var split_interval(Var merged, const MergeRecord& record) {
  if (merged.value().rows() != record.merged_rows) {
    throw InvalidArgument("split of " + std::to_string(merged.value().rows()) + " rows with a record for " +
                          std::to_string(record.merged_rows));
  }
  if (merged.value().cols() != record.alpha.value().cols()) {
    throw ShapeError("split: merged embedding " + merged.value().shape_string() + " vs alpha " +
                     record.alpha.value().shape_string());
  }
  return nn::mul(record.alpha, nn::gather_rows(merged, record.segment));
}

// ---- model -----------------------------------------------------------------

Model::Model(ModelConfig config, Vocab vocab)
    : config_(config),
      vocab_(std::move(vocab)),
      encoder_("encoder", config.embedding, config.hidden),
      cell_("cell", config.hidden, config.hidden) {
  config_.validate();
  register_params();
}

Model::Model(ModelConfig config, Vocab vocab, nn::ParamStore params) : Model(config, std::move(vocab)) {
  if (params.names() != params_.names()) throw FormatError("checkpoint parameters do not match the model");
  for (const auto& name : params_.names()) {
    if (!params.get(name).same_shape(params_.get(name))) {
      throw FormatError("parameter '" + name + "' has shape " + params.get(name).shape_string() +
                        ", expected " + params_.get(name).shape_string());
    }
  }
  params_ = std::move(params);
}

void Model::register_params() {
  Rng rng(config_.seed);
  const std::size_t d = config_.hidden;
  params_.add_glorot("embed", vocab_.size(), config_.embedding, rng);
  encoder_.register_params(params_, rng);
  for (std::size_t k = 0; k < config_.edge_kinds; ++k) {
    params_.add_glorot("msg." + std::to_string(k) + ".W", d, d, rng);
  }
  params_.add_glorot("msg.combine", d * config_.edge_kinds, d, rng);
  cell_.register_params(params_, rng);
  for (const std::string head : {"method", "stmt"}) {
    params_.add_glorot(head + ".W1", d, d, rng);
    params_.add_zeros(head + ".b1", {1, d});
    params_.add_glorot(head + ".W2", d, 1, rng);
    params_.add_zeros(head + ".b2", {1, 1});
  }
}

Var Model::init_nodes(Tape& tape, const EncodedGraph& g) const {
  std::size_t steps = 0;
  for (const auto& ids : g.token_ids) steps = std::max(steps, ids.size());
  Var embed = tape.param("embed");
  Var h = tape.constant(Tensor::matrix(g.nodes, config_.hidden));
  std::vector<std::size_t> ids(g.nodes);
  std::vector<double> mask(g.nodes);
  for (std::size_t t = 0; t < steps; ++t) {
    bool all = true;
    for (std::size_t v = 0; v < g.nodes; ++v) {
      const bool live = t < g.token_ids[v].size();
      ids[v] = live ? g.token_ids[v][t] : Vocab::kEmpty;
      mask[v] = live ? 1.0 : 0.0;
      all = all && live;
    }
    Var next = encoder_.step(tape, nn::gather_rows(embed, ids), h);
    h = all ? next : nn::blend_rows(mask, next, h);
  }
  return h;
}

Var Model::round(Tape& tape, Var h, const std::vector<const EncodedGraph::Unit*>& units) const {
  const std::size_t n = h.value().rows();
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> pairs(config_.edge_kinds);
  std::vector<double> mask(n, 0.0);
  for (const auto* unit : units) {
    for (std::size_t k = 0; k < config_.edge_kinds; ++k) {
      pairs[k].insert(pairs[k].end(), unit->pairs[k].begin(), unit->pairs[k].end());
    }
    for (NodeId v : unit->members) mask[v] = 1.0;
  }
  std::vector<Var> typed;
  for (std::size_t k = 0; k < config_.edge_kinds; ++k) {
    Var summed = nn::neighbour_sum(h, pairs[k]);
    typed.push_back(nn::tanh(nn::matmul(summed, tape.param("msg." + std::to_string(k) + ".W"))));
  }
  Var message = nn::tanh(nn::matmul(nn::concat_cols(typed), tape.param("msg.combine")));
  Var next = cell_.step(tape, message, h);
  if (std::all_of(mask.begin(), mask.end(), [](double m) { return m == 1.0; })) return next;
  return nn::blend_rows(mask, next, h);
}

Var Model::run_units(Tape& tape, Var h, const std::vector<const EncodedGraph::Unit*>& units, Phase phase,
                     std::size_t level, ForwardTrace* trace) const {
  std::vector<std::size_t> rounds;
  std::size_t most = 0;
  for (const auto* unit : units) {
    rounds.push_back(config_.adaptive_rounds ? unit->diameter : config_.interval_rounds);
    most = std::max(most, rounds.back());
  }
  for (std::size_t r = 0; r < most; ++r) {
    std::vector<const EncodedGraph::Unit*> live;
    std::uint64_t messages = 0;
    for (std::size_t i = 0; i < units.size(); ++i) {
      if (rounds[i] <= r) continue;
      live.push_back(units[i]);
      messages += units[i]->cf_edges;
    }
    h = round(tape, h, live);
    if (trace) {
      trace->ledger.per_round.push_back(messages);
      trace->ledger.total += messages;
    }
  }
  if (trace) {
    PhaseTrace pt{phase, level, {}, {}};
    for (std::size_t i = 0; i < units.size(); ++i) {
      const auto* unit = units[i];
      if (unit->cf_edges > 0) {
        trace->ledger.breakdown.push_back(
            LedgerEntry{phase, level, unit->interval, rounds[i], rounds[i] * unit->cf_edges});
      }
      if (rounds[i] == 0) continue;
      pt.active.insert(pt.active.end(), unit->members.begin(), unit->members.end());
      pt.edges.insert(pt.edges.end(), unit->edges.begin(), unit->edges.end());
    }
    std::sort(pt.active.begin(), pt.active.end());
    trace->phases.push_back(std::move(pt));
  }
  return h;
}

Var Model::propagate_standard(Tape& tape, Var h, const EncodedGraph& g, ForwardTrace* trace) const {
  std::vector<const EncodedGraph::Unit*> units{&g.whole};
  for (std::size_t r = 0; r < config_.rounds; ++r) {
    h = round(tape, h, units);
    if (trace) {
      trace->ledger.per_round.push_back(g.whole.cf_edges);
      trace->ledger.total += g.whole.cf_edges;
    }
  }
  if (trace) {
    if (g.whole.cf_edges > 0) {
      trace->ledger.breakdown.push_back(
          LedgerEntry{Phase::Top, 0, 0, config_.rounds, config_.rounds * g.whole.cf_edges});
    }
    trace->phases.push_back(PhaseTrace{Phase::Top, 0, g.whole.members, g.whole.edges});
  }
  return h;
}

Var Model::propagate_ibpm(Tape& tape, Var h, const EncodedGraph& g, ForwardTrace* trace) const {
  if (g.levels.empty()) throw InvalidArgument("graph was not encoded for interval propagation");
  const std::size_t n = g.levels.size();
  const bool irreducible = g.top.has_value();
  const std::size_t ascend = n - 1;
  auto units_of = [](const EncodedGraph::Level& level) {
    std::vector<const EncodedGraph::Unit*> out;
    for (const auto& u : level.units) out.push_back(&u);
    return out;
  };
  auto merge = [&](Var cur, std::size_t k, std::vector<MergeRecord>& records) {
    Merged m = merge_interval(cur, g.levels[k].merge_into, g.levels[k + 1].nodes);
    if (trace) trace->alphas.push_back(m.record.alpha.value());
    records[k] = std::move(m.record);
    return m.embeddings;
  };

  for (std::size_t cycle = 0; cycle < config_.cycles; ++cycle) {
    std::vector<MergeRecord> records(n);
    Var cur = h;
    for (std::size_t k = 0; k < ascend; ++k) {
      if (k > 0) cur = merge(cur, k - 1, records);
      cur = run_units(tape, cur, units_of(g.levels[k]), Phase::Ascend, k, trace);
    }
    if (irreducible) {
      if (n > 1) cur = merge(cur, n - 2, records);
      cur = run_units(tape, cur, {&*g.top}, Phase::Top, n - 1, trace);
    }
    const std::size_t highest = irreducible ? n - 1 : (ascend > 0 ? ascend - 1 : 0);
    for (std::size_t k = highest; k-- > 0;) {
      cur = split_interval(cur, records[k]);
      cur = run_units(tape, cur, units_of(g.levels[k]), Phase::Descend, k, trace);
    }
    h = cur;
  }
  return h;
}

ForwardResult Model::readout(Tape& tape, Var h, const EncodedGraph& g) const {
  auto head = [&](const std::string& name, Var x) {
    Var hidden = nn::tanh(nn::add_row(nn::matmul(x, tape.param(name + ".W1")), tape.param(name + ".b1")));
    return nn::add_row(nn::matmul(hidden, tape.param(name + ".W2")), tape.param(name + ".b2"));
  };
  std::vector<std::size_t> rows(g.rankable.begin(), g.rankable.end());
  return ForwardResult{h, head("method", nn::mean_rows(h)), head("stmt", nn::gather_rows(h, rows))};
}

ForwardResult Model::forward(Tape& tape, const EncodedGraph& g, ForwardTrace* trace) const {
  Var h = init_nodes(tape, g);
  h = config_.mode == PropagationMode::Standard ? propagate_standard(tape, h, g, trace)
                                                : propagate_ibpm(tape, h, g, trace);
  return readout(tape, h, g);
}

Var Model::loss(Tape& tape, const EncodedGraph& g, const Labels& labels, double positive_weight) const {
  ForwardResult out = forward(tape, g);
  const std::vector<double> y{labels.buggy ? 1.0 : 0.0}, w_method{labels.buggy ? positive_weight : 1.0};
  Var total = nn::bce_with_logits(out.method_logit, y, w_method);
  if (labels.buggy && !g.rankable.empty()) {
    if (labels.statements.size() != g.rankable.size()) {
      throw InvalidArgument("statement labels do not match the rankable nodes");
    }
    const std::vector<double> w(g.rankable.size(), 1.0 / static_cast<double>(g.rankable.size()));
    total = nn::add(total, nn::bce_with_logits(out.statement_logits, labels.statements, w));
  }
  return total;
}

namespace {
double logistic(double x) { return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }
}  // namespace

Prediction Model::predict(const EncodedGraph& g) const {
  Tape tape(&params_);
  ForwardResult out = forward(tape, g);
  Prediction p;
  p.method = logistic(out.method_logit.value().item());
  for (double x : out.statement_logits.value().data()) p.statements.push_back(logistic(x));
  return p;
}

nlohmann::ordered_json Model::checkpoint() const {
  return {{"format", "ibpm-model"},
          {"version", 1},
          {"config", config_to_json(config_)},
          {"vocab", vocab_.to_json()},
          {"params", nn::params_to_json(params_)}};
}

Model Model::from_checkpoint(const nlohmann::json& j) {
  if (!j.is_object() || j.value("format", "") != "ibpm-model") throw FormatError("not a model checkpoint");
  if (j.value("version", 0) != 1) throw FormatError("unsupported checkpoint version");
  return Model(config_from_json(j.at("config")), Vocab::from_json(j.at("vocab")),
               nn::params_from_json(j.at("params")));
}

void Model::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + path);
  out << checkpoint().dump() << "\n";
}

Model Model::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot read " + path);
  try {
    return from_checkpoint(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
}

std::vector<std::size_t> top_n(std::span<const double> scores, std::size_t n) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  idx.resize(std::min(n, idx.size()));
  return idx;
}

}  // namespace ibpm
