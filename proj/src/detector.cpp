// SPDX-License-Identifier: Apache-2.0
#include "ibpm/detector.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>
#include <thread>

#include "ibpm/minilang/parser.hpp"

namespace ibpm {

using minilang::BugKind;

void TrainConfig::validate() const {
  if (epochs == 0) throw InvalidArgument("epochs must be at least 1");
  if (batch == 0) throw InvalidArgument("batch must be at least 1");
  if (!(lr > 0.0)) throw InvalidArgument("learning rate must be positive");
  if (!(holdout >= 0.0 && holdout < 1.0)) throw InvalidArgument("holdout must be in [0, 1)");
  if (threads == 0) throw InvalidArgument("threads must be at least 1");
  if (!(positive_weight >= 0.0)) throw InvalidArgument("positive weight must be non-negative");
}

Vocab corpus_vocab(const std::vector<const Example*>& examples) {
  std::vector<std::vector<std::vector<std::string>>> lists;
  for (const Example* e : examples) lists.push_back(example_graph(*e).tokens);
  return Vocab::build(lists);
}

Dataset make_dataset(const std::vector<const Example*>& examples, const Vocab& vocab, const ModelConfig& config) {
  Dataset d;
  for (const Example* e : examples) {
    const minilang::MethodGraph mg = example_graph(*e);
    d.graphs.push_back(encode(graph_input(mg), vocab, config));
    d.labels.push_back(graph_labels(mg));
    d.kinds.push_back(e->kind);
    std::vector<int> lines;
    for (NodeId v : mg.rankable) lines.push_back(mg.lines[v]);
    d.lines.push_back(std::move(lines));
    d.ids.push_back(e->id);
  }
  return d;
}

double train_step(Model& model, const Dataset& data, std::span<const std::size_t> batch, const TrainConfig& config) {
  std::vector<nn::Gradients> grads(batch.size());
  std::vector<double> losses(batch.size());
  const double weight = config.positive_weight > 0.0 ? config.positive_weight : 1.0;
  auto work = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t i = begin; i < batch.size(); i += stride) {
      nn::Tape tape(&model.params());
      nn::Var loss = model.loss(tape, data.graphs[batch[i]], data.labels[batch[i]], weight);
      losses[i] = loss.value().item();
      grads[i] = tape.backward(loss);
    }
  };
  const std::size_t threads = std::min(config.threads, batch.size());
  if (threads <= 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
    for (auto& t : pool) t.join();
  }
  nn::Gradients total;
  double loss = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    nn::accumulate(total, grads[i]);
    loss += losses[i];
  }
  if (config.clip > 0) nn::clip_grad_norm(total, config.clip);
  nn::adam_step(model.params(), total, {config.lr});
  return loss / static_cast<double>(batch.size());
}

std::vector<Scored> score(const Model& model, const Dataset& data) {
  std::vector<Scored> out;
  for (std::size_t i = 0; i < data.graphs.size(); ++i) {
    const Prediction p = model.predict(data.graphs[i]);
    Scored s;
    s.method = p.method;
    s.statements = p.statements;
    s.buggy = data.labels[i].buggy;
    for (double l : data.labels[i].statements) s.labels.push_back(l > 0.5 ? 1 : 0);
    s.kind = data.kinds[i];
    out.push_back(std::move(s));
  }
  return out;
}

nlohmann::ordered_json train_log_json(const TrainResult& r) {
  auto epochs = nlohmann::ordered_json::array();
  for (const auto& e : r.log) epochs.push_back({{"epoch", e.epoch}, {"loss", e.loss}, {"holdout_f1", e.holdout_f1}});
  return {{"best_epoch", r.best_epoch}, {"epochs", epochs}};
}

TrainResult train(const Corpus& corpus, const ModelConfig& model_config, const TrainConfig& config,
                  const std::function<void(const EpochLog&)>& on_epoch) {
  config.validate();
  std::vector<const Example*> examples = corpus.split("train");
  std::size_t buggy = 0;
  for (const Example* e : examples) buggy += e->buggy();
  if (buggy == 0 || buggy == examples.size()) {
    throw InvalidArgument("the train split needs both buggy and clean methods (" + std::to_string(buggy) + " of " +
                          std::to_string(examples.size()) + " buggy)");
  }
  Rng rng(config.seed);
  rng.shuffle(examples);
  const auto held = static_cast<std::size_t>(std::floor(config.holdout * static_cast<double>(examples.size())));
  const std::vector<const Example*> fit(examples.begin(), examples.end() - static_cast<std::ptrdiff_t>(held));
  const std::vector<const Example*> check(examples.end() - static_cast<std::ptrdiff_t>(held), examples.end());

  Vocab vocab = corpus_vocab(fit);
  const Dataset train_data = make_dataset(fit, vocab, model_config);
  const Dataset check_data = make_dataset(check, vocab, model_config);
  Model model(model_config, vocab);
  TrainConfig step_config = config;
  if (step_config.positive_weight == 0.0) {
    std::size_t fit_buggy = 0;
    for (const Labels& l : train_data.labels) fit_buggy += l.buggy;
    step_config.positive_weight =
        fit_buggy == 0 ? 1.0 : static_cast<double>(fit.size() - fit_buggy) / static_cast<double>(fit_buggy);
  }

  TrainResult result{model, {}, 0};
  double best_f1 = -1.0;
  std::vector<std::size_t> order(train_data.graphs.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(order);
    double total = 0.0;
    std::size_t steps = 0;
    for (std::size_t b = 0; b < order.size(); b += config.batch) {
      const std::size_t end = std::min(order.size(), b + config.batch);
      double loss = 0.0;
      try {
        loss = train_step(model, train_data, std::span(order).subspan(b, end - b), step_config);
      } catch (const NumericError& e) {
        throw DivergenceError(epoch, "batch starting at " + std::to_string(b) + ": " + e.what());
      }
      if (!std::isfinite(loss)) throw DivergenceError(epoch, "batch starting at " + std::to_string(b));
      total += loss;
      ++steps;
    }
    EpochLog log{epoch, total / static_cast<double>(steps), 0.0};
    if (!check_data.graphs.empty()) {
      const auto scored = score(model, check_data);
      log.holdout_f1 = method_prf(scored, kMethodThreshold).f1;
    }
    result.log.push_back(log);
    if (on_epoch) on_epoch(log);
    if (log.holdout_f1 > best_f1 || check_data.graphs.empty()) {
      best_f1 = log.holdout_f1;
      result.model = model;
      result.best_epoch = epoch;
    }
  }
  return result;
}

EvalReport evaluate_scores(std::span<const Scored> scored, const std::vector<std::size_t>& ks, double threshold) {
  EvalReport r;
  std::vector<BugKind> present;
  for (const Scored& s : scored) {
    if (s.kind != BugKind::Clean && std::find(present.begin(), present.end(), s.kind) == present.end()) {
      present.push_back(s.kind);
    }
  }
  std::sort(present.begin(), present.end());
  std::vector<std::pair<std::string, std::vector<Scored>>> groups;
  groups.emplace_back("All", std::vector<Scored>(scored.begin(), scored.end()));
  for (BugKind k : present) {
    std::vector<Scored> subset;
    for (const Scored& s : scored) {
      if (s.kind == BugKind::Clean || s.kind == k) subset.push_back(s);
    }
    groups.emplace_back(to_string(k), std::move(subset));
  }
  for (const auto& [name, items] : groups) {
    KindReport k;
    k.kind = name;
    k.methods = items.size();
    k.method = method_prf(items, threshold);
    k.baseline = always_buggy_prf(items);
    for (std::size_t top : ks) k.statement.emplace_back(top, statement_prf(items, top, threshold));
    k.top3 = top_k_hit_rate(items, 3, threshold);
    r.kinds.push_back(std::move(k));
  }
  return r;
}

EvalReport evaluate(const Model& model, const Corpus& corpus, const std::string& split,
                    const std::vector<std::size_t>& ks, double threshold) {
  const auto start = std::chrono::steady_clock::now();
  const auto examples = corpus.split(split);
  std::size_t tokens = 0, unknown = 0;
  const Dataset data = make_dataset(examples, model.vocab(), model.config());
  for (const auto& g : data.graphs) {
    for (const auto& ids : g.token_ids) {
      tokens += ids.size();
      unknown += static_cast<std::size_t>(std::count(ids.begin(), ids.end(), Vocab::kUnknown));
    }
  }
  if (tokens > 0 && 2 * unknown > tokens) {
    throw InvalidArgument("vocabulary mismatch: " + std::to_string(unknown) + " of " + std::to_string(tokens) +
                          " tokens are unknown to the model");
  }
  const auto scored = score(model, data);
  EvalReport r = evaluate_scores(scored, ks, threshold);
  r.config = config_to_json(model.config());
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

namespace {

nlohmann::ordered_json prf_json(const Prf& p) {
  return {{"tp", p.tp},           {"predicted", p.predicted}, {"actual", p.actual},
          {"precision", p.precision}, {"recall", p.recall},       {"f1", p.f1}};
}

}  // namespace

nlohmann::ordered_json report_to_json(const EvalReport& r, bool with_timing) {
  nlohmann::ordered_json j;
  j["config"] = r.config;
  auto kinds = nlohmann::ordered_json::array();
  for (const KindReport& k : r.kinds) {
    nlohmann::ordered_json o;
    o["kind"] = k.kind;
    o["methods"] = k.methods;
    o["method"] = prf_json(k.method);
    o["confusion"] = {{"tp", k.method.tp},
                      {"fp", k.method.predicted - k.method.tp},
                      {"fn", k.method.actual - k.method.tp},
                      {"tn", k.methods - k.method.predicted - (k.method.actual - k.method.tp)}};
    o["always_buggy"] = prf_json(k.baseline);
    auto stmts = nlohmann::ordered_json::array();
    for (const auto& [top, prf] : k.statement) {
      auto s = prf_json(prf);
      s["k"] = top;
      stmts.push_back(s);
    }
    o["statement"] = stmts;
    o["top3_hit"] = {{"hits", k.top3.hits}, {"methods", k.top3.methods}, {"rate", k.top3.rate}};
    kinds.push_back(o);
  }
  j["kinds"] = kinds;
  if (with_timing) j["seconds"] = r.seconds;
  return j;
}

std::string report_to_csv(const EvalReport& r) {
  std::ostringstream out;
  out << "kind,level,k,tp,predicted,actual,precision,recall,f1\n";
  auto row = [&](const std::string& kind, const std::string& level, const std::string& k, const Prf& p) {
    out << kind << "," << level << "," << k << "," << p.tp << "," << p.predicted << "," << p.actual << ","
        << p.precision << "," << p.recall << "," << p.f1 << "\n";
  };
  for (const KindReport& k : r.kinds) {
    row(k.kind, "method", "", k.method);
    row(k.kind, "always_buggy", "", k.baseline);
    for (const auto& [top, prf] : k.statement) row(k.kind, "statement", std::to_string(top), prf);
  }
  return out.str();
}

nlohmann::ordered_json predict_source(const Model& model, const std::string& source, const std::string& method,
                                      std::size_t k, int depth, double threshold) {
  const minilang::Program p = minilang::parse(source);
  if (p.methods.empty()) throw InvalidArgument("no methods in the source");
  const std::string name = method.empty() ? p.methods.front().name : method;
  const minilang::ClassTable ct(p.classes);
  const auto mg = minilang::inline_calls(minilang::build_cfg(p, ct, name), p, ct, depth);
  const Prediction pred = model.predict(encode(graph_input(mg), model.vocab(), model.config()));
  nlohmann::ordered_json j;
  j["method"] = name;
  j["method_score"] = pred.method;
  auto ranked = nlohmann::ordered_json::array();
  if (pred.method > threshold) {
    for (std::size_t idx : top_n(pred.statements, k)) {
      ranked.push_back({{"line", mg.lines[mg.rankable[idx]]}, {"score", pred.statements[idx]}});
    }
  }
  j["ranked"] = ranked;
  return j;
}

Ablation run_ablation(const Corpus& corpus, const ModelConfig& model_config, const TrainConfig& config,
                      const std::function<void(const std::string&, const EpochLog&)>& on_epoch) {
  Ablation a;
  for (PropagationMode mode : {PropagationMode::Standard, PropagationMode::Ibpm}) {
    const auto start = std::chrono::steady_clock::now();
    ModelConfig mc = model_config;
    mc.mode = mode;
    const std::string name = to_string(mode);
    a.runs.push_back(train(corpus, mc, config, [&](const EpochLog& e) {
      if (on_epoch) on_epoch(name, e);
    }));
    a.reports.push_back(evaluate(a.runs.back().model, corpus));
    a.seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    auto entry = report_to_json(a.reports.back());
    entry["training"] = train_log_json(a.runs.back());
    a.report[name] = entry;
  }
  const KindReport& standard = a.reports[0].kinds.front();
  const KindReport& ibpm = a.reports[1].kinds.front();
  nlohmann::ordered_json gap;
  gap["method_f1"] = ibpm.method.f1 - standard.method.f1;
  for (std::size_t i = 0; i < ibpm.statement.size(); ++i) {
    gap["statement_f1@" + std::to_string(ibpm.statement[i].first)] =
        ibpm.statement[i].second.f1 - standard.statement[i].second.f1;
  }
  gap["top3_hit_rate"] = ibpm.top3.rate - standard.top3.rate;
  a.report["gap_ibpm_minus_standard"] = gap;
  return a;
}

nlohmann::ordered_json ablate(const Corpus& corpus, const ModelConfig& model_config, const TrainConfig& config,
                              const std::function<void(const std::string&, const EpochLog&)>& on_epoch) {
  return run_ablation(corpus, model_config, config, on_epoch).report;
}

}  // namespace ibpm
