// SPDX-License-Identifier: Apache-2.0
//
// Training, evaluation and prediction for the bug detector.
#pragma once

#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ibpm/corpus.hpp"
#include "ibpm/metrics.hpp"
#include "ibpm/model.hpp"
#include "ibpm/optimizer.hpp"

namespace ibpm {

inline constexpr double kMethodThreshold = 0.5;

class DivergenceError : public Error {
 public:
  DivergenceError(std::size_t epoch, const std::string& detail)
      : Error("divergence", "non-finite loss in epoch " + std::to_string(epoch) + ": " + detail), epoch(epoch) {}
  std::size_t epoch;
};

struct TrainConfig {
  std::size_t epochs = 10;
  std::size_t batch = 16;
  double lr = 1e-3;
  double clip = 5.0;
  double holdout = 0.1;  // share of the train split used to pick the best epoch
  std::size_t threads = 1;
  std::uint64_t seed = 1;
  // Weight of the method term for buggy methods; 0 uses the clean:buggy
  // ratio of the fit set.
  double positive_weight = 0.0;

  void validate() const;
};

// Encoded graphs with their labels, ready for repeated forward passes.
struct Dataset {
  std::vector<EncodedGraph> graphs;
  std::vector<Labels> labels;
  std::vector<minilang::BugKind> kinds;
  std::vector<std::vector<int>> lines;  // source line per rankable node
  std::vector<std::size_t> ids;         // example ids
};

Vocab corpus_vocab(const std::vector<const Example*>& examples);
Dataset make_dataset(const std::vector<const Example*>& examples, const Vocab& vocab, const ModelConfig& config);

// Mean loss over `batch`, after one clipped Adam step on its summed
// gradients. Per-example gradients are reduced in batch order whatever the
// thread count.
double train_step(Model& model, const Dataset& data, std::span<const std::size_t> batch, const TrainConfig& config);

struct EpochLog {
  std::size_t epoch = 0;
  double loss = 0.0;
  double holdout_f1 = 0.0;
};

struct TrainResult {
  Model model;  // best epoch
  std::vector<EpochLog> log;
  std::size_t best_epoch = 0;
};

nlohmann::ordered_json train_log_json(const TrainResult& r);

// Throws InvalidArgument when the train split lacks a class and
// DivergenceError on a non-finite loss.
TrainResult train(const Corpus& corpus, const ModelConfig& model_config, const TrainConfig& config,
                  const std::function<void(const EpochLog&)>& on_epoch = {});

std::vector<Scored> score(const Model& model, const Dataset& data);

struct KindReport {
  std::string kind;  // "All" or a bug kind; populations include every clean method
  std::size_t methods = 0;
  Prf method;
  Prf baseline;  // always-buggy
  std::vector<std::pair<std::size_t, Prf>> statement;  // per k
  HitRate top3;
};

struct EvalReport {
  nlohmann::ordered_json config;  // model config echo
  std::vector<KindReport> kinds;
  double seconds = 0.0;  // wall time, left out of the JSON unless asked for
};

// Throws InvalidArgument on a vocabulary mismatch (most tokens unknown to
// the model).
EvalReport evaluate(const Model& model, const Corpus& corpus, const std::string& split = "test",
                    const std::vector<std::size_t>& ks = {1, 3, 5}, double threshold = kMethodThreshold);
EvalReport evaluate_scores(std::span<const Scored> scored, const std::vector<std::size_t>& ks, double threshold);

nlohmann::ordered_json report_to_json(const EvalReport& r, bool with_timing = false);
std::string report_to_csv(const EvalReport& r);

// {method, method_score, ranked: [{line, score}, ...]}; the ranking is empty
// for methods scored at or below the threshold and holds at most k entries.
nlohmann::ordered_json predict_source(const Model& model, const std::string& source, const std::string& method,
                                      std::size_t k, int depth, double threshold = kMethodThreshold);

struct Ablation {
  nlohmann::ordered_json report;
  std::vector<TrainResult> runs;     // standard, ibpm
  std::vector<EvalReport> reports;   // test split, same order
  std::vector<double> seconds;       // train + eval wall time, same order
};

// Trains Standard and IBPM models with identical seeds and settings and
// reports both on the test split, plus IBPM minus Standard.
Ablation run_ablation(const Corpus& corpus, const ModelConfig& model_config, const TrainConfig& config,
                      const std::function<void(const std::string&, const EpochLog&)>& on_epoch = {});
nlohmann::ordered_json ablate(const Corpus& corpus, const ModelConfig& model_config, const TrainConfig& config,
                              const std::function<void(const std::string&, const EpochLog&)>& on_epoch = {});

}  // namespace ibpm
