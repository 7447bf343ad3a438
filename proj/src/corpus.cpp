// SPDX-License-Identifier: Apache-2.0
#include "ibpm/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "ibpm/minilang/injector.hpp"
#include "ibpm/minilang/interpreter.hpp"
#include "ibpm/minilang/parser.hpp"
#include "ibpm/minilang/printer.hpp"

namespace ibpm {

using namespace minilang;

namespace {

// Sorted (bigram key, count) pairs over interned tokens.
using Bigrams = std::vector<std::pair<std::uint64_t, std::int64_t>>;
using Dictionary = std::map<std::string, std::uint64_t>;

Bigrams bigrams(const std::vector<std::string>& tokens, Dictionary& dict) {
  std::vector<std::uint64_t> ids;
  for (const auto& t : tokens) ids.push_back(dict.emplace(t, dict.size()).first->second);
  std::map<std::uint64_t, std::int64_t> counts;
  for (std::size_t k = 1; k < ids.size(); ++k) ++counts[(ids[k - 1] << 32) | ids[k]];
  return Bigrams(counts.begin(), counts.end());
}

std::int64_t squared_norm(const Bigrams& b) {
  std::int64_t s = 0;
  for (const auto& [key, c] : b) s += c * c;
  return s;
}

double cosine(const Bigrams& a, std::int64_t na, const Bigrams& b, std::int64_t nb) {
  if (na == 0 || nb == 0) return 0.0;
  std::int64_t dot = 0;
  for (std::size_t i = 0, j = 0; i < a.size() && j < b.size();) {
    if (a[i].first < b[j].first) {
      ++i;
    } else if (b[j].first < a[i].first) {
      ++j;
    } else {
      dot += a[i++].second * b[j++].second;
    }
  }
  return static_cast<double>(dot) / std::sqrt(static_cast<double>(na) * static_cast<double>(nb));
}

std::vector<std::pair<std::size_t, double>> rank(const Bigrams& q, const std::vector<Bigrams>& pool,
                                                 const std::vector<std::int64_t>& norms) {
  const std::int64_t nq = squared_norm(q);
  std::vector<std::pair<std::size_t, double>> out;
  for (std::size_t k = 0; k < pool.size(); ++k) out.emplace_back(k, cosine(q, nq, pool[k], norms[k]));
  std::stable_sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.second > y.second; });
  return out;
}

bool runs_clean(const Program& p, const ClassTable& ct, const std::string& method, Rng& rng) {
  for (int k = 0; k < 8; ++k) {
    if (!interpret(p, ct, method, sample_inputs(*p.find_method(method), ct, rng)).ok()) return false;
  }
  return true;
}

std::string kinds_string(const std::vector<BugKind>& kinds) {
  std::string out;
  for (BugKind k : kinds) out += (out.empty() ? "" : ",") + to_string(k);
  return out;
}

nlohmann::ordered_json config_json(const CorpusConfig& c) {
  nlohmann::ordered_json j;
  j["n"] = c.n;
  auto kinds = nlohmann::ordered_json::array();
  for (BugKind k : c.kinds) kinds.push_back(to_string(k));
  j["kinds"] = kinds;
  j["ratio"] = c.ratio;
  j["seed"] = c.seed;
  j["depth"] = c.depth;
  j["partners"] = c.partners;
  j["test_fraction"] = c.test_fraction;
  return j;
}

CorpusConfig config_from(const nlohmann::json& j) {
  CorpusConfig c;
  c.n = j.at("n").get<std::size_t>();
  c.kinds.clear();
  for (const auto& k : j.at("kinds")) c.kinds.push_back(bug_kind_from_string(k.get<std::string>()));
  c.ratio = j.at("ratio").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.depth = j.at("depth").get<int>();
  c.partners = j.at("partners").get<std::size_t>();
  c.test_fraction = j.at("test_fraction").get<double>();
  return c;
}

}  // namespace

void CorpusConfig::validate() const {
  if (n < 20) throw InvalidArgument("corpus needs at least 20 methods, got " + std::to_string(n));
  if (kinds.empty()) throw InvalidArgument("corpus needs at least one bug kind");
  for (BugKind k : kinds) {
    if (k == BugKind::Clean) throw InvalidArgument("Clean is not a bug kind");
  }
  if (!(ratio > 0.0) || !std::isfinite(ratio)) throw InvalidArgument("ratio must be positive");
  if (depth < 0 || depth > 2) throw InvalidArgument("inline depth must be 0, 1 or 2");
  if (partners == 0) throw InvalidArgument("partners must be at least 1");
  if (!(test_fraction >= 0.0 && test_fraction < 1.0)) throw InvalidArgument("test_fraction must be in [0, 1)");
}

std::vector<const Example*> Corpus::split(const std::string& name) const {
  std::vector<const Example*> out;
  for (const auto& e : examples) {
    if (e.split == name) out.push_back(&e);
  }
  return out;
}

std::vector<std::string> method_tokens(const Program& program, const std::string& method) {
  const Method* m = program.find_method(method);
  if (!m) throw InvalidArgument("no method named " + method);
  Program only;
  only.methods.push_back(*m);
  std::vector<std::string> out;
  for (const Token& t : lex(print(only))) {
    if (t.kind != TokenKind::End) out.push_back(t.text);
  }
  return out;
}

std::uint64_t canonical_hash(const std::vector<std::string>& tokens) {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  for (const auto& t : tokens) {
    for (unsigned char c : t) h = (h ^ c) * 1099511628211ULL;
    h = (h ^ 0xff) * 1099511628211ULL;
  }
  return h;
}

double bigram_cosine(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  Dictionary dict;
  const Bigrams ba = bigrams(a, dict), bb = bigrams(b, dict);
  return cosine(ba, squared_norm(ba), bb, squared_norm(bb));
}

std::vector<std::pair<std::size_t, double>> pair_similar(const std::vector<std::string>& query,
                                                         const std::vector<std::vector<std::string>>& pool) {
  Dictionary dict;
  std::vector<Bigrams> grams;
  std::vector<std::int64_t> norms;
  for (const auto& p : pool) {
    grams.push_back(bigrams(p, dict));
    norms.push_back(squared_norm(grams.back()));
  }
  return rank(bigrams(query, dict), grams, norms);
}

Corpus generate_corpus(const CorpusConfig& config, const GeneratorConfig& generator) {
  config.validate();
  Rng rng(config.seed);
  const auto n_buggy = static_cast<std::size_t>(std::llround(static_cast<double>(config.n) / (config.ratio + 1.0)));
  if (n_buggy == 0 || n_buggy >= config.n) {
    throw InvalidArgument("ratio " + std::to_string(config.ratio) + " leaves no room for both classes in " +
                          std::to_string(config.n) + " methods");
  }
  const std::size_t n_clean = config.n - n_buggy;
  std::set<std::uint64_t> used;

  struct Candidate {
    Example example;
    std::vector<std::string> tokens;
  };

  std::vector<Candidate> buggy;
  std::size_t programs = 0;
  const std::size_t budget = 50 * n_buggy + 100;
  while (buggy.size() < n_buggy) {
    if (programs++ >= budget) {
      throw InvalidArgument("ratio unachievable: injected " + std::to_string(buggy.size()) + " of " +
                            std::to_string(n_buggy) + " buggy methods after " + std::to_string(budget) +
                            " programs (" + kinds_string(config.kinds) + ")");
    }
    const std::uint64_t seed = rng.next();
    Rng prng(seed);
    const GeneratedProgram g = generate_program(prng, generator);
    const ClassTable ct(g.program.classes);
    if (!runs_clean(g.program, ct, g.target, prng)) continue;
    const BugKind kind = config.kinds[buggy.size() % config.kinds.size()];
    Injection inj;
    try {
      inj = inject_bug(g.program, ct, g.target, kind, prng);
    } catch (const NotInjectable&) {
      continue;
    }
    const auto original = canonical_hash(method_tokens(g.program, g.target));
    auto tokens = method_tokens(inj.program, g.target);
    const auto mutant = canonical_hash(tokens);
    if (used.count(original) || used.count(mutant)) continue;
    used.insert(original);
    used.insert(mutant);
    Example e;
    e.kind = kind;
    e.line = inj.line;
    e.depth = config.depth;
    e.seed = seed;
    e.method = g.target;
    e.source = print(inj.program);
    buggy.push_back({std::move(e), std::move(tokens)});
  }

  std::vector<Candidate> pool;
  const std::size_t pool_size = 2 * n_clean;
  programs = 0;
  while (pool.size() < pool_size) {
    if (programs++ >= 20 * pool_size + 100) throw InvalidArgument("could not generate enough distinct clean methods");
    const std::uint64_t seed = rng.next();
    Rng prng(seed);
    const GeneratedProgram g = generate_program(prng, generator);
    const ClassTable ct(g.program.classes);
    if (!runs_clean(g.program, ct, g.target, prng)) continue;
    auto tokens = method_tokens(g.program, g.target);
    if (!used.insert(canonical_hash(tokens)).second) continue;
    Example e;
    e.depth = config.depth;
    e.seed = seed;
    e.method = g.target;
    e.source = g.source;
    pool.push_back({std::move(e), std::move(tokens)});
  }

  // Each buggy method takes its nearest unused clean methods.
  Dictionary dict;
  std::vector<Bigrams> pool_grams;
  std::vector<std::int64_t> pool_norms;
  for (const auto& c : pool) {
    pool_grams.push_back(bigrams(c.tokens, dict));
    pool_norms.push_back(squared_norm(pool_grams.back()));
  }
  std::vector<bool> taken(pool.size());
  std::vector<std::vector<std::size_t>> groups(n_buggy);
  std::size_t clean_left = n_clean;
  for (std::size_t b = 0; b < n_buggy && clean_left > 0; ++b) {
    for (const auto& [k, sim] : rank(bigrams(buggy[b].tokens, dict), pool_grams, pool_norms)) {
      if (groups[b].size() == config.partners || clean_left == 0) break;
      if (taken[k]) continue;
      taken[k] = true;
      groups[b].push_back(k);
      --clean_left;
    }
  }
  std::vector<std::size_t> unpaired;
  for (std::size_t k = 0; k < pool.size() && unpaired.size() < clean_left; ++k) {
    if (!taken[k]) unpaired.push_back(k);
  }

  // Whole groups go to one split so both keep the class ratio.
  struct Group {
    std::int64_t buggy = -1;
    std::vector<std::size_t> clean;
  };
  std::vector<Group> all;
  for (std::size_t b = 0; b < n_buggy; ++b) all.push_back({static_cast<std::int64_t>(b), groups[b]});
  for (std::size_t k : unpaired) all.push_back({-1, {k}});
  rng.shuffle(all);
  const auto test_target = static_cast<std::size_t>(std::llround(config.test_fraction * static_cast<double>(config.n)));
  std::size_t test_count = 0;

  Corpus corpus;
  corpus.config = config;
  for (const Group& g : all) {
    const std::size_t size = g.clean.size() + (g.buggy >= 0 ? 1 : 0);
    const bool test = test_count + size <= test_target;
    if (test) test_count += size;
    std::int64_t partner = -1;
    if (g.buggy >= 0) {
      Example e = buggy[static_cast<std::size_t>(g.buggy)].example;
      e.id = corpus.examples.size();
      e.split = test ? "test" : "train";
      partner = static_cast<std::int64_t>(e.id);
      corpus.examples.push_back(std::move(e));
    }
    for (std::size_t k : g.clean) {
      Example e = pool[k].example;
      e.id = corpus.examples.size();
      e.split = test ? "test" : "train";
      e.partner_of = partner;
      corpus.examples.push_back(std::move(e));
    }
  }
  return corpus;
}

std::string write_corpus(const Corpus& corpus) {
  std::ostringstream out;
  nlohmann::ordered_json header;
  header["format"] = "ibpm-corpus";
  header["version"] = kCorpusVersion;
  header["config"] = config_json(corpus.config);
  header["examples"] = corpus.examples.size();
  out << header.dump() << "\n";
  for (const Example& e : corpus.examples) {
    nlohmann::ordered_json j;
    j["id"] = e.id;
    j["split"] = e.split;
    j["kind"] = to_string(e.kind);
    j["line"] = e.line;
    j["depth"] = e.depth;
    j["seed"] = e.seed;
    j["partner_of"] = e.partner_of;
    j["method"] = e.method;
    j["source"] = e.source;
    out << j.dump() << "\n";
  }
  return out.str();
}

Corpus read_corpus(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  auto fail = [&](const std::string& what) -> FormatError {
    return FormatError("corpus line " + std::to_string(number) + ": " + what);
  };
  Corpus corpus;
  std::size_t expected = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++number;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw fail(std::string("malformed JSON (") + e.what() + ")");
    }
    try {
      if (!have_header) {
        if (j.value("format", "") != "ibpm-corpus") throw fail("not a corpus header");
        const int version = j.at("version").get<int>();
        if (version != kCorpusVersion) {
          throw fail("unsupported corpus version " + std::to_string(version) + " (expected " +
                     std::to_string(kCorpusVersion) + ")");
        }
        corpus.config = config_from(j.at("config"));
        expected = j.at("examples").get<std::size_t>();
        have_header = true;
        continue;
      }
      Example e;
      e.id = j.at("id").get<std::size_t>();
      e.split = j.at("split").get<std::string>();
      e.kind = bug_kind_from_string(j.at("kind").get<std::string>());
      e.line = j.at("line").get<int>();
      e.depth = j.at("depth").get<int>();
      e.seed = j.at("seed").get<std::uint64_t>();
      e.partner_of = j.at("partner_of").get<std::int64_t>();
      e.method = j.at("method").get<std::string>();
      e.source = j.at("source").get<std::string>();
      if (e.split != "train" && e.split != "test") throw fail("unknown split '" + e.split + "'");
      if (e.id != corpus.examples.size()) throw fail("example ids must count up from 0");
      if (corpus.examples.size() == expected) throw fail("more examples than the header announced");
      corpus.examples.push_back(std::move(e));
    } catch (const nlohmann::json::exception& e) {
      throw fail(std::string("bad field (") + e.what() + ")");
    } catch (const InvalidArgument& e) {
      throw fail(e.what());
    }
  }
  if (!have_header) throw FormatError("corpus line 1: missing header");
  if (corpus.examples.size() != expected) {
    number = corpus.examples.size() + 2;
    throw fail("missing example (header announced " + std::to_string(expected) + ", found " +
               std::to_string(corpus.examples.size()) + ")");
  }
  return corpus;
}

void save_corpus(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + path);
  out << write_corpus(corpus);
  if (!out) throw InvalidArgument("failed writing " + path);
}

Corpus load_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot read " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return read_corpus(text.str());
}

MethodGraph example_graph(const Example& example) {
  const Program p = parse(example.source);
  const ClassTable ct(p.classes);
  MethodGraph mg = inline_calls(build_cfg(p, ct, example.method), p, ct, example.depth);
  if (example.buggy()) label_fault(mg, example.line, example.kind);
  return mg;
}

GraphInput graph_input(const MethodGraph& mg) { return {mg.graph, mg.tokens, mg.rankable}; }

Labels graph_labels(const MethodGraph& mg) {
  Labels l;
  l.buggy = mg.buggy();
  for (NodeId v : mg.rankable) l.statements.push_back(mg.labels[v]);
  return l;
}

}  // namespace ibpm
