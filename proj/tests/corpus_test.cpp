// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>

#include "ibpm/corpus.hpp"
#include "ibpm/minilang/interpreter.hpp"
#include "ibpm/minilang/parser.hpp"

using namespace ibpm;
using minilang::BugKind;

namespace {

const Corpus& corpus400() {
  static const Corpus c = [] {
    CorpusConfig cfg;
    cfg.n = 400;
    cfg.seed = 11;
    return generate_corpus(cfg);
  }();
  return c;
}

std::uint64_t example_hash(const Example& e) {
  return canonical_hash(method_tokens(minilang::parse(e.source), e.method));
}

// Bigram cosine straight from the definition, on string keys.
double cosine_oracle(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  auto counts = [](const std::vector<std::string>& t) {
    std::map<std::pair<std::string, std::string>, double> m;
    for (std::size_t i = 0; i + 1 < t.size(); ++i) m[{t[i], t[i + 1]}] += 1;
    return m;
  };
  const auto ca = counts(a), cb = counts(b);
  double dot = 0, na = 0, nb = 0;
  for (const auto& [k, v] : ca) {
    na += v * v;
    if (auto it = cb.find(k); it != cb.end()) dot += v * it->second;
  }
  for (const auto& [k, v] : cb) nb += v * v;
  return na == 0 || nb == 0 ? 0.0 : dot / std::sqrt(na * nb);
}

}  // namespace

TEST(CorpusGeneration, SameSeedSameCorpus) {
  CorpusConfig cfg;
  cfg.n = 20;
  cfg.seed = 4;
  EXPECT_EQ(write_corpus(generate_corpus(cfg)), write_corpus(generate_corpus(cfg)));
  CorpusConfig other = cfg;
  other.seed = 5;
  EXPECT_NE(write_corpus(generate_corpus(cfg)), write_corpus(generate_corpus(other)));
}

TEST(CorpusGeneration, ClassBalance) {
  std::size_t clean = 0, buggy = 0;
  for (const Example& e : corpus400().examples) (e.buggy() ? buggy : clean) += 1;
  EXPECT_EQ(corpus400().examples.size(), 400u);
  EXPECT_NEAR(static_cast<double>(clean), 300.0, 15.0);
  EXPECT_EQ(buggy, 100u);
}

TEST(CorpusGeneration, KindsAlternate) {
  std::map<BugKind, int> kinds;
  for (const Example& e : corpus400().examples) ++kinds[e.kind];
  EXPECT_EQ(kinds[BugKind::NullDeref], 50);
  EXPECT_EQ(kinds[BugKind::IndexOob], 50);
  EXPECT_EQ(kinds.count(BugKind::BadCast), 0u);
}

TEST(CorpusGeneration, SingleKind) {
  CorpusConfig cfg;
  cfg.n = 40;
  cfg.kinds = {BugKind::NullDeref};
  for (const Example& e : generate_corpus(cfg).examples) {
    EXPECT_TRUE(e.kind == BugKind::NullDeref || e.kind == BugKind::Clean);
  }
}

TEST(CorpusGeneration, SplitSizes) {
  EXPECT_NEAR(static_cast<double>(corpus400().split("test").size()), 100.0, 4.0);
  EXPECT_EQ(corpus400().split("train").size() + corpus400().split("test").size(), 400u);
}

TEST(CorpusGeneration, NoHashSharedAcrossSplits) {
  std::set<std::uint64_t> train, test, all;
  for (const Example& e : corpus400().examples) {
    const auto h = example_hash(e);
    (e.split == "train" ? train : test).insert(h);
    all.insert(h);
  }
  EXPECT_EQ(all.size(), corpus400().examples.size());
  for (auto h : test) EXPECT_EQ(train.count(h), 0u);
}

TEST(CorpusGeneration, PartnersShareTheBuggySplit) {
  std::map<std::size_t, const Example*> by_id;
  for (const Example& e : corpus400().examples) by_id[e.id] = &e;
  std::size_t paired = 0;
  for (const Example& e : corpus400().examples) {
    if (e.partner_of < 0) continue;
    ++paired;
    const Example* b = by_id.at(static_cast<std::size_t>(e.partner_of));
    EXPECT_TRUE(b->buggy());
    EXPECT_FALSE(e.buggy());
    EXPECT_EQ(b->split, e.split);
  }
  EXPECT_GT(paired, 0u);
}

TEST(CorpusGeneration, BuggyExamplesFaultWhereLabelled) {
  for (const Example& e : corpus400().examples) {
    if (!e.buggy()) continue;
    const minilang::Program p = minilang::parse(e.source);
    const minilang::ClassTable ct(p.classes);
    Rng rng(e.seed);
    bool confirmed = false;
    for (int attempt = 0; attempt < 512 && !confirmed; ++attempt) {
      const auto out = minilang::interpret(p, ct, e.method, minilang::sample_inputs(*p.find_method(e.method), ct, rng));
      confirmed = out.faulted(e.kind) && out.line == e.line;
    }
    EXPECT_TRUE(confirmed) << "example " << e.id;
  }
}

TEST(CorpusGeneration, ExactlyOneFaultyStatementPerBuggyMethod) {
  for (const Example& e : corpus400().examples) {
    const auto mg = example_graph(e);
    const Labels l = graph_labels(mg);
    double sum = 0;
    for (double v : l.statements) sum += v;
    EXPECT_EQ(l.buggy, e.buggy());
    EXPECT_EQ(sum, e.buggy() ? 1.0 : 0.0) << "example " << e.id;
    EXPECT_EQ(mg.rankable.size(), l.statements.size());
  }
}

TEST(CorpusConfigTest, RejectsBadValues) {
  CorpusConfig cfg;
  cfg.n = 5;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  cfg = {};
  cfg.kinds.clear();
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  cfg = {};
  cfg.depth = 3;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  cfg = {};
  cfg.test_fraction = 1.0;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
}

TEST(Similarity, ExactDuplicateRanksFirst) {
  const std::vector<std::string> q{"int", "f", "(", "int", "x", ")", "return", "x", "+", "1"};
  const std::vector<std::vector<std::string>> pool{
      {"void", "g", "(", ")", "return"}, q, {"int", "f", "(", "int", "y", ")", "return", "y"}};
  const auto ranked = pair_similar(q, pool);
  EXPECT_EQ(ranked.front().first, 1u);
  EXPECT_DOUBLE_EQ(ranked.front().second, 1.0);
}

TEST(Similarity, DisjointTokensScoreZero) {
  EXPECT_EQ(bigram_cosine({"a", "b", "c"}, {"x", "y", "z"}), 0.0);
  EXPECT_EQ(bigram_cosine({"a"}, {"a"}), 0.0);
}

TEST(Similarity, HandComputedOrdering) {
  // Bigrams of q: ab, bc, ca (each once).
  // p0 = a b c: ab, bc -> 2 / sqrt(3 * 2) = 0.8165
  // p1 = a b x: ab -> 1 / sqrt(3 * 2) = 0.4082
  // p2 = c a b c a: ca x2, ab, bc -> (2 + 1 + 1) / sqrt(3 * 6) = 0.9428
  const std::vector<std::string> q{"a", "b", "c", "a"};
  const std::vector<std::vector<std::string>> pool{{"a", "b", "c"}, {"a", "b", "x"}, {"c", "a", "b", "c", "a"}};
  const auto ranked = pair_similar(q, pool);
  ASSERT_EQ(ranked.size(), 3u);
  EXPECT_EQ(ranked[0].first, 2u);
  EXPECT_EQ(ranked[1].first, 0u);
  EXPECT_EQ(ranked[2].first, 1u);
  EXPECT_NEAR(ranked[0].second, 4.0 / std::sqrt(18.0), 1e-12);
  EXPECT_NEAR(ranked[1].second, 2.0 / std::sqrt(6.0), 1e-12);
  EXPECT_NEAR(ranked[2].second, 1.0 / std::sqrt(6.0), 1e-12);
}

TEST(Similarity, MatchesStringOracleOnCorpusMethods) {
  std::vector<std::vector<std::string>> toks;
  for (std::size_t i = 0; i < 30; ++i) {
    const Example& e = corpus400().examples[i];
    toks.push_back(method_tokens(minilang::parse(e.source), e.method));
  }
  for (std::size_t i = 0; i < toks.size(); ++i) {
    for (std::size_t j = 0; j < toks.size(); ++j) {
      ASSERT_NEAR(bigram_cosine(toks[i], toks[j]), cosine_oracle(toks[i], toks[j]), 1e-12);
    }
  }
}

TEST(CorpusFormat, EmptyCorpusIsHeaderOnly) {
  Corpus c;
  const std::string text = write_corpus(c);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1);
  EXPECT_EQ(read_corpus(text), c);
}

TEST(CorpusFormat, RoundTrip) {
  CorpusConfig cfg;
  cfg.n = 100;
  cfg.seed = 2;
  const Corpus c = generate_corpus(cfg);
  const std::string text = write_corpus(c);
  EXPECT_EQ(read_corpus(text), c);
  EXPECT_EQ(write_corpus(read_corpus(text)), text);
}

TEST(CorpusFormat, TruncatedFileNamesTheLine) {
  CorpusConfig cfg;
  cfg.n = 20;
  std::string text = write_corpus(generate_corpus(cfg));
  // Cut the fifth line (fourth example) in half.
  std::size_t pos = 0;
  for (int i = 0; i < 4; ++i) pos = text.find('\n', pos) + 1;
  text.resize(pos + 30);
  try {
    read_corpus(text);
    FAIL() << "expected a format error";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("corpus line 5"), std::string::npos) << e.what();
  }
}

TEST(CorpusFormat, MissingExamplesAreReported) {
  CorpusConfig cfg;
  cfg.n = 20;
  std::string text = write_corpus(generate_corpus(cfg));
  text.resize(text.rfind('\n', text.size() - 2) + 1);
  EXPECT_THROW(read_corpus(text), FormatError);
}

TEST(CorpusFormat, VersionMismatch) {
  EXPECT_THROW(read_corpus(R"({"format":"ibpm-corpus","version":99,"examples":0})"
                           "\n"),
               FormatError);
  EXPECT_THROW(read_corpus("not json\n"), FormatError);
}
