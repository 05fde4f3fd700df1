// Copyright 2026 The FocusRSA Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "focusrsa/eval.hpp"
#include "focusrsa/ngram.hpp"
#include "focusrsa/synth.hpp"
#include "support/fixtures.hpp"

namespace focusrsa {
namespace {

using testing::TableModel;

const SynthBenchmark& bench() {
  static const SynthBenchmark b = generate_synthetic({});
  return b;
}

const NGramModel& synth_model() {
  static const NGramModel m = [] {
    NGramOptions o;
    o.catalog = bench().labels;
    return train_ngram(bench().gee_train, o);
  }();
  return m;
}

// Interpolated absolute discounting computed straight from the sentences,
// keyed by strings. Histories are tails of [<s>, w1, ...].
double oracle_prob(const std::vector<std::vector<std::string>>& sentences, int order, double d,
                   double n_emittable, const std::vector<std::string>& history,
                   const std::string& w) {
  double p = 1.0 / n_emittable;
  const std::size_t max_m = std::min<std::size_t>(history.size(), order - 1);
  for (std::size_t m = 0; m <= max_m; ++m) {
    const std::vector<std::string> h(history.end() - static_cast<std::ptrdiff_t>(m), history.end());
    double total = 0, cw = 0;
    std::set<std::string> types;
    for (const auto& s : sentences) {
      std::vector<std::string> seq{"<s>"};
      seq.insert(seq.end(), s.begin(), s.end());
      seq.push_back("</s>");
      for (std::size_t t = 1; t < seq.size(); ++t) {
        if (t < m) continue;
        if (!std::equal(h.begin(), h.end(), seq.begin() + static_cast<std::ptrdiff_t>(t - m))) {
          continue;
        }
        total += 1;
        types.insert(seq[t]);
        if (seq[t] == w) cw += 1;
      }
    }
    if (total == 0) continue;
    p = std::max(cw - d, 0.0) / total + d * static_cast<double>(types.size()) / total * p;
  }
  return p;
}

std::vector<TokenId> ids_of(const Vocabulary& v, const std::string& text) {
  return v.encode(tokenize(text));
}

TEST(TrainNgram, CountDominance) {
  const std::vector<TrainingExample> corpus = {{"joy", "a b", "", 1}, {"sad", "b b", "", 2}};
  NGramOptions o;
  o.order = 2;
  const auto m = train_ngram(corpus, o);
  const auto& v = m.vocabulary();
  const auto cond = m.emotion_condition({"sad"});
  const std::vector<TokenId> prefix = {*v.find("b")};
  const auto d = m.next_token_logprobs(cond, prefix);
  EXPECT_GT(d[*v.find("b")], d[*v.find("a")]);
}

TEST(TrainNgram, SingleExampleSeparatesClasses) {
  for (int order = 1; order <= 6; ++order) {
    NGramOptions o;
    o.order = order;
    o.min_count = 1;
    o.catalog = {"joy", "sad"};
    const auto m = train_ngram({{"joy", "a", "", 1}}, o);
    const auto ids = ids_of(m.vocabulary(), "a");
    EXPECT_GT(sequence_logprob(m, m.emotion_condition({"joy"}), ids).value(),
              sequence_logprob(m, m.emotion_condition({"sad"}), ids).value())
        << "order " << order;
  }
}

TEST(TrainNgram, Errors) {
  EXPECT_THROW(train_ngram({}), UsageError);
  NGramOptions o;
  o.order = 0;
  EXPECT_THROW(train_ngram({{"joy", "a", "", 1}}, o), UsageError);
  o.order = 7;
  EXPECT_THROW(train_ngram({{"joy", "a", "", 1}}, o), UsageError);
  o.order = 3;
  o.discount = 1.0;
  EXPECT_THROW(train_ngram({{"joy", "a", "", 1}}, o), UsageError);
  o.discount = 0.75;
  o.catalog = {"joy", "sad"};
  try {
    train_ngram({{"joy", "a", "", 1}, {"fear", "b", "", 2}}, o);
    FAIL() << "expected a label error";
  } catch (const LabelError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find("fear"), std::string::npos);
  }
}

TEST(TrainNgram, RareWordsAliasToUnknown) {
  const auto m = train_ngram({{"joy", "a a b", "", 1}});
  const auto& v = m.vocabulary();
  ASSERT_TRUE(v.find("b").has_value());
  EXPECT_TRUE(v.is_aliased(*v.find("b")));
  EXPECT_EQ(v.encode("b"), v.unk());
  EXPECT_EQ(v.encode("never-seen"), v.unk());
  const auto d = m.next_token_logprobs(m.emotion_condition({"joy"}), {});
  EXPECT_EQ(d[*v.find("b")], kNegInf);
  EXPECT_GT(d[v.unk()], kNegInf);
}

class FiveSentence : public ::testing::Test {
 protected:
  std::vector<TrainingExample> corpus = {
      {"joy", "the cat sat on the mat", "", 1}, {"joy", "the cat ran", "", 2},
      {"joy", "a dog sat on a mat", "", 3},     {"sad", "the dog ran on the mat", "", 4},
      {"sad", "a cat sat", "", 5},
  };
  NGramModel model = [this] {
    NGramOptions o;
    o.min_count = 1;
    return train_ngram(corpus, o);
  }();

  std::vector<std::vector<std::string>> sentences(const std::string& label) const {
    std::vector<std::vector<std::string>> out;
    for (const auto& ex : corpus) {
      if (label.empty() || ex.emotion == label) out.push_back(tokenize(ex.text).words);
    }
    return out;
  }
};

TEST_F(FiveSentence, MatchesHandComputedInterpolation) {
  const auto& v = model.vocabulary();
  const double n_emit = static_cast<double>(model.emittable_count());
  const std::vector<std::string> words = {"the", "cat", "sat", "on", "mat", "ran", "a",
                                          "dog", "</s>"};
  const std::vector<std::vector<std::string>> histories = {
      {"<s>"}, {"<s>", "the"}, {"the", "cat"}, {"cat", "sat"}, {"on", "the"},
      {"dog", "sat"}, {"mat", "ran"}, {"a", "mat"}};
  for (const std::string label : {"joy", "sad"}) {
    const auto cond = model.emotion_condition({label});
    for (const auto& h : histories) {
      // Prefix that produces history h (BOS-led histories come from short prefixes).
      std::vector<TokenId> prefix;
      for (const auto& w : h) {
        if (w != "<s>") prefix.push_back(*v.find(w));
      }
      const auto d = model.next_token_logprobs(cond, prefix);
      for (const auto& w : words) {
        const TokenId id = w == "</s>" ? v.eos() : *v.find(w);
        const double want = oracle_prob(sentences(label), 3, 0.75, n_emit, h, w);
        EXPECT_NEAR(d.prob(id), want, 1e-12) << label << " " << h[0] << " " << h.back() << " " << w;
      }
    }
  }
}

TEST_F(FiveSentence, UnseenHistoryPassesLowerOrderThrough) {
  const auto& v = model.vocabulary();
  const auto cond = model.emotion_condition({"joy"});
  // "ran sat" never occurs; "sat" does.
  const std::vector<TokenId> unseen = {*v.find("ran"), *v.find("sat")};
  const std::vector<TokenId> lower = {*v.find("sat")};
  NGramOptions o2;
  o2.order = 2;
  o2.min_count = 1;
  const auto bigram = train_ngram(corpus, o2);
  const auto d3 = model.next_token_logprobs(cond, unseen);
  const auto d2 = bigram.next_token_logprobs(bigram.emotion_condition({"joy"}), lower);
  for (TokenId w = 0; w < v.size(); ++w) EXPECT_EQ(d3[w], d2[w]);
}

TEST_F(FiveSentence, EmptyPrefixConditionsOnBos) {
  const auto& v = model.vocabulary();
  const auto d = model.next_token_logprobs(model.emotion_condition({"sad"}), {});
  const double n_emit = static_cast<double>(model.emittable_count());
  EXPECT_NEAR(d.prob(*v.find("the")), oracle_prob(sentences("sad"), 3, 0.75, n_emit, {"<s>"}, "the"),
              1e-12);
}

TEST_F(FiveSentence, ConditioningSensitivity) {
  const std::vector<TokenId> prefix = {*model.vocabulary().find("the")};
  const auto a = model.next_token_logprobs(model.emotion_condition({"joy"}), prefix);
  const auto b = model.next_token_logprobs(model.emotion_condition({"sad"}), prefix);
  EXPECT_NE(std::vector<double>(a.logits().begin(), a.logits().end()),
            std::vector<double>(b.logits().begin(), b.logits().end()));
}

TEST_F(FiveSentence, ClassBackoff) {
  const auto& v = model.vocabulary();
  const std::vector<TokenId> prefix = {*v.find("the")};
  // Unseen two-emotion prefix: mean of the single-emotion distributions.
  const auto mixed = model.next_token_logprobs(model.emotion_condition({"sad", "joy"}), prefix);
  const auto joy = model.next_token_logprobs(model.emotion_condition({"joy"}), prefix);
  const auto sad = model.next_token_logprobs(model.emotion_condition({"sad"}), prefix);
  for (TokenId w = 0; w < v.size(); ++w) {
    EXPECT_NEAR(mixed.prob(w), 0.5 * (joy.prob(w) + sad.prob(w)), 1e-15);
  }
  // Empty prefix: pooled class.
  const auto pooled = model.next_token_logprobs(Condition{}, prefix);
  const double n_emit = static_cast<double>(model.emittable_count());
  EXPECT_NEAR(pooled.prob(*v.find("cat")),
              oracle_prob(sentences(""), 3, 0.75, n_emit, {"<s>", "the"}, "cat"), 1e-12);
}

TEST(NgramModel, ChainRuleIdentity) {
  const auto& m = synth_model();
  const auto& v = m.vocabulary();
  const auto cond = m.emotion_condition({"sad"});
  const auto ids = ids_of(v, "the funeral was hard");
  const double chain = step_logprob(m, cond, std::span(ids).first(0), ids[0]) +
                       step_logprob(m, cond, std::span(ids).first(1), ids[1]) +
                       step_logprob(m, cond, std::span(ids).first(2), ids[2]) +
                       step_logprob(m, cond, std::span(ids).first(3), ids[3]) +
                       step_logprob(m, cond, ids, v.eos());
  EXPECT_EQ(sequence_logprob(m, cond, ids).value(), chain);
  EXPECT_THROW(sequence_logprob(m, cond, std::span<const TokenId>()), UsageError);
}

TEST(NgramModel, NormalizedOnRandomProbes) {
  const auto& m = synth_model();
  const auto& v = m.vocabulary();
  const auto labels = m.catalog();
  Rng rng(21);
  for (int probe = 0; probe < 1000; ++probe) {
    Condition c;
    const std::size_t n_emo = rng.below(4);
    for (std::size_t i = 0; i < n_emo; ++i) c.emotion_prefix.push_back(v.emotion_id(rng.pick(labels)));
    if (rng.uniform() < 0.3) {
      c.context_tokens = ids_of(v, bench().dialogue_test[rng.below(bench().dialogue_test.size())].context);
    }
    std::vector<TokenId> prefix;
    const std::size_t len = rng.below(8);
    for (std::size_t i = 0; i < len; ++i) {
      TokenId t;
      do {
        t = static_cast<TokenId>(rng.below(v.size()));
      } while (v.is_emotion(t) || t == v.bos());
      prefix.push_back(t);
    }
    const auto d = m.next_token_logprobs(c, prefix);
    ASSERT_EQ(d.size(), v.size());
    ASSERT_TRUE(d.is_normalized()) << "probe " << probe;
    for (TokenId w = 0; w < v.size(); ++w) {
      ASSERT_EQ(d[w], m.token_logprob(c, prefix, w)) << "scalar and dense paths disagree";
    }
  }
}

TEST(NgramModel, BackoffConservation) {
  const auto& m = synth_model();
  for (const auto& [cls, table] : m.tables()) {
    for (const auto& [hist, node] : table) {
      ASSERT_NEAR(m.conserved_mass(cls, hist), 1.0, 1e-9);
    }
  }
}

TEST(NgramModel, DeterministicAcrossThreads) {
  const auto& m = synth_model();
  const auto& v = m.vocabulary();
  const auto& test = bench().gee_test;
  auto probe = [&](std::size_t i) {
    const auto ids = ids_of(v, test[i].text);
    return m.next_token_logprobs(m.emotion_condition({test[i].emotion}), ids).logits()[v.eos()] +
           sequence_logprob(m, m.emotion_condition({test[i].emotion}), ids).value();
  };
  const auto one = parallel_map(test.size(), 1, probe);
  const auto many = parallel_map(test.size(), 8, probe);
  EXPECT_EQ(one, many);
  const auto retrained = [] {
    NGramOptions o;
    o.catalog = bench().labels;
    return train_ngram(bench().gee_train, o);
  }();
  EXPECT_TRUE(retrained == m);
}

TEST(NgramModel, ClassConditionalSeparation) {
  const auto& m = synth_model();
  const auto labels = m.catalog();
  Rng rng(4);
  std::size_t ok = 0;
  const auto& train = bench().gee_train;
  for (const auto& ex : train) {
    const auto ids = ids_of(m.vocabulary(), ex.text);
    const double own = sequence_logprob(m, m.emotion_condition({ex.emotion}), ids).value();
    const double other = sequence_logprob(m, m.emotion_condition({rng.pick(labels)}), ids).value();
    ok += own >= other ? 1 : 0;
  }
  EXPECT_GE(static_cast<double>(ok) / static_cast<double>(train.size()), 0.9);
}

std::vector<Condition> conditions_for(const NGramModel& m, const std::vector<TrainingExample>& xs) {
  std::vector<Condition> out;
  for (const auto& ex : xs) out.push_back(m.emotion_condition({ex.emotion}));
  return out;
}

std::vector<Utterance> texts_of(const std::vector<TrainingExample>& xs) {
  std::vector<Utterance> out;
  for (const auto& ex : xs) out.push_back(tokenize(ex.text));
  return out;
}

TEST(NgramModel, HeldOutPerplexityBeatsUniform) {
  const auto& m = synth_model();
  const auto& test = bench().gee_test;
  const double ppl = perplexity(m, conditions_for(m, test), texts_of(test));
  EXPECT_LT(ppl, static_cast<double>(m.vocabulary().size()));

  NGramOptions o1;
  o1.order = 1;
  o1.catalog = bench().labels;
  const auto unigram = train_ngram(bench().gee_train, o1);
  EXPECT_LE(ppl, perplexity(unigram, conditions_for(unigram, test), texts_of(test)));
}

TEST(NgramModel, CopyComponentRaisesContextWords) {
  NGramOptions o;
  o.catalog = bench().labels;
  const auto sp = train_ngram(bench().dialogue_train, o);
  EXPECT_GT(sp.copy_weight(), 0.0);
  const auto& v = sp.vocabulary();
  const auto ctx = ids_of(v, "i keep thinking about the funeral and the goodbye .");
  const std::vector<TokenId> prefix = ids_of(v, "i am sorry to hear about the");
  const auto with = sp.next_token_logprobs(Condition::context(ctx), prefix);
  const auto without = sp.next_token_logprobs(Condition{}, prefix);
  EXPECT_GT(with[*v.find("funeral")], without[*v.find("funeral")]);
  EXPECT_TRUE(with.is_normalized());

  o.copy_weight = 0.0;
  const auto plain = train_ngram(bench().dialogue_train, o);
  EXPECT_EQ(plain.copy_weight(), 0.0);
  const auto a = plain.next_token_logprobs(Condition::context(ctx), prefix);
  const auto b = plain.next_token_logprobs(Condition{}, prefix);
  EXPECT_TRUE(a == b);
}

TEST(NgramModel, CopyIgnoresWordsInEveryContext) {
  std::vector<TrainingExample> corpus;
  for (int i = 0; i < 20; ++i) {
    corpus.push_back({"joy", "ok then", i % 2 ? "well x x" : "well y", static_cast<std::size_t>(i + 1)});
  }
  NGramOptions o;
  o.copy_weight = 0.3;
  const auto m = train_ngram(corpus, o);
  const auto& v = m.vocabulary();
  const auto ctx = ids_of(v, "well x x");
  EXPECT_EQ(m.copy_probability(ctx, *v.find("well")), 0.0);
  EXPECT_NEAR(m.copy_probability(ctx, *v.find("x")), 1.0, 1e-12);
  const auto d = m.next_token_logprobs(Condition::context(ctx), {});
  const auto base = m.next_token_logprobs(Condition{}, {});
  EXPECT_NEAR(d.prob(*v.find("x")), 0.7 * base.prob(*v.find("x")) + 0.3, 1e-12);
}

TEST(NgramModel, CopyNeverProposesUnknown) {
  std::vector<TrainingExample> corpus;
  for (int i = 0; i < 20; ++i) {
    corpus.push_back({"joy", "ok then", i % 2 ? "well x x" : "well y", static_cast<std::size_t>(i + 1)});
  }
  NGramOptions o;
  o.copy_weight = 0.3;
  const auto m = train_ngram(corpus, o);
  const auto& v = m.vocabulary();
  const auto ctx = v.encode(tokenize("zebra zebra x"));
  ASSERT_EQ(ctx[0], v.unk());
  EXPECT_EQ(m.copy_probability(ctx, v.unk()), 0.0);
  EXPECT_NEAR(m.copy_probability(ctx, *v.find("x")), 1.0, 1e-12);
  // Only unknown words: nothing to copy, so the n-gram value is returned.
  const auto only_unknown = v.encode(tokenize("zebra"));
  const auto d = m.next_token_logprobs(Condition::context(only_unknown), {});
  const auto base = m.next_token_logprobs(Condition{}, {});
  EXPECT_TRUE(std::ranges::equal(d.logits(), base.logits()));
}

TEST(NgramModel, ConditionValidation) {
  const auto& m = synth_model();
  const auto& v = m.vocabulary();
  Condition bad;
  bad.emotion_prefix = {*v.find("the")};
  EXPECT_THROW(m.next_token_logprobs(bad, {}), UsageError);
  Condition bad_ctx;
  bad_ctx.context_tokens = {v.emotion_id("sad")};
  EXPECT_THROW(m.next_token_logprobs(bad_ctx, {}), UsageError);
}

// Two emotions, explicit bigram tables over {x, y, </s>}.
TEST(SequenceLogprob, BruteForceBigramProduct) {
  Vocabulary v = Vocabulary::with_emotions({"e1", "e2"});
  const TokenId x = v.add_word("x"), y = v.add_word("y");
  const TokenId eos = v.eos();
  // table[e][prev] -> {P(x), P(y), P(eos)}; prev = bos, x, y.
  const std::map<std::string, std::map<TokenId, std::vector<double>>> table = {
      {"e1", {{v.bos(), {0.7, 0.2, 0.1}}, {x, {0.1, 0.6, 0.3}}, {y, {0.5, 0.25, 0.25}}}},
      {"e2", {{v.bos(), {0.2, 0.7, 0.1}}, {x, {0.3, 0.3, 0.4}}, {y, {0.05, 0.05, 0.9}}}},
  };
  const TableModel model(v, [&](const Condition& c, std::span<const TokenId> prefix) {
    const auto& row = table.at(v.emotion_label(c.emotion_prefix.at(0)))
                          .at(prefix.empty() ? v.bos() : prefix.back());
    std::vector<double> p(v.size(), 0.0);
    p[x] = row[0];
    p[y] = row[1];
    p[eos] = row[2];
    return p;
  });
  const std::vector<std::vector<TokenId>> seqs = {{x}, {y}, {x, y}, {y, x, x}, {x, x, y, y}};
  for (const std::string e : {"e1", "e2"}) {
    for (const auto& s : seqs) {
      double prod = 1.0;
      TokenId prev = v.bos();
      for (TokenId t : s) {
        prod *= table.at(e).at(prev)[t == x ? 0 : 1];
        prev = t;
      }
      prod *= table.at(e).at(prev)[2];
      const auto cond = Condition::emotions({v.emotion_id(e)});
      EXPECT_NEAR(sequence_logprob(model, cond, s).value(), std::log(prod), 1e-12);
    }
  }
}

TEST(SequenceLogprob, CertainPathIsZero) {
  Vocabulary v = Vocabulary::with_emotions({"e"});
  const TokenId a = v.add_word("a");
  const TableModel model(v, [&](const Condition&, std::span<const TokenId> prefix) {
    std::vector<double> p(v.size(), 0.0);
    p[prefix.empty() ? a : v.eos()] = 1.0;
    return p;
  });
  const std::vector<TokenId> s = {a};
  EXPECT_EQ(sequence_logprob(model, Condition{}, s).value(), 0.0);
}

TEST(SampleToken, PointMass) {
  std::vector<double> p(10, 0.0);
  p[7] = 1.0;
  const auto d = Distribution::from_probs(p);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    EXPECT_EQ(sample_token(d, SamplingStrategy::greedy(), seed), 7u);
    EXPECT_EQ(sample_token(d, SamplingStrategy::nucleus(0.9), seed), 7u);
    EXPECT_EQ(sample_token(d, SamplingStrategy::with_temperature(0.5), seed), 7u);
  }
}

TEST(SampleToken, GreedyAndNucleus) {
  const std::vector<double> two = {0.6, 0.4};
  EXPECT_EQ(sample_token(Distribution::from_probs(two), SamplingStrategy::greedy(), 0), 0u);
  const std::vector<double> three = {0.6, 0.3, 0.1};
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    ASSERT_EQ(sample_token(Distribution::from_probs(three), SamplingStrategy::nucleus(0.5), seed), 0u);
  }
}

TEST(SampleToken, InvalidParameters) {
  const auto d = Distribution::uniform(3);
  EXPECT_THROW(sample_token(d, SamplingStrategy::nucleus(0.0), 0), UsageError);
  EXPECT_THROW(sample_token(d, SamplingStrategy::nucleus(1.5), 0), UsageError);
  EXPECT_THROW(sample_token(d, SamplingStrategy::with_temperature(0.0), 0), UsageError);
  EXPECT_THROW(sample_token(d, SamplingStrategy::with_temperature(-1.0), 0), UsageError);
}

TEST(SampleToken, DeterministicAndCalibrated) {
  const std::vector<double> p = {0.5, 0.3, 0.2};
  const auto d = Distribution::from_probs(p);
  std::vector<int> hits(3, 0);
  for (std::uint64_t seed = 0; seed < 20000; ++seed) {
    const TokenId a = sample_token(d, SamplingStrategy::with_temperature(1.0), seed);
    ASSERT_EQ(a, sample_token(d, SamplingStrategy::with_temperature(1.0), seed));
    ++hits[a];
  }
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(hits[i] / 20000.0, p[i], 0.015);
  // Temperature sharpens toward the mode.
  int mode = 0;
  for (std::uint64_t seed = 0; seed < 5000; ++seed) {
    mode += sample_token(d, SamplingStrategy::with_temperature(0.25), seed) == 0 ? 1 : 0;
  }
  EXPECT_GT(mode / 5000.0, 0.8);
}

}  // namespace
}  // namespace focusrsa
