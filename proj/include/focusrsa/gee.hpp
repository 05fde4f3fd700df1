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

// Generative emotion estimation over any ConditionalModel trained to produce
// text given an emotion label.
//
// Recognition applies Bayes' rule to the sequence likelihood:
//
//   P(e | c)  ∝  P(c | e) P(e)
//
// Cause words are scored by how strongly each word, given the words before
// it, points at the recognized emotion ê rather than a small contrast set of
// the least likely emotions:
//
//   score(t) = P(w_t | ê, w_<t) P(ê) / Σ_{e' ∈ E} P(w_t | e', w_<t) P(e')
//
// with P(e') uniform over the contrast set E. The expectation over partial
// utterances is taken with a single sample, the observed prefix.

#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "focusrsa/errors.hpp"
#include "focusrsa/model.hpp"
#include "focusrsa/prob.hpp"
#include "focusrsa/rng.hpp"
#include "focusrsa/text.hpp"

namespace focusrsa {

class EmotionCatalog {
 public:
  EmotionCatalog() = default;

  // Uniform prior.
  explicit EmotionCatalog(std::vector<std::string> labels)
      : labels_(std::move(labels)), prior_(Distribution::uniform(nonempty(labels_).size())) {
    check_unique();
  }

  EmotionCatalog(std::vector<std::string> labels, Distribution prior)
      : labels_(std::move(labels)), prior_(normalize(std::move(prior))) {
    if (nonempty(labels_).size() != prior_.size()) {
      throw UsageError("prior size does not match the label count");
    }
    check_unique();
  }

  const std::vector<std::string>& labels() const { return labels_; }
  const Distribution& prior() const { return prior_; }
  std::size_t size() const { return labels_.size(); }
  const std::string& label(std::size_t i) const { return labels_.at(i); }

  std::size_t index_of(std::string_view label) const {
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      if (labels_[i] == label) return i;
    }
    throw LabelError(std::string(label));
  }

 private:
  static const std::vector<std::string>& nonempty(const std::vector<std::string>& l) {
    if (l.empty()) throw UsageError("emotion catalog is empty");
    return l;
  }
  void check_unique() const {
    std::set<std::string> seen(labels_.begin(), labels_.end());
    if (seen.size() != labels_.size()) throw UsageError("duplicate label in emotion catalog");
  }

  std::vector<std::string> labels_;
  Distribution prior_;
};

struct EmotionPosterior {
  std::vector<std::string> labels;   // catalog order
  Distribution distribution;         // over catalog indices
  std::vector<std::size_t> sorted;   // descending posterior, ties by catalog order

  std::size_t top() const { return sorted.front(); }
  const std::string& top_label() const { return labels[sorted.front()]; }
  double prob(std::string_view label) const {
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == label) return distribution.prob(i);
    }
    throw LabelError(std::string(label));
  }
  std::vector<std::string> sorted_labels() const {
    std::vector<std::string> out;
    for (std::size_t i : sorted) out.push_back(labels[i]);
    return out;
  }
};

template <ConditionalModel M>
EmotionPosterior recognize_emotion(const M& model, const EmotionCatalog& catalog,
                                   const Utterance& utterance) {
  if (utterance.empty()) throw UsageError("cannot recognize emotion of an empty utterance");
  const Vocabulary& vocab = model.vocabulary();
  const std::vector<TokenId> ids = vocab.encode(utterance);
  std::vector<double> logits(catalog.size());
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    const Condition cond = Condition::emotions({vocab.emotion_id(catalog.label(i))});
    logits[i] = sequence_logprob(model, cond, ids).value() + catalog.prior()[i];
  }
  EmotionPosterior post;
  post.labels = catalog.labels();
  post.distribution = normalize(Distribution(std::move(logits)));
  post.sorted = post.distribution.ranked();
  return post;
}

// The recognized emotion followed by the `m` lowest-posterior labels
// (ascending posterior, ties by catalog order).
inline std::vector<std::string> contrast_set(const EmotionPosterior& posterior, std::size_t m = 2) {
  const std::size_t n = posterior.labels.size();
  if (n < m + 1) {
    throw UsageError("contrast set needs at least " + std::to_string(m + 1) + " labels, catalog has " +
                     std::to_string(n));
  }
  const std::size_t top = posterior.top();
  std::vector<std::size_t> rest;
  for (std::size_t i = 0; i < n; ++i) {
    if (i != top) rest.push_back(i);
  }
  std::stable_sort(rest.begin(), rest.end(), [&](std::size_t a, std::size_t b) {
    return posterior.distribution[a] < posterior.distribution[b];
  });
  std::vector<std::string> out{posterior.labels[top]};
  for (std::size_t i = 0; i < m; ++i) out.push_back(posterior.labels[rest[i]]);
  return out;
}

// The `n` lowest-posterior labels in ascending posterior order, never the
// recognized emotion.
inline std::vector<std::string> least_likely(const EmotionPosterior& posterior, std::size_t n) {
  auto cs = contrast_set(posterior, n);
  cs.erase(cs.begin());
  return cs;
}

struct PositionScore {
  double score = 0.0;                   // in [0, 1]
  std::vector<double> log_likelihoods;  // log P(w_t | e', w_<t) per contrast label
  bool uninformative = false;           // every contrast label gave zero mass
};

struct CauseScores {
  std::vector<std::string> contrast;  // contrast[0] is the recognized emotion
  std::vector<std::string> words;
  std::vector<PositionScore> positions;

  std::vector<double> values() const {
    std::vector<double> out;
    for (const auto& p : positions) out.push_back(p.score);
    return out;
  }
};

struct CauseScoreOptions {
  // Prefixes averaged per position. Sample 0 is always the observed prefix;
  // further samples draw the prefix from the class-agnostic model.
  std::size_t samples = 1;
  std::uint64_t seed = 0;
};

namespace detail {

template <ConditionalModel M>
std::vector<TokenId> sample_prefix(const M& model, std::size_t length, Rng& rng) {
  const Vocabulary& vocab = model.vocabulary();
  std::vector<TokenId> out;
  const Condition cond;
  const auto strategy = SamplingStrategy::nucleus(0.9);
  while (out.size() < length) {
    Distribution d = model.next_token_logprobs(cond, out);
    for (TokenId id = 0; id < d.size(); ++id) {
      if (!vocab.is_word(id) && id != vocab.unk()) d.mutable_logits()[id] = kNegInf;
    }
    out.push_back(sample_token(normalize(std::move(d)), strategy, rng));
  }
  return out;
}

// One position's score against the contrast set for a given prefix.
template <ConditionalModel M>
PositionScore score_position(const M& model, const std::vector<TokenId>& contrast_ids,
                             std::span<const TokenId> prefix, TokenId word) {
  PositionScore ps;
  const double log_prior = -std::log(static_cast<double>(contrast_ids.size()));
  std::vector<double> joint;
  for (TokenId e : contrast_ids) {
    const double ll = step_logprob(model, Condition::emotions({e}), prefix, word);
    ps.log_likelihoods.push_back(ll);
    joint.push_back(ll + log_prior);
  }
  const double denom = log_sum_exp(std::span<const double>(joint));
  if (denom == kNegInf) {
    ps.score = 1.0 / static_cast<double>(contrast_ids.size());
    ps.uninformative = true;
  } else {
    ps.score = std::exp(joint[0] - denom);
  }
  return ps;
}

}  // namespace detail

template <ConditionalModel M>
CauseScores cause_scores(const M& model, const Utterance& utterance,
                         const std::vector<std::string>& contrast,
                         const CauseScoreOptions& opts = {}) {
  if (utterance.empty()) throw UsageError("cannot score causes of an empty utterance");
  if (contrast.empty()) throw UsageError("contrast set is empty");
  if (opts.samples < 1) throw UsageError("sample count must be at least 1");
  const Vocabulary& vocab = model.vocabulary();
  std::vector<TokenId> contrast_ids;
  for (const auto& label : contrast) contrast_ids.push_back(vocab.emotion_id(label));

  const std::vector<TokenId> ids = vocab.encode(utterance);
  CauseScores out;
  out.contrast = contrast;
  out.words = utterance.words;
  for (std::size_t t = 0; t < ids.size(); ++t) {
    out.positions.push_back(
        detail::score_position(model, contrast_ids, std::span<const TokenId>(ids).first(t), ids[t]));
  }
  if (opts.samples > 1 && ids.size() > 1) {
    for (std::size_t s = 1; s < opts.samples; ++s) {
      Rng rng(opts.seed + s);
      const auto prefix = detail::sample_prefix(model, ids.size() - 1, rng);
      for (std::size_t t = 1; t < ids.size(); ++t) {
        const auto ps = detail::score_position(model, contrast_ids,
                                               std::span<const TokenId>(prefix).first(t), ids[t]);
        out.positions[t].score += ps.score;
      }
    }
    for (std::size_t t = 1; t < ids.size(); ++t) {
      out.positions[t].score /= static_cast<double>(opts.samples);
    }
  }
  return out;
}

inline const std::vector<std::string>& default_stopwords() {
  static const std::vector<std::string> words = {
      "a",     "an",   "the",  "and",  "or",   "but",  "if",    "of",   "at",   "by",
      "for",   "with", "to",   "from", "in",   "on",   "off",   "up",   "down", "out",
      "i",     "me",   "my",   "we",   "our",  "you",  "your",  "he",   "him",  "his",
      "she",   "her",  "it",   "its",  "they", "them", "their", "this", "that", "these",
      "those", "is",   "am",   "are",  "was",  "were", "be",    "been", "being", "have",
      "has",   "had",  "do",   "does", "did",  "so",   "very",  "just", "too",  "when",
      "then",  "than", "there", "here", "about", "all", "some",  "not",  "no",   "because"};
  return words;
}

// Words a cause selection may not pick. Empty by default.
struct CauseFilter {
  bool exclude_punctuation = false;
  std::unordered_set<std::string> stopwords;

  static CauseFilter standard() {
    CauseFilter f;
    f.exclude_punctuation = true;
    f.stopwords.insert(default_stopwords().begin(), default_stopwords().end());
    return f;
  }

  bool allows(const std::string& word) const {
    if (exclude_punctuation && is_punctuation_token(word)) return false;
    return stopwords.count(word) == 0;
  }
};

struct CauseSelection {
  std::vector<std::size_t> positions;  // descending score, ties by ascending index
  std::vector<std::string> words;
  std::size_t k = 0;
};

inline CauseSelection top_k_causes(const CauseScores& scores, std::size_t k,
                                   const CauseFilter& filter = {}) {
  if (k < 1) throw UsageError("k must be at least 1");
  std::vector<std::size_t> eligible;
  for (std::size_t t = 0; t < scores.positions.size(); ++t) {
    if (filter.allows(scores.words[t])) eligible.push_back(t);
  }
  std::stable_sort(eligible.begin(), eligible.end(), [&](std::size_t a, std::size_t b) {
    return scores.positions[a].score > scores.positions[b].score;
  });
  if (eligible.size() > k) eligible.resize(k);
  CauseSelection sel;
  sel.k = k;
  sel.positions = eligible;
  for (std::size_t t : eligible) sel.words.push_back(scores.words[t]);
  return sel;
}

// Full analysis of one utterance: recognition, contrast set, scores, top-k.
struct CauseAnalysis {
  EmotionPosterior posterior;
  CauseScores scores;
  CauseSelection selection;
};

template <ConditionalModel M>
CauseAnalysis analyze_causes(const M& model, const EmotionCatalog& catalog,
                             const Utterance& utterance, std::size_t k,
                             const CauseFilter& filter = {}, const CauseScoreOptions& opts = {}) {
  CauseAnalysis a;
  a.posterior = recognize_emotion(model, catalog, utterance);
  a.scores = cause_scores(model, utterance, contrast_set(a.posterior, 2), opts);
  a.selection = top_k_causes(a.scores, k, filter);
  return a;
}

}  // namespace focusrsa
