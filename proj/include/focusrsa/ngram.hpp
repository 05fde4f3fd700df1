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

// Reference class-conditional n-gram backend.
//
// For a conditioning class k (the exact emotion-prefix sequence) and a
// history h of at most order-1 tokens, the next-token probability is the
// interpolated absolute-discounting recursion
//
//   P_0(w)      = 1 / |emittable tokens|
//   P_m(w | h)  = max(c_k(h, w) - D, 0) / c_k(h)  +  D * N1+(h .) / c_k(h) * P_{m-1}(w | h')
//
// where h' drops the oldest token of h and a history never seen in class k
// passes the lower-order value through unchanged (back-off weight 1).
//
// Class back-off:
//   - a prefix seen in training uses its own tables;
//   - a multi-emotion prefix never seen in training averages the
//     distributions of its single-emotion classes (when they all have data);
//   - otherwise the pooled class-agnostic tables (empty prefix) are used.
// A single catalog label with no training data has empty tables and so
// predicts the uniform floor.
//
// When the condition carries context tokens and the model has a nonzero copy
// weight lambda, the n-gram value is mixed with a copy distribution over the
// context:
//
//   (1 - lambda) * P(w | h) + lambda * q(w | ctx)
//   q(w | ctx) ∝ count_ctx(w) * log((1 + N) / (1 + df(w)))
//
// with N the number of training contexts and df(w) the number containing w,
// so tokens present in every context are never copied.

#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "focusrsa/corpus.hpp"
#include "focusrsa/errors.hpp"
#include "focusrsa/model.hpp"
#include "focusrsa/prob.hpp"
#include "focusrsa/text.hpp"
#include "focusrsa/vocabulary.hpp"

namespace focusrsa {

struct NGramOptions {
  int order = 3;
  double discount = 0.75;
  // Unset: estimated from held-out dialogue pairs when the corpus has
  // contexts, otherwise zero.
  std::optional<double> copy_weight;
  // Catalog labels; empty means the sorted distinct labels of the corpus.
  std::vector<std::string> catalog;
  // Words seen fewer times than this are aliased to the unknown token.
  std::uint32_t min_count = 2;
};

class NGramModel {
 public:
  using History = std::vector<TokenId>;

  struct HistoryLess {
    using is_transparent = void;
    template <class A, class B>
    bool operator()(const A& a, const B& b) const {
      return std::lexicographical_compare(std::begin(a), std::end(a), std::begin(b), std::end(b));
    }
  };

  struct Node {
    std::uint64_t total = 0;
    std::map<TokenId, std::uint64_t> next;

    std::uint64_t count(TokenId w) const {
      auto it = next.find(w);
      return it == next.end() ? 0 : it->second;
    }
    friend bool operator==(const Node&, const Node&) = default;
  };

  // All histories of length 0..order-1 for one conditioning class.
  using Table = std::map<History, Node, HistoryLess>;
  using ClassKey = std::vector<TokenId>;
  using Tables = std::map<ClassKey, Table>;

  struct Parts {
    Vocabulary vocabulary;
    int order = 3;
    double discount = 0.75;
    double copy_weight = 0.0;
    std::uint32_t min_count = 2;
    std::string fingerprint;
    Tables tables;
    // Context document frequencies, indexed by token id (empty: none seen).
    std::vector<std::uint32_t> context_df;
    std::uint32_t context_docs = 0;
  };

  explicit NGramModel(Parts parts) : p_(std::move(parts)) {
    if (p_.order < 1 || p_.order > 6) throw UsageError("order must lie in [1, 6]");
    if (!(p_.discount > 0.0 && p_.discount < 1.0)) throw UsageError("discount must lie in (0, 1)");
    if (!(p_.copy_weight >= 0.0 && p_.copy_weight < 1.0)) {
      throw UsageError("copy weight must lie in [0, 1)");
    }
    emittable_.assign(p_.vocabulary.size(), false);
    for (TokenId id = 0; id < p_.vocabulary.size(); ++id) {
      if (p_.vocabulary.is_emittable(id)) {
        emittable_[id] = true;
        ++n_emittable_;
      }
    }
    if (n_emittable_ == 0) throw DataError("vocabulary has no emittable tokens");
    floor_ = 1.0 / static_cast<double>(n_emittable_);
    if (!p_.context_df.empty() && p_.context_df.size() != p_.vocabulary.size()) {
      throw DataError("context frequency table does not match the vocabulary");
    }
    idf_.assign(p_.vocabulary.size(), 0.0);
    for (std::size_t w = 0; w < p_.context_df.size(); ++w) {
      if (p_.context_df[w] > p_.context_docs) throw DataError("context frequency exceeds documents");
      idf_[w] = std::log((1.0 + p_.context_docs) / (1.0 + p_.context_df[w]));
    }
  }

  const Vocabulary& vocabulary() const { return p_.vocabulary; }
  int order() const { return p_.order; }
  double discount() const { return p_.discount; }
  double copy_weight() const { return p_.copy_weight; }
  std::uint32_t min_count() const { return p_.min_count; }
  const std::string& fingerprint() const { return p_.fingerprint; }
  const Tables& tables() const { return p_.tables; }
  const Parts& parts() const { return p_; }
  std::size_t emittable_count() const { return n_emittable_; }
  std::vector<std::string> catalog() const { return p_.vocabulary.emotion_labels(); }

  Distribution next_token_logprobs(const Condition& cond, std::span<const TokenId> prefix) const {
    cond.validate(p_.vocabulary);
    const History hist = history_of(prefix);
    std::vector<double> probs(p_.vocabulary.size(), 0.0);
    const auto tables = resolve(cond.emotion_prefix);
    if (tables.size() == 1) {
      dense_class(*tables[0], hist, probs);
    } else {
      std::vector<double> part(probs.size());
      for (const Table* t : tables) {
        dense_class(*t, hist, part);
        for (std::size_t w = 0; w < probs.size(); ++w) probs[w] += part[w];
      }
      const auto k = static_cast<double>(tables.size());
      for (double& v : probs) v /= k;
    }
    const auto copy = copy_counts(cond.context_tokens);
    if (p_.copy_weight > 0.0 && copy.total > 0.0) {
      const double lambda = p_.copy_weight;
      for (std::size_t w = 0; w < probs.size(); ++w) {
        const double c = copy_value(copy, static_cast<TokenId>(w));
        probs[w] = (1.0 - lambda) * probs[w] + lambda * c;
      }
    }
    std::vector<double> logits(probs.size());
    for (std::size_t w = 0; w < probs.size(); ++w) {
      logits[w] = probs[w] > 0.0 ? std::log(probs[w]) : kNegInf;
    }
    return Distribution(std::move(logits));
  }

  // Same arithmetic as next_token_logprobs, one token at a time.
  double token_logprob(const Condition& cond, std::span<const TokenId> prefix,
                       TokenId token) const {
    cond.validate(p_.vocabulary);
    if (token >= p_.vocabulary.size()) throw UsageError("token id out of range");
    const History hist = history_of(prefix);
    const auto tables = resolve(cond.emotion_prefix);
    double p;
    if (tables.size() == 1) {
      p = scalar_class(*tables[0], hist, token);
    } else {
      p = 0.0;
      for (const Table* t : tables) p += scalar_class(*t, hist, token);
      p /= static_cast<double>(tables.size());
    }
    const auto copy = copy_counts(cond.context_tokens);
    if (p_.copy_weight > 0.0 && copy.total > 0.0) {
      const double lambda = p_.copy_weight;
      p = (1.0 - lambda) * p + lambda * copy_value(copy, token);
    }
    return p > 0.0 ? std::log(p) : kNegInf;
  }

  // Mass kept by the discounted counts of `hist` in `cls` plus the back-off
  // mass handed to lower orders. Equals 1 for every seen history.
  double conserved_mass(const ClassKey& cls, std::span<const TokenId> hist) const {
    auto t = p_.tables.find(cls);
    if (t == p_.tables.end()) throw UsageError("unknown class");
    auto it = t->second.find(hist);
    if (it == t->second.end() || it->second.total == 0) return 1.0;
    const Node& n = it->second;
    const auto total = static_cast<double>(n.total);
    double kept = 0.0;
    for (const auto& [w, c] : n.next) kept += (static_cast<double>(c) - p_.discount) / total;
    return kept + p_.discount * static_cast<double>(n.next.size()) / total;
  }

  // q(w | ctx) of the copy component, whatever the copy weight; zero when
  // no context token is copyable.
  double copy_probability(const std::vector<TokenId>& ctx, TokenId w) const {
    if (w >= p_.vocabulary.size()) throw UsageError("token id out of range");
    const auto copy = copy_counts(ctx);
    return copy.total > 0.0 ? copy_value(copy, w) : 0.0;
  }

  // Emotion prefix for a list of labels.
  Condition emotion_condition(const std::vector<std::string>& labels) const {
    Condition c;
    for (const auto& l : labels) c.emotion_prefix.push_back(p_.vocabulary.emotion_id(l));
    return c;
  }

  friend bool operator==(const NGramModel& a, const NGramModel& b) {
    return a.p_.vocabulary == b.p_.vocabulary && a.p_.order == b.p_.order &&
           a.p_.discount == b.p_.discount && a.p_.copy_weight == b.p_.copy_weight &&
           a.p_.min_count == b.p_.min_count && a.p_.fingerprint == b.p_.fingerprint &&
           a.p_.tables == b.p_.tables && a.p_.context_df == b.p_.context_df &&
           a.p_.context_docs == b.p_.context_docs;
  }

 private:
  struct CopyCounts {
    std::vector<std::pair<TokenId, double>> weights;  // sorted by id
    double total = 0.0;
  };

  // [BOS] + prefix, truncated to the last order-1 tokens.
  History history_of(std::span<const TokenId> prefix) const {
    const std::size_t want = static_cast<std::size_t>(p_.order - 1);
    History h;
    if (want == 0) return h;
    const std::size_t avail = prefix.size() + 1;
    if (avail <= want) {
      h.push_back(p_.vocabulary.bos());
      h.insert(h.end(), prefix.begin(), prefix.end());
    } else {
      h.assign(prefix.end() - static_cast<std::ptrdiff_t>(want), prefix.end());
    }
    return h;
  }

  std::vector<const Table*> resolve(const std::vector<TokenId>& prefix) const {
    if (auto it = p_.tables.find(prefix); it != p_.tables.end()) return {&it->second};
    if (prefix.size() == 1) return {&empty_table_};
    if (prefix.size() > 1) {
      std::vector<const Table*> parts;
      for (TokenId e : prefix) {
        auto it = p_.tables.find(ClassKey{e});
        if (it == p_.tables.end()) break;
        parts.push_back(&it->second);
      }
      if (parts.size() == prefix.size()) return parts;
    }
    if (auto it = p_.tables.find(ClassKey{}); it != p_.tables.end()) return {&it->second};
    return {&empty_table_};
  }

  double scalar_class(const Table& table, const History& hist, TokenId w) const {
    if (!emittable_[w]) return 0.0;
    double p = floor_;
    const std::span<const TokenId> h(hist);
    for (std::size_t m = 0; m <= h.size(); ++m) {
      auto it = table.find(h.last(m));
      if (it == table.end() || it->second.total == 0) continue;
      const Node& n = it->second;
      const auto total = static_cast<double>(n.total);
      const double gamma = p_.discount * static_cast<double>(n.next.size()) / total;
      const std::uint64_t c = n.count(w);
      p = (c > 0 ? (static_cast<double>(c) - p_.discount) / total : 0.0) + gamma * p;
    }
    return p;
  }

  void dense_class(const Table& table, const History& hist, std::vector<double>& p) const {
    for (std::size_t w = 0; w < p.size(); ++w) p[w] = emittable_[w] ? floor_ : 0.0;
    std::vector<std::pair<TokenId, double>> seen;
    const std::span<const TokenId> h(hist);
    for (std::size_t m = 0; m <= h.size(); ++m) {
      auto it = table.find(h.last(m));
      if (it == table.end() || it->second.total == 0) continue;
      const Node& n = it->second;
      const auto total = static_cast<double>(n.total);
      const double gamma = p_.discount * static_cast<double>(n.next.size()) / total;
      seen.clear();
      for (const auto& [w, c] : n.next) {
        seen.emplace_back(w, (static_cast<double>(c) - p_.discount) / total + gamma * p[w]);
      }
      for (std::size_t w = 0; w < p.size(); ++w) {
        if (emittable_[w]) p[w] = 0.0 + gamma * p[w];
      }
      for (const auto& [w, v] : seen) p[w] = v;
    }
  }

  CopyCounts copy_counts(const std::vector<TokenId>& ctx) const {
    CopyCounts cc;
    std::map<TokenId, double> m;
    for (TokenId id : ctx) {
      TokenId t = id;
      // An unknown context word cannot be copied as itself.
      if (p_.vocabulary.is_aliased(t) || t == p_.vocabulary.unk()) continue;
      if (!emittable_[t] || idf_[t] <= 0.0) continue;
      m[t] += idf_[t];
    }
    cc.weights.assign(m.begin(), m.end());
    for (const auto& [t, v] : cc.weights) cc.total += v;
    return cc;
  }

  static double copy_value(const CopyCounts& cc, TokenId w) {
    auto it = std::lower_bound(cc.weights.begin(), cc.weights.end(), w,
                               [](const auto& e, TokenId id) { return e.first < id; });
    const double c = (it != cc.weights.end() && it->first == w) ? it->second : 0.0;
    return c / cc.total;
  }

  Parts p_;
  std::vector<bool> emittable_;
  std::size_t n_emittable_ = 0;
  double floor_ = 0.0;
  std::vector<double> idf_;
  Table empty_table_;
};

namespace detail {

inline void count_sequence(NGramModel::Table& table, const std::vector<TokenId>& seq, int order) {
  // seq = [BOS, w_1, ..., w_T, EOS]; predict positions 1..T+1.
  for (std::size_t t = 1; t < seq.size(); ++t) {
    const std::size_t max_m = std::min<std::size_t>(static_cast<std::size_t>(order - 1), t);
    for (std::size_t m = 0; m <= max_m; ++m) {
      NGramModel::History h(seq.begin() + static_cast<std::ptrdiff_t>(t - m),
                            seq.begin() + static_cast<std::ptrdiff_t>(t));
      auto& node = table[std::move(h)];
      ++node.total;
      ++node.next[seq[t]];
    }
  }
}

inline std::string corpus_fingerprint(const std::vector<TrainingExample>& corpus) {
  std::string canon;
  for (const auto& ex : corpus) {
    canon += ex.emotion;
    canon += '\t';
    canon += ex.text;
    canon += '\t';
    canon += ex.context;
    canon += '\n';
  }
  return hex32(crc32_of(canon));
}

inline NGramModel train_counts(const std::vector<TrainingExample>& corpus, const NGramOptions& opts,
                        double copy_weight);

// Deleted interpolation: fit the copy weight by EM on every tenth dialogue
// pair, with the n-gram part trained on the remaining pairs.
inline double estimate_copy_weight(const std::vector<TrainingExample>& corpus,
                                   const NGramOptions& opts) {
  std::vector<TrainingExample> fit, heldout;
  std::size_t with_context = 0;
  for (const auto& ex : corpus) {
    if (ex.context.empty()) {
      fit.push_back(ex);
      continue;
    }
    (with_context++ % 10 == 9 ? heldout : fit).push_back(ex);
  }
  if (heldout.empty() || fit.empty()) return 0.0;
  const NGramModel base = train_counts(fit, opts, 0.0);
  const Vocabulary& v = base.vocabulary();

  // Per held-out token: (n-gram probability, copy probability).
  std::vector<std::pair<double, double>> pairs;
  for (const auto& ex : heldout) {
    const auto ctx = v.encode(tokenize(ex.context));
    std::vector<TokenId> resp = v.encode(tokenize(ex.text));
    resp.push_back(v.eos());
    const Condition cond;
    for (std::size_t t = 0; t < resp.size(); ++t) {
      const double png = std::exp(
          base.token_logprob(cond, std::span<const TokenId>(resp).first(t), resp[t]));
      pairs.emplace_back(png, base.copy_probability(ctx, resp[t]));
    }
  }
  if (pairs.empty()) return 0.0;
  double lambda = 0.5;
  for (int iter = 0; iter < 100; ++iter) {
    double resp_sum = 0.0;
    for (const auto& [png, pc] : pairs) {
      const double a = lambda * pc;
      const double b = (1.0 - lambda) * png;
      if (a + b > 0.0) resp_sum += a / (a + b);
    }
    const double next = resp_sum / static_cast<double>(pairs.size());
    if (std::abs(next - lambda) < 1e-10) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return std::clamp(lambda, 0.0, 0.95);
}

inline NGramModel train_counts(const std::vector<TrainingExample>& corpus,
                               const NGramOptions& opts, double copy_weight) {
  std::vector<std::string> catalog = opts.catalog;
  if (catalog.empty()) {
    std::set<std::string> labels;
    for (const auto& ex : corpus) labels.insert(ex.emotion);
    catalog.assign(labels.begin(), labels.end());
  }
  NGramModel::Parts parts;
  parts.vocabulary = Vocabulary::with_emotions(catalog);
  parts.order = opts.order;
  parts.discount = opts.discount;
  parts.copy_weight = copy_weight;
  parts.min_count = opts.min_count;
  parts.fingerprint = corpus_fingerprint(corpus);

  std::vector<Utterance> texts, contexts;
  std::map<std::string, std::uint64_t> freq;
  for (const auto& ex : corpus) {
    if (!parts.vocabulary.has_emotion(ex.emotion)) throw LabelError(ex.emotion, ex.line);
    texts.push_back(tokenize(ex.text));
    contexts.push_back(tokenize(ex.context));
    for (const auto& w : texts.back().words) ++freq[w];
    for (const auto& w : contexts.back().words) ++freq[w];
  }
  for (const auto& [word, n] : freq) {
    if (parts.vocabulary.find(word)) continue;  // collides with a reserved surface
    const TokenId id = parts.vocabulary.add_word(word);
    if (n < opts.min_count) parts.vocabulary.set_aliased(id, true);
  }

  const Vocabulary& v = parts.vocabulary;
  NGramModel::Table& pooled = parts.tables[NGramModel::ClassKey{}];
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    std::vector<TokenId> seq{v.bos()};
    for (TokenId t : v.encode(texts[i])) seq.push_back(t);
    seq.push_back(v.eos());
    count_sequence(parts.tables[NGramModel::ClassKey{v.emotion_id(corpus[i].emotion)}], seq,
                   opts.order);
    count_sequence(pooled, seq, opts.order);
  }
  parts.context_df.assign(v.size(), 0);
  for (const auto& ctx : contexts) {
    if (ctx.empty()) continue;
    ++parts.context_docs;
    std::set<TokenId> present;
    for (TokenId t : v.encode(ctx)) present.insert(t);
    for (TokenId t : present) ++parts.context_df[t];
  }
  return NGramModel(std::move(parts));
}

}  // namespace detail

// Class-conditional maximum-likelihood counting with absolute-discount
// interpolation. The conditioning class of each example is its single
// emotion label; every example also feeds the pooled class.
inline NGramModel train_ngram(const std::vector<TrainingExample>& corpus,
                              const NGramOptions& opts = {}) {
  if (corpus.empty()) throw UsageError("training corpus is empty");
  if (opts.order < 1 || opts.order > 6) throw UsageError("order must lie in [1, 6]");
  if (!(opts.discount > 0.0 && opts.discount < 1.0)) {
    throw UsageError("discount must lie in (0, 1)");
  }
  if (opts.min_count < 1) throw UsageError("min_count must be at least 1");
  double lambda = 0.0;
  if (opts.copy_weight) {
    lambda = *opts.copy_weight;
    if (!(lambda >= 0.0 && lambda < 1.0)) throw UsageError("copy weight must lie in [0, 1)");
  } else {
    const bool has_context = std::any_of(corpus.begin(), corpus.end(),
                                         [](const auto& ex) { return !ex.context.empty(); });
    if (has_context) lambda = detail::estimate_copy_weight(corpus, opts);
  }
  return detail::train_counts(corpus, opts, lambda);
}

}  // namespace focusrsa
