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

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

#include "focusrsa/corpus.hpp"
#include "focusrsa/errors.hpp"
#include "focusrsa/gee.hpp"
#include "focusrsa/model.hpp"
#include "focusrsa/rng.hpp"
#include "focusrsa/text.hpp"

namespace focusrsa {

// Runs fn(i) for i in [0, n) on up to `jobs` threads. Results land at their
// own index, so the output does not depend on the job count. The first
// exception thrown by any worker is rethrown.
template <class Fn>
auto parallel_map(std::size_t n, std::size_t jobs, Fn&& fn) {
  using R = decltype(fn(std::size_t{0}));
  static_assert(!std::is_same_v<R, bool>, "vector<bool> elements are not independently writable");
  std::vector<R> out(n);
  jobs = std::max<std::size_t>(1, std::min(jobs, n));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> workers;
  for (std::size_t j = 0; j < jobs; ++j) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          out[i] = fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  if (error) std::rethrow_exception(error);
  return out;
}

struct RecallReport {
  std::map<std::size_t, double> per_k;
  std::size_t n_examples = 0;  // examples with at least one gold cause
  std::size_t n_skipped = 0;   // examples with no gold cause
};

// Mean over examples of |top-k predicted ∩ gold| / |gold|, by position.
inline RecallReport recall_at_k(const std::vector<std::vector<std::size_t>>& predictions,
                                const std::vector<EmoCauseExample>& gold,
                                const std::vector<std::size_t>& ks) {
  if (predictions.size() != gold.size()) {
    throw UsageError("predictions (" + std::to_string(predictions.size()) +
                     ") and gold examples (" + std::to_string(gold.size()) + ") differ in count");
  }
  RecallReport r;
  for (std::size_t k : ks) {
    if (k < 1) throw UsageError("k must be at least 1");
    r.per_k[k] = 0.0;
  }
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const auto& g = gold[i].cause_indices;
    if (g.empty()) {
      ++r.n_skipped;
      continue;
    }
    ++r.n_examples;
    const std::set<std::size_t> gs(g.begin(), g.end());
    for (std::size_t k : ks) {
      std::set<std::size_t> top;
      for (std::size_t j = 0; j < predictions[i].size() && top.size() < k; ++j) {
        top.insert(predictions[i][j]);
      }
      std::size_t hit = 0;
      for (std::size_t p : top) hit += gs.count(p);
      r.per_k[k] += static_cast<double>(hit) / static_cast<double>(gs.size());
    }
  }
  if (r.n_examples > 0) {
    for (auto& [k, v] : r.per_k) v /= static_cast<double>(r.n_examples);
  }
  return r;
}

// min(k, T) distinct positions drawn uniformly, in draw order.
inline std::vector<std::size_t> random_baseline(const EmoCauseExample& example, std::size_t k,
                                                std::uint64_t seed) {
  if (k < 1) throw UsageError("k must be at least 1");
  const std::size_t n = example.tokens.size();
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  Rng rng(seed);
  const std::size_t take = std::min(k, n);
  for (std::size_t i = 0; i < take; ++i) {
    const std::size_t j = i + rng.below(n - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(take);
  return idx;
}

// Expected recall@k of uniform random selection: for |S| = min(k, T) draws
// without replacement, E|S ∩ G| / |G| = |S| / T.
inline RecallReport expected_random_recall(const std::vector<EmoCauseExample>& gold,
                                           const std::vector<std::size_t>& ks) {
  RecallReport r;
  for (std::size_t k : ks) r.per_k[k] = 0.0;
  for (const auto& ex : gold) {
    if (ex.cause_indices.empty()) {
      ++r.n_skipped;
      continue;
    }
    ++r.n_examples;
    const auto t = static_cast<double>(ex.tokens.size());
    for (std::size_t k : ks) {
      r.per_k[k] += std::min(static_cast<double>(k), t) / t;
    }
  }
  if (r.n_examples > 0) {
    for (auto& [k, v] : r.per_k) v /= static_cast<double>(r.n_examples);
  }
  return r;
}

// Light suffix stripper used when coverage matching is asked to stem.
inline std::string crude_stem(std::string w) {
  auto ends = [&](std::string_view s) {
    return w.size() > s.size() && w.compare(w.size() - s.size(), s.size(), s) == 0;
  };
  if (ends("ies") && w.size() > 4) return w.substr(0, w.size() - 3) + "y";
  if (ends("ing") && w.size() > 5) return w.substr(0, w.size() - 3);
  if (ends("ed") && w.size() > 4) return w.substr(0, w.size() - 2);
  if (ends("es") && w.size() > 4) return w.substr(0, w.size() - 2);
  if (ends("s") && !ends("ss") && w.size() > 3) return w.substr(0, w.size() - 1);
  return w;
}

// Number of distinct cause words (case-folded, exact match unless `stem`)
// that appear anywhere in the response.
inline std::size_t coverage(const Utterance& response, const std::vector<std::string>& cause_words,
                            bool stem = false) {
  auto norm = [&](const std::string& w) { return stem ? crude_stem(to_lower(w)) : to_lower(w); };
  std::set<std::string> said;
  for (const auto& w : response.words) said.insert(norm(w));
  std::set<std::string> causes;
  for (const auto& w : cause_words) causes.insert(norm(w));
  std::size_t n = 0;
  for (const auto& c : causes) n += said.count(c);
  return n;
}

inline std::size_t coverage(const Utterance& response, const CauseSelection& causes,
                            bool stem = false) {
  return coverage(response, causes.words, stem);
}

struct AccuracyReport {
  std::map<std::size_t, double> per_k;
  std::size_t n_examples = 0;
};

template <ConditionalModel M>
AccuracyReport emotion_accuracy(const M& model, const EmotionCatalog& catalog,
                                const std::vector<TrainingExample>& examples,
                                const std::vector<std::size_t> ks = {1, 5},
                                std::size_t jobs = 1) {
  if (examples.empty()) throw UsageError("no examples to evaluate");
  std::vector<std::size_t> gold;
  for (const auto& ex : examples) {
    try {
      gold.push_back(catalog.index_of(ex.emotion));
    } catch (const LabelError&) {
      throw LabelError(ex.emotion, ex.line);
    }
  }
  // Rank of the gold label in the sorted posterior.
  const auto ranks = parallel_map(examples.size(), jobs, [&](std::size_t i) {
    const auto post = recognize_emotion(model, catalog, tokenize(examples[i].text));
    return static_cast<std::size_t>(
        std::find(post.sorted.begin(), post.sorted.end(), gold[i]) - post.sorted.begin());
  });
  AccuracyReport r;
  r.n_examples = examples.size();
  for (std::size_t k : ks) {
    if (k < 1) throw UsageError("k must be at least 1");
    std::size_t hit = 0;
    for (std::size_t rank : ranks) hit += rank < k ? 1 : 0;
    r.per_k[k] = static_cast<double>(hit) / static_cast<double>(examples.size());
  }
  return r;
}

// exp(-Σ log P(text) / Σ (tokens + 1)), end-of-sequence included.
template <ConditionalModel M>
double perplexity(const M& model, const std::vector<Condition>& conditions,
                  const std::vector<Utterance>& texts) {
  if (texts.empty()) throw UsageError("no texts for perplexity");
  if (conditions.size() != texts.size()) throw UsageError("one condition per text is required");
  double log_sum = 0.0;
  double count = 0.0;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    const auto ids = model.vocabulary().encode(texts[i]);
    log_sum += sequence_logprob(model, conditions[i], ids).value();
    count += static_cast<double>(ids.size() + 1);
  }
  return std::exp(-log_sum / count);
}

}  // namespace focusrsa
