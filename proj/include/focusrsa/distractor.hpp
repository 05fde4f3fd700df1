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

// Shared-world construction. A distractor is the original context with each
// selected cause word replaced, one for one, by a word sampled from the
// estimator conditioned on the least likely emotions. The listener then has
// to tell the true context apart from copies that differ only in those words.

#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "focusrsa/errors.hpp"
#include "focusrsa/gee.hpp"
#include "focusrsa/model.hpp"
#include "focusrsa/rng.hpp"
#include "focusrsa/text.hpp"

namespace focusrsa {

struct Replacement {
  std::size_t position = 0;
  std::string original;
  std::string replacement;
  bool fallback = false;  // retries exhausted; highest-mass alternative taken

  friend bool operator==(const Replacement&, const Replacement&) = default;
};

struct SamplingConfig {
  SamplingStrategy strategy = SamplingStrategy::nucleus(0.9, 1.0);
  std::size_t max_retries = 10;
  std::size_t n_negative_emotions = 3;
  std::size_t world_size = 3;

  void validate() const {
    strategy.validate();
    if (world_size < 1) throw UsageError("world size must be at least 1");
    if (n_negative_emotions < 1) throw UsageError("need at least one negative emotion");
    if (max_retries < 1) throw UsageError("max_retries must be at least 1");
  }
};

struct Distractor {
  Utterance utterance;
  std::vector<Replacement> replacements;  // ascending position
  std::vector<std::string> emotions;      // conditioning labels, ascending posterior
};

struct SharedWorld {
  std::vector<Utterance> contexts;  // contexts[0] is the true context
  std::vector<std::vector<Replacement>> replaced;       // per distractor
  std::vector<std::vector<std::string>> source_emotions;  // per distractor
  // For each distractor, the index of an earlier identical distractor.
  std::vector<std::optional<std::size_t>> duplicate_of;

  std::size_t size() const { return contexts.size(); }
  const Utterance& original() const { return contexts.front(); }

  static SharedWorld singleton(Utterance u) {
    SharedWorld w;
    w.contexts.push_back(std::move(u));
    return w;
  }
};

template <ConditionalModel M>
Distractor sample_distractor(const M& model, const Utterance& utterance,
                             const CauseSelection& selection, const EmotionPosterior& posterior,
                             const SamplingConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const Vocabulary& vocab = model.vocabulary();
  for (std::size_t pos : selection.positions) {
    if (pos >= utterance.size()) throw UsageError("cause position outside the utterance");
  }
  Distractor out;
  out.emotions = least_likely(posterior, cfg.n_negative_emotions);
  Condition cond;
  for (const auto& l : out.emotions) cond.emotion_prefix.push_back(vocab.emotion_id(l));

  const std::set<std::size_t> selected(selection.positions.begin(), selection.positions.end());
  std::vector<bool> replaceable(vocab.size(), false);
  std::size_t n_replaceable = 0;
  for (TokenId id = 0; id < vocab.size(); ++id) {
    if (vocab.is_word(id) && vocab.is_emittable(id)) {
      replaceable[id] = true;
      ++n_replaceable;
    }
  }

  Rng rng(seed);
  out.utterance = utterance;
  std::vector<TokenId> prefix;
  for (std::size_t t = 0; t < utterance.size(); ++t) {
    if (selected.count(t)) {
      const std::string& original = utterance.words[t];
      Distribution d = model.next_token_logprobs(cond, prefix);
      auto& logits = d.mutable_logits();
      bool any_alternative = false;
      for (TokenId id = 0; id < logits.size(); ++id) {
        if (!replaceable[id]) logits[id] = kNegInf;
        else if (vocab.token(id) != original) any_alternative = true;
      }
      if (!any_alternative || n_replaceable == 0) {
        throw CannotReplaceError("no vocabulary word can replace '" + original + "'");
      }
      std::optional<TokenId> chosen;
      std::vector<double> masked(logits.begin(), logits.end());
      for (std::size_t attempt = 0; attempt < cfg.max_retries; ++attempt) {
        if (std::all_of(masked.begin(), masked.end(), [](double v) { return v == kNegInf; })) {
          break;
        }
        const TokenId cand = sample_token(normalize(Distribution(masked)), cfg.strategy, rng);
        if (vocab.token(cand) != original) {
          chosen = cand;
          break;
        }
        masked[cand] = kNegInf;  // never propose it again
      }
      Replacement rep;
      rep.position = t;
      rep.original = original;
      if (!chosen) {
        rep.fallback = true;
        std::optional<TokenId> best;
        for (TokenId id = 0; id < logits.size(); ++id) {
          if (!replaceable[id] || vocab.token(id) == original) continue;
          if (!best || logits[id] > logits[*best]) best = id;
        }
        chosen = best;
      }
      rep.replacement = vocab.token(*chosen);
      out.utterance.words[t] = rep.replacement;
      out.utterance.surface[t] = rep.replacement;
      out.replacements.push_back(std::move(rep));
      prefix.push_back(*chosen);
    } else {
      prefix.push_back(vocab.encode(utterance.words[t]));
    }
  }
  return out;
}

template <ConditionalModel M>
SharedWorld build_world(const M& model, const Utterance& utterance, const CauseSelection& selection,
                        const EmotionPosterior& posterior, const SamplingConfig& cfg,
                        std::uint64_t seed) {
  cfg.validate();
  SharedWorld world = SharedWorld::singleton(utterance);
  for (std::size_t i = 1; i < cfg.world_size; ++i) {
    Distractor d = sample_distractor(model, utterance, selection, posterior, cfg, seed + i);
    std::optional<std::size_t> dup;
    for (std::size_t j = 1; j < world.contexts.size(); ++j) {
      if (world.contexts[j].words == d.utterance.words) {
        dup = j;
        break;
      }
    }
    world.contexts.push_back(std::move(d.utterance));
    world.replaced.push_back(std::move(d.replacements));
    world.source_emotions.push_back(std::move(d.emotions));
    world.duplicate_of.push_back(dup);
  }
  return world;
}

// Plain-RSA world: the true context plus whole other contexts drawn
// uniformly without replacement from a pool. Pool entries equal to the
// context are skipped.
inline SharedWorld build_plain_world(const Utterance& utterance, const std::vector<Utterance>& pool,
                                     std::size_t world_size, std::uint64_t seed) {
  if (world_size < 1) throw UsageError("world size must be at least 1");
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (pool[i].words != utterance.words && !pool[i].empty()) candidates.push_back(i);
  }
  if (candidates.size() < world_size - 1) {
    throw UsageError("distractor pool has " + std::to_string(candidates.size()) +
                     " usable contexts, need " + std::to_string(world_size - 1));
  }
  Rng rng(seed);
  SharedWorld world = SharedWorld::singleton(utterance);
  for (std::size_t i = 1; i < world_size; ++i) {
    const std::size_t j = i - 1 + rng.below(candidates.size() - (i - 1));
    std::swap(candidates[i - 1], candidates[j]);
    world.contexts.push_back(pool[candidates[i - 1]]);
    world.replaced.emplace_back();
    world.source_emotions.emplace_back();
    world.duplicate_of.push_back(std::nullopt);
  }
  return world;
}

}  // namespace focusrsa
