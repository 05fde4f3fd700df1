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

// Shared test fixtures: explicit-table models and small corpora.

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "focusrsa/corpus.hpp"
#include "focusrsa/model.hpp"
#include "focusrsa/prob.hpp"
#include "focusrsa/vocabulary.hpp"

namespace focusrsa::testing {

// ConditionalModel whose distributions come from a callback returning plain
// probabilities over the vocabulary. Zeros become -inf.
class TableModel {
 public:
  using Fn = std::function<std::vector<double>(const Condition&, std::span<const TokenId>)>;

  TableModel(Vocabulary vocab, Fn fn) : vocab_(std::move(vocab)), fn_(std::move(fn)) {}

  const Vocabulary& vocabulary() const { return vocab_; }

  Distribution next_token_logprobs(const Condition& cond, std::span<const TokenId> prefix) const {
    auto p = fn_(cond, prefix);
    if (p.size() != vocab_.size()) throw UsageError("table row has the wrong size");
    double total = 0.0;
    for (double v : p) total += v;
    std::vector<double> logits(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
      logits[i] = p[i] > 0.0 ? std::log(p[i] / total) : kNegInf;
    }
    return normalize(Distribution(std::move(logits)));
  }

 private:
  Vocabulary vocab_;
  Fn fn_;
};

inline std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_ids(std::uint64_t seed, std::span<const TokenId> ids) {
  std::uint64_t h = mix(seed);
  for (TokenId t : ids) h = mix(h ^ (static_cast<std::uint64_t>(t) + 1));
  return mix(h ^ ids.size());
}

// Vocabulary of reserved tokens plus `n_words` words "w0", "w1", ...
inline Vocabulary word_vocab(std::size_t n_words, const std::vector<std::string>& labels = {}) {
  Vocabulary v = Vocabulary::with_emotions(labels);
  for (std::size_t i = 0; i < n_words; ++i) v.add_word("w" + std::to_string(i));
  return v;
}

// Pseudo-random but deterministic S0: every (condition, prefix) gets its own
// distribution over emittable tokens. `zero_rate` of entries are structural
// zeros (never all of them).
inline TableModel random_model(std::size_t n_words, std::uint64_t seed, double zero_rate = 0.0,
                               const std::vector<std::string>& labels = {}) {
  Vocabulary v = word_vocab(n_words, labels);
  auto fn = [v, seed, zero_rate](const Condition& c, std::span<const TokenId> prefix) {
    std::vector<TokenId> key = c.emotion_prefix;
    key.push_back(static_cast<TokenId>(-1));
    key.insert(key.end(), c.context_tokens.begin(), c.context_tokens.end());
    key.push_back(static_cast<TokenId>(-2));
    key.insert(key.end(), prefix.begin(), prefix.end());
    std::uint64_t h = hash_ids(seed, key);
    std::vector<double> p(v.size(), 0.0);
    bool any = false;
    for (TokenId t = 0; t < v.size(); ++t) {
      if (!v.is_emittable(t)) continue;
      h = mix(h);
      const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
      h = mix(h);
      const double z = static_cast<double>(h >> 11) * 0x1.0p-53;
      if (z < zero_rate) continue;
      p[t] = 0.02 + u;
      any = true;
    }
    if (!any) p[v.eos()] = 1.0;
    return p;
  };
  return TableModel(std::move(v), std::move(fn));
}

// Small four-emotion corpus built from sentence frames with emotion-specific
// state words and causes.
struct FrameLexicon {
  std::string label;
  std::vector<std::string> states;
  std::vector<std::string> causes;
};

inline const std::vector<FrameLexicon>& frame_lexicons() {
  static const std::vector<FrameLexicon> l = {
      {"sad", {"sick", "tired", "weak", "ill"}, {"flu", "cold", "fever", "infection"}},
      {"joyful", {"laughing", "smiling", "beaming", "glowing"}, {"party", "gift", "concert", "wedding"}},
      {"afraid", {"shaking", "trembling", "frozen", "pale"}, {"storm", "spider", "noise", "dark"}},
      {"angry", {"fuming", "shouting", "seething", "raging"}, {"scam", "insult", "delay", "theft"}},
  };
  return l;
}

inline std::vector<TrainingExample> frame_corpus() {
  const std::vector<std::vector<std::string>> frames = {
      {"i", "was", "S", "from", "the", "C"},
      {"the", "C", "made", "me", "S"},
      {"i", "felt", "S", "after", "the", "C"},
      {"my", "friend", "was", "S", "about", "the", "C"},
  };
  std::vector<TrainingExample> out;
  std::size_t line = 0;
  for (const auto& lex : frame_lexicons()) {
    for (const auto& f : frames) {
      for (const auto& s : lex.states) {
        for (const auto& c : lex.causes) {
          std::string text;
          for (const auto& w : f) {
            if (!text.empty()) text += ' ';
            text += w == "S" ? s : w == "C" ? c : w;
          }
          out.push_back({lex.label, text, "", ++line});
        }
      }
    }
  }
  return out;
}

inline std::vector<std::string> frame_labels() {
  std::vector<std::string> out;
  for (const auto& l : frame_lexicons()) out.push_back(l.label);
  return out;
}

}  // namespace focusrsa::testing
