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

// The conditional sequence model abstraction. Both the base dialogue speaker
// and the generative emotion estimator are ConditionalModels: given an
// emotion-label prefix, a context, and a partial token sequence they return a
// normalized next-token distribution over the full vocabulary.

#pragma once

#include <algorithm>
#include <concepts>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "focusrsa/errors.hpp"
#include "focusrsa/prob.hpp"
#include "focusrsa/rng.hpp"
#include "focusrsa/vocabulary.hpp"

namespace focusrsa {

struct Condition {
  std::vector<TokenId> emotion_prefix;  // emotion-token ids, possibly empty
  std::vector<TokenId> context_tokens;  // never emotion tokens

  static Condition emotions(std::vector<TokenId> prefix) { return {std::move(prefix), {}}; }
  static Condition context(std::vector<TokenId> ctx) { return {{}, std::move(ctx)}; }

  void validate(const Vocabulary& vocab) const {
    for (TokenId id : emotion_prefix) {
      if (!vocab.is_emotion(id)) throw UsageError("emotion prefix holds a non-emotion token");
    }
    for (TokenId id : context_tokens) {
      if (id >= vocab.size()) throw UsageError("context token id out of range");
      if (vocab.is_emotion(id)) throw UsageError("context holds an emotion token");
    }
  }

  friend bool operator==(const Condition&, const Condition&) = default;
};

template <class M>
concept ConditionalModel =
    requires(const M& m, const Condition& c, std::span<const TokenId> prefix) {
      { m.vocabulary() } -> std::same_as<const Vocabulary&>;
      { m.next_token_logprobs(c, prefix) } -> std::same_as<Distribution>;
    };

// Models that can score a single next token without materializing the whole
// distribution. The value must equal next_token_logprobs(c, prefix)[token].
template <class M>
concept ScalarScoringModel =
    ConditionalModel<M> &&
    requires(const M& m, const Condition& c, std::span<const TokenId> prefix, TokenId t) {
      { m.token_logprob(c, prefix, t) } -> std::same_as<double>;
    };

template <ConditionalModel M>
double step_logprob(const M& model, const Condition& cond, std::span<const TokenId> prefix,
                    TokenId token) {
  if constexpr (ScalarScoringModel<M>) {
    return model.token_logprob(cond, prefix, token);
  } else {
    return model.next_token_logprobs(cond, prefix)[token];
  }
}

// Chain-rule log-probability of `tokens` followed by end-of-sequence.
template <ConditionalModel M>
LogProb sequence_logprob(const M& model, const Condition& cond, std::span<const TokenId> tokens) {
  if (tokens.empty()) throw UsageError("sequence_logprob of an empty sequence");
  double total = 0.0;
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    total += step_logprob(model, cond, tokens.first(t), tokens[t]);
  }
  total += step_logprob(model, cond, tokens, model.vocabulary().eos());
  return LogProb(total);
}

// Token selection rule. Temperature is applied before the nucleus cut.
struct SamplingStrategy {
  enum class Kind { kGreedy, kTopP, kTemperature };
  Kind kind = Kind::kGreedy;
  double top_p = 1.0;
  double temperature = 1.0;

  static SamplingStrategy greedy() { return {}; }
  static SamplingStrategy nucleus(double p, double tau = 1.0) {
    return {Kind::kTopP, p, tau};
  }
  static SamplingStrategy with_temperature(double tau) {
    return {Kind::kTemperature, 1.0, tau};
  }

  void validate() const {
    if (!(top_p > 0.0 && top_p <= 1.0)) throw UsageError("top_p must lie in (0, 1]");
    if (!(temperature > 0.0) || !std::isfinite(temperature)) {
      throw UsageError("temperature must be positive");
    }
  }

  std::string describe() const {
    switch (kind) {
      case Kind::kGreedy:
        return "greedy";
      case Kind::kTopP:
        return "top_p(" + std::to_string(top_p) + ",tau=" + std::to_string(temperature) + ")";
      case Kind::kTemperature:
        return "temperature(" + std::to_string(temperature) + ")";
    }
    return "?";
  }
};

namespace detail {

// Inverse-CDF draw over `ids` with the given (unnormalized) probabilities.
inline TokenId draw(const std::vector<std::size_t>& ids, const std::vector<double>& mass,
                    Rng& rng) {
  double total = 0.0;
  for (double m : mass) total += m;
  if (!(total > 0.0)) throw DegenerateDistribution("cannot sample from zero mass");
  const double u = rng.uniform() * total;
  double cum = 0.0;
  std::size_t last_positive = ids.size();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (mass[i] <= 0.0) continue;
    cum += mass[i];
    last_positive = i;
    if (u < cum) return static_cast<TokenId>(ids[i]);
  }
  return static_cast<TokenId>(ids[last_positive]);
}

}  // namespace detail

inline TokenId sample_token(const Distribution& d, const SamplingStrategy& strategy, Rng& rng) {
  strategy.validate();
  if (d.empty()) throw UsageError("sampling from an empty distribution");
  if (strategy.kind == SamplingStrategy::Kind::kGreedy) {
    return static_cast<TokenId>(d.argmax());
  }
  Distribution scaled = d;
  if (strategy.temperature != 1.0) {
    for (double& v : scaled.mutable_logits()) v /= strategy.temperature;
  }
  scaled = normalize(std::move(scaled));

  std::vector<std::size_t> ids;
  std::vector<double> mass;
  if (strategy.kind == SamplingStrategy::Kind::kTopP) {
    // Smallest descending-mass prefix whose total reaches p.
    double cum = 0.0;
    for (std::size_t id : scaled.ranked()) {
      const double p = scaled.prob(id);
      if (p <= 0.0) break;
      ids.push_back(id);
      mass.push_back(p);
      cum += p;
      if (cum >= strategy.top_p) break;
    }
  } else {
    for (std::size_t id = 0; id < scaled.size(); ++id) {
      ids.push_back(id);
      mass.push_back(scaled.prob(id));
    }
  }
  return detail::draw(ids, mass, rng);
}

inline TokenId sample_token(const Distribution& d, const SamplingStrategy& strategy,
                            std::uint64_t seed) {
  Rng rng(seed);
  return sample_token(d, strategy, rng);
}

}  // namespace focusrsa
