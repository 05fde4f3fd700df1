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

// Incremental Rational Speech Acts decoding over a shared world of contexts.
//
// Listener, for a candidate token u at step t with running prior p_t:
//
//   L0(c | u_<=t, p_t) = S0(u | c, u_<t)^beta p_t(c) / Σ_c' S0(u | c', u_<t)^beta p_t(c')
//
// Pragmatic speaker:
//
//   S1(u | c, u_<t)  ∝  L0(c | u_<=t, p_t)^alpha  S0(u | c, u_<t)
//
// After a token is committed the prior becomes the listener posterior for
// that token: p_{t+1}(C) = L0(C | u_<=t, p_t).
//
// Inside the listener only, S0 log-mass is floored at log(1e-12) so a
// structural zero under one context cannot pin the prior to 0/1 forever.

#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "focusrsa/distractor.hpp"
#include "focusrsa/errors.hpp"
#include "focusrsa/model.hpp"
#include "focusrsa/prob.hpp"

namespace focusrsa {

inline const double kListenerLogFloor = std::log(1e-12);

enum class DecodeMode { kFocused, kPlain, kBase };

inline std::string to_string(DecodeMode m) {
  switch (m) {
    case DecodeMode::kFocused:
      return "focused";
    case DecodeMode::kPlain:
      return "plain";
    case DecodeMode::kBase:
      return "base";
  }
  return "?";
}

inline DecodeMode parse_mode(std::string_view s) {
  if (s == "focused") return DecodeMode::kFocused;
  if (s == "plain") return DecodeMode::kPlain;
  if (s == "base") return DecodeMode::kBase;
  throw UsageError("unknown mode '" + std::string(s) + "' (expected focused, plain, or base)");
}

struct RsaConfig {
  double alpha = 4.0;  // speaker rationality
  double beta = 0.9;   // listener rationality
  std::size_t max_length = 40;
  DecodeMode mode = DecodeMode::kFocused;

  void validate() const {
    if (!std::isfinite(alpha) || alpha < 0.0) throw UsageError("alpha must be finite and >= 0");
    if (!std::isfinite(beta) || beta < 0.0) throw UsageError("beta must be finite and >= 0");
    if (max_length < 1) throw UsageError("max_length must be at least 1");
  }
};

struct ListenerState {
  Distribution prior;  // p_t over world contexts
  std::size_t step = 0;
};

template <ConditionalModel M>
class PragmaticSession {
 public:
  PragmaticSession(const M& speaker, SharedWorld world, RsaConfig config)
      : speaker_(&speaker), world_(std::move(world)), config_(config) {
    config_.validate();
    if (world_.contexts.empty()) throw UsageError("shared world is empty");
    const Vocabulary& vocab = speaker.vocabulary();
    for (const auto& ctx : world_.contexts) {
      conditions_.push_back(Condition::context(vocab.encode(ctx)));
    }
    listener_.prior = Distribution::uniform(world_.contexts.size());
  }

  const M& speaker() const { return *speaker_; }
  const SharedWorld& world() const { return world_; }
  const RsaConfig& config() const { return config_; }
  const ListenerState& listener() const { return listener_; }
  const std::vector<TokenId>& emitted() const { return emitted_; }
  bool bypass() const { return config_.mode == DecodeMode::kBase; }
  // Commits where every context floored and the prior was kept.
  std::size_t prior_resets() const { return prior_resets_; }

  // S0 for every world context given the emitted prefix.
  std::vector<Distribution> base_distributions() const {
    std::vector<Distribution> out;
    const std::size_t n = bypass() ? 1 : conditions_.size();
    for (std::size_t i = 0; i < n; ++i) {
      out.push_back(speaker_->next_token_logprobs(conditions_[i], emitted_));
    }
    return out;
  }

  // log L0(true context | u) for every token u, plus whether the floor was
  // applied for u under any context.
  struct ListenerView {
    std::vector<double> log_l0;
    std::vector<bool> floored;
  };

  ListenerView listener_view(const std::vector<Distribution>& s0) const {
    const std::size_t vsize = s0.front().size();
    ListenerView view;
    view.log_l0.assign(vsize, 0.0);
    view.floored.assign(vsize, false);
    if (bypass() || s0.size() == 1) return view;
    std::vector<double> joint(s0.size());
    for (std::size_t u = 0; u < vsize; ++u) {
      for (std::size_t i = 0; i < s0.size(); ++i) {
        double s = s0[i][u];
        if (s < kListenerLogFloor) {
          s = kListenerLogFloor;
          view.floored[u] = true;
        }
        joint[i] = config_.beta * s + listener_.prior[i];
      }
      view.log_l0[u] = joint[0] - log_sum_exp(std::span<const double>(joint));
    }
    return view;
  }

  Distribution speaker_distribution(const std::vector<Distribution>& s0,
                                    const ListenerView& view) const {
    if (bypass() || config_.alpha == 0.0) return normalize(s0.front());
    std::vector<double> logits(s0.front().size());
    for (std::size_t u = 0; u < logits.size(); ++u) {
      const double base = s0.front()[u];
      logits[u] = base == kNegInf ? kNegInf : config_.alpha * view.log_l0[u] + base;
    }
    return normalize(Distribution(std::move(logits)));
  }

  // S1 over the next token. Does not modify the session.
  Distribution pragmatic_step() const {
    if (emitted_.size() >= config_.max_length) throw UsageError("session reached max_length");
    const auto s0 = base_distributions();
    return speaker_distribution(s0, listener_view(s0));
  }

  // Appends `token` and moves the prior to the listener posterior for it.
  // Returns true when the floor was applied under some context.
  bool commit_token(TokenId token) { return commit_token(token, base_distributions()); }

  bool commit_token(TokenId token, const std::vector<Distribution>& s0) {
    if (token >= speaker_->vocabulary().size()) throw UsageError("token id out of range");
    bool any_floored = false;
    if (!bypass() && s0.size() > 1) {
      std::vector<double> joint(s0.size());
      bool all_floored = true;
      for (std::size_t i = 0; i < s0.size(); ++i) {
        double s = s0[i][token];
        if (s < kListenerLogFloor) {
          s = kListenerLogFloor;
          any_floored = true;
        } else {
          all_floored = false;
        }
        joint[i] = config_.beta * s + listener_.prior[i];
      }
      if (all_floored) {
        ++prior_resets_;
      } else {
        listener_.prior = normalize(Distribution(std::move(joint)));
      }
    }
    emitted_.push_back(token);
    ++listener_.step;
    return any_floored;
  }

 private:
  const M* speaker_;
  SharedWorld world_;
  RsaConfig config_;
  std::vector<Condition> conditions_;
  ListenerState listener_;
  std::vector<TokenId> emitted_;
  std::size_t prior_resets_ = 0;
};

template <ConditionalModel M>
PragmaticSession<M> init_session(const M& speaker, SharedWorld world, const RsaConfig& config) {
  return PragmaticSession<M>(speaker, std::move(world), config);
}

struct TraceStep {
  std::size_t step = 0;
  std::string token;
  std::vector<double> prior;  // p_t before the token was committed
  double s0_logit = 0.0;      // log S0(token | true context)
  double l0_logit = 0.0;      // log L0(true context | token)
  bool floored = false;
};

struct DecodeResult {
  std::vector<TokenId> tokens;  // without end-of-sequence
  Utterance text;
  std::vector<TraceStep> trace;  // one entry per token in `tokens`
  bool finished = false;         // stopped at end-of-sequence
};

// Greedy decoding under S1 (or S0 in base mode).
template <ConditionalModel M>
DecodeResult decode(PragmaticSession<M>& session) {
  const Vocabulary& vocab = session.speaker().vocabulary();
  DecodeResult out;
  while (session.emitted().size() < session.config().max_length) {
    const auto s0 = session.base_distributions();
    const auto view = session.listener_view(s0);
    const Distribution s1 = session.speaker_distribution(s0, view);
    const auto token = static_cast<TokenId>(s1.argmax());
    if (token == vocab.eos()) {
      out.finished = true;
      break;
    }
    TraceStep ts;
    ts.step = session.listener().step;
    ts.token = vocab.token(token);
    ts.prior = session.listener().prior.probs();
    ts.s0_logit = s0.front()[token];
    ts.l0_logit = view.log_l0[token];
    ts.floored = view.floored[token];
    session.commit_token(token, s0);
    out.tokens.push_back(token);
    out.trace.push_back(std::move(ts));
  }
  std::vector<std::string> words;
  for (TokenId t : out.tokens) words.push_back(vocab.token(t));
  out.text = Utterance::from_words(std::move(words));
  return out;
}

}  // namespace focusrsa
