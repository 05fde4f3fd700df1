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

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "focusrsa/errors.hpp"
#include "focusrsa/text.hpp"

namespace focusrsa {

using TokenId = std::uint32_t;

inline std::string emotion_token_surface(std::string_view label) {
  return "<emo:" + std::string(label) + ">";
}

// Bijection between surface strings and dense ids [0, size), with reserved
// begin/end/unknown ids and one conditioning token per emotion label.
//
// A word may be "aliased": it has an id (so the bijection stays total) but
// encode() maps it to the unknown id and models give it no mass of its own.
// The n-gram trainer aliases words seen only once.
class Vocabulary {
 public:
  static constexpr std::string_view kBos = "<s>";
  static constexpr std::string_view kEos = "</s>";
  static constexpr std::string_view kUnk = "<unk>";

  Vocabulary() = default;

  // Reserved ids 0..2, then one emotion token per label in catalog order.
  static Vocabulary with_emotions(const std::vector<std::string>& labels) {
    Vocabulary v;
    v.bos_ = v.add(std::string(kBos));
    v.eos_ = v.add(std::string(kEos));
    v.unk_ = v.add(std::string(kUnk));
    for (const auto& label : labels) v.add_emotion(label);
    return v;
  }

  // Token inventory supplied by an external model. Emotion labels without an
  // existing token are appended.
  static Vocabulary from_tokens(std::vector<std::string> tokens, TokenId bos, TokenId eos,
                                TokenId unk,
                                const std::vector<std::pair<std::string, std::string>>& emotions) {
    Vocabulary v;
    for (auto& t : tokens) {
      if (v.ids_.count(t)) throw DataError("duplicate token in vocabulary: " + t);
      v.add(std::move(t));
    }
    if (bos >= v.size() || eos >= v.size() || unk >= v.size() || bos == eos || bos == unk ||
        eos == unk) {
      throw DataError("reserved token ids out of range or not distinct");
    }
    v.bos_ = bos;
    v.eos_ = eos;
    v.unk_ = unk;
    for (const auto& [label, surface] : emotions) {
      auto it = v.ids_.find(surface);
      const TokenId id = it != v.ids_.end() ? it->second : v.add(surface);
      v.register_emotion(label, id);
    }
    return v;
  }

  TokenId add_emotion(const std::string& label) {
    if (emotion_ids_.count(label)) throw DataError("duplicate emotion label: " + label);
    const TokenId id = add(emotion_token_surface(label));
    register_emotion(label, id);
    return id;
  }

  // Adds a word if absent and returns its id.
  TokenId add_word(const std::string& word) {
    auto it = ids_.find(word);
    if (it != ids_.end()) return it->second;
    return add(word);
  }

  std::size_t size() const { return tokens_.size(); }
  TokenId bos() const { return bos_; }
  TokenId eos() const { return eos_; }
  TokenId unk() const { return unk_; }

  const std::string& token(TokenId id) const { return tokens_.at(id); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  std::optional<TokenId> find(std::string_view s) const {
    auto it = ids_.find(std::string(s));
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }

  // Word -> id used for modeling; out-of-vocabulary and aliased words map to
  // the unknown id.
  TokenId encode(std::string_view word) const {
    auto it = ids_.find(std::string(word));
    if (it == ids_.end() || aliased_[it->second] || is_emotion(it->second)) return unk_;
    return it->second;
  }

  std::vector<TokenId> encode(const Utterance& u) const {
    std::vector<TokenId> out;
    out.reserve(u.size());
    for (const auto& w : u.words) out.push_back(encode(w));
    return out;
  }

  bool is_emotion(TokenId id) const { return id < emotion_flag_.size() && emotion_flag_[id]; }
  bool is_aliased(TokenId id) const { return id < aliased_.size() && aliased_[id]; }
  void set_aliased(TokenId id, bool aliased) { aliased_.at(id) = aliased; }

  // Tokens a model may assign next-token mass to: everything except the
  // begin marker, emotion tokens, and aliased words.
  bool is_emittable(TokenId id) const {
    return id != bos_ && !is_emotion(id) && !is_aliased(id);
  }

  // Ordinary words (not reserved, not emotion tokens).
  bool is_word(TokenId id) const {
    return id != bos_ && id != eos_ && id != unk_ && !is_emotion(id);
  }

  TokenId emotion_id(std::string_view label) const {
    auto it = emotion_ids_.find(std::string(label));
    if (it == emotion_ids_.end()) throw LabelError(std::string(label));
    return it->second;
  }
  bool has_emotion(std::string_view label) const {
    return emotion_ids_.count(std::string(label)) > 0;
  }
  const std::string& emotion_label(TokenId id) const {
    auto it = emotion_labels_.find(id);
    if (it == emotion_labels_.end()) throw UsageError("token is not an emotion token");
    return it->second;
  }
  // Labels in registration order.
  const std::vector<std::string>& emotion_labels() const { return emotion_order_; }

  std::string decode(const std::vector<TokenId>& ids) const {
    std::string out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (i) out += ' ';
      out += token(ids[i]);
    }
    return out;
  }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.tokens_ == b.tokens_ && a.bos_ == b.bos_ && a.eos_ == b.eos_ && a.unk_ == b.unk_ &&
           a.aliased_ == b.aliased_ && a.emotion_order_ == b.emotion_order_;
  }

 private:
  TokenId add(std::string s) {
    const auto id = static_cast<TokenId>(tokens_.size());
    ids_.emplace(s, id);
    tokens_.push_back(std::move(s));
    aliased_.push_back(false);
    emotion_flag_.push_back(false);
    return id;
  }

  void register_emotion(const std::string& label, TokenId id) {
    emotion_flag_.at(id) = true;
    emotion_ids_[label] = id;
    emotion_labels_[id] = label;
    emotion_order_.push_back(label);
  }

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> ids_;
  std::vector<bool> aliased_;
  std::vector<bool> emotion_flag_;
  std::unordered_map<std::string, TokenId> emotion_ids_;
  std::unordered_map<TokenId, std::string> emotion_labels_;
  std::vector<std::string> emotion_order_;
  TokenId bos_ = 0;
  TokenId eos_ = 0;
  TokenId unk_ = 0;
};

}  // namespace focusrsa
