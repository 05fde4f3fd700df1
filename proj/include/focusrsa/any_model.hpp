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

// Runtime choice between an in-process n-gram model and a bridge child.

#pragma once

#include <memory>
#include <string>

#include "focusrsa/bridge.hpp"
#include "focusrsa/model_io.hpp"
#include "focusrsa/ngram.hpp"

namespace focusrsa {

inline constexpr std::string_view kBridgePrefix = "bridge:";

class AnyModel {
 public:
  explicit AnyModel(std::shared_ptr<const NGramModel> m) : ngram_(std::move(m)) {}
  explicit AnyModel(std::shared_ptr<const BridgeModel> m) : bridge_(std::move(m)) {}

  const Vocabulary& vocabulary() const {
    return ngram_ ? ngram_->vocabulary() : bridge_->vocabulary();
  }

  Distribution next_token_logprobs(const Condition& cond, std::span<const TokenId> prefix) const {
    return ngram_ ? ngram_->next_token_logprobs(cond, prefix)
                  : bridge_->next_token_logprobs(cond, prefix);
  }

  std::vector<std::string> catalog() const { return vocabulary().emotion_labels(); }
  const NGramModel* ngram() const { return ngram_.get(); }
  const BridgeModel* bridge() const { return bridge_.get(); }

 private:
  std::shared_ptr<const NGramModel> ngram_;
  std::shared_ptr<const BridgeModel> bridge_;
};

inline bool is_bridge_spec(std::string_view spec) { return spec.substr(0, kBridgePrefix.size()) == kBridgePrefix; }

// "bridge:CMD" starts CMD under /bin/sh; anything else is a model file.
inline AnyModel open_model(const std::string& spec) {
  if (is_bridge_spec(spec)) {
    const std::string cmd = spec.substr(kBridgePrefix.size());
    if (cmd.empty()) throw UsageError("bridge command is empty");
    return AnyModel(std::make_shared<const BridgeModel>(cmd));
  }
  return AnyModel(std::make_shared<const NGramModel>(load_model(spec)));
}

}  // namespace focusrsa
