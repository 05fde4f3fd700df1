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

// Bridge child for tests: answers the stdio protocol from a saved n-gram
// model file.
//
//   mock_bridge MODEL [--exit-before-reply CODE] [--unnormalized]
//                     [--wrong-id] [--short-vocab] [--stall]

#include <cstdlib>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "focusrsa/model_io.hpp"

using focusrsa::Condition;
using focusrsa::TokenId;
using json = nlohmann::ordered_json;

namespace {

struct Faults {
  int exit_before_reply = -1;
  bool unnormalized = false;
  bool wrong_id = false;
  bool short_vocab = false;
  bool stall = false;
};

json hello(const focusrsa::NGramModel& m, const Faults& f) {
  const auto& v = m.vocabulary();
  std::vector<std::string> tokens = v.tokens();
  if (f.short_vocab) tokens.resize(1);
  json map = json::object();
  for (const auto& label : v.emotion_labels()) map[label] = v.token(v.emotion_id(label));
  std::vector<TokenId> aliased;
  for (TokenId id = 0; id < v.size(); ++id) {
    if (v.is_aliased(id)) aliased.push_back(id);
  }
  return {{"vocab", tokens},
          {"model_name", "mock-ngram-" + m.fingerprint()},
          {"emotion_token_map", map},
          {"special", {{"bos", v.bos()}, {"eos", v.eos()}, {"unk", v.unk()}}},
          {"aliased", aliased}};
}

Condition condition_of(const focusrsa::NGramModel& m, const json& c) {
  const auto& v = m.vocabulary();
  Condition cond;
  for (const auto& label : c.at("emotion_labels")) {
    cond.emotion_prefix.push_back(v.emotion_id(label.get<std::string>()));
  }
  if (c.contains("context_ids")) {
    cond.context_tokens = c.at("context_ids").get<std::vector<TokenId>>();
  } else {
    cond.context_tokens = v.encode(focusrsa::tokenize(c.at("context").get<std::string>()));
  }
  return cond;
}

std::vector<TokenId> ids_of(const focusrsa::NGramModel& m, const json& j) {
  auto ids = j.get<std::vector<TokenId>>();
  for (TokenId id : ids) {
    if (id >= m.vocabulary().size()) throw focusrsa::UsageError("unknown token id " + std::to_string(id));
  }
  return ids;
}

json answer(const focusrsa::NGramModel& m, const json& req, const Faults& f) {
  const std::string op = req.at("op").get<std::string>();
  if (op == "hello") return hello(m, f);
  if (op == "logprobs") {
    const auto d = m.next_token_logprobs(condition_of(m, req.at("condition")), ids_of(m, req.at("prefix")));
    json arr = json::array();
    for (double x : d.logits()) {
      if (x == focusrsa::kNegInf) {
        arr.push_back(nullptr);
      } else {
        arr.push_back(f.unnormalized ? x + 0.5 : x);
      }
    }
    return {{"logprobs", arr}};
  }
  if (op == "score") {
    const auto lp = focusrsa::sequence_logprob(m, condition_of(m, req.at("condition")), ids_of(m, req.at("tokens")));
    return {{"logprob", lp.is_zero() ? json(nullptr) : json(lp.value())}};
  }
  if (op == "shutdown") return {{"ok", true}};
  throw focusrsa::UsageError("unknown op '" + op + "'");
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: mock_bridge MODEL [faults]\n";
    return 1;
  }
  Faults f;
  for (int i = 2; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--exit-before-reply" && i + 1 < argc) f.exit_before_reply = std::atoi(argv[++i]);
    else if (a == "--unnormalized") f.unnormalized = true;
    else if (a == "--wrong-id") f.wrong_id = true;
    else if (a == "--short-vocab") f.short_vocab = true;
    else if (a == "--stall") f.stall = true;
    else {
      std::cerr << "unknown flag " << a << "\n";
      return 1;
    }
  }
  const auto model = focusrsa::load_model(argv[1]);
  std::string line;
  while (std::getline(std::cin, line)) {
    if (f.exit_before_reply >= 0) return f.exit_before_reply;
    if (f.stall) std::this_thread::sleep_for(std::chrono::seconds(60));
    json req, reply;
    try {
      req = json::parse(line);
    } catch (const json::parse_error& e) {
      std::cout << json({{"id", nullptr}, {"error", e.what()}}).dump() << std::endl;
      continue;
    }
    try {
      reply = answer(model, req, f);
    } catch (const std::exception& e) {
      reply = {{"error", e.what()}};
    }
    reply["id"] = f.wrong_id ? json(-1) : req.value("id", json(nullptr));
    std::cout << reply.dump() << std::endl;
    if (req.value("op", "") == "shutdown") return 0;
  }
  return 0;
}
