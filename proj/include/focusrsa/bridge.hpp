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

// Host side of the external-model bridge. The model runs in a child process
// and answers newline-delimited JSON requests on its standard input, one
// reply line per request, correlated by "id".
//
//   -> {"id":1,"op":"hello"}
//   <- {"id":1,"vocab":[...],"model_name":"...","emotion_token_map":{"joy":"..."},
//       "special":{"bos":0,"eos":1,"unk":2},"aliased":[...]}
//   -> {"id":2,"op":"logprobs","condition":{"emotion_labels":[...],"context":"...",
//       "context_ids":[...]},"prefix":[...]}
//   <- {"id":2,"logprobs":[...]}           (null encodes -infinity)
//   -> {"id":3,"op":"score","condition":{...},"tokens":[...]}
//   <- {"id":3,"logprob":-12.5}
//   -> {"id":4,"op":"shutdown"}
//   <- {"id":4,"ok":true}
//
// Any request may instead be answered with {"id":n,"error":"..."}.
// The optional "aliased" list names token ids that the model treats as the
// unknown token on input and never emits.

#pragma once

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "focusrsa/errors.hpp"
#include "focusrsa/model.hpp"
#include "focusrsa/prob.hpp"
#include "focusrsa/vocabulary.hpp"

namespace focusrsa {

// Child process with line-oriented pipes to its stdin and stdout.
class ChildProcess {
 public:
  explicit ChildProcess(const std::string& command) {
    int to_child[2];
    int from_child[2];
    if (pipe(to_child) != 0 || pipe(from_child) != 0) {
      throw BridgeProtocolError(std::string("pipe failed: ") + std::strerror(errno));
    }
    pid_ = fork();
    if (pid_ < 0) throw BridgeProtocolError(std::string("fork failed: ") + std::strerror(errno));
    if (pid_ == 0) {
      setpgid(0, 0);  // own group, so a kill reaches anything the shell spawned
      dup2(to_child[0], STDIN_FILENO);
      dup2(from_child[1], STDOUT_FILENO);
      close(to_child[0]);
      close(to_child[1]);
      close(from_child[0]);
      close(from_child[1]);
      execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
      _exit(127);
    }
    setpgid(pid_, pid_);
    close(to_child[0]);
    close(from_child[1]);
    in_ = to_child[1];
    out_ = from_child[0];
    // A child that exits early must not kill the host with SIGPIPE.
    signal(SIGPIPE, SIG_IGN);
  }

  ChildProcess(const ChildProcess&) = delete;
  ChildProcess& operator=(const ChildProcess&) = delete;

  ~ChildProcess() {
    if (in_ >= 0) close(in_);
    if (out_ >= 0) close(out_);
    if (pid_ > 0 && !reaped_) {
      // Give a well-behaved child a moment, then insist.
      for (int i = 0; i < 50 && !try_reap(); ++i) usleep(10000);
      if (!reaped_) {
        kill(-pid_, SIGKILL);
        waitpid(pid_, nullptr, 0);
      }
    }
  }

  void write_line(const std::string& line) {
    std::string buf = line + "\n";
    const char* p = buf.data();
    std::size_t left = buf.size();
    while (left > 0) {
      const ssize_t n = write(in_, p, left);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw BridgeProtocolError("bridge child closed its input" + exit_note());
      }
      p += n;
      left -= static_cast<std::size_t>(n);
    }
  }

  std::string read_line(std::chrono::milliseconds timeout) {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    for (;;) {
      if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        return line;
      }
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
          deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) throw BridgeProtocolError("bridge reply timed out");
      pollfd pfd{out_, POLLIN, 0};
      const int rc = poll(&pfd, 1, static_cast<int>(left.count()));
      if (rc < 0 && errno == EINTR) continue;
      if (rc == 0) throw BridgeProtocolError("bridge reply timed out");
      char chunk[65536];
      const ssize_t n = read(out_, chunk, sizeof chunk);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) throw BridgeProtocolError("bridge child exited before replying" + exit_note());
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

  void close_input() {
    if (in_ >= 0) close(in_);
    in_ = -1;
  }

  // Blocks until the child exits; returns its exit code (or 128 + signal).
  int wait_exit() {
    if (!reaped_) {
      int status = 0;
      waitpid(pid_, &status, 0);
      record(status);
    }
    return exit_code_;
  }

 private:
  bool try_reap() {
    int status = 0;
    if (waitpid(pid_, &status, WNOHANG) == pid_) {
      record(status);
      return true;
    }
    return false;
  }

  void record(int status) {
    reaped_ = true;
    exit_code_ = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
  }

  std::string exit_note() {
    for (int i = 0; i < 100 && !try_reap(); ++i) usleep(2000);
    return reaped_ ? " (exit status " + std::to_string(exit_code_) + ")" : "";
  }

  pid_t pid_ = -1;
  int in_ = -1;
  int out_ = -1;
  bool reaped_ = false;
  int exit_code_ = -1;
  std::string buffer_;
};

struct BridgeHandshake {
  std::vector<std::string> vocab;
  std::string model_name;
  std::vector<std::pair<std::string, std::string>> emotion_token_map;
  TokenId bos = 0, eos = 1, unk = 2;
  std::vector<TokenId> aliased;
  nlohmann::ordered_json raw;
};

// ConditionalModel backed by a bridge child. Requests are serialized; the
// object may be shared across threads.
class BridgeModel {
 public:
  explicit BridgeModel(const std::string& command,
                       std::chrono::milliseconds timeout = std::chrono::seconds(30))
      : child_(std::make_unique<ChildProcess>(command)), timeout_(timeout) {
    handshake_ = hello();
    vocab_ = Vocabulary::from_tokens(handshake_.vocab, handshake_.bos, handshake_.eos,
                                     handshake_.unk, handshake_.emotion_token_map);
    for (TokenId id : handshake_.aliased) {
      if (id >= handshake_.vocab.size()) throw BridgeProtocolError("aliased token id out of range");
      vocab_.set_aliased(id, true);
    }
  }

  ~BridgeModel() {
    try {
      if (child_ && !shut_down_) shutdown();
    } catch (...) {
    }
  }

  BridgeModel(BridgeModel&&) = default;

  const Vocabulary& vocabulary() const { return vocab_; }
  const BridgeHandshake& handshake() const { return handshake_; }

  // Repeats the handshake; the child must answer identically.
  BridgeHandshake hello() const {
    const auto reply = call({{"op", "hello"}});
    BridgeHandshake h;
    h.raw = reply;
    h.raw.erase("id");
    try {
      h.vocab = reply.at("vocab").get<std::vector<std::string>>();
      h.model_name = reply.value("model_name", "");
      if (reply.contains("emotion_token_map")) {
        for (const auto& [label, surface] : reply.at("emotion_token_map").items()) {
          h.emotion_token_map.emplace_back(label, surface.get<std::string>());
        }
      }
      if (reply.contains("special")) {
        const auto& s = reply.at("special");
        h.bos = s.at("bos").get<TokenId>();
        h.eos = s.at("eos").get<TokenId>();
        h.unk = s.at("unk").get<TokenId>();
      }
      if (reply.contains("aliased")) h.aliased = reply.at("aliased").get<std::vector<TokenId>>();
    } catch (const nlohmann::ordered_json::exception& e) {
      throw BridgeProtocolError(std::string("malformed hello reply: ") + e.what());
    }
    if (h.vocab.size() < 2) throw BridgeProtocolError("bridge vocabulary has fewer than 2 tokens");
    return h;
  }

  Distribution next_token_logprobs(const Condition& cond, std::span<const TokenId> prefix) const {
    cond.validate(vocab_);
    nlohmann::ordered_json req = {{"op", "logprobs"},
                          {"condition", condition_json(cond)},
                          {"prefix", std::vector<TokenId>(prefix.begin(), prefix.end())}};
    const auto reply = call(std::move(req));
    if (!reply.contains("logprobs") || !reply.at("logprobs").is_array()) {
      throw BridgeProtocolError("logprobs reply without a logprobs array");
    }
    const auto& arr = reply.at("logprobs");
    if (arr.size() != handshake_.vocab.size()) {
      throw BridgeProtocolError("logprobs reply has " + std::to_string(arr.size()) +
                                " entries, vocabulary has " +
                                std::to_string(handshake_.vocab.size()));
    }
    std::vector<double> logits(vocab_.size(), kNegInf);
    for (std::size_t i = 0; i < arr.size(); ++i) {
      if (arr[i].is_null()) continue;
      if (!arr[i].is_number()) throw BridgeProtocolError("non-numeric log-probability");
      logits[i] = arr[i].get<double>();
    }
    Distribution d(std::move(logits));
    if (std::abs(d.log_total()) > 1e-3) {
      throw BridgeProtocolError("logprobs reply is not normalized");
    }
    return normalize(std::move(d));
  }

  LogProb score(const Condition& cond, std::span<const TokenId> tokens) const {
    cond.validate(vocab_);
    const auto reply = call({{"op", "score"},
                             {"condition", condition_json(cond)},
                             {"tokens", std::vector<TokenId>(tokens.begin(), tokens.end())}});
    if (!reply.contains("logprob")) throw BridgeProtocolError("score reply without logprob");
    return reply.at("logprob").is_null() ? LogProb::zero()
                                         : LogProb(reply.at("logprob").get<double>());
  }

  // Asks the child to exit and returns its exit status.
  int shutdown() {
    if (shut_down_) return child_->wait_exit();
    call({{"op", "shutdown"}});
    shut_down_ = true;
    child_->close_input();
    return child_->wait_exit();
  }

 private:
  nlohmann::ordered_json condition_json(const Condition& cond) const {
    std::vector<std::string> labels;
    for (TokenId e : cond.emotion_prefix) labels.push_back(vocab_.emotion_label(e));
    std::string context;
    for (std::size_t i = 0; i < cond.context_tokens.size(); ++i) {
      if (i) context += ' ';
      context += vocab_.token(cond.context_tokens[i]);
    }
    return {{"emotion_labels", labels}, {"context", context}, {"context_ids", cond.context_tokens}};
  }

  nlohmann::ordered_json call(nlohmann::ordered_json req) const {
    std::lock_guard<std::mutex> lock(mu_);
    const std::uint64_t id = ++next_id_;
    req["id"] = id;
    child_->write_line(req.dump());
    const std::string line = child_->read_line(timeout_);
    nlohmann::ordered_json reply;
    try {
      reply = nlohmann::ordered_json::parse(line);
    } catch (const nlohmann::ordered_json::parse_error& e) {
      throw BridgeProtocolError(std::string("malformed bridge reply: ") + e.what());
    }
    if (!reply.is_object() || !reply.contains("id") || reply.at("id") != id) {
      throw BridgeProtocolError("bridge reply id does not match request " + std::to_string(id));
    }
    if (reply.contains("error")) {
      throw BridgeProtocolError("bridge error: " + reply.at("error").dump());
    }
    return reply;
  }

  std::unique_ptr<ChildProcess> child_;
  std::chrono::milliseconds timeout_;
  mutable std::mutex mu_;
  mutable std::uint64_t next_id_ = 0;
  BridgeHandshake handshake_;
  Vocabulary vocab_;
  bool shut_down_ = false;
};

}  // namespace focusrsa
