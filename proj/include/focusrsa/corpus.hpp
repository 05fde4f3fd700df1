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

// JSON Lines readers and writers for training corpora and cause annotations.
//
//   corpus:    {"emotion": string, "text": string [, "context": string]}
//   EmoCause:  {"emotion": string, "tokens": [string], "cause_indices": [int]}

#pragma once

#include <zlib.h>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "focusrsa/errors.hpp"

namespace focusrsa {

// One labeled sentence. `context` is optional and only used when training a
// dialogue speaker, where `text` is the response to `context`.
struct TrainingExample {
  std::string emotion;
  std::string text;
  std::string context;
  std::size_t line = 0;  // 1-based source line, 0 when built in memory
};

struct EmoCauseExample {
  std::string emotion;
  std::vector<std::string> tokens;
  std::vector<std::size_t> cause_indices;  // sorted, distinct
};

inline std::uint32_t crc32_of(const std::string& bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data()),
              static_cast<uInt>(bytes.size()));
  return static_cast<std::uint32_t>(crc);
}

inline std::string hex32(std::uint32_t v) {
  char buf[9];
  std::snprintf(buf, sizeof buf, "%08x", v);
  return buf;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// CRC-32 of the byte length followed by the contents. The length prefix
// matters: a file that ends in its own CRC-32 (like a model file) would
// otherwise always hash to the same residue.
inline std::string file_fingerprint(const std::string& path) {
  const std::string bytes = read_file(path);
  return hex32(crc32_of(std::to_string(bytes.size()) + ":" + bytes));
}

namespace detail {

template <class Fn>
void for_each_json_line(const std::string& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError(path + ":" + std::to_string(lineno) + ": malformed JSON: " + e.what());
    }
    if (!j.is_object()) {
      throw DataError(path + ":" + std::to_string(lineno) + ": expected a JSON object");
    }
    try {
      fn(j, lineno);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

}  // namespace detail

inline std::vector<TrainingExample> read_corpus(const std::string& path) {
  std::vector<TrainingExample> out;
  detail::for_each_json_line(path, [&](const nlohmann::json& j, std::size_t lineno) {
    if (!j.contains("emotion") || !j.contains("text")) {
      throw DataError(path + ":" + std::to_string(lineno) +
                      ": corpus lines need \"emotion\" and \"text\"");
    }
    TrainingExample ex;
    ex.emotion = j.at("emotion").get<std::string>();
    ex.text = j.at("text").get<std::string>();
    if (j.contains("context")) ex.context = j.at("context").get<std::string>();
    ex.line = lineno;
    out.push_back(std::move(ex));
  });
  return out;
}

inline void write_corpus(const std::string& path, const std::vector<TrainingExample>& examples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  for (const auto& ex : examples) {
    nlohmann::ordered_json j;
    j["emotion"] = ex.emotion;
    if (!ex.context.empty()) j["context"] = ex.context;
    j["text"] = ex.text;
    out << j.dump() << '\n';
  }
}

inline std::vector<EmoCauseExample> read_emocause(const std::string& path) {
  std::vector<EmoCauseExample> out;
  detail::for_each_json_line(path, [&](const nlohmann::json& j, std::size_t lineno) {
    const std::string where = path + ":" + std::to_string(lineno) + ": ";
    if (!j.contains("emotion") || !j.contains("tokens") || !j.contains("cause_indices")) {
      throw DataError(where + "EmoCause lines need \"emotion\", \"tokens\", \"cause_indices\"");
    }
    EmoCauseExample ex;
    ex.emotion = j.at("emotion").get<std::string>();
    ex.tokens = j.at("tokens").get<std::vector<std::string>>();
    if (ex.tokens.empty()) throw DataError(where + "empty token list");
    for (const auto& idx : j.at("cause_indices")) {
      const auto i = idx.get<long long>();
      if (i < 0 || static_cast<std::size_t>(i) >= ex.tokens.size()) {
        throw DataError(where + "cause index " + std::to_string(i) + " out of range");
      }
      ex.cause_indices.push_back(static_cast<std::size_t>(i));
    }
    std::sort(ex.cause_indices.begin(), ex.cause_indices.end());
    if (std::adjacent_find(ex.cause_indices.begin(), ex.cause_indices.end()) !=
        ex.cause_indices.end()) {
      throw DataError(where + "duplicate cause index");
    }
    out.push_back(std::move(ex));
  });
  return out;
}

inline void write_emocause(const std::string& path, const std::vector<EmoCauseExample>& examples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  for (const auto& ex : examples) {
    nlohmann::ordered_json j;
    j["emotion"] = ex.emotion;
    j["tokens"] = ex.tokens;
    j["cause_indices"] = ex.cause_indices;
    out << j.dump() << '\n';
  }
}

}  // namespace focusrsa
