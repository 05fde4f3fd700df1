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

// Word tokenizer shared by the estimator and cause annotation.

#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "focusrsa/errors.hpp"

namespace focusrsa {

// Word sequence with the original surface form of every token kept alongside
// the normalized (lowercased) form used for modeling.
struct Utterance {
  std::vector<std::string> words;
  std::vector<std::string> surface;

  std::size_t size() const { return words.size(); }
  bool empty() const { return words.empty(); }

  // Builds an utterance from already-tokenized words; surface == words.
  static Utterance from_words(std::vector<std::string> ws) {
    Utterance u;
    u.surface = ws;
    u.words = std::move(ws);
    return u;
  }

  std::string text() const {
    std::string out;
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (i) out += ' ';
      out += words[i];
    }
    return out;
  }

  friend bool operator==(const Utterance&, const Utterance&) = default;
};

inline bool is_punctuation_token(std::string_view tok) {
  if (tok.empty()) return false;
  for (unsigned char ch : tok) {
    if (!std::ispunct(ch)) return false;
  }
  return true;
}

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return out;
}

// Lowercased whitespace-plus-punctuation tokenizer. Every ASCII punctuation
// character is its own token, except an apostrophe between two word
// characters ("don't" stays whole). Non-ASCII bytes are word characters.
inline Utterance tokenize(std::string_view text) {
  Utterance out;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) {
      out.surface.push_back(current);
      out.words.push_back(to_lower(current));
      current.clear();
    }
  };
  auto is_word = [](unsigned char ch) {
    return ch >= 0x80 || std::isalnum(ch) || ch == '_';
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const auto ch = static_cast<unsigned char>(text[i]);
    if (std::isspace(ch)) {
      flush();
    } else if (is_word(ch)) {
      current += static_cast<char>(ch);
    } else if (std::ispunct(ch)) {
      const bool inner_apostrophe = ch == '\'' && !current.empty() && i + 1 < text.size() &&
                                    is_word(static_cast<unsigned char>(text[i + 1]));
      if (inner_apostrophe) {
        current += static_cast<char>(ch);
      } else {
        flush();
        out.surface.emplace_back(1, static_cast<char>(ch));
        out.words.emplace_back(1, static_cast<char>(ch));
      }
    } else {
      current += static_cast<char>(ch);
    }
  }
  flush();
  return out;
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  parts.push_back(cur);
  return parts;
}

}  // namespace focusrsa
