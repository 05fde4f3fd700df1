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

// Binary model container.
//
//   "PCM1"            4 bytes magic
//   version           u32
//   body length       u64
//   body              canonical serialization (below)
//   crc32             u32 over every preceding byte
//
// All integers little-endian; doubles stored as their IEEE-754 bit pattern
// in a u64. Strings are a u32 byte length followed by the bytes. The body
// holds order, discount, copy weight, min count, corpus fingerprint, the
// vocabulary (token, flags), reserved ids, emotion labels, every class
// table in key order with histories and continuations in sorted order, and
// finally the context document frequencies.

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <string_view>

#include "focusrsa/corpus.hpp"
#include "focusrsa/errors.hpp"
#include "focusrsa/ngram.hpp"

namespace focusrsa {

inline constexpr std::string_view kModelMagic = "PCM1";
inline constexpr std::uint32_t kModelFormatVersion = 1;

namespace detail {

class ByteWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    buf_.append(s);
  }
  void raw(std::string_view s) { buf_.append(s); }
  void ids(const std::vector<TokenId>& v) {
    u32(static_cast<std::uint32_t>(v.size()));
    for (TokenId t : v) u32(t);
  }
  const std::string& bytes() const { return buf_; }

 private:
  std::string buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string_view data) : data_(data) {}

  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(data_[pos_++]);
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{static_cast<std::uint8_t>(data_[pos_++])} << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{static_cast<std::uint8_t>(data_[pos_++])} << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const std::uint32_t n = u32();
    need(n);
    std::string s(data_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  std::vector<TokenId> ids() {
    const std::uint32_t n = u32();
    need(std::size_t{n} * 4);
    std::vector<TokenId> v(n);
    for (auto& t : v) t = u32();
    return v;
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) throw TruncatedFileError("model body ends early");
  }
  std::string_view data_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::string serialize_model(const NGramModel& model) {
  const auto& p = model.parts();
  const Vocabulary& v = p.vocabulary;
  detail::ByteWriter body;
  body.u32(static_cast<std::uint32_t>(p.order));
  body.f64(p.discount);
  body.f64(p.copy_weight);
  body.u32(p.min_count);
  body.str(p.fingerprint);
  body.u32(static_cast<std::uint32_t>(v.size()));
  for (TokenId id = 0; id < v.size(); ++id) {
    body.str(v.token(id));
    body.u8(static_cast<std::uint8_t>((v.is_aliased(id) ? 1 : 0) | (v.is_emotion(id) ? 2 : 0)));
  }
  body.u32(v.bos());
  body.u32(v.eos());
  body.u32(v.unk());
  body.u32(static_cast<std::uint32_t>(v.emotion_labels().size()));
  for (const auto& label : v.emotion_labels()) {
    body.str(label);
    body.u32(v.emotion_id(label));
  }
  body.u32(static_cast<std::uint32_t>(p.tables.size()));
  for (const auto& [key, table] : p.tables) {
    body.ids(key);
    body.u32(static_cast<std::uint32_t>(table.size()));
    for (const auto& [hist, node] : table) {
      body.ids(hist);
      body.u64(node.total);
      body.u32(static_cast<std::uint32_t>(node.next.size()));
      for (const auto& [w, c] : node.next) {
        body.u32(w);
        body.u64(c);
      }
    }
  }
  body.u32(p.context_docs);
  body.ids(p.context_df);

  detail::ByteWriter file;
  file.raw(kModelMagic);
  file.u32(kModelFormatVersion);
  file.u64(body.bytes().size());
  file.raw(body.bytes());
  file.u32(crc32_of(file.bytes()));
  return file.bytes();
}

inline NGramModel deserialize_model(std::string_view bytes) {
  constexpr std::size_t kHeader = 4 + 4 + 8;
  if (bytes.size() < kModelMagic.size()) throw TruncatedFileError("model file is truncated");
  if (bytes.substr(0, 4) != kModelMagic) {
    throw VersionError("not a model file of a supported version (bad magic)");
  }
  if (bytes.size() < kHeader) throw TruncatedFileError("model header is truncated");
  detail::ByteReader header(bytes.substr(4, 12));
  const std::uint32_t version = header.u32();
  if (version != kModelFormatVersion) {
    throw VersionError("model format version " + std::to_string(version) + ", expected " +
                       std::to_string(kModelFormatVersion));
  }
  const std::uint64_t body_len = header.u64();
  if (bytes.size() - kHeader < body_len + 4) throw TruncatedFileError("model body is truncated");
  if (bytes.size() - kHeader > body_len + 4) throw LoadError("trailing bytes after model");
  const std::string_view covered = bytes.substr(0, kHeader + body_len);
  detail::ByteReader trailer(bytes.substr(kHeader + body_len, 4));
  if (trailer.u32() != crc32_of(std::string(covered))) {
    throw ChecksumError("model checksum mismatch");
  }

  detail::ByteReader r(bytes.substr(kHeader, body_len));
  NGramModel::Parts p;
  p.order = static_cast<int>(r.u32());
  p.discount = r.f64();
  p.copy_weight = r.f64();
  p.min_count = r.u32();
  p.fingerprint = r.str();
  const std::uint32_t vsize = r.u32();
  std::vector<std::string> tokens;
  std::vector<std::uint8_t> flags;
  for (std::uint32_t i = 0; i < vsize; ++i) {
    tokens.push_back(r.str());
    flags.push_back(r.u8());
  }
  const TokenId bos = r.u32(), eos = r.u32(), unk = r.u32();
  std::vector<std::pair<std::string, std::string>> emotions;
  const std::uint32_t n_emotions = r.u32();
  for (std::uint32_t i = 0; i < n_emotions; ++i) {
    std::string label = r.str();
    const TokenId id = r.u32();
    if (id >= tokens.size()) throw LoadError("emotion token id out of range");
    emotions.emplace_back(std::move(label), tokens[id]);
  }
  p.vocabulary = Vocabulary::from_tokens(tokens, bos, eos, unk, emotions);
  if (p.vocabulary.size() != vsize) throw LoadError("emotion tokens missing from vocabulary");
  for (TokenId id = 0; id < vsize; ++id) {
    if (flags[id] & 1) p.vocabulary.set_aliased(id, true);
    if (((flags[id] & 2) != 0) != p.vocabulary.is_emotion(id)) {
      throw LoadError("emotion token flags disagree with label table");
    }
  }
  const std::uint32_t n_classes = r.u32();
  for (std::uint32_t c = 0; c < n_classes; ++c) {
    auto key = r.ids();
    auto& table = p.tables[std::move(key)];
    const std::uint32_t n_hist = r.u32();
    for (std::uint32_t h = 0; h < n_hist; ++h) {
      auto hist = r.ids();
      NGramModel::Node node;
      node.total = r.u64();
      const std::uint32_t n_next = r.u32();
      for (std::uint32_t k = 0; k < n_next; ++k) {
        const TokenId w = r.u32();
        if (w >= vsize) throw LoadError("continuation id out of range");
        node.next[w] = r.u64();
      }
      table.emplace(std::move(hist), std::move(node));
    }
  }
  p.context_docs = r.u32();
  p.context_df = r.ids();
  if (!r.done()) throw LoadError("unparsed bytes in model body");
  return NGramModel(std::move(p));
}

inline void save_model(const NGramModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path);
  const std::string bytes = serialize_model(model);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing " + path);
}

inline NGramModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return deserialize_model(read_file(path));
}

}  // namespace focusrsa
