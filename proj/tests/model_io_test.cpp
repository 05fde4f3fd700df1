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

#include <cstdio>
#include <filesystem>
#include <string>

#include <gtest/gtest.h>

#include "focusrsa/model_io.hpp"
#include "focusrsa/synth.hpp"

namespace focusrsa {
namespace {

const NGramModel& dialogue_model() {
  static const NGramModel m = [] {
    const auto b = generate_synthetic({});
    NGramOptions o;
    o.catalog = b.labels;
    return train_ngram(b.dialogue_train, o);
  }();
  return m;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("focusrsa_io_" + name)).string();
}

TEST(ModelIo, RoundTripIsExact) {
  const auto& m = dialogue_model();
  const std::string path = temp_path("roundtrip.bin");
  save_model(m, path);
  const auto loaded = load_model(path);
  std::remove(path.c_str());
  EXPECT_TRUE(loaded == m);
  EXPECT_EQ(serialize_model(loaded), serialize_model(m));

  const auto& v = m.vocabulary();
  Rng rng(8);
  for (int probe = 0; probe < 100; ++probe) {
    Condition c;
    c.emotion_prefix.push_back(v.emotion_id(rng.pick(m.catalog())));
    if (probe % 2) c.context_tokens = {static_cast<TokenId>(v.size() - 1 - rng.below(20))};
    std::vector<TokenId> prefix;
    for (std::size_t i = rng.below(5); i > 0; --i) prefix.push_back(v.encode(v.token(v.size() - 1 - rng.below(40))));
    const auto a = m.next_token_logprobs(c, prefix);
    const auto b = loaded.next_token_logprobs(c, prefix);
    ASSERT_TRUE(a == b) << "probe " << probe;
  }
}

TEST(ModelIo, EmptyFileIsTruncated) {
  EXPECT_THROW(deserialize_model(""), TruncatedFileError);
}

TEST(ModelIo, BadMagicIsVersionError) {
  std::string bytes = serialize_model(dialogue_model());
  bytes[0] ^= 0x20;
  EXPECT_THROW(deserialize_model(bytes), VersionError);
}

TEST(ModelIo, FutureVersionIsVersionError) {
  std::string bytes = serialize_model(dialogue_model());
  bytes[4] = 9;
  EXPECT_THROW(deserialize_model(bytes), VersionError);
}

TEST(ModelIo, FlippedBodyByteFailsChecksum) {
  std::string bytes = serialize_model(dialogue_model());
  bytes[bytes.size() / 2] ^= 0x01;
  EXPECT_THROW(deserialize_model(bytes), ChecksumError);
}

TEST(ModelIo, TruncationIsDetected) {
  const std::string bytes = serialize_model(dialogue_model());
  for (std::size_t cut : {std::size_t{3}, std::size_t{10}, bytes.size() / 2, bytes.size() - 1}) {
    EXPECT_THROW(deserialize_model(bytes.substr(0, cut)), TruncatedFileError) << cut;
  }
}

TEST(ModelIo, MissingFileIsDataError) {
  EXPECT_THROW(load_model(temp_path("does_not_exist.bin")), DataError);
}

}  // namespace
}  // namespace focusrsa
