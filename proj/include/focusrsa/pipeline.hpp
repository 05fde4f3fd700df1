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

// End-to-end response generation: recognize the emotion and its cause words
// with the estimator, build the shared world, then decode with the
// pragmatic speaker.

#pragma once

#include <vector>

#include "focusrsa/distractor.hpp"
#include "focusrsa/gee.hpp"
#include "focusrsa/model.hpp"
#include "focusrsa/rsa.hpp"

namespace focusrsa {

struct PipelineConfig {
  std::size_t k = 5;
  CauseFilter filter;
  CauseScoreOptions scoring;
  SamplingConfig sampling;
  RsaConfig rsa;
  std::uint64_t seed = 0;
};

struct GenerationResult {
  CauseAnalysis analysis;
  SharedWorld world;
  DecodeResult decoded;
};

// `pool` supplies whole-context distractors in plain mode and is ignored
// otherwise.
template <ConditionalModel S, ConditionalModel G>
GenerationResult generate_response(const S& speaker, const G& gee, const EmotionCatalog& catalog,
                                   const Utterance& context, const PipelineConfig& cfg,
                                   const std::vector<Utterance>* pool = nullptr) {
  GenerationResult r;
  r.analysis = analyze_causes(gee, catalog, context, cfg.k, cfg.filter, cfg.scoring);
  switch (cfg.rsa.mode) {
    case DecodeMode::kBase:
      r.world = SharedWorld::singleton(context);
      break;
    case DecodeMode::kFocused:
      r.world = build_world(gee, context, r.analysis.selection, r.analysis.posterior, cfg.sampling,
                            cfg.seed);
      break;
    case DecodeMode::kPlain:
      if (pool == nullptr) throw UsageError("plain mode needs a distractor pool");
      r.world = build_plain_world(context, *pool, cfg.sampling.world_size, cfg.seed);
      break;
  }
  auto session = init_session(speaker, r.world, cfg.rsa);
  r.decoded = decode(session);
  return r;
}

}  // namespace focusrsa
