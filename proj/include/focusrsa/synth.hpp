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

// Templated synthetic benchmark with known cause positions.
//
// Each situation is a shared sentence frame whose cause slots are filled
// with nouns from the emotion's own lexicon. Frames, time phrases, and people
// are emotion-agnostic. Some frames also carry an explicit emotion word,
// which is never a gold cause. A fraction of cause slots borrow a noun from
// another emotion so recognition is not trivially perfect.
//
// Every situation also gets a listener response for training a dialogue
// speaker. About half the responses echo a noun, usually one of the
// situation's causes; the rest are generic.

#pragma once

#include <string>
#include <vector>

#include "focusrsa/corpus.hpp"
#include "focusrsa/errors.hpp"
#include "focusrsa/rng.hpp"
#include "focusrsa/text.hpp"

namespace focusrsa {

struct SynthConfig {
  std::size_t emotions = 8;
  std::size_t sentences = 4000;
  std::uint64_t seed = 0;
  std::size_t heldout_every = 10;  // every n-th sentence goes to the test split
  double explicit_emotion_rate = 0.25;
  double borrowed_cause_rate = 0.15;
  double echo_rate = 0.55;
  double faithful_echo_rate = 0.7;  // echoes that repeat one of the causes
};

struct SynthBenchmark {
  std::vector<std::string> labels;
  std::vector<TrainingExample> gee_train, gee_test;            // emotion, text
  std::vector<EmoCauseExample> emocause_train, emocause_test;  // gold causes
  std::vector<TrainingExample> dialogue_train, dialogue_test;  // emotion, context, text
};

namespace synth_detail {

struct Lexicon {
  std::string label;
  std::vector<std::string> causes;
  std::vector<std::string> feelings;  // explicit emotion words
  std::vector<std::string> reactions;  // listener adjectives
  bool positive = false;
};

inline std::vector<Lexicon> lexicons() {
  std::vector<Lexicon> l = {
      {"joyful",
       {"gift", "party", "wedding", "vacation", "puppy", "concert", "reunion", "bonus", "festival",
        "beach", "birthday", "picnic", "holiday", "lottery"},
       {"happy", "joyful", "glad"},
       {"wonderful", "amazing", "great"},
       true},
      {"sad",
       {"funeral", "breakup", "flu", "divorce", "layoff", "goodbye", "accident", "illness",
        "hospital", "diagnosis", "eviction", "loss", "cancer", "move"},
       {"sad", "heartbroken", "down"},
       {"awful", "terrible", "hard"},
       false},
      {"afraid",
       {"spider", "storm", "burglar", "earthquake", "snake", "tornado", "intruder", "fire", "ghost",
        "flood", "stalker", "shark", "darkness", "noise"},
       {"scared", "afraid", "frightened"},
       {"scary", "frightening", "terrifying"},
       false},
      {"angry",
       {"scam", "insult", "theft", "delay", "betrayal", "fine", "lie", "vandalism", "overcharge",
        "rudeness", "ticket", "robbery", "fraud", "cheating"},
       {"angry", "furious", "mad"},
       {"frustrating", "infuriating", "unfair"},
       false},
      {"proud",
       {"graduation", "award", "promotion", "trophy", "degree", "medal", "scholarship", "recital",
        "marathon", "diploma", "championship", "publication", "milestone", "interview"},
       {"proud", "accomplished"},
       {"impressive", "fantastic", "great"},
       true},
      {"anxious",
       {"interview", "exam", "deadline", "audition", "presentation", "surgery", "results", "flight",
        "debt", "appointment", "inspection", "review", "bills", "move"},
       {"nervous", "anxious", "worried"},
       {"stressful", "tense", "hard"},
       false},
      {"grateful",
       {"donation", "favor", "support", "ride", "loan", "help", "meal", "advice", "scholarship",
        "kindness", "gesture", "card", "hospitality", "recommendation"},
       {"grateful", "thankful"},
       {"kind", "thoughtful", "wonderful"},
       true},
      {"disgusted",
       {"vomit", "garbage", "mold", "cockroach", "sewage", "rat", "stench", "hair", "slime",
        "maggot", "grease", "litter", "spit", "rot"},
       {"disgusted", "grossed"},
       {"gross", "nasty", "disgusting"},
       false},
  };
  // Remaining labels of the common 32-emotion inventory get procedural
  // lexicons.
  const std::vector<std::string> more = {
      "annoyed",    "anticipating", "apprehensive", "ashamed",  "caring",      "confident",
      "content",    "devastated",   "disappointed", "embarrassed", "excited",  "faithful",
      "furious",    "guilty",       "hopeful",      "impressed", "jealous",    "lonely",
      "nostalgic",  "prepared",     "sentimental",  "surprised", "terrified",  "trusting"};
  for (std::size_t i = 0; i < more.size(); ++i) {
    Lexicon x;
    x.label = more[i];
    for (int j = 0; j < 14; ++j) x.causes.push_back(more[i] + "_cause" + std::to_string(j));
    x.feelings = {more[i]};
    x.reactions = {"interesting", "understandable", "big"};
    x.positive = i % 2 == 0;
    l.push_back(std::move(x));
  }
  return l;
}

// Frame tokens; "C1"/"C2" are cause slots, "EMO" an explicit emotion word,
// "TIME"/"PERSON" multi-word fillers.
inline const std::vector<std::vector<std::string>>& plain_frames() {
  static const std::vector<std::vector<std::string>> f = {
      {"TIME", "PERSON", "told", "me", "about", "the", "C1", "."},
      {"i", "keep", "thinking", "about", "the", "C1", "and", "the", "C2", "."},
      {"TIME", "i", "had", "to", "deal", "with", "the", "C1", "at", "home", "."},
      {"when", "PERSON", "mentioned", "the", "C1", ",", "i", "remembered", "the", "C2", "."},
      {"TIME", "there", "was", "a", "C1", "near", "our", "house", "."},
      {"i", "can", "not", "stop", "thinking", "about", "the", "C1", "TIME", "."},
      {"PERSON", "and", "i", "talked", "about", "the", "C1", "and", "the", "C2", "TIME", "."},
      {"it", "all", "started", "with", "the", "C1", "TIME", "."},
  };
  return f;
}

inline const std::vector<std::vector<std::string>>& emotive_frames() {
  static const std::vector<std::vector<std::string>> f = {
      {"i", "felt", "so", "EMO", "because", "of", "the", "C1", "TIME", "."},
      {"TIME", "i", "was", "EMO", "when", "PERSON", "brought", "up", "the", "C1", "."},
      {"the", "C1", "and", "the", "C2", "made", "me", "EMO", "."},
  };
  return f;
}

inline const std::vector<std::vector<std::string>>& times() {
  static const std::vector<std::vector<std::string>> t = {
      {"yesterday"},       {"last", "week"}, {"this", "morning"}, {"last", "night"},
      {"today"},           {"last", "month"}, {"on", "sunday"},   {"recently"}};
  return t;
}

inline const std::vector<std::string>& people() {
  static const std::vector<std::string> p = {"friend", "brother", "sister", "mom",      "dad",
                                             "boss",   "neighbor", "coworker", "roommate", "cousin"};
  return p;
}

}  // namespace synth_detail

inline SynthBenchmark generate_synthetic(const SynthConfig& cfg) {
  using namespace synth_detail;
  const auto all = lexicons();
  if (cfg.emotions < 2 || cfg.emotions > all.size()) {
    throw UsageError("synthetic benchmark supports 2.." + std::to_string(all.size()) + " emotions");
  }
  if (cfg.sentences < 1) throw UsageError("need at least one sentence");
  if (cfg.heldout_every < 2) throw UsageError("heldout_every must be at least 2");
  const std::vector<Lexicon> lex(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(cfg.emotions));

  SynthBenchmark out;
  for (const auto& l : lex) out.labels.push_back(l.label);

  std::vector<std::string> every_cause;
  for (const auto& l : lex) every_cause.insert(every_cause.end(), l.causes.begin(), l.causes.end());

  Rng rng(cfg.seed);
  for (std::size_t n = 0; n < cfg.sentences; ++n) {
    const std::size_t e = rng.below(lex.size());
    const Lexicon& L = lex[e];
    const bool emotive = rng.uniform() < cfg.explicit_emotion_rate;
    const auto& frame = emotive ? rng.pick(emotive_frames()) : rng.pick(plain_frames());

    auto draw_cause = [&](const std::string& avoid) {
      for (;;) {
        const Lexicon& src =
            rng.uniform() < cfg.borrowed_cause_rate ? lex[rng.below(lex.size())] : L;
        const std::string& w = rng.pick(src.causes);
        if (w != avoid) return w;
      }
    };
    const std::string c1 = draw_cause("");
    const std::string c2 = draw_cause(c1);

    std::vector<std::string> tokens;
    std::vector<std::size_t> causes;
    for (const auto& slot : frame) {
      if (slot == "C1" || slot == "C2") {
        causes.push_back(tokens.size());
        tokens.push_back(slot == "C1" ? c1 : c2);
      } else if (slot == "EMO") {
        tokens.push_back(rng.pick(L.feelings));
      } else if (slot == "TIME") {
        for (const auto& w : rng.pick(times())) tokens.push_back(w);
      } else if (slot == "PERSON") {
        tokens.push_back("my");
        tokens.push_back(rng.pick(people()));
      } else {
        tokens.push_back(slot);
      }
    }
    Utterance u = Utterance::from_words(tokens);
    const std::string text = u.text();

    // Listener response.
    std::vector<std::string> said;
    std::vector<std::string> cause_words;
    for (std::size_t i : causes) cause_words.push_back(tokens[i]);
    const std::string& reaction = rng.pick(L.reactions);
    if (rng.uniform() < cfg.echo_rate) {
      const std::string& x = rng.uniform() < cfg.faithful_echo_rate ? rng.pick(cause_words)
                                                                     : rng.pick(every_cause);
      switch (rng.below(4)) {
        case 0:
          said = L.positive ? std::vector<std::string>{"wow", ",", "how", "was", "the", x, "?"}
                            : std::vector<std::string>{"oh", "no", ",", "how", "is", "the", x,
                                                       "now", "?"};
          break;
        case 1:
          said = L.positive ? std::vector<std::string>{"i", "am", "so", "happy", "to", "hear",
                                                       "about", "the", x, "."}
                            : std::vector<std::string>{"i", "am", "sorry", "to", "hear", "about",
                                                       "the", x, "."};
          break;
        case 2:
          said = {"that", x, "sounds", reaction, "."};
          break;
        default:
          said = {"tell", "me", "more", "about", "the", x, "."};
          break;
      }
    } else {
      switch (rng.below(4)) {
        case 0:
          said = {"that", "sounds", reaction, "."};
          break;
        case 1:
          said = L.positive ? std::vector<std::string>{"that", "is", "great", "to", "hear", "!"}
                            : std::vector<std::string>{"i", "hope", "things", "get", "better",
                                                       "soon", "."};
          break;
        case 2:
          said = {"how", "are", "you", "feeling", "now", "?"};
          break;
        default:
          said = {"i", "understand", "how", "you", "feel", "."};
          break;
      }
    }
    const std::string response = Utterance::from_words(said).text();

    const bool test = n % cfg.heldout_every == cfg.heldout_every - 1;
    TrainingExample sit{L.label, text, "", 0};
    EmoCauseExample ec{L.label, tokens, causes};
    TrainingExample dia{L.label, response, text, 0};
    (test ? out.gee_test : out.gee_train).push_back(sit);
    (test ? out.emocause_test : out.emocause_train).push_back(ec);
    (test ? out.dialogue_test : out.dialogue_train).push_back(dia);
  }
  return out;
}

}  // namespace focusrsa
