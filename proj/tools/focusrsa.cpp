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

// focusrsa command-line tool.
//
// Exit codes: 0 success, 1 usage, 2 data or format, 3 degenerate model.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "focusrsa/any_model.hpp"
#include "focusrsa/corpus.hpp"
#include "focusrsa/distractor.hpp"
#include "focusrsa/eval.hpp"
#include "focusrsa/gee.hpp"
#include "focusrsa/model_io.hpp"
#include "focusrsa/ngram.hpp"
#include "focusrsa/pipeline.hpp"
#include "focusrsa/rsa.hpp"
#include "focusrsa/synth.hpp"

namespace {

using namespace focusrsa;
using Json = nlohmann::ordered_json;

constexpr const char* kToolVersion = "0.1.0";

// ---------------------------------------------------------------------------
// Run manifest: the argument vector plus fingerprints of every input file.

struct Manifest {
  std::string command;
  std::vector<std::string> argv;
  Json config = Json::object();
  std::map<std::string, std::string> inputs;  // path -> crc32

  void input(const std::string& path) {
    if (path.empty() || is_bridge_spec(path)) return;
    inputs[path] = file_fingerprint(path);
  }

  Json to_json() const {
    Json j;
    j["tool"] = "focusrsa";
    j["version"] = kToolVersion;
    j["command"] = command;
    j["argv"] = argv;
    j["config"] = config;
    j["inputs"] = Json::object();
    for (const auto& [p, f] : inputs) j["inputs"][p] = f;
    return j;
  }
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write " + path);
  f << text;
  if (!f) throw DataError("failed writing " + path);
}

std::vector<std::size_t> parse_sizes(const std::string& s, const char* what) {
  std::vector<std::size_t> out;
  for (const auto& part : split(s, ',')) {
    if (part.empty()) continue;
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(part, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != part.size() || v < 1) {
      throw UsageError(std::string("invalid ") + what + " value '" + part + "'");
    }
    out.push_back(static_cast<std::size_t>(v));
  }
  if (out.empty()) throw UsageError(std::string("empty ") + what + " list");
  return out;
}

std::vector<double> parse_doubles(const std::string& s, const char* what) {
  std::vector<double> out;
  for (const auto& part : split(s, ',')) {
    if (part.empty()) continue;
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(part, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != part.size()) throw UsageError(std::string("invalid ") + what + " value '" + part + "'");
    out.push_back(v);
  }
  if (out.empty()) throw UsageError(std::string("empty ") + what + " list");
  return out;
}

std::vector<DecodeMode> parse_modes(const std::string& s) {
  std::vector<DecodeMode> out;
  for (const auto& part : split(s, ',')) {
    if (!part.empty()) out.push_back(parse_mode(part));
  }
  if (out.empty()) throw UsageError("empty mode list");
  return out;
}

// Context for dialogue pairs, the text itself for plain corpora.
Utterance context_of(const TrainingExample& ex) {
  return tokenize(ex.context.empty() ? ex.text : ex.context);
}

std::vector<Utterance> read_pool(const std::string& path) {
  std::vector<Utterance> pool;
  for (const auto& ex : read_corpus(path)) pool.push_back(context_of(ex));
  return pool;
}

Json selection_json(const CauseAnalysis& a) {
  Json causes = Json::array();
  for (std::size_t i = 0; i < a.selection.positions.size(); ++i) {
    const std::size_t pos = a.selection.positions[i];
    causes.push_back({{"word", a.selection.words[i]},
                      {"position", pos},
                      {"score", a.scores.positions[pos].score}});
  }
  return causes;
}

Json world_json(const SharedWorld& w) {
  Json out = Json::array();
  for (std::size_t i = 0; i < w.contexts.size(); ++i) {
    Json c;
    c["text"] = w.contexts[i].text();
    if (i > 0) {
      c["emotions"] = w.source_emotions.empty() ? Json::array() : Json(w.source_emotions[i - 1]);
      Json reps = Json::array();
      if (!w.replaced.empty()) {
        for (const auto& r : w.replaced[i - 1]) {
          reps.push_back({{"position", r.position},
                          {"original", r.original},
                          {"replacement", r.replacement},
                          {"fallback", r.fallback}});
        }
      }
      c["replacements"] = reps;
      if (!w.duplicate_of.empty() && w.duplicate_of[i - 1]) {
        c["duplicate_of"] = *w.duplicate_of[i - 1];
      } else {
        c["duplicate_of"] = nullptr;
      }
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::string trace_jsonl(const DecodeResult& d) {
  std::string out;
  for (const auto& t : d.trace) {
    Json j;
    j["step"] = t.step;
    j["token"] = t.token;
    j["prior"] = t.prior;
    j["s0_logit"] = t.s0_logit == kNegInf ? Json(nullptr) : Json(t.s0_logit);
    j["l0_logit"] = t.l0_logit;
    j["floored"] = t.floored;
    out += j.dump() + "\n";
  }
  return out;
}

EmotionCatalog catalog_of(const AnyModel& m) {
  const auto labels = m.catalog();
  if (labels.empty()) throw DataError("model has no emotion labels");
  return EmotionCatalog(labels);
}

// Options shared by every command that builds worlds or decodes.
struct PipelineFlags {
  std::size_t k = 5;
  std::size_t n = 3;
  std::size_t size = 3;
  double top_p = 0.9;
  std::size_t retries = 10;
  std::size_t samples = 1;
  bool filter = false;
  std::uint64_t seed = 0;

  void add_world(CLI::App* c) {
    c->add_option("--k", k, "cause words replaced")->capture_default_str();
    c->add_option("--n", n, "least likely emotions conditioning distractors")->capture_default_str();
    c->add_option("--size", size, "world size including the true context")->capture_default_str();
    c->add_option("--top-p", top_p, "nucleus mass for replacement sampling")->capture_default_str();
    c->add_option("--retries", retries, "replacement retries")->capture_default_str();
    add_scoring(c);
  }
  void add_scoring(CLI::App* c) {
    c->add_option("--samples", samples, "prefix samples per cause position")->capture_default_str();
    c->add_flag("--filter", filter, "drop punctuation and stopwords from cause selection");
    c->add_option("--seed", seed, "random seed")->capture_default_str();
  }

  PipelineConfig config() const {
    PipelineConfig cfg;
    cfg.k = k;
    cfg.filter = filter ? CauseFilter::standard() : CauseFilter{};
    cfg.scoring.samples = samples;
    cfg.scoring.seed = seed;
    cfg.sampling.strategy = SamplingStrategy::nucleus(top_p, 1.0);
    cfg.sampling.max_retries = retries;
    cfg.sampling.n_negative_emotions = n;
    cfg.sampling.world_size = size;
    cfg.seed = seed;
    return cfg;
  }

  Json to_json() const {
    return {{"k", k},         {"n", n},           {"size", size},     {"top_p", top_p},
            {"retries", retries}, {"samples", samples}, {"filter", filter}, {"seed", seed}};
  }
};

struct RsaFlags {
  double alpha = 4.0;
  double beta = 0.9;
  std::size_t max_len = 40;

  void add(CLI::App* c) {
    c->add_option("--alpha", alpha, "speaker rationality")->capture_default_str();
    c->add_option("--beta", beta, "listener rationality")->capture_default_str();
    c->add_option("--max-len", max_len, "maximum response length")->capture_default_str();
  }
};

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

std::string csv_of(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + csv_escape(cells[i]);
    out += "\n";
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out;
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// ---------------------------------------------------------------------------

class Cli {
 public:
  int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

 private:
  std::ostream* out_ = nullptr;
  Manifest manifest_;
  std::string manifest_path_;
  std::string backend_;

  std::string model_or_backend(const std::string& given, const char* flag) const {
    if (!given.empty()) return given;
    if (!backend_.empty()) return backend_;
    throw UsageError(std::string(flag) + " is required (or give --backend bridge:CMD)");
  }

  void emit(const Json& j) { *out_ << j.dump(2) << "\n"; }
};

int Cli::run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  out_ = &out;
  manifest_ = Manifest{};
  manifest_.argv = args;
  manifest_path_.clear();
  backend_.clear();

  CLI::App app{"Emotion-cause aware pragmatic response generation", "focusrsa"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);
  app.add_option("--manifest", manifest_path_, "write a run manifest to this file");
  app.add_option("--backend", backend_, "default model for unset model flags (bridge:CMD or file)");

  // train
  auto* train = app.add_subcommand("train", "train the reference n-gram model");
  std::string corpus_path, out_path, catalog_list;
  NGramOptions ngram_opts;
  std::optional<double> copy_weight;
  train->add_option("--corpus", corpus_path, "training corpus (JSON Lines)")->required();
  train->add_option("--out", out_path, "output model file")->required();
  train->add_option("--order", ngram_opts.order, "n-gram order")->capture_default_str();
  train->add_option("--discount", ngram_opts.discount, "absolute discount")->capture_default_str();
  train->add_option("--min-count", ngram_opts.min_count, "minimum word count")->capture_default_str();
  train->add_option("--catalog", catalog_list, "comma-separated emotion labels");
  train->add_option("--copy-weight", copy_weight, "context copy weight (default: estimated)");

  // emotion
  auto* emotion = app.add_subcommand("emotion", "recognize the emotion of a text");
  std::string model_spec, text;
  std::size_t top = 5;
  emotion->add_option("--model", model_spec, "model file or bridge:CMD");
  emotion->add_option("--text", text, "input text")->required();
  emotion->add_option("--top", top, "labels to list")->capture_default_str();

  // causes
  PipelineFlags pf;
  auto* causes = app.add_subcommand("causes", "rank emotion cause words");
  causes->add_option("--model", model_spec, "model file or bridge:CMD");
  causes->add_option("--text", text, "input text")->required();
  causes->add_option("--k", pf.k, "cause words to select")->capture_default_str();
  pf.add_scoring(causes);

  // world
  auto* world = app.add_subcommand("world", "build a shared world of distractor contexts");
  world->add_option("--model", model_spec, "model file or bridge:CMD");
  world->add_option("--text", text, "input text")->required();
  pf.add_world(world);

  // generate
  RsaFlags rf;
  std::string speaker_spec, gee_spec, context, mode_name = "focused", trace_path, pool_path;
  auto* generate = app.add_subcommand("generate", "generate a response");
  generate->add_option("--speaker", speaker_spec, "base speaker model file or bridge:CMD");
  generate->add_option("--gee", gee_spec, "emotion estimator model file or bridge:CMD");
  generate->add_option("--context", context, "dialogue context")->required();
  generate->add_option("--mode", mode_name, "focused, plain, or base")->capture_default_str();
  generate->add_option("--trace", trace_path, "write a per-step trace (JSON Lines)");
  generate->add_option("--pool", pool_path, "corpus of distractor contexts for plain mode");
  rf.add(generate);
  pf.add_world(generate);

  // eval
  auto* eval = app.add_subcommand("eval", "evaluation harnesses");
  eval->require_subcommand(1);
  std::string data_path, ks_list = "1,3,5", baseline, csv_path, modes_list = "base,plain,focused";
  std::size_t jobs = 1;
  auto* eval_causes = eval->add_subcommand("causes", "cause-word recall@k");
  eval_causes->add_option("--model", model_spec, "model file or bridge:CMD");
  eval_causes->add_option("--data", data_path, "EmoCause file (JSON Lines)")->required();
  eval_causes->add_option("--k", ks_list, "comma-separated k values")->capture_default_str();
  eval_causes->add_option("--baseline", baseline, "score a baseline instead (random)");
  eval_causes->add_option("--jobs", jobs, "worker threads")->capture_default_str();
  eval_causes->add_option("--csv", csv_path, "also write a CSV report");
  pf.add_scoring(eval_causes);

  auto* eval_cov = eval->add_subcommand("coverage", "cause-word coverage of generated responses");
  eval_cov->add_option("--speaker", speaker_spec, "base speaker model file or bridge:CMD");
  eval_cov->add_option("--gee", gee_spec, "emotion estimator model file or bridge:CMD");
  eval_cov->add_option("--data", data_path, "dialogue corpus (JSON Lines)")->required();
  eval_cov->add_option("--modes", modes_list, "comma-separated decoding modes")->capture_default_str();
  eval_cov->add_option("--pool", pool_path, "distractor pool for plain mode (default: --data)");
  eval_cov->add_option("--jobs", jobs, "worker threads")->capture_default_str();
  eval_cov->add_option("--csv", csv_path, "also write a CSV report");
  rf.add(eval_cov);
  pf.add_world(eval_cov);

  auto* eval_emo = eval->add_subcommand("emotion", "emotion classification accuracy");
  std::string acc_ks = "1,5";
  eval_emo->add_option("--model", model_spec, "model file or bridge:CMD");
  eval_emo->add_option("--data", data_path, "labelled corpus (JSON Lines)")->required();
  eval_emo->add_option("--k", acc_ks, "comma-separated top-k values")->capture_default_str();
  eval_emo->add_option("--jobs", jobs, "worker threads")->capture_default_str();
  eval_emo->add_option("--csv", csv_path, "also write a CSV report");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "coverage over a grid of alpha, beta, and k");
  std::string alphas = "4.0", betas = "0.9", sweep_ks = "5", sweep_modes = "focused";
  sweep->add_option("--speaker", speaker_spec, "base speaker model file or bridge:CMD");
  sweep->add_option("--gee", gee_spec, "emotion estimator model file or bridge:CMD");
  sweep->add_option("--data", data_path, "dialogue corpus (JSON Lines)")->required();
  sweep->add_option("--alpha", alphas, "comma-separated alpha values")->capture_default_str();
  sweep->add_option("--beta", betas, "comma-separated beta values")->capture_default_str();
  sweep->add_option("--k", sweep_ks, "comma-separated k values")->capture_default_str();
  sweep->add_option("--modes", sweep_modes, "comma-separated decoding modes")->capture_default_str();
  sweep->add_option("--pool", pool_path, "distractor pool for plain mode (default: --data)");
  sweep->add_option("--max-len", rf.max_len, "maximum response length")->capture_default_str();
  sweep->add_option("--n", pf.n, "least likely emotions conditioning distractors")->capture_default_str();
  sweep->add_option("--size", pf.size, "world size")->capture_default_str();
  sweep->add_option("--top-p", pf.top_p, "nucleus mass for replacement sampling")->capture_default_str();
  sweep->add_option("--retries", pf.retries, "replacement retries")->capture_default_str();
  sweep->add_option("--jobs", jobs, "worker threads")->capture_default_str();
  sweep->add_option("--csv", csv_path, "also write a CSV report");
  pf.add_scoring(sweep);

  // synth
  auto* synth = app.add_subcommand("synth", "write the synthetic benchmark");
  SynthConfig sc;
  std::string synth_dir;
  synth->add_option("--emotions", sc.emotions, "number of emotion labels")->capture_default_str();
  synth->add_option("--sentences", sc.sentences, "number of situations")->capture_default_str();
  synth->add_option("--seed", sc.seed, "random seed")->capture_default_str();
  synth->add_option("--out", synth_dir, "output directory")->required();

  // replay
  auto* replay = app.add_subcommand("replay", "re-run the command recorded in a manifest");
  std::string replay_path;
  replay->add_option("manifest", replay_path, "manifest file")->required();

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion& e) {
    out << kToolVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (*replay) {
      const Json m = Json::parse(read_file(replay_path));
      if (!m.contains("argv") || !m.at("argv").is_array()) {
        throw DataError(replay_path + ": manifest has no argv");
      }
      if (m.contains("inputs")) {
        for (const auto& [path, fp] : m.at("inputs").items()) {
          const std::string now = file_fingerprint(path);
          if (now != fp.get<std::string>()) {
            throw DataError(path + ": input changed since the manifest was written (" + now +
                            " != " + fp.get<std::string>() + ")");
          }
        }
      }
      Cli inner;
      return inner.run(m.at("argv").get<std::vector<std::string>>(), out, err);
    }

    if (*train) {
      manifest_.command = "train";
      manifest_.input(corpus_path);
      if (!catalog_list.empty()) ngram_opts.catalog = split(catalog_list, ',');
      ngram_opts.copy_weight = copy_weight;
      const auto corpus = read_corpus(corpus_path);
      const NGramModel model = train_ngram(corpus, ngram_opts);
      save_model(model, out_path);
      std::size_t words = 0, aliased = 0;
      for (TokenId id = 0; id < model.vocabulary().size(); ++id) {
        if (model.vocabulary().is_word(id)) ++words;
        if (model.vocabulary().is_aliased(id)) ++aliased;
      }
      manifest_.config = {{"order", ngram_opts.order},
                          {"discount", ngram_opts.discount},
                          {"min_count", ngram_opts.min_count},
                          {"copy_weight", copy_weight ? Json(*copy_weight) : Json("estimated")}};
      emit({{"model", out_path},
            {"examples", corpus.size()},
            {"labels", model.catalog()},
            {"vocabulary", model.vocabulary().size()},
            {"words", words},
            {"aliased", aliased},
            {"classes", model.tables().size()},
            {"copy_weight", model.copy_weight()},
            {"corpus_fingerprint", model.fingerprint()},
            {"model_fingerprint", file_fingerprint(out_path)}});
    } else if (*emotion) {
      manifest_.command = "emotion";
      const std::string spec = model_or_backend(model_spec, "--model");
      manifest_.input(spec);
      const AnyModel m = open_model(spec);
      const auto cat = catalog_of(m);
      const auto post = recognize_emotion(m, cat, tokenize(text));
      Json ranked = Json::array();
      for (std::size_t i = 0; i < std::min(top, post.sorted.size()); ++i) {
        const std::size_t e = post.sorted[i];
        ranked.push_back({{"label", post.labels[e]}, {"prob", post.distribution.prob(e)}});
      }
      manifest_.config = {{"top", top}};
      emit({{"text", tokenize(text).text()}, {"emotion", post.top_label()}, {"ranked", ranked}});
    } else if (*causes) {
      manifest_.command = "causes";
      const std::string spec = model_or_backend(model_spec, "--model");
      manifest_.input(spec);
      const AnyModel m = open_model(spec);
      const auto cfg = pf.config();
      const auto u = tokenize(text);
      const auto a = analyze_causes(m, catalog_of(m), u, cfg.k, cfg.filter, cfg.scoring);
      Json scores = Json::array();
      for (std::size_t t = 0; t < u.size(); ++t) {
        scores.push_back({{"word", u.words[t]},
                          {"score", a.scores.positions[t].score},
                          {"uninformative", a.scores.positions[t].uninformative}});
      }
      manifest_.config = pf.to_json();
      emit({{"text", u.text()},
            {"emotion", a.posterior.top_label()},
            {"contrast", a.scores.contrast},
            {"causes", selection_json(a)},
            {"scores", scores}});
    } else if (*world) {
      manifest_.command = "world";
      const std::string spec = model_or_backend(model_spec, "--model");
      manifest_.input(spec);
      const AnyModel m = open_model(spec);
      const auto cfg = pf.config();
      const auto u = tokenize(text);
      const auto a = analyze_causes(m, catalog_of(m), u, cfg.k, cfg.filter, cfg.scoring);
      const auto w = build_world(m, u, a.selection, a.posterior, cfg.sampling, cfg.seed);
      manifest_.config = pf.to_json();
      emit({{"text", u.text()},
            {"emotion", a.posterior.top_label()},
            {"least_likely", least_likely(a.posterior, cfg.sampling.n_negative_emotions)},
            {"causes", selection_json(a)},
            {"world", world_json(w)}});
    } else if (*generate) {
      manifest_.command = "generate";
      const std::string s_spec = model_or_backend(speaker_spec, "--speaker");
      const std::string g_spec = model_or_backend(gee_spec, "--gee");
      manifest_.input(s_spec);
      manifest_.input(g_spec);
      manifest_.input(pool_path);
      auto cfg = pf.config();
      cfg.rsa.alpha = rf.alpha;
      cfg.rsa.beta = rf.beta;
      cfg.rsa.max_length = rf.max_len;
      cfg.rsa.mode = parse_mode(mode_name);
      cfg.rsa.validate();
      std::vector<Utterance> pool;
      if (cfg.rsa.mode == DecodeMode::kPlain) {
        if (pool_path.empty()) throw UsageError("--mode plain needs --pool");
        pool = read_pool(pool_path);
      }
      const AnyModel speaker = open_model(s_spec);
      const AnyModel gee = g_spec == s_spec ? speaker : open_model(g_spec);
      const auto r =
          generate_response(speaker, gee, catalog_of(gee), tokenize(context), cfg, &pool);
      if (!trace_path.empty()) write_text(trace_path, trace_jsonl(r.decoded));
      manifest_.config = pf.to_json();
      manifest_.config["alpha"] = rf.alpha;
      manifest_.config["beta"] = rf.beta;
      manifest_.config["max_len"] = rf.max_len;
      manifest_.config["mode"] = to_string(cfg.rsa.mode);
      emit({{"context", tokenize(context).text()},
            {"mode", to_string(cfg.rsa.mode)},
            {"response", r.decoded.text.text()},
            {"finished", r.decoded.finished},
            {"emotion", r.analysis.posterior.top_label()},
            {"causes", selection_json(r.analysis)},
            {"coverage", coverage(r.decoded.text, r.analysis.selection)},
            {"world", world_json(r.world)}});
    } else if (*eval_causes) {
      manifest_.command = "eval causes";
      manifest_.input(data_path);
      const auto ks = parse_sizes(ks_list, "k");
      const std::size_t kmax = *std::max_element(ks.begin(), ks.end());
      const auto gold = read_emocause(data_path);
      if (gold.empty()) throw DataError(data_path + ": no examples");
      std::vector<std::vector<std::size_t>> preds;
      std::string method;
      if (baseline.empty()) {
        const std::string spec = model_or_backend(model_spec, "--model");
        manifest_.input(spec);
        const AnyModel m = open_model(spec);
        const auto cat = catalog_of(m);
        const auto cfg = pf.config();
        method = "gee";
        preds = parallel_map(gold.size(), jobs, [&](std::size_t i) {
          auto opts = cfg.scoring;
          opts.seed = cfg.scoring.seed + i;
          return analyze_causes(m, cat, Utterance::from_words(gold[i].tokens), kmax, cfg.filter,
                                opts)
              .selection.positions;
        });
      } else if (baseline == "random") {
        method = "random";
        for (std::size_t i = 0; i < gold.size(); ++i) {
          preds.push_back(random_baseline(gold[i], kmax, pf.seed + i));
        }
      } else {
        throw UsageError("unknown baseline '" + baseline + "' (expected random)");
      }
      const auto r = recall_at_k(preds, gold, ks);
      const auto expect = expected_random_recall(gold, ks);
      Json recall = Json::object(), rand = Json::object();
      std::vector<std::vector<std::string>> rows;
      for (std::size_t k : ks) {
        recall[std::to_string(k)] = r.per_k.at(k);
        rand[std::to_string(k)] = expect.per_k.at(k);
        rows.push_back({method, std::to_string(k), num(r.per_k.at(k)), num(expect.per_k.at(k))});
      }
      manifest_.config = pf.to_json();
      manifest_.config["ks"] = ks;
      manifest_.config["baseline"] = baseline;
      if (!csv_path.empty()) {
        write_text(csv_path, csv_of({"method", "k", "recall", "random_expectation"}, rows));
      }
      emit({{"method", method},
            {"examples", r.n_examples},
            {"skipped", r.n_skipped},
            {"recall", recall},
            {"random_expectation", rand}});
    } else if (*eval_cov || *sweep) {
      const bool is_sweep = sweep->parsed();
      manifest_.command = is_sweep ? "sweep" : "eval coverage";
      const std::string s_spec = model_or_backend(speaker_spec, "--speaker");
      const std::string g_spec = model_or_backend(gee_spec, "--gee");
      manifest_.input(s_spec);
      manifest_.input(g_spec);
      manifest_.input(data_path);
      manifest_.input(pool_path);
      const auto modes = parse_modes(is_sweep ? sweep_modes : modes_list);
      const auto a_grid = is_sweep ? parse_doubles(alphas, "alpha") : std::vector<double>{rf.alpha};
      const auto b_grid = is_sweep ? parse_doubles(betas, "beta") : std::vector<double>{rf.beta};
      const auto k_grid = is_sweep ? parse_sizes(sweep_ks, "k") : std::vector<std::size_t>{pf.k};
      const auto data = read_corpus(data_path);
      if (data.empty()) throw DataError(data_path + ": no examples");
      const auto pool = read_pool(pool_path.empty() ? data_path : pool_path);
      const AnyModel speaker = open_model(s_spec);
      const AnyModel gee = g_spec == s_spec ? speaker : open_model(g_spec);
      const auto cat = catalog_of(gee);

      Json rows = Json::array();
      std::vector<std::vector<std::string>> csv_rows;
      for (DecodeMode mode : modes) {
        for (double alpha : a_grid) {
          for (double beta : b_grid) {
            for (std::size_t k : k_grid) {
              auto cfg = pf.config();
              cfg.k = k;
              cfg.rsa.alpha = alpha;
              cfg.rsa.beta = beta;
              cfg.rsa.max_length = rf.max_len;
              cfg.rsa.mode = mode;
              cfg.rsa.validate();
              const auto counts = parallel_map(data.size(), jobs, [&](std::size_t i) {
                auto c = cfg;
                c.seed = cfg.seed + i;
                c.scoring.seed = cfg.scoring.seed + i;
                const auto r = generate_response(speaker, gee, cat, context_of(data[i]), c, &pool);
                return coverage(r.decoded.text, r.analysis.selection);
              });
              std::size_t total = 0;
              for (std::size_t c : counts) total += c;
              const double mean = static_cast<double>(total) / static_cast<double>(data.size());
              rows.push_back({{"mode", to_string(mode)},
                              {"alpha", alpha},
                              {"beta", beta},
                              {"k", k},
                              {"coverage", mean}});
              csv_rows.push_back({to_string(mode), num(alpha), num(beta), std::to_string(k), num(mean)});
            }
          }
        }
      }
      manifest_.config = pf.to_json();
      manifest_.config["max_len"] = rf.max_len;
      if (!csv_path.empty()) {
        write_text(csv_path, csv_of({"mode", "alpha", "beta", "k", "coverage"}, csv_rows));
      }
      if (is_sweep) {
        emit({{"examples", data.size()}, {"rows", rows}});
      } else {
        Json cov = Json::object();
        for (const auto& row : rows) cov[row["mode"].get<std::string>()] = row["coverage"];
        emit({{"examples", data.size()},
              {"alpha", rf.alpha},
              {"beta", rf.beta},
              {"k", pf.k},
              {"coverage", cov}});
      }
    } else if (*eval_emo) {
      manifest_.command = "eval emotion";
      const std::string spec = model_or_backend(model_spec, "--model");
      manifest_.input(spec);
      manifest_.input(data_path);
      const auto ks = parse_sizes(acc_ks, "k");
      const AnyModel m = open_model(spec);
      const auto data = read_corpus(data_path);
      const auto r = emotion_accuracy(m, catalog_of(m), data, ks, jobs);
      Json acc = Json::object();
      std::vector<std::vector<std::string>> rows;
      for (std::size_t k : ks) {
        acc[std::to_string(k)] = r.per_k.at(k);
        rows.push_back({std::to_string(k), num(r.per_k.at(k))});
      }
      manifest_.config = {{"ks", ks}};
      if (!csv_path.empty()) write_text(csv_path, csv_of({"k", "accuracy"}, rows));
      emit({{"examples", r.n_examples},
            {"labels", m.catalog().size()},
            {"chance_top1", 1.0 / static_cast<double>(m.catalog().size())},
            {"accuracy", acc}});
    } else if (*synth) {
      manifest_.command = "synth";
      const auto b = generate_synthetic(sc);
      std::filesystem::create_directories(synth_dir);
      const std::filesystem::path dir(synth_dir);
      const std::vector<std::pair<std::string, std::function<void(const std::string&)>>> files = {
          {"gee_train.jsonl", [&](const std::string& p) { write_corpus(p, b.gee_train); }},
          {"gee_test.jsonl", [&](const std::string& p) { write_corpus(p, b.gee_test); }},
          {"emocause_train.jsonl", [&](const std::string& p) { write_emocause(p, b.emocause_train); }},
          {"emocause_test.jsonl", [&](const std::string& p) { write_emocause(p, b.emocause_test); }},
          {"dialogue_train.jsonl", [&](const std::string& p) { write_corpus(p, b.dialogue_train); }},
          {"dialogue_test.jsonl", [&](const std::string& p) { write_corpus(p, b.dialogue_test); }},
      };
      Json written = Json::object();
      for (const auto& [name, write] : files) {
        const std::string p = (dir / name).string();
        write(p);
        written[name] = file_fingerprint(p);
      }
      manifest_.config = {{"emotions", sc.emotions}, {"sentences", sc.sentences}, {"seed", sc.seed}};
      emit({{"out", synth_dir},
            {"labels", b.labels},
            {"train", b.gee_train.size()},
            {"test", b.gee_test.size()},
            {"files", written}});
    }

    if (!manifest_path_.empty()) {
      // The manifest replays without itself.
      std::vector<std::string> argv;
      for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--manifest") {
          ++i;
          continue;
        }
        if (args[i].rfind("--manifest=", 0) == 0) continue;
        argv.push_back(args[i]);
      }
      manifest_.argv = argv;
      write_text(manifest_path_, manifest_.to_json().dump(2) + "\n");
    }
    return 0;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const DegenerateDistribution& e) {
    err << "error: degenerate model: " << e.what() << "\n";
    return 3;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  Cli cli;
  return cli.run(args, std::cout, std::cerr);
}
