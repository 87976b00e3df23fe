// Copyright (c) 2026 The mgfusion Authors
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

// mgf: decode, evaluate, label, synthesize replay fixtures and benchmark.

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mgfusion/mgfusion.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

// JSON config files: top-level objects name subcommands, their members name
// long options without the leading dashes.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App* app, bool default_also, bool, std::string) const override {
    json j;
    for (const CLI::Option* opt : app->get_options()) {
      if (opt->get_lnames().empty() || !opt->get_configurable()) continue;
      const std::string name = opt->get_lnames().front();
      if (opt->count() > 0) {
        const auto& res = opt->results();
        j[name] = res.size() == 1 ? json(res.front()) : json(res);
      } else if (default_also && !opt->get_default_str().empty()) {
        j[name] = opt->get_default_str();
      }
    }
    return j.dump(2);
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    json j;
    try {
      j = json::parse(input);
    } catch (const json::exception& e) {
      throw CLI::ConversionError("config is not valid JSON: " + std::string(e.what()));
    }
    if (!j.is_object()) throw CLI::ConversionError("config root must be a JSON object");
    std::vector<CLI::ConfigItem> items;
    collect(j, {}, items);
    return items;
  }

 private:
  static std::string scalar(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    return v.dump();
  }

  static void collect(const json& obj, const std::vector<std::string>& parents, std::vector<CLI::ConfigItem>& out) {
    for (const auto& [key, value] : obj.items()) {
      if (value.is_object()) {
        auto next = parents;
        next.push_back(key);
        collect(value, next, out);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(scalar(v));
      } else {
        item.inputs.push_back(scalar(value));
      }
      out.push_back(std::move(item));
    }
  }
};

struct UtteranceError : std::runtime_error {
  UtteranceError(std::string id, const mgf::Error& e)
      : std::runtime_error(e.what()), utterance(std::move(id)), code(e.code()) {}
  std::string utterance;
  mgf::Errc code;
};

void report_error(mgf::Errc code, const std::string& message, const std::string& utterance = {}) {
  json j = {{"error", std::string(mgf::errc_name(code))}, {"message", message}};
  if (!utterance.empty()) j["utterance"] = utterance;
  std::cerr << j.dump() << "\n";
}

int exit_code_for(mgf::Errc code) {
  if (code == mgf::Errc::InvalidConfig) return kExitUsage;
  if (code == mgf::Errc::InvariantViolation) return kExitInternal;
  return kExitData;
}

std::size_t default_jobs() {
  if (const char* env = std::getenv("MGF_JOBS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
  }
  return 1;
}

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. The first exception by
/// index is rethrown after all workers finish.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t jobs, Fn&& fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(jobs, n));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_.open(path, std::ios::binary | std::ios::trunc);
    if (!file_) mgf::fail(mgf::Errc::IoError, "cannot write " + path);
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

std::string resolve(const std::string& path, const fs::path& base) {
  const fs::path p(path);
  return p.is_absolute() || base.empty() ? path : (base / p).string();
}

void require_file(const std::string& path, const std::string& what) {
  if (!fs::is_regular_file(path)) mgf::fail(mgf::Errc::IoError, what + " not found: " + path);
}

struct VocabOptions {
  std::string vocab_path;
  std::string alphabet{mgf::kBenchAlphabet};

  void add(CLI::App* cmd) {
    cmd->add_option("--vocab", vocab_path, "vocabulary JSON ({\"tokens\": [...], \"eos_id\": n})");
    cmd->add_option("--alphabet", alphabet, "characters of the default character vocabulary (used without --vocab)")
        ->capture_default_str();
  }

  mgf::Vocabulary load() const {
    if (!vocab_path.empty()) {
      require_file(vocab_path, "vocabulary");
      return mgf::Vocabulary::load(vocab_path);
    }
    return mgf::Vocabulary::from_characters(alphabet);
  }
};

struct WeightOptions {
  std::string path;
  std::uint64_t seed = 1;
  std::size_t embed = 32;
  std::size_t repr = 32;

  void add(CLI::App* cmd) {
    cmd->add_option("--weights", path, "phrase encoder weights (MGFW)");
    cmd->add_option("--weights-seed", seed, "seed for random encoder weights when --weights is absent")
        ->capture_default_str();
    cmd->add_option("--embed-dim", embed, "embedding width of random weights")->capture_default_str();
    cmd->add_option("--repr-dim", repr, "keyword representation width of random weights")->capture_default_str();
  }
};

/// Encoder weights per (language hidden, acoustic hidden) pair. A weight file
/// is used as is; otherwise seeded random weights are built for each pair.
class WeightCache {
 public:
  WeightCache(const WeightOptions& opt, std::size_t vocab) : opt_(opt), vocab_(vocab) {
    if (!opt.path.empty()) {
      require_file(opt.path, "weights");
      fixed_ = std::make_shared<const mgf::EncoderWeights>(mgf::EncoderWeights::load(opt.path));
    }
  }

  std::shared_ptr<const mgf::EncoderWeights> get(std::size_t d_l, std::size_t d_a) {
    if (fixed_) {
      fixed_->require_compatible(vocab_, d_l, d_a);
      return fixed_;
    }
    auto& slot = cache_[{d_l, d_a}];
    if (!slot)
      slot = std::make_shared<const mgf::EncoderWeights>(
          mgf::EncoderWeights::random_uniform({vocab_, opt_.embed, opt_.repr, d_l, d_a}, opt_.seed));
    return slot;
  }

 private:
  const WeightOptions& opt_;
  std::size_t vocab_;
  std::shared_ptr<const mgf::EncoderWeights> fixed_;
  std::map<std::pair<std::size_t, std::size_t>, std::shared_ptr<const mgf::EncoderWeights>> cache_;
};

std::vector<std::string> keyword_surfaces(const mgf::Utterance& u, const std::string& global, const fs::path& base) {
  if (u.keywords_path) {
    const auto path = resolve(*u.keywords_path, base);
    require_file(path, "keyword file");
    return mgf::read_keyword_file(path);
  }
  if (!global.empty()) return mgf::read_keyword_file(global);
  return {};
}

std::unique_ptr<mgf::ScorerSession> open_source(const mgf::ScorerSource& src, mgf::ScorerKind kind,
                                                const mgf::Vocabulary& vocab, std::size_t hidden,
                                                const std::string& context, const fs::path& base) {
  if (src.is_synthetic()) return mgf::open_synthetic(*src.synthetic_seed, {vocab.size(), hidden}, kind, context);
  const auto path = resolve(src.replay_path, base);
  require_file(path, "replay file");
  return mgf::open_replay(path, vocab);
}

/// Everything needed to score one utterance, prepared serially.
struct Prepared {
  const mgf::Utterance* utt = nullptr;
  mgf::KeywordList list;
  std::unique_ptr<mgf::ScorerSession> acoustic, language;
  std::shared_ptr<const mgf::EncoderWeights> weights;
};

struct ScorerOptions {
  std::size_t hidden = 16;
  std::string keywords;
  void add(CLI::App* cmd) {
    cmd->add_option("--hidden-dim", hidden, "hidden width of synthetic scorers")->capture_default_str();
    cmd->add_option("--keywords", keywords, "keyword file for utterances without their own");
  }
};

std::vector<Prepared> prepare(const std::vector<mgf::Utterance>& manifest, const fs::path& base,
                              const mgf::Vocabulary& vocab, const ScorerOptions& so, WeightCache& weights) {
  const mgf::Tokenizer tokenizer(vocab);
  if (!so.keywords.empty()) require_file(so.keywords, "keyword file");
  std::vector<Prepared> out;
  for (const auto& u : manifest) {
    try {
      Prepared p;
      p.utt = &u;
      const auto surfaces = keyword_surfaces(u, so.keywords, base);
      p.list = mgf::build_keyword_list(surfaces, tokenizer);
      const auto prompt = mgf::render_prompt(p.list);
      p.acoustic = open_source(u.acoustic, mgf::ScorerKind::Acoustic, vocab, so.hidden, {}, base);
      p.language = open_source(u.language, mgf::ScorerKind::Language, vocab, so.hidden, prompt.rendered, base);
      p.weights = weights.get(p.language->dims().hidden, p.acoustic->dims().hidden);
      out.push_back(std::move(p));
    } catch (const mgf::Error& e) {
      throw UtteranceError(u.id, e);
    }
  }
  return out;
}

std::vector<mgf::Utterance> load_manifest_checked(const std::string& path) {
  require_file(path, "manifest");
  return mgf::load_manifest(path);
}

// ---------------------------------------------------------------- decode

struct DecodeCmd {
  std::string manifest, output = "-";
  VocabOptions vocab;
  WeightOptions weights;
  ScorerOptions scorers;
  mgf::DecodeConfig decode;
  bool retire = false;
  std::size_t jobs = default_jobs();

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("decode", "beam-search decode every utterance of a manifest");
    cmd->add_option("--manifest", manifest, "utterance manifest (JSON Lines)")->required();
    cmd->add_option("-o,--output", output, "JSONL output, - for stdout")->capture_default_str();
    vocab.add(cmd);
    weights.add(cmd);
    scorers.add(cmd);
    cmd->add_option("--beam", decode.beam_width, "beam width")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--max-len", decode.max_len, "token cap per hypothesis")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    cmd->add_option("--nbest", decode.n_best, "hypotheses per utterance")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    cmd->add_flag("--retire-unscorable", retire,
                  "retire hypotheses that leave a replay file's recorded path instead of failing");
    cmd->add_option("-j,--jobs", jobs, "parallel utterances (default from MGF_JOBS)")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    cmd->callback([this] { run(); });
  }

  void run() {
    decode.retire_unscorable = retire;
    decode.validate();
    const auto utts = load_manifest_checked(manifest);
    const fs::path base = fs::path(manifest).parent_path();
    const mgf::Vocabulary v = vocab.load();
    const mgf::Tokenizer tokenizer(v);
    WeightCache cache(weights, v.size());
    auto prepared = prepare(utts, base, v, scorers, cache);

    std::vector<std::string> lines(prepared.size());
    parallel_for(prepared.size(), jobs, [&](std::size_t i) {
      const auto& p = prepared[i];
      try {
        const auto nbest = mgf::beam_search(*p.acoustic, *p.language, *p.weights, p.list, decode, v.eos_id());
        for (const auto& h : nbest)
          if (!mgf::copy_spans_intact(h, p.list))
            mgf::fail(mgf::Errc::InvariantViolation, "copy span does not match its keyword");
        lines[i] = mgf::decode_record(p.utt->id, nbest, tokenizer).dump();
      } catch (const mgf::Error& e) {
        throw UtteranceError(p.utt->id, e);
      }
    });
    Output out(output);
    for (const auto& line : lines) out.stream() << line << "\n";
  }
};

// ---------------------------------------------------------------- eval

struct EvalCmd {
  std::string manifest, hyp, keywords, output = "-", tsv;
  std::string language = "en", unit;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("eval", "score hypotheses against manifest references");
    cmd->add_option("--manifest", manifest, "manifest holding references")->required();
    cmd->add_option("--hyp", hyp, "decode output (JSONL with nbest or text)")->required();
    cmd->add_option("--keywords", keywords, "keyword file for utterances without their own");
    cmd->add_option("--language", language, "normalization rules: en or zh")
        ->capture_default_str()
        ->check(CLI::IsMember({"en", "zh"}));
    cmd->add_option("--unit", unit, "error unit: word or char (default: word for en, char for zh)")
        ->check(CLI::IsMember({"word", "char"}));
    cmd->add_option("-o,--output", output, "report JSON, - for stdout")->capture_default_str();
    cmd->add_option("--tsv", tsv, "per-utterance table");
    cmd->callback([this] { run(); });
  }

  static std::map<std::string, std::string> load_hypotheses(const std::string& path) {
    require_file(path, "hypothesis file");
    std::ifstream in(path);
    std::map<std::string, std::string> out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
      ++n;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        const auto j = json::parse(line);
        const auto id = j.at("id").get<std::string>();
        std::string text;
        if (j.contains("nbest")) {
          if (!j["nbest"].empty()) text = j["nbest"][0].at("text").get<std::string>();
        } else {
          text = j.at("text").get<std::string>();
        }
        if (!out.emplace(id, text).second)
          mgf::fail(mgf::Errc::ParseError, path + ":" + std::to_string(n) + ": duplicate id '" + id + "'");
      } catch (const json::exception& e) {
        mgf::fail(mgf::Errc::ParseError, path + ":" + std::to_string(n) + ": " + e.what());
      }
    }
    return out;
  }

  void run() {
    const auto utts = load_manifest_checked(manifest);
    const fs::path base = fs::path(manifest).parent_path();
    if (!keywords.empty()) require_file(keywords, "keyword file");
    const auto hyps = load_hypotheses(hyp);
    const auto lang = mgf::parse_language(language);
    const auto u = unit.empty() ? mgf::default_unit(lang) : mgf::parse_unit(unit);

    std::vector<mgf::BiasedReport> reports;
    std::vector<std::string> ids;
    std::size_t missing_reference = 0, missing_hypothesis = 0;
    for (const auto& utt : utts) {
      const auto h = hyps.find(utt.id);
      if (h == hyps.end()) {
        ++missing_hypothesis;
        continue;
      }
      if (!utt.reference) {
        ++missing_reference;
        report_error(mgf::Errc::MissingReference, "no reference; skipped", utt.id);
        continue;
      }
      try {
        std::vector<std::string> surfaces;
        for (const auto& s : keyword_surfaces(utt, keywords, base)) {
          auto n = mgf::normalize(s, lang);
          if (!n.empty()) surfaces.push_back(std::move(n));
        }
        reports.push_back(
            mgf::biased_report(mgf::normalize(*utt.reference, lang), mgf::normalize(h->second, lang), surfaces, u));
        ids.push_back(utt.id);
      } catch (const mgf::Error& e) {
        throw UtteranceError(utt.id, e);
      }
    }
    if (reports.empty()) mgf::fail(mgf::Errc::EmptyEvaluation, "no utterance has both a reference and a hypothesis");

    json report = mgf::aggregate(reports).to_json();
    report["utterances"] = reports.size();
    report["missing_reference"] = missing_reference;
    report["missing_hypothesis"] = missing_hypothesis;
    report["language"] = language;
    Output out(output);
    out.stream() << report.dump(2) << "\n";

    if (!tsv.empty()) {
      Output table(tsv);
      auto fmt = [](const std::optional<double>& v) {
        if (!v) return std::string("NA");
        std::ostringstream s;
        s.precision(6);
        s << *v;
        return s.str();
      };
      table.stream() << "id\tref_units\terrors\toverall\tbiased\tunbiased\trecall\n";
      for (std::size_t i = 0; i < reports.size(); ++i) {
        const auto& r = reports[i];
        table.stream() << ids[i] << '\t' << r.counts.ref_units << '\t' << r.counts.errors() << '\t'
                       << fmt(r.overall) << '\t' << fmt(r.biased) << '\t' << fmt(r.unbiased) << '\t'
                       << fmt(r.recall) << '\n';
      }
    }
  }
};

// ---------------------------------------------------------------- label

struct LabelCmd {
  std::string manifest, output = "-";
  VocabOptions vocab;
  WeightOptions weights;
  ScorerOptions scorers;
  bool with_loss = false;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("label", "phrase labels (and optionally forced-path losses) for references");
    cmd->add_option("--manifest", manifest, "manifest holding references")->required();
    cmd->add_option("-o,--output", output, "JSONL output, - for stdout")->capture_default_str();
    vocab.add(cmd);
    weights.add(cmd);
    scorers.add(cmd);
    cmd->add_flag("--loss", with_loss, "also teacher-force the reference through the scorers and report losses");
    cmd->callback([this] { run(); });
  }

  void run() {
    const auto utts = load_manifest_checked(manifest);
    const fs::path base = fs::path(manifest).parent_path();
    const mgf::Vocabulary v = vocab.load();
    const mgf::Tokenizer tokenizer(v);
    if (!scorers.keywords.empty()) require_file(scorers.keywords, "keyword file");
    WeightCache cache(weights, v.size());
    std::vector<Prepared> prepared;
    if (with_loss) prepared = prepare(utts, base, v, scorers, cache);

    Output out(output);
    for (std::size_t i = 0; i < utts.size(); ++i) {
      const auto& u = utts[i];
      if (!u.reference) {
        report_error(mgf::Errc::MissingReference, "no reference; skipped", u.id);
        continue;
      }
      try {
        const auto list = with_loss ? std::move(prepared[i].list)
                                    : mgf::build_keyword_list(keyword_surfaces(u, scorers.keywords, base), tokenizer);
        auto tokens = tokenizer.tokenize(*u.reference);
        tokens.push_back(v.eos_id());
        const auto labels = mgf::max_match_labels(tokens, list);
        json rec = {{"id", u.id}, {"tokens", tokens}, {"labels", labels.labels}, {"mask", labels.mask}};
        if (with_loss) {
          const auto& p = prepared[i];
          const auto loss = mgf::forced_path_loss(*p.acoustic, *p.language, *p.weights, list, tokens);
          rec["loss_tok"] = loss.loss_tok;
          rec["loss_phr"] = loss.loss_phr;
          rec["loss"] = loss.total;
        }
        out.stream() << rec.dump() << "\n";
      } catch (const mgf::Error& e) {
        throw UtteranceError(u.id, e);
      }
    }
  }
};

// ---------------------------------------------------------------- synth

struct SynthCmd {
  std::string output, text, path_spec, kind = "acoustic", context, keywords, weights_out, vocab_out;
  VocabOptions vocab;
  std::uint64_t seed = 1;
  std::size_t hidden = 16;
  WeightOptions weights;
  std::size_t acoustic_dim = 16, language_dim = 16;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("synth", "record a synthetic scorer along a forced path into a replay file");
    cmd->add_option("-o,--output", output, "replay file to write (MGFR)")->required();
    auto* t = cmd->add_option("--text", text, "forced path as text; eos is appended");
    auto* p = cmd->add_option("--path", path_spec, "forced path as comma-separated token ids");
    t->excludes(p);
    vocab.add(cmd);
    cmd->add_option("--seed", seed, "synthetic scorer seed")->capture_default_str();
    cmd->add_option("--kind", kind, "acoustic or language")
        ->capture_default_str()
        ->check(CLI::IsMember({"acoustic", "language"}));
    cmd->add_option("--hidden-dim", hidden, "hidden width")->capture_default_str();
    auto* ctx = cmd->add_option("--context", context, "prompt text for a language scorer");
    cmd->add_option("--keywords", keywords, "keyword file rendered into the prompt of a language scorer")
        ->excludes(ctx);
    cmd->add_option("--vocab-out", vocab_out, "also write the vocabulary JSON");
    cmd->add_option("--weights-out", weights_out, "also write seeded random encoder weights (MGFW)");
    cmd->add_option("--weights-seed", weights.seed, "seed for --weights-out")->capture_default_str();
    cmd->add_option("--embed-dim", weights.embed, "embedding width for --weights-out")->capture_default_str();
    cmd->add_option("--repr-dim", weights.repr, "representation width for --weights-out")->capture_default_str();
    cmd->add_option("--acoustic-dim", acoustic_dim, "acoustic hidden width for --weights-out")->capture_default_str();
    cmd->add_option("--language-dim", language_dim, "language hidden width for --weights-out")->capture_default_str();
    cmd->callback([this] { run(); });
  }

  void run() {
    const mgf::Vocabulary v = vocab.load();
    const mgf::Tokenizer tokenizer(v);
    std::vector<mgf::TokenId> path;
    if (!path_spec.empty()) {
      std::stringstream ss(path_spec);
      std::string item;
      while (std::getline(ss, item, ',')) {
        try {
          std::size_t used = 0;
          const unsigned long id = std::stoul(item, &used);
          if (used != item.size()) throw std::invalid_argument(item);
          path.push_back(static_cast<mgf::TokenId>(id));
        } catch (const std::exception&) {
          mgf::fail(mgf::Errc::InvalidConfig, "bad token id '" + item + "' in --path");
        }
      }
    } else {
      path = tokenizer.tokenize(text);
      path.push_back(v.eos_id());
    }
    const auto k = mgf::parse_scorer_kind(kind);
    std::string prompt = context;
    json meta = {{"source", "synthetic:" + std::to_string(seed)}};
    if (!keywords.empty()) {
      require_file(keywords, "keyword file");
      prompt = mgf::render_prompt(mgf::build_keyword_list(mgf::read_keyword_file(keywords), tokenizer)).rendered;
    }
    if (!prompt.empty()) meta["context"] = prompt;
    auto session = mgf::open_synthetic(seed, {v.size(), hidden}, k, prompt);
    mgf::record_replay(*session, path, v, meta).save(output);
    if (!vocab_out.empty()) {
      Output vout(vocab_out);
      vout.stream() << v.to_json().dump() << "\n";
    }
    if (!weights_out.empty()) {
      auto w = mgf::EncoderWeights::random_uniform({v.size(), weights.embed, weights.repr, language_dim, acoustic_dim},
                                                   weights.seed);
      w.save(weights_out);
    }
  }
};

// ---------------------------------------------------------------- bench

struct BenchCmd {
  mgf::BenchConfig cfg;
  std::string output = "-";

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("bench", "real-time factor against keyword-list size with synthetic scorers");
    cmd->add_option("--sizes", cfg.list_sizes, "keyword-list sizes, strictly increasing")
        ->delimiter(',')
        ->capture_default_str();
    cmd->add_option("--repetitions", cfg.repetitions, "timed repetitions per size")->capture_default_str();
    cmd->add_option("--utterances", cfg.utterances, "utterances per repetition")->capture_default_str();
    cmd->add_option("--duration", cfg.nominal_duration_s, "declared audio seconds per utterance")
        ->capture_default_str();
    cmd->add_option("--seed", cfg.seed, "seed for keywords, scorers and weights")->capture_default_str();
    cmd->add_option("--beam", cfg.decode.beam_width, "beam width")->capture_default_str();
    cmd->add_option("--max-len", cfg.decode.max_len, "token cap per hypothesis")->capture_default_str();
    cmd->add_option("-o,--output", output, "JSON output, - for stdout")->capture_default_str();
    cmd->callback([this] { run(); });
  }

  void run() {
    const auto rows = mgf::run_bench(cfg);
    json out = {{"rows", mgf::bench_to_json(rows)},
                {"duration_s", cfg.nominal_duration_s},
                {"utterances", cfg.utterances},
                {"beam", cfg.decode.beam_width},
                {"max_len", cfg.decode.max_len}};
    Output o(output);
    o.stream() << out.dump(2) << "\n";
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mgf: contextual keyword fusion decoding and evaluation"};
  app.require_subcommand(1);
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON config; command-line flags take precedence");

  DecodeCmd decode;
  EvalCmd eval;
  LabelCmd label;
  SynthCmd synth;
  BenchCmd bench;
  decode.add(app);
  eval.add(app);
  label.add(app);
  synth.add(app);
  bench.add(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  } catch (const UtteranceError& e) {
    report_error(e.code, e.what(), e.utterance);
    return exit_code_for(e.code);
  } catch (const mgf::Error& e) {
    report_error(e.code(), e.what());
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    report_error(mgf::Errc::InvariantViolation, e.what());
    return kExitInternal;
  }
  return kExitOk;
}
