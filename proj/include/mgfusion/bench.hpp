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

#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mgfusion/joint_decoder.hpp"
#include "mgfusion/keywords.hpp"
#include "mgfusion/phrase_fusion.hpp"
#include "mgfusion/scorers.hpp"

namespace mgf {

struct BenchConfig {
  std::vector<std::size_t> list_sizes{0, 50, 200, 1000};
  std::size_t repetitions = 3;
  std::size_t utterances = 8;
  double nominal_duration_s = 5.0;  // declared audio length per synthetic utterance
  std::uint64_t seed = 1;
  DecodeConfig decode{4, 32, 1, false};
  std::size_t acoustic_hidden = 16;
  std::size_t language_hidden = 16;
  std::size_t embed = 32;
  std::size_t repr = 32;

  void validate() const {
    if (list_sizes.empty()) fail(Errc::InvalidConfig, "no list sizes");
    for (std::size_t i = 1; i < list_sizes.size(); ++i)
      if (list_sizes[i] <= list_sizes[i - 1]) fail(Errc::InvalidConfig, "list sizes must be strictly increasing");
    if (repetitions < 1 || utterances < 1) fail(Errc::InvalidConfig, "repetitions and utterances must be >= 1");
    if (!(nominal_duration_s > 0.0)) fail(Errc::InvalidConfig, "nominal duration must be positive");
    decode.validate();
  }
};

struct BenchRow {
  std::size_t list_size = 0;
  std::vector<double> rtf;  // one per repetition
  double rtf_min = 0.0;
  double rtf_median = 0.0;
};

inline constexpr std::string_view kBenchAlphabet = "abcdefghijklmnopqrstuvwxyz ";

/// `count` distinct lowercase keywords of one or two words, seeded.
inline std::vector<std::string> synthetic_keywords(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto word = [&rng] {
    const std::size_t len = 3 + rng() % 6;
    std::string w;
    for (std::size_t i = 0; i < len; ++i) w += static_cast<char>('a' + rng() % 26);
    return w;
  };
  std::set<std::string> seen;
  std::vector<std::string> out;
  while (out.size() < count) {
    std::string k = word();
    if (rng() % 3 == 0) k += " " + word();
    if (seen.insert(k).second) out.push_back(std::move(k));
  }
  return out;
}

/// Real-time factor of synthetic decoding per keyword-list size. Each timed
/// utterance covers list construction, prompt rendering, keyword encoding and
/// beam search; RTF = wall time / declared audio duration.
inline std::vector<BenchRow> run_bench(const BenchConfig& cfg) {
  cfg.validate();
  const Vocabulary vocab = Vocabulary::from_characters(kBenchAlphabet);
  const Tokenizer tokenizer(vocab);
  const std::size_t largest = cfg.list_sizes.back();
  const auto pool = synthetic_keywords(largest, cfg.seed);
  const EncoderWeights weights = EncoderWeights::random_uniform(
      {vocab.size(), cfg.embed, cfg.repr, cfg.language_hidden, cfg.acoustic_hidden}, cfg.seed);

  std::vector<BenchRow> rows;
  for (std::size_t size : cfg.list_sizes) {
    BenchRow row;
    row.list_size = size;
    const std::vector<std::string> surfaces(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(size));
    for (std::size_t rep = 0; rep < cfg.repetitions; ++rep) {
      const auto t0 = std::chrono::steady_clock::now();
      for (std::size_t u = 0; u < cfg.utterances; ++u) {
        const KeywordList list = build_keyword_list(surfaces, tokenizer);
        const ContextPrompt prompt = render_prompt(list);
        auto acoustic = open_synthetic(cfg.seed + 1000 + u, {vocab.size(), cfg.acoustic_hidden}, ScorerKind::Acoustic);
        auto language = open_synthetic(cfg.seed + 2000 + u, {vocab.size(), cfg.language_hidden}, ScorerKind::Language,
                                       prompt.rendered);
        const auto nbest = beam_search(*acoustic, *language, weights, list, cfg.decode, vocab.eos_id());
        if (nbest.empty()) fail(Errc::InvariantViolation, "bench decode returned nothing");
      }
      const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - t0;
      row.rtf.push_back(elapsed.count() / (cfg.nominal_duration_s * static_cast<double>(cfg.utterances)));
    }
    std::vector<double> sorted = row.rtf;
    std::sort(sorted.begin(), sorted.end());
    row.rtf_min = sorted.front();
    row.rtf_median = sorted[sorted.size() / 2];
    rows.push_back(std::move(row));
  }
  return rows;
}

inline nlohmann::json bench_to_json(const std::vector<BenchRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows)
    out.push_back({{"list_size", r.list_size}, {"rtf", r.rtf}, {"rtf_min", r.rtf_min}, {"rtf_median", r.rtf_median}});
  return out;
}

}  // namespace mgf
