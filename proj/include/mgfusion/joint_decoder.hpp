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

// Decoding over the unified outcome space Z = V u {k_1..k_N}:
//
//   p(z = v)   = p_phr(k_0) * p_tok(v)      for tokens
//   p(z = k_i) = p_phr(k_i)                 for keywords, i >= 1
//
// A keyword outcome emits the keyword's whole token sequence as one event and
// contributes a single log-probability term.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "mgfusion/error.hpp"
#include "mgfusion/keywords.hpp"
#include "mgfusion/numeric.hpp"
#include "mgfusion/phrase_fusion.hpp"
#include "mgfusion/scorers.hpp"
#include "mgfusion/token_fusion.hpp"

namespace mgf {

struct JointDistribution {
  Vec token_part;   // V
  Vec phrase_part;  // N, entry i-1 is keyword i

  double mass() const {
    double s = 0.0;
    for (double v : token_part) s += v;
    for (double v : phrase_part) s += v;
    return s;
  }
};

inline JointDistribution joint_step(std::span<const double> token_probs, std::span<const double> phrase_probs) {
  require_distribution(token_probs, 1e-6, "token probabilities");
  if (phrase_probs.empty()) fail(Errc::NotADistribution, "phrase probabilities need the fake keyword slot");
  require_distribution(phrase_probs, 1e-6, "phrase probabilities");
  JointDistribution d;
  const double prior = phrase_probs[0];
  d.token_part.resize(token_probs.size());
  for (std::size_t i = 0; i < token_probs.size(); ++i) d.token_part[i] = prior * token_probs[i];
  d.phrase_part.assign(phrase_probs.begin() + 1, phrase_probs.end());
  return d;
}

enum class EventKind { Token, Copy };

struct Event {
  std::size_t position = 0;  // index in Hypothesis::tokens where the event starts
  EventKind kind = EventKind::Token;
  TokenId token = 0;         // Token events
  std::size_t keyword = 0;   // Copy events, 1-based

  friend bool operator==(const Event&, const Event&) = default;
};

struct Hypothesis {
  std::vector<TokenId> tokens;
  double log_score = 0.0;
  std::vector<Event> events;
  bool finished = false;   // emitted eos
  bool truncated = false;  // stopped without eos (length cap or unscorable prefix)

  bool live() const noexcept { return !finished && !truncated; }
};

/// A single outcome of Z: a token id or a 1-based keyword index.
struct Choice {
  EventKind kind = EventKind::Token;
  std::size_t index = 0;

  static Choice token(TokenId id) { return {EventKind::Token, id}; }
  static Choice keyword(std::size_t i) { return {EventKind::Copy, i}; }
};

inline Hypothesis expand(const Hypothesis& hyp, Choice choice, const JointDistribution& dist,
                         const KeywordList& list, TokenId eos_id) {
  if (hyp.finished) fail(Errc::AlreadyFinished, "cannot expand a finished hypothesis");
  double p = 0.0;
  if (choice.kind == EventKind::Token) {
    if (choice.index >= dist.token_part.size()) fail(Errc::TokenOutOfRange, "token " + std::to_string(choice.index));
    p = dist.token_part[choice.index];
  } else {
    if (choice.index < 1 || choice.index > dist.phrase_part.size())
      fail(Errc::ZeroProbabilityChoice, "keyword index " + std::to_string(choice.index) + " out of range");
    p = dist.phrase_part[choice.index - 1];
  }
  if (!(p > 0.0)) fail(Errc::ZeroProbabilityChoice, "choice has probability 0");

  Hypothesis out = hyp;
  Event ev;
  ev.position = hyp.tokens.size();
  ev.kind = choice.kind;
  if (choice.kind == EventKind::Token) {
    ev.token = static_cast<TokenId>(choice.index);
    out.tokens.push_back(ev.token);
    if (ev.token == eos_id) out.finished = true;
  } else {
    ev.keyword = choice.index;
    const auto& ids = list[choice.index].token_ids;
    out.tokens.insert(out.tokens.end(), ids.begin(), ids.end());
  }
  out.events.push_back(ev);
  out.log_score = hyp.log_score + std::log(p);
  return out;
}

/// True when every copy event's span equals its keyword's token sequence and
/// events tile the token sequence without gaps.
inline bool copy_spans_intact(const Hypothesis& hyp, const KeywordList& list) {
  std::size_t pos = 0;
  for (const auto& ev : hyp.events) {
    if (ev.position != pos) return false;
    if (ev.kind == EventKind::Token) {
      if (pos >= hyp.tokens.size() || hyp.tokens[pos] != ev.token) return false;
      ++pos;
    } else {
      if (ev.keyword < 1 || ev.keyword > list.size()) return false;
      const auto& ids = list[ev.keyword].token_ids;
      if (pos + ids.size() > hyp.tokens.size()) return false;
      if (!std::equal(ids.begin(), ids.end(), hyp.tokens.begin() + static_cast<std::ptrdiff_t>(pos))) return false;
      pos += ids.size();
    }
  }
  return pos == hyp.tokens.size();
}

struct DecodeConfig {
  std::size_t beam_width = 4;
  std::size_t max_len = 128;
  std::size_t n_best = 1;
  /// Hypotheses whose scorers cannot score their prefix (a replay session
  /// that left its recorded path or ran out of records) are retired as
  /// truncated instead of aborting the search.
  bool retire_unscorable = false;

  void validate() const {
    if (beam_width < 1) fail(Errc::InvalidConfig, "beam width must be >= 1");
    if (max_len < 1) fail(Errc::InvalidConfig, "max_len must be >= 1");
    if (n_best < 1 || n_best > beam_width) fail(Errc::InvalidConfig, "n_best must be in [1, beam_width]");
  }
};

/// Ordering used everywhere hypotheses are ranked: higher score, then fewer
/// events, then the lexicographically smaller outcome sequence (tokens index
/// Z by id, keyword i by V + i - 1).
struct RankKey {
  double score;
  std::size_t event_count;
  const std::vector<std::uint32_t>* outcomes;
  std::uint32_t last;  // appended outcome, or UINT32_MAX when none

  std::uint32_t at(std::size_t i) const {
    return i < outcomes->size() ? (*outcomes)[i] : last;
  }
  std::size_t length() const { return outcomes->size() + (last == UINT32_MAX ? 0 : 1); }

  friend bool ranks_before(const RankKey& a, const RankKey& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.event_count != b.event_count) return a.event_count < b.event_count;
    const std::size_t n = std::min(a.length(), b.length());
    for (std::size_t i = 0; i < n; ++i) {
      const auto x = a.at(i), y = b.at(i);
      if (x != y) return x < y;
    }
    return a.length() < b.length();
  }
};

namespace detail {

struct BeamEntry {
  Hypothesis hyp;
  std::vector<std::uint32_t> outcomes;
  std::unique_ptr<ScorerSession> acoustic;
  std::unique_ptr<ScorerSession> language;

  RankKey key() const { return {hyp.log_score, hyp.events.size(), &outcomes, UINT32_MAX}; }
};

struct Candidate {
  std::size_t parent;
  Choice choice;
  std::uint32_t outcome;
  double score;
};

inline bool is_unscorable(const Error& e) {
  return e.code() == Errc::ReplayPathDiverged || e.code() == Errc::ReplayExhausted;
}

}  // namespace detail

/// Per-step distribution for one hypothesis: fused token probabilities,
/// phrase probabilities from both hidden states, then joint normalization.
inline JointDistribution score_step(const ScorerSession& acoustic, const ScorerSession& language,
                                    const EncoderWeights& weights, const PhraseTable& table) {
  const StepScores a = acoustic.step();
  const StepScores l = language.step();
  const FusedTokenStep fused = fuse_logits(a.logits, l.logits);
  const PhraseStep phrase = phrase_probs(weights, l.hidden, a.hidden, table);
  return joint_step(fused.token_probs, phrase.phrase_probs);
}

/// Beam search over the unified token/keyword space. Returns up to n_best
/// completed hypotheses, best first. Each step keeps the beam_width best
/// expansions overall; expansions that end in eos or reach max_len tokens
/// leave the beam. Keyword copies that would exceed max_len are not offered.
inline std::vector<Hypothesis> beam_search(const ScorerSession& acoustic, const ScorerSession& language,
                                           const EncoderWeights& weights, const KeywordList& list,
                                           const PhraseTable& table, const DecodeConfig& cfg, TokenId eos_id) {
  cfg.validate();
  const std::size_t V = acoustic.dims().vocab;
  if (language.dims().vocab != V)
    fail(Errc::VocabularyMismatch, "acoustic V=" + std::to_string(V) +
                                       " but language V=" + std::to_string(language.dims().vocab));
  if (eos_id >= V) fail(Errc::TokenOutOfRange, "eos id outside vocabulary");
  weights.require_compatible(V, language.dims().hidden, acoustic.dims().hidden);
  if (table.size() != list.size() + 1) fail(Errc::DimMismatch, "phrase table does not match keyword list");

  using detail::BeamEntry;
  using detail::Candidate;

  std::vector<BeamEntry> beam;
  beam.push_back(BeamEntry{Hypothesis{}, {}, acoustic.clone(), language.clone()});
  std::vector<BeamEntry> done;

  auto by_rank = [](const BeamEntry& a, const BeamEntry& b) { return ranks_before(a.key(), b.key()); };

  while (!beam.empty()) {
    std::vector<JointDistribution> dists(beam.size());
    std::vector<Candidate> pool;
    for (std::size_t i = 0; i < beam.size(); ++i) {
      auto& entry = beam[i];
      try {
        dists[i] = score_step(*entry.acoustic, *entry.language, weights, table);
      } catch (const Error& e) {
        if (!cfg.retire_unscorable || !detail::is_unscorable(e)) throw;
        entry.hyp.truncated = true;
        continue;
      }
      const auto& d = dists[i];
      const std::size_t room = cfg.max_len - entry.hyp.tokens.size();
      std::vector<Candidate> local;
      local.reserve(V + list.size());
      for (std::size_t v = 0; v < V; ++v) {
        if (d.token_part[v] > 0.0)
          local.push_back({i, Choice::token(static_cast<TokenId>(v)), static_cast<std::uint32_t>(v),
                           entry.hyp.log_score + std::log(d.token_part[v])});
      }
      for (std::size_t k = 1; k <= list.size(); ++k) {
        if (d.phrase_part[k - 1] > 0.0 && list[k].token_ids.size() <= room)
          local.push_back({i, Choice::keyword(k), static_cast<std::uint32_t>(V + k - 1),
                           entry.hyp.log_score + std::log(d.phrase_part[k - 1])});
      }
      // Siblings share a prefix, so score then outcome index orders them.
      const auto sibling_order = [](const Candidate& a, const Candidate& b) {
        return a.score != b.score ? a.score > b.score : a.outcome < b.outcome;
      };
      const std::size_t keep = std::min(cfg.beam_width, local.size());
      std::partial_sort(local.begin(), local.begin() + static_cast<std::ptrdiff_t>(keep), local.end(), sibling_order);
      pool.insert(pool.end(), local.begin(), local.begin() + static_cast<std::ptrdiff_t>(keep));
      if (local.empty()) entry.hyp.truncated = true;
    }

    for (auto& entry : beam)
      if (entry.hyp.truncated) done.push_back(std::move(entry));

    const auto candidate_key = [&beam](const Candidate& c) {
      const auto& parent = beam[c.parent];
      return RankKey{c.score, parent.hyp.events.size() + 1, &parent.outcomes, c.outcome};
    };
    const std::size_t keep = std::min(cfg.beam_width, pool.size());
    std::partial_sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(keep), pool.end(),
                      [&](const Candidate& a, const Candidate& b) {
                        return ranks_before(candidate_key(a), candidate_key(b));
                      });
    pool.resize(keep);

    std::vector<BeamEntry> next;
    for (const auto& c : pool) {
      const auto& parent = beam[c.parent];
      BeamEntry child;
      child.hyp = expand(parent.hyp, c.choice, dists[c.parent], list, eos_id);
      child.outcomes = parent.outcomes;
      child.outcomes.push_back(c.outcome);
      if (!child.hyp.finished && child.hyp.tokens.size() >= cfg.max_len) child.hyp.truncated = true;
      if (!child.hyp.live()) {
        done.push_back(std::move(child));
        continue;
      }
      child.acoustic = parent.acoustic->clone();
      child.language = parent.language->clone();
      for (std::size_t t = parent.hyp.tokens.size(); t < child.hyp.tokens.size(); ++t) {
        child.acoustic->advance(child.hyp.tokens[t]);
        child.language->advance(child.hyp.tokens[t]);
      }
      next.push_back(std::move(child));
    }
    beam = std::move(next);

    // Scores never increase along a lineage, so once the best live entry falls
    // strictly below the n-th completed one nothing can still enter the n-best.
    if (!beam.empty() && done.size() >= cfg.n_best) {
      std::partial_sort(done.begin(), done.begin() + static_cast<std::ptrdiff_t>(cfg.n_best), done.end(), by_rank);
      double best_live = -INFINITY;
      for (const auto& e : beam) best_live = std::max(best_live, e.hyp.log_score);
      if (best_live < done[cfg.n_best - 1].hyp.log_score) break;
    }
  }

  std::sort(done.begin(), done.end(), by_rank);
  std::vector<Hypothesis> out;
  for (std::size_t i = 0; i < done.size() && i < cfg.n_best; ++i) out.push_back(std::move(done[i].hyp));
  return out;
}

inline std::vector<Hypothesis> beam_search(const ScorerSession& acoustic, const ScorerSession& language,
                                           const EncoderWeights& weights, const KeywordList& list,
                                           const DecodeConfig& cfg, TokenId eos_id) {
  return beam_search(acoustic, language, weights, list, build_phrase_table(weights, list), cfg, eos_id);
}

inline nlohmann::json hypothesis_to_json(const Hypothesis& hyp, const Tokenizer& tokenizer) {
  nlohmann::json events = nlohmann::json::array();
  for (const auto& ev : hyp.events) {
    nlohmann::json e = {{"pos", ev.position}, {"kind", ev.kind == EventKind::Token ? "token" : "copy"}};
    if (ev.kind == EventKind::Copy) e["keyword"] = ev.keyword;
    events.push_back(std::move(e));
  }
  return {{"text", tokenizer.detokenize(hyp.tokens)},
          {"tokens", hyp.tokens},
          {"log_score", hyp.log_score},
          {"events", std::move(events)},
          {"finished", hyp.finished}};
}

inline nlohmann::json decode_record(const std::string& id, std::span<const Hypothesis> nbest,
                                    const Tokenizer& tokenizer) {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& h : nbest) list.push_back(hypothesis_to_json(h, tokenizer));
  return {{"id", id}, {"nbest", std::move(list)}};
}

}  // namespace mgf
