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

#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "mgfusion/envelope.hpp"
#include "mgfusion/error.hpp"
#include "mgfusion/numeric.hpp"
#include "mgfusion/vocabulary.hpp"

namespace mgf {

enum class ScorerKind { Acoustic, Language };

inline std::string_view to_string(ScorerKind k) { return k == ScorerKind::Acoustic ? "acoustic" : "language"; }

inline ScorerKind parse_scorer_kind(std::string_view s) {
  if (s == "acoustic") return ScorerKind::Acoustic;
  if (s == "language") return ScorerKind::Language;
  fail(Errc::ParseError, "unknown scorer kind '" + std::string(s) + "'");
}

/// One decoding step's output: unnormalized next-token scores and the
/// scorer's hidden state at that position.
struct StepScores {
  Vec logits;
  Vec hidden;
};

struct ScorerDims {
  std::size_t vocab = 0;
  std::size_t hidden = 0;
};

/// Stateful per-hypothesis scorer. step() scores the next position given the
/// tokens consumed so far; advance() teacher-forces one more token.
class ScorerSession {
 public:
  ScorerSession(ScorerDims dims, ScorerKind kind) : dims_(dims), kind_(kind) {}
  virtual ~ScorerSession() = default;

  virtual StepScores step() const = 0;
  virtual std::unique_ptr<ScorerSession> clone() const = 0;

  void advance(TokenId token) {
    if (token >= dims_.vocab)
      fail(Errc::TokenOutOfRange, "token " + std::to_string(token) + " >= V=" + std::to_string(dims_.vocab));
    on_advance(token);
    prefix_.push_back(token);
  }

  const std::vector<TokenId>& prefix() const noexcept { return prefix_; }
  ScorerDims dims() const noexcept { return dims_; }
  ScorerKind kind() const noexcept { return kind_; }

 protected:
  virtual void on_advance(TokenId token) = 0;

 private:
  ScorerDims dims_;
  ScorerKind kind_;
  std::vector<TokenId> prefix_;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// [0, 1) from the top 53 bits.
inline double unit_interval(std::uint64_t x) { return static_cast<double>(x >> 11) * 0x1.0p-53; }

}  // namespace detail

inline constexpr double kSyntheticLogitBound = 10.0;

/// Seeded stand-in for a trained model. Scores are a pure function of the
/// construction arguments and the consumed prefix: the prefix is folded into
/// a running 64-bit state and every output value is drawn from a splitmix64
/// stream keyed by that state, so results are bit-identical across platforms.
class SyntheticScorer final : public ScorerSession {
 public:
  SyntheticScorer(std::uint64_t seed, ScorerDims dims, ScorerKind kind, std::string_view context = {})
      : ScorerSession(dims, kind) {
    state_ = detail::splitmix64(seed ^ (kind == ScorerKind::Acoustic ? 0xA5A5A5A5ULL : 0x5A5A5A5A00ULL));
    if (!context.empty()) state_ = detail::splitmix64(state_ ^ detail::fnv1a(context));
  }

  StepScores step() const override {
    StepScores out;
    out.logits.resize(dims().vocab);
    out.hidden.resize(dims().hidden);
    std::uint64_t x = state_;
    for (double& v : out.logits) {
      x = detail::splitmix64(x);
      v = -kSyntheticLogitBound + 2.0 * kSyntheticLogitBound * detail::unit_interval(x);
    }
    for (double& v : out.hidden) {
      x = detail::splitmix64(x);
      v = -1.0 + 2.0 * detail::unit_interval(x);
    }
    return out;
  }

  std::unique_ptr<ScorerSession> clone() const override { return std::make_unique<SyntheticScorer>(*this); }

 protected:
  void on_advance(TokenId token) override {
    state_ = detail::splitmix64(state_ ^ ((static_cast<std::uint64_t>(token) + 1) * 0xd6e8feb86659fd93ULL));
  }

 private:
  std::uint64_t state_;
};

inline std::unique_ptr<ScorerSession> open_synthetic(std::uint64_t seed, ScorerDims dims,
                                                     ScorerKind kind = ScorerKind::Acoustic,
                                                     std::string_view context = {}) {
  if (dims.vocab < 2 || dims.hidden < 1)
    fail(Errc::BadDims, "synthetic scorer needs V >= 2 and d >= 1 (got V=" + std::to_string(dims.vocab) +
                            ", d=" + std::to_string(dims.hidden) + ")");
  return std::make_unique<SyntheticScorer>(seed, dims, kind, context);
}

inline constexpr std::string_view kReplayMagic = "MGFR";

/// Recorded scores along one forced token path. Record t holds the scores
/// produced after consuming forced_path[0..t).
struct ReplayFile {
  std::string vocab_digest;
  ScorerDims dims;
  ScorerKind kind = ScorerKind::Acoustic;
  std::vector<TokenId> forced_path;
  nlohmann::json meta = nlohmann::json::object();
  std::vector<float> logits;  // T x V, row-major
  std::vector<float> hidden;  // T x d, row-major

  std::size_t steps() const noexcept { return forced_path.size(); }

  std::span<const float> logits_at(std::size_t t) const {
    return std::span(logits).subspan(t * dims.vocab, dims.vocab);
  }
  std::span<const float> hidden_at(std::size_t t) const {
    return std::span(hidden).subspan(t * dims.hidden, dims.hidden);
  }

  std::string encode() const {
    Envelope env;
    env.header = {{"vocab_digest", vocab_digest},
                  {"V", dims.vocab},
                  {"d", dims.hidden},
                  {"T", steps()},
                  {"forced_path", forced_path},
                  {"kind", to_string(kind)},
                  {"meta", meta}};
    env.payload.reserve(logits.size() + hidden.size());
    for (std::size_t t = 0; t < steps(); ++t) {
      auto l = logits_at(t);
      auto h = hidden_at(t);
      env.payload.insert(env.payload.end(), l.begin(), l.end());
      env.payload.insert(env.payload.end(), h.begin(), h.end());
    }
    return encode_envelope(kReplayMagic, env);
  }

  static ReplayFile decode(std::string_view bytes, const std::string& origin = "<replay>") {
    Envelope env = decode_envelope(kReplayMagic, bytes, origin);
    ReplayFile r;
    std::size_t T = 0;
    try {
      const auto& h = env.header;
      r.vocab_digest = h.at("vocab_digest").get<std::string>();
      r.dims.vocab = h.at("V").get<std::size_t>();
      r.dims.hidden = h.at("d").get<std::size_t>();
      T = h.at("T").get<std::size_t>();
      r.forced_path = h.at("forced_path").get<std::vector<TokenId>>();
      r.kind = parse_scorer_kind(h.at("kind").get<std::string>());
      if (h.contains("meta")) r.meta = h["meta"];
    } catch (const nlohmann::json::exception& e) {
      fail(Errc::ParseError, origin + ": header: " + e.what());
    }
    if (r.dims.vocab < 2 || r.dims.hidden < 1) fail(Errc::BadDims, origin + ": bad dims in header");
    if (r.forced_path.size() != T)
      fail(Errc::ParseError, origin + ": forced_path length " + std::to_string(r.forced_path.size()) +
                                 " != T=" + std::to_string(T));
    for (TokenId id : r.forced_path)
      if (id >= r.dims.vocab) fail(Errc::TokenOutOfRange, origin + ": forced path token " + std::to_string(id));
    const std::size_t record = r.dims.vocab + r.dims.hidden;
    if (env.payload.size() < T * record)
      fail(Errc::TruncatedBody, origin + ": " + std::to_string(env.payload.size() / record) + " of " +
                                    std::to_string(T) + " records present");
    if (env.payload.size() > T * record) fail(Errc::ParseError, origin + ": trailing data after last record");
    r.logits.reserve(T * r.dims.vocab);
    r.hidden.reserve(T * r.dims.hidden);
    for (std::size_t t = 0; t < T; ++t) {
      const float* rec = env.payload.data() + t * record;
      r.logits.insert(r.logits.end(), rec, rec + r.dims.vocab);
      r.hidden.insert(r.hidden.end(), rec + r.dims.vocab, rec + record);
    }
    for (float f : env.payload)
      if (!std::isfinite(f)) fail(Errc::NonFiniteInput, origin + ": non-finite value in body");
    return r;
  }

  void save(const std::string& path) const { write_file_bytes(path, encode()); }
  static ReplayFile load(const std::string& path) { return decode(read_file_bytes(path), path); }
};

/// Session over a shared, read-only replay file.
class ReplayScorer final : public ScorerSession {
 public:
  explicit ReplayScorer(std::shared_ptr<const ReplayFile> file)
      : ScorerSession(file->dims, file->kind), file_(std::move(file)) {}

  StepScores step() const override {
    const std::size_t t = prefix().size();
    if (diverged_)
      fail(Errc::ReplayPathDiverged, "prefix left the recorded path at position " + std::to_string(diverged_at_));
    if (t >= file_->steps())
      fail(Errc::ReplayExhausted, "step " + std::to_string(t) + " of " + std::to_string(file_->steps()));
    StepScores out;
    auto l = file_->logits_at(t);
    auto h = file_->hidden_at(t);
    out.logits.assign(l.begin(), l.end());
    out.hidden.assign(h.begin(), h.end());
    return out;
  }

  std::unique_ptr<ScorerSession> clone() const override { return std::make_unique<ReplayScorer>(*this); }

  const ReplayFile& file() const noexcept { return *file_; }

 protected:
  void on_advance(TokenId token) override {
    const std::size_t pos = prefix().size();
    if (!diverged_ && pos < file_->steps() && file_->forced_path[pos] != token) {
      diverged_ = true;
      diverged_at_ = pos;
    }
  }

 private:
  std::shared_ptr<const ReplayFile> file_;
  bool diverged_ = false;
  std::size_t diverged_at_ = 0;
};

inline std::unique_ptr<ScorerSession> open_replay(std::shared_ptr<const ReplayFile> file, const Vocabulary& vocab) {
  if (file->vocab_digest != vocab.digest() || file->dims.vocab != vocab.size())
    fail(Errc::VocabularyMismatch, "replay digest " + file->vocab_digest + " (V=" + std::to_string(file->dims.vocab) +
                                       ") does not match vocabulary " + vocab.digest() +
                                       " (V=" + std::to_string(vocab.size()) + ")");
  return std::make_unique<ReplayScorer>(std::move(file));
}

inline std::unique_ptr<ScorerSession> open_replay(const std::string& path, const Vocabulary& vocab) {
  return open_replay(std::make_shared<const ReplayFile>(ReplayFile::load(path)), vocab);
}

/// Records `session`'s scores along `forced_path`, one record per token.
inline ReplayFile record_replay(const ScorerSession& session, std::span<const TokenId> forced_path,
                                const Vocabulary& vocab, nlohmann::json meta = nlohmann::json::object()) {
  if (session.dims().vocab != vocab.size()) fail(Errc::VocabularyMismatch, "session V differs from vocabulary");
  ReplayFile r;
  r.vocab_digest = vocab.digest();
  r.dims = session.dims();
  r.kind = session.kind();
  r.forced_path.assign(forced_path.begin(), forced_path.end());
  r.meta = std::move(meta);
  auto s = session.clone();
  for (TokenId tok : forced_path) {
    const StepScores sc = s->step();
    for (double v : sc.logits) r.logits.push_back(static_cast<float>(v));
    for (double v : sc.hidden) r.hidden.push_back(static_cast<float>(v));
    s->advance(tok);
  }
  return r;
}

}  // namespace mgf
