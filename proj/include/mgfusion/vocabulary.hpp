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
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "mgfusion/error.hpp"
#include "mgfusion/utf8.hpp"

namespace mgf {

using TokenId = std::uint32_t;

inline constexpr std::string_view kDefaultEos = "<eos>";

/// Dense id <-> piece mapping. Ids are [0, size()); eos is one of them.
class Vocabulary {
 public:
  Vocabulary() = default;

  Vocabulary(std::vector<std::string> pieces, TokenId eos_id) : id_to_string_(std::move(pieces)), eos_id_(eos_id) {
    if (id_to_string_.size() < 2) fail(Errc::BadDims, "vocabulary needs at least two entries");
    if (eos_id_ >= id_to_string_.size()) fail(Errc::BadDims, "eos id out of range");
    for (TokenId i = 0; i < id_to_string_.size(); ++i) {
      if (!string_to_id_.emplace(id_to_string_[i], i).second)
        fail(Errc::ParseError, "duplicate vocabulary entry '" + id_to_string_[i] + "'");
    }
  }

  /// Character vocabulary: the sorted distinct code points of `corpus`
  /// followed by `eos`.
  static Vocabulary from_characters(std::string_view corpus, std::string eos = std::string(kDefaultEos)) {
    std::set<char32_t> chars;
    for (char32_t c : utf8::decode_all(corpus)) chars.insert(c);
    std::vector<std::string> pieces;
    pieces.reserve(chars.size() + 1);
    for (char32_t c : chars) pieces.push_back(utf8::encode(c));
    pieces.push_back(std::move(eos));
    const auto eos_id = static_cast<TokenId>(pieces.size() - 1);
    return Vocabulary(std::move(pieces), eos_id);
  }

  std::size_t size() const noexcept { return id_to_string_.size(); }
  TokenId eos_id() const noexcept { return eos_id_; }
  const std::string& piece(TokenId id) const {
    if (id >= size()) fail(Errc::TokenOutOfRange, "token " + std::to_string(id));
    return id_to_string_[id];
  }
  const std::vector<std::string>& pieces() const noexcept { return id_to_string_; }

  std::optional<TokenId> find(std::string_view piece) const {
    auto it = string_to_id_.find(std::string(piece));
    if (it == string_to_id_.end()) return std::nullopt;
    return it->second;
  }

  /// Stable 64-bit FNV-1a digest over the pieces and the eos id, rendered as
  /// "fnv1a64:<16 hex digits>". Replay headers carry this value.
  std::string digest() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](unsigned char byte) {
      h ^= byte;
      h *= 0x100000001b3ULL;
    };
    for (const auto& p : id_to_string_) {
      for (char c : p) mix(static_cast<unsigned char>(c));
      mix(0);
    }
    for (int shift = 0; shift < 32; shift += 8) mix(static_cast<unsigned char>(eos_id_ >> shift));
    char buf[32];
    std::snprintf(buf, sizeof buf, "fnv1a64:%016llx", static_cast<unsigned long long>(h));
    return buf;
  }

  nlohmann::json to_json() const { return {{"tokens", id_to_string_}, {"eos_id", eos_id_}}; }

  static Vocabulary from_json(const nlohmann::json& j) {
    try {
      return Vocabulary(j.at("tokens").get<std::vector<std::string>>(), j.at("eos_id").get<TokenId>());
    } catch (const nlohmann::json::exception& e) {
      fail(Errc::ParseError, std::string("vocabulary json: ") + e.what());
    }
  }

  static Vocabulary load(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(Errc::IoError, "cannot open vocabulary file " + path);
    try {
      return from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
      fail(Errc::ParseError, path + ": " + e.what());
    }
  }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.eos_id_ == b.eos_id_ && a.id_to_string_ == b.id_to_string_;
  }

 private:
  std::vector<std::string> id_to_string_;
  std::unordered_map<std::string, TokenId> string_to_id_;
  TokenId eos_id_ = 0;
};

/// Greedy longest-piece tokenizer over a vocabulary. With a character
/// vocabulary every piece is one code point and this is plain per-character
/// lookup. The eos piece never matches text.
class Tokenizer {
 public:
  explicit Tokenizer(const Vocabulary& vocab) : vocab_(&vocab) {
    for (TokenId i = 0; i < vocab.size(); ++i) {
      if (i == vocab.eos_id()) continue;
      max_piece_cps_ = std::max(max_piece_cps_, utf8::split_code_points(vocab.piece(i)).size());
    }
  }

  const Vocabulary& vocabulary() const noexcept { return *vocab_; }

  std::vector<TokenId> tokenize(std::string_view text) const {
    const auto cps = utf8::split_code_points(text);
    std::vector<TokenId> out;
    std::size_t i = 0;
    while (i < cps.size()) {
      const std::size_t longest = std::min(max_piece_cps_, cps.size() - i);
      bool matched = false;
      for (std::size_t len = longest; len >= 1; --len) {
        std::string candidate;
        for (std::size_t k = 0; k < len; ++k) candidate += cps[i + k];
        auto id = vocab_->find(candidate);
        if (id && *id != vocab_->eos_id()) {
          out.push_back(*id);
          i += len;
          matched = true;
          break;
        }
      }
      if (!matched) fail(Errc::UnknownCharacter, "'" + cps[i] + "' is not covered by the vocabulary");
    }
    return out;
  }

  /// Concatenates pieces; eos ids are dropped.
  std::string detokenize(std::span<const TokenId> ids) const {
    std::string out;
    for (TokenId id : ids) {
      if (id == vocab_->eos_id()) continue;
      out += vocab_->piece(id);
    }
    return out;
  }

 private:
  const Vocabulary* vocab_;
  std::size_t max_piece_cps_ = 1;
};

}  // namespace mgf
