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
#include <fstream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mgfusion/error.hpp"
#include "mgfusion/vocabulary.hpp"

namespace mgf {

struct Keyword {
  std::string surface;
  std::vector<TokenId> token_ids;

  friend bool operator==(const Keyword&, const Keyword&) = default;
};

/// Contextual keyword list. Slot 0 is the reserved "no keyword" entry and
/// carries no tokens; real keywords occupy slots 1..N.
class KeywordList {
 public:
  KeywordList() : entries_(1) {}

  /// Number of real keywords (excludes slot 0).
  std::size_t size() const noexcept { return entries_.size() - 1; }
  bool empty() const noexcept { return size() == 0; }

  /// 1-based access to real keywords; index 0 yields the empty fake slot.
  const Keyword& operator[](std::size_t index) const { return entries_.at(index); }

  std::span<const Keyword> keywords() const noexcept { return std::span(entries_).subspan(1); }

  std::vector<std::string> surfaces() const {
    std::vector<std::string> out;
    for (const auto& k : keywords()) out.push_back(k.surface);
    return out;
  }

  std::size_t max_keyword_length() const noexcept {
    std::size_t n = 0;
    for (const auto& k : keywords()) n = std::max(n, k.token_ids.size());
    return n;
  }

 private:
  friend KeywordList build_keyword_list(std::span<const std::string>, const Tokenizer&);
  std::vector<Keyword> entries_;
};

namespace detail {
inline std::string trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v'; };
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}
}  // namespace detail

/// Tokenizes each surface (after trimming) and appends it in order. Rejects
/// blank surfaces, uncovered characters and repeated token sequences.
inline KeywordList build_keyword_list(std::span<const std::string> surfaces, const Tokenizer& tokenizer) {
  KeywordList list;
  std::set<std::vector<TokenId>> seen;
  for (const auto& raw : surfaces) {
    std::string surface = detail::trim(raw);
    if (surface.empty()) fail(Errc::EmptyKeyword, "blank keyword at position " + std::to_string(list.size() + 1));
    std::vector<TokenId> ids;
    try {
      ids = tokenizer.tokenize(surface);
    } catch (const Error& e) {
      fail(Errc::UntokenizableKeyword, "'" + surface + "': " + e.what());
    }
    if (std::find(ids.begin(), ids.end(), tokenizer.vocabulary().eos_id()) != ids.end())
      fail(Errc::UntokenizableKeyword, "'" + surface + "' contains eos");
    if (!seen.insert(ids).second) fail(Errc::DuplicateKeyword, "'" + surface + "'");
    list.entries_.push_back(Keyword{std::move(surface), std::move(ids)});
  }
  return list;
}

/// Reads a keyword file: UTF-8, one keyword per line, blank lines and lines
/// starting with '#' skipped.
inline std::vector<std::string> read_keyword_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::IoError, "cannot open keyword file " + path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    std::string t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    out.push_back(std::move(t));
  }
  return out;
}

inline constexpr std::string_view kKeywordsPlaceholder = "{keywords}";

inline constexpr std::string_view kDefaultPromptTemplate =
    "Transcribe the speech into text. The following keywords are likely to appear. "
    "Use relevant keywords to improve transcription accuracy and ignore irrelevant ones. "
    "The keywords are {keywords}. "
    "The text corresponding to the speech is:";

struct ContextPrompt {
  std::string template_text;
  std::string rendered;
};

/// Fills the keyword placeholder with the comma-joined surfaces. When the list
/// is empty the whole sentence holding the placeholder is dropped.
inline ContextPrompt render_prompt(const KeywordList& list,
                                   std::string_view template_text = kDefaultPromptTemplate) {
  std::string tpl(template_text);
  const auto at = tpl.find(kKeywordsPlaceholder);
  if (at == std::string::npos) return {tpl, tpl};

  if (list.empty()) {
    // Sentence bounds: after the previous ". " (or start) up to and including
    // the next ". " (or end).
    std::size_t begin = tpl.rfind(". ", at);
    begin = begin == std::string::npos ? 0 : begin + 2;
    std::size_t end = tpl.find(". ", at);
    end = end == std::string::npos ? tpl.size() : end + 2;
    std::string rendered = tpl.substr(0, begin) + tpl.substr(end);
    return {tpl, rendered};
  }

  std::string joined;
  for (std::size_t i = 1; i <= list.size(); ++i) {
    if (i > 1) joined += ", ";
    joined += list[i].surface;
  }
  std::string rendered = tpl.substr(0, at) + joined + tpl.substr(at + kKeywordsPlaceholder.size());
  return {tpl, rendered};
}

}  // namespace mgf
