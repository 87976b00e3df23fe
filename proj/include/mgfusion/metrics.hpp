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

// Keyword-aware error rates.
//
// Reference and hypothesis are aligned with a unit-cost Levenshtein backtrace.
// Keyword spans are located in the reference by greedy longest match. Every
// substitution/deletion is charged to the biased (B) region when its reference
// position lies inside a keyword span and to the unbiased (U) region
// otherwise; an insertion is charged to the region of the closest preceding
// reference position (U at the start). B + U therefore always equals the edit
// distance.

#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "mgfusion/error.hpp"
#include "mgfusion/keywords.hpp"
#include "mgfusion/supervision.hpp"
#include "mgfusion/utf8.hpp"

namespace mgf {

inline constexpr std::string_view kNormalizerVersion = "mgf-basic-1";

enum class Language { Zh, En };
enum class Unit { Char, Word };

inline Language parse_language(std::string_view s) {
  if (s == "zh") return Language::Zh;
  if (s == "en") return Language::En;
  fail(Errc::InvalidConfig, "language must be zh or en, got '" + std::string(s) + "'");
}

inline Unit parse_unit(std::string_view s) {
  if (s == "char") return Unit::Char;
  if (s == "word") return Unit::Word;
  fail(Errc::InvalidConfig, "unit must be char or word, got '" + std::string(s) + "'");
}

inline std::string_view to_string(Unit u) { return u == Unit::Char ? "char" : "word"; }

inline Unit default_unit(Language lang) { return lang == Language::Zh ? Unit::Char : Unit::Word; }

namespace detail {

inline bool is_space_cp(char32_t c) {
  return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\f' || c == U'\v' || c == 0x00A0 ||
         c == 0x3000 || (c >= 0x2000 && c <= 0x200B) || c == 0x202F || c == 0x205F;
}

inline bool is_punct_cp(char32_t c) {
  if (c < 0x80) return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) || (c >= 0x5B && c <= 0x60) ||
                       (c >= 0x7B && c <= 0x7E);
  return (c >= 0x00A1 && c <= 0x00BF && c != 0x00AA && c != 0x00B2 && c != 0x00B3 && c != 0x00B5 &&
          c != 0x00B9 && c != 0x00BA) ||
         c == 0x00D7 || c == 0x00F7 || (c >= 0x2010 && c <= 0x2027) || (c >= 0x2030 && c <= 0x205E) ||
         (c >= 0x3001 && c <= 0x3003) || (c >= 0x3008 && c <= 0x3011) || (c >= 0x3014 && c <= 0x301F) ||
         c == 0x30FB || (c >= 0xFF01 && c <= 0xFF0F) || (c >= 0xFF1A && c <= 0xFF20) ||
         (c >= 0xFF3B && c <= 0xFF40) || (c >= 0xFF5B && c <= 0xFF65);
}

inline char32_t to_lower_cp(char32_t c) {
  if (c >= U'A' && c <= U'Z') return c + 32;
  if (c >= 0x00C0 && c <= 0x00DE && c != 0x00D7) return c + 32;
  return c;
}

}  // namespace detail

/// Simplified transcript normalizer: lowercase (ASCII and Latin-1), replace
/// punctuation and symbols with spaces, collapse whitespace; for Chinese all
/// remaining spaces are removed.
inline std::string normalize(std::string_view text, Language lang) {
  std::string out;
  bool pending_space = false;
  for (char32_t c : utf8::decode_all(text)) {
    if (detail::is_space_cp(c) || detail::is_punct_cp(c)) {
      pending_space = true;
      continue;
    }
    if (pending_space && !out.empty() && lang == Language::En) out += ' ';
    pending_space = false;
    out += utf8::encode(detail::to_lower_cp(c));
  }
  return out;
}

/// Character units are code points with whitespace skipped; word units are
/// whitespace-separated tokens.
inline std::vector<std::string> split_units(std::string_view text, Unit unit) {
  std::vector<std::string> out;
  if (unit == Unit::Char) {
    for (auto& cp : utf8::split_code_points(text))
      if (!detail::is_space_cp(utf8::decode(cp))) out.push_back(std::move(cp));
    return out;
  }
  std::string cur;
  for (auto& cp : utf8::split_code_points(text)) {
    if (detail::is_space_cp(utf8::decode(cp))) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += cp;
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

enum class OpKind { Match, Substitute, Delete, Insert };

struct AlignOp {
  OpKind kind;
  std::optional<std::size_t> ref_pos;
  std::optional<std::size_t> hyp_pos;
};

struct AlignedPair {
  std::vector<AlignOp> ops;
  Unit unit = Unit::Word;

  std::size_t distance() const {
    std::size_t d = 0;
    for (const auto& op : ops) d += op.kind != OpKind::Match;
    return d;
  }
};

/// Minimal unit-cost edit script. Backtrace preference at equal cost:
/// match, substitute, delete, insert.
template <typename T>
AlignedPair align(std::span<const T> ref, std::span<const T> hyp, Unit unit = Unit::Word) {
  const std::size_t n = ref.size(), m = hyp.size();
  std::vector<std::uint32_t> dp((n + 1) * (m + 1));
  auto at = [m](std::size_t i, std::size_t j) { return i * (m + 1) + j; };
  for (std::size_t i = 0; i <= n; ++i) dp[at(i, 0)] = static_cast<std::uint32_t>(i);
  for (std::size_t j = 0; j <= m; ++j) dp[at(0, j)] = static_cast<std::uint32_t>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const std::uint32_t diag = dp[at(i - 1, j - 1)] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      dp[at(i, j)] = std::min({diag, dp[at(i - 1, j)] + 1, dp[at(i, j - 1)] + 1});
    }
  }

  AlignedPair out;
  out.unit = unit;
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    const std::uint32_t cur = dp[at(i, j)];
    if (i > 0 && j > 0 && ref[i - 1] == hyp[j - 1] && cur == dp[at(i - 1, j - 1)]) {
      out.ops.push_back({OpKind::Match, i - 1, j - 1});
      --i, --j;
    } else if (i > 0 && j > 0 && cur == dp[at(i - 1, j - 1)] + 1) {
      out.ops.push_back({OpKind::Substitute, i - 1, j - 1});
      --i, --j;
    } else if (i > 0 && cur == dp[at(i - 1, j)] + 1) {
      out.ops.push_back({OpKind::Delete, i - 1, std::nullopt});
      --i;
    } else {
      out.ops.push_back({OpKind::Insert, std::nullopt, j - 1});
      --j;
    }
  }
  std::reverse(out.ops.begin(), out.ops.end());
  return out;
}

struct ReportCounts {
  std::size_t ref_units = 0;
  std::size_t biased_units = 0;
  std::size_t errors_b = 0;
  std::size_t errors_u = 0;
  std::size_t keywords_total = 0;
  std::size_t keywords_recalled = 0;

  std::size_t errors() const noexcept { return errors_b + errors_u; }
};

struct BiasedReport {
  double overall = 0.0;
  std::optional<double> biased;    // absent when the reference has no keyword units
  std::optional<double> unbiased;  // absent when every reference unit is a keyword unit
  std::optional<double> recall;    // absent when the reference has no keyword occurrences
  ReportCounts counts;
  Unit unit = Unit::Word;

  static BiasedReport from_counts(const ReportCounts& c, Unit unit) {
    if (c.ref_units == 0) fail(Errc::EmptyReference, "reference has no units");
    BiasedReport r;
    r.counts = c;
    r.unit = unit;
    r.overall = static_cast<double>(c.errors()) / static_cast<double>(c.ref_units);
    if (c.biased_units > 0) r.biased = static_cast<double>(c.errors_b) / static_cast<double>(c.biased_units);
    if (c.ref_units > c.biased_units)
      r.unbiased = static_cast<double>(c.errors_u) / static_cast<double>(c.ref_units - c.biased_units);
    if (c.keywords_total > 0)
      r.recall = static_cast<double>(c.keywords_recalled) / static_cast<double>(c.keywords_total);
    return r;
  }

  nlohmann::json to_json() const {
    auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    return {{"unit", to_string(unit)},
            {"overall", overall},
            {"biased", opt(biased)},
            {"unbiased", opt(unbiased)},
            {"recall", opt(recall)},
            {"counts",
             {{"ref_units", counts.ref_units},
              {"biased_units", counts.biased_units},
              {"errors_b", counts.errors_b},
              {"errors_u", counts.errors_u},
              {"keywords_total", counts.keywords_total},
              {"keywords_recalled", counts.keywords_recalled}}},
            {"normalizer_version", kNormalizerVersion}};
  }
};

/// Error report for one already-normalized reference/hypothesis pair.
/// Keyword surfaces are split into units the same way as the texts.
inline BiasedReport biased_report(std::string_view ref_text, std::string_view hyp_text,
                                  std::span<const std::string> keyword_surfaces, Unit unit) {
  const auto ref = split_units(ref_text, unit);
  const auto hyp = split_units(hyp_text, unit);
  if (ref.empty()) fail(Errc::EmptyReference, "reference is empty after splitting into units");

  std::vector<std::vector<std::string>> patterns;
  for (const auto& s : keyword_surfaces) {
    auto p = split_units(s, unit);
    if (!p.empty()) patterns.push_back(std::move(p));
  }
  const auto spans = maximal_munch<std::string>(ref, patterns);
  std::vector<bool> in_span(ref.size(), false);
  for (const auto& s : spans)
    for (std::size_t k = 0; k < s.length; ++k) in_span[s.start + k] = true;

  const AlignedPair a = align<std::string>(ref, hyp, unit);
  ReportCounts c;
  c.ref_units = ref.size();
  for (bool b : in_span) c.biased_units += b;
  std::vector<bool> matched(ref.size(), false);
  bool last_biased = false;
  for (const auto& op : a.ops) {
    if (op.ref_pos) last_biased = in_span[*op.ref_pos];
    switch (op.kind) {
      case OpKind::Match: matched[*op.ref_pos] = true; break;
      case OpKind::Substitute:
      case OpKind::Delete:
      case OpKind::Insert: (last_biased ? c.errors_b : c.errors_u) += 1; break;
    }
  }
  c.keywords_total = spans.size();
  for (const auto& s : spans) {
    bool ok = true;
    for (std::size_t k = 0; k < s.length; ++k) ok = ok && matched[s.start + k];
    c.keywords_recalled += ok;
  }
  return BiasedReport::from_counts(c, unit);
}

inline BiasedReport biased_report(std::string_view ref_text, std::string_view hyp_text, const KeywordList& list,
                                  Unit unit) {
  const auto surfaces = list.surfaces();
  return biased_report(ref_text, hyp_text, surfaces, unit);
}

/// Corpus micro-average: pooled counts, rates recomputed.
inline BiasedReport aggregate(std::span<const BiasedReport> reports) {
  if (reports.empty()) fail(Errc::EmptyReference, "nothing to aggregate");
  ReportCounts total;
  const Unit unit = reports.front().unit;
  for (const auto& r : reports) {
    if (r.unit != unit) fail(Errc::InvalidConfig, "cannot aggregate reports with different units");
    total.ref_units += r.counts.ref_units;
    total.biased_units += r.counts.biased_units;
    total.errors_b += r.counts.errors_b;
    total.errors_u += r.counts.errors_u;
    total.keywords_total += r.counts.keywords_total;
    total.keywords_recalled += r.counts.keywords_recalled;
  }
  return BiasedReport::from_counts(total, unit);
}

}  // namespace mgf
