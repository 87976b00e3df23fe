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

#include <charconv>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "mgfusion/error.hpp"

namespace mgf {

/// Where a scorer's scores come from: a replay file or a seeded synthetic
/// generator ("synthetic:<seed>").
struct ScorerSource {
  std::optional<std::uint64_t> synthetic_seed;
  std::string replay_path;

  bool is_synthetic() const noexcept { return synthetic_seed.has_value(); }

  static ScorerSource parse(std::string_view spec) {
    constexpr std::string_view prefix = "synthetic:";
    ScorerSource src;
    if (spec.substr(0, prefix.size()) == prefix) {
      const auto digits = spec.substr(prefix.size());
      std::uint64_t seed = 0;
      auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), seed);
      if (ec != std::errc{} || ptr != digits.data() + digits.size() || digits.empty())
        fail(Errc::ParseError, "bad synthetic seed in '" + std::string(spec) + "'");
      src.synthetic_seed = seed;
    } else {
      if (spec.empty()) fail(Errc::ParseError, "empty scorer source");
      src.replay_path = std::string(spec);
    }
    return src;
  }

  std::string str() const { return is_synthetic() ? "synthetic:" + std::to_string(*synthetic_seed) : replay_path; }
};

struct Utterance {
  std::string id;
  std::optional<std::string> reference;
  ScorerSource acoustic;
  ScorerSource language;
  std::optional<std::string> keywords_path;
};

/// Parses a JSON Lines manifest. Blank lines are skipped; ids must be unique.
inline std::vector<Utterance> parse_manifest(std::istream& in, const std::string& origin = "<manifest>") {
  std::vector<Utterance> out;
  std::set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = origin + ":" + std::to_string(line_no);
    try {
      const auto j = nlohmann::json::parse(line);
      Utterance u;
      u.id = j.at("id").get<std::string>();
      if (j.contains("reference") && !j["reference"].is_null()) u.reference = j["reference"].get<std::string>();
      u.acoustic = ScorerSource::parse(j.at("audio_replay").get<std::string>());
      u.language = ScorerSource::parse(j.at("lm_replay").get<std::string>());
      if (j.contains("keywords") && !j["keywords"].is_null()) u.keywords_path = j["keywords"].get<std::string>();
      if (!ids.insert(u.id).second) fail(Errc::ParseError, where + ": duplicate utterance id '" + u.id + "'");
      out.push_back(std::move(u));
    } catch (const nlohmann::json::exception& e) {
      fail(Errc::ParseError, where + ": " + e.what());
    }
  }
  return out;
}

inline std::vector<Utterance> load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::IoError, "cannot open manifest " + path);
  return parse_manifest(in, path);
}

}  // namespace mgf
