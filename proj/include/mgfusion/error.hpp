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

#include <stdexcept>
#include <string>
#include <string_view>

namespace mgf {

enum class Errc {
  // vocabulary / keywords
  EmptyKeyword,
  UntokenizableKeyword,
  DuplicateKeyword,
  UnknownCharacter,
  // scorers
  ReplayPathDiverged,
  ReplayExhausted,
  TokenOutOfRange,
  BadDims,
  BadMagic,
  VocabularyMismatch,
  TruncatedBody,
  // fusion
  NotADistribution,
  LengthMismatch,
  NonFiniteInput,
  DimMismatch,
  // decoding
  ZeroProbabilityChoice,
  AlreadyFinished,
  // supervision / metrics
  ZeroTargetProbability,
  EmptyReference,
  MissingReference,
  EmptyEvaluation,
  // plumbing
  IoError,
  ParseError,
  InvalidConfig,
  InvariantViolation,
};

inline std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::EmptyKeyword: return "EmptyKeyword";
    case Errc::UntokenizableKeyword: return "UntokenizableKeyword";
    case Errc::DuplicateKeyword: return "DuplicateKeyword";
    case Errc::UnknownCharacter: return "UnknownCharacter";
    case Errc::ReplayPathDiverged: return "ReplayPathDiverged";
    case Errc::ReplayExhausted: return "ReplayExhausted";
    case Errc::TokenOutOfRange: return "TokenOutOfRange";
    case Errc::BadDims: return "BadDims";
    case Errc::BadMagic: return "BadMagic";
    case Errc::VocabularyMismatch: return "VocabularyMismatch";
    case Errc::TruncatedBody: return "TruncatedBody";
    case Errc::NotADistribution: return "NotADistribution";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::NonFiniteInput: return "NonFiniteInput";
    case Errc::DimMismatch: return "DimMismatch";
    case Errc::ZeroProbabilityChoice: return "ZeroProbabilityChoice";
    case Errc::AlreadyFinished: return "AlreadyFinished";
    case Errc::ZeroTargetProbability: return "ZeroTargetProbability";
    case Errc::EmptyReference: return "EmptyReference";
    case Errc::MissingReference: return "MissingReference";
    case Errc::EmptyEvaluation: return "EmptyEvaluation";
    case Errc::IoError: return "IoError";
    case Errc::ParseError: return "ParseError";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::InvariantViolation: return "InvariantViolation";
  }
  return "Unknown";
}

/// Exception type thrown by every mgfusion component. The code identifies the
/// failure class; what() carries a human-readable detail prefixed by the code.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail)
      : std::runtime_error(std::string(errc_name(code)) + ": " + detail), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& detail) { throw Error(code, detail); }

}  // namespace mgf
