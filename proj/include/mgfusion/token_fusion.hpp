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

// Entropy-gated late fusion of acoustic and language scores.
//
//   p_a   = softmax(s_a)
//   H     = -sum_i p_a[i] ln p_a[i]          (nats, 0 ln 0 = 0)
//   g     = sigmoid(H)                       in [0.5, sigmoid(ln V)]
//   s     = s_a + g * s_l
//   p_tok = softmax(s)
//
// A confident acoustic model (low entropy) keeps g near 1/2; an uncertain one
// pushes g toward 1 and leans harder on the language model.

#pragma once

#include <cmath>
#include <span>
#include <string>

#include "mgfusion/error.hpp"
#include "mgfusion/numeric.hpp"
#include "mgfusion/vocabulary.hpp"

namespace mgf {

struct FusedTokenStep {
  Vec fused_logits;
  double gate = 0.5;
  Vec token_probs;
};

/// Shannon entropy in nats. Zero-probability entries contribute nothing.
inline double entropy(std::span<const double> probs) {
  require_distribution(probs, 1e-6, "entropy");
  double h = 0.0;
  for (double p : probs)
    if (p > 0.0) h -= p * std::log(p);
  return h < 0.0 ? 0.0 : h;
}

inline double uncertainty_gate(double entropy_nats) { return sigmoid(entropy_nats); }

inline FusedTokenStep fuse_logits(std::span<const double> acoustic, std::span<const double> language) {
  if (acoustic.size() != language.size())
    fail(Errc::LengthMismatch, "acoustic V=" + std::to_string(acoustic.size()) +
                                   ", language V=" + std::to_string(language.size()));
  if (acoustic.empty()) fail(Errc::LengthMismatch, "empty logit vectors");
  if (!all_finite(acoustic) || !all_finite(language)) fail(Errc::NonFiniteInput, "fuse_logits");

  FusedTokenStep out;
  out.gate = uncertainty_gate(entropy(softmax(acoustic)));
  out.fused_logits.resize(acoustic.size());
  for (std::size_t i = 0; i < acoustic.size(); ++i) out.fused_logits[i] = acoustic[i] + out.gate * language[i];
  out.token_probs = softmax(out.fused_logits);
  return out;
}

inline double token_prob_of(const FusedTokenStep& step, TokenId token) {
  if (token >= step.token_probs.size())
    fail(Errc::TokenOutOfRange, "token " + std::to_string(token) + " >= V=" + std::to_string(step.token_probs.size()));
  return step.token_probs[token];
}

}  // namespace mgf
