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
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mgfusion/error.hpp"
#include "mgfusion/joint_decoder.hpp"
#include "mgfusion/keywords.hpp"
#include "mgfusion/numeric.hpp"
#include "mgfusion/phrase_fusion.hpp"
#include "mgfusion/scorers.hpp"
#include "mgfusion/token_fusion.hpp"

namespace mgf {

struct MatchSpan {
  std::size_t start = 0;
  std::size_t length = 0;
  std::size_t keyword = 0;  // 1-based pattern index

  friend bool operator==(const MatchSpan&, const MatchSpan&) = default;
};

/// Prefix tree over unit sequences; terminal nodes remember the 1-based
/// pattern index.
template <typename T>
class PatternTrie {
 public:
  PatternTrie() : nodes_(1) {}

  void insert(std::span<const T> pattern, std::size_t index) {
    std::size_t n = 0;
    for (const T& unit : pattern) {
      auto it = nodes_[n].children.find(unit);
      if (it == nodes_[n].children.end()) {
        nodes_.emplace_back();
        it = nodes_[n].children.emplace(unit, nodes_.size() - 1).first;
      }
      n = it->second;
    }
    if (n != 0 && nodes_[n].terminal == 0) nodes_[n].terminal = index;
  }

  /// Longest pattern starting at `from`, if any.
  std::optional<MatchSpan> longest_at(std::span<const T> seq, std::size_t from) const {
    std::optional<MatchSpan> best;
    std::size_t n = 0;
    for (std::size_t i = from; i < seq.size(); ++i) {
      auto it = nodes_[n].children.find(seq[i]);
      if (it == nodes_[n].children.end()) break;
      n = it->second;
      if (nodes_[n].terminal != 0) best = MatchSpan{from, i - from + 1, nodes_[n].terminal};
    }
    return best;
  }

 private:
  struct Node {
    std::map<T, std::size_t> children;
    std::size_t terminal = 0;
  };
  std::vector<Node> nodes_;
};

/// Greedy left-to-right longest match. At each position the longest pattern
/// that matches is taken and scanning resumes after it; otherwise scanning
/// moves on by one unit. Spans never overlap.
template <typename T>
std::vector<MatchSpan> maximal_munch(std::span<const T> seq, std::span<const std::vector<T>> patterns) {
  PatternTrie<T> trie;
  for (std::size_t i = 0; i < patterns.size(); ++i) trie.insert(patterns[i], i + 1);
  std::vector<MatchSpan> spans;
  std::size_t i = 0;
  while (i < seq.size()) {
    if (auto m = trie.longest_at(seq, i)) {
      spans.push_back(*m);
      i += m->length;
    } else {
      ++i;
    }
  }
  return spans;
}

struct PhraseLabels {
  std::vector<std::size_t> labels;  // 0 = fake keyword
  std::vector<bool> mask;           // false strictly inside a matched span
};

inline std::vector<MatchSpan> keyword_spans(std::span<const TokenId> tokens, const KeywordList& list) {
  std::vector<std::vector<TokenId>> patterns;
  for (const auto& k : list.keywords()) patterns.push_back(k.token_ids);
  return maximal_munch<TokenId>(tokens, patterns);
}

/// Phrase supervision for a reference token sequence: the first position of
/// each matched keyword carries that keyword, positions inside the span are
/// masked out, everything else is the fake keyword.
inline PhraseLabels max_match_labels(std::span<const TokenId> reference, const KeywordList& list) {
  PhraseLabels out;
  out.labels.assign(reference.size(), 0);
  out.mask.assign(reference.size(), true);
  for (const auto& s : keyword_spans(reference, list)) {
    out.labels[s.start] = s.keyword;
    for (std::size_t k = 1; k < s.length; ++k) out.mask[s.start + k] = false;
  }
  return out;
}

struct LossReport {
  double loss_tok = 0.0;
  double loss_phr = 0.0;
  double total = 0.0;
};

inline LossReport make_loss_report(double loss_tok, double loss_phr) { return {loss_tok, loss_phr, loss_tok + loss_phr}; }

/// Negative log-likelihood of the reference under per-step token
/// distributions.
inline double loss_token(std::span<const Vec> per_step_token_probs, std::span<const TokenId> reference) {
  if (per_step_token_probs.size() != reference.size())
    fail(Errc::LengthMismatch, std::to_string(per_step_token_probs.size()) + " steps for " +
                                   std::to_string(reference.size()) + " reference tokens");
  double loss = 0.0;
  for (std::size_t t = 0; t < reference.size(); ++t) {
    const auto& row = per_step_token_probs[t];
    if (reference[t] >= row.size()) fail(Errc::TokenOutOfRange, "reference token " + std::to_string(reference[t]));
    const double p = row[reference[t]];
    if (!(p > 0.0)) fail(Errc::ZeroTargetProbability, "step " + std::to_string(t));
    loss -= std::log(p);
  }
  return loss;
}

/// Negative log-likelihood of the phrase labels; masked steps contribute 0
/// and their rows are never read.
inline double loss_phrase(std::span<const Vec> per_step_phrase_probs, const PhraseLabels& labels) {
  if (per_step_phrase_probs.size() != labels.labels.size() || labels.mask.size() != labels.labels.size())
    fail(Errc::LengthMismatch, "phrase rows and labels differ in length");
  double loss = 0.0;
  for (std::size_t t = 0; t < labels.labels.size(); ++t) {
    if (!labels.mask[t]) continue;
    const auto& row = per_step_phrase_probs[t];
    if (labels.labels[t] >= row.size()) fail(Errc::TokenOutOfRange, "label " + std::to_string(labels.labels[t]));
    const double p = row[labels.labels[t]];
    if (!(p > 0.0)) fail(Errc::ZeroTargetProbability, "step " + std::to_string(t));
    loss -= std::log(p);
  }
  return loss;
}

/// d/ds of -ln softmax(s)[target]  =  softmax(s) - onehot(target).
inline Vec grad_fused_logits(std::span<const double> fused_logits, TokenId target) {
  if (target >= fused_logits.size())
    fail(Errc::TokenOutOfRange, "target " + std::to_string(target) + " >= V=" + std::to_string(fused_logits.size()));
  Vec g = softmax(fused_logits);
  g[target] -= 1.0;
  return g;
}

struct FusionGradients {
  Vec acoustic;
  Vec language;
};

/// Gradient of the per-step token loss with respect to both scorers' logits,
/// chained through the entropy gate:
///   dL/ds_l = g * delta
///   dL/ds_a = delta + (delta . s_l) * g (1 - g) * dH/ds_a,
///   dH/ds_a[j] = -q_j (ln q_j + H),  q = softmax(s_a)
/// where delta = softmax(fused) - onehot(target).
inline FusionGradients token_loss_gradients(std::span<const double> acoustic, std::span<const double> language,
                                            TokenId target) {
  const FusedTokenStep step = fuse_logits(acoustic, language);
  const Vec delta = grad_fused_logits(step.fused_logits, target);
  const Vec q = softmax(acoustic);
  double h = 0.0;
  for (double p : q)
    if (p > 0.0) h -= p * std::log(p);
  const double g = step.gate;
  const double coupling = dot(delta, language) * g * (1.0 - g);

  FusionGradients out;
  out.language.resize(delta.size());
  out.acoustic.resize(delta.size());
  for (std::size_t j = 0; j < delta.size(); ++j) {
    out.language[j] = g * delta[j];
    const double dh = q[j] > 0.0 ? -q[j] * (std::log(q[j]) + h) : 0.0;
    out.acoustic[j] = delta[j] + coupling * dh;
  }
  return out;
}

/// Relative error between a central difference of `loss` along `direction`
/// and the analytic directional derivative grad(point) . direction. A zero
/// direction, or both derivatives exactly zero, reports 0.
template <typename LossFn, typename GradFn>
double finite_diff_check(LossFn&& loss, GradFn&& grad, std::span<const double> point,
                         std::span<const double> direction, double h) {
  if (!(h > 0.0)) fail(Errc::InvalidConfig, "step size must be positive");
  if (point.size() != direction.size()) fail(Errc::LengthMismatch, "point and direction differ in length");
  if (std::all_of(direction.begin(), direction.end(), [](double d) { return d == 0.0; })) return 0.0;
  Vec plus(point.begin(), point.end()), minus(point.begin(), point.end());
  for (std::size_t i = 0; i < point.size(); ++i) {
    plus[i] += h * direction[i];
    minus[i] -= h * direction[i];
  }
  const double numeric = (loss(std::span<const double>(plus)) - loss(std::span<const double>(minus))) / (2.0 * h);
  const Vec g = grad(point);
  const double analytic = dot(g, direction);
  const double scale = std::max(std::abs(numeric), std::abs(analytic));
  if (scale == 0.0) return 0.0;
  return std::abs(numeric - analytic) / scale;
}

/// Teacher-forces `reference` through both scorers and evaluates both loss
/// terms against the max-match phrase labels.
inline LossReport forced_path_loss(const ScorerSession& acoustic, const ScorerSession& language,
                                   const EncoderWeights& weights, const KeywordList& list,
                                   std::span<const TokenId> reference) {
  weights.require_compatible(acoustic.dims().vocab, language.dims().hidden, acoustic.dims().hidden);
  const PhraseTable table = build_phrase_table(weights, list);
  const PhraseLabels labels = max_match_labels(reference, list);
  auto a = acoustic.clone();
  auto l = language.clone();
  std::vector<Vec> token_rows, phrase_rows;
  for (std::size_t t = 0; t < reference.size(); ++t) {
    const StepScores sa = a->step();
    const StepScores sl = l->step();
    token_rows.push_back(fuse_logits(sa.logits, sl.logits).token_probs);
    phrase_rows.push_back(labels.mask[t] ? phrase_probs(weights, sl.hidden, sa.hidden, table).phrase_probs : Vec{});
    a->advance(reference[t]);
    l->advance(reference[t]);
  }
  return make_loss_report(loss_token(token_rows, reference), loss_phrase(phrase_rows, labels));
}

}  // namespace mgf
