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

#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "mgfusion/supervision.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

namespace mgf {
namespace {

Errc code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::InvariantViolation;
}

TEST(MaxMatchLabels, SingleKeywordSpan) {
  const std::string text = "send a message to elisa toffoli";
  const Vocabulary vocab = Vocabulary::from_characters(text);
  const Tokenizer tok(vocab);
  const auto list = build_keyword_list(std::vector<std::string>{"elisa toffoli"}, tok);
  const auto ref = tok.tokenize(text);
  const auto labels = max_match_labels(ref, list);
  const std::size_t start = text.find("elisa");
  const std::size_t len = std::string("elisa toffoli").size();
  for (std::size_t i = 0; i < ref.size(); ++i) {
    if (i == start) {
      EXPECT_EQ(labels.labels[i], 1u);
      EXPECT_TRUE(labels.mask[i]);
    } else if (i > start && i < start + len) {
      EXPECT_FALSE(labels.mask[i]) << i;
    } else {
      EXPECT_EQ(labels.labels[i], 0u);
      EXPECT_TRUE(labels.mask[i]);
    }
  }
}

TEST(MaxMatchLabels, EmptyListLabelsEverythingFake) {
  const Vocabulary vocab = Vocabulary::from_characters("abc");
  const Tokenizer tok(vocab);
  const auto labels = max_match_labels(tok.tokenize("abcabc"), KeywordList{});
  EXPECT_EQ(labels.labels, std::vector<std::size_t>(6, 0));
  EXPECT_EQ(labels.mask, std::vector<bool>(6, true));
}

TEST(MaxMatchLabels, LongestKeywordWins) {
  const Vocabulary vocab({"new", "york", "city", " ", "in", "<eos>"}, 5);
  const Tokenizer tok(vocab);
  const auto list = build_keyword_list(std::vector<std::string>{"new york", "new york city"}, tok);
  const auto ref = tok.tokenize("in new york city");
  ASSERT_EQ(ref.size(), 7u);
  const auto spans = keyword_spans(ref, list);
  ASSERT_EQ(spans.size(), 1u);
  EXPECT_EQ(spans[0], (MatchSpan{2, 5, 2}));

  // same outcome with the patterns listed in the other order
  const auto swapped = build_keyword_list(std::vector<std::string>{"new york city", "new york"}, tok);
  EXPECT_EQ(keyword_spans(ref, swapped)[0], (MatchSpan{2, 5, 1}));
}

TEST(MaxMatchLabels, AgreesWithBruteForceScanner) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t alphabet = 1 + rng() % 5;
    std::vector<TokenId> text(rng() % 21);
    for (auto& t : text) t = static_cast<TokenId>(rng() % alphabet);
    std::set<std::vector<TokenId>> seen;
    std::vector<std::vector<TokenId>> patterns;
    for (std::size_t k = 0, n = rng() % 6; k < n; ++k) {
      std::vector<TokenId> p(1 + rng() % 4);
      for (auto& t : p) t = static_cast<TokenId>(rng() % alphabet);
      if (seen.insert(p).second) patterns.push_back(p);
    }
    const auto ours = maximal_munch<TokenId>(text, patterns);
    const auto ref = oracle::scan_longest(text, patterns);
    ASSERT_EQ(ours.size(), ref.size());
    for (std::size_t i = 0; i < ours.size(); ++i) {
      EXPECT_EQ(ours[i].start, ref[i].start);
      EXPECT_EQ(ours[i].length, ref[i].length);
      EXPECT_EQ(ours[i].keyword, ref[i].keyword);
      // every span is a real occurrence
      EXPECT_TRUE(std::equal(patterns[ours[i].keyword - 1].begin(), patterns[ours[i].keyword - 1].end(),
                             text.begin() + static_cast<std::ptrdiff_t>(ours[i].start)));
    }
  }
}

TEST(LossToken, UniformAndHandValues) {
  const std::vector<Vec> rows(3, Vec{0.5, 0.5});
  EXPECT_NEAR(loss_token(rows, std::vector<TokenId>{0, 1, 0}), 3 * std::log(2.0), 1e-15);
  EXPECT_NEAR(loss_token(rows, std::vector<TokenId>{0, 1, 0}), 2.0794, 1e-4);
  const std::vector<Vec> one{Vec{0.6, 0.4}};
  EXPECT_NEAR(loss_token(one, std::vector<TokenId>{1}), 0.9163, 1e-4);
}

TEST(LossToken, Errors) {
  const std::vector<Vec> rows{Vec{1.0, 0.0}};
  EXPECT_EQ(code_of([&] { loss_token(rows, std::vector<TokenId>{1}); }), Errc::ZeroTargetProbability);
  EXPECT_EQ(code_of([&] { loss_token(rows, std::vector<TokenId>{0, 0}); }), Errc::LengthMismatch);
}

TEST(LossPhrase, MaskedRowsIgnored) {
  PhraseLabels labels{{0, 1, 0, 0}, {true, true, false, true}};
  std::vector<Vec> rows{Vec{0.5, 0.5}, Vec{0.2, 0.8}, Vec{1.0, 0.0}, Vec{0.25, 0.75}};
  const double expected = -std::log(0.5) - std::log(0.8) - std::log(0.25);
  EXPECT_NEAR(loss_phrase(rows, labels), expected, 1e-15);
  rows[2] = Vec{};  // never read
  EXPECT_NEAR(loss_phrase(rows, labels), expected, 1e-15);
  labels.mask[2] = true;
  EXPECT_THROW(loss_phrase(rows, labels), Error);
}

TEST(GradFusedLogits, UniformExample) {
  const Vec g = grad_fused_logits(Vec{0, 0, 0, 0}, 0);
  EXPECT_EQ(g, (Vec{-0.75, 0.25, 0.25, 0.25}));
  EXPECT_EQ(code_of([] { grad_fused_logits(Vec{0, 0}, 2); }), Errc::TokenOutOfRange);
}

TEST(GradFusedLogits, SumsToZero) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 500; ++i) {
    const Vec s = test::random_logits(rng, 2 + rng() % 60);
    const Vec g = grad_fused_logits(s, static_cast<TokenId>(rng() % s.size()));
    EXPECT_NEAR(std::accumulate(g.begin(), g.end(), 0.0), 0.0, 1e-12);
  }
}

TEST(FiniteDiff, QuadraticIsExact) {
  const Vec x{0.3, -1.2, 2.0};
  auto f = [](std::span<const double> v) { return 0.5 * (v[0] * v[0] + 3 * v[1] * v[1] + v[2] * v[2]); };
  auto g = [](std::span<const double> v) { return Vec{v[0], 3 * v[1], v[2]}; };
  EXPECT_LT(finite_diff_check(f, g, x, Vec{1, 2, -1}, 1e-5), 1e-8);
  EXPECT_EQ(finite_diff_check(f, g, x, Vec{0, 0, 0}, 1e-5), 0.0);
  EXPECT_THROW(finite_diff_check(f, g, x, Vec{1, 0}, 1e-5), Error);
}

TEST(FiniteDiff, FusedLossWithRespectToFusedLogits) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const std::size_t V = 2 + rng() % 30;
    const Vec s = test::random_logits(rng, V);
    const auto target = static_cast<TokenId>(rng() % V);
    auto f = [&](std::span<const double> v) {
      const std::vector<Vec> rows{softmax(v)};
      return loss_token(rows, std::vector<TokenId>{target});
    };
    auto g = [&](std::span<const double> v) { return grad_fused_logits(v, target); };
    const Vec dir = g(s);
    EXPECT_LT(finite_diff_check(f, g, s, dir, 1e-5), 1e-5);
  }
}

TEST(FiniteDiff, LossThroughGateAndBothScorers) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 100; ++i) {
    const std::size_t V = 2 + rng() % 20;
    const Vec point = test::random_logits(rng, 2 * V, 4.0);  // [s_a; s_l]
    const auto target = static_cast<TokenId>(rng() % V);
    auto f = [&](std::span<const double> v) {
      const std::vector<Vec> rows{fuse_logits(v.first(V), v.subspan(V)).token_probs};
      return loss_token(rows, std::vector<TokenId>{target});
    };
    auto g = [&](std::span<const double> v) {
      const auto parts = token_loss_gradients(v.first(V), v.subspan(V), target);
      Vec out = parts.acoustic;
      out.insert(out.end(), parts.language.begin(), parts.language.end());
      return out;
    };
    EXPECT_LT(finite_diff_check(f, g, point, g(point), 1e-5), 1e-5);
    // every coordinate on its own
    for (std::size_t k = 0; k < 2 * V; ++k) {
      Vec e(2 * V, 0.0);
      e[k] = 1.0;
      const double rel = finite_diff_check(f, g, point, e, 1e-5);
      const double analytic = g(point)[k];
      // tiny components sit at the roundoff floor of the difference quotient
      if (std::abs(analytic) > 1e-3) {
        EXPECT_LT(rel, 1e-5) << "coordinate " << k;
      }
    }
  }
}

TEST(ForcedPathLoss, MatchesHandAssembledTerms) {
  const auto c = oracle::make_case(5, 2, 2, 9);
  const Tokenizer tok(c.vocab);
  std::vector<TokenId> ref = c.list[1].token_ids;
  ref.push_back(0);
  ref.insert(ref.end(), c.list[2].token_ids.begin(), c.list[2].token_ids.end());
  ref.push_back(c.vocab.eos_id());

  const auto a_file = std::make_shared<const ReplayFile>(record_replay(*c.acoustic(), ref, c.vocab, {}));
  const auto l_file = std::make_shared<const ReplayFile>(record_replay(*c.language(), ref, c.vocab, {}));
  const auto report = forced_path_loss(*open_replay(a_file, c.vocab), *open_replay(l_file, c.vocab), c.weights,
                                       c.list, ref);
  // the same quantity from the synthetic sessions directly
  const auto direct = forced_path_loss(*c.acoustic(), *c.language(), c.weights, c.list, ref);
  EXPECT_NEAR(report.loss_tok, direct.loss_tok, 1e-4);
  EXPECT_NEAR(report.loss_phr, direct.loss_phr, 1e-4);
  EXPECT_DOUBLE_EQ(report.total, report.loss_tok + report.loss_phr);

  // rebuild from the oracle distribution
  const auto pr = c.problem(ref.size());
  const auto labels = max_match_labels(ref, c.list);
  double tok_loss = 0.0, phr_loss = 0.0;
  for (std::size_t t = 0; t < ref.size(); ++t) {
    const std::vector<TokenId> prefix(ref.begin(), ref.begin() + static_cast<std::ptrdiff_t>(t));
    const auto d = pr.dist(prefix);
    Vec phr{1.0 - std::accumulate(d.begin() + static_cast<std::ptrdiff_t>(c.vocab.size()), d.end(), 0.0)};
    phr.insert(phr.end(), d.begin() + static_cast<std::ptrdiff_t>(c.vocab.size()), d.end());
    tok_loss -= std::log(d[ref[t]] / phr[0]);
    if (labels.mask[t]) phr_loss -= std::log(phr[labels.labels[t]]);
  }
  EXPECT_NEAR(direct.loss_tok, tok_loss, 1e-9);
  EXPECT_NEAR(direct.loss_phr, phr_loss, 1e-9);
}

}  // namespace
}  // namespace mgf
