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
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "mgfusion/token_fusion.hpp"
#include "test_support.hpp"

namespace mgf {
namespace {

TEST(Entropy, ClosedForms) {
  EXPECT_EQ(entropy(Vec{1, 0, 0, 0}), 0.0);
  EXPECT_NEAR(entropy(Vec{0.25, 0.25, 0.25, 0.25}), -4.0 * (0.25 * std::log(0.25)), 1e-15);
  EXPECT_NEAR(entropy(Vec{0.25, 0.25, 0.25, 0.25}), 1.386294, 1e-6);
  EXPECT_NEAR(entropy(Vec{0.5, 0.5, 0, 0}), 0.693147, 1e-6);
}

TEST(Entropy, RejectsNonDistributions) {
  EXPECT_THROW(entropy(Vec{0.5, 0.4}), Error);
  EXPECT_THROW(entropy(Vec{1.5, -0.5}), Error);
  try {
    entropy(Vec{0.2, 0.2});
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NotADistribution);
  }
}

TEST(Entropy, WithinZeroAndLogV) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 2000; ++i) {
    const std::size_t n = 1 + rng() % 64;
    const Vec p = test::random_distribution(rng, n);
    const double h = entropy(p);
    EXPECT_GE(h, 0.0);
    EXPECT_LE(h, std::log(static_cast<double>(n)) + 1e-12);
  }
}

TEST(FuseLogits, ConfidentAcousticKeepsArgmax) {
  const Vec s_a{100, 0, 0, 0};
  // s_l at every corner of the [-10, 10]^4 box
  for (int mask = 0; mask < 16; ++mask) {
    Vec s_l(4);
    for (int i = 0; i < 4; ++i) s_l[i] = (mask >> i) & 1 ? 10.0 : -10.0;
    const auto step = fuse_logits(s_a, s_l);
    EXPECT_NEAR(step.gate, 0.5, 1e-12);
    const auto argmax = std::max_element(step.token_probs.begin(), step.token_probs.end()) - step.token_probs.begin();
    EXPECT_EQ(argmax, 0);
  }
}

TEST(FuseLogits, UniformAcousticGivesGateFourFifths) {
  const auto step = fuse_logits(Vec{0, 0, 0, 0}, Vec{1, -2, 3, 0.5});
  // sigmoid(ln 4) = 1 / (1 + 1/4)
  EXPECT_NEAR(step.gate, 0.8, 1e-15);
  EXPECT_NEAR(step.fused_logits[2], 0.8 * 3, 1e-15);
}

TEST(FuseLogits, ConstantLanguageLeavesAcousticDistribution) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 200; ++i) {
    const Vec s_a = test::random_logits(rng, 12);
    const Vec s_l(12, std::uniform_real_distribution<double>(-10, 10)(rng));
    const auto step = fuse_logits(s_a, s_l);
    const Vec p = softmax(s_a);
    for (std::size_t k = 0; k < p.size(); ++k) EXPECT_NEAR(step.token_probs[k], p[k], 1e-12);
  }
}

TEST(FuseLogits, ZeroLanguageReducesToAcousticSoftmax) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    const Vec s_a = test::random_logits(rng, 9);
    const auto step = fuse_logits(s_a, Vec(9, 0.0));
    EXPECT_EQ(step.token_probs, softmax(s_a));
  }
}

TEST(FuseLogits, Errors) {
  auto code_of = [](auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::InvariantViolation;
  };
  EXPECT_EQ(code_of([] { fuse_logits(Vec{1, 2}, Vec{1, 2, 3}); }), Errc::LengthMismatch);
  EXPECT_EQ(code_of([] { fuse_logits(Vec{1, std::numeric_limits<double>::infinity()}, Vec{1, 2}); }),
            Errc::NonFiniteInput);
  EXPECT_EQ(code_of([] { fuse_logits(Vec{1, 2}, Vec{std::nan(""), 2}); }), Errc::NonFiniteInput);
}

TEST(TokenProbOf, HandComputedSoftmax) {
  FusedTokenStep uniform;
  uniform.fused_logits = {2, 2, 2, 2};
  uniform.token_probs = softmax(uniform.fused_logits);
  for (TokenId t = 0; t < 4; ++t) EXPECT_DOUBLE_EQ(token_prob_of(uniform, t), 0.25);

  FusedTokenStep two;
  two.fused_logits = {std::log(3.0), 0.0};
  two.token_probs = softmax(two.fused_logits);
  EXPECT_NEAR(token_prob_of(two, 0), 0.75, 1e-15);
  EXPECT_NEAR(token_prob_of(two, 1), 0.25, 1e-15);
  EXPECT_THROW(token_prob_of(two, 2), Error);
}

TEST(GateProperties, MonotoneTowardUniform) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng() % 30;
    Vec start(n, 0.0);
    if (trial % 2 == 0) {
      start[rng() % n] = 1.0;
    } else {
      start = test::random_distribution(rng, n);
    }
    double prev = -1.0;
    for (int step = 0; step <= 20; ++step) {
      const double lambda = step / 20.0;
      Vec p(n);
      for (std::size_t i = 0; i < n; ++i) p[i] = (1 - lambda) * start[i] + lambda / static_cast<double>(n);
      const double g = uncertainty_gate(entropy(p));
      EXPECT_GE(g, prev - 1e-15);
      prev = g;
    }
  }
}

TEST(GateProperties, Bounds) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = 2 + rng() % 100;
    const auto step = fuse_logits(test::random_logits(rng, n, 20.0), test::random_logits(rng, n));
    EXPECT_GE(step.gate, 0.5);
    EXPECT_LT(step.gate, sigmoid(std::log(static_cast<double>(n))) + 1e-12);
    double mass = 0.0;
    for (double p : step.token_probs) mass += p;
    EXPECT_NEAR(mass, 1.0, 1e-9);
  }
}

TEST(GateProperties, ShiftInvariance) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 200; ++trial) {
    const Vec s_a = test::random_logits(rng, 16);
    const Vec s_l = test::random_logits(rng, 16);
    const auto base = fuse_logits(s_a, s_l);
    for (double c : {-5.0, 0.3, 7.0}) {
      Vec a2 = s_a, l2 = s_l;
      for (double& v : a2) v += c;
      for (double& v : l2) v += c;
      const auto shifted_a = fuse_logits(a2, s_l);
      const auto shifted_l = fuse_logits(s_a, l2);
      for (std::size_t k = 0; k < 16; ++k) {
        EXPECT_NEAR(shifted_a.token_probs[k], base.token_probs[k], 1e-12);
        EXPECT_NEAR(shifted_l.token_probs[k], base.token_probs[k], 1e-12);
      }
      EXPECT_NEAR(shifted_a.gate, base.gate, 1e-12);
    }
  }
}

}  // namespace
}  // namespace mgf
