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

#include <random>

#include <gtest/gtest.h>

#include "mgfusion/metrics.hpp"
#include "oracles.hpp"

namespace mgf {
namespace {

using Words = std::vector<std::string>;

TEST(Normalize, EnglishExamples) {
  EXPECT_EQ(normalize("Send a  Message!", Language::En), "send a message");
  EXPECT_EQ(normalize("  Hello,World  ", Language::En), "hello world");
  EXPECT_EQ(normalize("ÉCOLE Überall", Language::En), "école überall");
  EXPECT_EQ(normalize("...", Language::En), "");
}

TEST(Normalize, ChineseDropsSpacesAndPunctuation) {
  EXPECT_EQ(normalize("你 好。", Language::Zh), "你好");
  EXPECT_EQ(normalize("给，李明 发消息！", Language::Zh), "给李明发消息");
}

TEST(Normalize, Idempotent) {
  std::mt19937_64 rng(5);
  const std::vector<std::string> pieces{"A", "b", " ", "  ", ",", "!", "É", "你", "。", "\t", "x-y", "Z"};
  for (int i = 0; i < 500; ++i) {
    std::string s;
    for (std::size_t k = 0, n = rng() % 12; k < n; ++k) s += pieces[rng() % pieces.size()];
    for (Language lang : {Language::En, Language::Zh}) {
      const auto once = normalize(s, lang);
      EXPECT_EQ(normalize(once, lang), once) << s;
    }
  }
}

TEST(SplitUnits, CharsSkipWhitespace) {
  EXPECT_EQ(split_units("你 好", Unit::Char), (Words{"你", "好"}));
  EXPECT_EQ(split_units("ab c", Unit::Char), (Words{"a", "b", "c"}));
  EXPECT_EQ(split_units(" ab  c ", Unit::Word), (Words{"ab", "c"}));
  EXPECT_TRUE(split_units("", Unit::Word).empty());
}

TEST(Align, HandExamples) {
  const Words ref{"a", "b", "c"};
  const auto same = align<std::string>(ref, ref);
  EXPECT_EQ(same.distance(), 0u);
  ASSERT_EQ(same.ops.size(), 3u);
  for (const auto& op : same.ops) EXPECT_EQ(op.kind, OpKind::Match);

  const auto sub = align<std::string>(ref, Words{"a", "x", "c"});
  EXPECT_EQ(sub.distance(), 1u);
  EXPECT_EQ(sub.ops[1].kind, OpKind::Substitute);

  const auto del = align<std::string>(ref, Words{"a", "c"});
  EXPECT_EQ(del.distance(), 1u);
  EXPECT_EQ(del.ops[1].kind, OpKind::Delete);
  EXPECT_EQ(del.ops[1].ref_pos, 1u);

  const auto ins = align<std::string>(Words{}, Words{"q", "r"});
  EXPECT_EQ(ins.distance(), 2u);
  EXPECT_EQ(ins.ops[0].kind, OpKind::Insert);
}

TEST(BiasedReport, KimAttendsYale) {
  const std::vector<std::string> kws{"yale"};
  const auto r = biased_report("kim attends yale", "kim attends jail", kws, Unit::Word);
  EXPECT_DOUBLE_EQ(r.overall, 1.0 / 3.0);
  EXPECT_EQ(r.biased, 1.0);
  EXPECT_EQ(r.unbiased, 0.0);
  EXPECT_EQ(r.recall, 0.0);
  EXPECT_EQ(r.counts.errors_b, 1u);
  EXPECT_EQ(r.counts.errors_u, 0u);
  EXPECT_EQ(r.to_json()["normalizer_version"], "mgf-basic-1");
}

TEST(BiasedReport, PerfectHypothesis) {
  const std::vector<std::string> kws{"yale", "kim"};
  const auto r = biased_report("kim attends yale", "kim attends yale", kws, Unit::Word);
  EXPECT_EQ(r.overall, 0.0);
  EXPECT_EQ(r.biased, 0.0);
  EXPECT_EQ(r.unbiased, 0.0);
  EXPECT_EQ(r.recall, 1.0);
  EXPECT_EQ(r.counts.keywords_total, 2u);
}

TEST(BiasedReport, NoKeywordUnitsLeavesBiasedNull) {
  const std::vector<std::string> kws{"boston"};
  const auto r = biased_report("a b c d", "a x c", kws, Unit::Word);
  EXPECT_FALSE(r.biased.has_value());
  EXPECT_FALSE(r.recall.has_value());
  ASSERT_TRUE(r.unbiased.has_value());
  EXPECT_DOUBLE_EQ(*r.unbiased, r.overall);
  EXPECT_TRUE(r.to_json()["biased"].is_null());
}

TEST(BiasedReport, AllKeywordUnitsLeavesUnbiasedNull) {
  const std::vector<std::string> kws{"new york"};
  const auto r = biased_report("new york", "new york", kws, Unit::Word);
  EXPECT_FALSE(r.unbiased.has_value());
  EXPECT_EQ(r.biased, 0.0);
}

TEST(BiasedReport, InsertionAttribution) {
  const std::vector<std::string> kws{"yale"};
  // after a keyword unit: biased region
  const auto after = biased_report("a yale b", "a yale x b", kws, Unit::Word);
  EXPECT_EQ(after.counts.errors_b, 1u);
  EXPECT_EQ(after.counts.errors_u, 0u);
  EXPECT_EQ(after.recall, 1.0);
  // before any reference unit: unbiased
  const auto start = biased_report("yale b", "x yale b", kws, Unit::Word);
  EXPECT_EQ(start.counts.errors_b, 0u);
  EXPECT_EQ(start.counts.errors_u, 1u);
}

TEST(BiasedReport, PartialKeywordIsNotRecalled) {
  const std::vector<std::string> kws{"elisa toffoli"};
  const auto r = biased_report("to elisa toffoli", "to elisa tofoli", kws, Unit::Word);
  EXPECT_EQ(r.recall, 0.0);
  EXPECT_EQ(r.biased, 0.5);
}

TEST(BiasedReport, CharUnitsIgnoreSpacing) {
  const std::vector<std::string> kws{"李 明"};
  const auto a = biased_report("给李明发消息", "给李铭发消息", kws, Unit::Char);
  const auto b = biased_report("给 李明 发 消息", "给李铭 发消息", kws, Unit::Char);
  EXPECT_EQ(a.to_json(), b.to_json());
  EXPECT_EQ(a.counts.ref_units, 6u);
  EXPECT_EQ(a.counts.biased_units, 2u);
  EXPECT_EQ(a.biased, 0.5);
}

TEST(BiasedReport, EmptyReferenceRejected) {
  const std::vector<std::string> kws;
  EXPECT_THROW(biased_report("", "x", kws, Unit::Word), Error);
}

TEST(Aggregate, SinglePassesThroughAndPoolsCounts) {
  const std::vector<std::string> kws{"yale"};
  const auto one = biased_report("kim attends yale", "kim attends jail", kws, Unit::Word);
  const std::vector<BiasedReport> single{one};
  EXPECT_EQ(aggregate(single).to_json(), one.to_json());

  ReportCounts small;
  small.ref_units = 10;
  small.errors_u = 1;
  ReportCounts clean;
  clean.ref_units = 10;
  const std::vector<BiasedReport> pair{BiasedReport::from_counts(small, Unit::Word),
                                       BiasedReport::from_counts(clean, Unit::Word)};
  EXPECT_DOUBLE_EQ(aggregate(pair).overall, 1.0 / 20.0);
}

TEST(Aggregate, MicroNotMacro) {
  ReportCounts tiny;
  tiny.ref_units = 1;
  tiny.errors_u = 1;
  ReportCounts big;
  big.ref_units = 99;
  const std::vector<BiasedReport> reports{BiasedReport::from_counts(tiny, Unit::Word),
                                          BiasedReport::from_counts(big, Unit::Word)};
  const auto agg = aggregate(reports);
  EXPECT_DOUBLE_EQ(agg.overall, 1.0 / 100.0);
  EXPECT_NE(agg.overall, (reports[0].overall + reports[1].overall) / 2);
  EXPECT_THROW(aggregate(std::vector<BiasedReport>{}), Error);
}

Words random_words(std::mt19937_64& rng, std::size_t max_len) {
  static const Words lexicon{"kim", "yale", "new", "york", "city", "to", "a", "jail"};
  Words w(rng() % (max_len + 1));
  for (auto& s : w) s = lexicon[rng() % lexicon.size()];
  return w;
}

std::string join(const Words& w) {
  std::string s;
  for (const auto& x : w) s += (s.empty() ? "" : " ") + x;
  return s;
}

TEST(BiasedReport, DecompositionEqualsEditDistance) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 1000; ++trial) {
    Words ref = random_words(rng, 12);
    if (ref.empty()) ref.push_back("kim");
    const Words hyp = random_words(rng, 12);
    std::vector<std::string> kws;
    for (std::size_t k = 0, n = rng() % 3; k < n; ++k) kws.push_back(join(random_words(rng, 2)));
    std::erase(kws, std::string{});
    const auto r = biased_report(join(ref), join(hyp), kws, Unit::Word);
    EXPECT_EQ(r.counts.errors_b + r.counts.errors_u, oracle::levenshtein(ref, hyp));

    // the edit script replays ref into hyp
    const auto a = align<std::string>(ref, hyp);
    Words rebuilt;
    for (const auto& op : a.ops)
      if (op.hyp_pos) rebuilt.push_back(hyp[*op.hyp_pos]);
    EXPECT_EQ(rebuilt, hyp);
    if (ref == hyp && r.recall) {
      EXPECT_EQ(*r.recall, 1.0);
    }
  }
}

}  // namespace
}  // namespace mgf
