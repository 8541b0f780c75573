// Copyright 2026 The aestk Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "aestk/analyze.h"

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "oracle/synthetic.h"
#include "support/fixtures.h"

namespace aestk {
namespace {

using testing::CategoryCount;
using testing::PrevalenceCorpus;

const std::vector<Category> kThree = {Category::kConspiracy, Category::kFinance,
                                      Category::kWellness};

LabeledPost Make(const std::string& id, Category c, int label, int64_t likes,
                 int64_t comments, int64_t shares, int64_t views) {
  LabeledPost p;
  p.post.post_id = id;
  p.post.category = c;
  p.post.like_count = likes;
  p.post.comment_count = comments;
  p.post.share_count = shares;
  p.post.view_count = views;
  p.label = label;
  return p;
}

TEST(LabeledCorpusTest, HumanLabelsWin) {
  std::vector<Post> posts(3);
  posts[0].post_id = "a";
  posts[1].post_id = "b";
  posts[2].post_id = "c";
  auto corpus = BuildLabeledCorpus(posts, {{"a", 1}}, {{"a", 0}, {"b", 0}, {"c", 1}});
  ASSERT_TRUE(corpus.ok());
  EXPECT_EQ(corpus->posts[0].label, 1);
  EXPECT_EQ(corpus->posts[0].source, LabelSource::kHuman);
  EXPECT_EQ(corpus->posts[2].source, LabelSource::kModel);
  EXPECT_FALSE(BuildLabeledCorpus(posts, {}, {{"a", 0}}).ok());
  EXPECT_FALSE(BuildLabeledCorpus(posts, {{"a", 2}}, {{"b", 0}, {"c", 0}}).ok());
}

TEST(LabelMapTest, SkipsUnclearAndRejectsDuplicates) {
  auto m = ParseLabelMap("item_id\tmethod\tlabel\nx\tds\t1\ny\tds\tunclear\nz\tds\t0\n");
  ASSERT_TRUE(m.ok()) << m.status();
  EXPECT_EQ(*m, (std::map<std::string, int>{{"x", 1}, {"z", 0}}));
  EXPECT_FALSE(ParseLabelMap("post_id\tlabel\nx\t1\nx\t0\n").ok());
  EXPECT_FALSE(ParseLabelMap("post_id\tlabel\nx\t3\n").ok());
  EXPECT_FALSE(ParseLabelMap("id\tlabel\nx\t1\n").ok());
}

TEST(BootstrapTest, ContainsPointAndIsSeeded) {
  std::vector<int> outcomes(50, 0);
  outcomes[0] = 1;
  auto a = BootstrapProportion(outcomes, {500, 0.95, 4});
  auto b = BootstrapProportion(outcomes, {500, 0.95, 4});
  ASSERT_TRUE(a.ok() && b.ok());
  EXPECT_EQ(a->lower, b->lower);
  EXPECT_EQ(a->upper, b->upper);
  EXPECT_LE(a->lower, 0.02);
  EXPECT_GE(a->upper, 0.02);
  std::vector<int> none(10, 0);
  auto degenerate = BootstrapProportion(none, {});
  ASSERT_TRUE(degenerate.ok());
  EXPECT_EQ(degenerate->lower, 0.0);
  EXPECT_EQ(degenerate->upper, 0.0);
  EXPECT_FALSE(BootstrapProportion(std::vector<int>{}, {}).ok());
  EXPECT_FALSE(BootstrapProportion(none, {0, 0.95, 0}).ok());
}

TEST(BootstrapTest, WidthTracksTheBinomialStandardError) {
  std::vector<int> outcomes(2000, 0);
  for (int i = 0; i < 600; ++i) outcomes[i] = 1;
  auto ci = BootstrapProportion(outcomes, {4000, 0.95, 1});
  ASSERT_TRUE(ci.ok());
  auto [lo, hi] = oracle::BinomialBand(0.3, 2000, 1.959964);
  const double half = (hi - lo) / 2;
  EXPECT_NEAR(ci->lower, lo, 0.15 * half);
  EXPECT_NEAR(ci->upper, hi, 0.15 * half);
}

TEST(PrevalenceTest, RowsMatchCountsAndPoolOverall) {
  const CategoryCount counts[] = {{Category::kConspiracy, 451, 1000},
                                  {Category::kFinance, 43, 1000},
                                  {Category::kWellness, 13, 1000}};
  auto report = PrevalenceByCategory(PrevalenceCorpus(counts), kThree, {200, 0.95, 0});
  ASSERT_TRUE(report.ok());
  ASSERT_EQ(report->rows.size(), 4u);
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(report->rows[i].group, CategoryName(kThree[i]));
    EXPECT_EQ(report->rows[i].positives, counts[i].aes);
    EXPECT_DOUBLE_EQ(report->rows[i].proportion, counts[i].aes / 1000.0);
    EXPECT_LE(report->rows[i].ci.lower, report->rows[i].proportion);
    EXPECT_GE(report->rows[i].ci.upper, report->rows[i].proportion);
  }
  EXPECT_EQ(report->rows[3].group, kOverallGroup);
  EXPECT_EQ(report->rows[3].positives, 507);
  EXPECT_EQ(report->rows[3].total, 3000);
  const Table t = report->ToTable();
  EXPECT_EQ(t.rows[0][4], "45.1");
  EXPECT_EQ(t.rows[3][4], "16.9");
}

TEST(PrevalenceTest, MissingCategoryIsWarnedAndOmitted) {
  const CategoryCount counts[] = {{Category::kConspiracy, 1, 2}};
  auto report = PrevalenceByCategory(PrevalenceCorpus(counts), kThree, {50, 0.95, 0});
  ASSERT_TRUE(report.ok());
  EXPECT_EQ(report->rows.size(), 2u);
  EXPECT_EQ(report->warnings.size(), 2u);
}

TEST(PrevalenceTest, AcrossRunsSpread) {
  std::vector<LabeledCorpus> runs;
  for (int aes : {40, 50, 60}) {
    const CategoryCount c[] = {{Category::kFinance, aes, 100}};
    runs.push_back(PrevalenceCorpus(c));
  }
  const std::vector<Category> finance = {Category::kFinance};
  auto report = PrevalenceAcrossRuns(runs, finance, {50, 0.95, 0});
  ASSERT_TRUE(report.ok());
  const auto& row = report->rows[0];
  ASSERT_TRUE(row.run_stats.has_value());
  EXPECT_NEAR(row.run_stats->mean, 0.5, 1e-12);
  EXPECT_NEAR(row.run_stats->se, 0.1 / std::sqrt(3.0), 1e-12);
  EXPECT_DOUBLE_EQ(row.proportion, 0.4);
}

TEST(EngagementTest, MeanAndSeByCategoryAndLabel) {
  LabeledCorpus c;
  c.posts = {Make("a", Category::kFinance, 1, 10, 1, 0, 0),
             Make("b", Category::kFinance, 1, 20, 3, 0, 100),
             Make("c", Category::kFinance, 0, 5, 0, 2, 50),
             Make("d", Category::kConspiracy, 0, 1, 1, 1, 1)};
  EngagementReport r = EngagementByLabel(c, {});
  ASSERT_EQ(r.rows.size(), 3u);
  EXPECT_EQ(r.rows[0].category, Category::kConspiracy);
  EXPECT_EQ(r.rows[1].category, Category::kFinance);
  EXPECT_EQ(r.rows[1].label, 0);
  const EngagementRow& aes = r.rows[2];
  EXPECT_EQ(aes.posts, 2);
  const std::vector<double> likes = {10, 20};
  auto [mean, se] = oracle::MeanSeLonghand(likes);
  EXPECT_DOUBLE_EQ(aes.likes.mean, mean);
  EXPECT_DOUBLE_EQ(aes.likes.se, se);
  EXPECT_FALSE(aes.views.has_value());
  EngagementReport with_views = EngagementByLabel(c, {true});
  ASSERT_TRUE(with_views.rows[2].views.has_value());
  EXPECT_DOUBLE_EQ(with_views.rows[2].views->mean, 50);
}

TEST(AgreementTest, SharesPerGroup) {
  auto [corpus, comments] = testing::AgreementFixture(693, 626);
  auto report = AgreementDistribution(comments, corpus);
  ASSERT_TRUE(report.ok());
  ASSERT_EQ(report->rows.size(), 2u);
  EXPECT_EQ(report->rows[0].label, 0);
  EXPECT_NEAR(report->rows[0].share(CommentAgreement::kAgree), 0.626, 1e-12);
  EXPECT_NEAR(report->rows[1].share(CommentAgreement::kAgree), 0.693, 1e-12);
  EXPECT_EQ(report->rows[1].total(), 1000);
  comments.push_back({"orphan", "missing", CommentAgreement::kAgree});
  EXPECT_FALSE(AgreementDistribution(comments, corpus).ok());
}

TEST(AgreementTest, ParseFusedComments) {
  auto parsed = ParseFusedComments(
      "comment_id\tpost_id\tagreement\nc1\tp1\tagree\nc2\tp1\tunclear\n");
  ASSERT_TRUE(parsed.ok()) << parsed.status();
  EXPECT_EQ((*parsed)[1].agreement, CommentAgreement::kUnclear);
  EXPECT_FALSE(ParseFusedComments("comment_id\tpost_id\tagreement\nc\tp\tmaybe\n").ok());
}

TEST(CodebookTest, SingleSelectColumnsSumToOne) {
  Codebook style = VisualStyleCodebook();
  ASSERT_TRUE(ValidateCodebook(style).ok());
  EXPECT_FALSE(style.multi_select);
  std::vector<CodedPost> posts;
  for (int i = 0; i < 9; ++i) {
    posts.push_back({"p" + std::to_string(i), kThree[i % 3],
                     {style.codes[i % style.codes.size()].id}});
  }
  auto table = CodebookTabulate(posts, style);
  ASSERT_TRUE(table.ok()) << table.status();
  for (size_t j = 0; j < table->categories.size(); ++j) {
    double sum = 0;
    for (const auto& row : table->proportions) sum += row[j];
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
  posts[0].codes.push_back(style.codes[1].id);
  EXPECT_FALSE(CodebookTabulate(posts, style).ok());
  posts[0].codes = {"not-a-code"};
  EXPECT_FALSE(CodebookTabulate(posts, style).ok());
}

TEST(CodebookTest, MultiSelectMayExceedOne) {
  Codebook inst = InstitutionsCodebook();
  ASSERT_TRUE(inst.multi_select);
  std::vector<CodedPost> posts = {
      {"p", Category::kConspiracy, {inst.codes[0].id, inst.codes[1].id}}};
  auto table = CodebookTabulate(posts, inst);
  ASSERT_TRUE(table.ok());
  double sum = 0;
  for (const auto& row : table->proportions) sum += row[0];
  EXPECT_NEAR(sum, 2.0, 1e-12);
  auto parsed = ParseCodebook(R"({"name":"x","multi_select":false,"codes":[{"id":"a","description":"A"}]})");
  ASSERT_TRUE(parsed.ok());
  EXPECT_FALSE(ParseCodebook(R"({"name":"x","codes":[{"id":"a"},{"id":"a"}]})").ok());
}

TEST(CrossPlatformTest, RanksWithTiesAndConsistency) {
  const CategoryCount a[] = {{Category::kConspiracy, 40, 100},
                             {Category::kFinance, 10, 100},
                             {Category::kWellness, 10, 100}};
  const CategoryCount b[] = {{Category::kConspiracy, 20, 100},
                             {Category::kFinance, 5, 100},
                             {Category::kWellness, 8, 100}};
  std::vector<PlatformCorpus> platforms = {{"tiktok", PrevalenceCorpus(a)},
                                           {"youtube", PrevalenceCorpus(b)}};
  auto report = CrossPlatform(platforms, kThree);
  ASSERT_TRUE(report.ok());
  EXPECT_EQ(report->rank[0], (std::vector<std::optional<int>>{1, 2, 2}));
  EXPECT_EQ(report->rank[1], (std::vector<std::optional<int>>{1, 3, 2}));
  EXPECT_EQ(report->rank_consistent, (std::vector<bool>{true, false, true}));
  EXPECT_FALSE(report->all_rank_consistent());
  EXPECT_FALSE(CrossPlatform({}, kThree).ok());
}

}  // namespace
}  // namespace aestk
