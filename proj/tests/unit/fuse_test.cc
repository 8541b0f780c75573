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


#include "aestk/fuse.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "oracle/em_reference.h"
#include "oracle/synthetic.h"
#include "support/fixtures.h"

namespace aestk {
namespace {

using oracle::Instance;
using testing::ToMatrix;

double MaxPosteriorGap(const std::vector<FusedLabel>& got,
                       const oracle::EmFit& want) {
  double gap = 0;
  for (size_t i = 0; i < got.size(); ++i) {
    for (size_t k = 0; k < got[i].posterior.size(); ++k) {
      gap = std::max(gap, std::abs(got[i].posterior[k] - want.posterior[i][k]));
    }
  }
  return gap;
}

TEST(LabelMatrixTest, RejectsMalformedEntries) {
  std::vector<LabelEntry> dup = {{0, 0, 1}, {0, 0, 0}};
  EXPECT_FALSE(LabelMatrix::Create({"i"}, {"a"}, dup, 2).ok());
  std::vector<LabelEntry> bad_label = {{0, 0, 2}};
  EXPECT_FALSE(LabelMatrix::Create({"i"}, {"a"}, bad_label, 2).ok());
  std::vector<LabelEntry> bad_index = {{1, 0, 0}};
  EXPECT_FALSE(LabelMatrix::Create({"i"}, {"a"}, bad_index, 2).ok());
  std::vector<LabelEntry> unlabeled = {{0, 0, 0}};
  EXPECT_FALSE(LabelMatrix::Create({"i", "j"}, {"a"}, unlabeled, 2).ok());
}

TEST(LabelMatrixTest, VideoRecordsBinarizeAndDropPadding) {
  std::vector<AnnotationRecord> records = {
      {"b", "v1", Target::kVideo, 1, 0, "t", false},
      {"a", "v1", Target::kVideo, 4, 0, "t", false},
      {"a", "v2", Target::kVideo, 2, 0, "t", false},
      {"c", "v3", Target::kVideo, 1, 0, "t", true},
      {"a", "c1", Target::kComment, 5, 0, "t", false},
  };
  auto m = VideoLabelMatrix(records);
  ASSERT_TRUE(m.ok()) << m.status();
  EXPECT_EQ(m->items(), (std::vector<std::string>{"v1", "v2"}));
  EXPECT_EQ(m->annotators(), (std::vector<std::string>{"a", "b"}));
  // v1: a said 4 (non-AES = 0), b said 1 (AES = 1).
  EXPECT_EQ(m->labels_for(0), (std::vector<std::pair<int, int>>{{0, 0}, {1, 1}}));
  auto c = CommentLabelMatrix(records);
  ASSERT_TRUE(c.ok());
  EXPECT_EQ(c->num_classes(), 3);
  EXPECT_EQ(c->labels_for(0), (std::vector<std::pair<int, int>>{{0, 1}}));
}

TEST(MajorityVoteTest, FractionsAndTies) {
  Instance x;
  x.labels = {{1, 1, 0}, {1, 0, -1}, {0, 0, 0}};
  auto fused = MajorityVote(ToMatrix(x));
  ASSERT_TRUE(fused.ok());
  EXPECT_EQ((*fused)[0].label, 1);
  EXPECT_NEAR((*fused)[0].posterior[1], 2.0 / 3.0, 1e-15);
  EXPECT_FALSE((*fused)[1].label.has_value());
  EXPECT_EQ((*fused)[2].label, 0);
}

TEST(DawidSkeneTest, MatchesBruteForceOracleOnAllSmallBinaryMatrices) {
  for (int items = 1; items <= 3; ++items) {
    for (int annotators = 1; annotators <= 3; ++annotators) {
      const int cells = items * annotators;
      for (int mask = 0; mask < (1 << cells); ++mask) {
        Instance x;
        x.labels.assign(items, std::vector<int>(annotators));
        for (int c = 0; c < cells; ++c) {
          x.labels[c / annotators][c % annotators] = (mask >> c) & 1;
        }
        auto fit = DawidSkene(ToMatrix(x));
        ASSERT_TRUE(fit.ok());
        EXPECT_LE(MaxPosteriorGap(fit->labels, oracle::BruteForceDawidSkene(x)), 1e-4)
            << "items=" << items << " annotators=" << annotators << " mask=" << mask;
      }
    }
  }
}

TEST(DawidSkeneTest, MatchesReferenceOnSparseMulticlassInstances) {
  oracle::TestRng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    Instance x = oracle::RandomInstance(2 + rng.Below(12), 2 + rng.Below(4),
                                        2 + rng.Below(2), 0.7, rng);
    auto fit = DawidSkene(ToMatrix(x));
    ASSERT_TRUE(fit.ok());
    const oracle::EmFit want = oracle::ReferenceDawidSkene(x);
    EXPECT_LE(MaxPosteriorGap(fit->labels, want), 1e-4) << "trial " << trial;
    EXPECT_EQ(fit->model.iterations, want.iterations) << "trial " << trial;
  }
}

TEST(DawidSkeneTest, TraceIsMonotoneAndOptionsAreHonoured) {
  oracle::TestRng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    Instance x = oracle::RandomInstance(20, 5, 2, 0.6, rng);
    EmOptions options;
    options.max_iters = 7;
    options.tol = 0;
    auto fit = DawidSkene(ToMatrix(x), options);
    ASSERT_TRUE(fit.ok());
    EXPECT_EQ(fit->model.iterations, 7);
    EXPECT_FALSE(fit->model.converged);
    const auto& trace = fit->model.log_likelihood_trace;
    for (size_t t = 1; t < trace.size(); ++t) EXPECT_GE(trace[t], trace[t - 1] - 1e-8);
  }
}

TEST(DawidSkeneTest, ItemAndAnnotatorPermutationInvariance) {
  oracle::TestRng rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    Instance x = oracle::RandomInstance(15, 4, 2, 0.8, rng);
    std::vector<int> item_order(x.items()), ann_order(x.annotators());
    std::iota(item_order.begin(), item_order.end(), 0);
    std::iota(ann_order.begin(), ann_order.end(), 0);
    std::reverse(item_order.begin(), item_order.end());
    std::rotate(ann_order.begin(), ann_order.begin() + 1, ann_order.end());
    Instance y = x;
    for (int i = 0; i < x.items(); ++i) {
      for (int j = 0; j < x.annotators(); ++j) {
        y.labels[i][j] = x.labels[item_order[i]][ann_order[j]];
      }
    }
    auto a = DawidSkene(ToMatrix(x));
    auto b = DawidSkene(ToMatrix(y));
    ASSERT_TRUE(a.ok() && b.ok());
    for (int i = 0; i < x.items(); ++i) {
      for (int k = 0; k < 2; ++k) {
        EXPECT_NEAR(b->labels[i].posterior[k],
                    a->labels[item_order[i]].posterior[k], 1e-9);
      }
    }
  }
}

TEST(DawidSkeneTest, ClassRelabelingPermutesPosteriors) {
  oracle::TestRng rng(13);
  for (int trial = 0; trial < 30; ++trial) {
    Instance x = oracle::RandomInstance(12, 3, 2, 0.9, rng);
    Instance flipped = x;
    for (auto& row : flipped.labels) {
      for (int& l : row) if (l >= 0) l = 1 - l;
    }
    auto a = DawidSkene(ToMatrix(x));
    auto b = DawidSkene(ToMatrix(flipped));
    ASSERT_TRUE(a.ok() && b.ok());
    for (int i = 0; i < x.items(); ++i) {
      EXPECT_NEAR(a->labels[i].posterior[0], b->labels[i].posterior[1], 1e-9);
    }
  }
}

TEST(DawidSkeneTest, RecoversPlantedTruthNearTheBayesRate) {
  const double accuracy[] = {0.85, 0.8, 0.75, 0.7, 0.65};
  for (uint64_t seed : {1, 2, 3, 99}) {
    oracle::Planted p = oracle::PlantedInstance(300, accuracy, 0.4, seed);
    auto fit = DawidSkene(ToMatrix(p.instance));
    ASSERT_TRUE(fit.ok());
    const oracle::EmFit reference = oracle::ReferenceDawidSkene(p.instance);
    // The posterior argmax under the true parameters bounds what any
    // estimator can do on this draw.
    int em_correct = 0, bayes_correct = 0;
    for (int i = 0; i < 300; ++i) {
      EXPECT_EQ(fit->labels[i].label.value_or(-1),
                oracle::ArgmaxOrTie(reference.posterior[i]));
      em_correct += fit->labels[i].label == p.truth[i];
      double log_odds = std::log(0.4 / 0.6);
      for (int j = 0; j < 5; ++j) {
        const double r = accuracy[j] / (1 - accuracy[j]);
        log_odds += p.instance.labels[i][j] == 1 ? std::log(r) : -std::log(r);
      }
      bayes_correct += (log_odds > 0 ? 1 : 0) == p.truth[i];
    }
    EXPECT_GE(em_correct, bayes_correct - 6) << "seed " << seed;
    EXPECT_NEAR(fit->model.class_priors[1], 0.4, 0.08) << "seed " << seed;
  }
}

TEST(DawidSkeneTest, DegenerateShapesStillFit) {
  Instance one_item;
  one_item.labels = {{1, 1, 0}};
  auto fit = DawidSkene(ToMatrix(one_item));
  ASSERT_TRUE(fit.ok());
  EXPECT_TRUE(fit->model.degenerate);
  EXPECT_LE(MaxPosteriorGap(fit->labels, oracle::BruteForceDawidSkene(one_item)), 1e-4);
}

TEST(MaceTest, FlagsTheSpammer) {
  for (uint64_t seed = 0; seed < 5; ++seed) {
    oracle::Planted p = oracle::SpammerInstance(100, 500 + seed);
    auto fit = Mace(ToMatrix(p.instance));
    ASSERT_TRUE(fit.ok());
    const auto& eps = fit->model.spam_prob;
    EXPECT_EQ(std::max_element(eps.begin(), eps.end()) - eps.begin(), 4) << seed;
    const auto& trace = fit->model.log_likelihood_trace;
    for (size_t t = 1; t < trace.size(); ++t) EXPECT_GE(trace[t], trace[t - 1] - 1e-8);
  }
}

TEST(MaceTest, RestartsAreSeededAndNeverWorse) {
  oracle::TestRng rng(8);
  Instance x = oracle::RandomInstance(40, 6, 2, 0.7, rng);
  MaceOptions one;
  MaceOptions many;
  many.restarts = 5;
  many.seed = 3;
  auto a = Mace(ToMatrix(x), one);
  auto b = Mace(ToMatrix(x), many);
  auto c = Mace(ToMatrix(x), many);
  ASSERT_TRUE(a.ok() && b.ok() && c.ok());
  EXPECT_GE(b->model.log_likelihood_trace.back(),
            a->model.log_likelihood_trace.back() - 1e-9);
  EXPECT_EQ(MaceModelToJson(b->model, ToMatrix(x)), MaceModelToJson(c->model, ToMatrix(x)));
}

// Independent statement of the three-annotator rule.
CommentAgreement RuleLonghand(const std::vector<CommentStance>& s) {
  int counts[3] = {0, 0, 0};
  for (CommentStance c : s) ++counts[static_cast<int>(c)];
  for (int k = 0; k < 3; ++k) {
    if (counts[k] >= 2) {
      if (k == static_cast<int>(CommentStance::kAgree)) return CommentAgreement::kAgree;
      if (k == static_cast<int>(CommentStance::kDisagree)) return CommentAgreement::kDisagree;
      return CommentAgreement::kUnclear;
    }
  }
  return CommentAgreement::kUnclear;
}

TEST(CommentRuleTest, AllOrderedTriples) {
  const CommentStance all[] = {CommentStance::kAgree, CommentStance::kDisagree,
                               CommentStance::kIrrelevant};
  for (CommentStance a : all) {
    for (CommentStance b : all) {
      for (CommentStance c : all) {
        std::vector<CommentStance> s = {a, b, c};
        auto got = FuseCommentAgreement(s);
        ASSERT_TRUE(got.ok());
        EXPECT_EQ(*got, RuleLonghand(s));
      }
    }
  }
  EXPECT_FALSE(FuseCommentAgreement(std::vector<CommentStance>{CommentStance::kAgree}).ok());
}

TEST(FusedLabelsTest, TsvRoundTrip) {
  Instance x;
  x.labels = {{1, 1}, {1, 0}, {0, 0}};
  auto fused = MajorityVote(ToMatrix(x));
  ASSERT_TRUE(fused.ok());
  const std::string tsv = FusedLabelsToTsv(*fused);
  auto back = ParseFusedLabels(tsv);
  ASSERT_TRUE(back.ok()) << back.status();
  ASSERT_EQ(back->size(), 3u);
  EXPECT_EQ((*back)[0].item_id, "i000");
  EXPECT_FALSE((*back)[1].label.has_value());
  EXPECT_EQ((*back)[2].label, 0);
  EXPECT_EQ(FusedLabelsToTsv(*back), tsv);
}

TEST(FusionMethodTest, ParseNames) {
  EXPECT_EQ(*ParseFusionMethod("ds"), FusionMethod::kDawidSkene);
  EXPECT_EQ(*ParseFusionMethod("dawid_skene"), FusionMethod::kDawidSkene);
  EXPECT_EQ(*ParseFusionMethod("mace"), FusionMethod::kMace);
  EXPECT_FALSE(ParseFusionMethod("vote").ok());
}

}  // namespace
}  // namespace aestk
