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


#include "aestk/classify.h"

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "oracle/synthetic.h"
#include "support/fixtures.h"

namespace aestk {
namespace {

using testing::CategoryDependentDataset;

const std::vector<Category> kThree = {Category::kConspiracy, Category::kFinance,
                                      Category::kWellness};

// Class-weighted cross-entropy written out from the definition.
double ObjectiveLonghand(const Dataset& d, const std::vector<double>& params,
                         ClassWeights w, double l2) {
  const int dim = d.dimension;
  const int feats = dim + static_cast<int>(kThree.size());
  double loss = 0;
  for (const Example& e : d.examples) {
    double z = params[feats];
    for (int k = 0; k < dim; ++k) z += params[k] * e.features[k];
    for (size_t c = 0; c < kThree.size(); ++c) {
      if (kThree[c] == e.category) z += params[dim + c];
    }
    const double p = 1 / (1 + std::exp(-z));
    loss -= w.for_label(e.label) * (e.label ? std::log(p) : std::log(1 - p));
  }
  loss /= d.examples.size();
  double sq = 0;
  for (int k = 0; k < feats; ++k) sq += params[k] * params[k];
  return loss + 0.5 * l2 * sq;
}

TEST(HashedNgramTest, FnvTestVectors) {
  EXPECT_EQ(HashedNgramEncoder::FeatureHash(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(HashedNgramEncoder::FeatureHash("a"), 0xaf63dc4c8601ec8cull);
  EXPECT_EQ(HashedNgramEncoder::FeatureHash("foobar"), 0x85944171f73967e8ull);
}

TEST(HashedNgramTest, CountsUnigramsAndBigramsThenNormalizes) {
  HashedNgramEncoder encoder({2, 1 << 20});
  auto v = encoder.Encode("x", "Big pharma big pharma");
  ASSERT_TRUE(v.ok());
  // Features: big x2, pharma x2, "big pharma" x2, "pharma big" x1.
  const double norm = std::sqrt(4 + 4 + 4 + 1);
  auto at = [&](const char* f) {
    return (*v)[HashedNgramEncoder::FeatureHash(f) % (1 << 20)];
  };
  EXPECT_NEAR(at("big"), 2 / norm, 1e-12);
  EXPECT_NEAR(at("big pharma"), 2 / norm, 1e-12);
  EXPECT_NEAR(at("pharma big"), 1 / norm, 1e-12);
  auto empty = encoder.Encode("y", "...");
  ASSERT_TRUE(empty.ok());
  for (double x : *empty) EXPECT_EQ(x, 0.0);
}

TEST(ExternalVectorTest, ParseAndLookup) {
  auto enc = ExternalVectorEncoder::Parse("a 1 2 3\nb 0.5 -1 0\n");
  ASSERT_TRUE(enc.ok()) << enc.status();
  EXPECT_EQ(enc->dimension(), 3);
  EXPECT_EQ(*enc->Encode("b", "ignored"), (std::vector<double>{0.5, -1, 0}));
  EXPECT_TRUE(absl::IsNotFound(enc->Encode("c", "").status()));
  EXPECT_FALSE(ExternalVectorEncoder::Parse("a 1 2\nb 1\n").ok());
  EXPECT_FALSE(ExternalVectorEncoder::Parse("a 1 x\n").ok());
}

TEST(ObjectiveTest, ValueMatchesLonghandAndGradientMatchesFiniteDifferences) {
  oracle::TestRng rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    Dataset d = CategoryDependentDataset(30, 100 + trial);
    const ClassWeights w{0.35, 0.65};
    WeightedLogisticObjective f(d, kThree, w, 0.01);
    std::vector<double> params(f.num_params());
    for (double& p : params) p = rng.Uniform() * 2 - 1;
    EXPECT_NEAR(f.Value(params), ObjectiveLonghand(d, params, w, 0.01), 1e-12);
    std::vector<double> grad(params.size());
    f.Gradient(params, grad);
    for (size_t k = 0; k < params.size(); ++k) {
      std::vector<double> hi = params, lo = params;
      hi[k] += 1e-5;
      lo[k] -= 1e-5;
      const double numeric = (f.Value(hi) - f.Value(lo)) / 2e-5;
      EXPECT_NEAR(grad[k], numeric, 1e-7) << "param " << k;
    }
  }
}

TEST(TrainTest, LossNeverIncreases) {
  Dataset d = CategoryDependentDataset(200, 3);
  TrainConfig config;
  config.epochs = 60;
  config.learning_rate = 50;  // clipped to 1/L
  auto trace = TrainingLossTrace(d, config);
  ASSERT_TRUE(trace.ok());
  ASSERT_EQ(trace->size(), 61u);
  for (size_t t = 1; t < trace->size(); ++t) EXPECT_LE((*trace)[t], (*trace)[t - 1] + 1e-12);
}

TEST(TrainTest, ClassWeightsShiftThePositiveRate) {
  Dataset d = CategoryDependentDataset(400, 8);
  TrainConfig plain;
  plain.class_weights = {0.5, 0.5};
  TrainConfig tilted;
  tilted.class_weights = {0.2, 0.8};
  auto a = Train(d, plain);
  auto b = Train(d, tilted);
  ASSERT_TRUE(a.ok() && b.ok());
  auto pa = Predict(*a, d.examples);
  auto pb = Predict(*b, d.examples);
  ASSERT_TRUE(pa.ok() && pb.ok());
  int na = 0, nb = 0;
  for (size_t i = 0; i < d.examples.size(); ++i) {
    na += pa->labels[i];
    nb += pb->labels[i];
    EXPECT_EQ(pa->labels[i], pa->scores[i] >= 0.5 ? 1 : 0);
  }
  EXPECT_GT(nb, na);
}

TEST(ModelIoTest, ExactRoundTripAndDeterminism) {
  Dataset d = CategoryDependentDataset(120, 4);
  TrainConfig config;
  config.seed = 7;
  config.init_scale = 0.1;
  auto a = Train(d, config);
  auto b = Train(d, config);
  ASSERT_TRUE(a.ok() && b.ok());
  const std::string text = SerializeModel(*a);
  EXPECT_EQ(text, SerializeModel(*b));
  auto back = ParseModel(text);
  ASSERT_TRUE(back.ok()) << back.status();
  EXPECT_EQ(back->weights, a->weights);
  EXPECT_EQ(back->bias, a->bias);
  EXPECT_EQ(SerializeModel(*back), text);
  EXPECT_FALSE(ParseModel("garbage").ok());
}

TEST(PredictTest, RejectsDimensionMismatch) {
  Dataset d = CategoryDependentDataset(40, 1);
  auto model = Train(d, {});
  ASSERT_TRUE(model.ok());
  Example wrong = d.examples[0];
  wrong.features.pop_back();
  EXPECT_FALSE(Predict(*model, std::vector<Example>{wrong}).ok());
}

TEST(FoldsTest, StratifiedWithinOne) {
  oracle::TestRng rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<int> labels;
    const int n = 10 + rng.Below(90);
    for (int i = 0; i < n; ++i) labels.push_back(rng.Bernoulli(0.3));
    const int k = 2 + rng.Below(4);
    auto folds = StratifiedFolds(labels, k, trial);
    ASSERT_TRUE(folds.ok());
    for (int cls : {0, 1}) {
      int total = 0;
      std::vector<int> per(k, 0);
      for (int i = 0; i < n; ++i) {
        if (labels[i] == cls) {
          ++total;
          ++per[(*folds)[i]];
        }
      }
      for (int f = 0; f < k; ++f) {
        EXPECT_LE(std::abs(per[f] * k - total), k) << "class " << cls;
      }
    }
  }
  EXPECT_FALSE(StratifiedFolds(std::vector<int>{0, 1}, 1, 0).ok());
}

TEST(HoldoutTest, DisjointCoverAndStratified) {
  std::vector<int> labels(100, 0);
  for (int i = 0; i < 30; ++i) labels[i] = 1;
  auto split = StratifiedHoldout(labels, 40, 3);
  ASSERT_TRUE(split.ok());
  auto [train, test] = *split;
  EXPECT_EQ(test.size(), 40u);
  EXPECT_EQ(train.size(), 60u);
  std::vector<int> hit(100, 0);
  int test_pos = 0;
  for (size_t i : train) ++hit[i];
  for (size_t i : test) {
    ++hit[i];
    test_pos += labels[i];
  }
  for (int h : hit) EXPECT_EQ(h, 1);
  EXPECT_EQ(test_pos, 12);
}

TEST(GridSearchTest, ExpandsCartesianProductAndIsReproducible) {
  const double lrs[] = {0.5, 1.0};
  const double l2s[] = {1e-3, 1e-2, 1e-1};
  const int epochs[] = {50};
  auto grid = ExpandGrid({}, lrs, l2s, epochs);
  ASSERT_EQ(grid.size(), 6u);
  Dataset d = CategoryDependentDataset(150, 12);
  GridSearchPlan plan{grid, 3, {0, 1}};
  auto a = GridSearch(d, plan);
  auto b = GridSearch(d, plan);
  ASSERT_TRUE(a.ok() && b.ok());
  EXPECT_EQ(a->folds.size(), 6u * 3 * 2);
  EXPECT_EQ(GridSearchTsv(*a, grid), GridSearchTsv(*b, grid));
  for (size_t g = 0; g < grid.size(); ++g) {
    EXPECT_LE(a->mean_f1[g], a->mean_f1[a->best_index]);
  }
}

TEST(BuildDatasetTest, SkipsUnlabeledPosts) {
  std::vector<Post> posts(3);
  posts[0].post_id = "a";
  posts[0].transcript = "some words here";
  posts[1].post_id = "b";
  posts[1].transcript = "";
  posts[2].post_id = "c";
  posts[2].transcript = "unlabeled";
  std::vector<std::string> warnings;
  auto d = BuildDataset(posts, {{"a", 1}, {"b", 0}}, HashedNgramEncoder({1, 64}), &warnings);
  ASSERT_TRUE(d.ok()) << d.status();
  EXPECT_EQ(d->examples.size(), 2u);
  EXPECT_EQ(d->dimension, 64);
  EXPECT_FALSE(warnings.empty());
}

}  // namespace
}  // namespace aestk
