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

// Machine annotation: deterministic document encoders, a class-weighted
// logistic model over [text features; one-hot category], stratified k-fold
// grid search and multi-seed evaluation.

#ifndef AESTK_CLASSIFY_H_
#define AESTK_CLASSIFY_H_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "aestk/corpus.h"
#include "aestk/metrics.h"

namespace aestk {

struct Example {
  std::string item_id;
  std::vector<double> features;
  Category category = Category::kConspiracy;
  int label = 0;
};

struct Dataset {
  int dimension = 0;
  std::vector<Example> examples;

  std::vector<int> labels() const;
  Dataset Subset(std::span<const size_t> indices) const;
};

absl::Status ValidateDataset(const Dataset& dataset);

enum class EncoderKind { kHashedNgram, kExternalVectors };

class Encoder {
 public:
  virtual ~Encoder() = default;
  virtual EncoderKind kind() const = 0;
  virtual int dimension() const = 0;
  virtual absl::StatusOr<std::vector<double>> Encode(
      std::string_view item_id, std::string_view text) const = 0;
};

struct HashedNgramOptions {
  int max_order = 2;  // 1 = unigrams only
  int buckets = 4096;
};

// Term counts of hashed 1..max_order-grams over Tokenize(text), L2-normalized.
class HashedNgramEncoder : public Encoder {
 public:
  explicit HashedNgramEncoder(HashedNgramOptions options = {});
  EncoderKind kind() const override { return EncoderKind::kHashedNgram; }
  int dimension() const override { return options_.buckets; }
  absl::StatusOr<std::vector<double>> Encode(
      std::string_view item_id, std::string_view text) const override;

  const HashedNgramOptions& options() const { return options_; }

  // 64-bit FNV-1a. N-gram features hash their tokens joined by a single
  // space.
  static uint64_t FeatureHash(std::string_view feature);

 private:
  HashedNgramOptions options_;
};

// Precomputed document vectors, one "item_id v1 ... vd" line per item.
class ExternalVectorEncoder : public Encoder {
 public:
  static absl::StatusOr<ExternalVectorEncoder> Parse(std::string_view contents);
  static absl::StatusOr<ExternalVectorEncoder> Load(const std::string& path);

  EncoderKind kind() const override { return EncoderKind::kExternalVectors; }
  int dimension() const override { return dimension_; }
  absl::StatusOr<std::vector<double>> Encode(
      std::string_view item_id, std::string_view text) const override;

 private:
  int dimension_ = 0;
  std::map<std::string, std::vector<double>, std::less<>> vectors_;
};

struct EncodedBatch {
  std::vector<std::vector<double>> vectors;
  std::vector<std::string> warnings;  // e.g. empty documents
};

absl::StatusOr<EncodedBatch> EncodeAll(std::span<const Document> documents,
                                       const Encoder& encoder);

// Builds a dataset from posts that have an entry in `labels` (post_id ->
// 0/1); posts without a label are skipped.
absl::StatusOr<Dataset> BuildDataset(std::span<const Post> posts,
                                     const std::map<std::string, int>& labels,
                                     const Encoder& encoder,
                                     std::vector<std::string>* warnings);

// Loss weight per class, indexed by class id (0 = non-AES, 1 = AES).
struct ClassWeights {
  double negative = 0.35;
  double positive = 0.65;

  double for_label(int label) const { return label == 1 ? positive : negative; }
};

struct TrainConfig {
  double learning_rate = 1.0;
  int epochs = 300;
  double l2 = 1e-3;
  ClassWeights class_weights;
  uint64_t seed = 0;
  // Standard deviation of the seeded random weight initialization; 0 starts
  // from zero weights.
  double init_scale = 0.0;
  // false trains on the text features alone.
  bool use_categories = true;
};

struct EncoderSpec {
  std::optional<EncoderKind> kind;
  HashedNgramOptions hashed;
};

struct ClassifierModel {
  int dimension = 0;
  std::vector<Category> categories;  // one-hot block layout
  std::vector<double> weights;       // dimension + categories.size()
  double bias = 0.0;
  TrainConfig config;
  EncoderSpec encoder;
};

// Mean class-weighted cross-entropy plus (l2 / 2) * ||w||^2 over the
// augmented inputs [x; onehot(category)]; the bias (last parameter) is not
// penalized.
class WeightedLogisticObjective {
 public:
  WeightedLogisticObjective(const Dataset& dataset,
                            std::vector<Category> categories,
                            ClassWeights class_weights, double l2);

  int num_params() const { return num_features_ + 1; }
  double Value(std::span<const double> params) const;
  void Gradient(std::span<const double> params, std::span<double> grad) const;
  // Upper bound on the Lipschitz constant of the gradient.
  double LipschitzBound() const;

 private:
  double Margin(size_t row, std::span<const double> params) const;

  int num_features_ = 0;
  std::vector<size_t> row_start_;
  std::vector<int> col_;
  std::vector<double> val_;
  std::vector<int> labels_;
  ClassWeights class_weights_;
  double l2_ = 0.0;
};

// Full-batch gradient descent with step min(learning_rate, 1 / L), so the
// objective never increases between epochs.
absl::StatusOr<ClassifierModel> Train(const Dataset& dataset,
                                      const TrainConfig& config);

// Objective value after each epoch (entry 0 = initial), for diagnostics.
absl::StatusOr<std::vector<double>> TrainingLossTrace(const Dataset& dataset,
                                                     const TrainConfig& config);

struct Predictions {
  std::vector<double> scores;
  std::vector<int> labels;  // score >= 0.5
  std::vector<std::string> warnings;
};

absl::StatusOr<Predictions> Predict(const ClassifierModel& model,
                                    std::span<const Example> examples);

// Text dump; doubles are written as hex floats so the round trip is exact.
std::string SerializeModel(const ClassifierModel& model);
absl::StatusOr<ClassifierModel> ParseModel(std::string_view text);

// Fold id per item. Each class is shuffled with `seed` and dealt round-robin,
// so every fold's class counts are within one of the even split.
absl::StatusOr<std::vector<int>> StratifiedFolds(std::span<const int> labels,
                                                 int folds, uint64_t seed);

// Stratified train/test index split with `test_size` test items.
absl::StatusOr<std::pair<std::vector<size_t>, std::vector<size_t>>>
StratifiedHoldout(std::span<const int> labels, size_t test_size, uint64_t seed);

struct GridSearchPlan {
  std::vector<TrainConfig> grid;
  int folds = 5;
  std::vector<uint64_t> seeds = {0, 1, 2};
};

// Cartesian product over learning rates, L2 strengths and epoch counts.
std::vector<TrainConfig> ExpandGrid(const TrainConfig& base,
                                    std::span<const double> learning_rates,
                                    std::span<const double> l2s,
                                    std::span<const int> epochs);

struct FoldResult {
  size_t grid_index = 0;
  uint64_t seed = 0;
  int fold = 0;
  Evaluation evaluation;
};

struct GridSearchResult {
  size_t best_index = 0;
  TrainConfig best;
  std::vector<double> mean_f1;  // per grid point, across seeds and folds
  std::vector<FoldResult> folds;
};

// Picks the grid point with the highest mean binary F1 across seeds; ties go
// to smaller l2, then smaller learning rate.
absl::StatusOr<GridSearchResult> GridSearch(const Dataset& dataset,
                                            const GridSearchPlan& plan);

std::string GridSearchTsv(const GridSearchResult& result,
                          std::span<const TrainConfig> grid);

// Trains once per seed (the seed replaces config.seed) and evaluates on
// `test`.
absl::StatusOr<std::vector<Evaluation>> EvaluateOverSeeds(
    const Dataset& train, const Dataset& test, const TrainConfig& config,
    std::span<const uint64_t> seeds);

}  // namespace aestk

#endif  // AESTK_CLASSIFY_H_
