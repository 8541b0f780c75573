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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "aestk/random.h"
#include "aestk/table_io.h"
#include "view.h"

namespace aestk {

using internal::Av;
namespace {

constexpr std::string_view kModelMagic = "aestk-linear-model";
constexpr int kModelVersion = 1;

double Sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double Softplus(double z) {
  return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

std::vector<Category> CategoriesPresent(const Dataset& dataset) {
  std::set<Category> present;
  for (const auto& e : dataset.examples) present.insert(e.category);
  return {present.begin(), present.end()};
}

int CategorySlot(std::span<const Category> categories, Category c) {
  auto it = std::find(categories.begin(), categories.end(), c);
  return it == categories.end() ? -1
                                : static_cast<int>(it - categories.begin());
}

}  // namespace

std::vector<int> Dataset::labels() const {
  std::vector<int> out;
  out.reserve(examples.size());
  for (const auto& e : examples) out.push_back(e.label);
  return out;
}

Dataset Dataset::Subset(std::span<const size_t> indices) const {
  Dataset out;
  out.dimension = dimension;
  out.examples.reserve(indices.size());
  for (size_t i : indices) out.examples.push_back(examples[i]);
  return out;
}

absl::Status ValidateDataset(const Dataset& dataset) {
  for (const auto& e : dataset.examples) {
    if (static_cast<int>(e.features.size()) != dataset.dimension) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "item %s has dimension %d, expected %d", e.item_id,
          e.features.size(), dataset.dimension));
    }
    if (e.label != 0 && e.label != 1) {
      return absl::InvalidArgumentError(
          absl::StrCat("item ", e.item_id, " has non-binary label"));
    }
  }
  return absl::OkStatus();
}

HashedNgramEncoder::HashedNgramEncoder(HashedNgramOptions options)
    : options_(options) {
  options_.max_order = std::max(1, options_.max_order);
  options_.buckets = std::max(1, options_.buckets);
}

uint64_t HashedNgramEncoder::FeatureHash(std::string_view feature) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : feature) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

absl::StatusOr<std::vector<double>> HashedNgramEncoder::Encode(
    std::string_view /*item_id*/, std::string_view text) const {
  std::vector<double> v(options_.buckets, 0.0);
  std::vector<std::string> tokens = Tokenize(text);
  for (size_t i = 0; i < tokens.size(); ++i) {
    std::string feature;
    for (int n = 1; n <= options_.max_order && i + n <= tokens.size(); ++n) {
      if (n > 1) feature.push_back(' ');
      feature += tokens[i + n - 1];
      v[FeatureHash(feature) % options_.buckets] += 1.0;
    }
  }
  double norm = 0.0;
  for (double x : v) norm += x * x;
  if (norm > 0) {
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
  }
  return v;
}

absl::StatusOr<ExternalVectorEncoder> ExternalVectorEncoder::Parse(
    std::string_view contents) {
  ExternalVectorEncoder encoder;
  std::vector<std::string_view> lines = SplitLines(contents);
  for (size_t i = 0; i < lines.size(); ++i) {
    std::vector<std::string_view> parts =
        SplitAny(lines[i], " \t", /*skip_empty=*/true);
    if (parts.empty()) continue;
    std::vector<double> values;
    for (size_t k = 1; k < parts.size(); ++k) {
      double x;
      if (!absl::SimpleAtod(Av(parts[k]), &x) || !std::isfinite(x)) {
        return absl::InvalidArgumentError(
            absl::StrCat("vector file line ", i + 1, ": bad value '",
                         Av(parts[k]), "'"));
      }
      values.push_back(x);
    }
    if (values.empty()) {
      return absl::InvalidArgumentError(
          absl::StrCat("vector file line ", i + 1, ": no values"));
    }
    if (encoder.dimension_ == 0) encoder.dimension_ = values.size();
    if (static_cast<int>(values.size()) != encoder.dimension_) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "vector file line %d: %d values, expected %d", i + 1, values.size(),
          encoder.dimension_));
    }
    if (!encoder.vectors_.emplace(std::string(parts[0]), std::move(values))
             .second) {
      return absl::InvalidArgumentError(absl::StrCat(
          "vector file line ", i + 1, ": duplicate item ", Av(parts[0])));
    }
  }
  return encoder;
}

absl::StatusOr<ExternalVectorEncoder> ExternalVectorEncoder::Load(
    const std::string& path) {
  auto contents = ReadFileToString(path);
  if (!contents.ok()) return contents.status();
  return Parse(*contents);
}

absl::StatusOr<std::vector<double>> ExternalVectorEncoder::Encode(
    std::string_view item_id, std::string_view /*text*/) const {
  auto it = vectors_.find(item_id);
  if (it == vectors_.end()) {
    return absl::NotFoundError(
        absl::StrCat("no external vector for item ", Av(item_id)));
  }
  return it->second;
}

absl::StatusOr<EncodedBatch> EncodeAll(std::span<const Document> documents,
                                       const Encoder& encoder) {
  EncodedBatch batch;
  batch.vectors.reserve(documents.size());
  for (const Document& doc : documents) {
    if (encoder.kind() == EncoderKind::kHashedNgram && doc.token_count == 0 &&
        CountTokens(doc.text) == 0) {
      batch.warnings.push_back(
          absl::StrCat("empty document ", doc.post_id, " encoded as zeros"));
    }
    auto v = encoder.Encode(doc.post_id, doc.text);
    if (!v.ok()) return v.status();
    batch.vectors.push_back(*std::move(v));
  }
  return batch;
}

absl::StatusOr<Dataset> BuildDataset(std::span<const Post> posts,
                                     const std::map<std::string, int>& labels,
                                     const Encoder& encoder,
                                     std::vector<std::string>* warnings) {
  Dataset dataset;
  dataset.dimension = encoder.dimension();
  std::vector<Document> docs;
  std::vector<const Post*> kept;
  for (const Post& post : posts) {
    if (!labels.contains(post.post_id)) continue;
    docs.push_back(MakeDocument(post));
    kept.push_back(&post);
  }
  auto batch = EncodeAll(docs, encoder);
  if (!batch.ok()) return batch.status();
  if (warnings != nullptr) {
    warnings->insert(warnings->end(), batch->warnings.begin(),
                     batch->warnings.end());
  }
  for (size_t i = 0; i < kept.size(); ++i) {
    dataset.examples.push_back({kept[i]->post_id,
                                std::move(batch->vectors[i]),
                                kept[i]->category,
                                labels.at(kept[i]->post_id)});
  }
  absl::Status status = ValidateDataset(dataset);
  if (!status.ok()) return status;
  return dataset;
}

WeightedLogisticObjective::WeightedLogisticObjective(
    const Dataset& dataset, std::vector<Category> categories,
    ClassWeights class_weights, double l2)
    : num_features_(dataset.dimension + static_cast<int>(categories.size())),
      class_weights_(class_weights),
      l2_(l2) {
  row_start_.push_back(0);
  for (const Example& e : dataset.examples) {
    for (int k = 0; k < dataset.dimension; ++k) {
      if (e.features[k] != 0.0) {
        col_.push_back(k);
        val_.push_back(e.features[k]);
      }
    }
    int slot = CategorySlot(categories, e.category);
    if (slot >= 0) {
      col_.push_back(dataset.dimension + slot);
      val_.push_back(1.0);
    }
    row_start_.push_back(col_.size());
    labels_.push_back(e.label);
  }
}

double WeightedLogisticObjective::Margin(size_t row,
                                         std::span<const double> params) const {
  double z = params[num_features_];
  for (size_t k = row_start_[row]; k < row_start_[row + 1]; ++k) {
    z += params[col_[k]] * val_[k];
  }
  return z;
}

double WeightedLogisticObjective::Value(std::span<const double> params) const {
  const size_t n = labels_.size();
  double loss = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double z = Margin(i, params);
    // -log sigmoid(z) for positives, -log(1 - sigmoid(z)) for negatives.
    const double ce = labels_[i] == 1 ? Softplus(-z) : Softplus(z);
    loss += class_weights_.for_label(labels_[i]) * ce;
  }
  if (n > 0) loss /= static_cast<double>(n);
  double penalty = 0.0;
  for (int k = 0; k < num_features_; ++k) penalty += params[k] * params[k];
  return loss + 0.5 * l2_ * penalty;
}

void WeightedLogisticObjective::Gradient(std::span<const double> params,
                                         std::span<double> grad) const {
  const size_t n = labels_.size();
  std::fill(grad.begin(), grad.end(), 0.0);
  for (size_t i = 0; i < n; ++i) {
    const double z = Margin(i, params);
    const double r =
        class_weights_.for_label(labels_[i]) * (Sigmoid(z) - labels_[i]);
    for (size_t k = row_start_[i]; k < row_start_[i + 1]; ++k) {
      grad[col_[k]] += r * val_[k];
    }
    grad[num_features_] += r;
  }
  if (n > 0) {
    for (double& g : grad) g /= static_cast<double>(n);
  }
  for (int k = 0; k < num_features_; ++k) grad[k] += l2_ * params[k];
}

double WeightedLogisticObjective::LipschitzBound() const {
  double max_sq = 0.0;
  for (size_t i = 0; i + 1 < row_start_.size(); ++i) {
    double sq = 1.0;  // bias input
    for (size_t k = row_start_[i]; k < row_start_[i + 1]; ++k) {
      sq += val_[k] * val_[k];
    }
    max_sq = std::max(max_sq, sq);
  }
  const double w_max =
      std::max(class_weights_.negative, class_weights_.positive);
  return 0.25 * w_max * max_sq + l2_;
}

namespace {

absl::Status CheckTrainable(const Dataset& dataset, const TrainConfig& config) {
  absl::Status status = ValidateDataset(dataset);
  if (!status.ok()) return status;
  int positives = 0;
  for (const auto& e : dataset.examples) positives += e.label;
  if (positives == 0 || positives == static_cast<int>(dataset.examples.size())) {
    return absl::FailedPreconditionError(
        "training data must contain both classes");
  }
  if (config.epochs < 0 || config.learning_rate <= 0 || config.l2 < 0 ||
      config.class_weights.negative <= 0 || config.class_weights.positive <= 0) {
    return absl::InvalidArgumentError(
        "epochs >= 0, learning_rate > 0, l2 >= 0 and positive class weights "
        "required");
  }
  return absl::OkStatus();
}

struct Fit {
  std::vector<Category> categories;
  std::vector<double> params;
  std::vector<double> trace;
};

Fit RunGradientDescent(const Dataset& dataset, const TrainConfig& config,
                       bool record_trace) {
  Fit fit;
  if (config.use_categories) fit.categories = CategoriesPresent(dataset);
  WeightedLogisticObjective objective(dataset, fit.categories,
                                      config.class_weights, config.l2);
  fit.params.assign(objective.num_params(), 0.0);
  if (config.init_scale > 0) {
    Rng rng(config.seed);
    for (size_t k = 0; k + 1 < fit.params.size(); ++k) {
      fit.params[k] = config.init_scale * rng.StandardNormal();
    }
  }
  // Bias starts at the class-weighted prior log-odds.
  double w_pos = 0.0;
  double w_neg = 0.0;
  for (const auto& e : dataset.examples) {
    (e.label == 1 ? w_pos : w_neg) += config.class_weights.for_label(e.label);
  }
  fit.params.back() = std::log(w_pos / w_neg);

  const double step =
      std::min(config.learning_rate, 1.0 / objective.LipschitzBound());
  std::vector<double> grad(fit.params.size());
  if (record_trace) fit.trace.push_back(objective.Value(fit.params));
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    objective.Gradient(fit.params, grad);
    for (size_t k = 0; k < fit.params.size(); ++k) {
      fit.params[k] -= step * grad[k];
    }
    if (record_trace) fit.trace.push_back(objective.Value(fit.params));
  }
  return fit;
}

}  // namespace

absl::StatusOr<ClassifierModel> Train(const Dataset& dataset,
                                      const TrainConfig& config) {
  absl::Status status = CheckTrainable(dataset, config);
  if (!status.ok()) return status;
  Fit fit = RunGradientDescent(dataset, config, /*record_trace=*/false);
  ClassifierModel model;
  model.dimension = dataset.dimension;
  model.categories = std::move(fit.categories);
  model.bias = fit.params.back();
  fit.params.pop_back();
  model.weights = std::move(fit.params);
  model.config = config;
  for (double w : model.weights) {
    if (!std::isfinite(w)) {
      return absl::InternalError("training diverged to non-finite weights");
    }
  }
  return model;
}

absl::StatusOr<std::vector<double>> TrainingLossTrace(
    const Dataset& dataset, const TrainConfig& config) {
  absl::Status status = CheckTrainable(dataset, config);
  if (!status.ok()) return status;
  return RunGradientDescent(dataset, config, /*record_trace=*/true).trace;
}

absl::StatusOr<Predictions> Predict(const ClassifierModel& model,
                                    std::span<const Example> examples) {
  if (model.weights.size() != model.dimension + model.categories.size()) {
    return absl::FailedPreconditionError("model weight count inconsistent");
  }
  Predictions out;
  std::set<Category> warned;
  for (const Example& e : examples) {
    if (static_cast<int>(e.features.size()) != model.dimension) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "item %s has dimension %d, model expects %d", e.item_id,
          e.features.size(), model.dimension));
    }
    double z = model.bias;
    for (int k = 0; k < model.dimension; ++k) {
      z += model.weights[k] * e.features[k];
    }
    if (!model.categories.empty()) {
      int slot = CategorySlot(model.categories, e.category);
      if (slot >= 0) {
        z += model.weights[model.dimension + slot];
      } else if (warned.insert(e.category).second) {
        out.warnings.push_back(absl::StrCat(
            "category ", Av(CategoryName(e.category)),
            " unseen in training; using an all-zero category block"));
      }
    }
    const double score = Sigmoid(z);
    out.scores.push_back(score);
    out.labels.push_back(score >= 0.5 ? 1 : 0);
  }
  return out;
}

std::string SerializeModel(const ClassifierModel& model) {
  std::string out = absl::StrCat(Av(kModelMagic), " ", kModelVersion, "\n");
  absl::StrAppend(&out, "dimension ", model.dimension, "\n");
  std::vector<std::string> names;
  for (Category c : model.categories) names.emplace_back(CategoryName(c));
  absl::StrAppend(&out, "categories ", names.size(),
                  names.empty() ? "" : " ", absl::StrJoin(names, " "), "\n");
  if (!model.encoder.kind) {
    absl::StrAppend(&out, "encoder none\n");
  } else if (*model.encoder.kind == EncoderKind::kHashedNgram) {
    absl::StrAppend(&out, "encoder hashed_ngram ",
                    model.encoder.hashed.max_order, " ",
                    model.encoder.hashed.buckets, "\n");
  } else {
    absl::StrAppend(&out, "encoder external_vectors\n");
  }
  const TrainConfig& c = model.config;
  absl::StrAppend(&out, "class_weights ", HexDouble(c.class_weights.negative),
                  " ", HexDouble(c.class_weights.positive), "\n");
  absl::StrAppend(&out, "learning_rate ", HexDouble(c.learning_rate), "\n");
  absl::StrAppend(&out, "epochs ", c.epochs, "\n");
  absl::StrAppend(&out, "l2 ", HexDouble(c.l2), "\n");
  absl::StrAppend(&out, "seed ", c.seed, "\n");
  absl::StrAppend(&out, "init_scale ", HexDouble(c.init_scale), "\n");
  absl::StrAppend(&out, "use_categories ", c.use_categories ? 1 : 0, "\n");
  absl::StrAppend(&out, "bias ", HexDouble(model.bias), "\n");
  absl::StrAppend(&out, "weights ", model.weights.size(), "\n");
  for (double w : model.weights) absl::StrAppend(&out, HexDouble(w), "\n");
  absl::StrAppend(&out, "end\n");
  return out;
}

absl::StatusOr<ClassifierModel> ParseModel(std::string_view text) {
  std::vector<std::string_view> lines = SplitLines(text);
  size_t pos = 0;
  auto next = [&](std::string_view key)
      -> absl::StatusOr<std::vector<std::string_view>> {
    if (pos >= lines.size()) {
      return absl::InvalidArgumentError(
          absl::StrCat("model truncated before '", Av(key), "'"));
    }
    std::vector<std::string_view> parts =
        SplitAny(lines[pos], " ", /*skip_empty=*/true);
    if (parts.empty() || parts[0] != key) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "model line %d: expected '%s'", pos + 1, Av(key)));
    }
    ++pos;
    return parts;
  };
  auto bad = [&](std::string_view what) {
    return absl::InvalidArgumentError(
        absl::StrFormat("model line %d: bad %s", pos, Av(what)));
  };

  ClassifierModel model;
  auto header = next(kModelMagic);
  if (!header.ok()) return header.status();
  int version = 0;
  if (header->size() != 2 || !absl::SimpleAtoi(Av((*header)[1]), &version) ||
      version != kModelVersion) {
    return absl::InvalidArgumentError("unsupported model version");
  }
  auto dim = next("dimension");
  if (!dim.ok()) return dim.status();
  if (dim->size() != 2 || !absl::SimpleAtoi(Av((*dim)[1]), &model.dimension) ||
      model.dimension < 0) {
    return bad("dimension");
  }
  auto cats = next("categories");
  if (!cats.ok()) return cats.status();
  size_t num_cats = 0;
  if (cats->size() < 2 || !absl::SimpleAtoi(Av((*cats)[1]), &num_cats) ||
      cats->size() != num_cats + 2) {
    return bad("categories");
  }
  for (size_t i = 0; i < num_cats; ++i) {
    auto c = ParseCategory((*cats)[i + 2]);
    if (!c.ok()) return c.status();
    model.categories.push_back(*c);
  }
  auto enc = next("encoder");
  if (!enc.ok()) return enc.status();
  if (enc->size() == 4 && (*enc)[1] == "hashed_ngram") {
    model.encoder.kind = EncoderKind::kHashedNgram;
    if (!absl::SimpleAtoi(Av((*enc)[2]), &model.encoder.hashed.max_order) ||
        !absl::SimpleAtoi(Av((*enc)[3]), &model.encoder.hashed.buckets)) {
      return bad("encoder");
    }
  } else if (enc->size() == 2 && (*enc)[1] == "external_vectors") {
    model.encoder.kind = EncoderKind::kExternalVectors;
  } else if (!(enc->size() == 2 && (*enc)[1] == "none")) {
    return bad("encoder");
  }

  auto hex = [&](std::string_view key, double* out) -> absl::Status {
    auto parts = next(key);
    if (!parts.ok()) return parts.status();
    if (parts->size() != 2) return bad(key);
    auto v = ParseHexDouble((*parts)[1]);
    if (!v.ok()) return bad(key);
    *out = *v;
    return absl::OkStatus();
  };
  auto integer = [&](std::string_view key, auto* out) -> absl::Status {
    auto parts = next(key);
    if (!parts.ok()) return parts.status();
    if (parts->size() != 2 || !absl::SimpleAtoi(Av((*parts)[1]), out)) {
      return bad(key);
    }
    return absl::OkStatus();
  };

  TrainConfig& c = model.config;
  auto weights_line = next("class_weights");
  if (!weights_line.ok()) return weights_line.status();
  if (weights_line->size() != 3) return bad("class_weights");
  auto neg = ParseHexDouble((*weights_line)[1]);
  auto posw = ParseHexDouble((*weights_line)[2]);
  if (!neg.ok() || !posw.ok()) return bad("class_weights");
  c.class_weights = {*neg, *posw};
  int use_categories = 1;
  for (absl::Status s :
       {hex("learning_rate", &c.learning_rate), integer("epochs", &c.epochs),
        hex("l2", &c.l2), integer("seed", &c.seed),
        hex("init_scale", &c.init_scale),
        integer("use_categories", &use_categories),
        hex("bias", &model.bias)}) {
    if (!s.ok()) return s;
  }
  c.use_categories = use_categories != 0;
  size_t count = 0;
  absl::Status s = integer("weights", &count);
  if (!s.ok()) return s;
  if (count != model.dimension + model.categories.size()) {
    return bad("weight count");
  }
  if (pos + count >= lines.size()) {
    return absl::InvalidArgumentError("model truncated in weights");
  }
  model.weights.reserve(count);
  for (size_t i = 0; i < count; ++i) {
    auto w = ParseHexDouble(lines[pos++]);
    if (!w.ok()) return bad("weight");
    model.weights.push_back(*w);
  }
  if (lines[pos] != "end") return bad("trailer");
  return model;
}

absl::StatusOr<std::vector<int>> StratifiedFolds(std::span<const int> labels,
                                                 int folds, uint64_t seed) {
  if (folds < 2) return absl::InvalidArgumentError("folds must be >= 2");
  std::vector<size_t> by_class[2];
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) {
      return absl::InvalidArgumentError("labels must be binary");
    }
    by_class[labels[i]].push_back(i);
  }
  const size_t minority = std::min(by_class[0].size(), by_class[1].size());
  if (static_cast<size_t>(folds) > minority) {
    return absl::FailedPreconditionError(absl::StrFormat(
        "%d folds exceed the minority class size %d", folds, minority));
  }
  Rng rng(seed);
  std::vector<int> assignment(labels.size(), 0);
  // Positives are dealt first, negatives continue from where they stopped so
  // fold sizes stay balanced too.
  size_t dealt = 0;
  for (int cls : {1, 0}) {
    std::span<size_t> members(by_class[cls]);
    rng.Shuffle(members);
    for (size_t i : members) assignment[i] = static_cast<int>(dealt++ % folds);
  }
  return assignment;
}

absl::StatusOr<std::pair<std::vector<size_t>, std::vector<size_t>>>
StratifiedHoldout(std::span<const int> labels, size_t test_size,
                  uint64_t seed) {
  if (test_size == 0 || test_size >= labels.size()) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "test size %d must be in 1..%d", test_size, labels.size() - 1));
  }
  std::vector<size_t> by_class[2];
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) {
      return absl::InvalidArgumentError("labels must be binary");
    }
    by_class[labels[i]].push_back(i);
  }
  const double fraction =
      static_cast<double>(by_class[1].size()) / labels.size();
  size_t test_pos = static_cast<size_t>(std::llround(fraction * test_size));
  test_pos = std::min({test_pos, by_class[1].size(), test_size});
  size_t test_neg = test_size - test_pos;
  if (test_neg > by_class[0].size()) {
    return absl::FailedPreconditionError("not enough negatives for test set");
  }
  Rng rng(seed);
  std::vector<size_t> train, test;
  for (int cls : {1, 0}) {
    std::span<size_t> members(by_class[cls]);
    rng.Shuffle(members);
    const size_t take = cls == 1 ? test_pos : test_neg;
    for (size_t k = 0; k < members.size(); ++k) {
      (k < take ? test : train).push_back(members[k]);
    }
  }
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return std::make_pair(std::move(train), std::move(test));
}

std::vector<TrainConfig> ExpandGrid(const TrainConfig& base,
                                    std::span<const double> learning_rates,
                                    std::span<const double> l2s,
                                    std::span<const int> epochs) {
  std::vector<TrainConfig> grid;
  for (double lr : learning_rates) {
    for (double l2 : l2s) {
      for (int e : epochs) {
        TrainConfig c = base;
        c.learning_rate = lr;
        c.l2 = l2;
        c.epochs = e;
        grid.push_back(c);
      }
    }
  }
  return grid;
}

absl::StatusOr<GridSearchResult> GridSearch(const Dataset& dataset,
                                            const GridSearchPlan& plan) {
  if (plan.grid.empty()) return absl::InvalidArgumentError("empty grid");
  if (plan.seeds.empty()) return absl::InvalidArgumentError("no seeds");
  absl::Status status = ValidateDataset(dataset);
  if (!status.ok()) return status;
  const std::vector<int> labels = dataset.labels();

  GridSearchResult result;
  result.mean_f1.assign(plan.grid.size(), 0.0);
  // Fold assignments depend only on the seed; compute them once per seed.
  std::vector<std::vector<int>> assignments;
  for (uint64_t seed : plan.seeds) {
    auto folds = StratifiedFolds(labels, plan.folds, seed);
    if (!folds.ok()) return folds.status();
    assignments.push_back(*std::move(folds));
  }
  for (size_t g = 0; g < plan.grid.size(); ++g) {
    double seed_sum = 0.0;
    for (size_t s = 0; s < plan.seeds.size(); ++s) {
      double fold_sum = 0.0;
      for (int fold = 0; fold < plan.folds; ++fold) {
        std::vector<size_t> train_idx, valid_idx;
        for (size_t i = 0; i < labels.size(); ++i) {
          (assignments[s][i] == fold ? valid_idx : train_idx).push_back(i);
        }
        TrainConfig config = plan.grid[g];
        config.seed = plan.seeds[s];
        auto model = Train(dataset.Subset(train_idx), config);
        if (!model.ok()) return model.status();
        Dataset valid = dataset.Subset(valid_idx);
        auto pred = Predict(*model, valid.examples);
        if (!pred.ok()) return pred.status();
        auto eval = Evaluate(pred->labels, valid.labels());
        if (!eval.ok()) return eval.status();
        fold_sum += eval->f1_binary;
        result.folds.push_back({g, plan.seeds[s], fold, *eval});
      }
      seed_sum += fold_sum / plan.folds;
    }
    result.mean_f1[g] = seed_sum / plan.seeds.size();
  }
  size_t best = 0;
  for (size_t g = 1; g < plan.grid.size(); ++g) {
    const TrainConfig& a = plan.grid[g];
    const TrainConfig& b = plan.grid[best];
    if (result.mean_f1[g] > result.mean_f1[best] ||
        (result.mean_f1[g] == result.mean_f1[best] &&
         (a.l2 < b.l2 || (a.l2 == b.l2 && a.learning_rate < b.learning_rate)))) {
      best = g;
    }
  }
  result.best_index = best;
  result.best = plan.grid[best];
  return result;
}

std::string GridSearchTsv(const GridSearchResult& result,
                          std::span<const TrainConfig> grid) {
  Table table{{"grid_index", "learning_rate", "l2", "epochs", "seed", "fold",
               "precision", "recall", "f1_binary", "accuracy"},
              {}};
  for (const FoldResult& f : result.folds) {
    const TrainConfig& c = grid[f.grid_index];
    table.rows.push_back({absl::StrCat(f.grid_index),
                          absl::StrFormat("%g", c.learning_rate),
                          absl::StrFormat("%g", c.l2), absl::StrCat(c.epochs),
                          absl::StrCat(f.seed), absl::StrCat(f.fold),
                          absl::StrFormat("%.4f", f.evaluation.precision),
                          absl::StrFormat("%.4f", f.evaluation.recall),
                          absl::StrFormat("%.4f", f.evaluation.f1_binary),
                          absl::StrFormat("%.4f", f.evaluation.accuracy)});
  }
  return FormatTsv(table);
}

absl::StatusOr<std::vector<Evaluation>> EvaluateOverSeeds(
    const Dataset& train, const Dataset& test, const TrainConfig& config,
    std::span<const uint64_t> seeds) {
  std::vector<Evaluation> out;
  for (uint64_t seed : seeds) {
    TrainConfig c = config;
    c.seed = seed;
    auto model = Train(train, c);
    if (!model.ok()) return model.status();
    auto pred = Predict(*model, test.examples);
    if (!pred.ok()) return pred.status();
    auto eval = Evaluate(pred->labels, test.labels());
    if (!eval.ok()) return eval.status();
    out.push_back(*eval);
  }
  return out;
}

}  // namespace aestk
