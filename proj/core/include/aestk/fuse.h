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

// Aggregation of redundant annotator labels: majority vote, Dawid-Skene EM,
// MACE EM, and the three-annotator comment agreement rule.

#ifndef AESTK_FUSE_H_
#define AESTK_FUSE_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "aestk/annotation.h"

namespace aestk {

struct LabelEntry {
  int item = 0;
  int annotator = 0;
  int label = 0;
};

// Sparse item x annotator matrix of class labels.
class LabelMatrix {
 public:
  // Fails on out-of-range indices or labels, on an item without labels, and
  // on an annotator labelling the same item twice.
  static absl::StatusOr<LabelMatrix> Create(std::vector<std::string> items,
                                            std::vector<std::string> annotators,
                                            std::span<const LabelEntry> entries,
                                            int num_classes);

  int num_items() const { return static_cast<int>(items_.size()); }
  int num_annotators() const { return static_cast<int>(annotators_.size()); }
  int num_classes() const { return num_classes_; }
  const std::vector<std::string>& items() const { return items_; }
  const std::vector<std::string>& annotators() const { return annotators_; }

  // (annotator, label) pairs for one item, in annotator order.
  const std::vector<std::pair<int, int>>& labels_for(int item) const {
    return by_item_[item];
  }

 private:
  std::vector<std::string> items_;
  std::vector<std::string> annotators_;
  std::vector<std::vector<std::pair<int, int>>> by_item_;
  int num_classes_ = 2;
};

// Video records binarized with BinarizeVideoScale; padding records dropped.
// Items and annotators are ordered by id.
absl::StatusOr<LabelMatrix> VideoLabelMatrix(
    std::span<const AnnotationRecord> records);

// Comment records ternarized (agree=0, disagree=1, irrelevant=2).
absl::StatusOr<LabelMatrix> CommentLabelMatrix(
    std::span<const AnnotationRecord> records);

enum class FusionMethod { kMajority, kDawidSkene, kMace };

std::string_view FusionMethodName(FusionMethod method);
// Accepts "majority", "ds"/"dawid_skene", "mace".
absl::StatusOr<FusionMethod> ParseFusionMethod(std::string_view name);

struct FusedLabel {
  std::string item_id;
  std::optional<int> label;  // nullopt = unclear (tie)
  std::vector<double> posterior;
  FusionMethod method = FusionMethod::kMajority;
};

// Empirical vote fractions; ties are unclear.
absl::StatusOr<std::vector<FusedLabel>> MajorityVote(const LabelMatrix& matrix);

struct EmOptions {
  int max_iters = 100;
  double tol = 1e-6;
  // Pseudo-count added to every multinomial in the M-step.
  double smoothing = 0.01;
};

struct DawidSkeneModel {
  std::vector<double> class_priors;
  // confusion[annotator][true class][reported class]
  std::vector<std::vector<std::vector<double>>> confusion;
  // Smoothed log-likelihood (log p(labels | params) plus the log of the
  // Dirichlet pseudo-count prior) after each M-step; EM never decreases it.
  std::vector<double> log_likelihood_trace;
  int iterations = 0;
  bool converged = false;
  // Set when the input has a single item or a single annotator: the fit still
  // runs, but its parameters are not identifiable.
  bool degenerate = false;
};

struct DawidSkeneResult {
  DawidSkeneModel model;
  std::vector<FusedLabel> labels;
};

absl::StatusOr<DawidSkeneResult> DawidSkene(const LabelMatrix& matrix,
                                            const EmOptions& options = {});

struct MaceOptions : EmOptions {
  // The first restart uses the deterministic start (spam probability 0.5,
  // uniform spam distributions); extra restarts draw random starts from
  // `seed` and the run with the best final objective wins.
  int restarts = 1;
  uint64_t seed = 0;
};

struct MaceModel {
  std::vector<double> spam_prob;               // epsilon per annotator
  std::vector<std::vector<double>> spam_dist;  // xi per annotator
  std::vector<double> class_priors;
  std::vector<double> log_likelihood_trace;
  int iterations = 0;
  bool converged = false;
  bool degenerate = false;
};

struct MaceResult {
  MaceModel model;
  std::vector<FusedLabel> labels;
};

absl::StatusOr<MaceResult> Mace(const LabelMatrix& matrix,
                                const MaceOptions& options = {});

enum class CommentAgreement { kAgree, kDisagree, kUnclear };

std::string_view CommentAgreementName(CommentAgreement agreement);

// Majority of exactly three stances; a three-way tie or an "irrelevant"
// majority is unclear.
absl::StatusOr<CommentAgreement> FuseCommentAgreement(
    std::span<const CommentStance> stances);

// item_id, method, label ("unclear" for ties), posterior (comma-separated).
std::string FusedLabelsToTsv(std::span<const FusedLabel> labels);
absl::StatusOr<std::vector<FusedLabel>> ParseFusedLabels(std::string_view tsv);

// Versioned JSON dumps.
std::string DawidSkeneModelToJson(const DawidSkeneModel& model,
                                  const LabelMatrix& matrix);
std::string MaceModelToJson(const MaceModel& model, const LabelMatrix& matrix);

}  // namespace aestk

#endif  // AESTK_FUSE_H_
