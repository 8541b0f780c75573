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

#ifndef AESTK_METRICS_H_
#define AESTK_METRICS_H_

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"

namespace aestk {

struct ConfusionCounts {
  int tp = 0;
  int fp = 0;
  int fn = 0;
  int tn = 0;

  int total() const { return tp + fp + fn + tn; }
};

// Binary metrics with the positive class = 1. A zero denominator yields 0 and
// sets the matching *_undefined flag.
struct Evaluation {
  ConfusionCounts counts;
  double precision = 0.0;
  double recall = 0.0;
  double f1_binary = 0.0;
  double f1_macro = 0.0;  // unweighted mean of per-class F1
  double accuracy = 0.0;
  bool precision_undefined = false;
  bool recall_undefined = false;
};

absl::StatusOr<ConfusionCounts> CountConfusion(std::span<const int> pred,
                                               std::span<const int> gold);
Evaluation EvaluateCounts(const ConfusionCounts& counts);
absl::StatusOr<Evaluation> Evaluate(std::span<const int> pred,
                                    std::span<const int> gold);

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;  // n-1 sample deviation / sqrt(n); 0 for n = 1
};

absl::StatusOr<MeanSe> MeanAndSe(std::span<const double> values);

// Rows Precision / Recall / F1 (binary) / F1 (macro); one column per method.
std::string AggregationReportTsv(
    std::span<const std::pair<std::string, Evaluation>> columns);

// Rows Precision / Recall / F1 Binary / Accuracy; each cell "mean (se)" over
// seeds, one column per model.
std::string SeedReportTsv(
    std::span<const std::pair<std::string, std::vector<Evaluation>>> columns);

}  // namespace aestk

#endif  // AESTK_METRICS_H_
