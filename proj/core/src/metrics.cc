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

#include "aestk/metrics.h"

#include <cmath>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "aestk/table_io.h"

namespace aestk {
namespace {

double Ratio(int num, int den, bool* undefined) {
  if (den == 0) {
    if (undefined != nullptr) *undefined = true;
    return 0.0;
  }
  return static_cast<double>(num) / den;
}

double F1(double precision, double recall) {
  return precision + recall > 0 ? 2 * precision * recall / (precision + recall)
                                : 0.0;
}

}  // namespace

absl::StatusOr<ConfusionCounts> CountConfusion(std::span<const int> pred,
                                               std::span<const int> gold) {
  if (pred.size() != gold.size()) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "%d predictions for %d gold labels", pred.size(), gold.size()));
  }
  if (pred.empty()) return absl::InvalidArgumentError("nothing to evaluate");
  ConfusionCounts c;
  for (size_t i = 0; i < pred.size(); ++i) {
    if ((pred[i] != 0 && pred[i] != 1) || (gold[i] != 0 && gold[i] != 1)) {
      return absl::InvalidArgumentError(
          absl::StrCat("non-binary label at position ", i));
    }
    if (pred[i] == 1) {
      gold[i] == 1 ? ++c.tp : ++c.fp;
    } else {
      gold[i] == 1 ? ++c.fn : ++c.tn;
    }
  }
  return c;
}

Evaluation EvaluateCounts(const ConfusionCounts& c) {
  Evaluation e;
  e.counts = c;
  e.precision = Ratio(c.tp, c.tp + c.fp, &e.precision_undefined);
  e.recall = Ratio(c.tp, c.tp + c.fn, &e.recall_undefined);
  e.f1_binary = F1(e.precision, e.recall);
  const double neg_precision = Ratio(c.tn, c.tn + c.fn, nullptr);
  const double neg_recall = Ratio(c.tn, c.tn + c.fp, nullptr);
  e.f1_macro = (e.f1_binary + F1(neg_precision, neg_recall)) / 2.0;
  e.accuracy = Ratio(c.tp + c.tn, c.total(), nullptr);
  return e;
}

absl::StatusOr<Evaluation> Evaluate(std::span<const int> pred,
                                    std::span<const int> gold) {
  auto counts = CountConfusion(pred, gold);
  if (!counts.ok()) return counts.status();
  return EvaluateCounts(*counts);
}

absl::StatusOr<MeanSe> MeanAndSe(std::span<const double> values) {
  if (values.empty()) return absl::InvalidArgumentError("no values");
  const double n = static_cast<double>(values.size());
  MeanSe out;
  for (double v : values) out.mean += v;
  out.mean /= n;
  if (values.size() == 1) return out;
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.se = std::sqrt(ss / (n - 1)) / std::sqrt(n);
  return out;
}

std::string AggregationReportTsv(
    std::span<const std::pair<std::string, Evaluation>> columns) {
  Table table;
  table.header.push_back("metric");
  for (const auto& [name, unused] : columns) table.header.push_back(name);
  const std::pair<const char*, double Evaluation::*> rows[] = {
      {"Precision", &Evaluation::precision},
      {"Recall", &Evaluation::recall},
      {"F1 Score (binary)", &Evaluation::f1_binary},
      {"F1 Score (macro)", &Evaluation::f1_macro},
  };
  for (auto [label, field] : rows) {
    std::vector<std::string> row = {label};
    for (const auto& [unused, eval] : columns) {
      row.push_back(absl::StrFormat("%.3f", eval.*field));
    }
    table.rows.push_back(std::move(row));
  }
  return FormatTsv(table);
}

std::string SeedReportTsv(
    std::span<const std::pair<std::string, std::vector<Evaluation>>> columns) {
  Table table;
  table.header.push_back("metric");
  for (const auto& [name, unused] : columns) table.header.push_back(name);
  const std::pair<const char*, double Evaluation::*> rows[] = {
      {"Precision", &Evaluation::precision},
      {"Recall", &Evaluation::recall},
      {"F1 Binary", &Evaluation::f1_binary},
      {"Accuracy", &Evaluation::accuracy},
  };
  for (auto [label, field] : rows) {
    std::vector<std::string> row = {label};
    for (const auto& [unused, evals] : columns) {
      std::vector<double> values;
      for (const auto& e : evals) values.push_back(e.*field);
      auto summary = MeanAndSe(values);
      row.push_back(summary.ok() ? absl::StrFormat("%.3f (%.3f)", summary->mean,
                                                   summary->se)
                                 : "N/A");
    }
    table.rows.push_back(std::move(row));
  }
  return FormatTsv(table);
}

}  // namespace aestk
