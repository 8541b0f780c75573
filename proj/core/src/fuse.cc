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
#include <limits>
#include <map>
#include <numeric>

#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "aestk/random.h"
#include "aestk/table_io.h"
#include "json.hpp"
#include "view.h"

namespace aestk {

using internal::Av;
namespace {

using json = nlohmann::json;
using Matrix = std::vector<std::vector<double>>;

constexpr double kTieTolerance = 1e-12;

std::optional<int> ArgmaxOrTie(const std::vector<double>& p) {
  int best = 0;
  for (int k = 1; k < static_cast<int>(p.size()); ++k) {
    if (p[k] > p[best]) best = k;
  }
  for (int k = 0; k < static_cast<int>(p.size()); ++k) {
    if (k != best && std::abs(p[k] - p[best]) <= kTieTolerance) {
      return std::nullopt;
    }
  }
  return best;
}

// Sums in ascending order. The result depends only on the multiset of
// terms, so relabelling items, annotators or classes cannot change a fit by
// even one rounding step; exact symmetries of an instance survive EM.
double OrderFreeSum(std::vector<double>& terms) {
  std::sort(terms.begin(), terms.end());
  double sum = 0.0;
  for (double x : terms) sum += x;
  return sum;
}

double LogSumExp(const std::vector<double>& a) {
  double m = *std::max_element(a.begin(), a.end());
  if (!std::isfinite(m)) return m;
  std::vector<double> terms;
  terms.reserve(a.size());
  for (double x : a) terms.push_back(std::exp(x - m));
  return m + std::log(OrderFreeSum(terms));
}

// Normalizes log-weights in place into probabilities; returns the log of the
// normalizer.
double NormalizeLog(std::vector<double>& a) {
  double z = LogSumExp(a);
  for (double& x : a) x = std::exp(x - z);
  return z;
}

Matrix VoteFractions(const LabelMatrix& matrix) {
  Matrix posterior(matrix.num_items(),
                   std::vector<double>(matrix.num_classes(), 0.0));
  for (int i = 0; i < matrix.num_items(); ++i) {
    const auto& labels = matrix.labels_for(i);
    for (auto [annotator, label] : labels) posterior[i][label] += 1.0;
    for (double& p : posterior[i]) p /= static_cast<double>(labels.size());
  }
  return posterior;
}

std::vector<FusedLabel> LabelsFromPosterior(const LabelMatrix& matrix,
                                            Matrix posterior,
                                            FusionMethod method) {
  std::vector<FusedLabel> labels;
  labels.reserve(matrix.num_items());
  for (int i = 0; i < matrix.num_items(); ++i) {
    FusedLabel fused;
    fused.item_id = matrix.items()[i];
    fused.label = ArgmaxOrTie(posterior[i]);
    fused.posterior = std::move(posterior[i]);
    fused.method = method;
    labels.push_back(std::move(fused));
  }
  return labels;
}

bool IsDegenerate(const LabelMatrix& matrix) {
  return matrix.num_items() <= 1 || matrix.num_annotators() <= 1;
}

absl::Status ValidateOptions(const EmOptions& options) {
  if (options.max_iters < 1) {
    return absl::InvalidArgumentError("max_iters must be >= 1");
  }
  if (options.smoothing < 0 || options.tol < 0) {
    return absl::InvalidArgumentError("smoothing and tol must be >= 0");
  }
  return absl::OkStatus();
}

// Smoothed M-step for a multinomial: (count + s) / (total + K s). With zero
// smoothing and zero total the result is uniform.
void SmoothedNormalize(std::vector<double>& counts, double smoothing) {
  double total = 0.0;
  for (double& c : counts) {
    c += smoothing;
    total += c;
  }
  if (total <= 0.0) {
    std::fill(counts.begin(), counts.end(), 1.0 / counts.size());
    return;
  }
  for (double& c : counts) c /= total;
}

// s * sum(log p): the log Dirichlet(1 + s) density up to a constant.
double LogPrior(const std::vector<double>& probs, double smoothing) {
  if (smoothing == 0.0) return 0.0;
  double sum = 0.0;
  for (double p : probs) sum += std::log(p);
  return smoothing * sum;
}

// ---- Dawid-Skene ----

struct DsParams {
  std::vector<double> priors;
  std::vector<Matrix> confusion;
};

DsParams DsMStep(const LabelMatrix& matrix, const Matrix& posterior,
                 double smoothing) {
  const int k = matrix.num_classes();
  const int m = matrix.num_annotators();
  // Contributions per cell, reduced with OrderFreeSum.
  std::vector<std::vector<double>> prior_terms(k);
  std::vector<std::vector<double>> cell_terms(static_cast<size_t>(m) * k * k);
  auto cell = [&](int j, int t, int l) -> std::vector<double>& {
    return cell_terms[(static_cast<size_t>(j) * k + t) * k + l];
  };
  for (int i = 0; i < matrix.num_items(); ++i) {
    for (int t = 0; t < k; ++t) prior_terms[t].push_back(posterior[i][t]);
    for (auto [annotator, label] : matrix.labels_for(i)) {
      for (int t = 0; t < k; ++t) {
        cell(annotator, t, label).push_back(posterior[i][t]);
      }
    }
  }
  DsParams params;
  params.priors.assign(k, 0.0);
  params.confusion.assign(m, Matrix(k, std::vector<double>(k, 0.0)));
  for (int t = 0; t < k; ++t) params.priors[t] = OrderFreeSum(prior_terms[t]);
  for (int j = 0; j < m; ++j) {
    for (int t = 0; t < k; ++t) {
      for (int l = 0; l < k; ++l) {
        params.confusion[j][t][l] = OrderFreeSum(cell(j, t, l));
      }
    }
  }
  SmoothedNormalize(params.priors, smoothing);
  for (auto& rows : params.confusion) {
    for (auto& row : rows) SmoothedNormalize(row, smoothing);
  }
  return params;
}

// Returns the log-likelihood of the labels under `params` and writes item
// posteriors.
double DsEStep(const LabelMatrix& matrix, const DsParams& params,
               Matrix& posterior) {
  const int k = matrix.num_classes();
  std::vector<double> item_ll;
  std::vector<double> log_weights(k);
  std::vector<double> terms;
  for (int i = 0; i < matrix.num_items(); ++i) {
    for (int t = 0; t < k; ++t) {
      terms.assign(1, std::log(params.priors[t]));
      for (auto [annotator, label] : matrix.labels_for(i)) {
        terms.push_back(std::log(params.confusion[annotator][t][label]));
      }
      log_weights[t] = OrderFreeSum(terms);
    }
    item_ll.push_back(NormalizeLog(log_weights));
    posterior[i] = log_weights;
  }
  return OrderFreeSum(item_ll);
}

double DsLogPrior(const DsParams& params, double smoothing) {
  double total = LogPrior(params.priors, smoothing);
  for (const auto& rows : params.confusion) {
    for (const auto& row : rows) total += LogPrior(row, smoothing);
  }
  return total;
}

// ---- MACE ----

struct MaceParams {
  std::vector<double> priors;
  std::vector<double> spam;
  Matrix spam_dist;
};

double ReportProb(const MaceParams& params, int annotator, int truth,
                  int reported) {
  const double eps = params.spam[annotator];
  return (reported == truth ? 1.0 - eps : 0.0) +
         eps * params.spam_dist[annotator][reported];
}

double MaceEStep(const LabelMatrix& matrix, const MaceParams& params,
                 Matrix& posterior) {
  const int k = matrix.num_classes();
  std::vector<double> item_ll;
  std::vector<double> log_weights(k);
  std::vector<double> terms;
  for (int i = 0; i < matrix.num_items(); ++i) {
    for (int t = 0; t < k; ++t) {
      terms.assign(1, std::log(params.priors[t]));
      for (auto [annotator, label] : matrix.labels_for(i)) {
        terms.push_back(std::log(ReportProb(params, annotator, t, label)));
      }
      log_weights[t] = OrderFreeSum(terms);
    }
    item_ll.push_back(NormalizeLog(log_weights));
    posterior[i] = log_weights;
  }
  return OrderFreeSum(item_ll);
}

MaceParams MaceMStep(const LabelMatrix& matrix, const MaceParams& current,
                     const Matrix& posterior, double smoothing) {
  const int k = matrix.num_classes();
  const int m = matrix.num_annotators();
  std::vector<double> spam_count(m, 0.0);
  std::vector<double> copy_count(m, 0.0);
  Matrix dist_count(m, std::vector<double>(k, 0.0));
  std::vector<double> prior_count(k, 0.0);
  for (int i = 0; i < matrix.num_items(); ++i) {
    for (int t = 0; t < k; ++t) prior_count[t] += posterior[i][t];
    for (auto [annotator, label] : matrix.labels_for(i)) {
      const double spam_term =
          current.spam[annotator] * current.spam_dist[annotator][label];
      for (int t = 0; t < k; ++t) {
        const double total = ReportProb(current, annotator, t, label);
        // P(spam | truth t, report) under the current parameters.
        const double spam_given_t = total > 0.0 ? spam_term / total : 0.0;
        spam_count[annotator] += posterior[i][t] * spam_given_t;
        copy_count[annotator] += posterior[i][t] * (1.0 - spam_given_t);
        dist_count[annotator][label] += posterior[i][t] * spam_given_t;
      }
    }
  }
  MaceParams next;
  next.priors = prior_count;
  SmoothedNormalize(next.priors, smoothing);
  next.spam.resize(m);
  next.spam_dist = dist_count;
  for (int j = 0; j < m; ++j) {
    std::vector<double> eps = {spam_count[j], copy_count[j]};
    SmoothedNormalize(eps, smoothing);
    next.spam[j] = eps[0];
    SmoothedNormalize(next.spam_dist[j], smoothing);
  }
  return next;
}

double MaceLogPrior(const MaceParams& params, double smoothing) {
  double total = LogPrior(params.priors, smoothing);
  for (size_t j = 0; j < params.spam.size(); ++j) {
    total += LogPrior({params.spam[j], 1.0 - params.spam[j]}, smoothing);
    total += LogPrior(params.spam_dist[j], smoothing);
  }
  return total;
}

struct MaceRun {
  MaceParams params;
  Matrix posterior;
  std::vector<double> trace;
  int iterations = 0;
  bool converged = false;
};

MaceRun RunMace(const LabelMatrix& matrix, MaceParams params,
                const EmOptions& options) {
  MaceRun run;
  run.posterior.assign(matrix.num_items(), {});
  double ll = MaceEStep(matrix, params, run.posterior);
  run.trace.push_back(ll + MaceLogPrior(params, options.smoothing));
  for (int it = 1; it <= options.max_iters; ++it) {
    params = MaceMStep(matrix, params, run.posterior, options.smoothing);
    ll = MaceEStep(matrix, params, run.posterior);
    run.trace.push_back(ll + MaceLogPrior(params, options.smoothing));
    run.iterations = it;
    const double gain = run.trace.back() - run.trace[run.trace.size() - 2];
    if (gain < options.tol) {
      run.converged = true;
      break;
    }
  }
  run.params = std::move(params);
  return run;
}

}  // namespace

absl::StatusOr<LabelMatrix> LabelMatrix::Create(
    std::vector<std::string> items, std::vector<std::string> annotators,
    std::span<const LabelEntry> entries, int num_classes) {
  if (num_classes < 2) {
    return absl::InvalidArgumentError("num_classes must be >= 2");
  }
  LabelMatrix matrix;
  matrix.items_ = std::move(items);
  matrix.annotators_ = std::move(annotators);
  matrix.num_classes_ = num_classes;
  matrix.by_item_.resize(matrix.items_.size());
  for (const LabelEntry& e : entries) {
    if (e.item < 0 || e.item >= matrix.num_items() || e.annotator < 0 ||
        e.annotator >= matrix.num_annotators()) {
      return absl::OutOfRangeError(absl::StrFormat(
          "entry (%d, %d) outside %d x %d matrix", e.item, e.annotator,
          matrix.num_items(), matrix.num_annotators()));
    }
    if (e.label < 0 || e.label >= num_classes) {
      return absl::OutOfRangeError(absl::StrFormat(
          "label %d outside 0..%d for item %s", e.label, num_classes - 1,
          matrix.items_[e.item]));
    }
    matrix.by_item_[e.item].push_back({e.annotator, e.label});
  }
  for (int i = 0; i < matrix.num_items(); ++i) {
    auto& labels = matrix.by_item_[i];
    if (labels.empty()) {
      return absl::InvalidArgumentError(
          absl::StrCat("item ", matrix.items_[i], " has no labels"));
    }
    std::sort(labels.begin(), labels.end());
    for (size_t k = 1; k < labels.size(); ++k) {
      if (labels[k].first == labels[k - 1].first) {
        return absl::InvalidArgumentError(
            absl::StrCat("annotator ", matrix.annotators_[labels[k].first],
                         " labelled item ", matrix.items_[i], " twice"));
      }
    }
  }
  return matrix;
}

namespace {

template <typename LabelFn>
absl::StatusOr<LabelMatrix> MatrixFromRecords(
    std::span<const AnnotationRecord> records, Target target, int num_classes,
    LabelFn&& to_label) {
  std::map<std::string, int> items;
  std::map<std::string, int> annotators;
  for (const auto& r : records) {
    if (r.target != target || r.padding) continue;
    items.emplace(r.item_id, 0);
    annotators.emplace(r.annotator_id, 0);
  }
  std::vector<std::string> item_ids;
  std::vector<std::string> annotator_ids;
  for (auto& [id, index] : items) {
    index = static_cast<int>(item_ids.size());
    item_ids.push_back(id);
  }
  for (auto& [id, index] : annotators) {
    index = static_cast<int>(annotator_ids.size());
    annotator_ids.push_back(id);
  }
  std::vector<LabelEntry> entries;
  for (const auto& r : records) {
    if (r.target != target || r.padding) continue;
    absl::StatusOr<int> label = to_label(r.scale);
    if (!label.ok()) return label.status();
    entries.push_back({items[r.item_id], annotators[r.annotator_id], *label});
  }
  return LabelMatrix::Create(std::move(item_ids), std::move(annotator_ids),
                             entries, num_classes);
}

}  // namespace

absl::StatusOr<LabelMatrix> VideoLabelMatrix(
    std::span<const AnnotationRecord> records) {
  return MatrixFromRecords(records, Target::kVideo, 2, BinarizeVideoScale);
}

absl::StatusOr<LabelMatrix> CommentLabelMatrix(
    std::span<const AnnotationRecord> records) {
  return MatrixFromRecords(
      records, Target::kComment, 3, [](int scale) -> absl::StatusOr<int> {
        auto stance = TernarizeCommentScale(scale);
        if (!stance.ok()) return stance.status();
        return static_cast<int>(*stance);
      });
}

std::string_view FusionMethodName(FusionMethod method) {
  switch (method) {
    case FusionMethod::kMajority:
      return "majority";
    case FusionMethod::kDawidSkene:
      return "dawid_skene";
    case FusionMethod::kMace:
      return "mace";
  }
  return "majority";
}

absl::StatusOr<FusionMethod> ParseFusionMethod(std::string_view name) {
  if (name == "majority" || name == "mv") return FusionMethod::kMajority;
  if (name == "ds" || name == "dawid_skene") return FusionMethod::kDawidSkene;
  if (name == "mace") return FusionMethod::kMace;
  return absl::InvalidArgumentError(
      absl::StrCat("unknown fusion method '", Av(name), "'"));
}

absl::StatusOr<std::vector<FusedLabel>> MajorityVote(
    const LabelMatrix& matrix) {
  for (int i = 0; i < matrix.num_items(); ++i) {
    if (matrix.labels_for(i).empty()) {
      return absl::InvalidArgumentError(
          absl::StrCat("item ", matrix.items()[i], " has no labels"));
    }
  }
  return LabelsFromPosterior(matrix, VoteFractions(matrix),
                             FusionMethod::kMajority);
}

absl::StatusOr<DawidSkeneResult> DawidSkene(const LabelMatrix& matrix,
                                            const EmOptions& options) {
  absl::Status status = ValidateOptions(options);
  if (!status.ok()) return status;
  DawidSkeneResult result;
  Matrix posterior = VoteFractions(matrix);

  // Still fitted when degenerate; the smoothing keeps EM well defined.
  result.model.degenerate = IsDegenerate(matrix);

  DsParams params;
  std::vector<double>& trace = result.model.log_likelihood_trace;
  for (int it = 1; it <= options.max_iters; ++it) {
    params = DsMStep(matrix, posterior, options.smoothing);
    const double ll = DsEStep(matrix, params, posterior);
    trace.push_back(ll + DsLogPrior(params, options.smoothing));
    result.model.iterations = it;
    if (trace.size() >= 2 && trace.back() - trace[trace.size() - 2] < options.tol) {
      result.model.converged = true;
      break;
    }
  }
  result.model.class_priors = std::move(params.priors);
  result.model.confusion = std::move(params.confusion);
  result.labels = LabelsFromPosterior(matrix, std::move(posterior),
                                      FusionMethod::kDawidSkene);
  return result;
}

absl::StatusOr<MaceResult> Mace(const LabelMatrix& matrix,
                                const MaceOptions& options) {
  absl::Status status = ValidateOptions(options);
  if (!status.ok()) return status;
  if (options.restarts < 1) {
    return absl::InvalidArgumentError("restarts must be >= 1");
  }
  const int k = matrix.num_classes();
  const int m = matrix.num_annotators();
  MaceResult result;

  if (IsDegenerate(matrix)) {
    result.model.spam_prob.assign(m, 0.5);
    result.model.spam_dist.assign(m, std::vector<double>(k, 1.0 / k));
    result.model.class_priors.assign(k, 1.0 / k);
    result.model.degenerate = true;
    result.labels = LabelsFromPosterior(matrix, VoteFractions(matrix),
                                        FusionMethod::kMace);
    return result;
  }

  Rng rng(options.seed);
  std::optional<MaceRun> best;
  for (int restart = 0; restart < options.restarts; ++restart) {
    MaceParams start;
    start.priors.assign(k, 1.0 / k);
    start.spam.assign(m, 0.5);
    start.spam_dist.assign(m, std::vector<double>(k, 1.0 / k));
    if (restart > 0) {
      for (int j = 0; j < m; ++j) {
        start.spam[j] = 0.1 + 0.8 * rng.UniformDouble();
        for (double& x : start.spam_dist[j]) x = 0.1 + rng.UniformDouble();
        SmoothedNormalize(start.spam_dist[j], 0.0);
      }
    }
    MaceRun run = RunMace(matrix, std::move(start), options);
    if (!best || run.trace.back() > best->trace.back()) best = std::move(run);
  }

  result.model.spam_prob = std::move(best->params.spam);
  result.model.spam_dist = std::move(best->params.spam_dist);
  result.model.class_priors = std::move(best->params.priors);
  result.model.log_likelihood_trace = std::move(best->trace);
  result.model.iterations = best->iterations;
  result.model.converged = best->converged;
  result.labels = LabelsFromPosterior(matrix, std::move(best->posterior),
                                      FusionMethod::kMace);
  return result;
}

std::string_view CommentAgreementName(CommentAgreement agreement) {
  switch (agreement) {
    case CommentAgreement::kAgree:
      return "agree";
    case CommentAgreement::kDisagree:
      return "disagree";
    case CommentAgreement::kUnclear:
      return "unclear";
  }
  return "unclear";
}

absl::StatusOr<CommentAgreement> FuseCommentAgreement(
    std::span<const CommentStance> stances) {
  if (stances.size() != 3) {
    return absl::InvalidArgumentError(absl::StrCat(
        "comment agreement needs exactly 3 labels, got ", stances.size()));
  }
  int counts[3] = {0, 0, 0};
  for (CommentStance s : stances) ++counts[static_cast<int>(s)];
  int majority = static_cast<int>(std::max_element(counts, counts + 3) - counts);
  if (counts[majority] < 2) return CommentAgreement::kUnclear;
  switch (static_cast<CommentStance>(majority)) {
    case CommentStance::kAgree:
      return CommentAgreement::kAgree;
    case CommentStance::kDisagree:
      return CommentAgreement::kDisagree;
    case CommentStance::kIrrelevant:
      return CommentAgreement::kUnclear;
  }
  return CommentAgreement::kUnclear;
}

std::string FusedLabelsToTsv(std::span<const FusedLabel> labels) {
  Table table{{"item_id", "method", "label", "posterior"}, {}};
  for (const auto& l : labels) {
    table.rows.push_back(
        {l.item_id, std::string(FusionMethodName(l.method)),
         l.label ? absl::StrCat(*l.label) : "unclear",
         absl::StrJoin(l.posterior, ",", [](std::string* out, double p) {
           absl::StrAppend(out, absl::StrFormat("%.17g", p));
         })});
  }
  return FormatTsv(table);
}

absl::StatusOr<std::vector<FusedLabel>> ParseFusedLabels(std::string_view tsv) {
  auto table = ParseTsv(tsv);
  if (!table.ok()) return table.status();
  const int id_col = table->ColumnIndex("item_id");
  const int method_col = table->ColumnIndex("method");
  const int label_col = table->ColumnIndex("label");
  const int posterior_col = table->ColumnIndex("posterior");
  if (id_col < 0 || label_col < 0) {
    return absl::InvalidArgumentError(
        "fused label file needs item_id and label columns");
  }
  std::vector<FusedLabel> labels;
  for (const auto& row : table->rows) {
    FusedLabel l;
    l.item_id = row[id_col];
    if (method_col >= 0) {
      auto method = ParseFusionMethod(row[method_col]);
      if (!method.ok()) return method.status();
      l.method = *method;
    }
    if (row[label_col] != "unclear") {
      int label;
      if (!absl::SimpleAtoi(row[label_col], &label)) {
        return absl::InvalidArgumentError(
            absl::StrCat("bad label '", row[label_col], "' for ", l.item_id));
      }
      l.label = label;
    }
    if (posterior_col >= 0 && !row[posterior_col].empty()) {
      for (std::string_view part : SplitAny(row[posterior_col], ",")) {
        double p;
        if (!absl::SimpleAtod(Av(part), &p)) {
          return absl::InvalidArgumentError(
              absl::StrCat("bad posterior for ", l.item_id));
        }
        l.posterior.push_back(p);
      }
    }
    labels.push_back(std::move(l));
  }
  return labels;
}

std::string DawidSkeneModelToJson(const DawidSkeneModel& model,
                                  const LabelMatrix& matrix) {
  json j = {{"format", "aestk-fuse-model"},
            {"version", 1},
            {"method", "dawid_skene"},
            {"annotators", matrix.annotators()},
            {"class_priors", model.class_priors},
            {"confusion", model.confusion},
            {"log_likelihood_trace", model.log_likelihood_trace},
            {"iterations", model.iterations},
            {"converged", model.converged},
            {"degenerate", model.degenerate}};
  return j.dump(2) + "\n";
}

std::string MaceModelToJson(const MaceModel& model, const LabelMatrix& matrix) {
  json j = {{"format", "aestk-fuse-model"},
            {"version", 1},
            {"method", "mace"},
            {"annotators", matrix.annotators()},
            {"class_priors", model.class_priors},
            {"spam_prob", model.spam_prob},
            {"spam_dist", model.spam_dist},
            {"log_likelihood_trace", model.log_likelihood_trace},
            {"iterations", model.iterations},
            {"converged", model.converged},
            {"degenerate", model.degenerate}};
  return j.dump(2) + "\n";
}

}  // namespace aestk
