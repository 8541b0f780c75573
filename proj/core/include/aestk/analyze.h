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


// Findings-layer analytics over a labeled corpus: prevalence, engagement,
// comment agreement, codebook tabulation and cross-platform comparison.
// Every report renders to a delimited table and to a long "chart-ready"
// format with one value per row.

#ifndef AESTK_ANALYZE_H_
#define AESTK_ANALYZE_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "aestk/corpus.h"
#include "aestk/fuse.h"
#include "aestk/metrics.h"
#include "aestk/table_io.h"

namespace aestk {

enum class LabelSource { kHuman, kModel };

std::string_view LabelSourceName(LabelSource source);

struct LabeledPost {
  Post post;
  int label = 0;
  LabelSource source = LabelSource::kModel;
};

struct LabeledCorpus {
  std::vector<LabeledPost> posts;
};

// Human labels win over model labels. A post with neither is an error, as is
// a label outside {0, 1}.
absl::StatusOr<LabeledCorpus> BuildLabeledCorpus(
    std::span<const Post> posts, const std::map<std::string, int>& human,
    const std::map<std::string, int>& model);

// Reads `id<TAB>...<TAB>label` tables such as fused-label or prediction
// files. The id column is `item_id` or `post_id`; rows whose label cell is
// empty or "unclear" are skipped.
absl::StatusOr<std::map<std::string, int>> ParseLabelMap(std::string_view tsv);

struct BootstrapOptions {
  int iterations = 2000;
  double level = 0.95;
  uint64_t seed = 0;
};

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

// Percentile bootstrap for the mean of 0/1 outcomes. The interval is widened
// if needed so it always contains the point estimate.
absl::StatusOr<Interval> BootstrapProportion(std::span<const int> outcomes,
                                             const BootstrapOptions& options);

inline constexpr std::string_view kOverallGroup = "overall";

struct PrevalenceRow {
  std::string group;  // category name or kOverallGroup
  int64_t positives = 0;
  int64_t total = 0;
  double proportion = 0.0;
  Interval ci;
  // Filled by PrevalenceAcrossRuns: spread of the proportion over model runs.
  std::optional<MeanSe> run_stats;
  std::optional<Interval> run_ci;
};

struct PrevalenceReport {
  std::vector<PrevalenceRow> rows;
  std::vector<std::string> warnings;

  Table ToTable() const;
  Table ToLongTable() const;
};

// One row per requested category in the given order, then a pooled overall
// row. Categories without posts are omitted with a warning.
absl::StatusOr<PrevalenceReport> PrevalenceByCategory(
    const LabeledCorpus& corpus, std::span<const Category> categories,
    const BootstrapOptions& options);

// Prevalence of the first run with bootstrap CIs, plus mean/SE and a normal
// approximation interval across all runs (e.g. models trained with different
// seeds).
absl::StatusOr<PrevalenceReport> PrevalenceAcrossRuns(
    std::span<const LabeledCorpus> runs, std::span<const Category> categories,
    const BootstrapOptions& options);

struct EngagementOptions {
  bool include_views = false;
};

struct EngagementRow {
  Category category = Category::kConspiracy;
  int label = 0;
  int64_t posts = 0;
  MeanSe comments;
  MeanSe likes;
  MeanSe shares;
  std::optional<MeanSe> views;
};

struct EngagementReport {
  std::vector<EngagementRow> rows;  // by category, then label 0 before 1
  std::vector<std::string> notes;

  Table ToTable() const;
  Table ToLongTable() const;
};

EngagementReport EngagementByLabel(const LabeledCorpus& corpus,
                                   const EngagementOptions& options);

struct FusedComment {
  std::string comment_id;
  std::string post_id;
  CommentAgreement agreement = CommentAgreement::kUnclear;
};

struct AgreementRow {
  Category category = Category::kConspiracy;
  int label = 0;
  int64_t agree = 0;
  int64_t disagree = 0;
  int64_t unclear = 0;

  int64_t total() const { return agree + disagree + unclear; }
  double share(CommentAgreement a) const;
};

struct AgreementReport {
  std::vector<AgreementRow> rows;

  Table ToTable() const;
  Table ToLongTable() const;
};

// Groups comments by the category and label of their post. A comment whose
// post is not in the corpus is an error.
absl::StatusOr<AgreementReport> AgreementDistribution(
    std::span<const FusedComment> comments, const LabeledCorpus& corpus);

// Parses `comment_id<TAB>post_id<TAB>agreement` rows with a header.
absl::StatusOr<std::vector<FusedComment>> ParseFusedComments(
    std::string_view tsv);

struct Code {
  std::string id;
  std::string description;
};

struct Codebook {
  std::string name;
  std::vector<Code> codes;
  bool multi_select = false;
};

absl::Status ValidateCodebook(const Codebook& codebook);

// Target institutions of AES; a post may name several.
Codebook InstitutionsCodebook();
// How a video is shot; exactly one style per post.
Codebook VisualStyleCodebook();

// JSON: {"name": ..., "multi_select": bool, "codes": [{"id", "description"}]}
absl::StatusOr<Codebook> ParseCodebook(std::string_view json);

struct CodedPost {
  std::string post_id;
  Category category = Category::kConspiracy;
  std::vector<std::string> codes;
};

// Parses `post_id<TAB>category<TAB>codes` rows with a header; codes are
// separated by ';'.
absl::StatusOr<std::vector<CodedPost>> ParseCodedPosts(std::string_view tsv);

struct CodebookTable {
  std::string codebook;
  std::vector<Category> categories;   // columns, in category order
  std::vector<int64_t> posts;         // per column
  std::vector<std::string> code_ids;  // rows, in codebook order
  std::vector<std::vector<double>> proportions;  // [code][category]

  Table ToTable() const;
  Table ToLongTable() const;
};

// Unknown codes are an error. One-per-post codebooks require exactly one
// code per post, so each column sums to 1; multi-select columns may exceed 1.
absl::StatusOr<CodebookTable> CodebookTabulate(std::span<const CodedPost> posts,
                                               const Codebook& codebook);

struct PlatformCorpus {
  std::string platform;
  LabeledCorpus corpus;
};

struct CrossPlatformReport {
  std::vector<std::string> platforms;
  std::vector<Category> categories;
  // [platform][category]; nullopt when the platform has no posts there.
  std::vector<std::vector<std::optional<double>>> prevalence;
  // 1 = highest prevalence on that platform; ties share the better rank.
  std::vector<std::vector<std::optional<int>>> rank;
  std::vector<bool> rank_consistent;  // per category
  std::vector<std::string> warnings;

  bool all_rank_consistent() const;
  Table ToTable() const;
  Table ToLongTable() const;
};

absl::StatusOr<CrossPlatformReport> CrossPlatform(
    std::span<const PlatformCorpus> platforms,
    std::span<const Category> categories);

// Renders a table followed by `# `-prefixed footer lines.
std::string TableWithFooter(const Table& table,
                            std::span<const std::string> footer);

}  // namespace aestk

#endif  // AESTK_ANALYZE_H_
