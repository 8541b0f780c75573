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


// Dictionary-based word-category scoring. A lexicon maps category names to
// patterns; a pattern is a literal token or a prefix ending in '*'. Scores are
// the percentage of a document's tokens that match each category.
//
// The bundled starter lexicon is a small open word list; it is not LIWC and
// does not reproduce any licensed dictionary.

#ifndef AESTK_LEXICON_H_
#define AESTK_LEXICON_H_

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "aestk/metrics.h"
#include "aestk/table_io.h"

namespace aestk {

class Lexicon {
 public:
  // File format: `%name` opens a category; each following non-blank line is
  // one pattern. Lines starting with '#' are comments.
  static absl::StatusOr<Lexicon> Parse(std::string_view text);
  static absl::StatusOr<Lexicon> Load(const std::string& path);
  static absl::StatusOr<Lexicon> FromCategories(
      std::vector<std::pair<std::string, std::vector<std::string>>> categories);

  const std::vector<std::string>& categories() const { return names_; }
  const std::vector<std::string>& patterns(size_t category) const {
    return patterns_[category];
  }

  // Indices of the categories `token` (already lowercase) belongs to.
  std::vector<size_t> Match(std::string_view token) const;

  std::string ToText() const;

 private:
  std::vector<std::string> names_;
  std::vector<std::vector<std::string>> patterns_;
  // Literal pattern -> categories; prefixes are kept sorted for lookup.
  std::map<std::string, std::vector<size_t>, std::less<>> literals_;
  std::vector<std::pair<std::string, size_t>> prefixes_;
};

Lexicon StarterLexicon();

struct LexiconScore {
  std::string post_id;
  int total_tokens = 0;
  std::vector<double> percentages;  // aligned with Lexicon::categories()
};

// Errors on a document without tokens.
absl::StatusOr<LexiconScore> ScoreDocument(std::string_view post_id,
                                           std::string_view text,
                                           const Lexicon& lexicon);

// A user-supplied linear combination of category scores, e.g. a stand-in for
// a proprietary summary variable.
struct Composite {
  std::string name;
  double intercept = 0.0;
  std::map<std::string, double> weights;  // category name -> coefficient
};

// JSON list of {"name", "intercept", "weights": {category: coefficient}}.
absl::StatusOr<std::vector<Composite>> ParseComposites(std::string_view json);

// One value per composite, in order; unknown categories are an error.
absl::StatusOr<std::vector<double>> ApplyComposites(
    const LexiconScore& score, const Lexicon& lexicon,
    std::span<const Composite> composites);

// Where a variable sits in the report: theme and factor group rows the way a
// published summary table would; unlisted variables land in "other".
struct VariableLayout {
  std::string variable;
  std::string theme;
  std::string factor;
};

std::vector<VariableLayout> StarterLayout();

struct GroupStatsRow {
  std::string theme;
  std::string factor;
  std::string variable;
  int label = 0;
  int64_t n = 0;
  MeanSe stats;
};

struct GroupStatsReport {
  std::vector<GroupStatsRow> rows;
  std::vector<std::string> warnings;

  Table ToTable() const;
};

// `variables` names the score columns (categories then composites);
// `values[i]` holds post i's row. Rows follow `layout` order, then any
// remaining variables; Non-AES precedes AES. Empty groups are omitted with a
// warning.
absl::StatusOr<GroupStatsReport> GroupStats(
    std::span<const std::string> variables,
    std::span<const std::vector<double>> values, std::span<const int> labels,
    std::span<const VariableLayout> layout);

}  // namespace aestk

#endif  // AESTK_LEXICON_H_
