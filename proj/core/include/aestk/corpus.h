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

// Post/comment data model, tokenization, and the filtering funnel that turns a
// raw post dump into the analyzable dataset.

#ifndef AESTK_CORPUS_H_
#define AESTK_CORPUS_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace aestk {

enum class Category { kConspiracy, kFinance, kWellness, kFyp };

inline constexpr int kNumCategories = 4;

std::string_view CategoryName(Category category);
absl::StatusOr<Category> ParseCategory(std::string_view name);
inline int CategoryIndex(Category category) {
  return static_cast<int>(category);
}

struct Post {
  std::string post_id;
  Category category = Category::kConspiracy;
  std::string description;
  std::string transcript;
  int64_t created_at = 0;  // Unix seconds, UTC.
  std::string region;
  // No ordering is assumed between these: platforms report posts with zero
  // views and non-zero likes.
  int64_t like_count = 0;
  int64_t comment_count = 0;
  int64_t share_count = 0;
  int64_t view_count = 0;
};

struct Comment {
  std::string comment_id;
  std::string post_id;
  std::string text;
  int64_t like_count = 0;
};

struct Corpus {
  std::vector<Post> posts;
  std::vector<Comment> comments;
};

// The text a post is judged and classified on: transcript then description.
struct Document {
  std::string post_id;
  std::string text;
  int token_count = 0;
};

Document MakeDocument(const Post& post);

// Lowercases ASCII letters and splits on every run of bytes that are not
// ASCII alphanumerics. Bytes >= 0x80 are kept inside tokens so UTF-8 words
// survive intact.
std::vector<std::string> Tokenize(std::string_view text);
int CountTokens(std::string_view text);

struct KeywordSet {
  Category name = Category::kConspiracy;
  std::vector<std::string> phrases;  // lowercase
};

// The three collection keyword sets.
std::vector<KeywordSet> DefaultKeywordSets();
absl::StatusOr<KeywordSet> DefaultKeywordSet(Category category);

// Case-insensitive substring match of any phrase against `text`.
bool KeywordMatch(std::string_view text, const KeywordSet& keywords);

class LanguageDetector {
 public:
  virtual ~LanguageDetector() = default;
  // Returns a language tag such as "en", or "und" when undetermined.
  virtual std::string Detect(std::span<const std::string> tokens) const = 0;
};

// Tags text "en" when at least `min_fraction` of its tokens are common
// English function words.
class StopwordLanguageDetector : public LanguageDetector {
 public:
  explicit StopwordLanguageDetector(double min_fraction = 0.10)
      : min_fraction_(min_fraction) {}
  std::string Detect(std::span<const std::string> tokens) const override;

 private:
  double min_fraction_;
};

struct FunnelStage {
  std::string name;
  int64_t videos = 0;
  std::optional<int64_t> comments;  // nullopt when not tracked at this stage
};

class FunnelReport {
 public:
  // Fails if the new stage has more videos or comments than any tracked
  // earlier stage.
  absl::Status AddStage(std::string name, int64_t videos,
                        std::optional<int64_t> comments);
  const std::vector<FunnelStage>& stages() const { return stages_; }

  // "stage\tvideos\tcomments" with "N/A" for untracked comment counts.
  std::string ToTsv() const;

 private:
  std::vector<FunnelStage> stages_;
};

struct FunnelOptions {
  int min_tokens = 40;
  std::string language = "en";
  // When set, non-fyp posts must also match their category's keyword set.
  bool require_keywords = false;
  // Defaults to StopwordLanguageDetector when null.
  std::shared_ptr<const LanguageDetector> detector;
};

struct FunnelResult {
  Corpus corpus;
  FunnelReport report;
};

// Keeps posts whose document has at least `min_tokens` tokens and whose
// detected language matches. Comments follow their post; comment text is not
// filtered here (see FilterCommentsByTokens).
absl::StatusOr<FunnelResult> FilterFunnel(const Corpus& corpus,
                                          const FunnelOptions& options);

std::vector<Comment> FilterCommentsByTokens(std::span<const Comment> comments,
                                            int min_tokens);

// Line-delimited JSON. Each post line may carry its comments inline under
// "comments"; the optional comments file holds one comment object per line.
absl::StatusOr<Corpus> ParseCorpus(std::string_view posts_jsonl,
                                   std::string_view comments_jsonl = {});
absl::StatusOr<Corpus> LoadCorpus(const std::string& posts_path,
                                  const std::string& comments_path = "");

// Duplicate ids, dangling comment references, negative counts.
absl::Status ValidateCorpus(const Corpus& corpus);

std::string PostsToJsonl(std::span<const Post> posts);
std::string CommentsToJsonl(std::span<const Comment> comments);

// RFC 3339 UTC ("2023-05-01T12:00:00Z") <-> Unix seconds.
std::string FormatTimestamp(int64_t unix_seconds);
absl::StatusOr<int64_t> ParseTimestamp(std::string_view text);

}  // namespace aestk

#endif  // AESTK_CORPUS_H_
