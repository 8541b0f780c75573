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

#include "aestk/corpus.h"

#include <algorithm>
#include <cctype>
#include <unordered_map>
#include <unordered_set>

#include "absl/strings/ascii.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "absl/time/time.h"
#include "aestk/table_io.h"
#include "json.hpp"
#include "view.h"

namespace aestk {

using internal::Av;
using internal::Sv;
namespace {

using json = nlohmann::json;

constexpr std::string_view kCategoryNames[kNumCategories] = {
    "conspiracy", "finance", "wellness", "fyp"};

bool IsTokenByte(unsigned char c) {
  return std::isalnum(c) != 0 || c >= 0x80;
}

const std::unordered_set<std::string>& EnglishStopwords() {
  static const auto* const kWords = new std::unordered_set<std::string>{
      "a",     "about", "after", "all",   "also",  "am",    "an",
      "and",   "any",   "are",   "as",    "at",    "be",    "because",
      "been",  "but",   "by",    "can",   "could", "did",   "do",
      "does",  "for",   "from",  "get",   "go",    "had",   "has",
      "have",  "he",    "her",   "him",   "his",   "how",   "i",
      "if",    "in",    "into",  "is",    "it",    "its",   "just",
      "know",  "like",  "me",    "more",  "my",    "no",    "not",
      "now",   "of",    "on",    "one",   "only",  "or",    "our",
      "out",   "over",  "she",   "so",    "some",  "than",  "that",
      "the",   "their", "them",  "then",  "there", "these", "they",
      "this",  "those", "to",    "up",    "us",    "very",  "was",
      "we",    "were",  "what",  "when",  "where", "which", "who",
      "why",   "will",  "with",  "would", "you",   "your"};
  return *kWords;
}

absl::StatusOr<int64_t> ReadCount(const json& record, const char* field) {
  if (!record.contains(field)) return 0;
  const json& value = record.at(field);
  if (!value.is_number_integer()) {
    return absl::InvalidArgumentError(
        absl::StrCat("field '", field, "' must be an integer"));
  }
  int64_t count = value.get<int64_t>();
  if (count < 0) {
    return absl::InvalidArgumentError(
        absl::StrCat("field '", field, "' must be non-negative"));
  }
  return count;
}

std::string ReadString(const json& record, const char* field) {
  auto it = record.find(field);
  if (it == record.end() || it->is_null()) return "";
  return it->get<std::string>();
}

absl::StatusOr<Comment> CommentFromJson(const json& record,
                                        std::string_view parent_post) {
  Comment comment;
  comment.comment_id = ReadString(record, "comment_id");
  if (comment.comment_id.empty()) {
    return absl::InvalidArgumentError("comment without comment_id");
  }
  comment.post_id = ReadString(record, "post_id");
  if (comment.post_id.empty()) comment.post_id = std::string(parent_post);
  if (comment.post_id.empty()) {
    return absl::InvalidArgumentError(
        absl::StrCat("comment ", comment.comment_id, " without post_id"));
  }
  comment.text = ReadString(record, "text");
  auto likes = ReadCount(record, "like_count");
  if (!likes.ok()) return likes.status();
  comment.like_count = *likes;
  return comment;
}

absl::Status PostFromJson(const json& record, Corpus* corpus) {
  if (!record.is_object()) {
    return absl::InvalidArgumentError("record is not an object");
  }
  Post post;
  post.post_id = ReadString(record, "post_id");
  if (post.post_id.empty()) {
    return absl::InvalidArgumentError("post without post_id");
  }
  auto category = ParseCategory(ReadString(record, "category"));
  if (!category.ok()) return category.status();
  post.category = *category;
  post.description = ReadString(record, "description");
  post.transcript = ReadString(record, "transcript");
  post.region = ReadString(record, "region");
  if (record.contains("created_at")) {
    const json& created = record.at("created_at");
    if (created.is_number_integer()) {
      post.created_at = created.get<int64_t>();
    } else {
      auto parsed = ParseTimestamp(created.get<std::string>());
      if (!parsed.ok()) return parsed.status();
      post.created_at = *parsed;
    }
  }
  for (auto [field, target] :
       {std::pair{"like_count", &post.like_count},
        std::pair{"comment_count", &post.comment_count},
        std::pair{"share_count", &post.share_count},
        std::pair{"view_count", &post.view_count}}) {
    auto count = ReadCount(record, field);
    if (!count.ok()) return count.status();
    *target = *count;
  }
  if (record.contains("comments")) {
    for (const json& inline_comment : record.at("comments")) {
      auto comment = CommentFromJson(inline_comment, post.post_id);
      if (!comment.ok()) return comment.status();
      corpus->comments.push_back(*std::move(comment));
    }
  }
  corpus->posts.push_back(std::move(post));
  return absl::OkStatus();
}

template <typename Fn>
absl::Status ForEachJsonLine(std::string_view contents, std::string_view what,
                             Fn&& fn) {
  std::vector<std::string_view> lines = SplitLines(contents);
  for (size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = Sv(absl::StripAsciiWhitespace(Av(lines[i])));
    if (line.empty()) continue;
    absl::Status status;
    try {
      status = fn(json::parse(line));
    } catch (const json::exception& e) {
      status = absl::InvalidArgumentError(e.what());
    }
    if (!status.ok()) {
      return absl::InvalidArgumentError(absl::StrCat(
          Av(what), " line ", i + 1, ": ", status.message()));
    }
  }
  return absl::OkStatus();
}

}  // namespace

std::string_view CategoryName(Category category) {
  return kCategoryNames[CategoryIndex(category)];
}

absl::StatusOr<Category> ParseCategory(std::string_view name) {
  std::string lowered = absl::AsciiStrToLower(Av(name));
  for (int i = 0; i < kNumCategories; ++i) {
    if (kCategoryNames[i] == lowered) return static_cast<Category>(i);
  }
  return absl::InvalidArgumentError(
      absl::StrCat("unknown category '", Av(name), "'"));
}

Document MakeDocument(const Post& post) {
  Document doc;
  doc.post_id = post.post_id;
  if (post.transcript.empty()) {
    doc.text = post.description;
  } else if (post.description.empty()) {
    doc.text = post.transcript;
  } else {
    doc.text = absl::StrCat(post.transcript, " ", post.description);
  }
  doc.token_count = CountTokens(doc.text);
  return doc;
}

std::vector<std::string> Tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (IsTokenByte(c)) {
      current.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

int CountTokens(std::string_view text) {
  int count = 0;
  bool in_token = false;
  for (char ch : text) {
    bool token_byte = IsTokenByte(static_cast<unsigned char>(ch));
    if (token_byte && !in_token) ++count;
    in_token = token_byte;
  }
  return count;
}

std::vector<KeywordSet> DefaultKeywordSets() {
  return {
      {Category::kConspiracy,
       {"conspiracy", "flatearth", "propaganda", "illuminati"}},
      {Category::kFinance, {"finance", "stocks", "crypto", "realestate"}},
      {Category::kWellness, {"wellness", "health", "selfcare", "fitness"}},
  };
}

absl::StatusOr<KeywordSet> DefaultKeywordSet(Category category) {
  for (auto& set : DefaultKeywordSets()) {
    if (set.name == category) return set;
  }
  return absl::NotFoundError(absl::StrCat("no keyword set for category ",
                                          Av(CategoryName(category))));
}

bool KeywordMatch(std::string_view text, const KeywordSet& keywords) {
  if (text.empty()) return false;
  std::string lowered = absl::AsciiStrToLower(Av(text));
  for (const auto& phrase : keywords.phrases) {
    if (!phrase.empty() && lowered.find(phrase) != std::string::npos) {
      return true;
    }
  }
  return false;
}

std::string StopwordLanguageDetector::Detect(
    std::span<const std::string> tokens) const {
  if (tokens.empty()) return "und";
  const auto& stopwords = EnglishStopwords();
  size_t hits = std::count_if(tokens.begin(), tokens.end(),
                              [&](const std::string& t) {
                                return stopwords.contains(t);
                              });
  double fraction = static_cast<double>(hits) / tokens.size();
  return fraction >= min_fraction_ ? "en" : "und";
}

absl::Status FunnelReport::AddStage(std::string name, int64_t videos,
                                    std::optional<int64_t> comments) {
  if (videos < 0 || (comments && *comments < 0)) {
    return absl::InvalidArgumentError("negative stage count");
  }
  for (const auto& stage : stages_) {
    if (videos > stage.videos) {
      return absl::FailedPreconditionError(absl::StrCat(
          "stage '", name, "' has more videos than stage '", stage.name, "'"));
    }
    if (comments && stage.comments && *comments > *stage.comments) {
      return absl::FailedPreconditionError(
          absl::StrCat("stage '", name, "' has more comments than stage '",
                       stage.name, "'"));
    }
  }
  stages_.push_back({std::move(name), videos, comments});
  return absl::OkStatus();
}

std::string FunnelReport::ToTsv() const {
  Table table{{"stage", "videos", "comments"}, {}};
  for (const auto& stage : stages_) {
    table.rows.push_back(
        {stage.name, absl::StrCat(stage.videos),
         stage.comments ? absl::StrCat(*stage.comments) : "N/A"});
  }
  return FormatTsv(table);
}

absl::StatusOr<FunnelResult> FilterFunnel(const Corpus& corpus,
                                          const FunnelOptions& options) {
  if (options.min_tokens < 0) {
    return absl::InvalidArgumentError("min_tokens must be >= 0");
  }
  auto detector = options.detector;
  if (detector == nullptr) {
    detector = std::make_shared<StopwordLanguageDetector>();
  }
  std::vector<KeywordSet> keyword_sets = DefaultKeywordSets();

  FunnelResult result;
  absl::Status status = result.report.AddStage(
      "collection", static_cast<int64_t>(corpus.posts.size()),
      static_cast<int64_t>(corpus.comments.size()));
  if (!status.ok()) return status;

  std::unordered_set<std::string> kept;
  for (const Post& post : corpus.posts) {
    Document doc = MakeDocument(post);
    std::vector<std::string> tokens = Tokenize(doc.text);
    if (static_cast<int>(tokens.size()) < options.min_tokens) continue;
    if (tokens.empty()) continue;
    if (!options.language.empty() &&
        detector->Detect(tokens) != options.language) {
      continue;
    }
    if (options.require_keywords && post.category != Category::kFyp) {
      auto set = std::find_if(
          keyword_sets.begin(), keyword_sets.end(),
          [&](const KeywordSet& k) { return k.name == post.category; });
      if (set != keyword_sets.end() && !KeywordMatch(doc.text, *set)) {
        continue;
      }
    }
    kept.insert(post.post_id);
    result.corpus.posts.push_back(post);
  }
  for (const Comment& comment : corpus.comments) {
    if (kept.contains(comment.post_id)) result.corpus.comments.push_back(comment);
  }
  status = result.report.AddStage(
      "filtered", static_cast<int64_t>(result.corpus.posts.size()),
      static_cast<int64_t>(result.corpus.comments.size()));
  if (!status.ok()) return status;
  return result;
}

std::vector<Comment> FilterCommentsByTokens(std::span<const Comment> comments,
                                            int min_tokens) {
  std::vector<Comment> kept;
  for (const Comment& comment : comments) {
    if (CountTokens(comment.text) >= min_tokens) kept.push_back(comment);
  }
  return kept;
}

absl::Status ValidateCorpus(const Corpus& corpus) {
  std::unordered_set<std::string> post_ids;
  for (const Post& post : corpus.posts) {
    if (!post_ids.insert(post.post_id).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("duplicate post_id ", post.post_id));
    }
    if (post.like_count < 0 || post.comment_count < 0 ||
        post.share_count < 0 || post.view_count < 0) {
      return absl::InvalidArgumentError(
          absl::StrCat("negative count on post ", post.post_id));
    }
  }
  std::unordered_set<std::string> comment_ids;
  std::vector<std::string> dangling;
  for (const Comment& comment : corpus.comments) {
    if (!comment_ids.insert(comment.comment_id).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("duplicate comment_id ", comment.comment_id));
    }
    if (comment.like_count < 0) {
      return absl::InvalidArgumentError(
          absl::StrCat("negative count on comment ", comment.comment_id));
    }
    if (!post_ids.contains(comment.post_id)) {
      dangling.push_back(
          absl::StrCat(comment.comment_id, " -> ", comment.post_id));
    }
  }
  if (!dangling.empty()) {
    return absl::FailedPreconditionError(
        absl::StrCat("comments reference missing posts: ",
                     absl::StrJoin(dangling, ", ")));
  }
  return absl::OkStatus();
}

absl::StatusOr<Corpus> ParseCorpus(std::string_view posts_jsonl,
                                   std::string_view comments_jsonl) {
  Corpus corpus;
  absl::Status status = ForEachJsonLine(
      posts_jsonl, "posts", [&](const json& record) {
        return PostFromJson(record, &corpus);
      });
  if (!status.ok()) return status;
  status = ForEachJsonLine(comments_jsonl, "comments",
                           [&](const json& record) -> absl::Status {
                             auto comment = CommentFromJson(record, "");
                             if (!comment.ok()) return comment.status();
                             corpus.comments.push_back(*std::move(comment));
                             return absl::OkStatus();
                           });
  if (!status.ok()) return status;
  status = ValidateCorpus(corpus);
  if (!status.ok()) return status;
  return corpus;
}

absl::StatusOr<Corpus> LoadCorpus(const std::string& posts_path,
                                  const std::string& comments_path) {
  auto posts = ReadFileToString(posts_path);
  if (!posts.ok()) return posts.status();
  std::string comments;
  if (!comments_path.empty()) {
    auto loaded = ReadFileToString(comments_path);
    if (!loaded.ok()) return loaded.status();
    comments = *std::move(loaded);
  }
  return ParseCorpus(*posts, comments);
}

std::string PostsToJsonl(std::span<const Post> posts) {
  std::string out;
  for (const Post& post : posts) {
    json record = {{"post_id", post.post_id},
                   {"category", std::string(CategoryName(post.category))},
                   {"description", post.description},
                   {"transcript", post.transcript},
                   {"created_at", FormatTimestamp(post.created_at)},
                   {"region", post.region},
                   {"like_count", post.like_count},
                   {"comment_count", post.comment_count},
                   {"share_count", post.share_count},
                   {"view_count", post.view_count}};
    absl::StrAppend(&out, record.dump(), "\n");
  }
  return out;
}

std::string CommentsToJsonl(std::span<const Comment> comments) {
  std::string out;
  for (const Comment& comment : comments) {
    json record = {{"comment_id", comment.comment_id},
                   {"post_id", comment.post_id},
                   {"text", comment.text},
                   {"like_count", comment.like_count}};
    absl::StrAppend(&out, record.dump(), "\n");
  }
  return out;
}

std::string FormatTimestamp(int64_t unix_seconds) {
  return absl::FormatTime("%Y-%m-%dT%H:%M:%SZ",
                          absl::FromUnixSeconds(unix_seconds),
                          absl::UTCTimeZone());
}

absl::StatusOr<int64_t> ParseTimestamp(std::string_view text) {
  absl::Time time;
  std::string error;
  if (!absl::ParseTime(absl::RFC3339_full, std::string(text), &time, &error)) {
    return absl::InvalidArgumentError(
        absl::StrCat("bad timestamp '", Av(text), "': ", error));
  }
  return absl::ToUnixSeconds(time);
}

}  // namespace aestk
