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

// Shared fixtures: adapters from oracle instances to library types, and
// corpora built to published marginal counts.

#ifndef AESTK_TESTS_SUPPORT_FIXTURES_H_
#define AESTK_TESTS_SUPPORT_FIXTURES_H_

#include <string>
#include <vector>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "aestk/analyze.h"
#include "aestk/annotation.h"
#include "aestk/classify.h"
#include "aestk/corpus.h"
#include "aestk/fuse.h"
#include "oracle/synthetic.h"

namespace aestk::testing {

inline LabelMatrix ToMatrix(const oracle::Instance& x) {
  std::vector<std::string> items, annotators;
  for (int i = 0; i < x.items(); ++i) items.push_back(absl::StrFormat("i%03d", i));
  for (int j = 0; j < x.annotators(); ++j) {
    annotators.push_back(absl::StrFormat("a%02d", j));
  }
  std::vector<LabelEntry> entries;
  for (int i = 0; i < x.items(); ++i) {
    for (int j = 0; j < x.annotators(); ++j) {
      if (x.labels[i][j] >= 0) entries.push_back({i, j, x.labels[i][j]});
    }
  }
  return *LabelMatrix::Create(items, annotators, entries, x.num_classes);
}

// Label depends strongly on category; the text features carry only a weak
// signal and are identically distributed across categories.
inline Dataset CategoryDependentDataset(int n, uint64_t seed) {
  oracle::TestRng rng(seed);
  constexpr Category kCats[] = {Category::kConspiracy, Category::kFinance,
                                Category::kWellness};
  constexpr double kPositiveRate[] = {0.85, 0.10, 0.10};
  constexpr int kDim = 16;
  Dataset d;
  d.dimension = kDim;
  for (int i = 0; i < n; ++i) {
    const int c = rng.Below(3);
    Example e;
    e.item_id = absl::StrFormat("syn-%05d", i);
    e.category = kCats[c];
    e.label = rng.Bernoulli(kPositiveRate[c]) ? 1 : 0;
    for (int k = 0; k < kDim; ++k) e.features.push_back(2 * rng.Uniform() - 1);
    e.features[0] += 0.3 * (2 * e.label - 1);
    d.examples.push_back(std::move(e));
  }
  return d;
}

struct FunnelCounts {
  int64_t videos = 26783;
  int64_t comments = 206350;
  int64_t kept_videos = 14261;
  int64_t kept_comments = 129996;
};

// Posts that pass the default funnel carry 56 English tokens; the rest carry
// 12. Comments are spread round-robin over each group of posts.
inline Corpus FunnelCorpus(const FunnelCounts& c = {}) {
  const std::string sentence =
      "the government is not telling us the truth about this and we know it ";
  std::string pass_text;
  for (int k = 0; k < 4; ++k) pass_text += sentence;
  const std::string fail_text = "buy now limited offer click the link in my bio today ok";
  Corpus corpus;
  const Category cats[] = {Category::kConspiracy, Category::kFinance,
                           Category::kWellness};
  for (int64_t i = 0; i < c.videos; ++i) {
    Post p;
    p.post_id = absl::StrFormat("v%06d", i);
    p.category = cats[i % 3];
    p.transcript = i < c.kept_videos ? pass_text : fail_text;
    corpus.posts.push_back(std::move(p));
  }
  const int64_t failed_videos = c.videos - c.kept_videos;
  for (int64_t i = 0; i < c.comments; ++i) {
    Comment m;
    m.comment_id = absl::StrFormat("c%07d", i);
    const int64_t post = i < c.kept_comments
                             ? i % c.kept_videos
                             : c.kept_videos + (i - c.kept_comments) % failed_videos;
    m.post_id = corpus.posts[post].post_id;
    m.text = "so true";
    corpus.comments.push_back(std::move(m));
  }
  return corpus;
}

struct CategoryCount {
  Category category;
  int64_t aes;
  int64_t total;
};

inline LabeledCorpus PrevalenceCorpus(std::span<const CategoryCount> counts) {
  LabeledCorpus corpus;
  for (const CategoryCount& c : counts) {
    for (int64_t i = 0; i < c.total; ++i) {
      LabeledPost p;
      p.post.post_id = absl::StrFormat("%s-%d", std::string(CategoryName(c.category)), i);
      p.post.category = c.category;
      p.label = i < c.aes ? 1 : 0;
      corpus.posts.push_back(std::move(p));
    }
  }
  return corpus;
}

// Two conspiracy posts (one AES, one not) with 1000 fused comments each.
inline std::pair<LabeledCorpus, std::vector<FusedComment>> AgreementFixture(
    int aes_agree, int non_aes_agree) {
  LabeledCorpus corpus;
  std::vector<FusedComment> comments;
  for (int label : {1, 0}) {
    LabeledPost p;
    p.post.post_id = label ? "post-aes" : "post-non";
    p.post.category = Category::kConspiracy;
    p.label = label;
    corpus.posts.push_back(p);
    const int agree = label ? aes_agree : non_aes_agree;
    for (int i = 0; i < 1000; ++i) {
      CommentAgreement a = i < agree                   ? CommentAgreement::kAgree
                           : i < agree + (1000 - agree) / 2 ? CommentAgreement::kDisagree
                                                       : CommentAgreement::kUnclear;
      comments.push_back({absl::StrCat(p.post.post_id, "-c", i), p.post.post_id, a});
    }
  }
  return {corpus, comments};
}

inline std::vector<VideoCommentPair> SamplePairs(int n) {
  std::vector<VideoCommentPair> pairs;
  for (int i = 0; i < n; ++i) {
    VideoCommentPair p;
    p.pair_id = absl::StrFormat("pair-%04d", i);
    p.video_id = absl::StrFormat("video-%04d", i);
    p.comment_id = absl::StrFormat("comment-%04d", i);
    p.video_url = absl::StrFormat("https://example.org/v/%04d", i);
    p.video_text = absl::StrFormat("Transcript of sample video %d.", i);
    p.comment_text = absl::StrFormat("Sample comment %d.", i);
    pairs.push_back(std::move(p));
  }
  return pairs;
}

}  // namespace aestk::testing

#endif  // AESTK_TESTS_SUPPORT_FIXTURES_H_
