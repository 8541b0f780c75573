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

// Annotator qualification and task protocol: training banks, graded
// assessments, attention-checked task batches and scaled judgments.

#ifndef AESTK_ANNOTATION_H_
#define AESTK_ANNOTATION_H_

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "aestk/random.h"

namespace aestk {

inline constexpr double kAssessmentPassThreshold = 0.75;
inline constexpr double kPretaskPassThreshold = 1.0;
inline constexpr int kAssessmentQuestions = 16;
inline constexpr int kPretaskQuestions = 4;
inline constexpr int kPairsPerTask = 10;
inline constexpr int kAttentionChecksPerTask = 2;
inline constexpr int kContentSlotsPerTask =
    kPairsPerTask - kAttentionChecksPerTask;
inline constexpr int kDefaultRedundancy = 3;

// Video question: 1 = definitely expressing ... 4 = definitely not.
inline constexpr int kVideoScaleMax = 4;
// Comment question: 1 = definitely agrees ... 5 = definitely does not.
inline constexpr int kCommentScaleMax = 5;

struct Annotator {
  std::string annotator_id;
  double training_score = 0.0;
  double pretask_score = 0.0;
  int attention_passes = 0;

  bool qualified() const {
    return training_score >= kAssessmentPassThreshold &&
           pretask_score >= kPretaskPassThreshold;
  }
  bool submission_accepted() const {
    return attention_passes == kAttentionChecksPerTask;
  }
};

enum class TrainingKind {
  kInstitutionMention,
  kVideoAes,
  kCommentAgreement,
  kCommentAes,
};

std::string_view TrainingKindName(TrainingKind kind);
absl::StatusOr<TrainingKind> ParseTrainingKind(std::string_view name);

struct TrainingItem {
  std::string item_id;
  TrainingKind kind = TrainingKind::kVideoAes;
  std::string stimulus;
  std::vector<std::string> options;
  int correct_answer = 0;  // index into options
  std::string feedback_correct;
  std::string feedback_incorrect;
};

struct Question {
  std::string question_id;
  std::string prompt;
  std::vector<std::string> options;
  int answer = 0;
};

// Versioned training material: practice items with feedback, the
// qualification assessment, and the shorter pre-task check.
struct TrainingBank {
  int version = 1;
  std::string description;
  std::vector<TrainingItem> items;
  std::vector<Question> assessment;
  std::vector<Question> pretask;
};

absl::StatusOr<TrainingBank> ParseTrainingBank(std::string_view json_text);
absl::StatusOr<TrainingBank> LoadTrainingBank(const std::string& path);
absl::Status ValidateTrainingBank(const TrainingBank& bank);
// The bundled placeholder bank (data/training_bank.json).
TrainingBank DefaultTrainingBank();

struct AssessmentResult {
  double score = 0.0;
  int correct = 0;
  int total = 0;
  bool passed = false;
};

absl::StatusOr<AssessmentResult> GradeAssessment(std::span<const int> answers,
                                                 std::span<const int> key,
                                                 double pass_threshold);

struct VideoCommentPair {
  std::string pair_id;
  std::string video_id;
  std::string comment_id;
  std::string video_url;
  std::string video_text;
  std::string comment_text;
  // Annotators may decline items flagged as sensitive.
  bool sensitive = false;
};

absl::StatusOr<std::vector<VideoCommentPair>> ParsePairs(
    std::string_view jsonl);

// A disguised item with a required answer on both questions.
struct AttentionCheck {
  std::string check_id;
  std::string video_text;
  std::string comment_text;
  int required_video_scale = kVideoScaleMax;
  int required_comment_scale = 3;
};

std::vector<AttentionCheck> DefaultAttentionChecks();

enum class SlotKind { kContent, kPadding, kAttentionCheck };

struct TaskSlot {
  std::string slot_id;
  SlotKind kind = SlotKind::kContent;
  // Set for content and padding slots. Synthetic filler padding has an empty
  // video_id.
  VideoCommentPair pair;
  // Set for attention-check slots.
  std::optional<AttentionCheck> check;
};

struct AnnotationTask {
  std::string task_id;
  std::string annotator_id;
  std::vector<TaskSlot> slots;  // exactly kPairsPerTask

  std::vector<std::string> ContentPairIds() const;
};

// Distributes every pair to exactly `redundancy` distinct qualified
// annotators, balances per-annotator load, and packs each annotator's pairs
// into tasks of kContentSlotsPerTask content slots plus kAttentionChecksPerTask
// attention checks at seeded random positions. Short tasks are padded with
// pairs the annotator has not seen (labels excluded from fusion), or with
// synthetic filler when none remain.
absl::StatusOr<std::vector<AnnotationTask>> AssignTasks(
    std::span<const VideoCommentPair> pairs,
    std::span<const Annotator> annotators, int redundancy, uint64_t seed,
    std::span<const AttentionCheck> checks = {});

// On-demand variant used by the annotation server: hands out tasks one at a
// time while keeping every pair's coverage at or below `redundancy`.
class TaskQueue {
 public:
  TaskQueue(std::vector<VideoCommentPair> pairs, int redundancy, uint64_t seed,
            std::vector<AttentionCheck> checks = DefaultAttentionChecks());

  // NotFound when no pair still needs labels from this annotator.
  absl::StatusOr<AnnotationTask> NextTask(const std::string& annotator_id);

  // A rejected task's content pairs become available to others again; the
  // annotator keeps them marked as seen.
  void Release(const AnnotationTask& task);

  int coverage(const std::string& pair_id) const;
  int redundancy() const { return redundancy_; }
  size_t remaining_pairs() const;

  // Marks `pair_id` as labelled by `annotator_id` (used when replaying a
  // persisted record store).
  void MarkCovered(const std::string& pair_id, const std::string& annotator_id);

  // Task ids are numbered; restarts continue after persisted ones.
  void ReserveTaskNumbers(int64_t next) {
    next_task_ = std::max(next_task_, next);
  }

 private:
  std::vector<VideoCommentPair> pairs_;
  std::map<std::string, size_t> index_;
  std::vector<int> coverage_;
  std::map<std::string, std::set<size_t>> seen_;
  int redundancy_;
  Rng rng_;
  std::vector<AttentionCheck> checks_;
  int64_t next_task_ = 0;
};

enum class Target { kVideo, kComment };

std::string_view TargetName(Target target);

struct AnnotationRecord {
  std::string annotator_id;
  std::string item_id;  // post_id for videos, comment_id for comments
  Target target = Target::kVideo;
  int scale = 1;        // 1..4 for videos, 1..5 for comments
  int64_t timestamp = 0;
  std::string task_id;
  bool padding = false;  // stored but excluded from fusion
};

absl::Status ValidateRecord(const AnnotationRecord& record);

std::string RecordsToJsonl(std::span<const AnnotationRecord> records);
absl::StatusOr<std::vector<AnnotationRecord>> ParseRecords(
    std::string_view jsonl);

struct SlotResponse {
  std::string slot_id;
  std::optional<int> video_scale;
  std::optional<int> comment_scale;
  bool skipped = false;
};

struct SubmissionOutcome {
  bool accepted = false;
  int attention_passes = 0;
  std::string reason;  // empty when accepted
  std::vector<AnnotationRecord> records;  // empty unless accepted
};

// Grades the attention checks and turns answered slots into records. A
// malformed submission (missing/unknown slot, out-of-range scale) is an
// error; a failed check or an unqualified annotator yields accepted=false
// with no records.
absl::StatusOr<SubmissionOutcome> EvaluateSubmission(
    const AnnotationTask& task, const Annotator& annotator,
    std::span<const SlotResponse> responses, int64_t timestamp);

// Records whose annotator is unknown or not qualified.
std::vector<std::string> AuditRecords(
    std::span<const AnnotationRecord> records,
    std::span<const Annotator> annotators);

// Midpoint split: {1,2} -> 1 (AES), {3,4} -> 0.
absl::StatusOr<int> BinarizeVideoScale(int video_scale);

enum class CommentStance { kAgree, kDisagree, kIrrelevant };

std::string_view CommentStanceName(CommentStance stance);

// {1,2} -> agree, 3 -> irrelevant, {4,5} -> disagree.
absl::StatusOr<CommentStance> TernarizeCommentScale(int comment_scale);

}  // namespace aestk

#endif  // AESTK_ANNOTATION_H_
