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

#include "aestk/annotation.h"

#include <algorithm>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "aestk/table_io.h"
#include "json.hpp"
#include "embedded_data.h"
#include "view.h"

namespace aestk {

using internal::Av;
namespace {

using json = nlohmann::json;

constexpr std::string_view kTrainingKindNames[] = {
    "institution_mention", "video_aes", "comment_agreement", "comment_aes"};

absl::StatusOr<Question> QuestionFromJson(const json& j) {
  Question q;
  q.question_id = j.value("question_id", "");
  q.prompt = j.value("prompt", "");
  q.options = j.value("options", std::vector<std::string>{});
  q.answer = j.value("answer", -1);
  return q;
}

std::string FillerId(int64_t n) { return absl::StrCat("filler-", n); }

// Lays out one task: attention checks at two seeded positions, the content
// and padding pairs in order everywhere else, synthetic filler at the end.
AnnotationTask BuildTask(std::string task_id, std::string annotator_id,
                         std::span<const VideoCommentPair* const> content,
                         std::span<const VideoCommentPair* const> padding,
                         std::span<const AttentionCheck> checks,
                         size_t check_offset, Rng& rng) {
  AnnotationTask task;
  task.task_id = std::move(task_id);
  task.annotator_id = std::move(annotator_id);

  std::vector<int> positions(kPairsPerTask);
  std::iota(positions.begin(), positions.end(), 0);
  rng.Shuffle(std::span<int>(positions));
  std::vector<bool> is_check(kPairsPerTask, false);
  for (int i = 0; i < kAttentionChecksPerTask; ++i) is_check[positions[i]] = true;

  size_t next_content = 0;
  size_t next_padding = 0;
  int next_check = 0;
  int filler = 0;
  for (int pos = 0; pos < kPairsPerTask; ++pos) {
    TaskSlot slot;
    slot.slot_id = absl::StrFormat("%s-s%d", task.task_id, pos);
    if (is_check[pos]) {
      slot.kind = SlotKind::kAttentionCheck;
      const AttentionCheck& check =
          checks[(check_offset + next_check++) % checks.size()];
      slot.check = check;
      slot.pair.pair_id = check.check_id;
      slot.pair.video_text = check.video_text;
      slot.pair.comment_text = check.comment_text;
    } else if (next_content < content.size()) {
      slot.kind = SlotKind::kContent;
      slot.pair = *content[next_content++];
    } else if (next_padding < padding.size()) {
      slot.kind = SlotKind::kPadding;
      slot.pair = *padding[next_padding++];
    } else {
      slot.kind = SlotKind::kPadding;
      slot.pair.pair_id = FillerId(filler++);
      slot.pair.video_text = "Filler clip.";
      slot.pair.comment_text = "Filler comment.";
    }
    task.slots.push_back(std::move(slot));
  }
  return task;
}

json RecordToJson(const AnnotationRecord& r) {
  return {{"annotator_id", r.annotator_id},
          {"item_id", r.item_id},
          {"target", std::string(TargetName(r.target))},
          {"scale", r.scale},
          {"timestamp", r.timestamp},
          {"task_id", r.task_id},
          {"padding", r.padding}};
}

}  // namespace

std::string_view TrainingKindName(TrainingKind kind) {
  return kTrainingKindNames[static_cast<int>(kind)];
}

absl::StatusOr<TrainingKind> ParseTrainingKind(std::string_view name) {
  for (int i = 0; i < 4; ++i) {
    if (kTrainingKindNames[i] == name) return static_cast<TrainingKind>(i);
  }
  return absl::InvalidArgumentError(
      absl::StrCat("unknown training item kind '", Av(name), "'"));
}

absl::Status ValidateTrainingBank(const TrainingBank& bank) {
  std::unordered_set<std::string> ids;
  for (const auto& item : bank.items) {
    if (item.item_id.empty() || !ids.insert(item.item_id).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("missing or duplicate training item id '", item.item_id,
                       "'"));
    }
    if (item.feedback_correct.empty() || item.feedback_incorrect.empty()) {
      return absl::InvalidArgumentError(
          absl::StrCat("training item ", item.item_id,
                       " needs feedback for both branches"));
    }
    if (item.correct_answer < 0 ||
        item.correct_answer >= static_cast<int>(item.options.size())) {
      return absl::InvalidArgumentError(absl::StrCat(
          "training item ", item.item_id, " answer outside its options"));
    }
  }
  for (const auto* questions : {&bank.assessment, &bank.pretask}) {
    for (const auto& q : *questions) {
      if (q.answer < 0 || q.answer >= static_cast<int>(q.options.size())) {
        return absl::InvalidArgumentError(absl::StrCat(
            "question ", q.question_id, " answer outside its options"));
      }
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<TrainingBank> ParseTrainingBank(std::string_view json_text) {
  TrainingBank bank;
  try {
    json j = json::parse(json_text);
    bank.version = j.value("version", 1);
    bank.description = j.value("description", "");
    for (const json& item : j.value("items", json::array())) {
      TrainingItem t;
      t.item_id = item.value("item_id", "");
      auto kind = ParseTrainingKind(item.value("kind", ""));
      if (!kind.ok()) return kind.status();
      t.kind = *kind;
      t.stimulus = item.value("stimulus", "");
      t.options = item.value("options", std::vector<std::string>{});
      t.correct_answer = item.value("correct_answer", -1);
      t.feedback_correct = item.value("feedback_correct", "");
      t.feedback_incorrect = item.value("feedback_incorrect", "");
      bank.items.push_back(std::move(t));
    }
    for (auto [key, target] : {std::pair{"assessment", &bank.assessment},
                               std::pair{"pretask", &bank.pretask}}) {
      for (const json& q : j.value(key, json::array())) {
        auto question = QuestionFromJson(q);
        if (!question.ok()) return question.status();
        target->push_back(*std::move(question));
      }
    }
  } catch (const json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("training bank: ", e.what()));
  }
  absl::Status status = ValidateTrainingBank(bank);
  if (!status.ok()) return status;
  return bank;
}

TrainingBank DefaultTrainingBank() {
  return *ParseTrainingBank(embedded::kTrainingBank);
}

absl::StatusOr<TrainingBank> LoadTrainingBank(const std::string& path) {
  auto text = ReadFileToString(path);
  if (!text.ok()) return text.status();
  return ParseTrainingBank(*text);
}

absl::StatusOr<AssessmentResult> GradeAssessment(std::span<const int> answers,
                                                 std::span<const int> key,
                                                 double pass_threshold) {
  if (answers.size() != key.size()) {
    return absl::InvalidArgumentError(
        absl::StrFormat("%d answers for %d questions", answers.size(),
                        key.size()));
  }
  if (key.empty()) return absl::InvalidArgumentError("empty assessment");
  AssessmentResult result;
  result.total = static_cast<int>(key.size());
  for (size_t i = 0; i < key.size(); ++i) {
    if (answers[i] == key[i]) ++result.correct;
  }
  result.score = static_cast<double>(result.correct) / result.total;
  // Compare counts, not rounded fractions: 12/16 must meet 0.75 exactly.
  result.passed = result.correct >= pass_threshold * result.total - 1e-9;
  return result;
}

absl::StatusOr<std::vector<VideoCommentPair>> ParsePairs(
    std::string_view jsonl) {
  std::vector<VideoCommentPair> pairs;
  std::unordered_set<std::string> ids;
  std::vector<std::string_view> lines = SplitLines(jsonl);
  for (size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    try {
      json j = json::parse(lines[i]);
      VideoCommentPair p;
      p.pair_id = j.value("pair_id", "");
      p.video_id = j.value("video_id", "");
      p.comment_id = j.value("comment_id", "");
      p.video_url = j.value("video_url", "");
      p.video_text = j.value("video_text", "");
      p.comment_text = j.value("comment_text", "");
      p.sensitive = j.value("sensitive", false);
      if (p.pair_id.empty() || p.video_id.empty() || p.comment_id.empty()) {
        return absl::InvalidArgumentError(absl::StrCat(
            "pairs line ", i + 1, ": pair_id, video_id, comment_id required"));
      }
      if (!ids.insert(p.pair_id).second) {
        return absl::InvalidArgumentError(
            absl::StrCat("pairs line ", i + 1, ": duplicate ", p.pair_id));
      }
      pairs.push_back(std::move(p));
    } catch (const json::exception& e) {
      return absl::InvalidArgumentError(
          absl::StrCat("pairs line ", i + 1, ": ", e.what()));
    }
  }
  return pairs;
}

std::vector<AttentionCheck> DefaultAttentionChecks() {
  return {
      {"attention-1",
       "This clip is a quality check. For the video question, choose "
       "\"No, they are definitely not expressing anti-establishment views\".",
       "For the comment question on this item, choose the middle option.",
       4, 3},
      {"attention-2",
       "Quality check: please answer the video question with \"Yes, they are "
       "definitely expressing anti-establishment views\".",
       "Quality check: for the comment question choose \"definitely does not "
       "agree\".",
       1, 5},
  };
}

std::vector<std::string> AnnotationTask::ContentPairIds() const {
  std::vector<std::string> ids;
  for (const auto& slot : slots) {
    if (slot.kind == SlotKind::kContent) ids.push_back(slot.pair.pair_id);
  }
  return ids;
}

absl::StatusOr<std::vector<AnnotationTask>> AssignTasks(
    std::span<const VideoCommentPair> pairs,
    std::span<const Annotator> annotators, int redundancy, uint64_t seed,
    std::span<const AttentionCheck> checks) {
  if (redundancy < 1) {
    return absl::InvalidArgumentError("redundancy must be >= 1");
  }
  std::vector<const Annotator*> qualified;
  for (const auto& a : annotators) {
    if (a.qualified()) qualified.push_back(&a);
  }
  if (static_cast<int>(qualified.size()) < redundancy) {
    return absl::FailedPreconditionError(absl::StrFormat(
        "insufficient qualified annotators: need %d, have %d (deficit %d)",
        redundancy, qualified.size(), redundancy - qualified.size()));
  }
  std::vector<AttentionCheck> default_checks;
  if (checks.empty()) {
    default_checks = DefaultAttentionChecks();
    checks = default_checks;
  }

  // Round-robin over (pair, copy): copies of one pair land on `redundancy`
  // consecutive, hence distinct, annotators; loads differ by at most one.
  const size_t num_annotators = qualified.size();
  std::vector<std::vector<size_t>> assigned(num_annotators);
  size_t cursor = 0;
  for (size_t p = 0; p < pairs.size(); ++p) {
    for (int k = 0; k < redundancy; ++k) {
      assigned[cursor % num_annotators].push_back(p);
      ++cursor;
    }
  }

  Rng rng(seed);
  std::vector<AnnotationTask> tasks;
  for (size_t a = 0; a < num_annotators; ++a) {
    const std::vector<size_t>& mine = assigned[a];
    std::vector<bool> seen(pairs.size(), false);
    for (size_t p : mine) seen[p] = true;
    std::vector<size_t> unseen;
    for (size_t p = 0; p < pairs.size(); ++p) {
      if (!seen[p]) unseen.push_back(p);
    }
    rng.Shuffle(std::span<size_t>(unseen));
    size_t next_unseen = 0;

    for (size_t start = 0; start < mine.size();
         start += kContentSlotsPerTask) {
      std::vector<const VideoCommentPair*> content;
      for (size_t i = start;
           i < mine.size() && i < start + kContentSlotsPerTask; ++i) {
        content.push_back(&pairs[mine[i]]);
      }
      std::vector<const VideoCommentPair*> padding;
      while (content.size() + padding.size() < kContentSlotsPerTask &&
             next_unseen < unseen.size()) {
        padding.push_back(&pairs[unseen[next_unseen++]]);
      }
      tasks.push_back(BuildTask(absl::StrFormat("task-%06d", tasks.size()),
                                qualified[a]->annotator_id, content, padding,
                                checks, tasks.size() * kAttentionChecksPerTask,
                                rng));
    }
  }
  return tasks;
}

TaskQueue::TaskQueue(std::vector<VideoCommentPair> pairs, int redundancy,
                     uint64_t seed, std::vector<AttentionCheck> checks)
    : pairs_(std::move(pairs)),
      coverage_(pairs_.size(), 0),
      redundancy_(redundancy),
      rng_(seed),
      checks_(std::move(checks)) {
  for (size_t i = 0; i < pairs_.size(); ++i) index_[pairs_[i].pair_id] = i;
  if (checks_.empty()) checks_ = DefaultAttentionChecks();
}

absl::StatusOr<AnnotationTask> TaskQueue::NextTask(
    const std::string& annotator_id) {
  std::set<size_t>& seen = seen_[annotator_id];
  std::vector<size_t> open;
  for (size_t i = 0; i < pairs_.size(); ++i) {
    if (coverage_[i] < redundancy_ && !seen.contains(i)) open.push_back(i);
  }
  if (open.empty()) {
    return absl::NotFoundError(
        absl::StrCat("no pairs left for annotator ", annotator_id));
  }
  std::stable_sort(open.begin(), open.end(), [&](size_t a, size_t b) {
    return coverage_[a] < coverage_[b];
  });
  if (open.size() > kContentSlotsPerTask) open.resize(kContentSlotsPerTask);

  std::vector<const VideoCommentPair*> content;
  for (size_t i : open) {
    ++coverage_[i];
    seen.insert(i);
    content.push_back(&pairs_[i]);
  }
  std::vector<const VideoCommentPair*> padding;
  for (size_t i = 0; i < pairs_.size() &&
                     content.size() + padding.size() < kContentSlotsPerTask;
       ++i) {
    if (!seen.contains(i)) {
      seen.insert(i);
      padding.push_back(&pairs_[i]);
    }
  }
  int64_t n = next_task_++;
  return BuildTask(absl::StrFormat("task-%06d", n), annotator_id, content,
                   padding, checks_,
                   static_cast<size_t>(n) * kAttentionChecksPerTask, rng_);
}

void TaskQueue::Release(const AnnotationTask& task) {
  for (const std::string& id : task.ContentPairIds()) {
    auto it = index_.find(id);
    if (it != index_.end() && coverage_[it->second] > 0) {
      --coverage_[it->second];
    }
  }
}

int TaskQueue::coverage(const std::string& pair_id) const {
  auto it = index_.find(pair_id);
  return it == index_.end() ? 0 : coverage_[it->second];
}

size_t TaskQueue::remaining_pairs() const {
  return std::count_if(coverage_.begin(), coverage_.end(),
                       [&](int c) { return c < redundancy_; });
}

void TaskQueue::MarkCovered(const std::string& pair_id,
                            const std::string& annotator_id) {
  auto it = index_.find(pair_id);
  if (it == index_.end()) return;
  if (seen_[annotator_id].insert(it->second).second) ++coverage_[it->second];
}

std::string_view TargetName(Target target) {
  return target == Target::kVideo ? "video" : "comment";
}

absl::Status ValidateRecord(const AnnotationRecord& record) {
  const int max =
      record.target == Target::kVideo ? kVideoScaleMax : kCommentScaleMax;
  if (record.scale < 1 || record.scale > max) {
    return absl::OutOfRangeError(absl::StrFormat(
        "%s scale %d outside 1..%d (annotator %s, item %s)",
        Av(TargetName(record.target)), record.scale, max, record.annotator_id,
        record.item_id));
  }
  if (record.annotator_id.empty() || record.item_id.empty()) {
    return absl::InvalidArgumentError("record needs annotator_id and item_id");
  }
  return absl::OkStatus();
}

std::string RecordsToJsonl(std::span<const AnnotationRecord> records) {
  std::string out;
  for (const auto& r : records) absl::StrAppend(&out, RecordToJson(r).dump(), "\n");
  return out;
}

absl::StatusOr<std::vector<AnnotationRecord>> ParseRecords(
    std::string_view jsonl) {
  std::vector<AnnotationRecord> records;
  std::vector<std::string_view> lines = SplitLines(jsonl);
  for (size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    AnnotationRecord r;
    try {
      json j = json::parse(lines[i]);
      r.annotator_id = j.at("annotator_id").get<std::string>();
      r.item_id = j.at("item_id").get<std::string>();
      std::string target = j.at("target").get<std::string>();
      if (target == "video") {
        r.target = Target::kVideo;
      } else if (target == "comment") {
        r.target = Target::kComment;
      } else {
        return absl::InvalidArgumentError(absl::StrCat(
            "records line ", i + 1, ": unknown target '", target, "'"));
      }
      r.scale = j.at("scale").get<int>();
      r.timestamp = j.value("timestamp", int64_t{0});
      r.task_id = j.value("task_id", "");
      r.padding = j.value("padding", false);
    } catch (const json::exception& e) {
      return absl::InvalidArgumentError(
          absl::StrCat("records line ", i + 1, ": ", e.what()));
    }
    absl::Status status = ValidateRecord(r);
    if (!status.ok()) {
      return absl::InvalidArgumentError(
          absl::StrCat("records line ", i + 1, ": ", status.message()));
    }
    records.push_back(std::move(r));
  }
  return records;
}

absl::StatusOr<SubmissionOutcome> EvaluateSubmission(
    const AnnotationTask& task, const Annotator& annotator,
    std::span<const SlotResponse> responses, int64_t timestamp) {
  std::unordered_map<std::string, const SlotResponse*> by_slot;
  for (const auto& response : responses) {
    if (!by_slot.emplace(response.slot_id, &response).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("duplicate response for slot ", response.slot_id));
    }
  }
  if (by_slot.size() != task.slots.size()) {
    for (const auto& [id, unused] : by_slot) {
      bool known = std::any_of(task.slots.begin(), task.slots.end(),
                               [&](const TaskSlot& s) { return s.slot_id == id; });
      if (!known) {
        return absl::InvalidArgumentError(absl::StrCat("unknown slot ", id));
      }
    }
  }

  SubmissionOutcome outcome;
  std::vector<AnnotationRecord> records;
  for (const TaskSlot& slot : task.slots) {
    auto it = by_slot.find(slot.slot_id);
    if (it == by_slot.end()) {
      return absl::InvalidArgumentError(
          absl::StrCat("missing response for slot ", slot.slot_id));
    }
    const SlotResponse& response = *it->second;
    if (response.skipped) continue;  // a skipped check simply fails
    if (!response.video_scale || !response.comment_scale) {
      return absl::InvalidArgumentError(
          absl::StrCat("slot ", slot.slot_id, " needs both scale values"));
    }
    AnnotationRecord video{annotator.annotator_id, slot.pair.video_id,
                           Target::kVideo,         *response.video_scale,
                           timestamp,              task.task_id,
                           slot.kind == SlotKind::kPadding};
    AnnotationRecord comment{annotator.annotator_id, slot.pair.comment_id,
                             Target::kComment,       *response.comment_scale,
                             timestamp,              task.task_id,
                             slot.kind == SlotKind::kPadding};
    for (const AnnotationRecord* r : {&video, &comment}) {
      absl::Status range = ValidateRecord(
          {"-", "-", r->target, r->scale, 0, "", false});
      if (!range.ok()) {
        return absl::OutOfRangeError(
            absl::StrCat("slot ", slot.slot_id, ": ", range.message()));
      }
    }
    if (slot.kind == SlotKind::kAttentionCheck) {
      if (*response.video_scale == slot.check->required_video_scale &&
          *response.comment_scale == slot.check->required_comment_scale) {
        ++outcome.attention_passes;
      }
      continue;
    }
    if (slot.pair.video_id.empty()) continue;  // synthetic filler
    records.push_back(std::move(video));
    records.push_back(std::move(comment));
  }

  if (!annotator.qualified()) {
    outcome.reason = "not_qualified";
  } else if (outcome.attention_passes != kAttentionChecksPerTask) {
    outcome.reason = "attention_check_failed";
  } else {
    outcome.accepted = true;
    outcome.records = std::move(records);
  }
  return outcome;
}

std::vector<std::string> AuditRecords(
    std::span<const AnnotationRecord> records,
    std::span<const Annotator> annotators) {
  std::unordered_map<std::string, const Annotator*> by_id;
  for (const auto& a : annotators) by_id[a.annotator_id] = &a;
  std::vector<std::string> violations;
  for (const auto& r : records) {
    auto it = by_id.find(r.annotator_id);
    if (it == by_id.end()) {
      violations.push_back(absl::StrCat("record for ", r.item_id,
                                        " from unknown annotator ",
                                        r.annotator_id));
    } else if (!it->second->qualified()) {
      violations.push_back(absl::StrCat("record for ", r.item_id,
                                        " from unqualified annotator ",
                                        r.annotator_id));
    }
  }
  return violations;
}

absl::StatusOr<int> BinarizeVideoScale(int video_scale) {
  if (video_scale < 1 || video_scale > kVideoScaleMax) {
    return absl::OutOfRangeError(
        absl::StrCat("video scale ", video_scale, " outside 1..4"));
  }
  return video_scale <= 2 ? 1 : 0;
}

std::string_view CommentStanceName(CommentStance stance) {
  switch (stance) {
    case CommentStance::kAgree:
      return "agree";
    case CommentStance::kDisagree:
      return "disagree";
    case CommentStance::kIrrelevant:
      return "irrelevant";
  }
  return "irrelevant";
}

absl::StatusOr<CommentStance> TernarizeCommentScale(int comment_scale) {
  if (comment_scale < 1 || comment_scale > kCommentScaleMax) {
    return absl::OutOfRangeError(
        absl::StrCat("comment scale ", comment_scale, " outside 1..5"));
  }
  if (comment_scale <= 2) return CommentStance::kAgree;
  if (comment_scale == 3) return CommentStance::kIrrelevant;
  return CommentStance::kDisagree;
}

}  // namespace aestk
