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

#include <map>
#include <set>
#include <string>
#include <vector>

#include "absl/strings/str_cat.h"
#include "gtest/gtest.h"
#include "oracle/synthetic.h"
#include "support/fixtures.h"

namespace aestk {
namespace {

using testing::SamplePairs;

std::vector<Annotator> Annotators(int qualified, int unqualified) {
  std::vector<Annotator> out;
  for (int i = 0; i < qualified; ++i) {
    out.push_back({absl::StrCat("q", i), 0.75, 1.0, 0});
  }
  for (int i = 0; i < unqualified; ++i) {
    out.push_back({absl::StrCat("u", i), 0.6875, 1.0, 0});
  }
  return out;
}

std::vector<SlotResponse> Answer(const AnnotationTask& task, int fail_checks) {
  std::vector<SlotResponse> out;
  for (const TaskSlot& slot : task.slots) {
    SlotResponse r{slot.slot_id, 2, 1, false};
    if (slot.kind == SlotKind::kAttentionCheck) {
      r.video_scale = slot.check->required_video_scale;
      r.comment_scale = slot.check->required_comment_scale;
      if (fail_checks-- > 0) r.video_scale = 1 + r.video_scale.value() % kVideoScaleMax;
    }
    out.push_back(r);
  }
  return out;
}

TEST(QualificationTest, ThresholdsAreInclusive) {
  EXPECT_TRUE((Annotator{"a", 12.0 / 16, 1.0, 0}).qualified());
  EXPECT_FALSE((Annotator{"a", 11.0 / 16, 1.0, 0}).qualified());
  EXPECT_FALSE((Annotator{"a", 1.0, 3.0 / 4, 0}).qualified());
}

TEST(GradeAssessmentTest, CountsNotRoundedFractions) {
  std::vector<int> key(16, 0);
  for (int correct = 0; correct <= 16; ++correct) {
    std::vector<int> answers(16, 1);
    for (int i = 0; i < correct; ++i) answers[i] = 0;
    auto r = GradeAssessment(answers, key, kAssessmentPassThreshold);
    ASSERT_TRUE(r.ok());
    EXPECT_EQ(r->correct, correct);
    EXPECT_EQ(r->passed, correct >= 12) << correct;
  }
  std::vector<int> pre_key(4, 2), pre(4, 2);
  EXPECT_TRUE(GradeAssessment(pre, pre_key, kPretaskPassThreshold)->passed);
  pre[3] = 0;
  EXPECT_FALSE(GradeAssessment(pre, pre_key, kPretaskPassThreshold)->passed);
  EXPECT_FALSE(GradeAssessment(pre, key, 0.75).ok());
}

TEST(TrainingBankTest, BundledBankIsValid) {
  TrainingBank bank = DefaultTrainingBank();
  EXPECT_TRUE(ValidateTrainingBank(bank).ok());
  EXPECT_EQ(static_cast<int>(bank.assessment.size()), kAssessmentQuestions);
  EXPECT_EQ(static_cast<int>(bank.pretask.size()), kPretaskQuestions);
  EXPECT_FALSE(bank.items.empty());
}

TEST(TrainingBankTest, RejectsOutOfRangeAnswer) {
  TrainingBank bank = DefaultTrainingBank();
  bank.assessment[0].answer = static_cast<int>(bank.assessment[0].options.size());
  EXPECT_FALSE(ValidateTrainingBank(bank).ok());
  EXPECT_FALSE(ParseTrainingBank("{").ok());
}

TEST(AssignTasksTest, RedundancyDistinctnessAndBalance) {
  for (int num_pairs : {1, 7, 8, 40, 101}) {
    for (int qualified : {3, 4, 7}) {
      auto pairs = SamplePairs(num_pairs);
      auto annotators = Annotators(qualified, 2);
      auto tasks = AssignTasks(pairs, annotators, 3, 42);
      ASSERT_TRUE(tasks.ok()) << tasks.status();
      std::map<std::string, std::set<std::string>> labellers;
      std::map<std::string, int> load;
      std::set<std::string> task_ids;
      for (const AnnotationTask& t : *tasks) {
        EXPECT_TRUE(task_ids.insert(t.task_id).second);
        EXPECT_EQ(t.annotator_id[0], 'q');
        ASSERT_EQ(static_cast<int>(t.slots.size()), kPairsPerTask);
        int checks = 0;
        std::set<std::string> in_task;
        for (const TaskSlot& s : t.slots) {
          if (s.kind == SlotKind::kAttentionCheck) {
            ++checks;
            ASSERT_TRUE(s.check.has_value());
            continue;
          }
          if (!s.pair.pair_id.empty()) {
            EXPECT_TRUE(in_task.insert(s.pair.pair_id).second);
          }
          if (s.kind == SlotKind::kContent) {
            EXPECT_TRUE(labellers[s.pair.pair_id].insert(t.annotator_id).second);
            ++load[t.annotator_id];
          }
        }
        EXPECT_EQ(checks, kAttentionChecksPerTask);
      }
      ASSERT_EQ(static_cast<int>(labellers.size()), num_pairs);
      for (const auto& [pair, who] : labellers) EXPECT_EQ(who.size(), 3u) << pair;
      int lo = 1 << 30, hi = 0;
      for (int a = 0; a < qualified; ++a) {
        const int l = load[absl::StrCat("q", a)];
        lo = std::min(lo, l);
        hi = std::max(hi, l);
      }
      EXPECT_LE(hi - lo, 1);
    }
  }
}

TEST(AssignTasksTest, PaddingIsUnseenByTheAnnotator) {
  auto pairs = SamplePairs(20);
  auto tasks = AssignTasks(pairs, Annotators(3, 0), 3, 1);
  ASSERT_TRUE(tasks.ok());
  std::map<std::string, std::set<std::string>> content_of;
  for (const auto& t : *tasks) {
    for (const auto& s : t.slots) {
      if (s.kind == SlotKind::kContent) content_of[t.annotator_id].insert(s.pair.pair_id);
    }
  }
  for (const auto& t : *tasks) {
    for (const auto& s : t.slots) {
      if (s.kind == SlotKind::kPadding && !s.pair.pair_id.empty()) {
        EXPECT_FALSE(content_of[t.annotator_id].contains(s.pair.pair_id));
      }
    }
  }
}

TEST(AssignTasksTest, SeededAndShortOfAnnotators) {
  auto pairs = SamplePairs(30);
  auto a = AssignTasks(pairs, Annotators(4, 0), 3, 5);
  auto b = AssignTasks(pairs, Annotators(4, 0), 3, 5);
  ASSERT_TRUE(a.ok() && b.ok());
  ASSERT_EQ(a->size(), b->size());
  for (size_t i = 0; i < a->size(); ++i) {
    for (int k = 0; k < kPairsPerTask; ++k) {
      EXPECT_EQ((*a)[i].slots[k].slot_id, (*b)[i].slots[k].slot_id);
      EXPECT_EQ((*a)[i].slots[k].kind, (*b)[i].slots[k].kind);
    }
  }
  auto short_handed = AssignTasks(pairs, Annotators(2, 5), 3, 5);
  ASSERT_FALSE(short_handed.ok());
  EXPECT_NE(std::string(short_handed.status().message()).find("deficit 1"),
            std::string::npos);
}

TEST(TaskQueueTest, CoverageNeverExceedsRedundancy) {
  oracle::TestRng rng(4);
  TaskQueue queue(SamplePairs(37), 3, 9);
  std::map<std::string, std::set<std::string>> seen;
  for (int step = 0; step < 200; ++step) {
    const std::string who = absl::StrCat("a", rng.Below(6));
    auto task = queue.NextTask(who);
    if (!task.ok()) {
      EXPECT_TRUE(absl::IsNotFound(task.status()));
      continue;
    }
    for (const std::string& id : task->ContentPairIds()) {
      EXPECT_TRUE(seen[who].insert(id).second) << who << " saw " << id << " twice";
      EXPECT_LE(queue.coverage(id), 3);
    }
    if (rng.Bernoulli(0.3)) queue.Release(*task);
  }
  for (const auto& p : SamplePairs(37)) EXPECT_LE(queue.coverage(p.pair_id), 3);
}

TEST(TaskQueueTest, ReleaseReopensPairsForOthers) {
  TaskQueue queue(SamplePairs(8), 1, 0);
  auto first = queue.NextTask("a");
  ASSERT_TRUE(first.ok());
  EXPECT_EQ(queue.remaining_pairs(), 0u);
  EXPECT_FALSE(queue.NextTask("b").ok());
  queue.Release(*first);
  EXPECT_EQ(queue.remaining_pairs(), 8u);
  EXPECT_FALSE(queue.NextTask("a").ok());
  auto second = queue.NextTask("b");
  ASSERT_TRUE(second.ok());
  EXPECT_NE(second->task_id, first->task_id);
}

TEST(EvaluateSubmissionTest, AttentionChecksGateRecords) {
  auto tasks = AssignTasks(SamplePairs(8), Annotators(3, 0), 3, 2);
  ASSERT_TRUE(tasks.ok());
  const AnnotationTask& task = (*tasks)[0];
  const Annotator good{task.annotator_id, 0.8, 1.0, 0};
  auto clean = EvaluateSubmission(task, good, Answer(task, 0), 100);
  ASSERT_TRUE(clean.ok()) << clean.status();
  EXPECT_TRUE(clean->accepted);
  EXPECT_EQ(clean->attention_passes, 2);
  EXPECT_EQ(clean->records.size(), 2u * kContentSlotsPerTask);
  for (const auto& r : clean->records) {
    EXPECT_TRUE(ValidateRecord(r).ok());
    EXPECT_EQ(r.timestamp, 100);
  }
  for (int fails : {1, 2}) {
    auto voided = EvaluateSubmission(task, good, Answer(task, fails), 100);
    ASSERT_TRUE(voided.ok());
    EXPECT_FALSE(voided->accepted);
    EXPECT_EQ(voided->attention_passes, 2 - fails);
    EXPECT_TRUE(voided->records.empty());
  }
  const Annotator unqualified{task.annotator_id, 0.5, 1.0, 0};
  auto refused = EvaluateSubmission(task, unqualified, Answer(task, 0), 100);
  ASSERT_TRUE(refused.ok());
  EXPECT_FALSE(refused->accepted);
  EXPECT_EQ(refused->reason, "not_qualified");
}

TEST(EvaluateSubmissionTest, MalformedSubmissions) {
  auto tasks = AssignTasks(SamplePairs(8), Annotators(3, 0), 3, 2);
  ASSERT_TRUE(tasks.ok());
  const AnnotationTask& task = (*tasks)[0];
  const Annotator good{task.annotator_id, 0.8, 1.0, 0};
  auto responses = Answer(task, 0);
  responses.pop_back();
  EXPECT_FALSE(EvaluateSubmission(task, good, responses, 0).ok());
  responses = Answer(task, 0);
  responses[0].slot_id = "bogus";
  EXPECT_FALSE(EvaluateSubmission(task, good, responses, 0).ok());
  responses = Answer(task, 0);
  responses[0].comment_scale = kCommentScaleMax + 1;
  EXPECT_FALSE(EvaluateSubmission(task, good, responses, 0).ok());
  responses = Answer(task, 0);
  responses.push_back(responses[0]);
  EXPECT_FALSE(EvaluateSubmission(task, good, responses, 0).ok());
}

TEST(ScaleTest, BinarizeAndTernarize) {
  EXPECT_EQ(*BinarizeVideoScale(1), 1);
  EXPECT_EQ(*BinarizeVideoScale(2), 1);
  EXPECT_EQ(*BinarizeVideoScale(3), 0);
  EXPECT_EQ(*BinarizeVideoScale(4), 0);
  EXPECT_FALSE(BinarizeVideoScale(0).ok());
  EXPECT_FALSE(BinarizeVideoScale(5).ok());
  EXPECT_EQ(*TernarizeCommentScale(1), CommentStance::kAgree);
  EXPECT_EQ(*TernarizeCommentScale(2), CommentStance::kAgree);
  EXPECT_EQ(*TernarizeCommentScale(3), CommentStance::kIrrelevant);
  EXPECT_EQ(*TernarizeCommentScale(4), CommentStance::kDisagree);
  EXPECT_EQ(*TernarizeCommentScale(5), CommentStance::kDisagree);
  EXPECT_FALSE(TernarizeCommentScale(6).ok());
}

TEST(RecordsTest, JsonlRoundTripAndAudit) {
  std::vector<AnnotationRecord> records = {
      {"q0", "v1", Target::kVideo, 2, 1700000000, "task-1", false},
      {"u0", "c1", Target::kComment, 5, 1700000001, "task-2", true},
  };
  auto back = ParseRecords(RecordsToJsonl(records));
  ASSERT_TRUE(back.ok()) << back.status();
  EXPECT_EQ(RecordsToJsonl(*back), RecordsToJsonl(records));
  EXPECT_TRUE((*back)[1].padding);
  auto violations = AuditRecords(records, Annotators(1, 1));
  ASSERT_EQ(violations.size(), 1u);
  EXPECT_NE(violations[0].find("unqualified annotator u0"), std::string::npos);
  EXPECT_FALSE(ParseRecords(R"({"annotator_id":"a","item_id":"x","target":"audio","scale":1})").ok());
}

TEST(PairsTest, ParseAndRejectDuplicates) {
  auto pairs = ParsePairs(
      R"({"pair_id":"p1","video_id":"v","comment_id":"c","video_text":"t","comment_text":"u","sensitive":true})");
  ASSERT_TRUE(pairs.ok()) << pairs.status();
  EXPECT_TRUE((*pairs)[0].sensitive);
  EXPECT_FALSE(ParsePairs("{\"pair_id\":\"p\",\"video_id\":\"v\",\"comment_id\":\"c\"}\n"
                          "{\"pair_id\":\"p\",\"video_id\":\"v\",\"comment_id\":\"c\"}\n")
                   .ok());
}

}  // namespace
}  // namespace aestk
