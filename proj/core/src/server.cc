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

#include "aestk/server.h"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <iostream>
#include <random>

#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "aestk/table_io.h"
#include "httplib.h"
#include "json.hpp"
#include "view.h"

namespace aestk {

using internal::Av;
using internal::Sv;

namespace {

using json = nlohmann::json;

constexpr std::string_view kPhaseNames[] = {"consent",  "training",
                                            "assessment", "pretask",
                                            "annotating", "done"};

constexpr std::string_view kConsentText =
    "Placeholder consent text. Replace with the wording approved for your "
    "study. Some items may contain distressing material; you may skip any "
    "item flagged as sensitive.";

absl::StatusOr<Phase> ParsePhase(std::string_view name) {
  for (int i = 0; i < 6; ++i) {
    if (kPhaseNames[i] == name) return static_cast<Phase>(i);
  }
  return absl::InvalidArgumentError(absl::StrCat("unknown phase ", Av(name)));
}

ApiResponse Reply(int status, const json& body) {
  return {status, body.dump()};
}

ApiResponse Error(int status, std::string_view code, std::string_view message,
                  const json& extra = json::object()) {
  json body = extra;
  body["error"] = std::string(code);
  body["message"] = std::string(message);
  return Reply(status, body);
}

absl::Status Errno(std::string_view what, const std::string& path) {
  return absl::UnavailableError(absl::StrCat(Av(what), " ", path, ": ",
                                             std::strerror(errno)));
}

bool WriteAll(int fd, std::string_view data) {
  while (!data.empty()) {
    const ssize_t n = ::write(fd, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    data.remove_prefix(static_cast<size_t>(n));
  }
  return true;
}

std::string NewToken() {
  static std::random_device device;
  return absl::StrFormat("%016x%016x",
                         (static_cast<uint64_t>(device()) << 32) | device(),
                         (static_cast<uint64_t>(device()) << 32) | device());
}

struct Session {
  std::string annotator_id;
  std::string token;
  Phase phase = Phase::kConsent;
  std::vector<std::string> training_answered;
  int training_correct = 0;
  int assessment_attempts = 0;
  double assessment_score = 0.0;
  double pretask_score = 0.0;
  int tasks_accepted = 0;
  int tasks_rejected = 0;
  int attention_passes = 0;  // in the most recent submission
  std::string open_task;     // not persisted; open tasks end with the process

  Annotator annotator() const {
    return {annotator_id, assessment_score, pretask_score, attention_passes};
  }
};

json SessionToJson(const Session& s) {
  return {{"annotator_id", s.annotator_id},
          {"token", s.token},
          {"phase", std::string(PhaseName(s.phase))},
          {"training_answered", s.training_answered},
          {"training_correct", s.training_correct},
          {"assessment_attempts", s.assessment_attempts},
          {"assessment_score", s.assessment_score},
          {"pretask_score", s.pretask_score},
          {"tasks_accepted", s.tasks_accepted},
          {"tasks_rejected", s.tasks_rejected},
          {"attention_passes", s.attention_passes}};
}

absl::StatusOr<Session> SessionFromJson(const json& j) {
  Session s;
  try {
    s.annotator_id = j.at("annotator_id").get<std::string>();
    s.token = j.at("token").get<std::string>();
    auto phase = ParsePhase(j.at("phase").get<std::string>());
    if (!phase.ok()) return phase.status();
    s.phase = *phase;
    s.training_answered = j.at("training_answered").get<std::vector<std::string>>();
    s.training_correct = j.at("training_correct").get<int>();
    s.assessment_attempts = j.at("assessment_attempts").get<int>();
    s.assessment_score = j.at("assessment_score").get<double>();
    s.pretask_score = j.at("pretask_score").get<double>();
    s.tasks_accepted = j.at("tasks_accepted").get<int>();
    s.tasks_rejected = j.at("tasks_rejected").get<int>();
    s.attention_passes = j.at("attention_passes").get<int>();
  } catch (const json::exception& e) {
    return absl::DataLossError(absl::StrCat("session snapshot: ", e.what()));
  }
  return s;
}

// A decided task: its outcome is replayed verbatim for identical resubmits.
struct Decided {
  std::string annotator_id;
  std::string payload;  // canonical JSON of the responses
  ApiResponse response;
  std::vector<std::string> content_pairs;
  std::vector<AnnotationRecord> records;
};

json TaskToJson(const AnnotationTask& task) {
  json slots = json::array();
  for (const TaskSlot& s : task.slots) {
    // Attention checks are indistinguishable from content in the payload.
    slots.push_back({{"slot_id", s.slot_id},
                     {"video_url", s.pair.video_url},
                     {"video_text", s.pair.video_text},
                     {"comment_text", s.pair.comment_text},
                     {"sensitive", s.pair.sensitive}});
  }
  return {{"task_id", task.task_id},
          {"slots", slots},
          {"video_scale_max", kVideoScaleMax},
          {"comment_scale_max", kCommentScaleMax}};
}

absl::StatusOr<std::vector<SlotResponse>> ParseResponses(const json& j) {
  if (!j.is_array()) {
    return absl::InvalidArgumentError("responses must be an array");
  }
  std::vector<SlotResponse> out;
  try {
    for (const json& r : j) {
      SlotResponse s;
      s.slot_id = r.at("slot_id").get<std::string>();
      s.skipped = r.value("skipped", false);
      if (r.contains("video_scale") && !r["video_scale"].is_null()) {
        s.video_scale = r["video_scale"].get<int>();
      }
      if (r.contains("comment_scale") && !r["comment_scale"].is_null()) {
        s.comment_scale = r["comment_scale"].get<int>();
      }
      out.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("responses: ", e.what()));
  }
  return out;
}

absl::StatusOr<std::vector<int>> ParseAnswers(const json& body, size_t expected) {
  if (!body.contains("answers") || !body["answers"].is_array()) {
    return absl::InvalidArgumentError("body needs an answers array");
  }
  std::vector<int> answers;
  for (const json& a : body["answers"]) {
    if (!a.is_number_integer()) {
      return absl::InvalidArgumentError("answers must be integers");
    }
    answers.push_back(a.get<int>());
  }
  if (answers.size() != expected) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "expected %d answers, got %d", expected, answers.size()));
  }
  return answers;
}

json QuestionsToJson(std::span<const Question> questions) {
  json out = json::array();
  for (const Question& q : questions) {
    out.push_back({{"question_id", q.question_id},
                   {"prompt", q.prompt},
                   {"options", q.options}});
  }
  return out;
}

std::vector<int> AnswerKey(std::span<const Question> questions) {
  std::vector<int> key;
  for (const Question& q : questions) key.push_back(q.answer);
  return key;
}

int64_t TaskNumber(std::string_view task_id) {
  int64_t n = -1;
  if (task_id.starts_with("task-") &&
      absl::SimpleAtoi(Av(task_id.substr(5)), &n)) {
    return n;
  }
  return -1;
}

}  // namespace

std::string_view PhaseName(Phase phase) {
  return kPhaseNames[static_cast<int>(phase)];
}

absl::Status ApplyEnvironment(ServerConfig* config) {
  auto str = [](const char* name, std::string* out) {
    if (const char* v = std::getenv(name); v != nullptr && *v != '\0') *out = v;
  };
  auto num = [](const char* name, auto* out) -> absl::Status {
    const char* v = std::getenv(name);
    if (v == nullptr || *v == '\0') return absl::OkStatus();
    if (!absl::SimpleAtoi(v, out)) {
      return absl::InvalidArgumentError(
          absl::StrCat(name, " is not a number: ", v));
    }
    return absl::OkStatus();
  };
  str("AESTK_HOST", &config->host);
  str("AESTK_DATA_DIR", &config->data_dir);
  str("AESTK_PAIRS", &config->pairs_path);
  str("AESTK_TRAINING_BANK", &config->training_bank_path);
  for (absl::Status s : {num("AESTK_PORT", &config->port),
                         num("AESTK_REDUNDANCY", &config->redundancy),
                         num("AESTK_SEED", &config->seed)}) {
    if (!s.ok()) return s;
  }
  return absl::OkStatus();
}

// ---------------------------------------------------------------------------
// JsonlStore

absl::StatusOr<std::unique_ptr<JsonlStore>> JsonlStore::Open(std::string path) {
  std::unique_ptr<JsonlStore> store(new JsonlStore(std::move(path)));
  // Repair a torn tail so later appends start on a fresh line.
  auto contents = ReadFileToString(store->path_);
  if (contents.ok() && !contents->empty() && contents->back() != '\n') {
    const size_t keep = contents->rfind('\n') + 1;  // npos + 1 == 0
    if (::truncate(store->path_.c_str(), static_cast<off_t>(keep)) != 0) {
      return Errno("truncate", store->path_);
    }
  }
  absl::Status status = store->Reopen();
  if (!status.ok()) return status;
  return store;
}

JsonlStore::~JsonlStore() {
  if (fd_ >= 0) ::close(fd_);
}

absl::Status JsonlStore::Reopen() {
  if (fd_ >= 0) ::close(fd_);
  fd_ = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd_ < 0) return Errno("open", path_);
  return absl::OkStatus();
}

absl::Status JsonlStore::Append(std::span<const std::string> lines) {
  std::string buffer;
  for (const std::string& line : lines) {
    if (line.find('\n') != std::string::npos) {
      return absl::InvalidArgumentError("store lines must not contain newlines");
    }
    absl::StrAppend(&buffer, line, "\n");
  }
  std::lock_guard<std::mutex> lock(mu_);
  struct stat st;
  if (::fstat(fd_, &st) != 0) return Errno("stat", path_);
  if (!WriteAll(fd_, buffer)) {
    absl::Status error = Errno("write", path_);
    // Roll back a partial append so the file keeps whole lines only.
    if (::ftruncate(fd_, st.st_size) != 0) return Errno("truncate", path_);
    return error;
  }
  if (::fsync(fd_) != 0) return Errno("fsync", path_);
  return absl::OkStatus();
}

absl::StatusOr<std::vector<std::string>> JsonlStore::ReadAll() const {
  std::lock_guard<std::mutex> lock(mu_);
  auto contents = ReadFileToString(path_);
  if (!contents.ok()) return contents.status();
  std::vector<std::string> lines;
  for (std::string_view line : SplitLines(*contents)) {
    if (!line.empty()) lines.emplace_back(line);
  }
  return lines;
}

absl::Status JsonlStore::Rewrite(std::span<const std::string> lines) {
  std::string buffer;
  for (const std::string& line : lines) absl::StrAppend(&buffer, line, "\n");
  std::lock_guard<std::mutex> lock(mu_);
  absl::Status status = WriteFileAtomically(path_, buffer);
  if (!status.ok()) return status;
  return Reopen();
}

// ---------------------------------------------------------------------------
// AnnotationService

struct AnnotationService::State {
  State(ServerConfig c, TrainingBank b, std::vector<VideoCommentPair> pairs,
        Clock clk)
      : config(std::move(c)),
        bank(std::move(b)),
        clock(std::move(clk)),
        queue(std::move(pairs), config.redundancy, config.seed) {}

  ServerConfig config;
  TrainingBank bank;
  Clock clock;

  std::mutex mu;  // guards everything below
  TaskQueue queue;
  std::map<std::string, Session> sessions;  // by annotator id
  std::map<std::string, std::string> by_token;
  std::map<std::string, AnnotationTask> open_tasks;
  std::map<std::string, Decided> decided;
  std::vector<std::string> decided_order;
  std::unique_ptr<JsonlStore> session_log;
  std::unique_ptr<JsonlStore> submission_log;
  int decided_since_compact = 0;

  absl::Status Commit(const Session& s) {
    absl::Status status = session_log->Append(std::vector<std::string>{SessionToJson(s).dump()});
    if (!status.ok()) return status;
    sessions[s.annotator_id] = s;
    by_token[s.token] = s.annotator_id;
    return absl::OkStatus();
  }

  absl::Status CompactLocked() {
    std::vector<std::string> lines;
    for (const auto& [id, s] : sessions) lines.push_back(SessionToJson(s).dump());
    decided_since_compact = 0;
    return session_log->Rewrite(lines);
  }

  ApiResponse Dispatch(std::string_view method, std::string_view path,
                       std::string_view token, const json& body);

  ApiResponse StartSession(const json& body);
  ApiResponse Progress(const Session& s) const;
  ApiResponse Consent(Session s, const json& body);
  ApiResponse TrainingNext(const Session& s) const;
  ApiResponse TrainingAnswer(Session s, const json& body);
  ApiResponse AssessmentGet(const Session& s) const;
  ApiResponse AssessmentSubmit(Session s, const json& body);
  ApiResponse PretaskGet(const Session& s) const;
  ApiResponse PretaskSubmit(Session s, const json& body);
  ApiResponse TaskNext(Session s);
  ApiResponse TaskSubmit(Session s, const json& body);

  Phase AfterTraining() const {
    return bank.items.empty() ? Phase::kAssessment : Phase::kTraining;
  }
};

namespace {

ApiResponse WrongPhase(const Session& s, std::string_view expected) {
  return Error(409, "wrong_phase",
               absl::StrCat("this step needs phase ", Av(expected)),
               {{"phase", std::string(PhaseName(s.phase))}});
}

ApiResponse Internal(const absl::Status& status) {
  return Error(500, "storage_error", Sv(status.message()));
}

}  // namespace

ApiResponse AnnotationService::State::StartSession(const json& body) {
  if (!body.contains("annotator_id") || !body["annotator_id"].is_string() ||
      body["annotator_id"].get<std::string>().empty()) {
    return Error(400, "bad_request", "annotator_id required");
  }
  const std::string id = body["annotator_id"].get<std::string>();
  if (auto it = sessions.find(id); it != sessions.end()) {
    // Resuming: hand back the existing token and state.
    json progress = json::parse(Progress(it->second).body);
    progress["token"] = it->second.token;
    progress["resumed"] = true;
    return Reply(200, progress);
  }
  Session s;
  s.annotator_id = id;
  s.token = NewToken();
  absl::Status status = Commit(s);
  if (!status.ok()) return Internal(status);
  json progress = json::parse(Progress(s).body);
  progress["token"] = s.token;
  progress["resumed"] = false;
  progress["consent_text"] = std::string(kConsentText);
  return Reply(201, progress);
}

ApiResponse AnnotationService::State::Progress(const Session& s) const {
  const bool open = !s.open_task.empty();
  return Reply(200,
               {{"annotator_id", s.annotator_id},
                {"phase", std::string(PhaseName(s.phase))},
                {"training",
                 {{"answered", s.training_answered.size()},
                  {"correct", s.training_correct},
                  {"total", bank.items.size()}}},
                {"assessment",
                 {{"attempts", s.assessment_attempts},
                  {"max_attempts", config.max_assessment_attempts},
                  {"score", s.assessment_score},
                  {"passed", s.assessment_score >= kAssessmentPassThreshold}}},
                {"pretask",
                 {{"score", s.pretask_score},
                  {"passed", s.pretask_score >= kPretaskPassThreshold}}},
                {"tasks",
                 {{"accepted", s.tasks_accepted},
                  {"rejected", s.tasks_rejected},
                  {"open", open ? json(s.open_task) : json(nullptr)}}},
                {"qualified", s.annotator().qualified()},
                {"remaining_pairs", queue.remaining_pairs()}});
}

ApiResponse AnnotationService::State::Consent(Session s, const json& body) {
  if (s.phase != Phase::kConsent) return WrongPhase(s, "consent");
  if (!body.contains("agree") || !body["agree"].is_boolean()) {
    return Error(400, "bad_request", "agree (boolean) required");
  }
  s.phase = body["agree"].get<bool>() ? AfterTraining() : Phase::kDone;
  absl::Status status = Commit(s);
  if (!status.ok()) return Internal(status);
  return Progress(s);
}

ApiResponse AnnotationService::State::TrainingNext(const Session& s) const {
  if (s.phase != Phase::kTraining) return WrongPhase(s, "training");
  for (size_t i = 0; i < bank.items.size(); ++i) {
    const TrainingItem& item = bank.items[i];
    if (std::find(s.training_answered.begin(), s.training_answered.end(),
                  item.item_id) != s.training_answered.end()) {
      continue;
    }
    return Reply(200, {{"item_id", item.item_id},
                       {"kind", std::string(TrainingKindName(item.kind))},
                       {"stimulus", item.stimulus},
                       {"options", item.options},
                       {"index", i},
                       {"total", bank.items.size()}});
  }
  return Reply(200, {{"complete", true}});
}

ApiResponse AnnotationService::State::TrainingAnswer(Session s,
                                                     const json& body) {
  if (s.phase != Phase::kTraining) return WrongPhase(s, "training");
  if (!body.contains("item_id") || !body["item_id"].is_string() ||
      !body.contains("answer") || !body["answer"].is_number_integer()) {
    return Error(400, "bad_request", "item_id and integer answer required");
  }
  const std::string item_id = body["item_id"].get<std::string>();
  const int answer = body["answer"].get<int>();
  auto it = std::find_if(bank.items.begin(), bank.items.end(),
                         [&](const TrainingItem& t) { return t.item_id == item_id; });
  if (it == bank.items.end()) {
    return Error(404, "unknown_item", absl::StrCat("no training item ", item_id));
  }
  if (answer < 0 || answer >= static_cast<int>(it->options.size())) {
    return Error(400, "bad_request", "answer outside the item's options");
  }
  const bool correct = answer == it->correct_answer;
  const bool first = std::find(s.training_answered.begin(),
                               s.training_answered.end(),
                               item_id) == s.training_answered.end();
  if (first) {
    s.training_answered.push_back(item_id);
    s.training_correct += correct ? 1 : 0;
  }
  if (s.training_answered.size() == bank.items.size()) {
    s.phase = Phase::kAssessment;
  }
  absl::Status status = Commit(s);
  if (!status.ok()) return Internal(status);
  return Reply(200, {{"item_id", item_id},
                     {"correct", correct},
                     {"correct_answer", it->correct_answer},
                     {"feedback", correct ? it->feedback_correct
                                          : it->feedback_incorrect},
                     {"feedback_correct", it->feedback_correct},
                     {"feedback_incorrect", it->feedback_incorrect},
                     {"training_complete", s.phase == Phase::kAssessment},
                     {"phase", std::string(PhaseName(s.phase))}});
}

ApiResponse AnnotationService::State::AssessmentGet(const Session& s) const {
  if (s.phase != Phase::kAssessment) return WrongPhase(s, "assessment");
  return Reply(200, {{"questions", QuestionsToJson(bank.assessment)},
                     {"attempt", s.assessment_attempts + 1},
                     {"max_attempts", config.max_assessment_attempts},
                     {"pass_threshold", kAssessmentPassThreshold}});
}

ApiResponse AnnotationService::State::AssessmentSubmit(Session s,
                                                       const json& body) {
  if (s.phase != Phase::kAssessment) return WrongPhase(s, "assessment");
  auto answers = ParseAnswers(body, bank.assessment.size());
  if (!answers.ok()) return Error(400, "bad_request", Sv(answers.status().message()));
  auto result = GradeAssessment(*answers, AnswerKey(bank.assessment),
                                kAssessmentPassThreshold);
  if (!result.ok()) return Error(400, "bad_request", Sv(result.status().message()));
  ++s.assessment_attempts;
  s.assessment_score = result->score;
  const int remaining = config.max_assessment_attempts - s.assessment_attempts;
  if (result->passed) {
    s.phase = bank.pretask.empty() ? Phase::kAnnotating : Phase::kPretask;
    if (bank.pretask.empty()) s.pretask_score = 1.0;
  } else if (remaining > 0) {
    // Retry: back to training, which is worked through again.
    s.phase = AfterTraining();
    s.training_answered.clear();
    s.training_correct = 0;
  } else {
    s.phase = Phase::kDone;
  }
  absl::Status status = Commit(s);
  if (!status.ok()) return Internal(status);
  return Reply(200, {{"score", result->score},
                     {"correct", result->correct},
                     {"total", result->total},
                     {"passed", result->passed},
                     {"attempts_used", s.assessment_attempts},
                     {"attempts_remaining", std::max(0, remaining)},
                     {"phase", std::string(PhaseName(s.phase))}});
}

ApiResponse AnnotationService::State::PretaskGet(const Session& s) const {
  if (s.phase != Phase::kPretask) return WrongPhase(s, "pretask");
  return Reply(200, {{"questions", QuestionsToJson(bank.pretask)},
                     {"pass_threshold", kPretaskPassThreshold}});
}

ApiResponse AnnotationService::State::PretaskSubmit(Session s,
                                                    const json& body) {
  if (s.phase != Phase::kPretask) return WrongPhase(s, "pretask");
  auto answers = ParseAnswers(body, bank.pretask.size());
  if (!answers.ok()) return Error(400, "bad_request", Sv(answers.status().message()));
  auto result =
      GradeAssessment(*answers, AnswerKey(bank.pretask), kPretaskPassThreshold);
  if (!result.ok()) return Error(400, "bad_request", Sv(result.status().message()));
  s.pretask_score = result->score;
  s.phase = result->passed ? Phase::kAnnotating : Phase::kDone;
  absl::Status status = Commit(s);
  if (!status.ok()) return Internal(status);
  return Reply(200, {{"score", result->score},
                     {"correct", result->correct},
                     {"total", result->total},
                     {"passed", result->passed},
                     {"phase", std::string(PhaseName(s.phase))}});
}

ApiResponse AnnotationService::State::TaskNext(Session s) {
  if (s.phase != Phase::kAnnotating || !s.annotator().qualified()) {
    return Error(403, "not_qualified",
                 "tasks are available only after passing the assessment and "
                 "the pre-task check",
                 {{"phase", std::string(PhaseName(s.phase))}});
  }
  if (!s.open_task.empty()) {
    return Reply(200, TaskToJson(open_tasks.at(s.open_task)));
  }
  auto task = queue.NextTask(s.annotator_id);
  if (!task.ok()) {
    if (absl::IsNotFound(task.status())) {
      return Error(404, "no_tasks", "no pairs left for this annotator");
    }
    return Error(500, "internal", Sv(task.status().message()));
  }
  s.open_task = task->task_id;
  sessions[s.annotator_id].open_task = s.open_task;
  json payload = TaskToJson(*task);
  open_tasks.emplace(task->task_id, *std::move(task));
  return Reply(200, payload);
}

ApiResponse AnnotationService::State::TaskSubmit(Session s, const json& body) {
  if (!body.contains("task_id") || !body["task_id"].is_string() ||
      !body.contains("responses")) {
    return Error(400, "bad_request", "task_id and responses required");
  }
  const std::string task_id = body["task_id"].get<std::string>();
  const std::string payload = body["responses"].dump();
  if (auto it = decided.find(task_id);
      it != decided.end() && it->second.annotator_id == s.annotator_id) {
    if (it->second.payload == payload) return it->second.response;
    return Error(409, "duplicate_submission",
                 absl::StrCat("task ", task_id, " was already submitted"));
  }
  if (s.phase != Phase::kAnnotating) {
    return Error(403, "not_qualified", "not in the annotating phase",
                 {{"phase", std::string(PhaseName(s.phase))}});
  }
  auto open = open_tasks.find(task_id);
  if (open == open_tasks.end() || open->second.annotator_id != s.annotator_id) {
    return Error(404, "unknown_task",
                 absl::StrCat("no open task ", task_id, " for this session"));
  }
  auto responses = ParseResponses(body["responses"]);
  if (!responses.ok()) {
    return Error(400, "bad_request", Sv(responses.status().message()));
  }
  auto outcome =
      EvaluateSubmission(open->second, s.annotator(), *responses, clock());
  if (!outcome.ok()) {
    return Error(400, "bad_request", Sv(outcome.status().message()));
  }

  Decided d;
  d.annotator_id = s.annotator_id;
  d.payload = payload;
  if (outcome->accepted) d.content_pairs = open->second.ContentPairIds();
  d.records = outcome->records;
  json body_out = {{"task_id", task_id},
                   {"accepted", outcome->accepted},
                   {"attention_passes", outcome->attention_passes},
                   {"records", outcome->records.size()}};
  if (!outcome->accepted) body_out["reason"] = outcome->reason;
  d.response = Reply(outcome->accepted ? 200 : 422, body_out);

  json records = json::array();
  const std::string records_jsonl = RecordsToJsonl(d.records);
  for (std::string_view line : SplitLines(records_jsonl)) {
    records.push_back(json::parse(line));
  }
  json line = {{"task_id", task_id},
               {"annotator_id", s.annotator_id},
               {"payload", payload},
               {"status", d.response.status},
               {"response", json::parse(d.response.body)},
               {"content_pairs", d.content_pairs},
               {"records", records}};
  absl::Status status = submission_log->Append(std::vector<std::string>{line.dump()});
  if (!status.ok()) return Internal(status);

  if (!outcome->accepted) queue.Release(open->second);
  open_tasks.erase(open);
  s.open_task.clear();
  s.attention_passes = outcome->attention_passes;
  (outcome->accepted ? s.tasks_accepted : s.tasks_rejected)++;
  status = Commit(s);
  ApiResponse response = d.response;
  decided.emplace(task_id, std::move(d));
  decided_order.push_back(task_id);
  if (!status.ok()) return Internal(status);
  if (config.compact_every > 0 &&
      ++decided_since_compact >= config.compact_every) {
    status = CompactLocked();
    if (!status.ok()) return Internal(status);
  }
  return response;
}

ApiResponse AnnotationService::State::Dispatch(std::string_view method,
                                               std::string_view path,
                                               std::string_view token,
                                               const json& body) {
  const bool get = method == "GET";
  const bool post = method == "POST";
  if (path == "/v1/health") {
    return get ? Reply(200, {{"status", "ok"}})
               : Error(405, "method_not_allowed", "use GET");
  }
  if (path == "/v1/session") {
    return post ? StartSession(body) : Error(405, "method_not_allowed", "use POST");
  }

  struct Route {
    std::string_view path;
    bool post;
  };
  static constexpr Route kRoutes[] = {
      {"/v1/progress", false},        {"/v1/consent", false},
      {"/v1/consent", true},          {"/v1/training/next", false},
      {"/v1/training/answer", true},  {"/v1/assessment", false},
      {"/v1/assessment/submit", true}, {"/v1/pretask", false},
      {"/v1/pretask/submit", true},   {"/v1/task/next", false},
      {"/v1/task/submit", true}};
  bool known_path = false;
  bool allowed = false;
  for (const Route& r : kRoutes) {
    if (r.path != path) continue;
    known_path = true;
    allowed |= r.post ? post : get;
  }
  if (!known_path) return Error(404, "not_found", "no such endpoint");
  if (!allowed) return Error(405, "method_not_allowed", "wrong method");

  auto who = by_token.find(std::string(token));
  if (token.empty() || who == by_token.end()) {
    return Error(401, "unauthorized", "missing or unknown X-Session-Token");
  }
  const Session& s = sessions.at(who->second);
  if (path == "/v1/progress") return Progress(s);
  if (path == "/v1/consent") {
    if (get) return Reply(200, {{"consent_text", std::string(kConsentText)}});
    return Consent(s, body);
  }
  if (path == "/v1/training/next") return TrainingNext(s);
  if (path == "/v1/training/answer") return TrainingAnswer(s, body);
  if (path == "/v1/assessment") return AssessmentGet(s);
  if (path == "/v1/assessment/submit") return AssessmentSubmit(s, body);
  if (path == "/v1/pretask") return PretaskGet(s);
  if (path == "/v1/pretask/submit") return PretaskSubmit(s, body);
  if (path == "/v1/task/next") return TaskNext(s);
  return TaskSubmit(s, body);
}

AnnotationService::AnnotationService(std::unique_ptr<State> state)
    : state_(std::move(state)) {}

AnnotationService::~AnnotationService() = default;

absl::StatusOr<std::unique_ptr<AnnotationService>> AnnotationService::Create(
    const ServerConfig& config, TrainingBank bank,
    std::vector<VideoCommentPair> pairs, Clock clock) {
  absl::Status status = ValidateTrainingBank(bank);
  if (!status.ok()) return status;
  if (config.redundancy < 1) {
    return absl::InvalidArgumentError("redundancy must be >= 1");
  }
  if (config.max_assessment_attempts < 1) {
    return absl::InvalidArgumentError("max_assessment_attempts must be >= 1");
  }
  std::error_code ec;
  std::filesystem::create_directories(config.data_dir, ec);
  if (ec) {
    return absl::UnavailableError(absl::StrCat(
        "cannot create data directory ", config.data_dir, ": ", ec.message()));
  }
  if (!clock) {
    clock = [] {
      return static_cast<int64_t>(std::chrono::duration_cast<std::chrono::seconds>(
                                      std::chrono::system_clock::now().time_since_epoch())
                                      .count());
    };
  }
  auto state = std::make_unique<State>(config, std::move(bank),
                                       std::move(pairs), std::move(clock));
  const std::filesystem::path dir(config.data_dir);
  auto sessions = JsonlStore::Open((dir / "sessions.jsonl").string());
  if (!sessions.ok()) return sessions.status();
  auto submissions = JsonlStore::Open((dir / "submissions.jsonl").string());
  if (!submissions.ok()) return submissions.status();
  state->session_log = *std::move(sessions);
  state->submission_log = *std::move(submissions);

  auto session_lines = state->session_log->ReadAll();
  if (!session_lines.ok()) return session_lines.status();
  for (const std::string& line : *session_lines) {
    json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) return absl::DataLossError("corrupt session snapshot");
    auto s = SessionFromJson(j);
    if (!s.ok()) return s.status();
    state->by_token[s->token] = s->annotator_id;
    state->sessions[s->annotator_id] = *std::move(s);
  }

  auto submission_lines = state->submission_log->ReadAll();
  if (!submission_lines.ok()) return submission_lines.status();
  int64_t next_task = 0;
  for (const std::string& line : *submission_lines) {
    json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) return absl::DataLossError("corrupt submission line");
    Decided d;
    std::string task_id;
    try {
      task_id = j.at("task_id").get<std::string>();
      d.annotator_id = j.at("annotator_id").get<std::string>();
      d.payload = j.at("payload").get<std::string>();
      d.response = Reply(j.at("status").get<int>(), j.at("response"));
      d.content_pairs = j.at("content_pairs").get<std::vector<std::string>>();
      std::string records;
      for (const json& r : j.at("records")) absl::StrAppend(&records, r.dump(), "\n");
      auto parsed = ParseRecords(records);
      if (!parsed.ok()) return parsed.status();
      d.records = *std::move(parsed);
    } catch (const json::exception& e) {
      return absl::DataLossError(absl::StrCat("submission line: ", e.what()));
    }
    for (const std::string& pair : d.content_pairs) {
      state->queue.MarkCovered(pair, d.annotator_id);
    }
    next_task = std::max(next_task, TaskNumber(task_id) + 1);
    state->decided_order.push_back(task_id);
    state->decided.emplace(task_id, std::move(d));
  }
  state->queue.ReserveTaskNumbers(next_task);
  return std::unique_ptr<AnnotationService>(
      new AnnotationService(std::move(state)));
}

absl::StatusOr<std::unique_ptr<AnnotationService>> AnnotationService::FromConfig(
    const ServerConfig& config) {
  TrainingBank bank;
  if (config.training_bank_path.empty()) {
    bank = DefaultTrainingBank();
  } else {
    auto loaded = LoadTrainingBank(config.training_bank_path);
    if (!loaded.ok()) return loaded.status();
    bank = *std::move(loaded);
  }
  const std::string pairs_path =
      config.pairs_path.empty()
          ? (std::filesystem::path(config.data_dir) / "pairs.jsonl").string()
          : config.pairs_path;
  auto text = ReadFileToString(pairs_path);
  if (!text.ok()) return text.status();
  auto pairs = ParsePairs(*text);
  if (!pairs.ok()) return pairs.status();
  return Create(config, std::move(bank), *std::move(pairs));
}

ApiResponse AnnotationService::Handle(std::string_view method,
                                      std::string_view path,
                                      std::string_view token,
                                      std::string_view body) {
  json parsed = json::object();
  if (method == "POST") {
    if (body.empty()) {
      parsed = json::object();
    } else {
      parsed = json::parse(body, nullptr, /*allow_exceptions=*/false);
      if (parsed.is_discarded() || !parsed.is_object()) {
        return Error(400, "bad_request", "body must be a JSON object");
      }
    }
  }
  std::lock_guard<std::mutex> lock(state_->mu);
  try {
    return state_->Dispatch(method, path, token, parsed);
  } catch (const std::exception& e) {
    return Error(500, "internal", e.what());
  }
}

absl::Status AnnotationService::Compact() {
  std::lock_guard<std::mutex> lock(state_->mu);
  return state_->CompactLocked();
}

std::vector<AnnotationRecord> AnnotationService::AcceptedRecords() const {
  std::lock_guard<std::mutex> lock(state_->mu);
  std::vector<AnnotationRecord> out;
  for (const std::string& id : state_->decided_order) {
    const auto& records = state_->decided.at(id).records;
    out.insert(out.end(), records.begin(), records.end());
  }
  return out;
}

// ---------------------------------------------------------------------------
// HttpFrontend

struct HttpFrontend::Impl {
  AnnotationService* service;
  httplib::Server server;
};

HttpFrontend::HttpFrontend(AnnotationService* service)
    : impl_(std::make_unique<Impl>()) {
  impl_->service = service;
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    ApiResponse r = impl_->service->Handle(
        req.method, req.path, req.get_header_value("X-Session-Token"),
        req.body);
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  impl_->server.Get(R"(/v1/.*)", handler);
  impl_->server.Post(R"(/v1/.*)", handler);
  impl_->server.Options(R"(/v1/.*)",
                        [](const httplib::Request&, httplib::Response& res) {
                          res.status = 204;
                        });
  impl_->server.set_default_headers(
      {{"Access-Control-Allow-Origin", "*"},
       {"Access-Control-Allow-Headers", "Content-Type, X-Session-Token"},
       {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
}

HttpFrontend::~HttpFrontend() { Stop(); }

absl::StatusOr<int> HttpFrontend::Bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) return absl::UnavailableError("cannot bind any port");
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) {
    return absl::UnavailableError(absl::StrCat("cannot bind ", host, ":", port));
  }
  return port;
}

absl::Status HttpFrontend::Listen() {
  if (!impl_->server.listen_after_bind()) {
    return absl::UnavailableError("server stopped with an error");
  }
  return absl::OkStatus();
}

void HttpFrontend::Stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

absl::Status RunServer(const ServerConfig& config) {
  auto service = AnnotationService::FromConfig(config);
  if (!service.ok()) return service.status();
  HttpFrontend frontend(service->get());
  auto port = frontend.Bind(config.host, config.port);
  if (!port.ok()) return port.status();
  std::cerr << "aestk: serving /v1 on http://" << config.host << ":" << *port
            << " (data in " << config.data_dir << ")\n";
  return frontend.Listen();
}

}  // namespace aestk
