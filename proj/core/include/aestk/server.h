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


// Annotation protocol service: consent, training with feedback, the
// qualification assessment, the pre-task check, task hand-out and submission.
// AnnotationService is transport independent; HttpFrontend exposes it as
// JSON over HTTP under /v1.
//
// State lives in two append-only JSONL files in the data directory:
// sessions.jsonl (latest snapshot per annotator wins) and submissions.jsonl
// (one line per decided task, holding all of its records). A submission is
// therefore stored entirely or not at all.

#ifndef AESTK_SERVER_H_
#define AESTK_SERVER_H_

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "aestk/annotation.h"

namespace aestk {

struct ServerConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string data_dir = "aestk-data";
  std::string pairs_path;          // empty: <data_dir>/pairs.jsonl
  std::string training_bank_path;  // empty: bundled placeholder bank
  int redundancy = kDefaultRedundancy;
  int max_assessment_attempts = 2;
  uint64_t seed = 0;
  int compact_every = 100;  // decided tasks between compactions; 0 = never
};

// Overrides config fields from AESTK_HOST, AESTK_PORT, AESTK_DATA_DIR,
// AESTK_PAIRS, AESTK_TRAINING_BANK, AESTK_REDUNDANCY and AESTK_SEED.
absl::Status ApplyEnvironment(ServerConfig* config);

enum class Phase { kConsent, kTraining, kAssessment, kPretask, kAnnotating, kDone };

std::string_view PhaseName(Phase phase);

// Append-only line store. Each Append is a single write of whole lines; a
// torn trailing line left by a crash is truncated away on Open.
class JsonlStore {
 public:
  static absl::StatusOr<std::unique_ptr<JsonlStore>> Open(std::string path);
  ~JsonlStore();

  absl::Status Append(std::span<const std::string> lines);
  absl::StatusOr<std::vector<std::string>> ReadAll() const;
  // Atomically replaces the contents (write to a temp file, then rename).
  absl::Status Rewrite(std::span<const std::string> lines);

  const std::string& path() const { return path_; }

 private:
  explicit JsonlStore(std::string path) : path_(std::move(path)) {}
  absl::Status Reopen();

  std::string path_;
  int fd_ = -1;
  mutable std::mutex mu_;
};

struct ApiResponse {
  int status = 200;
  std::string body;  // JSON
};

class AnnotationService {
 public:
  using Clock = std::function<int64_t()>;  // Unix seconds

  // Restores sessions and decided tasks from the data directory.
  static absl::StatusOr<std::unique_ptr<AnnotationService>> Create(
      const ServerConfig& config, TrainingBank bank,
      std::vector<VideoCommentPair> pairs, Clock clock = nullptr);
  // Loads the pairs and training bank named by `config`.
  static absl::StatusOr<std::unique_ptr<AnnotationService>> FromConfig(
      const ServerConfig& config);

  ~AnnotationService();

  // `path` includes the /v1 prefix; `token` is the X-Session-Token header.
  ApiResponse Handle(std::string_view method, std::string_view path,
                     std::string_view token, std::string_view body);

  // Drops superseded session snapshots from sessions.jsonl.
  absl::Status Compact();

  // Accepted records, in submission order.
  std::vector<AnnotationRecord> AcceptedRecords() const;

 private:
  struct State;
  explicit AnnotationService(std::unique_ptr<State> state);

  std::unique_ptr<State> state_;
};

// Serves an AnnotationService over HTTP.
class HttpFrontend {
 public:
  explicit HttpFrontend(AnnotationService* service);
  ~HttpFrontend();

  // Port 0 binds an ephemeral port. Returns the bound port.
  absl::StatusOr<int> Bind(const std::string& host, int port);
  // Blocks until Stop().
  absl::Status Listen();
  void Stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Creates the service from `config` and serves until the process is stopped.
absl::Status RunServer(const ServerConfig& config);

}  // namespace aestk

#endif  // AESTK_SERVER_H_
