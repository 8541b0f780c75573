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


// Sock-puppet audit protocol: follow assignment, daily session schedules and
// a browsing simulator over synthetic or replayed feeds.
//
// Each account draws from its own seeded substream, so schedules and
// simulations are reproducible however the accounts are scheduled across
// threads.

#ifndef AESTK_FYPSIM_H_
#define AESTK_FYPSIM_H_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/time/civil_time.h"
#include "aestk/analyze.h"
#include "aestk/table_io.h"

namespace aestk {

struct PoolAccount {
  std::string handle;
  std::string name;
  std::string topic;  // empty for pools without topics
};

// TSV with `author_id` and `author_name` columns and an optional `topic`.
absl::StatusOr<std::vector<PoolAccount>> ParsePool(std::string_view tsv);
std::vector<PoolAccount> DefaultNewsPool();
std::vector<PoolAccount> DefaultLifestylePool();

enum class ClockMode {
  kFixedEst,     // UTC-5 all year
  kNewYorkCivil  // America/New_York, daylight saving applied
};

struct PuppetConfig {
  int num_accounts = 48;
  std::vector<PoolAccount> news_pool = DefaultNewsPool();
  std::vector<PoolAccount> lifestyle_pool = DefaultLifestylePool();
  int news_follows = 6;
  int lifestyle_follows = 6;
  // Lifestyle follows are split evenly across this many randomly chosen
  // topics; 0 samples from the whole pool regardless of topic.
  int lifestyle_topics = 2;
  int window_start_minute = 7 * 60;  // local time of day
  int window_end_minute = 9 * 60;
  int64_t second_session_offset_seconds = 12 * 3600;
  double watch_probability = 0.5;
  int duration_days = 35;
  int offers_per_session = 100;
  absl::CivilDay start_day = absl::CivilDay(2024, 1, 1);
  ClockMode clock = ClockMode::kFixedEst;
  uint64_t seed = 0;
};

absl::Status ValidateConfig(const PuppetConfig& config);

struct PuppetAccount {
  std::string account_id;
  std::vector<std::string> news_follows;
  std::vector<std::string> lifestyle_follows;
  std::vector<std::string> lifestyle_topics;
};

struct Session {
  int account = 0;
  int day = 0;
  int64_t morning = 0;  // Unix seconds
  int64_t evening = 0;  // morning + second_session_offset_seconds
};

struct Schedule {
  std::vector<PuppetAccount> accounts;
  std::vector<Session> sessions;  // by account, then day

  Table SessionsTable(const PuppetConfig& config) const;
  Table FollowsTable() const;
};

absl::StatusOr<Schedule> GenerateSchedule(const PuppetConfig& config);

// Seconds since local midnight of `unix_seconds` under the config's clock.
absl::StatusOr<int> LocalSecondOfDay(int64_t unix_seconds,
                                     const PuppetConfig& config);

struct FeedPost {
  std::string post_id;
  int aes = 0;  // hidden from the simulated viewer
};

// `count` posts of which round(count * aes_rate) are AES, shuffled.
std::vector<FeedPost> SyntheticFeed(size_t count, double aes_rate,
                                    uint64_t seed);

enum class FeedMode {
  kSample,  // each offer draws a post uniformly from the feed
  kReplay   // offers walk the feed in order, wrapping around
};

struct WatchEvent {
  std::string account_id;
  int day = 0;
  int session = 0;  // 0 morning, 1 evening
  int offer = 0;
  int64_t timestamp = 0;  // session start
  std::string post_id;
};

struct SimulationResult {
  int64_t offers = 0;
  std::vector<WatchEvent> watched;  // by account, day, session, offer
};

struct SimulationOptions {
  FeedMode mode = FeedMode::kSample;
  int threads = 1;
};

absl::StatusOr<SimulationResult> SimulateBrowse(const Schedule& schedule,
                                                std::span<const FeedPost> feed,
                                                const PuppetConfig& config,
                                                const SimulationOptions& options);

std::string WatchLogToJsonl(std::span<const WatchEvent> events);
absl::StatusOr<std::vector<WatchEvent>> ParseWatchLog(std::string_view jsonl);

struct ExposureEstimate {
  int64_t watched = 0;
  int64_t aes = 0;
  double proportion = 0.0;
  Interval ci;
};

// Errors on an empty log or a watched post without a label.
absl::StatusOr<ExposureEstimate> ExposurePrevalence(
    std::span<const WatchEvent> watched,
    const std::map<std::string, int>& labels, const BootstrapOptions& options);

}  // namespace aestk

#endif  // AESTK_FYPSIM_H_
