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

#include "aestk/fypsim.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <thread>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/time/time.h"
#include "aestk/corpus.h"
#include "aestk/random.h"
#include "embedded_data.h"
#include "json.hpp"
#include "view.h"

namespace aestk {

using internal::Av;

namespace {

using json = nlohmann::json;

// Substream layout: even streams schedule an account, odd streams simulate it.
uint64_t ScheduleStream(uint64_t seed, int account) {
  return SubstreamSeed(seed, 2 * static_cast<uint64_t>(account));
}
uint64_t BrowseStream(uint64_t seed, int account) {
  return SubstreamSeed(seed, 2 * static_cast<uint64_t>(account) + 1);
}

absl::StatusOr<absl::TimeZone> ClockZone(ClockMode mode) {
  if (mode == ClockMode::kFixedEst) return absl::FixedTimeZone(-5 * 3600);
  absl::TimeZone tz;
  if (!absl::LoadTimeZone("America/New_York", &tz)) {
    return absl::FailedPreconditionError(
        "time zone America/New_York unavailable (tzdata missing?)");
  }
  return tz;
}

std::string AccountId(int index) { return absl::StrFormat("puppet-%02d", index); }

// First `k` entries of a seeded permutation of 0..n-1.
std::vector<size_t> SampleWithoutReplacement(size_t n, size_t k, Rng& rng) {
  std::vector<size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  rng.Shuffle(std::span<size_t>(idx));
  idx.resize(k);
  return idx;
}

std::vector<PoolAccount> MustParsePool(std::string_view tsv) {
  return *ParsePool(tsv);
}

}  // namespace

absl::StatusOr<std::vector<PoolAccount>> ParsePool(std::string_view tsv) {
  auto table = ParseTsv(tsv);
  if (!table.ok()) return table.status();
  const int handle = table->ColumnIndex("author_id");
  const int name = table->ColumnIndex("author_name");
  const int topic = table->ColumnIndex("topic");
  if (handle < 0) {
    return absl::InvalidArgumentError("pool table needs an author_id column");
  }
  std::vector<PoolAccount> pool;
  std::set<std::string> seen;
  for (const auto& row : table->rows) {
    if (row[handle].empty() || !seen.insert(row[handle]).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("empty or duplicate pool handle '", row[handle], "'"));
    }
    pool.push_back({row[handle], name >= 0 ? row[name] : row[handle],
                    topic >= 0 ? row[topic] : ""});
  }
  return pool;
}

std::vector<PoolAccount> DefaultNewsPool() {
  return MustParsePool(embedded::kNewsPool);
}

std::vector<PoolAccount> DefaultLifestylePool() {
  return MustParsePool(embedded::kLifestylePool);
}

absl::Status ValidateConfig(const PuppetConfig& c) {
  if (c.num_accounts < 1) {
    return absl::InvalidArgumentError("num_accounts must be >= 1");
  }
  if (c.duration_days < 1) {
    return absl::InvalidArgumentError("duration_days must be >= 1");
  }
  if (c.offers_per_session < 0) {
    return absl::InvalidArgumentError("offers_per_session must be >= 0");
  }
  if (!(c.watch_probability >= 0 && c.watch_probability <= 1)) {
    return absl::InvalidArgumentError("watch_probability must be in [0, 1]");
  }
  if (c.window_start_minute < 0 || c.window_end_minute > 24 * 60 ||
      c.window_start_minute >= c.window_end_minute) {
    return absl::InvalidArgumentError(
        "session window needs 0 <= start < end <= 24:00");
  }
  if (c.second_session_offset_seconds <= 0) {
    return absl::InvalidArgumentError("second session offset must be > 0");
  }
  if (c.news_follows < 0 ||
      static_cast<size_t>(c.news_follows) > c.news_pool.size()) {
    return absl::FailedPreconditionError(absl::StrFormat(
        "news pool has %d accounts, fewer than the %d follows requested",
        c.news_pool.size(), c.news_follows));
  }
  if (c.lifestyle_follows < 0 ||
      static_cast<size_t>(c.lifestyle_follows) > c.lifestyle_pool.size()) {
    return absl::FailedPreconditionError(absl::StrFormat(
        "lifestyle pool has %d accounts, fewer than the %d follows requested",
        c.lifestyle_pool.size(), c.lifestyle_follows));
  }
  if (c.lifestyle_topics < 0) {
    return absl::InvalidArgumentError("lifestyle_topics must be >= 0");
  }
  if (c.lifestyle_topics > 0) {
    if (c.lifestyle_follows % c.lifestyle_topics != 0) {
      return absl::InvalidArgumentError(
          "lifestyle_follows must divide evenly across lifestyle_topics");
    }
    const size_t per_topic = c.lifestyle_follows / c.lifestyle_topics;
    std::map<std::string, size_t> sizes;
    for (const auto& a : c.lifestyle_pool) ++sizes[a.topic];
    size_t eligible = 0;
    for (const auto& [topic, n] : sizes) eligible += n >= per_topic ? 1 : 0;
    if (eligible < static_cast<size_t>(c.lifestyle_topics)) {
      return absl::FailedPreconditionError(absl::StrFormat(
          "lifestyle pool has %d topics with >= %d accounts; %d needed",
          eligible, per_topic, c.lifestyle_topics));
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<Schedule> GenerateSchedule(const PuppetConfig& config) {
  absl::Status status = ValidateConfig(config);
  if (!status.ok()) return status;
  auto tz = ClockZone(config.clock);
  if (!tz.ok()) return tz.status();

  // Topics with enough accounts, in name order, each with its members.
  std::map<std::string, std::vector<size_t>> by_topic;
  for (size_t i = 0; i < config.lifestyle_pool.size(); ++i) {
    by_topic[config.lifestyle_pool[i].topic].push_back(i);
  }
  std::vector<const std::pair<const std::string, std::vector<size_t>>*> topics;
  const size_t per_topic = config.lifestyle_topics > 0
                               ? config.lifestyle_follows / config.lifestyle_topics
                               : 0;
  for (const auto& entry : by_topic) {
    if (entry.second.size() >= per_topic) topics.push_back(&entry);
  }

  const int window_seconds =
      (config.window_end_minute - config.window_start_minute) * 60;
  Schedule schedule;
  for (int a = 0; a < config.num_accounts; ++a) {
    Rng rng(ScheduleStream(config.seed, a));
    PuppetAccount account;
    account.account_id = AccountId(a);
    for (size_t i : SampleWithoutReplacement(config.news_pool.size(),
                                             config.news_follows, rng)) {
      account.news_follows.push_back(config.news_pool[i].handle);
    }
    if (config.lifestyle_topics == 0) {
      for (size_t i : SampleWithoutReplacement(config.lifestyle_pool.size(),
                                               config.lifestyle_follows, rng)) {
        account.lifestyle_follows.push_back(config.lifestyle_pool[i].handle);
      }
    } else {
      for (size_t t : SampleWithoutReplacement(topics.size(),
                                               config.lifestyle_topics, rng)) {
        const auto& [name, members] = *topics[t];
        account.lifestyle_topics.push_back(name);
        for (size_t i :
             SampleWithoutReplacement(members.size(), per_topic, rng)) {
          account.lifestyle_follows.push_back(
              config.lifestyle_pool[members[i]].handle);
        }
      }
    }
    for (int d = 0; d < config.duration_days; ++d) {
      // Inclusive of both window edges.
      const int offset = static_cast<int>(rng.UniformInt(window_seconds + 1));
      const absl::CivilSecond local =
          absl::CivilSecond(config.start_day + d) +
          config.window_start_minute * 60 + offset;
      const int64_t morning = absl::ToUnixSeconds(absl::FromCivil(local, *tz));
      schedule.sessions.push_back(
          {a, d, morning, morning + config.second_session_offset_seconds});
    }
    schedule.accounts.push_back(std::move(account));
  }
  return schedule;
}

absl::StatusOr<int> LocalSecondOfDay(int64_t unix_seconds,
                                     const PuppetConfig& config) {
  auto tz = ClockZone(config.clock);
  if (!tz.ok()) return tz.status();
  const absl::CivilSecond cs =
      absl::ToCivilSecond(absl::FromUnixSeconds(unix_seconds), *tz);
  return static_cast<int>(cs - absl::CivilSecond(absl::CivilDay(cs)));
}

Table Schedule::SessionsTable(const PuppetConfig& config) const {
  absl::TimeZone tz = ClockZone(config.clock).value_or(absl::UTCTimeZone());
  auto local = [&](int64_t t) {
    return absl::FormatTime("%Y-%m-%dT%H:%M:%S%Ez", absl::FromUnixSeconds(t),
                            tz);
  };
  Table t{{"account_id", "day", "morning_local", "evening_local",
           "morning_utc", "evening_utc"},
          {}};
  for (const Session& s : sessions) {
    t.rows.push_back({accounts[s.account].account_id, absl::StrCat(s.day),
                      local(s.morning), local(s.evening),
                      FormatTimestamp(s.morning), FormatTimestamp(s.evening)});
  }
  return t;
}

Table Schedule::FollowsTable() const {
  Table t{{"account_id", "pool", "handle"}, {}};
  for (const auto& a : accounts) {
    for (const auto& h : a.news_follows) t.rows.push_back({a.account_id, "news", h});
    for (const auto& h : a.lifestyle_follows) {
      t.rows.push_back({a.account_id, "lifestyle", h});
    }
  }
  return t;
}

std::vector<FeedPost> SyntheticFeed(size_t count, double aes_rate,
                                    uint64_t seed) {
  const size_t positives = std::min(
      count, static_cast<size_t>(std::llround(aes_rate * static_cast<double>(count))));
  std::vector<FeedPost> feed(count);
  for (size_t i = 0; i < count; ++i) {
    feed[i].post_id = absl::StrFormat("feed-%07d", i);
    feed[i].aes = i < positives ? 1 : 0;
  }
  Rng rng(seed);
  rng.Shuffle(std::span<FeedPost>(feed));
  return feed;
}

absl::StatusOr<SimulationResult> SimulateBrowse(
    const Schedule& schedule, std::span<const FeedPost> feed,
    const PuppetConfig& config, const SimulationOptions& options) {
  if (feed.empty()) return absl::InvalidArgumentError("feed is empty");
  absl::Status status = ValidateConfig(config);
  if (!status.ok()) return status;
  const int num_accounts = static_cast<int>(schedule.accounts.size());
  std::vector<std::vector<const Session*>> by_account(num_accounts);
  for (const Session& s : schedule.sessions) {
    if (s.account < 0 || s.account >= num_accounts) {
      return absl::InvalidArgumentError("session references unknown account");
    }
    by_account[s.account].push_back(&s);
  }

  std::vector<std::vector<WatchEvent>> per_account(num_accounts);
  std::vector<int64_t> offers(num_accounts, 0);
  auto simulate = [&](int a) {
    Rng rng(BrowseStream(config.seed, a));
    size_t cursor = 0;
    for (const Session* s : by_account[a]) {
      for (int session = 0; session < 2; ++session) {
        const int64_t start = session == 0 ? s->morning : s->evening;
        for (int k = 0; k < config.offers_per_session; ++k) {
          const FeedPost& post = options.mode == FeedMode::kSample
                                     ? feed[rng.UniformInt(feed.size())]
                                     : feed[cursor++ % feed.size()];
          ++offers[a];
          if (rng.Bernoulli(config.watch_probability)) {
            per_account[a].push_back({schedule.accounts[a].account_id, s->day,
                                      session, k, start, post.post_id});
          }
        }
      }
    }
  };
  const int threads = std::clamp(options.threads, 1, std::max(1, num_accounts));
  if (threads == 1) {
    for (int a = 0; a < num_accounts; ++a) simulate(a);
  } else {
    std::vector<std::jthread> workers;
    for (int w = 0; w < threads; ++w) {
      workers.emplace_back([&, w] {
        for (int a = w; a < num_accounts; a += threads) simulate(a);
      });
    }
  }
  SimulationResult result;
  for (int a = 0; a < num_accounts; ++a) {
    result.offers += offers[a];
    result.watched.insert(result.watched.end(),
                          std::make_move_iterator(per_account[a].begin()),
                          std::make_move_iterator(per_account[a].end()));
  }
  return result;
}

std::string WatchLogToJsonl(std::span<const WatchEvent> events) {
  std::string out;
  for (const WatchEvent& e : events) {
    json j = {{"account_id", e.account_id}, {"day", e.day},
              {"session", e.session == 0 ? "morning" : "evening"},
              {"offer", e.offer}, {"timestamp", FormatTimestamp(e.timestamp)},
              {"post_id", e.post_id}};
    absl::StrAppend(&out, j.dump(), "\n");
  }
  return out;
}

absl::StatusOr<std::vector<WatchEvent>> ParseWatchLog(std::string_view jsonl) {
  std::vector<WatchEvent> events;
  std::vector<std::string_view> lines = SplitLines(jsonl);
  for (size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    json j = json::parse(lines[i], nullptr, /*allow_exceptions=*/false);
    auto bad = [&](std::string_view why) {
      return absl::InvalidArgumentError(
          absl::StrCat("watch log line ", i + 1, ": ", Av(why)));
    };
    if (j.is_discarded() || !j.is_object()) return bad("not a JSON object");
    WatchEvent e;
    try {
      e.account_id = j.at("account_id").get<std::string>();
      e.day = j.at("day").get<int>();
      const std::string session = j.at("session").get<std::string>();
      if (session != "morning" && session != "evening") {
        return bad("session must be morning or evening");
      }
      e.session = session == "morning" ? 0 : 1;
      e.offer = j.at("offer").get<int>();
      auto ts = ParseTimestamp(j.at("timestamp").get<std::string>());
      if (!ts.ok()) return bad(internal::Sv(ts.status().message()));
      e.timestamp = *ts;
      e.post_id = j.at("post_id").get<std::string>();
    } catch (const json::exception& ex) {
      return bad(ex.what());
    }
    events.push_back(std::move(e));
  }
  return events;
}

absl::StatusOr<ExposureEstimate> ExposurePrevalence(
    std::span<const WatchEvent> watched,
    const std::map<std::string, int>& labels, const BootstrapOptions& options) {
  if (watched.empty()) {
    return absl::InvalidArgumentError("watch log is empty");
  }
  std::vector<int> outcomes;
  outcomes.reserve(watched.size());
  for (const WatchEvent& e : watched) {
    auto it = labels.find(e.post_id);
    if (it == labels.end()) {
      return absl::FailedPreconditionError(
          absl::StrCat("watched post ", e.post_id, " has no label"));
    }
    outcomes.push_back(it->second);
  }
  auto ci = BootstrapProportion(outcomes, options);
  if (!ci.ok()) return ci.status();
  ExposureEstimate est;
  est.watched = outcomes.size();
  for (int y : outcomes) est.aes += y;
  est.proportion = static_cast<double>(est.aes) / est.watched;
  est.ci = *ci;
  return est;
}

}  // namespace aestk
