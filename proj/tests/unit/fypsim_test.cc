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

#include <map>
#include <set>
#include <string>
#include <vector>

#include "absl/time/civil_time.h"
#include "gtest/gtest.h"

namespace aestk {
namespace {

// US Eastern offset written out from the post-2007 rule: daylight time from
// 02:00 on the second Sunday of March to 02:00 on the first Sunday of
// November (both local standard time boundaries expressed in UTC).
int64_t EasternOffsetLonghand(int64_t unix_seconds) {
  const absl::CivilSecond utc(1970, 1, 1, 0, 0, unix_seconds);
  const int64_t year = utc.year();
  auto nth_sunday = [&](int month, int n) {
    absl::CivilDay d(year, month, 1);
    while (absl::GetWeekday(d) != absl::Weekday::sunday) ++d;
    return d + 7 * (n - 1);
  };
  const absl::CivilSecond start = absl::CivilSecond(nth_sunday(3, 2)) + 7 * 3600;
  const absl::CivilSecond end = absl::CivilSecond(nth_sunday(11, 1)) + 6 * 3600;
  return utc >= start && utc < end ? -4 * 3600 : -5 * 3600;
}

int LocalMinute(int64_t t, int64_t offset) {
  const int64_t local = t + offset;
  return static_cast<int>(((local % 86400) + 86400) % 86400 / 60);
}

TEST(ScheduleTest, WindowsOffsetsAndShape) {
  PuppetConfig config;
  config.num_accounts = 12;
  config.duration_days = 20;
  auto schedule = GenerateSchedule(config);
  ASSERT_TRUE(schedule.ok()) << schedule.status();
  ASSERT_EQ(schedule->accounts.size(), 12u);
  ASSERT_EQ(schedule->sessions.size(), 240u);
  for (const Session& s : schedule->sessions) {
    EXPECT_EQ(s.evening - s.morning, 12 * 3600);
    const int minute = LocalMinute(s.morning, -5 * 3600);
    EXPECT_GE(minute, 7 * 60);
    EXPECT_LT(minute, 9 * 60);
    auto local = LocalSecondOfDay(s.morning, config);
    ASSERT_TRUE(local.ok());
    EXPECT_EQ(*local / 60, minute);
  }
}

TEST(ScheduleTest, NewYorkClockFollowsDaylightSaving) {
  PuppetConfig config;
  config.num_accounts = 3;
  config.duration_days = 366;
  config.clock = ClockMode::kNewYorkCivil;
  auto schedule = GenerateSchedule(config);
  ASSERT_TRUE(schedule.ok()) << schedule.status();
  std::set<int64_t> offsets;
  for (const Session& s : schedule->sessions) {
    const int64_t offset = EasternOffsetLonghand(s.morning);
    offsets.insert(offset);
    const int minute = LocalMinute(s.morning, offset);
    EXPECT_GE(minute, 7 * 60) << s.morning;
    EXPECT_LT(minute, 9 * 60) << s.morning;
    auto local = LocalSecondOfDay(s.morning, config);
    ASSERT_TRUE(local.ok());
    EXPECT_EQ(*local / 60, minute);
  }
  EXPECT_EQ(offsets.size(), 2u);
}

TEST(ScheduleTest, FollowsComeFromPoolsWithoutRepeats) {
  PuppetConfig config;
  config.num_accounts = 10;
  config.duration_days = 1;
  auto schedule = GenerateSchedule(config);
  ASSERT_TRUE(schedule.ok());
  std::set<std::string> news, lifestyle;
  std::map<std::string, std::string> topic_of;
  for (const auto& a : config.news_pool) news.insert(a.handle);
  for (const auto& a : config.lifestyle_pool) {
    lifestyle.insert(a.handle);
    topic_of[a.handle] = a.topic;
  }
  for (const PuppetAccount& a : schedule->accounts) {
    ASSERT_EQ(static_cast<int>(a.news_follows.size()), config.news_follows);
    ASSERT_EQ(static_cast<int>(a.lifestyle_follows.size()), config.lifestyle_follows);
    EXPECT_EQ(std::set<std::string>(a.news_follows.begin(), a.news_follows.end()).size(),
              a.news_follows.size());
    for (const auto& h : a.news_follows) EXPECT_TRUE(news.contains(h));
    ASSERT_EQ(static_cast<int>(a.lifestyle_topics.size()), config.lifestyle_topics);
    std::map<std::string, int> per_topic;
    for (const auto& h : a.lifestyle_follows) {
      ASSERT_TRUE(lifestyle.contains(h));
      ++per_topic[topic_of[h]];
    }
    for (const auto& t : a.lifestyle_topics) EXPECT_EQ(per_topic[t], 3) << t;
  }
}

TEST(ScheduleTest, SeededAndValidated) {
  PuppetConfig config;
  config.num_accounts = 4;
  config.duration_days = 3;
  config.seed = 5;
  auto a = GenerateSchedule(config);
  auto b = GenerateSchedule(config);
  ASSERT_TRUE(a.ok() && b.ok());
  EXPECT_EQ(FormatTsv(a->SessionsTable(config)), FormatTsv(b->SessionsTable(config)));
  EXPECT_EQ(FormatTsv(a->FollowsTable()), FormatTsv(b->FollowsTable()));
  PuppetConfig bad = config;
  bad.window_end_minute = bad.window_start_minute;
  EXPECT_FALSE(GenerateSchedule(bad).ok());
  bad = config;
  bad.watch_probability = 1.5;
  EXPECT_FALSE(ValidateConfig(bad).ok());
  bad = config;
  bad.news_follows = static_cast<int>(config.news_pool.size()) + 1;
  EXPECT_FALSE(ValidateConfig(bad).ok());
}

TEST(FeedTest, ExactPlantedCount) {
  auto feed = SyntheticFeed(1001, 0.0048, 3);
  int aes = 0;
  std::set<std::string> ids;
  for (const auto& p : feed) {
    aes += p.aes;
    ids.insert(p.post_id);
  }
  EXPECT_EQ(aes, 5);
  EXPECT_EQ(ids.size(), 1001u);
}

TEST(SimulateTest, ThreadCountDoesNotChangeTheLog) {
  PuppetConfig config;
  config.num_accounts = 7;
  config.duration_days = 4;
  config.offers_per_session = 30;
  auto schedule = GenerateSchedule(config);
  ASSERT_TRUE(schedule.ok());
  auto feed = SyntheticFeed(500, 0.1, 1);
  auto one = SimulateBrowse(*schedule, feed, config, {FeedMode::kSample, 1});
  auto four = SimulateBrowse(*schedule, feed, config, {FeedMode::kSample, 4});
  ASSERT_TRUE(one.ok() && four.ok());
  EXPECT_EQ(one->offers, 7 * 4 * 2 * 30);
  EXPECT_EQ(WatchLogToJsonl(one->watched), WatchLogToJsonl(four->watched));
}

TEST(SimulateTest, ReplayWalksTheFeedInOrder) {
  PuppetConfig config;
  config.num_accounts = 1;
  config.duration_days = 1;
  config.offers_per_session = 5;
  config.watch_probability = 1.0;
  auto schedule = GenerateSchedule(config);
  ASSERT_TRUE(schedule.ok());
  auto feed = SyntheticFeed(3, 0.0, 0);
  auto sim = SimulateBrowse(*schedule, feed, config, {FeedMode::kReplay, 1});
  ASSERT_TRUE(sim.ok());
  ASSERT_EQ(sim->watched.size(), 10u);
  for (size_t k = 0; k < 10; ++k) {
    EXPECT_EQ(sim->watched[k].post_id, feed[k % 3].post_id);
    EXPECT_EQ(sim->watched[k].session, k < 5 ? 0 : 1);
  }
  EXPECT_FALSE(SimulateBrowse(*schedule, {}, config, {}).ok());
}

TEST(WatchLogTest, RoundTrip) {
  std::vector<WatchEvent> events = {{"puppet-00", 0, 1, 3, 1704110400, "feed-1"}};
  auto back = ParseWatchLog(WatchLogToJsonl(events));
  ASSERT_TRUE(back.ok()) << back.status();
  EXPECT_EQ(WatchLogToJsonl(*back), WatchLogToJsonl(events));
  EXPECT_FALSE(ParseWatchLog("{\"account_id\":1}\n").ok());
}

TEST(ExposureTest, ProportionAndErrors) {
  std::vector<WatchEvent> events;
  for (int i = 0; i < 10; ++i) events.push_back({"a", 0, 0, i, 0, i < 3 ? "x" : "y"});
  auto e = ExposurePrevalence(events, {{"x", 1}, {"y", 0}}, {200, 0.95, 0});
  ASSERT_TRUE(e.ok());
  EXPECT_EQ(e->watched, 10);
  EXPECT_EQ(e->aes, 3);
  EXPECT_DOUBLE_EQ(e->proportion, 0.3);
  EXPECT_LE(e->ci.lower, 0.3);
  EXPECT_GE(e->ci.upper, 0.3);
  EXPECT_FALSE(ExposurePrevalence(events, {{"x", 1}}, {}).ok());
  EXPECT_FALSE(ExposurePrevalence({}, {}, {}).ok());
}

TEST(PoolTest, BundledPoolsParse) {
  EXPECT_FALSE(DefaultNewsPool().empty());
  EXPECT_FALSE(DefaultLifestylePool().empty());
  auto pool = ParsePool("author_id\tauthor_name\n@a\tA\n");
  ASSERT_TRUE(pool.ok());
  EXPECT_EQ((*pool)[0].topic, "");
  EXPECT_FALSE(ParsePool("handle\tname\n@a\tA\n").ok());
}

}  // namespace
}  // namespace aestk
