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


#include "aestk/table_io.h"

#include <cmath>
#include <filesystem>
#include <limits>
#include <string>

#include "gtest/gtest.h"

namespace aestk {
namespace {

TEST(SplitLinesTest, DropsCarriageReturnsAndFinalEmptyLine) {
  auto lines = SplitLines("a\r\nb\n\nc\n");
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[0], "a");
  EXPECT_EQ(lines[1], "b");
  EXPECT_EQ(lines[2], "");
  EXPECT_EQ(lines[3], "c");
  EXPECT_TRUE(SplitLines("").empty());
}

TEST(SplitAnyTest, SkipEmpty) {
  EXPECT_EQ(SplitAny("a,,b;c", ",;").size(), 4u);
  EXPECT_EQ(SplitAny("a,,b;c", ",;", /*skip_empty=*/true).size(), 3u);
}

TEST(TsvTest, RoundTrip) {
  Table t;
  t.header = {"id", "value"};
  t.rows = {{"x", "1"}, {"y", ""}};
  const std::string text = FormatTsv(t);
  EXPECT_EQ(text, "id\tvalue\nx\t1\ny\t\n");
  auto parsed = ParseTsv(text);
  ASSERT_TRUE(parsed.ok()) << parsed.status();
  EXPECT_EQ(parsed->header, t.header);
  EXPECT_EQ(parsed->rows, t.rows);
  EXPECT_EQ(parsed->ColumnIndex("value"), 1);
  EXPECT_EQ(parsed->ColumnIndex("missing"), -1);
}

TEST(TsvTest, RaggedRowIsAnError) {
  EXPECT_FALSE(ParseTsv("a\tb\n1\n").ok());
  EXPECT_FALSE(ParseTsv("").ok());
}

TEST(HexDoubleTest, ExactRoundTrip) {
  for (double v : {0.0, -0.0, 1.0 / 3.0, 1e-310, 6.02214076e23,
                   std::numeric_limits<double>::max()}) {
    auto back = ParseHexDouble(HexDouble(v));
    ASSERT_TRUE(back.ok()) << back.status();
    EXPECT_EQ(std::signbit(*back), std::signbit(v));
    EXPECT_EQ(*back, v);
  }
  EXPECT_FALSE(ParseHexDouble("0x1.8p+1junk").ok());
  EXPECT_FALSE(ParseHexDouble("").ok());
}

TEST(FileTest, AtomicWriteThenRead) {
  const std::string path =
      (std::filesystem::path(::testing::TempDir()) / "table_io_atomic.txt").string();
  ASSERT_TRUE(WriteFileAtomically(path, "first").ok());
  ASSERT_TRUE(WriteFileAtomically(path, "second\n").ok());
  auto read = ReadFileToString(path);
  ASSERT_TRUE(read.ok());
  EXPECT_EQ(*read, "second\n");
  EXPECT_FALSE(ReadFileToString(path + ".does-not-exist").ok());
}

}  // namespace
}  // namespace aestk
