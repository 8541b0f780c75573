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

#ifndef AESTK_TABLE_IO_H_
#define AESTK_TABLE_IO_H_

#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace aestk {

absl::StatusOr<std::string> ReadFileToString(const std::string& path);

// Writes to a sibling temporary file and renames it over `path`, so readers
// never observe a partially written file.
absl::Status WriteFileAtomically(const std::string& path,
                                 std::string_view contents);

// Splits `contents` into lines, dropping a trailing '\r' on each and a final
// empty line.
std::vector<std::string_view> SplitLines(std::string_view contents);

// Splits on any of `delimiters`; empty pieces are dropped when `skip_empty`.
std::vector<std::string_view> SplitAny(std::string_view text,
                                       std::string_view delimiters,
                                       bool skip_empty = false);

// Tab-separated table with a header row.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of `column` in the header, or -1.
  int ColumnIndex(std::string_view column) const;
};

absl::StatusOr<Table> ParseTsv(std::string_view contents);
std::string FormatTsv(const Table& table);

// Exact text round-trip for doubles ("%a").
std::string HexDouble(double value);
absl::StatusOr<double> ParseHexDouble(std::string_view text);

}  // namespace aestk

#endif  // AESTK_TABLE_IO_H_
