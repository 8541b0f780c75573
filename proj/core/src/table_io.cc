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

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"

namespace aestk {

absl::StatusOr<std::string> ReadFileToString(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    return absl::NotFoundError(absl::StrCat("cannot open ", path));
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

absl::Status WriteFileAtomically(const std::string& path,
                                 std::string_view contents) {
  const std::string tmp = absl::StrCat(path, ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      return absl::UnavailableError(absl::StrCat("cannot write ", tmp));
    }
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      return absl::DataLossError(absl::StrCat("short write to ", tmp));
    }
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    return absl::UnavailableError(
        absl::StrCat("rename ", tmp, " -> ", path, " failed: errno ", errno));
  }
  return absl::OkStatus();
}

std::vector<std::string_view> SplitAny(std::string_view text,
                                       std::string_view delimiters,
                                       bool skip_empty) {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (true) {
    const size_t end = text.find_first_of(delimiters, start);
    std::string_view piece = text.substr(start, end - start);
    if (!skip_empty || !piece.empty()) out.push_back(piece);
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

std::vector<std::string_view> SplitLines(std::string_view contents) {
  std::vector<std::string_view> lines = SplitAny(contents, "\n");
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  for (auto& line : lines) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  }
  return lines;
}

int Table::ColumnIndex(std::string_view column) const {
  for (size_t i = 0; i < header.size(); ++i) {
    if (header[i] == column) return static_cast<int>(i);
  }
  return -1;
}

absl::StatusOr<Table> ParseTsv(std::string_view contents) {
  Table table;
  std::vector<std::string_view> lines = SplitLines(contents);
  if (lines.empty()) return absl::InvalidArgumentError("empty table");
  for (std::string_view cell : SplitAny(lines[0], "\t")) {
    table.header.emplace_back(cell);
  }
  for (size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    std::vector<std::string> row;
    for (std::string_view cell : SplitAny(lines[i], "\t")) row.emplace_back(cell);
    if (row.size() != table.header.size()) {
      return absl::InvalidArgumentError(
          absl::StrFormat("line %d: expected %d columns, got %d", i + 1,
                          table.header.size(), row.size()));
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string FormatTsv(const Table& table) {
  std::string out = absl::StrJoin(table.header, "\t");
  out.push_back('\n');
  for (const auto& row : table.rows) {
    absl::StrAppend(&out, absl::StrJoin(row, "\t"), "\n");
  }
  return out;
}

std::string HexDouble(double value) { return absl::StrFormat("%a", value); }

absl::StatusOr<double> ParseHexDouble(std::string_view text) {
  std::string owned(text);
  char* end = nullptr;
  errno = 0;
  double value = std::strtod(owned.c_str(), &end);
  if (end == owned.c_str() || *end != '\0' || errno == ERANGE) {
    return absl::InvalidArgumentError(
        absl::StrCat("not a number: '", owned, "'"));
  }
  return value;
}

}  // namespace aestk
