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

#include "aestk/lexicon.h"

#include <algorithm>
#include <set>

#include "absl/strings/ascii.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "aestk/corpus.h"
#include "embedded_data.h"
#include "json.hpp"
#include "view.h"

namespace aestk {

using internal::Av;
using internal::Sv;

namespace {

using json = nlohmann::json;

absl::Status ValidatePattern(std::string_view category,
                             std::string_view pattern) {
  auto bad = [&](std::string_view why) {
    return absl::InvalidArgumentError(absl::StrCat(
        "category ", Av(category), ": pattern '", Av(pattern), "' ", Av(why)));
  };
  if (pattern.empty() || pattern == "*") return bad("is empty");
  const size_t star = pattern.find('*');
  if (star != std::string_view::npos && star + 1 != pattern.size()) {
    return bad("has '*' before its end");
  }
  for (char c : pattern) {
    if (absl::ascii_isupper(static_cast<unsigned char>(c))) {
      return bad("is not lowercase");
    }
    if (absl::ascii_isspace(static_cast<unsigned char>(c))) {
      return bad("contains whitespace");
    }
  }
  return absl::OkStatus();
}

}  // namespace

absl::StatusOr<Lexicon> Lexicon::FromCategories(
    std::vector<std::pair<std::string, std::vector<std::string>>> categories) {
  Lexicon lex;
  std::set<std::string> seen;
  std::map<std::string, std::vector<size_t>> prefix_map;
  for (auto& [name, patterns] : categories) {
    if (name.empty()) return absl::InvalidArgumentError("empty category name");
    if (!seen.insert(name).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("category ", name, " declared twice"));
    }
    const size_t index = lex.names_.size();
    for (const std::string& p : patterns) {
      absl::Status status = ValidatePattern(name, p);
      if (!status.ok()) return status;
      auto& bucket = p.back() == '*'
                         ? prefix_map[p.substr(0, p.size() - 1)]
                         : lex.literals_[p];
      if (std::find(bucket.begin(), bucket.end(), index) == bucket.end()) {
        bucket.push_back(index);
      }
    }
    lex.names_.push_back(name);
    lex.patterns_.push_back(std::move(patterns));
  }
  for (auto& [prefix, cats] : prefix_map) {
    for (size_t c : cats) lex.prefixes_.emplace_back(prefix, c);
  }
  return lex;
}

absl::StatusOr<Lexicon> Lexicon::Parse(std::string_view text) {
  std::vector<std::pair<std::string, std::vector<std::string>>> categories;
  std::vector<std::string_view> lines = SplitLines(text);
  for (size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = Sv(absl::StripAsciiWhitespace(Av(lines[i])));
    if (line.empty() || line.front() == '#') continue;
    if (line.front() == '%') {
      categories.emplace_back(
          std::string(Sv(absl::StripAsciiWhitespace(Av(line.substr(1))))),
          std::vector<std::string>());
      continue;
    }
    if (categories.empty()) {
      return absl::InvalidArgumentError(absl::StrCat(
          "lexicon line ", i + 1, ": pattern before any %category header"));
    }
    categories.back().second.emplace_back(line);
  }
  auto lex = FromCategories(std::move(categories));
  if (!lex.ok()) {
    return absl::InvalidArgumentError(
        absl::StrCat("lexicon: ", lex.status().message()));
  }
  return lex;
}

absl::StatusOr<Lexicon> Lexicon::Load(const std::string& path) {
  auto text = ReadFileToString(path);
  if (!text.ok()) return text.status();
  return Parse(*text);
}

std::vector<size_t> Lexicon::Match(std::string_view token) const {
  std::vector<size_t> out;
  if (auto it = literals_.find(token); it != literals_.end()) out = it->second;
  // prefixes_ is sorted by prefix, so every prefix of `token` is found by
  // walking its candidate lengths.
  for (size_t len = 0; len <= token.size(); ++len) {
    std::string_view head = token.substr(0, len);
    auto it = std::lower_bound(
        prefixes_.begin(), prefixes_.end(), head,
        [](const auto& entry, std::string_view key) { return entry.first < key; });
    for (; it != prefixes_.end() && it->first == head; ++it) {
      out.push_back(it->second);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string Lexicon::ToText() const {
  std::string out;
  for (size_t c = 0; c < names_.size(); ++c) {
    absl::StrAppend(&out, "%", names_[c], "\n");
    for (const auto& p : patterns_[c]) absl::StrAppend(&out, p, "\n");
  }
  return out;
}

Lexicon StarterLexicon() { return *Lexicon::Parse(embedded::kStarterLexicon); }

absl::StatusOr<LexiconScore> ScoreDocument(std::string_view post_id,
                                           std::string_view text,
                                           const Lexicon& lexicon) {
  std::vector<std::string> tokens = Tokenize(text);
  if (tokens.empty()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "document ", Av(post_id), " has no tokens; proportions undefined"));
  }
  std::vector<int64_t> hits(lexicon.categories().size(), 0);
  for (const std::string& t : tokens) {
    for (size_t c : lexicon.Match(t)) ++hits[c];
  }
  LexiconScore score;
  score.post_id = std::string(post_id);
  score.total_tokens = static_cast<int>(tokens.size());
  for (int64_t h : hits) {
    score.percentages.push_back(100.0 * static_cast<double>(h) /
                                static_cast<double>(tokens.size()));
  }
  return score;
}

absl::StatusOr<std::vector<Composite>> ParseComposites(std::string_view text) {
  json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_array()) {
    return absl::InvalidArgumentError("composites must be a JSON array");
  }
  std::vector<Composite> out;
  try {
    for (const auto& item : j) {
      Composite c;
      c.name = item.at("name").get<std::string>();
      c.intercept = item.value("intercept", 0.0);
      for (const auto& [k, v] : item.at("weights").items()) {
        c.weights[k] = v.get<double>();
      }
      out.push_back(std::move(c));
    }
  } catch (const json::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("composites: ", e.what()));
  }
  return out;
}

absl::StatusOr<std::vector<double>> ApplyComposites(
    const LexiconScore& score, const Lexicon& lexicon,
    std::span<const Composite> composites) {
  const auto& names = lexicon.categories();
  std::vector<double> out;
  for (const Composite& c : composites) {
    double v = c.intercept;
    for (const auto& [category, weight] : c.weights) {
      auto it = std::find(names.begin(), names.end(), category);
      if (it == names.end()) {
        return absl::InvalidArgumentError(absl::StrCat(
            "composite ", c.name, " uses unknown category ", category));
      }
      v += weight * score.percentages[it - names.begin()];
    }
    out.push_back(v);
  }
  return out;
}

std::vector<VariableLayout> StarterLayout() {
  return {{"authenticity", "authenticity", "persuasive_tone"},
          {"i", "authenticity", "in_out_group"},
          {"we", "authenticity", "in_out_group"},
          {"they", "authenticity", "in_out_group"},
          {"clout", "authority", "relevance"},
          {"power", "authority", "relevance"},
          {"male", "authority", "gender"},
          {"female", "authority", "gender"},
          {"religion", "morality", "relevance"},
          {"death", "morality", "relevance"}};
}

absl::StatusOr<GroupStatsReport> GroupStats(
    std::span<const std::string> variables,
    std::span<const std::vector<double>> values, std::span<const int> labels,
    std::span<const VariableLayout> layout) {
  if (values.size() != labels.size()) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "%d score rows but %d labels", values.size(), labels.size()));
  }
  for (size_t i = 0; i < values.size(); ++i) {
    if (values[i].size() != variables.size()) {
      return absl::InvalidArgumentError(
          absl::StrFormat("score row %d has %d values, expected %d", i,
                          values[i].size(), variables.size()));
    }
    if (labels[i] != 0 && labels[i] != 1) {
      return absl::InvalidArgumentError(
          absl::StrFormat("score row %d has non-binary label", i));
    }
  }
  // Report order: layout entries that exist, then the remaining variables.
  std::vector<std::pair<size_t, VariableLayout>> order;
  std::vector<bool> placed(variables.size(), false);
  for (const VariableLayout& l : layout) {
    auto it = std::find(variables.begin(), variables.end(), l.variable);
    if (it == variables.end()) continue;
    const size_t v = it - variables.begin();
    if (placed[v]) continue;
    placed[v] = true;
    order.emplace_back(v, l);
  }
  for (size_t v = 0; v < variables.size(); ++v) {
    if (!placed[v]) order.push_back({v, {variables[v], "other", "other"}});
  }

  GroupStatsReport report;
  for (const auto& [v, l] : order) {
    for (int label : {0, 1}) {
      std::vector<double> xs;
      for (size_t i = 0; i < values.size(); ++i) {
        if (labels[i] == label) xs.push_back(values[i][v]);
      }
      if (xs.empty()) {
        report.warnings.push_back(absl::StrCat(
            "no ", label == 1 ? "AES" : "Non-AES", " posts for ", l.variable,
            "; row omitted"));
        continue;
      }
      report.rows.push_back({l.theme, l.factor, l.variable, label,
                             static_cast<int64_t>(xs.size()),
                             *MeanAndSe(xs)});
    }
  }
  return report;
}

Table GroupStatsReport::ToTable() const {
  Table t{{"theme", "factor", "variable", "label", "n", "mean", "se"}, {}};
  for (const auto& r : rows) {
    t.rows.push_back({r.theme, r.factor, r.variable,
                      r.label == 1 ? "AES" : "Non-AES", absl::StrCat(r.n),
                      absl::StrFormat("%.6f", r.stats.mean),
                      absl::StrFormat("%.6f", r.stats.se)});
  }
  return t;
}

}  // namespace aestk
