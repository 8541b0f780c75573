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

#include "aestk/analyze.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "aestk/random.h"
#include "json.hpp"
#include "view.h"

namespace aestk {

using internal::Av;

namespace {

using json = nlohmann::json;

std::string Fmt(double v) { return absl::StrFormat("%.6f", v); }

std::string LabelName(int label) { return label == 1 ? "AES" : "Non-AES"; }

// Linear interpolation between order statistics of a sorted sample.
double Quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * (sorted.size() - 1);
  const size_t lo = static_cast<size_t>(std::floor(pos));
  const size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - lo) * (sorted[hi] - sorted[lo]);
}

std::vector<Category> CategoriesIn(const LabeledCorpus& corpus) {
  std::set<Category> present;
  for (const auto& p : corpus.posts) present.insert(p.post.category);
  return {present.begin(), present.end()};
}

}  // namespace

std::string_view LabelSourceName(LabelSource source) {
  return source == LabelSource::kHuman ? "human" : "model";
}

absl::StatusOr<LabeledCorpus> BuildLabeledCorpus(
    std::span<const Post> posts, const std::map<std::string, int>& human,
    const std::map<std::string, int>& model) {
  LabeledCorpus corpus;
  std::set<std::string_view> seen;
  for (const Post& post : posts) {
    if (!seen.insert(post.post_id).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("duplicate post ", post.post_id));
    }
    LabeledPost lp{post, 0, LabelSource::kHuman};
    if (auto it = human.find(post.post_id); it != human.end()) {
      lp.label = it->second;
    } else if (auto jt = model.find(post.post_id); jt != model.end()) {
      lp.label = jt->second;
      lp.source = LabelSource::kModel;
    } else {
      return absl::FailedPreconditionError(
          absl::StrCat("post ", post.post_id, " has no label"));
    }
    if (lp.label != 0 && lp.label != 1) {
      return absl::InvalidArgumentError(
          absl::StrCat("post ", post.post_id, " has non-binary label"));
    }
    corpus.posts.push_back(std::move(lp));
  }
  return corpus;
}

absl::StatusOr<std::map<std::string, int>> ParseLabelMap(std::string_view tsv) {
  auto table = ParseTsv(tsv);
  if (!table.ok()) return table.status();
  int id_col = table->ColumnIndex("item_id");
  if (id_col < 0) id_col = table->ColumnIndex("post_id");
  const int label_col = table->ColumnIndex("label");
  if (id_col < 0 || label_col < 0) {
    return absl::InvalidArgumentError(
        "label table needs an item_id or post_id column and a label column");
  }
  std::map<std::string, int> labels;
  for (size_t r = 0; r < table->rows.size(); ++r) {
    const auto& row = table->rows[r];
    const std::string& cell = row[label_col];
    if (cell.empty() || cell == "unclear") continue;
    int label;
    if (!absl::SimpleAtoi(cell, &label) || (label != 0 && label != 1)) {
      return absl::InvalidArgumentError(
          absl::StrCat("row ", r + 2, ": bad label '", cell, "'"));
    }
    if (!labels.emplace(row[id_col], label).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("row ", r + 2, ": duplicate id ", row[id_col]));
    }
  }
  return labels;
}

absl::StatusOr<Interval> BootstrapProportion(std::span<const int> outcomes,
                                             const BootstrapOptions& options) {
  if (outcomes.empty()) {
    return absl::InvalidArgumentError("bootstrap over an empty sample");
  }
  if (options.iterations < 1 || !(options.level > 0 && options.level < 1)) {
    return absl::InvalidArgumentError(
        "bootstrap needs iterations >= 1 and level in (0, 1)");
  }
  const size_t n = outcomes.size();
  int64_t positives = 0;
  for (int y : outcomes) positives += y;
  const double point = static_cast<double>(positives) / n;

  Rng rng(options.seed);
  std::vector<double> stats(options.iterations);
  for (double& s : stats) {
    int64_t hits = 0;
    for (size_t k = 0; k < n; ++k) hits += outcomes[rng.UniformInt(n)];
    s = static_cast<double>(hits) / n;
  }
  std::sort(stats.begin(), stats.end());
  const double alpha = 1.0 - options.level;
  Interval ci{Quantile(stats, alpha / 2), Quantile(stats, 1 - alpha / 2)};
  ci.lower = std::min(ci.lower, point);
  ci.upper = std::max(ci.upper, point);
  return ci;
}

absl::StatusOr<PrevalenceReport> PrevalenceByCategory(
    const LabeledCorpus& corpus, std::span<const Category> categories,
    const BootstrapOptions& options) {
  PrevalenceReport report;
  std::vector<int> pooled;
  for (Category c : categories) {
    std::vector<int> outcomes;
    for (const auto& p : corpus.posts) {
      if (p.post.category == c) outcomes.push_back(p.label);
    }
    if (outcomes.empty()) {
      report.warnings.push_back(absl::StrCat(
          "category ", Av(CategoryName(c)), " has no posts; omitted"));
      continue;
    }
    BootstrapOptions row_options = options;
    row_options.seed = SubstreamSeed(options.seed, CategoryIndex(c) + 1);
    auto ci = BootstrapProportion(outcomes, row_options);
    if (!ci.ok()) return ci.status();
    PrevalenceRow row;
    row.group = std::string(CategoryName(c));
    row.total = outcomes.size();
    for (int y : outcomes) row.positives += y;
    row.proportion = static_cast<double>(row.positives) / row.total;
    row.ci = *ci;
    report.rows.push_back(std::move(row));
    pooled.insert(pooled.end(), outcomes.begin(), outcomes.end());
  }
  if (pooled.empty()) {
    return absl::FailedPreconditionError("no posts in any reported category");
  }
  BootstrapOptions overall_options = options;
  overall_options.seed = SubstreamSeed(options.seed, 0);
  auto ci = BootstrapProportion(pooled, overall_options);
  if (!ci.ok()) return ci.status();
  PrevalenceRow overall;
  overall.group = std::string(kOverallGroup);
  overall.total = pooled.size();
  for (int y : pooled) overall.positives += y;
  overall.proportion = static_cast<double>(overall.positives) / overall.total;
  overall.ci = *ci;
  report.rows.push_back(std::move(overall));
  return report;
}

absl::StatusOr<PrevalenceReport> PrevalenceAcrossRuns(
    std::span<const LabeledCorpus> runs, std::span<const Category> categories,
    const BootstrapOptions& options) {
  if (runs.empty()) return absl::InvalidArgumentError("no runs supplied");
  auto report = PrevalenceByCategory(runs[0], categories, options);
  if (!report.ok()) return report.status();
  std::map<std::string, std::vector<double>> by_group;
  for (const LabeledCorpus& run : runs) {
    auto r = PrevalenceByCategory(run, categories, options);
    if (!r.ok()) return r.status();
    for (const auto& row : r->rows) by_group[row.group].push_back(row.proportion);
  }
  for (auto& row : report->rows) {
    const auto& values = by_group[row.group];
    if (values.size() != runs.size()) {
      return absl::FailedPreconditionError(
          absl::StrCat("group ", row.group, " missing from some runs"));
    }
    auto stats = MeanAndSe(values);
    if (!stats.ok()) return stats.status();
    row.run_stats = *stats;
    constexpr double kZ95 = 1.959963984540054;
    row.run_ci = Interval{std::max(0.0, stats->mean - kZ95 * stats->se),
                          std::min(1.0, stats->mean + kZ95 * stats->se)};
  }
  report->warnings.push_back(absl::StrCat(
      "run_ci: normal approximation over ", runs.size(), " model runs"));
  return report;
}

Table PrevalenceReport::ToTable() const {
  const bool runs = !rows.empty() && rows[0].run_stats.has_value();
  Table t{{"group", "posts", "aes", "proportion", "percent", "ci_lower",
           "ci_upper"},
          {}};
  if (runs) {
    for (const char* h : {"run_mean", "run_se", "run_ci_lower", "run_ci_upper"}) {
      t.header.push_back(h);
    }
  }
  for (const auto& r : rows) {
    std::vector<std::string> cells = {
        r.group, absl::StrCat(r.total), absl::StrCat(r.positives),
        Fmt(r.proportion), absl::StrFormat("%.1f", 100 * r.proportion),
        Fmt(r.ci.lower), Fmt(r.ci.upper)};
    if (runs) {
      cells.push_back(Fmt(r.run_stats->mean));
      cells.push_back(Fmt(r.run_stats->se));
      cells.push_back(Fmt(r.run_ci->lower));
      cells.push_back(Fmt(r.run_ci->upper));
    }
    t.rows.push_back(std::move(cells));
  }
  return t;
}

Table PrevalenceReport::ToLongTable() const {
  Table t{{"report", "group", "label", "metric", "value"}, {}};
  for (const auto& r : rows) {
    auto add = [&](std::string metric, double v) {
      t.rows.push_back({"prevalence", r.group, "AES", std::move(metric), Fmt(v)});
    };
    add("proportion", r.proportion);
    add("ci_lower", r.ci.lower);
    add("ci_upper", r.ci.upper);
    t.rows.push_back({"prevalence", r.group, "all", "posts",
                      absl::StrCat(r.total)});
    if (r.run_stats) {
      add("run_mean", r.run_stats->mean);
      add("run_se", r.run_stats->se);
    }
  }
  return t;
}

EngagementReport EngagementByLabel(const LabeledCorpus& corpus,
                                   const EngagementOptions& options) {
  EngagementReport report;
  for (Category c : CategoriesIn(corpus)) {
    for (int label : {0, 1}) {
      std::vector<double> comments, likes, shares, views;
      for (const auto& p : corpus.posts) {
        if (p.post.category != c || p.label != label) continue;
        comments.push_back(p.post.comment_count);
        likes.push_back(p.post.like_count);
        shares.push_back(p.post.share_count);
        views.push_back(p.post.view_count);
      }
      if (comments.empty()) continue;
      EngagementRow row;
      row.category = c;
      row.label = label;
      row.posts = comments.size();
      row.comments = *MeanAndSe(comments);
      row.likes = *MeanAndSe(likes);
      row.shares = *MeanAndSe(shares);
      if (options.include_views) row.views = *MeanAndSe(views);
      report.rows.push_back(row);
    }
  }
  if (!options.include_views) {
    report.notes.push_back(
        "views excluded: platform view counts are unreliable; pass "
        "--include-views to report them");
  }
  report.notes.push_back(
      "metrics reported: comments, likes, shares per post (mean, SE); views "
      "are optional because view counts and like counts are not reported "
      "consistently by the source platform");
  return report;
}

Table EngagementReport::ToTable() const {
  const bool views = !rows.empty() && rows[0].views.has_value();
  Table t{{"category", "label", "posts", "comments_mean", "comments_se",
           "likes_mean", "likes_se", "shares_mean", "shares_se"},
          {}};
  if (views) {
    t.header.push_back("views_mean");
    t.header.push_back("views_se");
  }
  for (const auto& r : rows) {
    std::vector<std::string> cells = {
        std::string(CategoryName(r.category)), LabelName(r.label),
        absl::StrCat(r.posts), Fmt(r.comments.mean), Fmt(r.comments.se),
        Fmt(r.likes.mean), Fmt(r.likes.se), Fmt(r.shares.mean),
        Fmt(r.shares.se)};
    if (views) {
      cells.push_back(Fmt(r.views->mean));
      cells.push_back(Fmt(r.views->se));
    }
    t.rows.push_back(std::move(cells));
  }
  return t;
}

Table EngagementReport::ToLongTable() const {
  Table t{{"report", "group", "label", "metric", "value"}, {}};
  for (const auto& r : rows) {
    const std::string group(CategoryName(r.category));
    auto add = [&](std::string_view name, const MeanSe& m) {
      t.rows.push_back({"engagement", group, LabelName(r.label),
                        absl::StrCat(Av(name), "_mean"), Fmt(m.mean)});
      t.rows.push_back({"engagement", group, LabelName(r.label),
                        absl::StrCat(Av(name), "_se"), Fmt(m.se)});
    };
    add("comments", r.comments);
    add("likes", r.likes);
    add("shares", r.shares);
    if (r.views) add("views", *r.views);
  }
  return t;
}

double AgreementRow::share(CommentAgreement a) const {
  const int64_t n = total();
  if (n == 0) return 0.0;
  const int64_t k = a == CommentAgreement::kAgree      ? agree
                    : a == CommentAgreement::kDisagree ? disagree
                                                       : unclear;
  return static_cast<double>(k) / n;
}

absl::StatusOr<AgreementReport> AgreementDistribution(
    std::span<const FusedComment> comments, const LabeledCorpus& corpus) {
  std::map<std::string_view, const LabeledPost*> by_id;
  for (const auto& p : corpus.posts) by_id[p.post.post_id] = &p;
  std::map<std::pair<Category, int>, AgreementRow> groups;
  for (const FusedComment& c : comments) {
    auto it = by_id.find(c.post_id);
    if (it == by_id.end()) {
      return absl::FailedPreconditionError(absl::StrCat(
          "comment ", c.comment_id, " links to unlabeled post ", c.post_id));
    }
    const LabeledPost& p = *it->second;
    AgreementRow& row = groups[{p.post.category, p.label}];
    row.category = p.post.category;
    row.label = p.label;
    switch (c.agreement) {
      case CommentAgreement::kAgree: ++row.agree; break;
      case CommentAgreement::kDisagree: ++row.disagree; break;
      case CommentAgreement::kUnclear: ++row.unclear; break;
    }
  }
  AgreementReport report;
  for (auto& [key, row] : groups) report.rows.push_back(row);
  return report;
}

Table AgreementReport::ToTable() const {
  Table t{{"category", "label", "comments", "agree", "disagree", "unclear",
           "agree_share", "disagree_share", "unclear_share"},
          {}};
  for (const auto& r : rows) {
    t.rows.push_back({std::string(CategoryName(r.category)), LabelName(r.label),
                      absl::StrCat(r.total()), absl::StrCat(r.agree),
                      absl::StrCat(r.disagree), absl::StrCat(r.unclear),
                      Fmt(r.share(CommentAgreement::kAgree)),
                      Fmt(r.share(CommentAgreement::kDisagree)),
                      Fmt(r.share(CommentAgreement::kUnclear))});
  }
  return t;
}

Table AgreementReport::ToLongTable() const {
  Table t{{"report", "group", "label", "metric", "value"}, {}};
  for (const auto& r : rows) {
    for (CommentAgreement a : {CommentAgreement::kAgree,
                               CommentAgreement::kDisagree,
                               CommentAgreement::kUnclear}) {
      t.rows.push_back({"agreement", std::string(CategoryName(r.category)),
                        LabelName(r.label),
                        std::string(CommentAgreementName(a)),
                        Fmt(r.share(a))});
    }
  }
  return t;
}

absl::StatusOr<std::vector<FusedComment>> ParseFusedComments(
    std::string_view tsv) {
  auto table = ParseTsv(tsv);
  if (!table.ok()) return table.status();
  const int id = table->ColumnIndex("comment_id");
  const int post = table->ColumnIndex("post_id");
  const int agreement = table->ColumnIndex("agreement");
  if (id < 0 || post < 0 || agreement < 0) {
    return absl::InvalidArgumentError(
        "fused comment table needs comment_id, post_id, agreement columns");
  }
  std::vector<FusedComment> out;
  for (size_t r = 0; r < table->rows.size(); ++r) {
    const auto& row = table->rows[r];
    FusedComment c{row[id], row[post], CommentAgreement::kUnclear};
    const std::string& a = row[agreement];
    if (a == "agree") {
      c.agreement = CommentAgreement::kAgree;
    } else if (a == "disagree") {
      c.agreement = CommentAgreement::kDisagree;
    } else if (a != "unclear") {
      return absl::InvalidArgumentError(
          absl::StrCat("row ", r + 2, ": bad agreement '", a, "'"));
    }
    out.push_back(std::move(c));
  }
  return out;
}

absl::Status ValidateCodebook(const Codebook& codebook) {
  if (codebook.codes.empty()) {
    return absl::InvalidArgumentError(
        absl::StrCat("codebook ", codebook.name, " has no codes"));
  }
  std::set<std::string_view> ids;
  for (const Code& c : codebook.codes) {
    if (c.id.empty()) {
      return absl::InvalidArgumentError(
          absl::StrCat("codebook ", codebook.name, " has an empty code id"));
    }
    if (!ids.insert(c.id).second) {
      return absl::InvalidArgumentError(absl::StrCat(
          "codebook ", codebook.name, " repeats code ", c.id));
    }
  }
  return absl::OkStatus();
}

Codebook InstitutionsCodebook() {
  return {"institutions",
          {{"us_government", "Federal government portrayed as untrustworthy"},
           {"politicians", "Elected officials portrayed as corrupt or "
                           "dishonest"},
           {"us_healthcare", "Healthcare system portrayed as fundamentally "
                             "broken"},
           {"big_pharma", "Drug makers portrayed as acting against patients"},
           {"big_banks", "Banks and lenders portrayed as rigged against "
                         "customers"},
           {"nasa", "Space agency portrayed as deceiving the public"}},
          /*multi_select=*/true};
}

Codebook VisualStyleCodebook() {
  return {"visual_style",
          {{"direct_to_camera", "A person talks while facing the camera"},
           {"speaking_off_camera", "A person talks without addressing the "
                                   "camera"},
           {"embedded_media", "Clips, screenshots or footage from elsewhere"},
           {"text_with_music", "On-screen text over a music track"},
           {"other", "Any other format"}},
          /*multi_select=*/false};
}

absl::StatusOr<Codebook> ParseCodebook(std::string_view text) {
  json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) {
    return absl::InvalidArgumentError("codebook is not a JSON object");
  }
  Codebook book;
  try {
    book.name = j.at("name").get<std::string>();
    book.multi_select = j.value("multi_select", false);
    for (const auto& c : j.at("codes")) {
      book.codes.push_back({c.at("id").get<std::string>(),
                            c.value("description", std::string())});
    }
  } catch (const json::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("codebook: ", e.what()));
  }
  absl::Status status = ValidateCodebook(book);
  if (!status.ok()) return status;
  return book;
}

absl::StatusOr<std::vector<CodedPost>> ParseCodedPosts(std::string_view tsv) {
  auto table = ParseTsv(tsv);
  if (!table.ok()) return table.status();
  const int id = table->ColumnIndex("post_id");
  const int cat = table->ColumnIndex("category");
  const int codes = table->ColumnIndex("codes");
  if (id < 0 || cat < 0 || codes < 0) {
    return absl::InvalidArgumentError(
        "coded post table needs post_id, category, codes columns");
  }
  std::vector<CodedPost> out;
  for (const auto& row : table->rows) {
    auto category = ParseCategory(row[cat]);
    if (!category.ok()) return category.status();
    CodedPost p{row[id], *category, {}};
    for (std::string_view code : SplitAny(row[codes], ";", true)) {
      p.codes.emplace_back(code);
    }
    out.push_back(std::move(p));
  }
  return out;
}

absl::StatusOr<CodebookTable> CodebookTabulate(std::span<const CodedPost> posts,
                                               const Codebook& codebook) {
  absl::Status status = ValidateCodebook(codebook);
  if (!status.ok()) return status;
  std::map<std::string_view, size_t> code_row;
  for (size_t i = 0; i < codebook.codes.size(); ++i) {
    code_row[codebook.codes[i].id] = i;
  }
  std::set<Category> present;
  for (const auto& p : posts) present.insert(p.category);

  CodebookTable table;
  table.codebook = codebook.name;
  table.categories.assign(present.begin(), present.end());
  for (const Code& c : codebook.codes) table.code_ids.push_back(c.id);
  table.posts.assign(table.categories.size(), 0);
  std::vector<std::vector<int64_t>> counts(
      codebook.codes.size(), std::vector<int64_t>(table.categories.size(), 0));

  for (const CodedPost& p : posts) {
    if (!codebook.multi_select && p.codes.size() != 1) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "post %s has %d codes; codebook %s takes exactly one", p.post_id,
          p.codes.size(), codebook.name));
    }
    const size_t col =
        std::find(table.categories.begin(), table.categories.end(),
                  p.category) -
        table.categories.begin();
    ++table.posts[col];
    std::set<std::string_view> seen;
    for (const std::string& code : p.codes) {
      auto it = code_row.find(code);
      if (it == code_row.end()) {
        return absl::InvalidArgumentError(absl::StrCat(
            "post ", p.post_id, ": unknown code '", code, "' in codebook ",
            codebook.name));
      }
      if (!seen.insert(code).second) {
        return absl::InvalidArgumentError(
            absl::StrCat("post ", p.post_id, " repeats code ", code));
      }
      ++counts[it->second][col];
    }
  }
  table.proportions.assign(codebook.codes.size(),
                           std::vector<double>(table.categories.size(), 0.0));
  for (size_t i = 0; i < counts.size(); ++i) {
    for (size_t j = 0; j < table.categories.size(); ++j) {
      table.proportions[i][j] =
          static_cast<double>(counts[i][j]) / table.posts[j];
    }
  }
  return table;
}

Table CodebookTable::ToTable() const {
  Table t{{"code"}, {}};
  for (Category c : categories) t.header.emplace_back(CategoryName(c));
  for (size_t i = 0; i < code_ids.size(); ++i) {
    std::vector<std::string> cells = {code_ids[i]};
    for (double v : proportions[i]) cells.push_back(Fmt(v));
    t.rows.push_back(std::move(cells));
  }
  std::vector<std::string> n = {"posts"};
  for (int64_t v : posts) n.push_back(absl::StrCat(v));
  t.rows.push_back(std::move(n));
  return t;
}

Table CodebookTable::ToLongTable() const {
  Table t{{"report", "group", "label", "metric", "value"}, {}};
  for (size_t i = 0; i < code_ids.size(); ++i) {
    for (size_t j = 0; j < categories.size(); ++j) {
      t.rows.push_back({absl::StrCat("codebook:", codebook),
                        std::string(CategoryName(categories[j])), "all",
                        code_ids[i], Fmt(proportions[i][j])});
    }
  }
  return t;
}

absl::StatusOr<CrossPlatformReport> CrossPlatform(
    std::span<const PlatformCorpus> platforms,
    std::span<const Category> categories) {
  if (platforms.empty()) {
    return absl::InvalidArgumentError("no platform corpora supplied");
  }
  CrossPlatformReport report;
  report.categories.assign(categories.begin(), categories.end());
  for (const PlatformCorpus& pc : platforms) {
    report.platforms.push_back(pc.platform);
    std::vector<std::optional<double>> prev;
    for (Category c : categories) {
      int64_t total = 0;
      int64_t positives = 0;
      for (const auto& p : pc.corpus.posts) {
        if (p.post.category != c) continue;
        ++total;
        positives += p.label;
      }
      if (total == 0) {
        report.warnings.push_back(absl::StrCat(
            pc.platform, ": no ", Av(CategoryName(c)), " posts"));
        prev.push_back(std::nullopt);
      } else {
        prev.push_back(static_cast<double>(positives) / total);
      }
    }
    std::vector<std::optional<int>> rank(prev.size());
    for (size_t i = 0; i < prev.size(); ++i) {
      if (!prev[i]) continue;
      int r = 1;
      for (size_t k = 0; k < prev.size(); ++k) {
        if (prev[k] && *prev[k] > *prev[i]) ++r;
      }
      rank[i] = r;
    }
    report.prevalence.push_back(std::move(prev));
    report.rank.push_back(std::move(rank));
  }
  for (size_t j = 0; j < categories.size(); ++j) {
    bool consistent = true;
    for (size_t i = 0; i < report.platforms.size(); ++i) {
      if (!report.rank[i][j] || report.rank[i][j] != report.rank[0][j]) {
        consistent = false;
      }
    }
    report.rank_consistent.push_back(consistent);
  }
  return report;
}

bool CrossPlatformReport::all_rank_consistent() const {
  return std::all_of(rank_consistent.begin(), rank_consistent.end(),
                     [](bool b) { return b; });
}

Table CrossPlatformReport::ToTable() const {
  Table t{{"category"}, {}};
  for (const auto& p : platforms) {
    t.header.push_back(absl::StrCat(p, "_prevalence"));
    t.header.push_back(absl::StrCat(p, "_rank"));
  }
  t.header.push_back("rank_consistent");
  for (size_t j = 0; j < categories.size(); ++j) {
    std::vector<std::string> cells = {std::string(CategoryName(categories[j]))};
    for (size_t i = 0; i < platforms.size(); ++i) {
      cells.push_back(prevalence[i][j] ? Fmt(*prevalence[i][j]) : "N/A");
      cells.push_back(rank[i][j] ? absl::StrCat(*rank[i][j]) : "N/A");
    }
    cells.push_back(rank_consistent[j] ? "true" : "false");
    t.rows.push_back(std::move(cells));
  }
  return t;
}

Table CrossPlatformReport::ToLongTable() const {
  Table t{{"report", "group", "label", "metric", "value"}, {}};
  for (size_t i = 0; i < platforms.size(); ++i) {
    for (size_t j = 0; j < categories.size(); ++j) {
      if (!prevalence[i][j]) continue;
      t.rows.push_back({"cross_platform",
                        std::string(CategoryName(categories[j])), platforms[i],
                        "prevalence", Fmt(*prevalence[i][j])});
    }
  }
  return t;
}

std::string TableWithFooter(const Table& table,
                            std::span<const std::string> footer) {
  std::string out = FormatTsv(table);
  for (const std::string& line : footer) absl::StrAppend(&out, "# ", line, "\n");
  return out;
}

}  // namespace aestk
