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

// aestk: command-line front end for the corpus, annotation, fusion,
// classification, analysis, lexicon, feed-audit and server modules.

#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "aestk/analyze.h"
#include "aestk/annotation.h"
#include "aestk/classify.h"
#include "aestk/corpus.h"
#include "aestk/fuse.h"
#include "aestk/fypsim.h"
#include "aestk/lexicon.h"
#include "aestk/metrics.h"
#include "aestk/server.h"
#include "aestk/table_io.h"
#include "json.hpp"

namespace aestk::cli {
namespace {

using json = nlohmann::json;

// Propagates a non-OK status out of the enclosing function.
#define AESTK_RETURN_IF_ERROR(expr)          \
  do {                                       \
    absl::Status _st = (expr);               \
    if (!_st.ok()) return _st;               \
  } while (0)

#define AESTK_ASSIGN_OR_RETURN(lhs, expr)    \
  auto lhs##_or = (expr);                    \
  if (!lhs##_or.ok()) return lhs##_or.status(); \
  auto lhs = *std::move(lhs##_or)

absl::Status WriteOutput(const std::string& path, std::string_view text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return absl::OkStatus();
  }
  return WriteFileAtomically(path, text);
}

void PrintWarnings(const std::vector<std::string>& warnings) {
  for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
}

absl::StatusOr<std::vector<Category>> ParseCategories(const std::string& list) {
  std::vector<Category> out;
  for (std::string_view name : SplitAny(list, ",", /*skip_empty=*/true)) {
    auto c = ParseCategory(name);
    if (!c.ok()) return c.status();
    out.push_back(*c);
  }
  if (out.empty()) return absl::InvalidArgumentError("no categories given");
  return out;
}

absl::StatusOr<std::map<std::string, int>> LoadLabelMap(const std::string& path) {
  AESTK_ASSIGN_OR_RETURN(text, ReadFileToString(path));
  return ParseLabelMap(text);
}

absl::StatusOr<std::vector<double>> ParseDoubleList(const std::string& list) {
  std::vector<double> out;
  for (std::string_view part : SplitAny(list, ",", true)) {
    double v;
    if (!absl::SimpleAtod(std::string(part), &v)) {
      return absl::InvalidArgumentError(
          absl::StrCat("not a number: ", std::string(part)));
    }
    out.push_back(v);
  }
  return out;
}

// ---------------------------------------------------------------------------
// ingest / filter

struct CorpusArgs {
  std::string posts;
  std::string comments;
};

void AddCorpusArgs(CLI::App* app, CorpusArgs* args) {
  app->add_option("--posts", args->posts, "Post records (JSONL)")->required();
  app->add_option("--comments", args->comments, "Comment records (JSONL)");
}

struct IngestArgs {
  CorpusArgs corpus;
  std::string out_posts;
  std::string out_comments;
};

absl::Status RunIngest(const IngestArgs& a) {
  AESTK_ASSIGN_OR_RETURN(corpus, LoadCorpus(a.corpus.posts, a.corpus.comments));
  std::map<Category, int> per_category;
  for (const Post& p : corpus.posts) ++per_category[p.category];
  std::cout << "posts\t" << corpus.posts.size() << "\n";
  for (const auto& [c, n] : per_category) {
    std::cout << "posts." << CategoryName(c) << "\t" << n << "\n";
  }
  std::cout << "comments\t" << corpus.comments.size() << "\n";
  if (!a.out_posts.empty()) {
    AESTK_RETURN_IF_ERROR(WriteOutput(a.out_posts, PostsToJsonl(corpus.posts)));
  }
  if (!a.out_comments.empty()) {
    AESTK_RETURN_IF_ERROR(
        WriteOutput(a.out_comments, CommentsToJsonl(corpus.comments)));
  }
  return absl::OkStatus();
}

struct FilterArgs {
  CorpusArgs corpus;
  int min_tokens = 40;
  std::string lang = "en";
  bool require_keywords = false;
  int comment_min_tokens = 10;
  std::string report;
  std::string out_posts;
  std::string out_comments;
};

absl::Status RunFilter(const FilterArgs& a) {
  AESTK_ASSIGN_OR_RETURN(corpus, LoadCorpus(a.corpus.posts, a.corpus.comments));
  FunnelOptions options;
  options.min_tokens = a.min_tokens;
  options.language = a.lang;
  options.require_keywords = a.require_keywords;
  AESTK_ASSIGN_OR_RETURN(result, FilterFunnel(corpus, options));
  AESTK_RETURN_IF_ERROR(WriteOutput(a.report, result.report.ToTsv()));
  if (!a.out_posts.empty()) {
    AESTK_RETURN_IF_ERROR(
        WriteOutput(a.out_posts, PostsToJsonl(result.corpus.posts)));
  }
  if (!a.out_comments.empty()) {
    // Comments are filtered on their own length, independent of the funnel.
    std::vector<Comment> kept =
        FilterCommentsByTokens(corpus.comments, a.comment_min_tokens);
    AESTK_RETURN_IF_ERROR(WriteOutput(a.out_comments, CommentsToJsonl(kept)));
  }
  return absl::OkStatus();
}

// ---------------------------------------------------------------------------
// assign

struct AssignArgs {
  std::string pairs;
  std::string annotators;
  int redundancy = kDefaultRedundancy;
  uint64_t seed = 0;
  std::string out;
};

absl::StatusOr<std::vector<Annotator>> LoadAnnotators(const std::string& path) {
  AESTK_ASSIGN_OR_RETURN(text, ReadFileToString(path));
  AESTK_ASSIGN_OR_RETURN(table, ParseTsv(text));
  const int id = table.ColumnIndex("annotator_id");
  const int training = table.ColumnIndex("training_score");
  const int pretask = table.ColumnIndex("pretask_score");
  if (id < 0 || training < 0 || pretask < 0) {
    return absl::InvalidArgumentError(
        "annotator table needs annotator_id, training_score, pretask_score");
  }
  std::vector<Annotator> out;
  for (const auto& row : table.rows) {
    Annotator a;
    a.annotator_id = row[id];
    if (!absl::SimpleAtod(row[training], &a.training_score) ||
        !absl::SimpleAtod(row[pretask], &a.pretask_score)) {
      return absl::InvalidArgumentError(
          absl::StrCat("bad score for annotator ", row[id]));
    }
    out.push_back(std::move(a));
  }
  return out;
}

std::string_view SlotKindName(SlotKind kind) {
  switch (kind) {
    case SlotKind::kContent: return "content";
    case SlotKind::kPadding: return "padding";
    case SlotKind::kAttentionCheck: return "attention_check";
  }
  return "content";
}

absl::Status RunAssign(const AssignArgs& a) {
  AESTK_ASSIGN_OR_RETURN(pairs_text, ReadFileToString(a.pairs));
  AESTK_ASSIGN_OR_RETURN(pairs, ParsePairs(pairs_text));
  AESTK_ASSIGN_OR_RETURN(annotators, LoadAnnotators(a.annotators));
  AESTK_ASSIGN_OR_RETURN(tasks,
                         AssignTasks(pairs, annotators, a.redundancy, a.seed));
  std::string out;
  for (const AnnotationTask& t : tasks) {
    json slots = json::array();
    for (const TaskSlot& s : t.slots) {
      json slot = {{"slot_id", s.slot_id},
                   {"kind", std::string(SlotKindName(s.kind))}};
      if (s.check) {
        slot["check_id"] = s.check->check_id;
      } else {
        slot["pair_id"] = s.pair.pair_id;
      }
      slots.push_back(std::move(slot));
    }
    json line = {{"task_id", t.task_id},
                 {"annotator_id", t.annotator_id},
                 {"slots", slots}};
    absl::StrAppend(&out, line.dump(), "\n");
  }
  std::cerr << tasks.size() << " tasks for " << annotators.size()
            << " annotators\n";
  return WriteOutput(a.out, out);
}

// ---------------------------------------------------------------------------
// fuse

struct FuseArgs {
  std::string records;
  std::string target = "video";
  std::string method = "ds";
  double tol = 1e-6;
  int max_iters = 100;
  double smoothing = 0.01;
  int restarts = 1;
  uint64_t seed = 0;
  std::string pairs;  // comment_id -> post_id for the agreement rule
  std::string out;
  std::string model_out;
};

absl::Status RunFuseAgreementRule(const FuseArgs& a,
                                  std::span<const AnnotationRecord> records) {
  if (a.pairs.empty()) {
    return absl::InvalidArgumentError("--method rule needs --pairs");
  }
  AESTK_ASSIGN_OR_RETURN(pairs_text, ReadFileToString(a.pairs));
  AESTK_ASSIGN_OR_RETURN(pairs, ParsePairs(pairs_text));
  std::map<std::string, std::string> post_of;
  for (const VideoCommentPair& p : pairs) post_of[p.comment_id] = p.video_id;
  std::map<std::string, std::vector<CommentStance>> stances;
  for (const AnnotationRecord& r : records) {
    if (r.target != Target::kComment || r.padding) continue;
    AESTK_ASSIGN_OR_RETURN(stance, TernarizeCommentScale(r.scale));
    stances[r.item_id].push_back(stance);
  }
  Table table{{"comment_id", "post_id", "agreement"}, {}};
  for (const auto& [comment, s] : stances) {
    auto post = post_of.find(comment);
    if (post == post_of.end()) {
      return absl::NotFoundError(absl::StrCat("no pair for comment ", comment));
    }
    auto agreement = FuseCommentAgreement(s);
    if (!agreement.ok()) {
      std::cerr << "warning: comment " << comment << ": "
                << agreement.status().message() << "\n";
      continue;
    }
    table.rows.push_back({comment, post->second,
                          std::string(CommentAgreementName(*agreement))});
  }
  return WriteOutput(a.out, FormatTsv(table));
}

absl::Status RunFuse(const FuseArgs& a) {
  AESTK_ASSIGN_OR_RETURN(text, ReadFileToString(a.records));
  AESTK_ASSIGN_OR_RETURN(records, ParseRecords(text));
  if (a.method == "rule") {
    if (a.target != "comment") {
      return absl::InvalidArgumentError("--method rule applies to comments");
    }
    return RunFuseAgreementRule(a, records);
  }
  AESTK_ASSIGN_OR_RETURN(method, ParseFusionMethod(a.method));
  auto matrix_or = a.target == "comment" ? CommentLabelMatrix(records)
                                         : VideoLabelMatrix(records);
  if (!matrix_or.ok()) return matrix_or.status();
  const LabelMatrix& matrix = *matrix_or;
  std::vector<FusedLabel> labels;
  std::string model_json;
  if (method == FusionMethod::kMajority) {
    AESTK_ASSIGN_OR_RETURN(fused, MajorityVote(matrix));
    labels = std::move(fused);
  } else if (method == FusionMethod::kDawidSkene) {
    EmOptions options{a.max_iters, a.tol, a.smoothing};
    AESTK_ASSIGN_OR_RETURN(result, DawidSkene(matrix, options));
    labels = std::move(result.labels);
    model_json = DawidSkeneModelToJson(result.model, matrix);
    if (!result.model.converged) {
      std::cerr << "warning: EM stopped at max_iters without converging\n";
    }
  } else {
    MaceOptions options;
    options.max_iters = a.max_iters;
    options.tol = a.tol;
    options.smoothing = a.smoothing;
    options.restarts = a.restarts;
    options.seed = a.seed;
    AESTK_ASSIGN_OR_RETURN(result, Mace(matrix, options));
    labels = std::move(result.labels);
    model_json = MaceModelToJson(result.model, matrix);
    if (!result.model.converged) {
      std::cerr << "warning: EM stopped at max_iters without converging\n";
    }
  }
  AESTK_RETURN_IF_ERROR(WriteOutput(a.out, FusedLabelsToTsv(labels)));
  if (!a.model_out.empty()) {
    if (model_json.empty()) {
      return absl::InvalidArgumentError("majority vote has no model to dump");
    }
    AESTK_RETURN_IF_ERROR(WriteOutput(a.model_out, model_json));
  }
  return absl::OkStatus();
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateArgs {
  std::vector<std::string> preds;  // name=path
  std::string gold;
  std::string out;
};

absl::Status RunEvaluate(const EvaluateArgs& a) {
  AESTK_ASSIGN_OR_RETURN(gold, LoadLabelMap(a.gold));
  std::vector<std::pair<std::string, Evaluation>> columns;
  for (const std::string& spec : a.preds) {
    const size_t eq = spec.find('=');
    const std::string name = eq == std::string::npos ? spec : spec.substr(0, eq);
    const std::string path = eq == std::string::npos ? spec : spec.substr(eq + 1);
    AESTK_ASSIGN_OR_RETURN(pred, LoadLabelMap(path));
    std::vector<int> p, g;
    int missing = 0;
    for (const auto& [id, label] : gold) {
      auto it = pred.find(id);
      if (it == pred.end()) {
        ++missing;
        continue;
      }
      p.push_back(it->second);
      g.push_back(label);
    }
    if (missing > 0) {
      std::cerr << "warning: " << name << " has no label for " << missing
                << " gold items; they are left out\n";
    }
    AESTK_ASSIGN_OR_RETURN(eval, Evaluate(p, g));
    columns.emplace_back(name, eval);
  }
  return WriteOutput(a.out, AggregationReportTsv(columns));
}

// ---------------------------------------------------------------------------
// train / predict

struct EncoderArgs {
  std::string encoder = "hashed";
  std::string vectors;
  int ngram = 2;
  int buckets = 4096;
};

void AddEncoderArgs(CLI::App* app, EncoderArgs* args) {
  app->add_option("--encoder", args->encoder, "hashed | external")
      ->check(CLI::IsMember({"hashed", "external"}));
  app->add_option("--vectors", args->vectors,
                  "Vector file for --encoder external");
  app->add_option("--ngram", args->ngram, "Maximum n-gram order");
  app->add_option("--buckets", args->buckets, "Hashed feature buckets");
}

absl::StatusOr<std::unique_ptr<Encoder>> MakeEncoder(const EncoderArgs& a) {
  if (a.encoder == "external") {
    if (a.vectors.empty()) {
      return absl::InvalidArgumentError("--encoder external needs --vectors");
    }
    AESTK_ASSIGN_OR_RETURN(enc, ExternalVectorEncoder::Load(a.vectors));
    return std::unique_ptr<Encoder>(new ExternalVectorEncoder(std::move(enc)));
  }
  if (a.ngram < 1 || a.buckets < 1) {
    return absl::InvalidArgumentError("--ngram and --buckets must be >= 1");
  }
  return std::unique_ptr<Encoder>(
      new HashedNgramEncoder({a.ngram, a.buckets}));
}

struct TrainArgs {
  std::string posts;
  std::string labels;
  EncoderArgs encoder;
  int folds = 5;
  int seeds = 3;
  std::string class_weights = "0.35,0.65";
  std::string learning_rates = "1.0";
  std::string l2s = "1e-4,1e-3,1e-2";
  std::string epochs = "300";
  bool no_categories = false;
  std::string model_out;
  std::string grid_out;
};

absl::Status RunTrain(const TrainArgs& a) {
  AESTK_ASSIGN_OR_RETURN(corpus, LoadCorpus(a.posts));
  AESTK_ASSIGN_OR_RETURN(labels, LoadLabelMap(a.labels));
  AESTK_ASSIGN_OR_RETURN(encoder, MakeEncoder(a.encoder));
  std::vector<std::string> warnings;
  AESTK_ASSIGN_OR_RETURN(dataset,
                         BuildDataset(corpus.posts, labels, *encoder, &warnings));
  PrintWarnings(warnings);

  AESTK_ASSIGN_OR_RETURN(weights, ParseDoubleList(a.class_weights));
  if (weights.size() != 2) {
    return absl::InvalidArgumentError(
        "--class-weights takes two values: non-AES,AES");
  }
  AESTK_ASSIGN_OR_RETURN(lrs, ParseDoubleList(a.learning_rates));
  AESTK_ASSIGN_OR_RETURN(l2s, ParseDoubleList(a.l2s));
  AESTK_ASSIGN_OR_RETURN(epoch_values, ParseDoubleList(a.epochs));
  std::vector<int> epochs(epoch_values.begin(), epoch_values.end());

  TrainConfig base;
  base.class_weights = {weights[0], weights[1]};
  base.use_categories = !a.no_categories;
  GridSearchPlan plan;
  plan.grid = ExpandGrid(base, lrs, l2s, epochs);
  plan.folds = a.folds;
  plan.seeds.clear();
  for (int s = 0; s < a.seeds; ++s) plan.seeds.push_back(s);
  AESTK_ASSIGN_OR_RETURN(search, GridSearch(dataset, plan));
  if (!a.grid_out.empty()) {
    AESTK_RETURN_IF_ERROR(
        WriteOutput(a.grid_out, GridSearchTsv(search, plan.grid)));
  }
  std::cerr << absl::StrFormat(
      "best: lr=%g l2=%g epochs=%d mean F1=%.4f\n", search.best.learning_rate,
      search.best.l2, search.best.epochs, search.mean_f1[search.best_index]);

  AESTK_ASSIGN_OR_RETURN(model, Train(dataset, search.best));
  model.encoder.kind = encoder->kind();
  if (encoder->kind() == EncoderKind::kHashedNgram) {
    model.encoder.hashed = {a.encoder.ngram, a.encoder.buckets};
  }
  return WriteOutput(a.model_out, SerializeModel(model));
}

struct PredictArgs {
  std::string model;
  std::string posts;
  std::string vectors;
  std::string out;
};

absl::Status RunPredict(const PredictArgs& a) {
  AESTK_ASSIGN_OR_RETURN(model_text, ReadFileToString(a.model));
  AESTK_ASSIGN_OR_RETURN(model, ParseModel(model_text));
  AESTK_ASSIGN_OR_RETURN(corpus, LoadCorpus(a.posts));
  EncoderArgs enc;
  if (!model.encoder.kind) {
    return absl::FailedPreconditionError("model does not record its encoder");
  }
  if (*model.encoder.kind == EncoderKind::kExternalVectors) {
    enc.encoder = "external";
    enc.vectors = a.vectors;
  } else {
    enc.ngram = model.encoder.hashed.max_order;
    enc.buckets = model.encoder.hashed.buckets;
  }
  AESTK_ASSIGN_OR_RETURN(encoder, MakeEncoder(enc));
  std::vector<Document> docs;
  for (const Post& p : corpus.posts) docs.push_back(MakeDocument(p));
  AESTK_ASSIGN_OR_RETURN(batch, EncodeAll(docs, *encoder));
  PrintWarnings(batch.warnings);
  std::vector<Example> examples;
  for (size_t i = 0; i < corpus.posts.size(); ++i) {
    examples.push_back({corpus.posts[i].post_id, std::move(batch.vectors[i]),
                        corpus.posts[i].category, 0});
  }
  AESTK_ASSIGN_OR_RETURN(pred, Predict(model, examples));
  PrintWarnings(pred.warnings);
  Table table{{"item_id", "score", "label"}, {}};
  for (size_t i = 0; i < examples.size(); ++i) {
    table.rows.push_back({examples[i].item_id,
                          absl::StrFormat("%.6f", pred.scores[i]),
                          absl::StrCat(pred.labels[i])});
  }
  return WriteOutput(a.out, FormatTsv(table));
}

// ---------------------------------------------------------------------------
// report

struct ReportArgs {
  std::string kind;
  std::string posts;
  std::string human;
  std::vector<std::string> model;  // one per run
  std::string categories = "conspiracy,finance,wellness";
  bool include_views = false;
  std::string comments;
  std::string coded;
  std::string codebook = "institutions";
  std::vector<std::string> platforms;  // name=posts,labels
  int iterations = 2000;
  uint64_t seed = 0;
  bool long_format = false;
  std::string out;
};

absl::StatusOr<LabeledCorpus> LoadLabeled(const std::string& posts_path,
                                          const std::string& human_path,
                                          const std::string& model_path) {
  AESTK_ASSIGN_OR_RETURN(corpus, LoadCorpus(posts_path));
  std::map<std::string, int> human, model;
  if (!human_path.empty()) {
    AESTK_ASSIGN_OR_RETURN(h, LoadLabelMap(human_path));
    human = std::move(h);
  }
  if (!model_path.empty()) {
    AESTK_ASSIGN_OR_RETURN(m, LoadLabelMap(model_path));
    model = std::move(m);
  }
  return BuildLabeledCorpus(corpus.posts, human, model);
}

absl::StatusOr<Codebook> ResolveCodebook(const std::string& name) {
  if (name == "institutions") return InstitutionsCodebook();
  if (name == "visual_style") return VisualStyleCodebook();
  AESTK_ASSIGN_OR_RETURN(text, ReadFileToString(name));
  return ParseCodebook(text);
}

absl::Status RunReport(const ReportArgs& a) {
  AESTK_ASSIGN_OR_RETURN(categories, ParseCategories(a.categories));
  BootstrapOptions bootstrap{a.iterations, 0.95, a.seed};
  auto render = [&](const Table& wide, const Table& longer,
                    std::span<const std::string> footer) {
    return WriteOutput(a.out, a.long_format ? FormatTsv(longer)
                                            : TableWithFooter(wide, footer));
  };
  auto need_posts = [&]() -> absl::Status {
    return a.posts.empty()
               ? absl::InvalidArgumentError("this report needs --posts")
               : absl::OkStatus();
  };
  const std::string first_model = a.model.empty() ? "" : a.model.front();

  if (a.kind == "prevalence") {
    AESTK_RETURN_IF_ERROR(need_posts());
    std::vector<LabeledCorpus> runs;
    if (a.model.size() <= 1) {
      AESTK_ASSIGN_OR_RETURN(c, LoadLabeled(a.posts, a.human, first_model));
      runs.push_back(std::move(c));
    } else {
      for (const std::string& m : a.model) {
        AESTK_ASSIGN_OR_RETURN(c, LoadLabeled(a.posts, a.human, m));
        runs.push_back(std::move(c));
      }
    }
    auto report = runs.size() == 1
                      ? PrevalenceByCategory(runs[0], categories, bootstrap)
                      : PrevalenceAcrossRuns(runs, categories, bootstrap);
    if (!report.ok()) return report.status();
    return render(report->ToTable(), report->ToLongTable(), report->warnings);
  }
  if (a.kind == "engagement") {
    AESTK_RETURN_IF_ERROR(need_posts());
    AESTK_ASSIGN_OR_RETURN(c, LoadLabeled(a.posts, a.human, first_model));
    EngagementReport report = EngagementByLabel(c, {a.include_views});
    return render(report.ToTable(), report.ToLongTable(), report.notes);
  }
  if (a.kind == "agreement") {
    AESTK_RETURN_IF_ERROR(need_posts());
    if (a.comments.empty()) {
      return absl::InvalidArgumentError("agreement needs --comments");
    }
    AESTK_ASSIGN_OR_RETURN(c, LoadLabeled(a.posts, a.human, first_model));
    AESTK_ASSIGN_OR_RETURN(text, ReadFileToString(a.comments));
    AESTK_ASSIGN_OR_RETURN(fused, ParseFusedComments(text));
    AESTK_ASSIGN_OR_RETURN(report, AgreementDistribution(fused, c));
    return render(report.ToTable(), report.ToLongTable(), {});
  }
  if (a.kind == "codebook") {
    if (a.coded.empty()) return absl::InvalidArgumentError("codebook needs --coded");
    AESTK_ASSIGN_OR_RETURN(codebook, ResolveCodebook(a.codebook));
    AESTK_ASSIGN_OR_RETURN(text, ReadFileToString(a.coded));
    AESTK_ASSIGN_OR_RETURN(coded, ParseCodedPosts(text));
    AESTK_ASSIGN_OR_RETURN(table, CodebookTabulate(coded, codebook));
    return render(table.ToTable(), table.ToLongTable(), {});
  }
  if (a.kind == "cross-platform") {
    std::vector<PlatformCorpus> platforms;
    for (const std::string& spec : a.platforms) {
      const size_t eq = spec.find('=');
      const size_t comma = spec.find(',', eq == std::string::npos ? 0 : eq);
      if (eq == std::string::npos || comma == std::string::npos) {
        return absl::InvalidArgumentError(
            absl::StrCat("--platform expects NAME=POSTS,LABELS: ", spec));
      }
      AESTK_ASSIGN_OR_RETURN(
          c, LoadLabeled(spec.substr(eq + 1, comma - eq - 1), "",
                         spec.substr(comma + 1)));
      platforms.push_back({spec.substr(0, eq), std::move(c)});
    }
    AESTK_ASSIGN_OR_RETURN(report, CrossPlatform(platforms, categories));
    return render(report.ToTable(), report.ToLongTable(), report.warnings);
  }
  return absl::InvalidArgumentError(absl::StrCat("unknown report kind ", a.kind));
}

// ---------------------------------------------------------------------------
// lexicon

struct LexiconArgs {
  std::string posts;
  std::string lexicon;
  std::string composites;
  std::string labels;
  std::string out;
  std::string stats_out;
  bool dump = false;
};

absl::Status RunLexicon(const LexiconArgs& a) {
  Lexicon lexicon = StarterLexicon();
  if (!a.lexicon.empty()) {
    AESTK_ASSIGN_OR_RETURN(loaded, Lexicon::Load(a.lexicon));
    lexicon = std::move(loaded);
  }
  if (a.dump) return WriteOutput(a.out, lexicon.ToText());
  if (a.posts.empty()) return absl::InvalidArgumentError("--posts required");
  std::vector<Composite> composites;
  if (!a.composites.empty()) {
    AESTK_ASSIGN_OR_RETURN(text, ReadFileToString(a.composites));
    AESTK_ASSIGN_OR_RETURN(parsed, ParseComposites(text));
    composites = std::move(parsed);
  }
  AESTK_ASSIGN_OR_RETURN(corpus, LoadCorpus(a.posts));

  std::vector<std::string> variables = lexicon.categories();
  for (const Composite& c : composites) variables.push_back(c.name);
  Table table{{"post_id", "tokens"}, {}};
  table.header.insert(table.header.end(), variables.begin(), variables.end());
  std::vector<std::string> ids;
  std::vector<std::vector<double>> values;
  for (const Post& p : corpus.posts) {
    Document doc = MakeDocument(p);
    auto score = ScoreDocument(p.post_id, doc.text, lexicon);
    if (!score.ok()) {
      std::cerr << "warning: skipping " << p.post_id << ": "
                << score.status().message() << "\n";
      continue;
    }
    std::vector<double> row = score->percentages;
    AESTK_ASSIGN_OR_RETURN(extra, ApplyComposites(*score, lexicon, composites));
    row.insert(row.end(), extra.begin(), extra.end());
    std::vector<std::string> cells = {p.post_id,
                                      absl::StrCat(score->total_tokens)};
    for (double v : row) cells.push_back(absl::StrFormat("%.4f", v));
    table.rows.push_back(std::move(cells));
    ids.push_back(p.post_id);
    values.push_back(std::move(row));
  }
  AESTK_RETURN_IF_ERROR(WriteOutput(a.out, FormatTsv(table)));

  if (!a.stats_out.empty()) {
    if (a.labels.empty()) {
      return absl::InvalidArgumentError("--stats-out needs --labels");
    }
    AESTK_ASSIGN_OR_RETURN(label_map, LoadLabelMap(a.labels));
    std::vector<std::vector<double>> kept;
    std::vector<int> labels;
    for (size_t i = 0; i < ids.size(); ++i) {
      auto it = label_map.find(ids[i]);
      if (it == label_map.end()) continue;
      kept.push_back(values[i]);
      labels.push_back(it->second);
    }
    AESTK_ASSIGN_OR_RETURN(
        report, GroupStats(variables, kept, labels, StarterLayout()));
    AESTK_RETURN_IF_ERROR(WriteOutput(
        a.stats_out, TableWithFooter(report.ToTable(), report.warnings)));
  }
  return absl::OkStatus();
}

// ---------------------------------------------------------------------------
// fyp

struct FypArgs {
  int accounts = 48;
  int days = 35;
  uint64_t seed = 0;
  std::string clock = "est";
  std::string news_pool;
  std::string lifestyle_pool;
  double watch_probability = 0.5;
  int offers = 100;
  // schedule
  std::string sessions_out;
  std::string follows_out;
  // simulate
  size_t feed_size = 100000;
  double aes_rate = 0.0048;
  std::string feed;
  std::string mode = "sample";
  int threads = 1;
  std::string log_out;
  std::string labels_out;
  // report
  std::string log;
  std::string labels;
  int iterations = 2000;
};

void AddPuppetArgs(CLI::App* app, FypArgs* a) {
  app->add_option("--accounts", a->accounts, "Number of puppet accounts");
  app->add_option("--days", a->days, "Days of browsing");
  app->add_option("--seed", a->seed, "Seed");
  app->add_option("--clock", a->clock, "est | new-york")
      ->check(CLI::IsMember({"est", "new-york"}));
  app->add_option("--news-pool", a->news_pool, "News account pool (TSV)");
  app->add_option("--lifestyle-pool", a->lifestyle_pool,
                  "Lifestyle account pool (TSV)");
  app->add_option("--watch-probability", a->watch_probability,
                  "Probability of watching an offered post");
  app->add_option("--offers", a->offers, "Offers per session");
}

absl::StatusOr<PuppetConfig> MakePuppetConfig(const FypArgs& a) {
  PuppetConfig config;
  config.num_accounts = a.accounts;
  config.duration_days = a.days;
  config.seed = a.seed;
  config.clock = a.clock == "new-york" ? ClockMode::kNewYorkCivil
                                       : ClockMode::kFixedEst;
  config.watch_probability = a.watch_probability;
  config.offers_per_session = a.offers;
  for (auto [path, pool] : {std::pair{&a.news_pool, &config.news_pool},
                            std::pair{&a.lifestyle_pool, &config.lifestyle_pool}}) {
    if (path->empty()) continue;
    AESTK_ASSIGN_OR_RETURN(text, ReadFileToString(*path));
    AESTK_ASSIGN_OR_RETURN(parsed, ParsePool(text));
    *pool = std::move(parsed);
  }
  AESTK_RETURN_IF_ERROR(ValidateConfig(config));
  return config;
}

absl::Status RunFypSchedule(const FypArgs& a) {
  AESTK_ASSIGN_OR_RETURN(config, MakePuppetConfig(a));
  AESTK_ASSIGN_OR_RETURN(schedule, GenerateSchedule(config));
  AESTK_RETURN_IF_ERROR(
      WriteOutput(a.sessions_out, FormatTsv(schedule.SessionsTable(config))));
  if (!a.follows_out.empty()) {
    AESTK_RETURN_IF_ERROR(
        WriteOutput(a.follows_out, FormatTsv(schedule.FollowsTable())));
  }
  return absl::OkStatus();
}

absl::StatusOr<std::vector<FeedPost>> LoadFeed(const std::string& path) {
  AESTK_ASSIGN_OR_RETURN(text, ReadFileToString(path));
  AESTK_ASSIGN_OR_RETURN(table, ParseTsv(text));
  const int id = table.ColumnIndex("post_id");
  const int aes = table.ColumnIndex("aes");
  if (id < 0) return absl::InvalidArgumentError("feed needs a post_id column");
  std::vector<FeedPost> feed;
  for (const auto& row : table.rows) {
    FeedPost p{row[id], 0};
    if (aes >= 0 && !absl::SimpleAtoi(row[aes], &p.aes)) {
      return absl::InvalidArgumentError(absl::StrCat("bad aes for ", row[id]));
    }
    feed.push_back(std::move(p));
  }
  return feed;
}

absl::Status RunFypSimulate(const FypArgs& a) {
  AESTK_ASSIGN_OR_RETURN(config, MakePuppetConfig(a));
  AESTK_ASSIGN_OR_RETURN(schedule, GenerateSchedule(config));
  std::vector<FeedPost> feed;
  if (a.feed.empty()) {
    feed = SyntheticFeed(a.feed_size, a.aes_rate, SubstreamSeed(a.seed, ~0ull));
  } else {
    AESTK_ASSIGN_OR_RETURN(loaded, LoadFeed(a.feed));
    feed = std::move(loaded);
  }
  SimulationOptions options;
  options.mode = a.mode == "replay" ? FeedMode::kReplay : FeedMode::kSample;
  options.threads = a.threads;
  AESTK_ASSIGN_OR_RETURN(result, SimulateBrowse(schedule, feed, config, options));
  std::cerr << absl::StrFormat("%d offers, %d watched\n", result.offers,
                               result.watched.size());
  AESTK_RETURN_IF_ERROR(WriteOutput(a.log_out, WatchLogToJsonl(result.watched)));
  if (!a.labels_out.empty()) {
    Table table{{"post_id", "label"}, {}};
    for (const FeedPost& p : feed) {
      table.rows.push_back({p.post_id, absl::StrCat(p.aes)});
    }
    AESTK_RETURN_IF_ERROR(WriteOutput(a.labels_out, FormatTsv(table)));
  }
  return absl::OkStatus();
}

absl::Status RunFypReport(const FypArgs& a) {
  AESTK_ASSIGN_OR_RETURN(text, ReadFileToString(a.log));
  AESTK_ASSIGN_OR_RETURN(log, ParseWatchLog(text));
  AESTK_ASSIGN_OR_RETURN(labels, LoadLabelMap(a.labels));
  AESTK_ASSIGN_OR_RETURN(
      estimate, ExposurePrevalence(log, labels, {a.iterations, 0.95, a.seed}));
  Table table{{"watched", "aes", "proportion", "percent", "ci_lower", "ci_upper"},
              {{absl::StrCat(estimate.watched), absl::StrCat(estimate.aes),
                absl::StrFormat("%.6f", estimate.proportion),
                absl::StrFormat("%.2f", 100 * estimate.proportion),
                absl::StrFormat("%.6f", estimate.ci.lower),
                absl::StrFormat("%.6f", estimate.ci.upper)}}};
  return WriteOutput("", FormatTsv(table));
}

// ---------------------------------------------------------------------------
// serve

struct ServeArgs {
  ServerConfig config;
};

absl::Status RunServe(ServeArgs a, const CLI::App& app) {
  // Environment first; explicit flags win.
  ServerConfig from_env;
  AESTK_RETURN_IF_ERROR(ApplyEnvironment(&from_env));
  auto given = [&](const char* flag) { return app.count(flag) > 0; };
  if (!given("--host")) a.config.host = from_env.host;
  if (!given("--port")) a.config.port = from_env.port;
  if (!given("--data-dir")) a.config.data_dir = from_env.data_dir;
  if (!given("--pairs")) a.config.pairs_path = from_env.pairs_path;
  if (!given("--training-bank")) {
    a.config.training_bank_path = from_env.training_bank_path;
  }
  if (!given("--redundancy")) a.config.redundancy = from_env.redundancy;
  if (!given("--seed")) a.config.seed = from_env.seed;
  return RunServer(a.config);
}

int Main(int argc, char** argv) {
  CLI::App app{"aestk: toolkit for measuring anti-establishment sentiment "
               "in short-video corpora"};
  app.require_subcommand(1);
  std::function<absl::Status()> run;

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Load and validate a corpus");
  AddCorpusArgs(c_ingest, &ingest.corpus);
  c_ingest->add_option("--out-posts", ingest.out_posts, "Normalized posts");
  c_ingest->add_option("--out-comments", ingest.out_comments,
                       "Normalized comments");
  c_ingest->callback([&] { run = [&] { return RunIngest(ingest); }; });

  FilterArgs filter;
  auto* c_filter = app.add_subcommand("filter", "Apply the filtering funnel");
  AddCorpusArgs(c_filter, &filter.corpus);
  c_filter->add_option("--min-tokens", filter.min_tokens,
                       "Minimum tokens per post");
  c_filter->add_option("--lang", filter.lang, "Required language tag");
  c_filter->add_flag("--require-keywords", filter.require_keywords,
                     "Also require a category keyword match");
  c_filter->add_option("--comment-min-tokens", filter.comment_min_tokens,
                       "Minimum tokens per comment");
  c_filter->add_option("--report", filter.report, "Funnel report (TSV)");
  c_filter->add_option("--out-posts", filter.out_posts, "Surviving posts");
  c_filter->add_option("--out-comments", filter.out_comments,
                       "Comments long enough to annotate");
  c_filter->callback([&] { run = [&] { return RunFilter(filter); }; });

  AssignArgs assign;
  auto* c_assign = app.add_subcommand("assign", "Batch task assignment");
  c_assign->add_option("--pairs", assign.pairs, "Video-comment pairs (JSONL)")
      ->required();
  c_assign->add_option("--annotators", assign.annotators,
                       "annotator_id, training_score, pretask_score (TSV)")
      ->required();
  c_assign->add_option("--redundancy", assign.redundancy,
                       "Annotators per pair");
  c_assign->add_option("--seed", assign.seed, "Seed");
  c_assign->add_option("--out", assign.out, "Tasks (JSONL)");
  c_assign->callback([&] { run = [&] { return RunAssign(assign); }; });

  FuseArgs fuse;
  auto* c_fuse = app.add_subcommand("fuse", "Aggregate redundant labels");
  c_fuse->add_option("--records", fuse.records, "Annotation records (JSONL)")
      ->required();
  c_fuse->add_option("--target", fuse.target, "video | comment")
      ->check(CLI::IsMember({"video", "comment"}));
  c_fuse->add_option("--method", fuse.method,
                     "majority | ds | mace | rule (comments)")
      ->check(CLI::IsMember({"majority", "ds", "dawid_skene", "mace", "rule"}));
  c_fuse->add_option("--tol", fuse.tol, "EM convergence tolerance");
  c_fuse->add_option("--max-iters", fuse.max_iters, "EM iteration cap");
  c_fuse->add_option("--smoothing", fuse.smoothing, "M-step pseudo-count");
  c_fuse->add_option("--restarts", fuse.restarts, "MACE restarts");
  c_fuse->add_option("--seed", fuse.seed, "Seed for extra MACE restarts");
  c_fuse->add_option("--pairs", fuse.pairs,
                     "Pairs file mapping comments to posts (rule)");
  c_fuse->add_option("--out", fuse.out, "Fused labels (TSV)");
  c_fuse->add_option("--model-out", fuse.model_out, "Model dump (JSON)");
  c_fuse->callback([&] { run = [&] { return RunFuse(fuse); }; });

  EvaluateArgs evaluate;
  auto* c_eval = app.add_subcommand("evaluate", "Score labels against gold");
  c_eval->add_option("--pred", evaluate.preds, "NAME=FILE label table")
      ->required();
  c_eval->add_option("--gold", evaluate.gold, "Gold label table")->required();
  c_eval->add_option("--out", evaluate.out, "Report (TSV)");
  c_eval->callback([&] { run = [&] { return RunEvaluate(evaluate); }; });

  TrainArgs train;
  auto* c_train = app.add_subcommand("train", "Grid-search and fit a model");
  c_train->add_option("--posts", train.posts, "Posts (JSONL)")->required();
  c_train->add_option("--labels", train.labels, "Label table")->required();
  AddEncoderArgs(c_train, &train.encoder);
  c_train->add_option("--folds", train.folds, "Cross-validation folds");
  c_train->add_option("--seeds", train.seeds, "Seeds per grid point");
  c_train->add_option("--class-weights", train.class_weights,
                      "non-AES,AES loss weights");
  c_train->add_option("--lr", train.learning_rates, "Learning rates");
  c_train->add_option("--l2", train.l2s, "L2 strengths");
  c_train->add_option("--epochs", train.epochs, "Epoch counts");
  c_train->add_flag("--no-categories", train.no_categories,
                    "Train on text features only");
  c_train->add_option("--model-out", train.model_out, "Model dump");
  c_train->add_option("--grid-out", train.grid_out, "Grid results (TSV)");
  c_train->callback([&] { run = [&] { return RunTrain(train); }; });

  PredictArgs predict;
  auto* c_predict = app.add_subcommand("predict", "Label posts with a model");
  c_predict->add_option("--model", predict.model, "Model dump")->required();
  c_predict->add_option("--posts", predict.posts, "Posts (JSONL)")->required();
  c_predict->add_option("--vectors", predict.vectors,
                        "Vector file for external-vector models");
  c_predict->add_option("--out", predict.out, "Predictions (TSV)");
  c_predict->callback([&] { run = [&] { return RunPredict(predict); }; });

  ReportArgs report;
  auto* c_report = app.add_subcommand("report", "Findings tables");
  c_report->add_option("--kind", report.kind)
      ->required()
      ->check(CLI::IsMember(
          {"prevalence", "engagement", "agreement", "codebook", "cross-platform"}));
  c_report->add_option("--posts", report.posts, "Posts (JSONL)");
  c_report->add_option("--human", report.human, "Human label table");
  c_report->add_option("--model", report.model,
                       "Model label table; repeat for seed runs");
  c_report->add_option("--categories", report.categories,
                       "Comma-separated categories");
  c_report->add_flag("--include-views", report.include_views,
                     "Add view counts to engagement");
  c_report->add_option("--comments", report.comments,
                       "Fused comment agreement (TSV)");
  c_report->add_option("--coded", report.coded, "Coded posts (TSV)");
  c_report->add_option("--codebook", report.codebook,
                       "institutions | visual_style | FILE");
  c_report->add_option("--platform", report.platforms,
                       "NAME=POSTS,LABELS; repeat per platform");
  c_report->add_option("--iterations", report.iterations,
                       "Bootstrap iterations");
  c_report->add_option("--seed", report.seed, "Bootstrap seed");
  c_report->add_flag("--long", report.long_format, "Long format");
  c_report->add_option("--out", report.out, "Output file");
  c_report->callback([&] { run = [&] { return RunReport(report); }; });

  LexiconArgs lexicon;
  auto* c_lex = app.add_subcommand("lexicon", "Word-category scores");
  c_lex->add_option("--posts", lexicon.posts, "Posts (JSONL)");
  c_lex->add_option("--lexicon", lexicon.lexicon,
                    "Lexicon file (default: bundled starter list)");
  c_lex->add_option("--composites", lexicon.composites,
                    "Composite variables (JSON)");
  c_lex->add_option("--labels", lexicon.labels, "Label table for group stats");
  c_lex->add_option("--out", lexicon.out, "Per-post scores (TSV)");
  c_lex->add_option("--stats-out", lexicon.stats_out,
                    "AES vs non-AES means (TSV)");
  c_lex->add_flag("--dump", lexicon.dump, "Print the lexicon and exit");
  c_lex->callback([&] { run = [&] { return RunLexicon(lexicon); }; });

  FypArgs fyp;
  auto* c_fyp = app.add_subcommand("fyp", "Sock-puppet feed audit");
  c_fyp->require_subcommand(1);
  auto* c_sched = c_fyp->add_subcommand("schedule", "Follows and sessions");
  AddPuppetArgs(c_sched, &fyp);
  c_sched->add_option("--sessions-out", fyp.sessions_out, "Sessions (TSV)");
  c_sched->add_option("--follows-out", fyp.follows_out, "Follows (TSV)");
  c_sched->callback([&] { run = [&] { return RunFypSchedule(fyp); }; });
  auto* c_sim = c_fyp->add_subcommand("simulate", "Browse a feed");
  AddPuppetArgs(c_sim, &fyp);
  c_sim->add_option("--feed", fyp.feed, "Feed (TSV post_id[, aes])");
  c_sim->add_option("--feed-size", fyp.feed_size, "Synthetic feed size");
  c_sim->add_option("--aes-rate", fyp.aes_rate, "Synthetic AES rate");
  c_sim->add_option("--mode", fyp.mode, "sample | replay")
      ->check(CLI::IsMember({"sample", "replay"}));
  c_sim->add_option("--threads", fyp.threads, "Worker threads");
  c_sim->add_option("--log-out", fyp.log_out, "Watch log (JSONL)");
  c_sim->add_option("--labels-out", fyp.labels_out,
                    "Feed labels (TSV), for the report step");
  c_sim->callback([&] { run = [&] { return RunFypSimulate(fyp); }; });
  auto* c_frep = c_fyp->add_subcommand("report", "Exposure prevalence");
  c_frep->add_option("--log", fyp.log, "Watch log (JSONL)")->required();
  c_frep->add_option("--labels", fyp.labels, "Label table")->required();
  c_frep->add_option("--iterations", fyp.iterations, "Bootstrap iterations");
  c_frep->add_option("--seed", fyp.seed, "Bootstrap seed");
  c_frep->callback([&] { run = [&] { return RunFypReport(fyp); }; });

  ServeArgs serve;
  auto* c_serve = app.add_subcommand("serve", "Annotation HTTP server");
  c_serve->add_option("--host", serve.config.host, "Bind address");
  c_serve->add_option("--port", serve.config.port, "Port (0 = any)");
  c_serve->add_option("--data-dir", serve.config.data_dir, "State directory");
  c_serve->add_option("--pairs", serve.config.pairs_path, "Pairs (JSONL)");
  c_serve->add_option("--training-bank", serve.config.training_bank_path,
                      "Training bank (JSON)");
  c_serve->add_option("--redundancy", serve.config.redundancy,
                      "Annotators per pair");
  c_serve->add_option("--seed", serve.config.seed, "Task seed");
  c_serve->callback([&] { run = [&] { return RunServe(serve, *c_serve); }; });

  CLI11_PARSE(app, argc, argv);
  absl::Status status = run();
  if (!status.ok()) {
    std::cerr << "aestk: " << status.ToString() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace
}  // namespace aestk::cli

int main(int argc, char** argv) { return aestk::cli::Main(argc, argv); }
