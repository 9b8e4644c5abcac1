// Copyright 2026 The Grit Forge Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "grit/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <tuple>

#include "grit/error.hpp"
#include "grit/kernels/iou_kernels.hpp"

namespace grit {
namespace {

using nlohmann::json;

kernels::BoxD to_boxd(const NormBox& b) { return {b.x0, b.y0, b.x1, b.y1}; }

// Integer-valued doubles: every intermediate below is exact.
kernels::BoxD to_boxd(const QuantBox& b) {
  return {static_cast<double>(b.x0), static_cast<double>(b.y0),
          static_cast<double>(b.x1), static_cast<double>(b.y1)};
}

struct Candidate {
  std::size_t gold;
  std::size_t pred;
  double iou;
};

double greedy_recall(std::span<const kernels::BoxD> gold_boxes,
                     const std::vector<std::string>& gold_phrases,
                     const kernels::BoxBatch& pred_boxes,
                     const std::vector<std::string>& pred_phrases,
                     double threshold, const MatchOptions& options) {
  if (gold_boxes.empty()) {
    throw Error(ErrorCode::kEmptyGold, "recall needs at least one gold box");
  }
  const std::size_t np = pred_boxes.size();
  if (np == 0) return 0.0;
  std::vector<double> ious(gold_boxes.size() * np);
  kernels::iou_matrix(gold_boxes, pred_boxes, ious);

  std::vector<Candidate> cands;
  cands.reserve(ious.size());
  for (std::size_t g = 0; g < gold_boxes.size(); ++g) {
    for (std::size_t p = 0; p < np; ++p) {
      if (!options.ignore_phrase && gold_phrases[g] != pred_phrases[p]) continue;
      cands.push_back({g, p, ious[g * np + p]});
    }
  }
  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    return std::tie(b.iou, a.gold, a.pred) < std::tie(a.iou, b.gold, b.pred);
  });
  std::vector<bool> gold_used(gold_boxes.size(), false);
  std::vector<bool> pred_used(np, false);
  std::size_t hits = 0;
  for (const Candidate& c : cands) {
    if (gold_used[c.gold] || pred_used[c.pred]) continue;
    gold_used[c.gold] = true;
    pred_used[c.pred] = true;
    if (c.iou > threshold) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(gold_boxes.size());
}

template <typename Item, typename BoxOf, typename PhraseOf>
double recall_impl(std::span<const Item> preds, std::span<const Item> golds,
                   double threshold, const MatchOptions& options, BoxOf box_of,
                   PhraseOf phrase_of) {
  std::vector<kernels::BoxD> gold_boxes;
  std::vector<std::string> gold_phrases, pred_phrases;
  kernels::BoxBatch pred_boxes;
  gold_boxes.reserve(golds.size());
  pred_boxes.reserve(preds.size());
  for (const Item& g : golds) {
    gold_boxes.push_back(to_boxd(box_of(g)));
    gold_phrases.push_back(options.ignore_phrase
                               ? std::string()
                               : normalize_label(phrase_of(g), options.synonyms));
  }
  for (const Item& p : preds) {
    pred_boxes.push_back(to_boxd(box_of(p)));
    pred_phrases.push_back(options.ignore_phrase
                               ? std::string()
                               : normalize_label(phrase_of(p), options.synonyms));
  }
  return greedy_recall(gold_boxes, gold_phrases, pred_boxes, pred_phrases,
                       threshold, options);
}

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

}  // namespace

double iou(const NormBox& a, const NormBox& b) {
  return kernels::iou_scalar(to_boxd(a), to_boxd(b));
}

double iou(const QuantBox& a, const QuantBox& b) {
  return kernels::iou_scalar(to_boxd(a), to_boxd(b));
}

void SynonymTable::add(std::string_view canonical, std::string_view variant) {
  map_[normalize_label(variant)] = normalize_label(canonical);
}

std::string SynonymTable::lookup(const std::string& normalized) const {
  auto it = map_.find(normalized);
  return it == map_.end() ? normalized : it->second;
}

SynonymTable SynonymTable::from_json(const json& j) {
  if (!j.is_object()) {
    throw Error(ErrorCode::kSchema, "synonym table must be a JSON object");
  }
  SynonymTable table;
  for (const auto& [canonical, variants] : j.items()) {
    if (!variants.is_array()) {
      throw Error(ErrorCode::kSchema, "synonyms of '" + canonical + "' must be an array");
    }
    for (const json& v : variants) {
      if (!v.is_string()) throw Error(ErrorCode::kSchema, "synonyms must be strings");
      table.add(canonical, v.get<std::string>());
    }
  }
  return table;
}

SynonymTable SynonymTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingFile, "cannot open " + path.string());
  try {
    return from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSchema, path.string() + ": " + e.what());
  }
}

std::string normalize_label(std::string_view label, const SynonymTable* synonyms) {
  std::string out;
  out.reserve(label.size());
  bool pending_space = false;
  for (char c : label) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
  }
  while (!out.empty() &&
         std::ispunct(static_cast<unsigned char>(out.back()))) {
    out.pop_back();
    while (!out.empty() && out.back() == ' ') out.pop_back();
  }
  if (synonyms) return synonyms->lookup(out);
  return out;
}

int roc_recall(std::string_view pred_label, std::string_view gold_label,
               const SynonymTable* synonyms) {
  const std::string gold = normalize_label(gold_label, synonyms);
  if (gold.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "ROC gold label is empty");
  }
  return normalize_label(pred_label, synonyms) == gold ? 1 : 0;
}

double recall_at(std::span<const LabeledNormBox> preds,
                 std::span<const LabeledNormBox> golds, double threshold,
                 const MatchOptions& options) {
  return recall_impl(
      preds, golds, threshold, options,
      [](const LabeledNormBox& b) -> const NormBox& { return b.box; },
      [](const LabeledNormBox& b) -> const std::string& { return b.phrase; });
}

double recall_at(std::span<const PhraseBox> preds,
                 std::span<const PhraseBox> golds, double threshold,
                 const MatchOptions& options) {
  return recall_impl(
      preds, golds, threshold, options,
      [](const PhraseBox& b) -> const QuantBox& { return b.box; },
      [](const PhraseBox& b) -> const std::string& { return b.phrase; });
}

std::optional<double> ScoreTable::cell(TaskKind t, Modality m) const {
  auto it = cells.find({t, m});
  if (it == cells.end()) return std::nullopt;
  return it->second.mean;
}

ScoreTable aggregate(std::span<const SampleScore> scores) {
  std::map<std::pair<TaskKind, Modality>, std::pair<double, std::size_t>> sums;
  for (const SampleScore& s : scores) {
    auto& [sum, n] = sums[{s.task, s.modality}];
    sum += s.value;
    ++n;
  }
  ScoreTable table;
  std::map<TaskKind, std::pair<double, std::size_t>> rows;
  std::map<Modality, std::pair<double, std::size_t>> cols;
  for (const auto& [key, acc] : sums) {
    const double mean = acc.first / static_cast<double>(acc.second);
    table.cells[key] = ScoreCell{mean, acc.second};
    rows[key.first].first += mean;
    ++rows[key.first].second;
    cols[key.second].first += mean;
    ++cols[key.second].second;
  }
  for (const auto& [t, acc] : rows) table.row_avg[t] = acc.first / acc.second;
  for (const auto& [m, acc] : cols) table.col_avg[m] = acc.first / acc.second;
  return table;
}

double report_value(double value) {
  const double scaled = value * 10000.0;
  const double nudged = scaled + std::abs(scaled) * 1e-9;
  return std::floor(nudged + 0.5) / 100.0;
}

std::string format_report_value(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", report_value(value));
  return buf;
}

std::string_view task_metric_label(TaskKind t) {
  switch (t) {
    case TaskKind::kVG: return "Recall@0.5";
    case TaskKind::kROC: return "Recall";
    case TaskKind::kRC: return "mBMR";
    case TaskKind::kMIA: return "mBMR";
  }
  return "";
}

namespace {

constexpr TaskKind kReportRows[] = {TaskKind::kVG, TaskKind::kROC, TaskKind::kRC,
                                    TaskKind::kMIA};

std::string_view row_label(TaskKind t) {
  return t == TaskKind::kRC ? "RC (mBMR, SPICE-substitute)" : task_name(t);
}

}  // namespace

json score_table_to_json(const ScoreTable& table) {
  json cells = json::array();
  for (const auto& [key, cell] : table.cells) {
    cells.push_back({{"task", task_name(key.first)},
                     {"modality", modality_name(key.second)},
                     {"mean", cell.mean},
                     {"count", cell.count},
                     {"reported", report_value(cell.mean)}});
  }
  json rows = json::object();
  for (const auto& [t, v] : table.row_avg) {
    rows[std::string(task_name(t))] = {{"mean", v}, {"reported", report_value(v)}};
  }
  json cols = json::object();
  for (const auto& [m, v] : table.col_avg) {
    cols[std::string(modality_name(m))] = {{"mean", v},
                                           {"reported", report_value(v)}};
  }
  return {{"metrics",
           {{"VG", "Recall@0.5 (IoU > 0.5)"},
            {"ROC", "Recall"},
            {"RC", "mBMR, SPICE-substitute"},
            {"MIA", "mBMR = mean(BLEU-4, meteor_lite, ROUGE-L)"}}},
          {"cells", cells},
          {"row_avg", rows},
          {"col_avg", cols}};
}

ScoreTable score_table_from_json(const json& j) {
  ScoreTable table;
  try {
    for (const json& c : j.at("cells")) {
      auto t = task_from_name(c.at("task").get<std::string>());
      auto m = modality_from_name(c.at("modality").get<std::string>());
      if (!t || !m) throw Error(ErrorCode::kSchema, "unknown task or modality in report");
      table.cells[{*t, *m}] =
          ScoreCell{c.at("mean").get<double>(), c.at("count").get<std::size_t>()};
    }
    for (const auto& [name, v] : j.at("row_avg").items()) {
      auto t = task_from_name(name);
      if (!t) throw Error(ErrorCode::kSchema, "unknown task '" + name + "'");
      table.row_avg[*t] = v.at("mean").get<double>();
    }
    for (const auto& [name, v] : j.at("col_avg").items()) {
      auto m = modality_from_name(name);
      if (!m) throw Error(ErrorCode::kSchema, "unknown modality '" + name + "'");
      table.col_avg[*m] = v.at("mean").get<double>();
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSchema, std::string("malformed report JSON: ") + e.what());
  }
  return table;
}

std::string render_markdown(const ScoreTable& table) {
  std::ostringstream out;
  out << "| Task | Metric |";
  for (Modality m : kAllModalities) out << ' ' << modality_name(m) << " |";
  out << " Average |\n|---|---|";
  for (std::size_t i = 0; i <= kAllModalities.size(); ++i) out << "---:|";
  out << '\n';
  for (TaskKind t : kReportRows) {
    out << "| " << row_label(t) << " | " << task_metric_label(t) << " |";
    for (Modality m : kAllModalities) {
      auto v = table.cell(t, m);
      out << ' ' << (v ? format_report_value(*v) : "-") << " |";
    }
    auto row = table.row_avg.find(t);
    out << ' ' << (row != table.row_avg.end() ? format_report_value(row->second) : "-")
        << " |\n";
  }
  out << "| Average | - |";
  for (Modality m : kAllModalities) {
    auto col = table.col_avg.find(m);
    out << ' ' << (col != table.col_avg.end() ? format_report_value(col->second) : "-")
        << " |";
  }
  out << " - |\n";
  return out.str();
}

}  // namespace grit
