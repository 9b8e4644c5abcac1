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

#ifndef GRIT_METRICS_HPP_
#define GRIT_METRICS_HPP_

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "grit/grounding_markup.hpp"
#include "grit/text_metrics.hpp"
#include "grit/types.hpp"
#include "json.hpp"

namespace grit {

// Area of intersection over area of union; 0 when the union is empty.
double iou(const NormBox& a, const NormBox& b);
// Computed in integer grid units, so ratios such as exactly 1/2 are exact.
double iou(const QuantBox& a, const QuantBox& b);

// Maps label variants to a canonical label. Keys and values are stored in
// normalized form.
class SynonymTable {
 public:
  SynonymTable() = default;

  void add(std::string_view canonical, std::string_view variant);
  // Rewrites a normalized label to its canonical form when one is known.
  std::string lookup(const std::string& normalized) const;
  bool empty() const { return map_.empty(); }

  // JSON object {"canonical": ["variant", ...], ...}.
  static SynonymTable from_json(const nlohmann::json& j);
  static SynonymTable load(const std::filesystem::path& path);

 private:
  std::map<std::string, std::string> map_;
};

// Case-fold, trim, collapse inner whitespace, strip trailing punctuation and
// apply `synonyms` when given.
std::string normalize_label(std::string_view label,
                            const SynonymTable* synonyms = nullptr);

// 1 iff the labels agree after normalization. Throws
// Error{kInvalidArgument} for an empty gold label.
int roc_recall(std::string_view pred_label, std::string_view gold_label,
               const SynonymTable* synonyms = nullptr);

struct LabeledNormBox {
  std::string phrase;
  NormBox box;
};

struct MatchOptions {
  // Score geometry only; phrases are not compared.
  bool ignore_phrase = false;
  const SynonymTable* synonyms = nullptr;
};

inline constexpr double kRecallIouThreshold = 0.5;

// Greedy one-to-one matching in descending IoU over phrase-compatible pairs;
// returns the fraction of golds whose match has IoU strictly above
// `threshold`. The matching itself does not depend on `threshold`. Throws
// Error{kEmptyGold} when `golds` is empty.
double recall_at(std::span<const LabeledNormBox> preds,
                 std::span<const LabeledNormBox> golds,
                 double threshold = kRecallIouThreshold,
                 const MatchOptions& options = {});
double recall_at(std::span<const PhraseBox> preds,
                 std::span<const PhraseBox> golds,
                 double threshold = kRecallIouThreshold,
                 const MatchOptions& options = {});

struct SampleScore {
  std::string image_id;
  int turn_id = 0;
  TaskKind task = TaskKind::kVG;
  Modality modality = Modality::kCT;
  double value = 0.0;  // [0, 1]
};

struct ScoreCell {
  double mean = 0.0;
  std::size_t count = 0;
};

struct ScoreTable {
  std::map<std::pair<TaskKind, Modality>, ScoreCell> cells;
  std::map<TaskKind, double> row_avg;
  std::map<Modality, double> col_avg;

  std::optional<double> cell(TaskKind t, Modality m) const;
};

// Cells are sample means; row and column averages use present cells only.
ScoreTable aggregate(std::span<const SampleScore> scores);

// value * 100 rounded half up to two decimals. A 1e-9 relative nudge keeps
// decimal ties such as 65.325 (not representable in binary) rounding up.
double report_value(double value);
std::string format_report_value(double value);

// Row labels used in rendered reports.
std::string_view task_metric_label(TaskKind t);

nlohmann::json score_table_to_json(const ScoreTable& table);
ScoreTable score_table_from_json(const nlohmann::json& j);

// Task x modality grid in the order VG, ROC, RC, MIA with an Average row and
// column; absent cells render as "-".
std::string render_markdown(const ScoreTable& table);

}  // namespace grit

#endif  // GRIT_METRICS_HPP_
