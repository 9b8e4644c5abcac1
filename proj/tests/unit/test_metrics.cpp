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

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "grit/error.hpp"
#include "grit/metrics.hpp"
#include "grit/rng.hpp"

namespace grit {
namespace {

using M = Modality;

std::vector<SampleScore> one_per_cell(TaskKind t, const std::vector<std::pair<Modality, double>>& cells) {
  std::vector<SampleScore> out;
  for (const auto& [m, v] : cells) out.push_back({"img", 0, t, m, v / 100.0});
  return out;
}

const std::vector<std::pair<Modality, double>> kVg = {
    {M::kCT, 44.47},        {M::kMR, 29.26},         {M::kXRay, 41.73},  {M::kPET, 56.46},
    {M::kEndoscopy, 53.60}, {M::kDermoscopy, 75.63}, {M::kFundus, 84.15}, {M::kUltrasound, 46.04}};
const std::vector<std::pair<Modality, double>> kRoc = {
    {M::kCT, 34.76},        {M::kMR, 61.79},         {M::kXRay, 53.74},
    {M::kEndoscopy, 60.40}, {M::kDermoscopy, 96.61}, {M::kUltrasound, 84.65}};
const std::vector<std::pair<Modality, double>> kRc = {
    {M::kCT, 41.88},        {M::kMR, 51.69},         {M::kXRay, 37.39},  {M::kPET, 47.95},
    {M::kEndoscopy, 54.07}, {M::kDermoscopy, 77.44}, {M::kFundus, 48.73}, {M::kUltrasound, 82.65}};
const std::vector<std::pair<Modality, double>> kMia = {
    {M::kCT, 47.01},        {M::kMR, 49.35},         {M::kXRay, 37.17},  {M::kPET, 57.15},
    {M::kEndoscopy, 39.91}, {M::kDermoscopy, 72.13}, {M::kFundus, 48.87}, {M::kUltrasound, 65.78}};

TEST(Aggregate, GroundingRowFixture) {
  const auto table = aggregate(one_per_cell(TaskKind::kVG, kVg));
  EXPECT_NEAR(table.row_avg.at(TaskKind::kVG) * 100, 53.9175, 1e-9);
  EXPECT_EQ(report_value(table.row_avg.at(TaskKind::kVG)), 53.92);
}

TEST(Aggregate, ClassificationRowSkipsMissingCells) {
  const auto table = aggregate(one_per_cell(TaskKind::kROC, kRoc));
  EXPECT_FALSE(table.cell(TaskKind::kROC, M::kPET));
  EXPECT_FALSE(table.cell(TaskKind::kROC, M::kFundus));
  EXPECT_NEAR(table.row_avg.at(TaskKind::kROC) * 100, 65.325, 1e-9);
  EXPECT_EQ(format_report_value(table.row_avg.at(TaskKind::kROC)), "65.33");
}

TEST(Aggregate, FullGridRowsAndColumns) {
  std::vector<SampleScore> all;
  for (auto [t, cells] : {std::pair{TaskKind::kVG, kVg}, std::pair{TaskKind::kROC, kRoc},
                          std::pair{TaskKind::kRC, kRc}, std::pair{TaskKind::kMIA, kMia}}) {
    auto part = one_per_cell(t, cells);
    all.insert(all.end(), part.begin(), part.end());
  }
  const auto table = aggregate(all);
  EXPECT_EQ(format_report_value(table.row_avg.at(TaskKind::kRC)), "55.23");
  EXPECT_EQ(format_report_value(table.row_avg.at(TaskKind::kMIA)), "52.17");
  EXPECT_EQ(format_report_value(table.col_avg.at(M::kMR)), "48.02");
  EXPECT_EQ(format_report_value(table.col_avg.at(M::kPET)), "53.85");
  EXPECT_EQ(format_report_value(table.col_avg.at(M::kFundus)), "60.58");
  EXPECT_EQ(format_report_value(table.col_avg.at(M::kUltrasound)), "69.78");
  // Mean of the four CT cells.
  EXPECT_EQ(format_report_value(table.col_avg.at(M::kCT)), "42.03");

  const std::string md = render_markdown(table);
  EXPECT_NE(md.find("| VG | Recall@0.5 | 44.47 | 29.26 | 41.73 | 56.46 | 53.60 | 75.63 | 84.15 | 46.04 | 53.92 |"),
            std::string::npos)
      << md;
  EXPECT_NE(md.find("| ROC | Recall | 34.76 | 61.79 | 53.74 | - | 60.40 | 96.61 | - | 84.65 | 65.33 |"),
            std::string::npos)
      << md;
  EXPECT_NE(md.find("| RC (mBMR, SPICE-substitute) | mBMR |"), std::string::npos);
}

TEST(Aggregate, AveragesUsePresentCellsOnly) {
  SplitMix64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<SampleScore> scores;
    const auto n = rng.between(0, 60);
    for (std::int64_t i = 0; i < n; ++i) {
      scores.push_back({"i", 0, kAllTasks[rng.below(4)], kAllModalities[rng.below(8)], rng.unit()});
    }
    const auto table = aggregate(scores);
    std::size_t total = 0;
    for (const auto& [key, cell] : table.cells) {
      double sum = 0;
      std::size_t count = 0;
      for (const auto& s : scores)
        if (s.task == key.first && s.modality == key.second) {
          sum += s.value;
          ++count;
        }
      EXPECT_EQ(cell.count, count);
      EXPECT_NEAR(cell.mean, sum / count, 1e-12);
      total += count;
    }
    EXPECT_EQ(total, scores.size());
    for (const auto& [t, avg] : table.row_avg) {
      std::vector<double> present;
      for (const auto& [key, cell] : table.cells)
        if (key.first == t) present.push_back(cell.mean);
      ASSERT_FALSE(present.empty());
      EXPECT_NEAR(avg, std::accumulate(present.begin(), present.end(), 0.0) / present.size(), 1e-12);
    }
    for (const auto& [m, avg] : table.col_avg) {
      std::vector<double> present;
      for (const auto& [key, cell] : table.cells)
        if (key.second == m) present.push_back(cell.mean);
      EXPECT_NEAR(avg, std::accumulate(present.begin(), present.end(), 0.0) / present.size(), 1e-12);
    }
  }
}

TEST(Aggregate, EmptyInputRendersDashes) {
  const auto table = aggregate({});
  EXPECT_TRUE(table.cells.empty());
  const std::string md = render_markdown(table);
  EXPECT_NE(md.find("| VG | Recall@0.5 | - | - | - | - | - | - | - | - | - |"), std::string::npos);
}

TEST(ReportValue, RoundsHalfUpAtTwoDecimals) {
  EXPECT_EQ(format_report_value(0.65325), "65.33");
  EXPECT_EQ(format_report_value(0.539175), "53.92");
  EXPECT_EQ(format_report_value(0.12344), "12.34");
  EXPECT_EQ(format_report_value(1.0), "100.00");
  EXPECT_EQ(format_report_value(0.0), "0.00");
}

TEST(ScoreTableJson, RoundTripKeepsFullPrecision) {
  std::vector<SampleScore> scores = {{"a", 0, TaskKind::kVG, M::kCT, 1.0 / 3.0},
                                     {"b", 1, TaskKind::kMIA, M::kFundus, 0.123456789}};
  const auto table = aggregate(scores);
  const auto back = score_table_from_json(score_table_to_json(table));
  EXPECT_EQ(back.cell(TaskKind::kVG, M::kCT), 1.0 / 3.0);
  EXPECT_EQ(back.row_avg, table.row_avg);
  EXPECT_EQ(back.col_avg, table.col_avg);
  EXPECT_EQ(render_markdown(back), render_markdown(table));
}

TEST(RocRecall, Normalization) {
  EXPECT_EQ(roc_recall("Liver ", "liver"), 1);
  EXPECT_EQ(roc_recall("kidney", "liver"), 0);
  EXPECT_EQ(roc_recall("  Optic   Disc.", "optic disc"), 1);
  SynonymTable syn;
  syn.add("left lung", "lung (left)");
  EXPECT_EQ(roc_recall("left lung", "lung (left)", &syn), 1);
  EXPECT_EQ(roc_recall("left lung", "lung (left)"), 0);
  EXPECT_THROW(roc_recall("x", "  "), Error);
}

TEST(RocRecall, SynonymJson) {
  const auto syn = SynonymTable::from_json(nlohmann::json{{"left lung", {"lung (left)", "L lung"}}});
  EXPECT_EQ(roc_recall("l lung", "Left Lung", &syn), 1);
  EXPECT_THROW(SynonymTable::from_json(nlohmann::json::array()), Error);
}

std::vector<LabeledNormBox> boxes(std::initializer_list<LabeledNormBox> l) { return l; }

TEST(RecallAt, Examples) {
  const LabeledNormBox g{"liver", {0.1, 0.1, 0.5, 0.5}};
  EXPECT_EQ(recall_at(boxes({g}), boxes({g})), 1.0);
  EXPECT_EQ(recall_at(boxes({}), boxes({g})), 0.0);
  // IoU 0.6 with the first gold, 0 with the second.
  const LabeledNormBox g1{"a", {0.0, 0.0, 0.5, 0.2}};
  const LabeledNormBox g2{"a", {0.6, 0.6, 0.9, 0.9}};
  const LabeledNormBox p{"a", {0.0, 0.0, 0.3, 0.2}};
  EXPECT_NEAR(iou(p.box, g1.box), 0.6, 1e-12);
  EXPECT_EQ(recall_at(boxes({p}), boxes({g1, g2})), 0.5);
  try {
    recall_at(boxes({p}), boxes({}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyGold);
  }
}

TEST(RecallAt, StrictThresholdAtExactlyHalf) {
  const std::vector<PhraseBox> gold = {{"liver", {0, 0, 200, 100}}};
  const std::vector<PhraseBox> pred = {{"liver", {0, 0, 100, 100}}};
  EXPECT_EQ(iou(pred[0].box, gold[0].box), 0.5);
  EXPECT_EQ(recall_at(pred, gold), 0.0);
  const std::vector<PhraseBox> better = {{"liver", {0, 0, 101, 100}}};
  EXPECT_EQ(recall_at(better, gold), 1.0);
}

TEST(RecallAt, PhrasesMustMatchUnlessIgnored) {
  const std::vector<PhraseBox> gold = {{"Liver", {0, 0, 500, 500}}};
  const std::vector<PhraseBox> same = {{"liver.", {0, 0, 500, 500}}};
  const std::vector<PhraseBox> other = {{"kidney", {0, 0, 500, 500}}};
  EXPECT_EQ(recall_at(same, gold), 1.0);
  EXPECT_EQ(recall_at(other, gold), 0.0);
  MatchOptions opt;
  opt.ignore_phrase = true;
  EXPECT_EQ(recall_at(other, gold, kRecallIouThreshold, opt), 1.0);
}

TEST(RecallAt, GreedyIsOneToOne) {
  // One prediction cannot satisfy two identical golds.
  const std::vector<PhraseBox> gold = {{"a", {0, 0, 100, 100}}, {"a", {0, 0, 100, 100}}};
  const std::vector<PhraseBox> pred = {{"a", {0, 0, 100, 100}}};
  EXPECT_EQ(recall_at(pred, gold), 0.5);
  const std::vector<PhraseBox> two = {{"a", {0, 0, 100, 100}}, {"a", {1, 1, 100, 100}}};
  EXPECT_EQ(recall_at(two, gold), 1.0);
}

// Exhaustive optimum over all one-to-one matchings bounds the greedy result
// from above; on a tiny grid it is usually reached.
TEST(RecallAt, GreedyNeverBeatsBestMatching) {
  SplitMix64 rng(12);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<PhraseBox> gold, pred;
    const auto ng = rng.between(1, 4);
    const auto np = rng.between(0, 4);
    auto draw = [&] {
      const int x0 = static_cast<int>(rng.between(0, 6)) * 100;
      const int y0 = static_cast<int>(rng.between(0, 6)) * 100;
      return QuantBox{x0, y0, x0 + static_cast<int>(rng.between(1, 4)) * 100,
                      y0 + static_cast<int>(rng.between(1, 4)) * 100};
    };
    for (std::int64_t i = 0; i < ng; ++i) gold.push_back({"a", draw()});
    for (std::int64_t i = 0; i < np; ++i) pred.push_back({"a", draw()});
    std::vector<int> perm(std::max<std::size_t>(pred.size(), gold.size()));
    std::iota(perm.begin(), perm.end(), 0);
    std::size_t best = 0;
    do {
      std::size_t hits = 0;
      for (std::size_t g = 0; g < gold.size(); ++g) {
        const auto p = static_cast<std::size_t>(perm[g]);
        if (p < pred.size() && iou(pred[p].box, gold[g].box) > 0.5) ++hits;
      }
      best = std::max(best, hits);
    } while (std::next_permutation(perm.begin(), perm.end()));
    const double r = recall_at(pred, gold);
    EXPECT_LE(r, static_cast<double>(best) / gold.size() + 1e-12);
    EXPECT_GE(r, 0.0);
  }
}

}  // namespace
}  // namespace grit
