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

#include <filesystem>
#include <fstream>

#include "grit/corpus_ingest.hpp"
#include "grit/error.hpp"
#include "grit/harness.hpp"
#include "grit/synth.hpp"

namespace grit {
namespace {

namespace fs = std::filesystem;

TEST(SynthCase, ShapeOfOutput) {
  SynthOptions opt;
  opt.seed = 11;
  opt.min_slices = 2;
  opt.max_slices = 4;
  for (std::size_t c = 0; c < 32; ++c) {
    const auto slices = synth_case(opt, c);
    ASSERT_GE(slices.size(), 2u);
    ASSERT_LE(slices.size(), 4u);
    for (std::size_t s = 0; s < slices.size(); ++s) {
      const auto& sl = slices[s];
      EXPECT_EQ(sl.modality, kAllModalities[c % 8]);
      EXPECT_EQ(sl.image_id, sl.case_id + "_s0" + std::to_string(s));
      EXPECT_FALSE(sl.shapes.empty());
      for (const auto& sh : sl.shapes) {
        EXPECT_GE(sh.extent.x0, 0);
        EXPECT_LT(sh.extent.x1, opt.width);
        EXPECT_LE(sh.extent.x0, sh.extent.x1);
        EXPECT_LT(sh.extent.y1, opt.height);
        EXPECT_GE(sh.label, 1);
        EXPECT_LE(sh.label, static_cast<int>(sl.categories.size()));
        EXPECT_EQ(sl.categories[sh.label - 1].name, sh.category);
      }
    }
  }
  EXPECT_EQ(synth_case(opt, 3)[0].case_id, "case00003");
}

TEST(SynthCase, DeterministicPerSeed) {
  SynthOptions a;
  a.seed = 5;
  a.cases = 16;
  const auto x = synth_stub_metas(a);
  EXPECT_EQ(x, synth_stub_metas(a));
  a.seed = 6;
  EXPECT_NE(x, synth_stub_metas(a));
}

TEST(SynthCase, RejectsBadOptions) {
  SynthOptions o;
  o.min_slices = 0;
  EXPECT_THROW(synth_case(o, 0), Error);
  o = {};
  o.min_slices = 5;
  o.max_slices = 4;
  EXPECT_THROW(synth_case(o, 0), Error);
  o = {};
  o.width = 4;
  EXPECT_THROW(synth_case(o, 0), Error);
}

class SynthFiles : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() / ("grit_synth_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
  }
  void TearDown() override { fs::remove_all(dir); }
  fs::path dir;
};

// Ingested boxes sit inside the hull of the drawn extents of their label;
// occlusion can only shrink them.
TEST_F(SynthFiles, IngestAgreesWithDrawnShapes) {
  SynthOptions opt;
  opt.seed = 2;
  opt.cases = 16;
  const auto corpus = write_synth_corpus(dir, opt);
  EXPECT_EQ(corpus.cases, 16u);
  const auto stubs = synth_stub_metas(opt);
  ASSERT_EQ(corpus.images, stubs.size());
  const auto lines = read_jsonl(corpus.manifest);
  ASSERT_EQ(lines.size(), stubs.size());
  ExtractOptions eo;
  eo.min_area = 1;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto entry = parse_manifest_entry(lines[i], dir);
    EXPECT_TRUE(fs::exists(entry.image_path));
    const auto meta = ingest_entry(entry, eo);
    const auto& stub = stubs[i];
    EXPECT_EQ(meta.image_id, stub.image_id);
    EXPECT_EQ(meta.case_id, stub.case_id);
    EXPECT_EQ(meta.modality, stub.modality);
    ASSERT_FALSE(meta.objects.empty());
    for (const auto& o : meta.objects) {
      NormBox hull{1, 1, 0, 0};
      for (const auto& s : stub.objects) {
        if (s.category != o.category) continue;
        hull = {std::min(hull.x0, s.box.x0), std::min(hull.y0, s.box.y0),
                std::max(hull.x1, s.box.x1), std::max(hull.y1, s.box.y1)};
      }
      EXPECT_GE(o.box.x0, hull.x0 - 1e-12) << meta.image_id << " " << o.category;
      EXPECT_GE(o.box.y0, hull.y0 - 1e-12);
      EXPECT_LE(o.box.x1, hull.x1 + 1e-12);
      EXPECT_LE(o.box.y1, hull.y1 + 1e-12);
    }
  }
}

TEST_F(SynthFiles, SameSeedSameBytes) {
  SynthOptions opt;
  opt.seed = 9;
  opt.cases = 4;
  write_synth_corpus(dir / "a", opt);
  write_synth_corpus(dir / "b", opt);
  for (const auto& e : fs::recursive_directory_iterator(dir / "a")) {
    if (!e.is_regular_file()) continue;
    const auto other = dir / "b" / fs::relative(e.path(), dir / "a");
    std::ifstream x(e.path(), std::ios::binary), y(other, std::ios::binary);
    const std::string sx((std::istreambuf_iterator<char>(x)), {});
    const std::string sy((std::istreambuf_iterator<char>(y)), {});
    EXPECT_EQ(sx, sy) << e.path();
  }
}

std::vector<ConversationRecord> gold_set() {
  SynthOptions opt;
  opt.seed = 4;
  opt.cases = 16;
  TemplateBackend backend;
  constexpr TaskKind tasks[] = {TaskKind::kROC, TaskKind::kRC, TaskKind::kVG, TaskKind::kMIA};
  std::vector<ConversationRecord> out;
  for (const auto& m : synth_stub_metas(opt)) {
    out.push_back(build_record(m, template_caption(m), tasks, backend, {}));
  }
  return out;
}

TEST(SynthPredictions, OnePerTurnAndDeterministic) {
  const auto golds = gold_set();
  const auto p = synth_predictions(golds, 1);
  std::size_t turns = 0;
  for (const auto& r : golds) turns += r.turns.size();
  EXPECT_EQ(p.size(), turns);
  EXPECT_EQ(p, synth_predictions(golds, 1));
  EXPECT_NE(p, synth_predictions(golds, 2));
  for (const auto& j : p) {
    const auto pred = prediction_from_json(j);
    EXPECT_TRUE(parse(pred.answer, ParseMode::kStrict).issues.empty());
  }
}

TEST(SynthPredictions, NoiseRatesShapeScores) {
  const auto golds = gold_set();
  PredictionNoise clean{1.0, 1.0, 0.0};
  std::vector<Prediction> preds;
  for (const auto& j : synth_predictions(golds, 3, clean)) preds.push_back(prediction_from_json(j));
  const auto run = score_predictions(golds, preds);
  std::size_t k = 0;
  for (const auto& rec : golds) {
    for (const auto& t : rec.turns) {
      const double v = run.samples.at(k++).value;
      if (t.task == TaskKind::kROC) EXPECT_EQ(v, 1.0);
      if (t.task == TaskKind::kRC || t.task == TaskKind::kMIA) {
        const auto text = plain_text(t.answer);
        EXPECT_EQ(v, mbmr(text, text));
      }
    }
  }
  PredictionNoise broken{0.0, 0.0, 0.9};
  preds.clear();
  for (const auto& j : synth_predictions(golds, 3, broken)) preds.push_back(prediction_from_json(j));
  const auto bad = score_predictions(golds, preds);
  EXPECT_EQ(bad.table.row_avg.at(TaskKind::kROC), 0.0);
  EXPECT_LT(bad.table.row_avg.at(TaskKind::kVG), run.table.row_avg.at(TaskKind::kVG));
  EXPECT_LT(bad.table.row_avg.at(TaskKind::kMIA), run.table.row_avg.at(TaskKind::kMIA));
}

}  // namespace
}  // namespace grit
