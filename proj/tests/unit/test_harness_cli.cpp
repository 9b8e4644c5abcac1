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
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "grit/harness.hpp"
#include "grit/synth.hpp"

namespace grit {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), {});
}

std::size_t count_lines(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) n += !line.empty();
  return n;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("grit_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  int run(std::vector<std::string> args) {
    out.str("");
    err.str("");
    return run_cli(args, out, err);
  }
  std::string p(const std::string& name) const { return (dir / name).string(); }

  // 5 cases x 2 slices, ingested and turned into a dataset.
  void build_small_dataset() {
    ASSERT_EQ(run({"synth", "--out", p("corpus"), "--seed", "1", "--cases", "5", "--min-slices", "2",
                   "--max-slices", "2"}),
              kExitOk)
        << err.str();
    ASSERT_EQ(run({"ingest", "--manifest", p("corpus/manifest.jsonl"), "--out", p("meta.jsonl")}), kExitOk)
        << err.str();
    ASSERT_EQ(run({"gen", "--meta", p("meta.jsonl"), "--out", p("data.jsonl")}), kExitOk) << err.str();
  }

  fs::path dir;
  std::ostringstream out, err;
};

TEST_F(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run({}), kExitConfig);
  EXPECT_EQ(run({"frobnicate"}), kExitConfig);
  EXPECT_EQ(run({"split", "--meta", p("x")}), kExitConfig);  // --out missing
  EXPECT_EQ(run({"split", "--meta", p("nope.jsonl"), "--out", p("s.json")}), kExitConfig);
  EXPECT_NE(err.str().find("MissingFile"), std::string::npos) << err.str();
  EXPECT_EQ(run({"gen", "--meta", p("m"), "--out", p("o"), "--backend", "magic"}), kExitConfig);
  EXPECT_EQ(run({"--help"}), kExitOk);
}

TEST_F(Cli, TenImagesGiveFortyValidTurns) {
  build_small_dataset();
  EXPECT_EQ(count_lines(p("meta.jsonl")), 10u);
  const auto stats = json::parse(out.str());
  EXPECT_EQ(stats.at("images"), 10);
  EXPECT_EQ(stats.at("turns"), 40);
  for (const char* t : {"ROC", "RC", "VG", "MIA"}) EXPECT_EQ(stats["turns_per_task"][t], 10);
  EXPECT_EQ(run({"validate", p("data.jsonl")}), kExitOk) << out.str();
  EXPECT_NE(out.str().find("10 records, 0 violations"), std::string::npos);
}

TEST_F(Cli, TaskSubsetAndSplitRouting) {
  build_small_dataset();
  ASSERT_EQ(run({"split", "--meta", p("meta.jsonl"), "--out", p("split.json"), "--test-fraction", "0.3"}),
            kExitOk);
  ASSERT_EQ(run({"gen", "--meta", p("meta.jsonl"), "--out", p("train.jsonl"), "--split", p("split.json"),
                 "--test-out", p("test.jsonl"), "--tasks", "VG,MIA", "--stats", p("stats.json")}),
            kExitOk)
      << err.str();
  const auto stats = json::parse(slurp(p("stats.json")));
  EXPECT_EQ(stats.at("turns"), 20);
  EXPECT_EQ(count_lines(p("train.jsonl")) + count_lines(p("test.jsonl")), 10u);
  EXPECT_GT(count_lines(p("test.jsonl")), 0u);
  const auto split = split_from_json(json::parse(slurp(p("split.json"))));
  for (const auto& j : read_jsonl(p("test.jsonl"))) EXPECT_TRUE(split.is_test(j["case_id"]));
  for (const auto& j : read_jsonl(p("train.jsonl"))) EXPECT_FALSE(split.is_test(j["case_id"]));
  EXPECT_EQ(run({"gen", "--meta", p("meta.jsonl"), "--out", p("x.jsonl"), "--tasks", "VG,XX"}), kExitConfig);
  EXPECT_EQ(run({"gen", "--meta", p("meta.jsonl"), "--out", p("x.jsonl"), "--test-out", p("y")}), kExitConfig);
}

TEST_F(Cli, CorruptMaskIsReportedPerLine) {
  ASSERT_EQ(run({"synth", "--out", p("corpus"), "--cases", "3", "--min-slices", "1", "--max-slices", "1"}),
            kExitOk);
  const auto first = read_jsonl(p("corpus/manifest.jsonl")).at(0);
  std::ofstream(dir / "corpus" / first["mask_path"].get<std::string>(), std::ios::trunc) << "not a png";
  EXPECT_EQ(run({"ingest", "--manifest", p("corpus/manifest.jsonl"), "--out", p("meta.jsonl")}),
            kExitDataViolation);
  EXPECT_NE(err.str().find("line 1"), std::string::npos) << err.str();
  EXPECT_EQ(count_lines(p("meta.jsonl")), 2u);
}

TEST_F(Cli, SampleCapsEachCaseSeparately) {
  ASSERT_EQ(run({"synth", "--out", p("corpus"), "--cases", "6", "--min-slices", "5", "--max-slices", "5"}),
            kExitOk);
  ASSERT_EQ(run({"ingest", "--manifest", p("corpus/manifest.jsonl"), "--out", p("meta.jsonl"), "--sample",
                 "--max-per-case", "2", "--dedup-threshold", "0.99"}),
            kExitOk)
      << err.str();
  std::map<std::string, int> per_case;
  for (const auto& j : read_jsonl(p("meta.jsonl"))) ++per_case[j["case_id"].get<std::string>()];
  EXPECT_EQ(per_case.size(), 6u);
  for (const auto& [c, n] : per_case) {
    EXPECT_GE(n, 1) << c;
    EXPECT_LE(n, 2) << c;
  }
}

TEST_F(Cli, EmptyManifestWarnsButSucceeds) {
  std::ofstream(dir / "empty.jsonl").close();
  EXPECT_EQ(run({"ingest", "--manifest", p("empty.jsonl"), "--out", p("meta.jsonl")}), kExitOk);
  EXPECT_NE(err.str().find("warning"), std::string::npos);
  EXPECT_EQ(count_lines(p("meta.jsonl")), 0u);
}

TEST_F(Cli, OfflineColdCacheFailsWithoutOutput) {
  build_small_dataset();
  EXPECT_EQ(run({"caption", "--meta", p("meta.jsonl"), "--out", p("cap.jsonl"), "--backend", "llm",
                 "--offline", "--cache-dir", p("cache")}),
            kExitBackend);
  EXPECT_NE(err.str().find("OfflineMiss"), std::string::npos) << err.str();
  EXPECT_FALSE(fs::exists(p("cap.jsonl")));
  EXPECT_FALSE(fs::exists(p("cap.jsonl.partial")));

  // Template captions, then an llm gen offline: same outcome.
  ASSERT_EQ(run({"caption", "--meta", p("meta.jsonl"), "--out", p("cap.jsonl")}), kExitOk);
  EXPECT_EQ(run({"gen", "--meta", p("meta.jsonl"), "--captions", p("cap.jsonl"), "--out", p("llm.jsonl"),
                 "--backend", "llm", "--offline", "--cache-dir", p("cache")}),
            kExitBackend);
  EXPECT_FALSE(fs::exists(p("llm.jsonl")));
  EXPECT_EQ(run({"gen", "--meta", p("meta.jsonl"), "--out", p("llm.jsonl"), "--backend", "llm"}),
            kExitConfig);
}

TEST_F(Cli, LlmWithoutEndpointIsBackendUnavailable) {
  build_small_dataset();
  EXPECT_EQ(run({"caption", "--meta", p("meta.jsonl"), "--out", p("cap.jsonl"), "--backend", "llm",
                 "--cache-dir", p("cache")}),
            kExitBackend);
  EXPECT_NE(err.str().find("BackendUnavailable"), std::string::npos) << err.str();
}

json good_record() {
  return json{{"image_id", "i"}, {"case_id", "c"}, {"modality", "CT"}, {"width", 10},
              {"height", 10}, {"caption", "cap"},
              {"turns", {{{"turn_id", 0}, {"task", "VG"}, {"question", "Where is the liver?"},
                          {"answer", "<ref>liver</ref><box>(1,2),(300,400)</box>"}}}}};
}

TEST_F(Cli, ValidateFlagsOutOfRangeBox) {
  auto bad = good_record();
  bad["image_id"] = "j";
  bad["turns"][0]["answer"] = "<ref>liver</ref><box>(1,2),(300,1400)</box>";
  std::ofstream(dir / "d.jsonl") << good_record().dump() << '\n' << bad.dump() << '\n';
  EXPECT_EQ(run({"validate", "--in", p("d.jsonl")}), kExitDataViolation);
  const std::string o = out.str();
  EXPECT_NE(o.find("line 2: OutOfRange: turn 0 answer"), std::string::npos) << o;
  EXPECT_NE(o.find("2 records, 1 violations"), std::string::npos) << o;
}

TEST(ValidateRecord, Violations) {
  EXPECT_TRUE(validate_record(good_record()).empty());
  auto r = good_record();
  r["turns"][0]["task"] = "MIA";
  auto v = validate_record(r);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].rfind("task-role:", 0), 0u) << v[0];
  r = good_record();
  r["turns"][0]["turn_id"] = 3;
  EXPECT_EQ(validate_record(r).size(), 1u);
  r = good_record();
  r["modality"] = "Sonar";
  EXPECT_EQ(validate_record(r).size(), 1u);
  r = good_record();
  r["caption"] = "a <ref>x</ref>";
  EXPECT_EQ(validate_record(r).size(), 1u);
  r = good_record();
  r["turns"][0]["answer"] = "<box>(1,2),(3,4)</box>";
  v = validate_record(r);
  ASSERT_FALSE(v.empty());
  EXPECT_EQ(v[0].rfind("BoxWithoutRef", 0), 0u) << v[0];
  EXPECT_FALSE(validate_record(json::array()).empty());
  r = good_record();
  r["turns"] = json::array();
  EXPECT_EQ(validate_record(r).size(), 1u);
}

TEST_F(Cli, ScoreIdenticalEmptyAndDuplicate) {
  build_small_dataset();
  std::ofstream preds(dir / "pred.jsonl");
  for (const auto& j : read_jsonl(p("data.jsonl"))) {
    for (const auto& t : j["turns"]) {
      preds << json{{"image_id", j["image_id"]}, {"turn_id", t["turn_id"]}, {"answer", t["answer"]}}.dump()
            << '\n';
    }
  }
  preds.close();
  ASSERT_EQ(run({"score", "--pred", p("pred.jsonl"), "--gold", p("data.jsonl"), "--out", p("s.json")}), kExitOk)
      << err.str();
  auto s = json::parse(slurp(p("s.json")));
  const auto table = score_table_from_json(s["table"]);
  EXPECT_EQ(table.row_avg.at(TaskKind::kVG), 1.0);
  EXPECT_EQ(table.row_avg.at(TaskKind::kROC), 1.0);
  EXPECT_EQ(s["samples"], 40);
  EXPECT_EQ(s["missing_predictions"], 0);
  EXPECT_EQ(slurp(p("s.md")), render_markdown(table));

  ASSERT_EQ(run({"report", p("s.json"), "--out", p("r.md")}), kExitOk);
  EXPECT_EQ(slurp(p("r.md")), render_markdown(table));

  std::ofstream(dir / "none.jsonl").close();
  ASSERT_EQ(run({"score", "--pred", p("none.jsonl"), "--gold", p("data.jsonl"), "--out", p("z.json")}),
            kExitOk);
  s = json::parse(slurp(p("z.json")));
  EXPECT_EQ(s["missing_predictions"], 40);
  for (const auto& [t, avg] : score_table_from_json(s["table"]).row_avg) EXPECT_EQ(avg, 0.0);

  const auto first = read_jsonl(p("pred.jsonl")).at(0);
  std::ofstream(dir / "pred.jsonl", std::ios::app) << first.dump() << '\n';
  EXPECT_EQ(run({"score", "--pred", p("pred.jsonl"), "--gold", p("data.jsonl"), "--out", p("d.json")}),
            kExitDataViolation);
  EXPECT_NE(err.str().find("JoinError"), std::string::npos) << err.str();
  EXPECT_FALSE(fs::exists(p("d.json")));
}

TEST_F(Cli, ExtraPredictionsAreListed) {
  build_small_dataset();
  std::ofstream(dir / "pred.jsonl") << json{{"image_id", "ghost"}, {"turn_id", 0}, {"answer", "x"}}.dump()
                                    << '\n';
  ASSERT_EQ(run({"score", "--pred", p("pred.jsonl"), "--gold", p("data.jsonl"), "--out", p("s.json")}),
            kExitOk);
  EXPECT_EQ(json::parse(slurp(p("s.json")))["unmatched_predictions"], json::array({"ghost#0"}));
}

TEST_F(Cli, BinaryExitStatus) {
  const std::string bin = GRIT_FORGE_BIN;
  auto status = [&](const std::string& args) {
    const int raw = std::system((bin + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  };
  EXPECT_EQ(status("validate " + p("missing.jsonl")), 2);
  EXPECT_EQ(status("synth --out " + p("c") + " --cases 2"), 0);
  EXPECT_EQ(status("ingest --manifest " + p("c/manifest.jsonl") + " --out " + p("m.jsonl")), 0);
  EXPECT_EQ(status("caption --meta " + p("m.jsonl") + " --out " + p("x") + " --backend llm --offline --cache-dir " +
                   p("cache")),
            3);
}

}  // namespace
}  // namespace grit
