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

#ifndef GRIT_HARNESS_HPP_
#define GRIT_HARNESS_HPP_

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "grit/conversation_builder.hpp"
#include "grit/metrics.hpp"
#include "json.hpp"

namespace grit {

// Exit statuses of every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitDataViolation = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitBackend = 3;

// Runs `grit-forge <subcommand> [flags]`; args exclude the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

// Reads a JSONL file; blank lines are skipped. Throws Error{kMissingFile} or
// Error{kSchema} naming the offending line.
std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);

// Writes through a sibling temporary file and renames it into place, so a
// failed run leaves no partial output.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

struct Prediction {
  std::string image_id;
  int turn_id = 0;
  std::string answer;  // wire-format markup
};

Prediction prediction_from_json(const nlohmann::json& j);

// Score of one prediction against its gold turn, in [0, 1].
// VG: Recall@0.5 over the grounded boxes; ROC: label recall; RC and MIA:
// mBMR of the plain text. Predictions are parsed leniently.
double score_turn(const Turn& gold, const std::string& predicted_answer,
                  const SynonymTable* synonyms = nullptr);

struct ScoreRun {
  std::vector<SampleScore> samples;
  ScoreTable table;
  std::vector<std::string> unmatched;  // "image_id#turn_id" of extra predictions
  std::size_t missing = 0;             // gold turns without a prediction
};

// Joins on (image_id, turn_id); golds with no prediction score 0. Throws
// Error{kJoinError} on duplicate keys on either side.
ScoreRun score_predictions(const std::vector<ConversationRecord>& golds,
                           const std::vector<Prediction>& preds,
                           const SynonymTable* synonyms = nullptr, std::size_t jobs = 1);

nlohmann::json score_run_to_json(const ScoreRun& run);

// Every problem in one dataset line, as "kind: detail" strings.
std::vector<std::string> validate_record(const nlohmann::json& j);

}  // namespace grit

#endif  // GRIT_HARNESS_HPP_
