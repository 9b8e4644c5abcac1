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

#ifndef GRIT_CONVERSATION_BUILDER_HPP_
#define GRIT_CONVERSATION_BUILDER_HPP_

#include <atomic>
#include <cstddef>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "grit/corpus_ingest.hpp"
#include "grit/grounding_markup.hpp"
#include "grit/sampling_split.hpp"
#include "grit/types.hpp"
#include "json.hpp"

namespace grit {

class LlmGateway;

struct Turn {
  int turn_id = 0;
  TaskKind task = TaskKind::kMIA;
  MarkedText question;
  MarkedText answer;
  friend bool operator==(const Turn&, const Turn&) = default;
};

struct ConversationRecord {
  std::string image_id;
  std::string case_id;
  Modality modality = Modality::kCT;
  int width = 0;
  int height = 0;
  std::string caption;
  std::vector<Turn> turns;
  friend bool operator==(const ConversationRecord&, const ConversationRecord&) = default;
};

// Task-role rules: ROC/RC questions refer to a region, VG answers ground
// one, MIA carries no region on either side. Returns one message per broken
// rule; empty when the turn is well formed.
std::vector<std::string> turn_violations(const Turn& turn);

nlohmann::json conversation_to_json(const ConversationRecord& rec);
// Markup fields are strict-parsed; throws Error{kSchema} or MarkupError.
ConversationRecord conversation_from_json(const nlohmann::json& j);

struct TurnOptions {
  // Region tasks emit one turn per object (ROC, RC) or per category (VG), up
  // to this many.
  std::size_t max_objects_per_task = 1;
};

// "A {orientation} {modality} image of the {region} showing {categories}.",
// with "An" before a vowel sound.
// Empty orientation or region are left out.
std::string template_caption(const MetaRecord& meta);

// Strips reserved markup tokens and image markers so free text can be
// embedded safely.
std::string sanitize_text(std::string_view text);

class GenerationBackend {
 public:
  virtual ~GenerationBackend() = default;
  virtual std::string_view name() const = 0;
  virtual std::string caption(const MetaRecord& meta) = 0;
  // `tasks` is already filtered to what the meta supports.
  virtual std::vector<Turn> turns(const MetaRecord& meta, const std::string& caption,
                                  std::span<const TaskKind> tasks,
                                  const TurnOptions& options) = 0;
};

// Offline, deterministic phrasing chosen by a hash of image id and task.
class TemplateBackend : public GenerationBackend {
 public:
  std::string_view name() const override { return "template"; }
  std::string caption(const MetaRecord& meta) override;
  std::vector<Turn> turns(const MetaRecord& meta, const std::string& caption,
                          std::span<const TaskKind> tasks,
                          const TurnOptions& options) override;
};

// Versioned prompt texts shipped in prompts/.
struct PromptSet {
  std::string version;
  std::string caption_system;
  std::string conversation_system;

  static PromptSet builtin();
};

// Phrasing from a chat model. Region placeholders in the model output are
// replaced by markup built from the meta boxes, so grounded coordinates
// never pass through the model. Turns that fail validation fall back to the
// template phrasing and are counted.
class LlmBackend : public GenerationBackend {
 public:
  LlmBackend(LlmGateway& gateway, PromptSet prompts, double temperature = 0.2);
  std::string_view name() const override { return "llm"; }
  std::string caption(const MetaRecord& meta) override;
  std::vector<Turn> turns(const MetaRecord& meta, const std::string& caption,
                          std::span<const TaskKind> tasks,
                          const TurnOptions& options) override;
  std::size_t rejected_turns() const { return rejected_.load(); }

 private:
  LlmGateway& gateway_;
  PromptSet prompts_;
  double temperature_;
  std::atomic<std::size_t> rejected_{0};
};

// Errors: kBackendUnavailable (from the backend).
std::string build_caption(const MetaRecord& meta, GenerationBackend& backend);

// One turn per requested task (per target with max_objects_per_task > 1),
// turn ids dense from 0. Throws Error{kNoObjectsForRegionTask} when a region
// task is requested for an objectless meta and Error{kInvalidArgument} for an
// empty task list.
std::vector<Turn> build_turns(const MetaRecord& meta, const std::string& caption,
                              std::span<const TaskKind> tasks,
                              GenerationBackend& backend,
                              const TurnOptions& options = {});

struct DatasetStats {
  std::size_t images = 0;
  std::size_t turns = 0;
  std::map<TaskKind, std::size_t> turns_per_task;
  std::size_t train_images = 0;
  std::size_t test_images = 0;
  std::size_t train_turns = 0;
  std::size_t test_turns = 0;
  std::size_t skipped_region_tasks = 0;
  std::vector<std::string> skip_log;

  nlohmann::json to_json() const;
};

// Streams records as JSONL. Without a split every record goes to `train`;
// with one, records route by case and a case missing from the split raises
// Error{kSplitCoverageGap}.
class DatasetWriter {
 public:
  DatasetWriter(std::ostream& train, std::ostream* test = nullptr,
                const SplitAssignment* split = nullptr);

  void add(const ConversationRecord& rec);
  void note_skip(const std::string& message);
  const DatasetStats& stats() const { return stats_; }

 private:
  std::ostream& train_;
  std::ostream* test_;
  const SplitAssignment* split_;
  DatasetStats stats_;
};

// Region tasks are dropped (and logged) for objectless metas; every other
// requested task is kept in order.
std::vector<TaskKind> eligible_tasks(const MetaRecord& meta,
                                     std::span<const TaskKind> tasks);

// Builds one record per meta. Throws Error{kInvalidArgument} when a meta has
// no caption.
ConversationRecord build_record(const MetaRecord& meta, const std::string& caption,
                                std::span<const TaskKind> tasks,
                                GenerationBackend& backend,
                                const TurnOptions& options,
                                std::vector<std::string>* skips = nullptr);

struct DatasetBuild {
  std::string train_jsonl;
  std::string test_jsonl;
  DatasetStats stats;
};

DatasetBuild build_dataset(std::span<const MetaRecord> metas,
                           const std::map<std::string, std::string>& captions,
                           std::span<const TaskKind> tasks,
                           const SplitAssignment* split,
                           GenerationBackend& backend,
                           const TurnOptions& options = {});

}  // namespace grit

#endif  // GRIT_CONVERSATION_BUILDER_HPP_
