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

#include "grit/conversation_builder.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <sstream>

#include "grit/error.hpp"
#include "grit/llm_gateway.hpp"
#include "grit/rng.hpp"

namespace grit {
namespace {

using nlohmann::json;

constexpr std::string_view kRegionPlaceholder = "{REGION}";

std::vector<std::string> distinct_categories(const MetaRecord& meta) {
  std::vector<std::string> out;
  for (const auto& o : meta.objects) {
    if (std::find(out.begin(), out.end(), o.category) == out.end()) {
      out.push_back(o.category);
    }
  }
  return out;
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

std::size_t pick(const MetaRecord& meta, TaskKind task, std::size_t target,
                 std::size_t n) {
  std::string key = meta.image_id;
  key += '/';
  key += task_name(task);
  key += '/';
  key += std::to_string(target);
  return static_cast<std::size_t>(SplitMix64::mix(fnv1a64(key)) % n);
}

std::string position_phrase(const NormBox& b) {
  const double cx = 0.5 * (b.x0 + b.x1);
  const double cy = 0.5 * (b.y0 + b.y1);
  const char* v = cy < 1.0 / 3 ? "upper" : (cy < 2.0 / 3 ? "middle" : "lower");
  const char* h = cx < 1.0 / 3 ? "left" : (cx < 2.0 / 3 ? "center" : "right");
  if (std::string_view(v) == "middle" && std::string_view(h) == "center") {
    return "center";
  }
  return std::string(v) + " " + h;
}

std::string coverage_phrase(const NormBox& b) {
  const double pct = (b.x1 - b.x0) * (b.y1 - b.y0) * 100.0;
  if (pct < 1.0) return "less than 1%";
  return "about " + std::to_string(static_cast<int>(std::floor(pct + 0.5))) + "%";
}

std::string scene_phrase(const MetaRecord& meta) {
  std::string s = "this ";
  s += modality_name(meta.modality);
  s += " image";
  if (!meta.scanned_region.empty()) s += " of the " + meta.scanned_region;
  return s;
}

// A planned region-task turn: which object(s) it is about.
struct Target {
  std::string category;
  std::vector<NormBox> boxes;
};

std::vector<Target> plan_targets(const MetaRecord& meta, TaskKind task,
                                 std::size_t cap) {
  std::vector<Target> out;
  if (task == TaskKind::kMIA) {
    out.push_back({});
    return out;
  }
  if (task == TaskKind::kVG) {
    for (const auto& cat : distinct_categories(meta)) {
      if (out.size() >= cap) break;
      Target t{cat, {}};
      for (const auto& o : meta.objects) {
        if (o.category == cat) t.boxes.push_back(o.box);
      }
      out.push_back(std::move(t));
    }
    return out;
  }
  for (const auto& o : meta.objects) {
    if (out.size() >= cap) break;
    out.push_back({o.category, {o.box}});
  }
  return out;
}

std::vector<QuantBox> quantize_all(const std::vector<NormBox>& boxes) {
  std::vector<QuantBox> out;
  out.reserve(boxes.size());
  for (const auto& b : boxes) out.push_back(quantize(b));
  return out;
}

Turn template_turn(const MetaRecord& meta, const std::string& caption,
                   TaskKind task, const Target& target, std::size_t target_idx) {
  Turn turn;
  turn.task = task;
  switch (task) {
    case TaskKind::kROC: {
      static constexpr std::string_view kLead[][2] = {
          {"What is the object in ", "?"},
          {"Which structure is shown in ", "?"},
          {"Classify the object located in ", "."},
      };
      static constexpr std::string_view kPhrase[] = {"this region", "the region",
                                                     "the highlighted area"};
      const auto& q = kLead[pick(meta, task, target_idx, 3)];
      turn.question.text(std::string(q[0]))
          .ref(std::string(kPhrase[pick(meta, task, target_idx + 101, 3)]),
               quantize_all(target.boxes))
          .text(std::string(q[1]));
      turn.answer.text(target.category);
      break;
    }
    case TaskKind::kRC: {
      static constexpr std::string_view kLead[][2] = {
          {"Please describe ", " in detail."},
          {"What can you tell me about ", "?"},
          {"Give a short description of ", "."},
      };
      const auto& q = kLead[pick(meta, task, target_idx, 3)];
      turn.question.text(std::string(q[0]))
          .ref("the region", quantize_all(target.boxes))
          .text(std::string(q[1]));
      const NormBox& b = target.boxes.front();
      turn.answer.ref(target.category, quantize_all(target.boxes))
          .text(" is located in the " + position_phrase(b) + " of " +
                scene_phrase(meta) + ", covering " + coverage_phrase(b) +
                " of the image.");
      break;
    }
    case TaskKind::kVG: {
      static constexpr std::string_view kLead[][2] = {
          {"Where is the ", " in this image?"},
          {"Locate the ", " in the image."},
          {"Please provide the bounding box of the ", "."},
      };
      const auto& q = kLead[pick(meta, task, target_idx, 3)];
      turn.question.text(std::string(q[0]) + target.category + std::string(q[1]));
      turn.answer.ref(target.category, quantize_all(target.boxes));
      break;
    }
    case TaskKind::kMIA: {
      static constexpr std::string_view kQuestions[] = {
          "Please analyze this image.",
          "What does this image show?",
          "Describe the findings in this image.",
      };
      turn.question.text(std::string(kQuestions[pick(meta, task, 0, 3)]));
      turn.answer.text(caption.empty() ? template_caption(meta) : caption);
      break;
    }
  }
  return turn;
}

// Splits `text` on the region placeholder and inserts a ref for each
// occurrence.
MarkedText expand_placeholders(std::string_view text, std::string_view phrase,
                               const std::vector<QuantBox>& boxes) {
  MarkedText out;
  std::size_t pos = 0;
  for (;;) {
    const std::size_t hit = text.find(kRegionPlaceholder, pos);
    const std::string chunk = sanitize_text(
        text.substr(pos, hit == std::string_view::npos ? std::string_view::npos
                                                         : hit - pos));
    if (!chunk.empty()) out.text(chunk);
    if (hit == std::string_view::npos) break;
    out.ref(std::string(phrase), boxes);
    pos = hit + kRegionPlaceholder.size();
  }
  return canonicalize(std::move(out));
}

}  // namespace

std::vector<std::string> turn_violations(const Turn& turn) {
  std::vector<std::string> out;
  const std::string task(task_name(turn.task));
  switch (turn.task) {
    case TaskKind::kROC:
    case TaskKind::kRC:
      if (turn.question.ref_count() == 0) {
        out.push_back(task + " question must refer to a region (<ref> + <box>)");
      }
      break;
    case TaskKind::kVG:
      if (turn.answer.ref_count() == 0) {
        out.push_back("VG answer must ground a region (<ref> + <box>)");
      }
      break;
    case TaskKind::kMIA:
      if (turn.question.ref_count() != 0 || turn.answer.ref_count() != 0) {
        out.push_back("MIA turn must not contain region markup");
      }
      break;
  }
  if (!is_canonical(turn.question) || !is_canonical(turn.answer)) {
    out.push_back(task + " turn holds non-canonical markup");
  }
  return out;
}

json conversation_to_json(const ConversationRecord& rec) {
  json turns = json::array();
  for (const Turn& t : rec.turns) {
    turns.push_back({{"turn_id", t.turn_id},
                     {"task", task_name(t.task)},
                     {"question", render(t.question)},
                     {"answer", render(t.answer)}});
  }
  json j;
  j["image_id"] = rec.image_id;
  j["case_id"] = rec.case_id;
  j["modality"] = std::string(modality_name(rec.modality));
  j["width"] = rec.width;
  j["height"] = rec.height;
  j["caption"] = rec.caption;
  j["turns"] = std::move(turns);
  return j;
}

ConversationRecord conversation_from_json(const json& j) {
  ConversationRecord rec;
  try {
    rec.image_id = j.at("image_id").get<std::string>();
    rec.case_id = j.at("case_id").get<std::string>();
    rec.modality = resolve_modality(j.at("modality").get<std::string>());
    rec.width = j.at("width").get<int>();
    rec.height = j.at("height").get<int>();
    rec.caption = j.at("caption").get<std::string>();
    for (const json& t : j.at("turns")) {
      Turn turn;
      turn.turn_id = t.at("turn_id").get<int>();
      auto task = task_from_name(t.at("task").get<std::string>());
      if (!task) {
        throw Error(ErrorCode::kSchema,
                    "unknown task '" + t.at("task").get<std::string>() + "'");
      }
      turn.task = *task;
      turn.question = parse(t.at("question").get<std::string>(), ParseMode::kStrict).text;
      turn.answer = parse(t.at("answer").get<std::string>(), ParseMode::kStrict).text;
      rec.turns.push_back(std::move(turn));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSchema, std::string("malformed conversation record: ") + e.what());
  }
  return rec;
}

std::string template_caption(const MetaRecord& meta) {
  std::string s;
  if (!meta.orientation.empty()) s += meta.orientation + " ";
  s += modality_name(meta.modality);
  s += " image";
  const char first = static_cast<char>(std::tolower(static_cast<unsigned char>(s.front())));
  const bool vowel_sound = std::string_view("aeiou").find(first) != std::string_view::npos ||
                           s.starts_with("MR ") || s.starts_with("X-ray ");
  s.insert(0, vowel_sound ? "An " : "A ");
  if (!meta.scanned_region.empty()) s += " of the " + meta.scanned_region;
  const auto cats = distinct_categories(meta);
  s += " showing ";
  s += cats.empty() ? std::string("no annotated structures") : join(cats, ", ");
  s += '.';
  return sanitize_text(s);
}

std::string sanitize_text(std::string_view text) {
  std::string out(text);
  // Erasing can splice a new token together ("<re<ref>f>"), so repeat.
  for (bool changed = true; changed;) {
    changed = false;
    for (std::string_view token :
         {kRefOpen, kRefClose, kBoxOpen, kBoxClose, kImgOpen, kImgClose}) {
      for (std::size_t p = out.find(token); p != std::string::npos; p = out.find(token, p)) {
        out.erase(p, token.size());
        changed = true;
      }
    }
  }
  return out;
}

std::string TemplateBackend::caption(const MetaRecord& meta) {
  return template_caption(meta);
}

std::vector<Turn> TemplateBackend::turns(const MetaRecord& meta,
                                         const std::string& caption,
                                         std::span<const TaskKind> tasks,
                                         const TurnOptions& options) {
  std::vector<Turn> out;
  for (TaskKind task : tasks) {
    const auto targets = plan_targets(meta, task, options.max_objects_per_task);
    for (std::size_t i = 0; i < targets.size(); ++i) {
      out.push_back(template_turn(meta, caption, task, targets[i], i));
    }
  }
  return out;
}

LlmBackend::LlmBackend(LlmGateway& gateway, PromptSet prompts, double temperature)
    : gateway_(gateway), prompts_(std::move(prompts)), temperature_(temperature) {}

std::string LlmBackend::caption(const MetaRecord& meta) {
  ChatRequest req;
  req.model = gateway_.config().model;
  req.temperature = temperature_;
  req.max_tokens = 256;
  req.messages = {{"system", prompts_.caption_system},
                  {"user", meta_to_json(meta).dump()}};
  std::string text = sanitize_text(gateway_.chat(req));
  const auto first = text.find_first_not_of(" \t\r\n");
  const auto last = text.find_last_not_of(" \t\r\n");
  if (first == std::string::npos) {
    throw Error(ErrorCode::kBackendUnavailable,
                "model returned an empty caption for " + meta.image_id);
  }
  return text.substr(first, last - first + 1);
}

std::vector<Turn> LlmBackend::turns(const MetaRecord& meta, const std::string& caption,
                                    std::span<const TaskKind> tasks,
                                    const TurnOptions& options) {
  struct Planned {
    TaskKind task;
    Target target;
    std::size_t index;
  };
  std::vector<Planned> plan;
  json planned = json::array();
  for (TaskKind task : tasks) {
    const auto targets = plan_targets(meta, task, options.max_objects_per_task);
    for (std::size_t i = 0; i < targets.size(); ++i) {
      plan.push_back({task, targets[i], i});
      json p = {{"task", task_name(task)}};
      if (task != TaskKind::kMIA) p["target"] = targets[i].category;
      planned.push_back(std::move(p));
    }
  }
  ChatRequest req;
  req.model = gateway_.config().model;
  req.temperature = temperature_;
  req.max_tokens = 1024;
  req.messages = {
      {"system", prompts_.conversation_system},
      {"user", json{{"meta", meta_to_json(meta)}, {"caption", caption}, {"turns", planned}}
                   .dump()}};
  const std::string reply = gateway_.chat(req);

  json items;
  try {
    const auto open = reply.find('[');
    const auto close = reply.rfind(']');
    if (open != std::string::npos && close != std::string::npos && close > open) {
      items = json::parse(reply.substr(open, close - open + 1));
    }
  } catch (const json::exception&) {
    items = json();
  }

  std::vector<Turn> out;
  for (std::size_t i = 0; i < plan.size(); ++i) {
    const Planned& p = plan[i];
    std::optional<Turn> turn;
    if (items.is_array() && i < items.size() && items[i].is_object()) {
      const json& it = items[i];
      if (it.value("task", "") == task_name(p.task) && it.contains("question") &&
          it.contains("answer") && it["question"].is_string() && it["answer"].is_string()) {
        Turn t;
        t.task = p.task;
        const auto boxes = quantize_all(p.target.boxes);
        const std::string region_phrase =
            p.task == TaskKind::kROC || p.task == TaskKind::kRC ? "the region"
                                                                : p.target.category;
        t.question = expand_placeholders(it["question"].get<std::string>(),
                                         region_phrase, boxes);
        if (p.task == TaskKind::kROC) {
          t.answer = MarkedText().text(p.target.category);
        } else {
          t.answer = expand_placeholders(it["answer"].get<std::string>(),
                                         p.target.category, boxes);
        }
        if (p.task == TaskKind::kMIA) {
          t.question = MarkedText().text(sanitize_text(plain_text(t.question)));
          t.answer = MarkedText().text(sanitize_text(plain_text(t.answer)));
          t.question = canonicalize(std::move(t.question));
          t.answer = canonicalize(std::move(t.answer));
        }
        if (turn_violations(t).empty() && !t.question.segments.empty() &&
            !t.answer.segments.empty()) {
          turn = std::move(t);
        }
      }
    }
    if (!turn) {
      ++rejected_;
      turn = template_turn(meta, caption, p.task, p.target, p.index);
    }
    out.push_back(std::move(*turn));
  }
  return out;
}

std::string build_caption(const MetaRecord& meta, GenerationBackend& backend) {
  return backend.caption(meta);
}

std::vector<TaskKind> eligible_tasks(const MetaRecord& meta,
                                     std::span<const TaskKind> tasks) {
  std::vector<TaskKind> out;
  for (TaskKind t : tasks) {
    if (is_region_task(t) && meta.objects.empty()) continue;
    out.push_back(t);
  }
  return out;
}

std::vector<Turn> build_turns(const MetaRecord& meta, const std::string& caption,
                              std::span<const TaskKind> tasks,
                              GenerationBackend& backend, const TurnOptions& options) {
  if (tasks.empty()) throw Error(ErrorCode::kInvalidArgument, "no tasks requested");
  if (options.max_objects_per_task < 1) {
    throw Error(ErrorCode::kInvalidArgument, "max_objects_per_task must be at least 1");
  }
  if (meta.objects.empty()) {
    for (TaskKind t : tasks) {
      if (is_region_task(t)) {
        throw Error(ErrorCode::kNoObjectsForRegionTask,
                    std::string(task_name(t)) + " requested for " + meta.image_id +
                        ", which has no objects");
      }
    }
  }
  std::vector<Turn> turns = backend.turns(meta, caption, tasks, options);
  for (std::size_t i = 0; i < turns.size(); ++i) turns[i].turn_id = static_cast<int>(i);
  return turns;
}

json DatasetStats::to_json() const {
  json per_task = json::object();
  for (const auto& [t, n] : turns_per_task) per_task[std::string(task_name(t))] = n;
  auto fraction = [](std::size_t part, std::size_t whole) {
    return whole == 0 ? 0.0 : static_cast<double>(part) / static_cast<double>(whole);
  };
  return {{"images", images},
          {"turns", turns},
          {"turns_per_task", per_task},
          {"train_images", train_images},
          {"test_images", test_images},
          {"train_turns", train_turns},
          {"test_turns", test_turns},
          {"test_image_fraction", fraction(test_images, images)},
          {"test_turn_fraction", fraction(test_turns, turns)},
          {"skipped_region_tasks", skipped_region_tasks}};
}

DatasetWriter::DatasetWriter(std::ostream& train, std::ostream* test,
                             const SplitAssignment* split)
    : train_(train), test_(test), split_(split) {}

void DatasetWriter::note_skip(const std::string& message) {
  ++stats_.skipped_region_tasks;
  if (stats_.skip_log.size() < 100) stats_.skip_log.push_back(message);
}

void DatasetWriter::add(const ConversationRecord& rec) {
  bool to_test = false;
  if (split_) {
    if (split_->is_test(rec.case_id)) {
      to_test = true;
    } else if (!split_->train.count(rec.case_id)) {
      throw Error(ErrorCode::kSplitCoverageGap,
                  "image " + rec.image_id + " belongs to case '" + rec.case_id +
                      "', which the split does not assign");
    }
  }
  std::ostream& out = (to_test && test_) ? *test_ : train_;
  out << conversation_to_json(rec).dump() << '\n';
  ++stats_.images;
  stats_.turns += rec.turns.size();
  for (const Turn& t : rec.turns) ++stats_.turns_per_task[t.task];
  if (to_test) {
    ++stats_.test_images;
    stats_.test_turns += rec.turns.size();
  } else {
    ++stats_.train_images;
    stats_.train_turns += rec.turns.size();
  }
}

ConversationRecord build_record(const MetaRecord& meta, const std::string& caption,
                                std::span<const TaskKind> tasks,
                                GenerationBackend& backend, const TurnOptions& options,
                                std::vector<std::string>* skips) {
  const auto usable = eligible_tasks(meta, tasks);
  if (skips) {
    for (TaskKind t : tasks) {
      if (std::find(usable.begin(), usable.end(), t) == usable.end()) {
        skips->push_back(std::string(task_name(t)) + " skipped for " + meta.image_id +
                         " (no objects)");
      }
    }
  }
  ConversationRecord rec;
  rec.image_id = meta.image_id;
  rec.case_id = meta.case_id;
  rec.modality = meta.modality;
  rec.width = meta.width;
  rec.height = meta.height;
  rec.caption = caption;
  if (!usable.empty()) rec.turns = build_turns(meta, caption, usable, backend, options);
  return rec;
}

DatasetBuild build_dataset(std::span<const MetaRecord> metas,
                           const std::map<std::string, std::string>& captions,
                           std::span<const TaskKind> tasks, const SplitAssignment* split,
                           GenerationBackend& backend, const TurnOptions& options) {
  std::ostringstream train, test;
  DatasetWriter writer(train, &test, split);
  for (const MetaRecord& meta : metas) {
    auto it = captions.find(meta.image_id);
    if (it == captions.end()) {
      throw Error(ErrorCode::kInvalidArgument, "no caption for image " + meta.image_id);
    }
    std::vector<std::string> skips;
    ConversationRecord rec = build_record(meta, it->second, tasks, backend, options, &skips);
    for (const auto& s : skips) writer.note_skip(s);
    if (rec.turns.empty()) continue;
    writer.add(rec);
  }
  return DatasetBuild{train.str(), test.str(), writer.stats()};
}

}  // namespace grit
