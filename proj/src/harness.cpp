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

#include "grit/harness.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "grit/corpus_ingest.hpp"
#include "grit/error.hpp"
#include "grit/llm_gateway.hpp"
#include "grit/parallel.hpp"
#include "grit/rng.hpp"
#include "grit/sampling_split.hpp"
#include "grit/synth.hpp"

namespace grit {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Output file that only appears under its final name once committed.
class AtomicOutput {
 public:
  explicit AtomicOutput(fs::path path)
      : path_(std::move(path)), tmp_(path_.string() + ".partial") {
    if (path_.has_parent_path()) {
      std::error_code ec;
      fs::create_directories(path_.parent_path(), ec);
    }
    stream_.open(tmp_, std::ios::binary | std::ios::trunc);
    if (!stream_) throw Error(ErrorCode::kIo, "cannot write " + path_.string());
  }
  AtomicOutput(const AtomicOutput&) = delete;
  AtomicOutput& operator=(const AtomicOutput&) = delete;
  ~AtomicOutput() {
    if (!committed_) {
      stream_.close();
      std::error_code ec;
      fs::remove(tmp_, ec);
    }
  }

  std::ostream& stream() { return stream_; }

  void commit() {
    stream_.close();
    if (!stream_) throw Error(ErrorCode::kIo, "cannot write " + path_.string());
    std::error_code ec;
    fs::rename(tmp_, path_, ec);
    if (ec) throw Error(ErrorCode::kIo, "cannot rename into " + path_.string() + ": " + ec.message());
    committed_ = true;
  }

 private:
  fs::path path_;
  fs::path tmp_;
  std::ofstream stream_;
  bool committed_ = false;
};

std::vector<TaskKind> parse_tasks(const std::string& csv) {
  std::vector<TaskKind> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    auto t = task_from_name(item);
    if (!t) throw Error(ErrorCode::kInvalidArgument, "unknown task '" + item + "'");
    if (std::find(out.begin(), out.end(), *t) != out.end()) {
      throw Error(ErrorCode::kInvalidArgument, "task '" + item + "' listed twice");
    }
    out.push_back(*t);
  }
  if (out.empty()) throw Error(ErrorCode::kInvalidArgument, "no tasks given");
  return out;
}

std::vector<MetaRecord> read_metas(const fs::path& path) {
  std::vector<MetaRecord> out;
  for (const json& j : read_jsonl(path)) out.push_back(meta_from_json(j));
  return out;
}

std::vector<ConversationRecord> read_dataset(const fs::path& path) {
  std::vector<ConversationRecord> out;
  for (const json& j : read_jsonl(path)) out.push_back(conversation_from_json(j));
  return out;
}

void require_fraction(double v, const char* name) {
  if (!(v > 0.0 && v < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, std::string(name) + " must lie in (0, 1)");
  }
}

struct BackendFlags {
  std::string backend = "template";
  bool offline = false;
  std::string cache_dir;
  std::string model;
  int max_in_flight = 0;
};

void add_backend_flags(CLI::App* cmd, BackendFlags& f) {
  cmd->add_option("--backend", f.backend, "Phrasing backend")
      ->check(CLI::IsMember({"template", "llm"}));
  cmd->add_flag("--offline", f.offline, "Serve model calls from the cache only");
  cmd->add_option("--cache-dir", f.cache_dir, "Model response cache directory");
  cmd->add_option("--model", f.model, "Model name (overrides GRIT_LLM_MODEL)");
  cmd->add_option("--max-in-flight", f.max_in_flight, "Concurrent model requests");
}

struct Backend {
  std::unique_ptr<LlmGateway> gateway;
  std::unique_ptr<GenerationBackend> impl;
  LlmBackend* llm = nullptr;
};

Backend make_backend(const BackendFlags& f) {
  Backend b;
  if (f.backend == "template") {
    b.impl = std::make_unique<TemplateBackend>();
    return b;
  }
  GatewayConfig config = GatewayConfig::from_env();
  config.offline = f.offline;
  if (!f.cache_dir.empty()) config.cache_dir = f.cache_dir;
  if (!f.model.empty()) config.model = f.model;
  if (f.max_in_flight > 0) config.max_in_flight = f.max_in_flight;
  std::shared_ptr<Transport> transport;
  if (config.offline) {
    transport = std::make_shared<DenyAllTransport>();
  } else {
    transport = std::make_shared<HttpTransport>();
  }
  b.gateway = std::make_unique<LlmGateway>(config, transport);
  auto llm = std::make_unique<LlmBackend>(*b.gateway, PromptSet::builtin());
  b.llm = llm.get();
  b.impl = std::move(llm);
  return b;
}

// ---------------------------------------------------------------- synth

struct SynthFlags {
  std::string out;
  std::string gold;
  std::uint64_t seed = 0;
  SynthOptions options;
  PredictionNoise noise;
};

int cmd_synth(const SynthFlags& f, std::ostream& out) {
  if (!f.gold.empty()) {
    const auto preds = synth_predictions(read_dataset(f.gold), f.seed, f.noise);
    AtomicOutput file(f.out);
    for (const json& p : preds) file.stream() << p.dump() << '\n';
    file.commit();
    out << "synth: " << preds.size() << " predictions -> " << f.out << '\n';
    return kExitOk;
  }
  SynthOptions options = f.options;
  options.seed = f.seed;
  const SynthCorpus corpus = write_synth_corpus(f.out, options);
  out << "synth: " << corpus.cases << " cases, " << corpus.images << " images -> "
      << corpus.manifest.generic_string() << '\n';
  return kExitOk;
}

// --------------------------------------------------------------- ingest

struct IngestFlags {
  std::string manifest;
  std::string out;
  std::string aliases;
  int connectivity = 8;
  std::int64_t min_area = 10;
  bool merge = false;
  bool sample = false;
  std::size_t max_per_case = kDefaultMaxPerCase;
  double dedup_threshold = kDefaultDedupThreshold;
  std::size_t jobs = 1;
};

ModalityAliases load_aliases(const std::string& path) {
  ModalityAliases out;
  if (path.empty()) return out;
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingFile, "cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, path + ": " + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::kInvalidArgument, path + ": expected an object");
  for (const auto& [alias, name] : j.items()) {
    if (!name.is_string()) throw Error(ErrorCode::kInvalidArgument, path + ": alias values must be strings");
    auto m = modality_from_name(name.get<std::string>());
    if (!m) throw Error(ErrorCode::kInvalidArgument, path + ": unknown modality " + name.dump());
    out[ascii_lower(alias)] = *m;
  }
  return out;
}

int cmd_ingest(const IngestFlags& f, std::ostream& out, std::ostream& err) {
  if (f.connectivity != 4 && f.connectivity != 8) {
    throw Error(ErrorCode::kInvalidArgument, "--connectivity must be 4 or 8");
  }
  if (f.sample) require_fraction(f.dedup_threshold, "--dedup-threshold");
  const ModalityAliases aliases = load_aliases(f.aliases);
  std::ifstream in(f.manifest, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingFile, "cannot open manifest " + f.manifest);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(std::move(line));
  const fs::path base = fs::path(f.manifest).parent_path();
  ExtractOptions options;
  options.connectivity = f.connectivity;
  options.min_area = f.min_area;
  options.merge_per_category = f.merge;

  struct Outcome {
    std::optional<MetaRecord> meta;
    std::string diagnostic;
  };
  auto results = parallel_map(lines.size(), f.jobs, [&](std::size_t i) -> Outcome {
    const std::string& line = lines[i];
    if (line.find_first_not_of(" \t\r") == std::string::npos) return {};
    std::string where = "line " + std::to_string(i + 1);
    try {
      const ManifestEntry entry = parse_manifest_entry(json::parse(line), base);
      where += " (" + entry.image_id + ")";
      return {ingest_entry(entry, options, aliases), {}};
    } catch (const json::exception& e) {
      return {std::nullopt, where + ": invalid JSON: " + e.what()};
    } catch (const Error& e) {
      return {std::nullopt,
              where + ": " + std::string(error_code_name(e.code())) + ": " + e.what()};
    }
  });

  std::vector<MetaRecord> metas;
  std::vector<std::string> diagnostics;
  for (auto& r : results) {
    if (r.meta) metas.push_back(std::move(*r.meta));
    if (!r.diagnostic.empty()) diagnostics.push_back(std::move(r.diagnostic));
  }
  std::set<std::string> seen;
  for (const auto& m : metas) {
    if (!seen.insert(m.image_id).second) {
      diagnostics.push_back("duplicate image_id " + m.image_id);
    }
  }
  if (f.sample && !metas.empty()) {
    // Slices keep manifest order within each case.
    std::map<std::string, std::vector<MetaRecord>> by_case;
    for (const auto& m : metas) by_case[m.case_id].push_back(m);
    std::set<std::string> kept;
    for (const auto& [case_id, members] : by_case) {
      for (auto& id : sample_slices(members, f.max_per_case, f.dedup_threshold)) {
        kept.insert(std::move(id));
      }
    }
    std::erase_if(metas, [&](const MetaRecord& m) { return !kept.count(m.image_id); });
  }

  AtomicOutput file(f.out);
  std::map<Modality, std::size_t> per_modality;
  for (const auto& m : metas) {
    file.stream() << meta_to_json(m).dump() << '\n';
    ++per_modality[m.modality];
  }
  file.commit();

  for (const auto& d : diagnostics) err << "ingest: " << d << '\n';
  if (lines.empty() || metas.empty()) err << "ingest: warning: no images ingested\n";
  out << "ingest: " << metas.size() << " meta records";
  for (const auto& [m, n] : per_modality) out << ", " << modality_name(m) << " " << n;
  out << '\n';
  return diagnostics.empty() ? kExitOk : kExitDataViolation;
}

// -------------------------------------------------------------- caption

struct CaptionFlags {
  std::string meta;
  std::string out;
  BackendFlags backend;
  std::size_t jobs = 1;
};

int cmd_caption(const CaptionFlags& f, std::ostream& out) {
  const auto metas = read_metas(f.meta);
  Backend backend = make_backend(f.backend);
  const auto captions = parallel_map(metas.size(), f.jobs, [&](std::size_t i) {
    return build_caption(metas[i], *backend.impl);
  });
  AtomicOutput file(f.out);
  for (std::size_t i = 0; i < metas.size(); ++i) {
    file.stream() << json{{"image_id", metas[i].image_id}, {"caption", captions[i]}}.dump()
                  << '\n';
  }
  file.commit();
  out << "caption: " << captions.size() << " captions (" << backend.impl->name() << ")\n";
  return kExitOk;
}

// ------------------------------------------------------------------ gen

struct GenFlags {
  std::string meta;
  std::string captions;
  std::string out;
  std::string split;
  std::string test_out;
  std::string stats;
  std::string tasks = "ROC,RC,VG,MIA";
  std::size_t max_objects = 1;
  BackendFlags backend;
  std::size_t jobs = 1;
};

std::map<std::string, std::string> read_captions(const fs::path& path) {
  std::map<std::string, std::string> out;
  for (const json& j : read_jsonl(path)) {
    try {
      out[j.at("image_id").get<std::string>()] = j.at("caption").get<std::string>();
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kSchema, path.string() + ": malformed caption line: " + e.what());
    }
  }
  return out;
}

int cmd_gen(const GenFlags& f, std::ostream& out) {
  const auto tasks = parse_tasks(f.tasks);
  if (f.max_objects < 1) throw Error(ErrorCode::kInvalidArgument, "--max-objects-per-task must be >= 1");
  if (!f.test_out.empty() && f.split.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "--test-out needs --split");
  }
  if (f.captions.empty() && f.backend.backend != "template") {
    throw Error(ErrorCode::kInvalidArgument, "the llm backend needs --captions");
  }
  const auto metas = read_metas(f.meta);
  std::map<std::string, std::string> captions;
  if (!f.captions.empty()) captions = read_captions(f.captions);
  std::optional<SplitAssignment> split;
  if (!f.split.empty()) {
    std::ifstream in(f.split);
    if (!in) throw Error(ErrorCode::kMissingFile, "cannot open split " + f.split);
    try {
      split = split_from_json(json::parse(in));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kSchema, f.split + ": " + e.what());
    }
  }
  Backend backend = make_backend(f.backend);
  TurnOptions options;
  options.max_objects_per_task = f.max_objects;

  AtomicOutput train(f.out);
  std::optional<AtomicOutput> test;
  if (!f.test_out.empty()) test.emplace(f.test_out);
  DatasetWriter writer(train.stream(), test ? &test->stream() : nullptr,
                       split ? &*split : nullptr);

  // Bounded chunks keep memory flat on large corpora.
  constexpr std::size_t kChunk = 512;
  for (std::size_t begin = 0; begin < metas.size(); begin += kChunk) {
    const std::size_t n = std::min(kChunk, metas.size() - begin);
    struct Built {
      ConversationRecord rec;
      std::vector<std::string> skips;
    };
    auto built = parallel_map(n, f.jobs, [&](std::size_t k) {
      const MetaRecord& meta = metas[begin + k];
      std::string caption;
      if (f.captions.empty()) {
        caption = template_caption(meta);
      } else {
        auto it = captions.find(meta.image_id);
        if (it == captions.end()) {
          throw Error(ErrorCode::kInvalidArgument, "no caption for image " + meta.image_id);
        }
        caption = it->second;
      }
      Built b;
      b.rec = build_record(meta, caption, tasks, *backend.impl, options, &b.skips);
      return b;
    });
    for (auto& b : built) {
      for (const auto& s : b.skips) writer.note_skip(s);
      if (!b.rec.turns.empty()) writer.add(b.rec);
    }
  }
  train.commit();
  if (test) test->commit();

  json stats = writer.stats().to_json();
  stats["backend"] = std::string(backend.impl->name());
  if (backend.llm) {
    stats["rejected_model_turns"] = backend.llm->rejected_turns();
    stats["prompt_version"] = PromptSet::builtin().version;
  }
  if (!f.stats.empty()) {
    AtomicOutput file(f.stats);
    file.stream() << stats.dump(2) << '\n';
    file.commit();
  }
  out << stats.dump(2) << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- split

struct SplitFlags {
  std::string meta;
  std::string out;
  std::uint64_t seed = 0;
  double test_fraction = 0.12;
};

int cmd_split(const SplitFlags& f, std::ostream& out, std::ostream& err) {
  require_fraction(f.test_fraction, "--test-fraction");
  const auto metas = read_metas(f.meta);
  const auto groups = group_cases(metas);
  const SplitAssignment split = split_cases(groups, f.test_fraction, f.seed);
  AtomicOutput file(f.out);
  file.stream() << split_to_json(split).dump(2) << '\n';
  file.commit();
  for (const auto& o : split.overshoots) {
    err << "split: warning: " << modality_name(o.modality) << " stratum at "
        << o.achieved_fraction << " against target " << o.target_fraction << '\n';
  }
  out << "split: " << split.train.size() << " train cases, " << split.test.size()
      << " test cases, test image fraction " << split.achieved_test_fraction << '\n';
  return kExitOk;
}

// ------------------------------------------------------------- validate

int cmd_validate(const std::string& path, std::ostream& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingFile, "cannot open " + path);
  std::size_t line_no = 0;
  std::size_t records = 0;
  std::size_t violations = 0;
  std::set<std::string> ids;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++records;
    std::vector<std::string> problems;
    try {
      const json j = json::parse(line);
      problems = validate_record(j);
      if (j.is_object() && j.contains("image_id") && j["image_id"].is_string() &&
          !ids.insert(j["image_id"].get<std::string>()).second) {
        problems.push_back("schema: duplicate image_id " + j["image_id"].get<std::string>());
      }
    } catch (const json::exception& e) {
      problems.push_back(std::string("schema: invalid JSON: ") + e.what());
    }
    for (const auto& p : problems) out << "line " << line_no << ": " << p << '\n';
    violations += problems.size();
  }
  out << "validate: " << records << " records, " << violations << " violations\n";
  return violations == 0 ? kExitOk : kExitDataViolation;
}

// ---------------------------------------------------------------- score

struct ScoreFlags {
  std::string pred;
  std::string gold;
  std::string out;
  std::string markdown;
  std::string synonyms;
  std::size_t jobs = 1;
};

fs::path markdown_path_for(const std::string& out, const std::string& markdown) {
  if (!markdown.empty()) return markdown;
  fs::path p(out);
  p.replace_extension(".md");
  return p;
}

int cmd_score(const ScoreFlags& f, std::ostream& out, std::ostream& err) {
  std::optional<SynonymTable> synonyms;
  if (!f.synonyms.empty()) synonyms = SynonymTable::load(f.synonyms);
  const auto golds = read_dataset(f.gold);
  std::vector<Prediction> preds;
  for (const json& j : read_jsonl(f.pred)) preds.push_back(prediction_from_json(j));
  const ScoreRun run =
      score_predictions(golds, preds, synonyms ? &*synonyms : nullptr, f.jobs);

  AtomicOutput json_file(f.out);
  json_file.stream() << score_run_to_json(run).dump(2) << '\n';
  AtomicOutput md_file(markdown_path_for(f.out, f.markdown));
  md_file.stream() << render_markdown(run.table);
  json_file.commit();
  md_file.commit();

  for (const auto& u : run.unmatched) err << "score: unmatched prediction " << u << '\n';
  if (run.missing > 0) {
    err << "score: " << run.missing << " gold turns without a prediction scored 0\n";
  }
  out << render_markdown(run.table);
  return kExitOk;
}

// --------------------------------------------------------------- report

int cmd_report(const std::string& in_path, const std::string& out_path, std::ostream& out) {
  std::ifstream in(in_path);
  if (!in) throw Error(ErrorCode::kMissingFile, "cannot open " + in_path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSchema, in_path + ": " + e.what());
  }
  const ScoreTable table = score_table_from_json(j.contains("table") ? j["table"] : j);
  const std::string md = render_markdown(table);
  if (!out_path.empty()) {
    AtomicOutput file(out_path);
    file.stream() << md;
    file.commit();
  }
  out << md;
  return kExitOk;
}

}  // namespace

std::vector<json> read_jsonl(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingFile, "cannot open " + path.string());
  std::vector<json> out;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kSchema,
                  path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void write_file_atomic(const fs::path& path, const std::string& contents) {
  AtomicOutput file(path);
  file.stream() << contents;
  file.commit();
}

Prediction prediction_from_json(const json& j) {
  try {
    return Prediction{j.at("image_id").get<std::string>(), j.at("turn_id").get<int>(),
                      j.at("answer").get<std::string>()};
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSchema, std::string("malformed prediction: ") + e.what());
  }
}

double score_turn(const Turn& gold, const std::string& predicted_answer,
                  const SynonymTable* synonyms) {
  const MarkedText pred = parse(predicted_answer, ParseMode::kLenient).text;
  switch (gold.task) {
    case TaskKind::kVG: {
      MatchOptions options;
      options.synonyms = synonyms;
      return recall_at(extract_boxes(pred), extract_boxes(gold.answer),
                       kRecallIouThreshold, options);
    }
    case TaskKind::kROC:
      return roc_recall(plain_text(pred), plain_text(gold.answer), synonyms);
    case TaskKind::kRC:
    case TaskKind::kMIA:
      return mbmr(plain_text(pred), plain_text(gold.answer));
  }
  return 0.0;
}

ScoreRun score_predictions(const std::vector<ConversationRecord>& golds,
                           const std::vector<Prediction>& preds,
                           const SynonymTable* synonyms, std::size_t jobs) {
  using Key = std::pair<std::string, int>;
  std::set<Key> gold_keys;
  for (const auto& rec : golds) {
    for (const auto& t : rec.turns) {
      if (!gold_keys.insert({rec.image_id, t.turn_id}).second) {
        throw Error(ErrorCode::kJoinError, "duplicate gold turn " + rec.image_id + "#" +
                                               std::to_string(t.turn_id));
      }
    }
  }
  std::map<Key, const Prediction*> by_key;
  ScoreRun run;
  for (const auto& p : preds) {
    if (!by_key.emplace(Key{p.image_id, p.turn_id}, &p).second) {
      throw Error(ErrorCode::kJoinError, "duplicate prediction " + p.image_id + "#" +
                                             std::to_string(p.turn_id));
    }
    if (!gold_keys.count({p.image_id, p.turn_id})) {
      run.unmatched.push_back(p.image_id + "#" + std::to_string(p.turn_id));
    }
  }
  auto per_record = parallel_map(golds.size(), jobs, [&](std::size_t i) {
    const ConversationRecord& rec = golds[i];
    std::vector<std::pair<SampleScore, bool>> out;
    for (const Turn& t : rec.turns) {
      SampleScore s{rec.image_id, t.turn_id, t.task, rec.modality, 0.0};
      auto it = by_key.find({rec.image_id, t.turn_id});
      const bool found = it != by_key.end();
      if (found) s.value = score_turn(t, it->second->answer, synonyms);
      out.emplace_back(std::move(s), found);
    }
    return out;
  });
  for (auto& rec : per_record) {
    for (auto& [s, found] : rec) {
      if (!found) ++run.missing;
      run.samples.push_back(std::move(s));
    }
  }
  run.table = aggregate(run.samples);
  return run;
}

json score_run_to_json(const ScoreRun& run) {
  return {{"table", score_table_to_json(run.table)},
          {"samples", run.samples.size()},
          {"missing_predictions", run.missing},
          {"unmatched_predictions", run.unmatched}};
}

std::vector<std::string> validate_record(const json& j) {
  std::vector<std::string> out;
  if (!j.is_object()) return {"schema: record is not a JSON object"};
  auto need = [&](const char* key, bool (json::*is)() const noexcept) {
    auto it = j.find(key);
    if (it == j.end() || !((*it).*is)()) {
      out.push_back(std::string("schema: field '") + key + "' missing or mistyped");
      return false;
    }
    return true;
  };
  need("image_id", &json::is_string);
  need("case_id", &json::is_string);
  if (need("modality", &json::is_string) &&
      !modality_from_name(j["modality"].get<std::string>())) {
    out.push_back("schema: unknown modality " + j["modality"].dump());
  }
  for (const char* dim : {"width", "height"}) {
    if (need(dim, &json::is_number_integer) && j[dim].get<long long>() <= 0) {
      out.push_back(std::string("schema: '") + dim + "' must be positive");
    }
  }
  if (need("caption", &json::is_string) &&
      contains_reserved_token(j["caption"].get<std::string>())) {
    out.push_back("schema: caption contains reserved markup");
  }
  if (!need("turns", &json::is_array)) return out;
  if (j["turns"].empty()) out.push_back("schema: record has no turns");

  std::size_t index = 0;
  for (const json& t : j["turns"]) {
    const std::string where = "turn " + std::to_string(index);
    if (!t.is_object()) {
      out.push_back("schema: " + where + " is not an object");
      ++index;
      continue;
    }
    if (!t.contains("turn_id") || !t["turn_id"].is_number_integer()) {
      out.push_back("schema: " + where + " has no integer turn_id");
    } else if (t["turn_id"].get<long long>() != static_cast<long long>(index)) {
      out.push_back("schema: " + where + " has turn_id " + t["turn_id"].dump() +
                    ", expected " + std::to_string(index));
    }
    std::optional<TaskKind> task;
    if (t.contains("task") && t["task"].is_string()) task = task_from_name(t["task"].get<std::string>());
    if (!task) out.push_back("schema: " + where + " has an unknown task");

    Turn turn;
    bool markup_ok = true;
    for (const char* side : {"question", "answer"}) {
      if (!t.contains(side) || !t[side].is_string()) {
        out.push_back("schema: " + where + " has no string " + side);
        markup_ok = false;
        continue;
      }
      const auto parsed = parse(t[side].get<std::string>(), ParseMode::kLenient);
      for (const ParseIssue& issue : parsed.issues) {
        out.push_back(std::string(issue_kind_name(issue.kind)) + ": " + where + " " + side +
                      " at offset " + std::to_string(issue.offset) + ": " + issue.detail);
        markup_ok = false;
      }
      (std::string_view(side) == "question" ? turn.question : turn.answer) = parsed.text;
    }
    if (task && markup_ok) {
      turn.task = *task;
      for (const auto& v : turn_violations(turn)) out.push_back("task-role: " + where + ": " + v);
      if (turn.question.segments.empty() || turn.answer.segments.empty()) {
        out.push_back("schema: " + where + " has an empty question or answer");
      }
    }
    ++index;
  }
  return out;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"grit-forge: grounded instruction data for medical images"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  SynthFlags synth;
  auto* c_synth = app.add_subcommand("synth", "Write a synthetic corpus, or predictions for a dataset");
  c_synth->add_option("--out", synth.out, "Corpus directory, or predictions file with --gold")->required();
  c_synth->add_option("--gold", synth.gold, "Dataset to derive perturbed predictions from");
  c_synth->add_option("--seed", synth.seed, "Seed");
  c_synth->add_option("--cases", synth.options.cases, "Number of cases");
  c_synth->add_option("--min-slices", synth.options.min_slices, "Fewest slices per case");
  c_synth->add_option("--max-slices", synth.options.max_slices, "Most slices per case");
  c_synth->add_option("--width", synth.options.width, "Image width");
  c_synth->add_option("--height", synth.options.height, "Image height");
  c_synth->add_option("--box-hit-rate", synth.noise.box_hit_rate, "Share of VG boxes kept close")
      ->check(CLI::Range(0.0, 1.0));
  c_synth->add_option("--label-hit-rate", synth.noise.label_hit_rate, "Share of correct ROC labels")
      ->check(CLI::Range(0.0, 1.0));
  c_synth->add_option("--token-drop-rate", synth.noise.token_drop_rate, "Share of dropped words")
      ->check(CLI::Range(0.0, 1.0));

  IngestFlags ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Extract per-image object meta from masks");
  c_ingest->add_option("--manifest", ingest.manifest, "Manifest JSONL")->required();
  c_ingest->add_option("--out", ingest.out, "Meta JSONL")->required();
  c_ingest->add_option("--connectivity", ingest.connectivity, "4 or 8");
  c_ingest->add_option("--min-area", ingest.min_area, "Smallest component kept, in pixels");
  c_ingest->add_flag("--merge-per-category", ingest.merge, "One union box per category");
  c_ingest->add_option("--modality-aliases", ingest.aliases, "JSON object alias -> modality");
  c_ingest->add_flag("--sample", ingest.sample, "Cap and deduplicate slices per case");
  c_ingest->add_option("--max-per-case", ingest.max_per_case, "Slices kept per case");
  c_ingest->add_option("--dedup-threshold", ingest.dedup_threshold, "Similarity that drops a slice");
  c_ingest->add_option("--jobs", ingest.jobs, "Worker threads");

  CaptionFlags caption;
  auto* c_caption = app.add_subcommand("caption", "Write one caption per meta record");
  c_caption->add_option("--meta", caption.meta, "Meta JSONL")->required();
  c_caption->add_option("--out", caption.out, "Caption JSONL")->required();
  add_backend_flags(c_caption, caption.backend);
  c_caption->add_option("--jobs", caption.jobs, "Worker threads");

  GenFlags gen;
  auto* c_gen = app.add_subcommand("gen", "Build multi-task conversations");
  c_gen->add_option("--meta", gen.meta, "Meta JSONL")->required();
  c_gen->add_option("--captions", gen.captions, "Caption JSONL");
  c_gen->add_option("--out", gen.out, "Dataset JSONL (train side with --split)")->required();
  c_gen->add_option("--split", gen.split, "Split JSON routing cases to train or test");
  c_gen->add_option("--test-out", gen.test_out, "Test-side dataset JSONL");
  c_gen->add_option("--stats", gen.stats, "Write the stats block here as well");
  c_gen->add_option("--tasks", gen.tasks, "Comma-separated subset of ROC,RC,VG,MIA");
  c_gen->add_option("--max-objects-per-task", gen.max_objects, "Turns per region task");
  add_backend_flags(c_gen, gen.backend);
  c_gen->add_option("--jobs", gen.jobs, "Worker threads");

  SplitFlags split;
  auto* c_split = app.add_subcommand("split", "Assign cases to train or test");
  c_split->add_option("--meta", split.meta, "Meta JSONL")->required();
  c_split->add_option("--out", split.out, "Split JSON")->required();
  c_split->add_option("--seed", split.seed, "Seed");
  c_split->add_option("--test-fraction", split.test_fraction, "Target share of test images");

  std::string validate_in;
  auto* c_validate = app.add_subcommand("validate", "Check a dataset file");
  c_validate->add_option("--in,input", validate_in, "Dataset JSONL")->required();

  ScoreFlags score;
  auto* c_score = app.add_subcommand("score", "Score predictions against gold turns");
  c_score->add_option("--pred", score.pred, "Prediction JSONL")->required();
  c_score->add_option("--gold", score.gold, "Gold dataset JSONL")->required();
  c_score->add_option("--out", score.out, "Score JSON")->required();
  c_score->add_option("--markdown", score.markdown, "Markdown table (default: --out with .md)");
  c_score->add_option("--synonyms", score.synonyms, "Label synonym table JSON");
  c_score->add_option("--jobs", score.jobs, "Worker threads");

  std::string report_in, report_out;
  auto* c_report = app.add_subcommand("report", "Render a score JSON as Markdown");
  c_report->add_option("--in,input", report_in, "Score JSON")->required();
  c_report->add_option("--out", report_out, "Markdown file");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*c_synth) return cmd_synth(synth, out);
    if (*c_ingest) return cmd_ingest(ingest, out, err);
    if (*c_caption) return cmd_caption(caption, out);
    if (*c_gen) return cmd_gen(gen, out);
    if (*c_split) return cmd_split(split, out, err);
    if (*c_validate) return cmd_validate(validate_in, out);
    if (*c_score) return cmd_score(score, out, err);
    if (*c_report) return cmd_report(report_in, report_out, out);
  } catch (const Error& e) {
    err << "grit-forge: " << error_code_name(e.code()) << ": " << e.what() << '\n';
    return exit_status_for(e.code());
  } catch (const fs::filesystem_error& e) {
    err << "grit-forge: Io: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "grit-forge: " << e.what() << '\n';
    return kExitDataViolation;
  }
  return kExitConfig;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace grit
