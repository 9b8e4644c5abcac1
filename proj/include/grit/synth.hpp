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

// Deterministic synthetic corpus: geometric shapes stand in for organs across
// the eight modality labels. Everything derives from one seed.

#ifndef GRIT_SYNTH_HPP_
#define GRIT_SYNTH_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "grit/conversation_builder.hpp"
#include "grit/corpus_ingest.hpp"
#include "json.hpp"

namespace grit {

struct SynthOptions {
  std::uint64_t seed = 0;
  std::size_t cases = 40;
  int min_slices = 1;
  int max_slices = 6;
  int width = 128;
  int height = 128;
};

enum class ShapeKind { kEllipse, kRect };

struct SynthShape {
  std::string category;
  int label = 0;  // mask value, 1-based category index within the modality
  ShapeKind kind = ShapeKind::kEllipse;
  PixelBox extent;  // inclusive pixel bounds of the shape
};

struct SynthSlice {
  std::string image_id;
  std::string case_id;
  Modality modality = Modality::kCT;
  std::string scanned_region;
  std::string orientation;
  int width = 0;
  int height = 0;
  std::vector<CategoryEntry> categories;
  std::vector<SynthShape> shapes;  // drawn in order, later shapes on top
};

// Slices of case `case_index`. Case modalities cycle through all eight.
std::vector<SynthSlice> synth_case(const SynthOptions& options, std::size_t case_index);

// Meta straight from shape extents, without rasterizing.
MetaRecord synth_stub_meta(const SynthSlice& slice);

// Stub metas for every case, in case order.
std::vector<MetaRecord> synth_stub_metas(const SynthOptions& options);

struct SynthCorpus {
  std::filesystem::path manifest;
  std::size_t cases = 0;
  std::size_t images = 0;
};

// Writes images/, masks/ and manifest.jsonl under `dir`.
SynthCorpus write_synth_corpus(const std::filesystem::path& dir,
                               const SynthOptions& options);

struct PredictionNoise {
  double box_hit_rate = 0.7;    // VG answers with a small jitter
  double label_hit_rate = 0.75;  // ROC answers with the gold label
  double token_drop_rate = 0.2;  // RC and MIA
};

// One prediction per gold turn: {"image_id", "turn_id", "answer"} with the
// gold answer perturbed.
std::vector<nlohmann::json> synth_predictions(const std::vector<ConversationRecord>& golds,
                                              std::uint64_t seed,
                                              const PredictionNoise& noise = {});

}  // namespace grit

#endif  // GRIT_SYNTH_HPP_
