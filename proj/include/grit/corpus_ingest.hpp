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

#ifndef GRIT_CORPUS_INGEST_HPP_
#define GRIT_CORPUS_INGEST_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "grit/types.hpp"
#include "json.hpp"

namespace grit {

struct CategoryEntry {
  int id = 0;
  std::string name;
};

// One line of the ingest manifest. Paths are resolved against the manifest's
// directory when relative.
struct ManifestEntry {
  std::string image_id;
  std::filesystem::path image_path;
  std::vector<std::filesystem::path> mask_paths;
  std::string case_id;
  std::string modality;
  std::string scanned_region;
  std::string orientation;
  int width = 0;
  int height = 0;
  std::vector<CategoryEntry> categories;
};

// Throws Error{kSchema} on missing or mistyped fields.
ManifestEntry parse_manifest_entry(const nlohmann::json& j,
                                   const std::filesystem::path& base_dir);
nlohmann::json manifest_entry_to_json(const ManifestEntry& e,
                                      const std::filesystem::path& base_dir);

struct LabelMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> labels;  // row-major, 0 = background
  std::map<int, std::string> palette;  // only ids present in `labels`

  std::uint16_t at(int x, int y) const {
    return labels[static_cast<std::size_t>(y) * width + x];
  }
};

// Decodes mask `mask_index` of `entry` and joins its ids to the category
// table. Errors: kMissingFile, kDecode, kDimensionMismatch,
// kUnknownCategoryId.
LabelMask load_mask(const ManifestEntry& entry, std::size_t mask_index = 0);

struct InstanceRecord {
  std::string category;
  int category_id = 0;
  std::int64_t area = 0;
  PixelBox box;
  int component_id = 0;
};

struct ExtractOptions {
  int connectivity = 8;  // 4 or 8
  std::int64_t min_area = 10;
  // One union box per category instead of one box per component.
  bool merge_per_category = false;
};

// Connected components of every nonzero category, ordered by category id
// and then by the raster position of each component's first pixel.
std::vector<InstanceRecord> extract_instances(const LabelMask& mask,
                                              const ExtractOptions& options);

// Right/bottom edges are exclusive: (x0/w, y0/h, (x1+1)/w, (y1+1)/h).
// Throws Error{kOutOfBounds} when `box` does not lie inside the image.
NormBox normalize_box(const PixelBox& box, int width, int height);

// Inverse of normalize_box on the pixel grid.
PixelBox denormalize_box(const NormBox& box, int width, int height);

struct MetaObject {
  std::string category;
  NormBox box;
  friend bool operator==(const MetaObject&, const MetaObject&) = default;
};

struct MetaRecord {
  std::string image_id;
  std::string case_id;
  Modality modality = Modality::kCT;
  std::string scanned_region;
  std::string orientation;
  int width = 0;
  int height = 0;
  std::vector<MetaObject> objects;
  friend bool operator==(const MetaRecord&, const MetaRecord&) = default;
};

// Extra spellings accepted for modality names, keyed by lower-case alias.
using ModalityAliases = std::map<std::string, Modality>;

// Throws Error{kUnknownModality} when the manifest modality is neither one of
// the eight canonical names (any case) nor a configured alias.
Modality resolve_modality(std::string_view name,
                          const ModalityAliases& aliases = {});

MetaRecord build_meta(const ManifestEntry& entry,
                      const std::vector<InstanceRecord>& instances,
                      const ModalityAliases& aliases = {});

// load_mask + extract_instances over every mask of the entry, then build_meta.
MetaRecord ingest_entry(const ManifestEntry& entry,
                        const ExtractOptions& options,
                        const ModalityAliases& aliases = {});

nlohmann::json meta_to_json(const MetaRecord& meta);
MetaRecord meta_from_json(const nlohmann::json& j);

}  // namespace grit

#endif  // GRIT_CORPUS_INGEST_HPP_
