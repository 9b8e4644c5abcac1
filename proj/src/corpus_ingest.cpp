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

#include "grit/corpus_ingest.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "grit/error.hpp"
#include "grit/image_io.hpp"

namespace grit {
namespace {

using nlohmann::json;

[[noreturn]] void schema_error(const std::string& what) {
  throw Error(ErrorCode::kSchema, what);
}

const json& require(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) schema_error(std::string("missing field '") + key + "'");
  return *it;
}

std::string require_string(const json& j, const char* key) {
  const json& v = require(j, key);
  if (!v.is_string()) schema_error(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

int require_int(const json& j, const char* key) {
  const json& v = require(j, key);
  if (!v.is_number_integer()) {
    schema_error(std::string("field '") + key + "' must be an integer");
  }
  return v.get<int>();
}

std::string optional_string(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return {};
  if (!it->is_string()) schema_error(std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

std::filesystem::path resolve(const std::filesystem::path& base,
                              const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

ManifestEntry parse_manifest_entry(const json& j,
                                   const std::filesystem::path& base_dir) {
  if (!j.is_object()) schema_error("manifest line is not a JSON object");
  ManifestEntry e;
  e.image_id = require_string(j, "image_id");
  e.image_path = resolve(base_dir, require_string(j, "image_path"));
  if (auto it = j.find("mask_paths"); it != j.end()) {
    if (!it->is_array()) schema_error("field 'mask_paths' must be an array");
    for (const json& p : *it) {
      if (!p.is_string()) schema_error("mask_paths entries must be strings");
      e.mask_paths.push_back(resolve(base_dir, p.get<std::string>()));
    }
  } else {
    e.mask_paths.push_back(resolve(base_dir, require_string(j, "mask_path")));
  }
  if (e.mask_paths.empty()) schema_error("entry has no mask paths");
  e.case_id = require_string(j, "case_id");
  e.modality = require_string(j, "modality");
  e.scanned_region = optional_string(j, "scanned_region");
  e.orientation = optional_string(j, "orientation");
  e.width = require_int(j, "width");
  e.height = require_int(j, "height");
  if (e.width <= 0 || e.height <= 0) schema_error("width/height must be positive");
  const json& cats = require(j, "categories");
  if (!cats.is_array()) schema_error("field 'categories' must be an array");
  std::set<int> seen;
  for (const json& c : cats) {
    CategoryEntry ce{require_int(c, "id"), require_string(c, "name")};
    if (ce.id <= 0 || ce.id > 65535) schema_error("category id out of range");
    if (!seen.insert(ce.id).second) {
      schema_error("duplicate category id " + std::to_string(ce.id));
    }
    e.categories.push_back(std::move(ce));
  }
  return e;
}

json manifest_entry_to_json(const ManifestEntry& e,
                            const std::filesystem::path& base_dir) {
  auto rel = [&](const std::filesystem::path& p) {
    return p.lexically_relative(base_dir).generic_string();
  };
  json masks = json::array();
  for (const auto& p : e.mask_paths) masks.push_back(rel(p));
  json cats = json::array();
  for (const auto& c : e.categories) cats.push_back({{"id", c.id}, {"name", c.name}});
  json j;
  j["image_id"] = e.image_id;
  j["image_path"] = rel(e.image_path);
  if (e.mask_paths.size() == 1) {
    j["mask_path"] = masks[0];
  } else {
    j["mask_paths"] = masks;
  }
  j["case_id"] = e.case_id;
  j["modality"] = e.modality;
  j["scanned_region"] = e.scanned_region;
  j["orientation"] = e.orientation;
  j["width"] = e.width;
  j["height"] = e.height;
  j["categories"] = cats;
  return j;
}

LabelMask load_mask(const ManifestEntry& entry, std::size_t mask_index) {
  if (mask_index >= entry.mask_paths.size()) {
    throw Error(ErrorCode::kInvalidArgument, "mask index out of range");
  }
  const auto& path = entry.mask_paths[mask_index];
  GrayImage img = read_gray_image(path);
  if (img.width != entry.width || img.height != entry.height) {
    throw Error(ErrorCode::kDimensionMismatch,
                path.string() + ": decoded " + std::to_string(img.width) + "x" +
                    std::to_string(img.height) + ", manifest says " +
                    std::to_string(entry.width) + "x" +
                    std::to_string(entry.height));
  }
  std::map<int, std::string> table;
  for (const auto& c : entry.categories) table[c.id] = c.name;

  LabelMask mask;
  mask.width = img.width;
  mask.height = img.height;
  mask.labels = std::move(img.pixels);
  std::set<int> present(mask.labels.begin(), mask.labels.end());
  present.erase(0);
  for (int id : present) {
    auto it = table.find(id);
    if (it == table.end()) {
      throw Error(ErrorCode::kUnknownCategoryId,
                  path.string() + ": label id " + std::to_string(id) +
                      " has no entry in the category table");
    }
    mask.palette.emplace(id, it->second);
  }
  return mask;
}

std::vector<InstanceRecord> extract_instances(const LabelMask& mask,
                                              const ExtractOptions& options) {
  if (options.connectivity != 4 && options.connectivity != 8) {
    throw Error(ErrorCode::kInvalidArgument, "connectivity must be 4 or 8");
  }
  const int w = mask.width;
  const int h = mask.height;
  std::vector<std::uint8_t> visited(mask.labels.size(), 0);
  std::vector<std::pair<int, int>> stack;
  std::vector<InstanceRecord> out;

  static constexpr int kDx[8] = {1, -1, 0, 0, 1, 1, -1, -1};
  static constexpr int kDy[8] = {0, 0, 1, -1, 1, -1, 1, -1};
  const int neighbours = options.connectivity;

  // Raster scan: components are discovered in the order of their first
  // pixel, which is the secondary sort key.
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t idx = static_cast<std::size_t>(y) * w + x;
      const int label = mask.labels[idx];
      if (label == 0 || visited[idx]) continue;
      InstanceRecord rec;
      rec.category_id = label;
      auto pal = mask.palette.find(label);
      if (pal == mask.palette.end()) {
        throw Error(ErrorCode::kUnknownCategoryId,
                    "label id " + std::to_string(label) + " not in palette");
      }
      rec.category = pal->second;
      rec.box = PixelBox{x, y, x, y};
      visited[idx] = 1;
      stack.clear();
      stack.emplace_back(x, y);
      while (!stack.empty()) {
        auto [cx, cy] = stack.back();
        stack.pop_back();
        ++rec.area;
        rec.box.x0 = std::min(rec.box.x0, cx);
        rec.box.x1 = std::max(rec.box.x1, cx);
        rec.box.y0 = std::min(rec.box.y0, cy);
        rec.box.y1 = std::max(rec.box.y1, cy);
        for (int k = 0; k < neighbours; ++k) {
          const int nx = cx + kDx[k];
          const int ny = cy + kDy[k];
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          const std::size_t nidx = static_cast<std::size_t>(ny) * w + nx;
          if (visited[nidx] || mask.labels[nidx] != label) continue;
          visited[nidx] = 1;
          stack.emplace_back(nx, ny);
        }
      }
      if (rec.area >= options.min_area) out.push_back(std::move(rec));
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const InstanceRecord& a, const InstanceRecord& b) {
                     return a.category_id < b.category_id;
                   });

  if (options.merge_per_category) {
    std::vector<InstanceRecord> merged;
    for (const auto& rec : out) {
      if (!merged.empty() && merged.back().category_id == rec.category_id) {
        auto& m = merged.back();
        m.area += rec.area;
        m.box.x0 = std::min(m.box.x0, rec.box.x0);
        m.box.y0 = std::min(m.box.y0, rec.box.y0);
        m.box.x1 = std::max(m.box.x1, rec.box.x1);
        m.box.y1 = std::max(m.box.y1, rec.box.y1);
      } else {
        merged.push_back(rec);
      }
    }
    out = std::move(merged);
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].component_id = static_cast<int>(i);
  }
  return out;
}

NormBox normalize_box(const PixelBox& box, int width, int height) {
  if (width <= 0 || height <= 0 || box.x0 < 0 || box.y0 < 0 ||
      box.x0 > box.x1 || box.y0 > box.y1 || box.x1 >= width ||
      box.y1 >= height) {
    throw Error(ErrorCode::kOutOfBounds,
                "pixel box (" + std::to_string(box.x0) + "," +
                    std::to_string(box.y0) + "," + std::to_string(box.x1) +
                    "," + std::to_string(box.y1) + ") outside " +
                    std::to_string(width) + "x" + std::to_string(height));
  }
  auto clamp01 = [](double v) { return std::clamp(v, 0.0, 1.0); };
  const double w = width;
  const double h = height;
  return NormBox{clamp01(box.x0 / w), clamp01(box.y0 / h),
                 clamp01((box.x1 + 1) / w), clamp01((box.y1 + 1) / h)};
}

PixelBox denormalize_box(const NormBox& box, int width, int height) {
  auto snap = [](double v, int n) {
    return static_cast<int>(std::llround(v * n));
  };
  PixelBox p{snap(box.x0, width), snap(box.y0, height),
             snap(box.x1, width) - 1, snap(box.y1, height) - 1};
  p.x1 = std::max(p.x1, p.x0);
  p.y1 = std::max(p.y1, p.y0);
  return p;
}

Modality resolve_modality(std::string_view name,
                          const ModalityAliases& aliases) {
  if (auto m = modality_from_name(name)) return *m;
  if (auto it = aliases.find(ascii_lower(name)); it != aliases.end()) {
    return it->second;
  }
  throw Error(ErrorCode::kUnknownModality,
              "modality '" + std::string(name) +
                  "' is not one of CT, MR, X-ray, PET, Endoscopy, "
                  "Dermoscopy, Fundus, Ultrasound");
}

MetaRecord build_meta(const ManifestEntry& entry,
                      const std::vector<InstanceRecord>& instances,
                      const ModalityAliases& aliases) {
  MetaRecord meta;
  meta.image_id = entry.image_id;
  meta.case_id = entry.case_id;
  meta.modality = resolve_modality(entry.modality, aliases);
  meta.scanned_region = entry.scanned_region;
  meta.orientation = entry.orientation;
  meta.width = entry.width;
  meta.height = entry.height;
  meta.objects.reserve(instances.size());
  for (const auto& inst : instances) {
    meta.objects.push_back(
        {inst.category, normalize_box(inst.box, entry.width, entry.height)});
  }
  return meta;
}

MetaRecord ingest_entry(const ManifestEntry& entry,
                        const ExtractOptions& options,
                        const ModalityAliases& aliases) {
  // Resolve first so a bad modality fails before any decoding.
  resolve_modality(entry.modality, aliases);
  std::vector<InstanceRecord> all;
  for (std::size_t i = 0; i < entry.mask_paths.size(); ++i) {
    auto part = extract_instances(load_mask(entry, i), options);
    all.insert(all.end(), std::make_move_iterator(part.begin()),
               std::make_move_iterator(part.end()));
  }
  if (entry.mask_paths.size() > 1) {
    std::stable_sort(all.begin(), all.end(),
                     [](const InstanceRecord& a, const InstanceRecord& b) {
                       return a.category_id < b.category_id;
                     });
    for (std::size_t i = 0; i < all.size(); ++i) {
      all[i].component_id = static_cast<int>(i);
    }
  }
  return build_meta(entry, all, aliases);
}

json meta_to_json(const MetaRecord& meta) {
  json objects = json::array();
  for (const auto& o : meta.objects) {
    objects.push_back({{"category", o.category},
                       {"box", {o.box.x0, o.box.y0, o.box.x1, o.box.y1}}});
  }
  json j;
  j["image_id"] = meta.image_id;
  j["case_id"] = meta.case_id;
  j["modality"] = std::string(modality_name(meta.modality));
  j["scanned_region"] = meta.scanned_region;
  j["orientation"] = meta.orientation;
  j["width"] = meta.width;
  j["height"] = meta.height;
  j["objects"] = std::move(objects);
  return j;
}

MetaRecord meta_from_json(const json& j) {
  if (!j.is_object()) schema_error("meta line is not a JSON object");
  MetaRecord m;
  m.image_id = require_string(j, "image_id");
  m.case_id = require_string(j, "case_id");
  m.modality = resolve_modality(require_string(j, "modality"));
  m.scanned_region = optional_string(j, "scanned_region");
  m.orientation = optional_string(j, "orientation");
  m.width = require_int(j, "width");
  m.height = require_int(j, "height");
  const json& objects = require(j, "objects");
  if (!objects.is_array()) schema_error("field 'objects' must be an array");
  for (const json& o : objects) {
    MetaObject obj;
    obj.category = require_string(o, "category");
    const json& b = require(o, "box");
    if (!b.is_array() || b.size() != 4) schema_error("box must be [x0,y0,x1,y1]");
    for (const json& v : b) {
      if (!v.is_number()) schema_error("box coordinates must be numbers");
    }
    obj.box = NormBox{b[0].get<double>(), b[1].get<double>(), b[2].get<double>(),
                      b[3].get<double>()};
    if (!obj.box.valid()) schema_error("box outside [0,1] or inverted");
    m.objects.push_back(std::move(obj));
  }
  return m;
}

}  // namespace grit
