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

#include "grit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "grit/error.hpp"
#include "grit/image_io.hpp"
#include "grit/rng.hpp"

namespace grit {
namespace {

struct Organ {
  const char* name;
  int instances;
};

struct Profile {
  const char* region;
  const char* orientation;
  std::vector<Organ> organs;
};

const Profile& profile_for(Modality m) {
  static const std::map<Modality, Profile> kProfiles = {
      {Modality::kCT, {"abdomen", "axial", {{"liver", 1}, {"kidney", 2}, {"spleen", 1}}}},
      {Modality::kMR, {"brain", "axial", {{"tumor", 1}, {"ventricle", 2}}}},
      {Modality::kXRay, {"chest", "frontal", {{"lung", 2}, {"heart", 1}}}},
      {Modality::kPET, {"whole body", "coronal", {{"lesion", 2}}}},
      {Modality::kEndoscopy, {"colon", "", {{"polyp", 1}}}},
      {Modality::kDermoscopy, {"skin", "", {{"skin lesion", 1}}}},
      {Modality::kFundus, {"retina", "", {{"optic disc", 1}, {"optic cup", 1}}}},
      {Modality::kUltrasound, {"neck", "transverse", {{"thyroid nodule", 1}}}},
  };
  return kProfiles.at(m);
}

const std::vector<std::string>& all_organ_names() {
  static const std::vector<std::string> kNames = [] {
    std::vector<std::string> out;
    for (Modality m : kAllModalities) {
      for (const Organ& o : profile_for(m).organs) {
        if (std::find(out.begin(), out.end(), o.name) == out.end()) out.push_back(o.name);
      }
    }
    return out;
  }();
  return kNames;
}

std::uint64_t stream_seed(std::uint64_t seed, std::string_view tag, std::uint64_t index) {
  return SplitMix64::mix(seed ^ fnv1a64(tag) ^ SplitMix64::mix(index + 1));
}

double uniform(SplitMix64& rng, double lo, double hi) {
  return lo + (hi - lo) * rng.unit();
}

std::string zero_pad(std::size_t v, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%0*zu", width, v);
  return buf;
}

struct Blob {
  std::string category;
  int label;
  ShapeKind kind;
  double cx, cy, sx, sy;  // normalized center and size
  double dx, dy, ds;      // per-slice drift
};

PixelBox to_pixels(double cx, double cy, double sx, double sy, int w, int h) {
  auto lo = [](double c, double s, int n) {
    return std::clamp(static_cast<int>(std::floor((c - s / 2) * n)), 0, n - 1);
  };
  auto hi = [](double c, double s, int n) {
    return std::clamp(static_cast<int>(std::ceil((c + s / 2) * n)) - 1, 0, n - 1);
  };
  PixelBox b{lo(cx, sx, w), lo(cy, sy, h), hi(cx, sx, w), hi(cy, sy, h)};
  b.x1 = std::max(b.x1, std::min(b.x0 + 3, w - 1));
  b.y1 = std::max(b.y1, std::min(b.y0 + 3, h - 1));
  return b;
}

bool inside(const SynthShape& s, int x, int y) {
  const PixelBox& e = s.extent;
  if (x < e.x0 || x > e.x1 || y < e.y0 || y > e.y1) return false;
  if (s.kind == ShapeKind::kRect) return true;
  const double rx = e.width() / 2.0;
  const double ry = e.height() / 2.0;
  const double u = (x + 0.5 - (e.x0 + rx)) / rx;
  const double v = (y + 0.5 - (e.y0 + ry)) / ry;
  return u * u + v * v <= 1.0;
}

QuantBox jitter(QuantBox b, SplitMix64& rng, int amount) {
  auto c = [](std::int64_t v) { return static_cast<int>(std::clamp<std::int64_t>(v, 0, kQuantMax)); };
  QuantBox out{c(b.x0 + rng.between(-amount, amount)), c(b.y0 + rng.between(-amount, amount)),
               c(b.x1 + rng.between(-amount, amount)), c(b.y1 + rng.between(-amount, amount))};
  if (out.x0 > out.x1) std::swap(out.x0, out.x1);
  if (out.y0 > out.y1) std::swap(out.y0, out.y1);
  return out;
}

QuantBox displace(QuantBox b, SplitMix64& rng) {
  const int w = b.x1 - b.x0;
  const int h = b.y1 - b.y0;
  const int sx = rng.below(2) ? 1 : -1;
  const int sy = rng.below(2) ? 1 : -1;
  int x0 = b.x0 + sx * std::max(w, 150);
  int y0 = b.y0 + sy * std::max(h, 150);
  x0 = std::clamp(x0, 0, kQuantMax - w);
  y0 = std::clamp(y0, 0, kQuantMax - h);
  return QuantBox{x0, y0, x0 + w, y0 + h};
}

std::string drop_tokens(const std::string& text, SplitMix64& rng, double rate) {
  std::vector<std::string> words;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t end = text.find(' ', pos);
    const std::string w = text.substr(pos, end == std::string::npos ? end : end - pos);
    if (!w.empty()) words.push_back(w);
    if (end == std::string::npos) break;
    pos = end + 1;
  }
  std::string out;
  for (const auto& w : words) {
    if (rng.unit() < rate) continue;
    if (!out.empty()) out += ' ';
    out += w;
  }
  if (out.empty() && !words.empty()) out = words.front();
  return out;
}

}  // namespace

std::vector<SynthSlice> synth_case(const SynthOptions& options, std::size_t case_index) {
  if (options.min_slices < 1 || options.max_slices < options.min_slices) {
    throw Error(ErrorCode::kInvalidArgument, "slice range must satisfy 1 <= min <= max");
  }
  if (options.width < 8 || options.height < 8) {
    throw Error(ErrorCode::kInvalidArgument, "synthetic images must be at least 8x8");
  }
  SplitMix64 rng(stream_seed(options.seed, "case", case_index));
  const Modality modality = kAllModalities[case_index % kAllModalities.size()];
  const Profile& profile = profile_for(modality);

  std::vector<CategoryEntry> categories;
  std::vector<Blob> blobs;
  for (std::size_t k = 0; k < profile.organs.size(); ++k) {
    const Organ& organ = profile.organs[k];
    const int label = static_cast<int>(k) + 1;
    categories.push_back({label, organ.name});
    for (int i = 0; i < organ.instances; ++i) {
      Blob b{organ.name, label,
             rng.below(3) == 0 ? ShapeKind::kRect : ShapeKind::kEllipse,
             0, 0, uniform(rng, 0.08, 0.22), uniform(rng, 0.08, 0.22),
             uniform(rng, -0.015, 0.015), uniform(rng, -0.015, 0.015),
             uniform(rng, -0.03, 0.03)};
      // Paired organs sit on opposite halves so they stay separate components.
      const double half = organ.instances > 1 ? 0.5 * i : 0.0;
      const double span = organ.instances > 1 ? 0.5 : 1.0;
      b.cx = half + span * uniform(rng, 0.3, 0.7);
      b.cy = uniform(rng, 0.2, 0.8);
      blobs.push_back(b);
    }
  }

  const int slices = static_cast<int>(rng.between(options.min_slices, options.max_slices));
  const std::string case_id = "case" + zero_pad(case_index, 5);
  std::vector<SynthSlice> out;
  for (int s = 0; s < slices; ++s) {
    SynthSlice slice;
    slice.case_id = case_id;
    slice.image_id = case_id + "_s" + zero_pad(static_cast<std::size_t>(s), 2);
    slice.modality = modality;
    slice.scanned_region = profile.region;
    slice.orientation = profile.orientation;
    slice.width = options.width;
    slice.height = options.height;
    slice.categories = categories;
    for (const Blob& b : blobs) {
      if (rng.unit() >= 0.85) continue;
      const double scale = std::max(0.5, 1.0 + b.ds * s);
      slice.shapes.push_back({b.category, b.label, b.kind,
                              to_pixels(std::clamp(b.cx + b.dx * s, 0.1, 0.9),
                                        std::clamp(b.cy + b.dy * s, 0.1, 0.9),
                                        b.sx * scale, b.sy * scale, options.width,
                                        options.height)});
    }
    if (slice.shapes.empty()) {
      const Blob& b = blobs.front();
      slice.shapes.push_back({b.category, b.label, b.kind,
                              to_pixels(b.cx, b.cy, b.sx, b.sy, options.width,
                                        options.height)});
    }
    out.push_back(std::move(slice));
  }
  return out;
}

MetaRecord synth_stub_meta(const SynthSlice& slice) {
  MetaRecord meta;
  meta.image_id = slice.image_id;
  meta.case_id = slice.case_id;
  meta.modality = slice.modality;
  meta.scanned_region = slice.scanned_region;
  meta.orientation = slice.orientation;
  meta.width = slice.width;
  meta.height = slice.height;
  std::vector<const SynthShape*> order;
  for (const auto& s : slice.shapes) order.push_back(&s);
  std::stable_sort(order.begin(), order.end(), [](const SynthShape* a, const SynthShape* b) {
    return a->label < b->label;
  });
  for (const SynthShape* s : order) {
    meta.objects.push_back({s->category, normalize_box(s->extent, slice.width, slice.height)});
  }
  return meta;
}

std::vector<MetaRecord> synth_stub_metas(const SynthOptions& options) {
  std::vector<MetaRecord> out;
  for (std::size_t c = 0; c < options.cases; ++c) {
    for (const auto& slice : synth_case(options, c)) out.push_back(synth_stub_meta(slice));
  }
  return out;
}

SynthCorpus write_synth_corpus(const std::filesystem::path& dir, const SynthOptions& options) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir / "images", ec);
  if (!ec) fs::create_directories(dir / "masks", ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());

  SynthCorpus corpus;
  corpus.manifest = dir / "manifest.jsonl";
  std::ofstream manifest(corpus.manifest, std::ios::binary);
  if (!manifest) throw Error(ErrorCode::kIo, "cannot write " + corpus.manifest.string());

  for (std::size_t c = 0; c < options.cases; ++c) {
    for (const SynthSlice& slice : synth_case(options, c)) {
      SplitMix64 noise(stream_seed(options.seed, slice.image_id, 0));
      GrayImage mask{slice.width, slice.height,
                     std::vector<std::uint16_t>(static_cast<std::size_t>(slice.width) *
                                                slice.height)};
      GrayImage image = mask;
      for (int y = 0; y < slice.height; ++y) {
        for (int x = 0; x < slice.width; ++x) {
          std::uint16_t label = 0;
          for (const SynthShape& s : slice.shapes) {
            if (inside(s, x, y)) label = static_cast<std::uint16_t>(s.label);
          }
          const std::size_t i = static_cast<std::size_t>(y) * slice.width + x;
          mask.pixels[i] = label;
          image.pixels[i] =
              static_cast<std::uint16_t>(20 + 60 * label + noise.below(24));
        }
      }
      ManifestEntry entry;
      entry.image_id = slice.image_id;
      entry.image_path = dir / "images" / (slice.image_id + ".png");
      entry.mask_paths = {dir / "masks" / (slice.image_id + ".png")};
      entry.case_id = slice.case_id;
      entry.modality = std::string(modality_name(slice.modality));
      entry.scanned_region = slice.scanned_region;
      entry.orientation = slice.orientation;
      entry.width = slice.width;
      entry.height = slice.height;
      entry.categories = slice.categories;
      write_gray_png(entry.image_path, image);
      write_gray_png(entry.mask_paths.front(), mask);
      manifest << manifest_entry_to_json(entry, dir).dump() << '\n';
      ++corpus.images;
    }
    ++corpus.cases;
  }
  if (!manifest.flush()) throw Error(ErrorCode::kIo, "cannot write " + corpus.manifest.string());
  return corpus;
}

std::vector<nlohmann::json> synth_predictions(const std::vector<ConversationRecord>& golds,
                                              std::uint64_t seed,
                                              const PredictionNoise& noise) {
  std::vector<nlohmann::json> out;
  const auto& names = all_organ_names();
  for (const ConversationRecord& rec : golds) {
    for (const Turn& turn : rec.turns) {
      SplitMix64 rng(stream_seed(seed, rec.image_id, static_cast<std::uint64_t>(turn.turn_id)));
      MarkedText answer;
      switch (turn.task) {
        case TaskKind::kVG:
          answer = turn.answer;
          for (Segment& seg : answer.segments) {
            if (auto* ref = std::get_if<RefSegment>(&seg)) {
              for (QuantBox& b : ref->boxes) {
                b = rng.unit() < noise.box_hit_rate ? jitter(b, rng, 15) : displace(b, rng);
              }
            }
          }
          break;
        case TaskKind::kROC: {
          std::string label = plain_text(turn.answer);
          if (rng.unit() >= noise.label_hit_rate) {
            const std::string& other = names[rng.below(names.size() - 1)];
            label = other == label ? names.back() : other;
          }
          answer.text(label);
          break;
        }
        case TaskKind::kRC:
        case TaskKind::kMIA:
          answer.text(drop_tokens(plain_text(turn.answer), rng, noise.token_drop_rate));
          break;
      }
      out.push_back({{"image_id", rec.image_id},
                     {"turn_id", turn.turn_id},
                     {"answer", render(canonicalize(std::move(answer)))}});
    }
  }
  return out;
}

}  // namespace grit
