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

#ifndef GRIT_TYPES_HPP_
#define GRIT_TYPES_HPP_

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace grit {

// Integer pixel box, inclusive corners, top-left origin.
struct PixelBox {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;

  int width() const { return x1 - x0 + 1; }
  int height() const { return y1 - y0 + 1; }
  friend bool operator==(const PixelBox&, const PixelBox&) = default;
};

// Box in fractions of image width and height, each coordinate in [0, 1].
struct NormBox {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  bool valid() const {
    return 0.0 <= x0 && x0 <= x1 && x1 <= 1.0 && 0.0 <= y0 && y0 <= y1 &&
           y1 <= 1.0;
  }
  friend bool operator==(const NormBox&, const NormBox&) = default;
};

inline constexpr int kQuantMax = 1000;

// Box on the integer [0, 1000] grid used by the grounding markup.
struct QuantBox {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;

  bool valid() const {
    return 0 <= x0 && x0 <= x1 && x1 <= kQuantMax && 0 <= y0 && y0 <= y1 &&
           y1 <= kQuantMax;
  }
  friend bool operator==(const QuantBox&, const QuantBox&) = default;
};

enum class Modality {
  kCT,
  kMR,
  kXRay,
  kPET,
  kEndoscopy,
  kDermoscopy,
  kFundus,
  kUltrasound,
};

inline constexpr std::array<Modality, 8> kAllModalities = {
    Modality::kCT,         Modality::kMR,         Modality::kXRay,
    Modality::kPET,        Modality::kEndoscopy,  Modality::kDermoscopy,
    Modality::kFundus,     Modality::kUltrasound,
};

std::string_view modality_name(Modality m);

// Case-insensitive lookup against the eight canonical names.
std::optional<Modality> modality_from_name(std::string_view name);

enum class TaskKind { kROC, kRC, kVG, kMIA };

inline constexpr std::array<TaskKind, 4> kAllTasks = {
    TaskKind::kROC, TaskKind::kRC, TaskKind::kVG, TaskKind::kMIA};

std::string_view task_name(TaskKind t);
std::optional<TaskKind> task_from_name(std::string_view name);

// Region-in tasks carry a referred box in the question; VG carries one in
// the answer.
inline bool is_region_task(TaskKind t) { return t != TaskKind::kMIA; }

std::string ascii_lower(std::string_view s);

}  // namespace grit

#endif  // GRIT_TYPES_HPP_
