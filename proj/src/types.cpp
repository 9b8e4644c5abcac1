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

#include "grit/types.hpp"

namespace grit {

std::string_view modality_name(Modality m) {
  switch (m) {
    case Modality::kCT: return "CT";
    case Modality::kMR: return "MR";
    case Modality::kXRay: return "X-ray";
    case Modality::kPET: return "PET";
    case Modality::kEndoscopy: return "Endoscopy";
    case Modality::kDermoscopy: return "Dermoscopy";
    case Modality::kFundus: return "Fundus";
    case Modality::kUltrasound: return "Ultrasound";
  }
  return "";
}

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::optional<Modality> modality_from_name(std::string_view name) {
  const std::string folded = ascii_lower(name);
  for (Modality m : kAllModalities) {
    if (ascii_lower(modality_name(m)) == folded) return m;
  }
  return std::nullopt;
}

std::string_view task_name(TaskKind t) {
  switch (t) {
    case TaskKind::kROC: return "ROC";
    case TaskKind::kRC: return "RC";
    case TaskKind::kVG: return "VG";
    case TaskKind::kMIA: return "MIA";
  }
  return "";
}

std::optional<TaskKind> task_from_name(std::string_view name) {
  const std::string folded = ascii_lower(name);
  for (TaskKind t : kAllTasks) {
    if (ascii_lower(task_name(t)) == folded) return t;
  }
  return std::nullopt;
}

}  // namespace grit
