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

#include <atomic>
#include <cassert>
#include <cstdlib>
#include <string>

#include "grit/kernels/iou_kernels.hpp"
#include "grit/types.hpp"

namespace grit::kernels {
namespace {

bool cpu_has(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return true;
    case Isa::kAvx2:
#if defined(GRIT_HAVE_AVX2_KERNELS)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Isa::kNeon:
#if defined(GRIT_HAVE_NEON_KERNELS)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Isa detect() {
  if (const char* env = std::getenv("GRIT_SIMD")) {
    const std::string want = ascii_lower(env);
    for (Isa isa : {Isa::kScalar, Isa::kAvx2, Isa::kNeon}) {
      if (want == isa_name(isa) && cpu_has(isa)) return isa;
    }
  }
  if (cpu_has(Isa::kAvx2)) return Isa::kAvx2;
  if (cpu_has(Isa::kNeon)) return Isa::kNeon;
  return Isa::kScalar;
}

std::atomic<Isa>& selected() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::kScalar: return "scalar";
    case Isa::kAvx2: return "avx2";
    case Isa::kNeon: return "neon";
  }
  return "";
}

std::vector<Isa> available_isas() {
  std::vector<Isa> out;
  for (Isa isa : {Isa::kScalar, Isa::kAvx2, Isa::kNeon}) {
    if (cpu_has(isa)) out.push_back(isa);
  }
  return out;
}

Isa active_isa() { return selected().load(std::memory_order_relaxed); }

bool force_isa(std::optional<Isa> isa) {
  if (!isa) {
    selected().store(detect());
    return true;
  }
  if (!cpu_has(*isa)) return false;
  selected().store(*isa);
  return true;
}

void iou_one_to_many(const BoxD& a, const BoxBatch& batch,
                     std::span<double> out) {
  switch (active_isa()) {
#if defined(GRIT_HAVE_AVX2_KERNELS)
    case Isa::kAvx2:
      iou_one_to_many_avx2(a, batch, out);
      return;
#endif
#if defined(GRIT_HAVE_NEON_KERNELS)
    case Isa::kNeon:
      iou_one_to_many_neon(a, batch, out);
      return;
#endif
    default:
      iou_one_to_many_scalar(a, batch, out);
      return;
  }
}

void iou_matrix(std::span<const BoxD> rows, const BoxBatch& cols,
                std::span<double> out) {
  assert(out.size() >= rows.size() * cols.size());
  const std::size_t m = cols.size();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    iou_one_to_many(rows[r], cols, out.subspan(r * m, m));
  }
}

}  // namespace grit::kernels
