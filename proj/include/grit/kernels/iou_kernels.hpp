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

#ifndef GRIT_KERNELS_IOU_KERNELS_HPP_
#define GRIT_KERNELS_IOU_KERNELS_HPP_

// Batched box IoU. The scalar kernel is the reference; vector variants must
// agree with it exactly (same operation order, no contraction) and are
// selected once at runtime from the CPU feature set. GRIT_SIMD=scalar|avx2|
// neon in the environment pins the choice.

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace grit::kernels {

// Axis-aligned box with half-open extent [x0, x1) x [y0, y1). Any consistent
// unit works; IoU is scale-free.
struct BoxD {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;
};

// Structure-of-arrays batch, the layout the vector kernels stream over.
struct BoxBatch {
  std::vector<double> x0, y0, x1, y1;

  std::size_t size() const { return x0.size(); }
  void reserve(std::size_t n);
  void push_back(const BoxD& b);
  void clear();
};

enum class Isa { kScalar, kAvx2, kNeon };

std::string_view isa_name(Isa isa);

// Kernels compiled into this binary and runnable on this CPU.
std::vector<Isa> available_isas();

// Currently selected kernel family.
Isa active_isa();

// Pins the kernel family; nullopt restores automatic selection. Returns false
// when `isa` is not available.
bool force_isa(std::optional<Isa> isa);

// Scalar reference: out[i] = IoU(a, batch[i]); 0 when the union is empty.
void iou_one_to_many_scalar(const BoxD& a, const BoxBatch& batch,
                            std::span<double> out);
#if defined(GRIT_HAVE_AVX2_KERNELS)
void iou_one_to_many_avx2(const BoxD& a, const BoxBatch& batch,
                          std::span<double> out);
#endif
#if defined(GRIT_HAVE_NEON_KERNELS)
void iou_one_to_many_neon(const BoxD& a, const BoxBatch& batch,
                          std::span<double> out);
#endif

// Dispatching entry points.
void iou_one_to_many(const BoxD& a, const BoxBatch& batch,
                     std::span<double> out);

// Row-major |rows| x |cols| matrix.
void iou_matrix(std::span<const BoxD> rows, const BoxBatch& cols,
                std::span<double> out);

double iou_scalar(const BoxD& a, const BoxD& b);

}  // namespace grit::kernels

#endif  // GRIT_KERNELS_IOU_KERNELS_HPP_
