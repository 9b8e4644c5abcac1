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

// AArch64 only. Compare-and-select stands in for vmaxq/vminq because FMAX
// orders signed zeros differently from the scalar reference.

#include <arm_neon.h>

#include <cassert>

#include "grit/kernels/iou_kernels.hpp"

namespace grit::kernels {
namespace {

inline float64x2_t sel_max(float64x2_t a, float64x2_t b) {
  return vbslq_f64(vcgtq_f64(a, b), a, b);
}
inline float64x2_t sel_min(float64x2_t a, float64x2_t b) {
  return vbslq_f64(vcltq_f64(a, b), a, b);
}

}  // namespace

void iou_one_to_many_neon(const BoxD& a, const BoxBatch& batch,
                          std::span<double> out) {
  assert(out.size() >= batch.size());
  const std::size_t n = batch.size();
  const double area_a_s = (a.x1 - a.x0) * (a.y1 - a.y0);
  const float64x2_t ax0 = vdupq_n_f64(a.x0);
  const float64x2_t ay0 = vdupq_n_f64(a.y0);
  const float64x2_t ax1 = vdupq_n_f64(a.x1);
  const float64x2_t ay1 = vdupq_n_f64(a.y1);
  const float64x2_t area_a = vdupq_n_f64(area_a_s);
  const float64x2_t zero = vdupq_n_f64(0.0);

  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t bx0 = vld1q_f64(batch.x0.data() + i);
    const float64x2_t by0 = vld1q_f64(batch.y0.data() + i);
    const float64x2_t bx1 = vld1q_f64(batch.x1.data() + i);
    const float64x2_t by1 = vld1q_f64(batch.y1.data() + i);
    const float64x2_t iw =
        sel_max(zero, vsubq_f64(sel_min(ax1, bx1), sel_max(ax0, bx0)));
    const float64x2_t ih =
        sel_max(zero, vsubq_f64(sel_min(ay1, by1), sel_max(ay0, by0)));
    const float64x2_t inter = vmulq_f64(iw, ih);
    const float64x2_t area_b =
        vmulq_f64(vsubq_f64(bx1, bx0), vsubq_f64(by1, by0));
    const float64x2_t uni = vsubq_f64(vaddq_f64(area_a, area_b), inter);
    const uint64x2_t positive = vcgtq_f64(uni, zero);
    const float64x2_t ratio = vdivq_f64(inter, uni);
    vst1q_f64(out.data() + i, vbslq_f64(positive, ratio, zero));
  }
  for (; i < n; ++i) {
    out[i] = iou_scalar(a, {batch.x0[i], batch.y0[i], batch.x1[i], batch.y1[i]});
  }
}

}  // namespace grit::kernels
