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

// Compiled with -mavx2 -ffp-contract=off; only called after a runtime CPU
// check.

#include <immintrin.h>

#include <cassert>

#include "grit/kernels/iou_kernels.hpp"

namespace grit::kernels {

void iou_one_to_many_avx2(const BoxD& a, const BoxBatch& batch,
                          std::span<double> out) {
  assert(out.size() >= batch.size());
  const std::size_t n = batch.size();
  const double area_a_s = (a.x1 - a.x0) * (a.y1 - a.y0);

  const __m256d ax0 = _mm256_set1_pd(a.x0);
  const __m256d ay0 = _mm256_set1_pd(a.y0);
  const __m256d ax1 = _mm256_set1_pd(a.x1);
  const __m256d ay1 = _mm256_set1_pd(a.y1);
  const __m256d area_a = _mm256_set1_pd(area_a_s);
  const __m256d zero = _mm256_setzero_pd();

  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d bx0 = _mm256_loadu_pd(batch.x0.data() + i);
    const __m256d by0 = _mm256_loadu_pd(batch.y0.data() + i);
    const __m256d bx1 = _mm256_loadu_pd(batch.x1.data() + i);
    const __m256d by1 = _mm256_loadu_pd(batch.y1.data() + i);

    // max_pd/min_pd return the second operand on ties, which the scalar
    // reference mirrors with a > b ? a : b.
    const __m256d iw = _mm256_max_pd(
        zero, _mm256_sub_pd(_mm256_min_pd(ax1, bx1), _mm256_max_pd(ax0, bx0)));
    const __m256d ih = _mm256_max_pd(
        zero, _mm256_sub_pd(_mm256_min_pd(ay1, by1), _mm256_max_pd(ay0, by0)));
    const __m256d inter = _mm256_mul_pd(iw, ih);
    const __m256d area_b =
        _mm256_mul_pd(_mm256_sub_pd(bx1, bx0), _mm256_sub_pd(by1, by0));
    const __m256d uni = _mm256_sub_pd(_mm256_add_pd(area_a, area_b), inter);
    const __m256d positive = _mm256_cmp_pd(uni, zero, _CMP_GT_OQ);
    const __m256d ratio = _mm256_div_pd(inter, uni);
    _mm256_storeu_pd(out.data() + i, _mm256_and_pd(positive, ratio));
  }
  for (; i < n; ++i) {
    out[i] = iou_scalar(a, {batch.x0[i], batch.y0[i], batch.x1[i], batch.y1[i]});
  }
}

}  // namespace grit::kernels
