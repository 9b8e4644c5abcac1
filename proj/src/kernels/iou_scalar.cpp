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

// Built with -ffp-contract=off so the arithmetic matches the vector kernels
// bit for bit.

#include <cassert>

#include "grit/kernels/iou_kernels.hpp"

namespace grit::kernels {
namespace {

// Same selection rule as the x86 and NEON max/min instructions.
inline double vmax(double a, double b) { return a > b ? a : b; }
inline double vmin(double a, double b) { return a < b ? a : b; }

inline double iou_kernel(double ax0, double ay0, double ax1, double ay1,
                         double area_a, double bx0, double by0, double bx1,
                         double by1) {
  const double iw = vmax(0.0, vmin(ax1, bx1) - vmax(ax0, bx0));
  const double ih = vmax(0.0, vmin(ay1, by1) - vmax(ay0, by0));
  const double inter = iw * ih;
  const double area_b = (bx1 - bx0) * (by1 - by0);
  const double uni = (area_a + area_b) - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

}  // namespace

void BoxBatch::reserve(std::size_t n) {
  x0.reserve(n);
  y0.reserve(n);
  x1.reserve(n);
  y1.reserve(n);
}

void BoxBatch::push_back(const BoxD& b) {
  x0.push_back(b.x0);
  y0.push_back(b.y0);
  x1.push_back(b.x1);
  y1.push_back(b.y1);
}

void BoxBatch::clear() {
  x0.clear();
  y0.clear();
  x1.clear();
  y1.clear();
}

double iou_scalar(const BoxD& a, const BoxD& b) {
  const double area_a = (a.x1 - a.x0) * (a.y1 - a.y0);
  return iou_kernel(a.x0, a.y0, a.x1, a.y1, area_a, b.x0, b.y0, b.x1, b.y1);
}

void iou_one_to_many_scalar(const BoxD& a, const BoxBatch& batch,
                            std::span<double> out) {
  assert(out.size() >= batch.size());
  const double area_a = (a.x1 - a.x0) * (a.y1 - a.y0);
  const std::size_t n = batch.size();
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = iou_kernel(a.x0, a.y0, a.x1, a.y1, area_a, batch.x0[i],
                        batch.y0[i], batch.x1[i], batch.y1[i]);
  }
}

}  // namespace grit::kernels
