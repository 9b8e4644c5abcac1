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

#include <gtest/gtest.h>

#include <bit>
#include <cstring>

#include "grit/kernels/iou_kernels.hpp"
#include "grit/metrics.hpp"
#include "grit/rng.hpp"
#include "support/oracles.hpp"

namespace grit {
namespace {

using kernels::BoxBatch;
using kernels::BoxD;
using kernels::Isa;

oracle::GridBox random_grid_box(SplitMix64& rng) {
  const int x0 = static_cast<int>(rng.between(0, oracle::kGrid));
  const int y0 = static_cast<int>(rng.between(0, oracle::kGrid));
  return {x0, y0, static_cast<int>(rng.between(x0, oracle::kGrid)),
          static_cast<int>(rng.between(y0, oracle::kGrid))};
}

NormBox to_norm(const oracle::GridBox& g) {
  return NormBox{g.x0 / 1000.0, g.y0 / 1000.0, g.x1 / 1000.0, g.y1 / 1000.0};
}

TEST(Iou, Examples) {
  const NormBox a{0.1, 0.1, 0.4, 0.4};
  EXPECT_EQ(iou(a, a), 1.0);
  EXPECT_EQ(iou(a, NormBox{0.5, 0.5, 0.6, 0.6}), 0.0);
  EXPECT_NEAR(iou(NormBox{0, 0, .10, .10}, NormBox{.05, .05, .15, .15}), 25.0 / 175.0, 1e-12);
  EXPECT_EQ(iou(NormBox{0.2, 0.2, 0.2, 0.2}, NormBox{0.2, 0.2, 0.2, 0.2}), 0.0);
}

TEST(Iou, MatchesPixelGridOracle) {
  SplitMix64 rng(31337);
  for (int i = 0; i < 2000; ++i) {
    const auto a = random_grid_box(rng);
    const auto b = random_grid_box(rng);
    ASSERT_NEAR(iou(to_norm(a), to_norm(b)), oracle::pixel_grid_iou(a, b), 1e-9);
    const QuantBox qa{a.x0, a.y0, a.x1, a.y1};
    const QuantBox qb{b.x0, b.y0, b.x1, b.y1};
    ASSERT_NEAR(iou(qa, qb), oracle::pixel_grid_iou(a, b), 1e-12);
  }
}

TEST(Iou, ExactHalfOnQuantGrid) {
  // b lies inside a and covers half of it.
  const QuantBox a{0, 0, 200, 100};
  const QuantBox b{0, 0, 100, 100};
  EXPECT_EQ(iou(a, b), 0.5);
}

BoxBatch random_batch(SplitMix64& rng, std::size_t n, bool coarse) {
  BoxBatch batch;
  for (std::size_t i = 0; i < n; ++i) {
    if (coarse) {
      // Small integer grid makes ties and shared edges common.
      const double x0 = static_cast<double>(rng.between(0, 6));
      const double y0 = static_cast<double>(rng.between(0, 6));
      batch.push_back({x0, y0, x0 + static_cast<double>(rng.between(0, 4)),
                       y0 + static_cast<double>(rng.between(0, 4))});
    } else {
      const double x0 = rng.unit();
      const double y0 = rng.unit();
      batch.push_back({x0, y0, x0 + rng.unit() * (1 - x0), y0 + rng.unit() * (1 - y0)});
    }
  }
  return batch;
}

bool same_bits(double a, double b) { return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b); }

TEST(IouKernels, EveryIsaMatchesScalarBitForBit) {
  SplitMix64 rng(8);
  const auto isas = kernels::available_isas();
  ASSERT_FALSE(isas.empty());
  EXPECT_EQ(isas.front(), Isa::kScalar);
  for (int trial = 0; trial < 400; ++trial) {
    const bool coarse = trial % 2 == 0;
    const std::size_t n = static_cast<std::size_t>(trial % 37);
    const BoxBatch batch = random_batch(rng, n, coarse);
    const BoxBatch probe = random_batch(rng, 1, coarse);
    const BoxD a{probe.x0[0], probe.y0[0], probe.x1[0], probe.y1[0]};
    std::vector<double> want(n), got(n);
    kernels::iou_one_to_many_scalar(a, batch, want);
    for (std::size_t i = 0; i < n; ++i) {
      ASSERT_TRUE(same_bits(want[i], kernels::iou_scalar(a, {batch.x0[i], batch.y0[i], batch.x1[i], batch.y1[i]})));
    }
    for (Isa isa : isas) {
      ASSERT_TRUE(kernels::force_isa(isa));
      std::fill(got.begin(), got.end(), -1.0);
      kernels::iou_one_to_many(a, batch, got);
      for (std::size_t i = 0; i < n; ++i) {
        ASSERT_TRUE(same_bits(want[i], got[i]))
            << kernels::isa_name(isa) << " i=" << i << " " << want[i] << " vs " << got[i];
      }
    }
    kernels::force_isa(std::nullopt);
  }
}

#if defined(GRIT_HAVE_AVX2_KERNELS)
TEST(IouKernels, Avx2DirectCallMatchesScalar) {
  if (!__builtin_cpu_supports("avx2")) GTEST_SKIP() << "CPU lacks AVX2";
  SplitMix64 rng(77);
  const BoxBatch batch = random_batch(rng, 1027, false);
  const BoxD a{0.2, 0.1, 0.7, 0.9};
  std::vector<double> want(batch.size()), got(batch.size());
  kernels::iou_one_to_many_scalar(a, batch, want);
  kernels::iou_one_to_many_avx2(a, batch, got);
  EXPECT_EQ(0, std::memcmp(want.data(), got.data(), want.size() * sizeof(double)));
}
#endif

TEST(IouKernels, MatrixIsRowMajorOneToMany) {
  SplitMix64 rng(4);
  const BoxBatch rows_b = random_batch(rng, 5, true);
  const BoxBatch cols = random_batch(rng, 9, true);
  std::vector<BoxD> rows;
  for (std::size_t i = 0; i < rows_b.size(); ++i) {
    rows.push_back({rows_b.x0[i], rows_b.y0[i], rows_b.x1[i], rows_b.y1[i]});
  }
  std::vector<double> m(rows.size() * cols.size());
  kernels::iou_matrix(rows, cols, m);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      EXPECT_TRUE(same_bits(m[r * cols.size() + c],
                            kernels::iou_scalar(rows[r], {cols.x0[c], cols.y0[c], cols.x1[c], cols.y1[c]})));
    }
  }
}

TEST(IouKernels, ForceIsaRejectsUnavailable) {
  const auto isas = kernels::available_isas();
  for (Isa isa : {Isa::kScalar, Isa::kAvx2, Isa::kNeon}) {
    const bool available = std::find(isas.begin(), isas.end(), isa) != isas.end();
    EXPECT_EQ(kernels::force_isa(isa), available) << kernels::isa_name(isa);
    if (available) EXPECT_EQ(kernels::active_isa(), isa);
  }
  kernels::force_isa(std::nullopt);
}

}  // namespace
}  // namespace grit
