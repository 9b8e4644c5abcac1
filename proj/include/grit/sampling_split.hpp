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

#ifndef GRIT_SAMPLING_SPLIT_HPP_
#define GRIT_SAMPLING_SPLIT_HPP_

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "grit/corpus_ingest.hpp"
#include "grit/types.hpp"
#include "json.hpp"

namespace grit {

// All slices of one volume or patient.
struct CaseGroup {
  std::string case_id;
  std::vector<std::string> members;  // image ids, nonempty
  Modality modality = Modality::kCT;
};

// Groups metas by case_id in first-appearance order. Throws Error{kSchema}
// when one case mixes modalities.
std::vector<CaseGroup> group_cases(std::span<const MetaRecord> metas);

inline constexpr std::size_t kDefaultMaxPerCase = 10;
inline constexpr double kDefaultDedupThreshold = 0.85;

// Similarity of two slices from their object boxes: each box takes its best
// IoU against same-category boxes of the other slice and the result is the
// mean over all boxes of both slices. Two objectless slices score 1, one
// objectless slice scores 0.
double slice_similarity(const MetaRecord& a, const MetaRecord& b);

// Walks `metas` in order, keeping a slice unless its similarity to an
// already kept slice exceeds `dedup_threshold`, and stops at `max_per_case`.
// Never empty for nonempty input.
std::vector<std::string> sample_slices(std::span<const MetaRecord> metas,
                                       std::size_t max_per_case,
                                       double dedup_threshold);

// Case-level split bookkeeping for a modality stratum whose test share ended
// more than kSplitTolerance away from the target.
struct SplitOvershoot {
  Modality modality = Modality::kCT;
  double target_fraction = 0.0;
  double achieved_fraction = 0.0;
  std::string last_case_id;  // case whose assignment crossed the target
};

inline constexpr double kSplitTolerance = 0.02;

struct SplitAssignment {
  std::set<std::string> train;
  std::set<std::string> test;
  std::uint64_t seed = 0;
  double test_fraction = 0.0;
  double achieved_test_fraction = 0.0;  // by image count
  std::map<Modality, double> stratum_fraction;
  std::vector<SplitOvershoot> overshoots;

  bool is_test(const std::string& case_id) const { return test.count(case_id) > 0; }
};

// Deterministic rank of a case under `seed`: SplitMix64 mix of
// seed XOR FNV-1a(case_id). Lower ranks are considered first.
std::uint64_t case_rank(std::uint64_t seed, std::string_view case_id);

// Per modality stratum, cases are visited in case_rank order and moved to
// test while the stratum's test images are below target; a case that would
// overshoot the target by more than the tolerance is passed over for a later
// one. If the stratum still falls short, the passed-over case with the
// smallest overshoot is added. Whole cases only; no image is on both sides.
// Throws Error{kInvalidArgument} for an empty input or a fraction outside
// (0, 1).
SplitAssignment split_cases(std::span<const CaseGroup> groups,
                            double test_fraction, std::uint64_t seed);

nlohmann::json split_to_json(const SplitAssignment& split);
SplitAssignment split_from_json(const nlohmann::json& j);

}  // namespace grit

#endif  // GRIT_SAMPLING_SPLIT_HPP_
