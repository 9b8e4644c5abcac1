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

#include "grit/sampling_split.hpp"

#include <algorithm>
#include <unordered_map>

#include "grit/error.hpp"
#include "grit/kernels/iou_kernels.hpp"
#include "grit/rng.hpp"

namespace grit {
namespace {

using nlohmann::json;

// Sum over boxes of `from` of the best IoU against same-category boxes of
// `to`.
double directed_best_iou_sum(const MetaRecord& from, const MetaRecord& to) {
  std::map<std::string, kernels::BoxBatch> by_category;
  for (const auto& o : to.objects) {
    by_category[o.category].push_back({o.box.x0, o.box.y0, o.box.x1, o.box.y1});
  }
  double sum = 0.0;
  std::vector<double> scratch;
  for (const auto& o : from.objects) {
    auto it = by_category.find(o.category);
    if (it == by_category.end()) continue;
    scratch.resize(it->second.size());
    kernels::iou_one_to_many({o.box.x0, o.box.y0, o.box.x1, o.box.y1},
                             it->second, scratch);
    sum += *std::max_element(scratch.begin(), scratch.end());
  }
  return sum;
}

}  // namespace

std::vector<CaseGroup> group_cases(std::span<const MetaRecord> metas) {
  std::vector<CaseGroup> groups;
  std::unordered_map<std::string, std::size_t> index;
  for (const MetaRecord& m : metas) {
    auto [it, inserted] = index.emplace(m.case_id, groups.size());
    if (inserted) {
      groups.push_back(CaseGroup{m.case_id, {}, m.modality});
    }
    CaseGroup& g = groups[it->second];
    if (g.modality != m.modality) {
      throw Error(ErrorCode::kSchema,
                  "case '" + m.case_id + "' mixes modalities " +
                      std::string(modality_name(g.modality)) + " and " +
                      std::string(modality_name(m.modality)));
    }
    g.members.push_back(m.image_id);
  }
  return groups;
}

double slice_similarity(const MetaRecord& a, const MetaRecord& b) {
  const std::size_t total = a.objects.size() + b.objects.size();
  if (a.objects.empty() && b.objects.empty()) return 1.0;
  if (a.objects.empty() || b.objects.empty()) return 0.0;
  return (directed_best_iou_sum(a, b) + directed_best_iou_sum(b, a)) /
         static_cast<double>(total);
}

std::vector<std::string> sample_slices(std::span<const MetaRecord> metas,
                                       std::size_t max_per_case,
                                       double dedup_threshold) {
  if (max_per_case < 1) {
    throw Error(ErrorCode::kInvalidArgument, "max_per_case must be at least 1");
  }
  std::vector<const MetaRecord*> kept;
  for (const MetaRecord& m : metas) {
    if (kept.size() >= max_per_case) break;
    const bool redundant = std::any_of(kept.begin(), kept.end(), [&](const MetaRecord* k) {
      return slice_similarity(m, *k) > dedup_threshold;
    });
    if (!redundant) kept.push_back(&m);
  }
  std::vector<std::string> ids;
  ids.reserve(kept.size());
  for (const MetaRecord* k : kept) ids.push_back(k->image_id);
  return ids;
}

std::uint64_t case_rank(std::uint64_t seed, std::string_view case_id) {
  return SplitMix64::mix(seed ^ fnv1a64(case_id));
}

SplitAssignment split_cases(std::span<const CaseGroup> groups,
                            double test_fraction, std::uint64_t seed) {
  if (groups.empty()) throw Error(ErrorCode::kInvalidArgument, "no cases to split");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "test fraction must lie in (0, 1)");
  }
  SplitAssignment out;
  out.seed = seed;
  out.test_fraction = test_fraction;

  std::map<Modality, std::vector<const CaseGroup*>> strata;
  std::set<std::string> seen;
  for (const CaseGroup& g : groups) {
    if (g.members.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "case '" + g.case_id + "' has no images");
    }
    if (!seen.insert(g.case_id).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate case '" + g.case_id + "'");
    }
    strata[g.modality].push_back(&g);
  }

  std::size_t all_images = 0;
  std::size_t all_test_images = 0;
  for (auto& [modality, cases] : strata) {
    std::sort(cases.begin(), cases.end(), [seed](const CaseGroup* a, const CaseGroup* b) {
      const auto ra = case_rank(seed, a->case_id);
      const auto rb = case_rank(seed, b->case_id);
      return ra != rb ? ra < rb : a->case_id < b->case_id;
    });
    std::size_t images = 0;
    for (const CaseGroup* c : cases) images += c->members.size();
    const double target = test_fraction * static_cast<double>(images);
    const double slack = kSplitTolerance * static_cast<double>(images);
    const double eps = 1e-9 * static_cast<double>(images);

    std::size_t test_images = 0;
    std::string last_case;
    std::vector<const CaseGroup*> passed_over;
    for (const CaseGroup* c : cases) {
      const std::size_t n = c->members.size();
      if (static_cast<double>(test_images) >= target - eps) {
        out.train.insert(c->case_id);
      } else if (static_cast<double>(test_images + n) <= target + slack + eps) {
        out.test.insert(c->case_id);
        test_images += n;
        last_case = c->case_id;
      } else {
        passed_over.push_back(c);
        out.train.insert(c->case_id);
      }
    }
    if (static_cast<double>(test_images) < target - eps && !passed_over.empty()) {
      const CaseGroup* best = *std::min_element(
          passed_over.begin(), passed_over.end(),
          [](const CaseGroup* a, const CaseGroup* b) {
            return a->members.size() < b->members.size();
          });
      out.train.erase(best->case_id);
      out.test.insert(best->case_id);
      test_images += best->members.size();
      last_case = best->case_id;
    }
    const double achieved =
        static_cast<double>(test_images) / static_cast<double>(images);
    out.stratum_fraction[modality] = achieved;
    if (std::abs(achieved - test_fraction) > kSplitTolerance + 1e-12) {
      out.overshoots.push_back({modality, test_fraction, achieved, last_case});
    }
    all_images += images;
    all_test_images += test_images;
  }
  out.achieved_test_fraction =
      static_cast<double>(all_test_images) / static_cast<double>(all_images);
  return out;
}

json split_to_json(const SplitAssignment& split) {
  json strata = json::object();
  for (const auto& [m, f] : split.stratum_fraction) {
    strata[std::string(modality_name(m))] = f;
  }
  json overshoots = json::array();
  for (const auto& o : split.overshoots) {
    overshoots.push_back({{"modality", modality_name(o.modality)},
                          {"target_fraction", o.target_fraction},
                          {"achieved_fraction", o.achieved_fraction},
                          {"case_id", o.last_case_id}});
  }
  return {{"seed", split.seed},
          {"test_fraction", split.test_fraction},
          {"achieved_test_fraction", split.achieved_test_fraction},
          {"train", split.train},
          {"test", split.test},
          {"stratum_test_fraction", strata},
          {"overshoots", overshoots}};
}

SplitAssignment split_from_json(const json& j) {
  SplitAssignment s;
  try {
    s.seed = j.at("seed").get<std::uint64_t>();
    s.test_fraction = j.at("test_fraction").get<double>();
    s.achieved_test_fraction = j.at("achieved_test_fraction").get<double>();
    for (const json& c : j.at("train")) s.train.insert(c.get<std::string>());
    for (const json& c : j.at("test")) s.test.insert(c.get<std::string>());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSchema, std::string("malformed split JSON: ") + e.what());
  }
  for (const auto& id : s.test) {
    if (s.train.count(id)) {
      throw Error(ErrorCode::kSchema, "case '" + id + "' is on both sides of the split");
    }
  }
  return s;
}

}  // namespace grit
