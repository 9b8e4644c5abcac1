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

#ifndef GRIT_TEXT_METRICS_HPP_
#define GRIT_TEXT_METRICS_HPP_

// Sentence-level text similarity used for MIA and RC scoring. All scores lie
// in [0, 1]. Tokenisation lower-cases ASCII and splits on every byte that is
// not an ASCII letter or digit; bytes >= 0x80 count as word characters so
// UTF-8 words stay whole.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace grit {

using Tokens = std::vector<std::string>;

Tokens tokenize(std::string_view text);

// BLEU with n = 1..4, uniform weights, clipped counts and brevity penalty
// exp(1 - r/c) for c < r. Orders n >= 2 use add-one smoothing
// (m + 1) / (t + 1); the unigram precision is unsmoothed, so no unigram
// overlap scores 0.
double bleu4(const Tokens& pred, const Tokens& ref);
double bleu4(std::string_view pred, std::string_view ref);

// ROUGE-L F1 (beta = 1) from the longest common subsequence.
std::size_t lcs_length(const Tokens& a, const Tokens& b);
double rouge_l(const Tokens& pred, const Tokens& ref);
double rouge_l(std::string_view pred, std::string_view ref);

struct MeteorStats {
  std::size_t matches = 0;
  std::size_t chunks = 0;
  double precision = 0.0;
  double recall = 0.0;
  double fmean = 0.0;
  double penalty = 0.0;
  double score = 0.0;
};

// METEOR without synonym resources: exact matching, then Porter-stem
// matching over the leftovers. Fmean = 10PR / (R + 9P),
// penalty = 0.5 (chunks / m)^3, score = Fmean (1 - penalty).
MeteorStats meteor_lite_stats(const Tokens& pred, const Tokens& ref);
double meteor_lite(const Tokens& pred, const Tokens& ref);
double meteor_lite(std::string_view pred, std::string_view ref);

struct MbmrParts {
  double bleu4 = 0.0;
  double meteor = 0.0;
  double rouge_l = 0.0;
  double mean = 0.0;
};

MbmrParts mbmr_parts(std::string_view pred, std::string_view ref);

// Arithmetic mean of bleu4, meteor_lite and rouge_l.
double mbmr(std::string_view pred, std::string_view ref);

}  // namespace grit

#endif  // GRIT_TEXT_METRICS_HPP_
