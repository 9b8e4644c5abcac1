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

#include "grit/text_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "grit/porter_stemmer.hpp"

namespace grit {
namespace {

bool is_word_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9') || c >= 0x80;
}

using NgramCounts = std::unordered_map<std::string, int>;

NgramCounts count_ngrams(const Tokens& toks, std::size_t n) {
  NgramCounts counts;
  if (toks.size() < n) return counts;
  std::string key;
  for (std::size_t i = 0; i + n <= toks.size(); ++i) {
    key.clear();
    for (std::size_t k = 0; k < n; ++k) {
      if (k) key += '\x1f';
      key += toks[i + k];
    }
    ++counts[key];
  }
  return counts;
}

}  // namespace

Tokens tokenize(std::string_view text) {
  Tokens out;
  std::string cur;
  for (unsigned char c : text) {
    if (is_word_byte(c)) {
      cur += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a')
                                    : static_cast<char>(c);
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

double bleu4(const Tokens& pred, const Tokens& ref) {
  if (pred.empty()) return 0.0;
  double log_sum = 0.0;
  for (std::size_t n = 1; n <= 4; ++n) {
    const NgramCounts p = count_ngrams(pred, n);
    const NgramCounts r = count_ngrams(ref, n);
    long matched = 0;
    for (const auto& [gram, c] : p) {
      auto it = r.find(gram);
      if (it != r.end()) matched += std::min(c, it->second);
    }
    const long total = pred.size() >= n ? static_cast<long>(pred.size() - n + 1) : 0;
    double precision;
    if (n == 1) {
      if (matched == 0) return 0.0;
      precision = static_cast<double>(matched) / total;
    } else {
      precision = static_cast<double>(matched + 1) / static_cast<double>(total + 1);
    }
    log_sum += std::log(precision);
  }
  const double c = static_cast<double>(pred.size());
  const double r = static_cast<double>(ref.size());
  const double bp = c < r ? std::exp(1.0 - r / c) : 1.0;
  return bp * std::exp(log_sum / 4.0);
}

double bleu4(std::string_view pred, std::string_view ref) {
  return bleu4(tokenize(pred), tokenize(ref));
}

std::size_t lcs_length(const Tokens& a, const Tokens& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1
                                    : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rouge_l(const Tokens& pred, const Tokens& ref) {
  if (pred.empty() || ref.empty()) return 0.0;
  const std::size_t lcs = lcs_length(pred, ref);
  if (lcs == 0) return 0.0;
  const double p = static_cast<double>(lcs) / pred.size();
  const double r = static_cast<double>(lcs) / ref.size();
  return 2.0 * p * r / (p + r);
}

double rouge_l(std::string_view pred, std::string_view ref) {
  return rouge_l(tokenize(pred), tokenize(ref));
}

MeteorStats meteor_lite_stats(const Tokens& pred, const Tokens& ref) {
  MeteorStats s;
  if (pred.empty() || ref.empty()) return s;
  constexpr int kUnmatched = -1;
  std::vector<int> pred_to_ref(pred.size(), kUnmatched);
  std::vector<bool> ref_used(ref.size(), false);

  // Within a stage each prediction token takes the reference position that
  // extends the previous token's match if possible, else the leftmost free
  // candidate.
  auto align = [&](const Tokens& p_form, const Tokens& r_form) {
    for (std::size_t i = 0; i < pred.size(); ++i) {
      if (pred_to_ref[i] != kUnmatched) continue;
      int chosen = kUnmatched;
      if (i > 0 && pred_to_ref[i - 1] != kUnmatched) {
        const std::size_t next = static_cast<std::size_t>(pred_to_ref[i - 1]) + 1;
        if (next < ref.size() && !ref_used[next] && r_form[next] == p_form[i]) {
          chosen = static_cast<int>(next);
        }
      }
      if (chosen == kUnmatched) {
        for (std::size_t j = 0; j < ref.size(); ++j) {
          if (!ref_used[j] && r_form[j] == p_form[i]) {
            chosen = static_cast<int>(j);
            break;
          }
        }
      }
      if (chosen != kUnmatched) {
        pred_to_ref[i] = chosen;
        ref_used[chosen] = true;
      }
    }
  };
  align(pred, ref);
  Tokens pred_stems, ref_stems;
  pred_stems.reserve(pred.size());
  ref_stems.reserve(ref.size());
  for (const auto& t : pred) pred_stems.push_back(porter_stem(t));
  for (const auto& t : ref) ref_stems.push_back(porter_stem(t));
  align(pred_stems, ref_stems);

  int last_ref = -2;
  bool in_chunk = false;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const int j = pred_to_ref[i];
    if (j == kUnmatched) {
      in_chunk = false;
      continue;
    }
    ++s.matches;
    if (!in_chunk || j != last_ref + 1) ++s.chunks;
    in_chunk = true;
    last_ref = j;
  }
  if (s.matches == 0) return s;
  const double m = static_cast<double>(s.matches);
  s.precision = m / pred.size();
  s.recall = m / ref.size();
  s.fmean = 10.0 * s.precision * s.recall / (s.recall + 9.0 * s.precision);
  const double frag = static_cast<double>(s.chunks) / m;
  s.penalty = 0.5 * frag * frag * frag;
  s.score = s.fmean * (1.0 - s.penalty);
  return s;
}

double meteor_lite(const Tokens& pred, const Tokens& ref) {
  return meteor_lite_stats(pred, ref).score;
}

double meteor_lite(std::string_view pred, std::string_view ref) {
  return meteor_lite(tokenize(pred), tokenize(ref));
}

MbmrParts mbmr_parts(std::string_view pred, std::string_view ref) {
  const Tokens p = tokenize(pred);
  const Tokens r = tokenize(ref);
  MbmrParts parts;
  parts.bleu4 = bleu4(p, r);
  parts.meteor = meteor_lite(p, r);
  parts.rouge_l = rouge_l(p, r);
  parts.mean = (parts.bleu4 + parts.meteor + parts.rouge_l) / 3.0;
  return parts;
}

double mbmr(std::string_view pred, std::string_view ref) {
  return mbmr_parts(pred, ref).mean;
}

}  // namespace grit
