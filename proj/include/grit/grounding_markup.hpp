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

#ifndef GRIT_GROUNDING_MARKUP_HPP_
#define GRIT_GROUNDING_MARKUP_HPP_

// Grounding markup wire format:
//
//   doc  := (text | ref box+)*
//   ref  := "<ref>" phrase "</ref>"
//   box  := "<box>(" int "," int "),(" int "," int ")</box>"
//
// Integers are unpadded base-10 in [0, 1000]. Text and phrases never contain
// the four reserved tokens. A prompt wraps the image reference once in
// <img>...</img>.

#include <cstddef>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "grit/error.hpp"
#include "grit/types.hpp"

namespace grit {

inline constexpr std::string_view kRefOpen = "<ref>";
inline constexpr std::string_view kRefClose = "</ref>";
inline constexpr std::string_view kBoxOpen = "<box>";
inline constexpr std::string_view kBoxClose = "</box>";
inline constexpr std::string_view kImgOpen = "<img>";
inline constexpr std::string_view kImgClose = "</img>";

struct TextSegment {
  std::string raw;
  friend bool operator==(const TextSegment&, const TextSegment&) = default;
};

struct RefSegment {
  std::string phrase;
  std::vector<QuantBox> boxes;  // nonempty
  friend bool operator==(const RefSegment&, const RefSegment&) = default;
};

using Segment = std::variant<TextSegment, RefSegment>;

struct MarkedText {
  std::vector<Segment> segments;

  MarkedText& text(std::string raw);
  MarkedText& ref(std::string phrase, std::vector<QuantBox> boxes);

  std::size_t ref_count() const;
  friend bool operator==(const MarkedText&, const MarkedText&) = default;
};

// True when `s` contains <ref>, </ref>, <box> or </box>.
bool contains_reserved_token(std::string_view s);

// Canonical form: no empty or adjacent text segments, every ref has boxes,
// no reserved tokens in text or phrases, all boxes valid. Only canonical
// values survive render/parse unchanged.
bool is_canonical(const MarkedText& mt);

// Merges adjacent text segments and drops empty ones.
MarkedText canonicalize(MarkedText mt);

// Round half up of v * 1000, clamped to [0, 1000].
QuantBox quantize(const NormBox& box);
int quantize_coord(double v);
NormBox dequantize(const QuantBox& box);

// Throws Error{kReservedTokenInText} when text or a phrase carries a
// reserved token and Error{kInvalidArgument} for a ref without valid boxes.
std::string render(const MarkedText& mt);
std::string render_box(const QuantBox& box);

enum class IssueKind {
  kUnclosedTag,
  kMalformedCoordinate,
  kOutOfRange,
  kStrayClose,
  kBoxWithoutRef,
};

std::string_view issue_kind_name(IssueKind kind);

struct ParseIssue {
  std::size_t offset = 0;  // byte offset into the input
  IssueKind kind = IssueKind::kMalformedCoordinate;
  std::string detail;
};

enum class ParseMode { kStrict, kLenient };

struct ParseResult {
  MarkedText text;
  std::vector<ParseIssue> issues;
};

class MarkupError : public Error {
 public:
  explicit MarkupError(ParseIssue issue);
  const ParseIssue& issue() const noexcept { return issue_; }

 private:
  ParseIssue issue_;
};

// Strict mode throws MarkupError carrying the first issue. Lenient mode never
// throws: orphan boxes become a ref with an empty phrase, unclosed tags close
// at the next tag or end of input, out-of-range coordinates clamp, inverted
// corners swap, and undecodable boxes are dropped. Every recovery is logged.
ParseResult parse(std::string_view s, ParseMode mode);

struct PhraseBox {
  std::string phrase;
  QuantBox box;
  friend bool operator==(const PhraseBox&, const PhraseBox&) = default;
};

// One entry per box, in document order.
std::vector<PhraseBox> extract_boxes(const MarkedText& mt);

// Text with ref phrases inlined and boxes removed; used for text metrics.
std::string plain_text(const MarkedText& mt);

// "<img>IMAGE</img>\n" followed by the rendered question. Rejects image
// references or questions that would produce a second image marker.
std::string render_prompt(std::string_view image_ref,
                          const MarkedText& question);

}  // namespace grit

#endif  // GRIT_GROUNDING_MARKUP_HPP_
