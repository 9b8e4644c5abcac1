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

#include "grit/grounding_markup.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace grit {
namespace {

enum class Tag { kNone, kRefOpen, kRefClose, kBoxOpen, kBoxClose };

std::size_t tag_length(Tag t) {
  switch (t) {
    case Tag::kRefOpen: return kRefOpen.size();
    case Tag::kRefClose: return kRefClose.size();
    case Tag::kBoxOpen: return kBoxOpen.size();
    case Tag::kBoxClose: return kBoxClose.size();
    case Tag::kNone: return 0;
  }
  return 0;
}

Tag tag_at(std::string_view s, std::size_t i) {
  if (i >= s.size() || s[i] != '<') return Tag::kNone;
  const std::string_view rest = s.substr(i);
  if (rest.starts_with(kRefOpen)) return Tag::kRefOpen;
  if (rest.starts_with(kRefClose)) return Tag::kRefClose;
  if (rest.starts_with(kBoxOpen)) return Tag::kBoxOpen;
  if (rest.starts_with(kBoxClose)) return Tag::kBoxClose;
  return Tag::kNone;
}

// Position of the next reserved tag at or after `i`, or s.size().
std::size_t next_tag(std::string_view s, std::size_t i) {
  for (std::size_t p = s.find('<', i); p != std::string_view::npos;
       p = s.find('<', p + 1)) {
    if (tag_at(s, p) != Tag::kNone) return p;
  }
  return s.size();
}

// Coordinate body of a <box> group, e.g. "(1,2),(3,4)". Whitespace between
// tokens is tolerated only in lenient mode.
class BoxBodyReader {
 public:
  BoxBodyReader(std::string_view body, std::size_t base, bool lenient)
      : body_(body), base_(base), lenient_(lenient) {}

  struct Raw {
    long long v[4];
  };

  // Set when a lenient read skipped whitespace or accepted a padded or
  // negative-zero integer.
  bool irregular() const { return irregular_; }

  // Returns nullopt and fills `error` when the body does not decode.
  std::optional<Raw> read(ParseIssue& error) {
    Raw raw{};
    if (!expect('(', error) || !read_int(raw.v[0], error) ||
        !expect(',', error) || !read_int(raw.v[1], error) ||
        !expect(')', error) || !expect(',', error) || !expect('(', error) ||
        !read_int(raw.v[2], error) || !expect(',', error) ||
        !read_int(raw.v[3], error) || !expect(')', error)) {
      return std::nullopt;
    }
    skip_space();
    if (pos_ != body_.size()) {
      error = issue(pos_, "trailing characters in box");
      return std::nullopt;
    }
    return raw;
  }

 private:
  ParseIssue issue(std::size_t at, std::string detail) const {
    return ParseIssue{base_ + at, IssueKind::kMalformedCoordinate,
                      std::move(detail)};
  }

  void skip_space() {
    if (!lenient_) return;
    while (pos_ < body_.size() &&
           (body_[pos_] == ' ' || body_[pos_] == '\t')) {
      ++pos_;
      irregular_ = true;
    }
  }

  bool expect(char c, ParseIssue& error) {
    skip_space();
    if (pos_ < body_.size() && body_[pos_] == c) {
      ++pos_;
      return true;
    }
    error = issue(pos_, std::string("expected '") + c + "'");
    return false;
  }

  bool read_int(long long& out, ParseIssue& error) {
    skip_space();
    const std::size_t start = pos_;
    bool negative = false;
    if (pos_ < body_.size() && body_[pos_] == '-') {
      negative = true;
      ++pos_;
    }
    const std::size_t digits_start = pos_;
    long long v = 0;
    while (pos_ < body_.size() && body_[pos_] >= '0' && body_[pos_] <= '9') {
      // Saturate; anything this large is out of range anyway.
      v = std::min<long long>(v * 10 + (body_[pos_] - '0'), 1'000'000'000LL);
      ++pos_;
    }
    const std::size_t ndigits = pos_ - digits_start;
    if (ndigits == 0) {
      error = issue(start, "expected an integer");
      return false;
    }
    if (ndigits > 1 && body_[digits_start] == '0') {
      if (!lenient_) {
        error = issue(start, "zero-padded integer");
        return false;
      }
      irregular_ = true;
    }
    if (negative && v == 0) {
      if (!lenient_) {
        error = issue(start, "negative zero");
        return false;
      }
      irregular_ = true;
    }
    out = negative ? -v : v;
    return true;
  }

  std::string_view body_;
  std::size_t base_;
  bool lenient_;
  std::size_t pos_ = 0;
  bool irregular_ = false;
};

class Parser {
 public:
  Parser(std::string_view s, ParseMode mode) : s_(s), mode_(mode) {}

  ParseResult run() {
    while (pos_ < s_.size()) {
      const std::size_t tag_pos = next_tag(s_, pos_);
      if (tag_pos > pos_) {
        text_.append(s_.substr(pos_, tag_pos - pos_));
        pos_ = tag_pos;
        continue;
      }
      switch (tag_at(s_, pos_)) {
        case Tag::kRefOpen:
          parse_ref();
          break;
        case Tag::kBoxOpen: {
          report(pos_, IssueKind::kBoxWithoutRef,
                 "<box> group has no preceding <ref>");
          auto boxes = parse_box_group();
          if (!boxes.empty()) push_ref("", std::move(boxes));
          break;
        }
        case Tag::kRefClose:
        case Tag::kBoxClose: {
          const Tag t = tag_at(s_, pos_);
          report(pos_, IssueKind::kStrayClose,
                 std::string(t == Tag::kRefClose ? kRefClose : kBoxClose) +
                     " without an opening tag");
          pos_ += tag_length(t);
          break;
        }
        case Tag::kNone:
          break;
      }
    }
    flush_text();
    return std::move(result_);
  }

 private:
  void report(std::size_t offset, IssueKind kind, std::string detail) {
    ParseIssue issue{offset, kind, std::move(detail)};
    if (mode_ == ParseMode::kStrict) throw MarkupError(std::move(issue));
    result_.issues.push_back(std::move(issue));
  }

  void flush_text() {
    // A lenient demotion can splice two text runs into a reserved tag, as in
    // "<re" + "f>"; break such tags by dropping their '<'.
    for (std::size_t p = next_tag(text_, 0); p != text_.size(); p = next_tag(text_, p)) {
      text_.erase(p, 1);
    }
    if (!text_.empty()) {
      result_.text.segments.emplace_back(TextSegment{std::move(text_)});
      text_.clear();
    }
  }

  void push_ref(std::string phrase, std::vector<QuantBox> boxes) {
    flush_text();
    result_.text.segments.emplace_back(
        RefSegment{std::move(phrase), std::move(boxes)});
  }

  void parse_ref() {
    const std::size_t open_pos = pos_;
    pos_ += kRefOpen.size();
    const std::size_t end = next_tag(s_, pos_);
    std::string phrase(s_.substr(pos_, end - pos_));
    pos_ = end;
    if (tag_at(s_, pos_) == Tag::kRefClose) {
      pos_ += kRefClose.size();
    } else {
      // Lenient: the ref closes here; a following <box> still attaches.
      report(open_pos, IssueKind::kUnclosedTag, "<ref> is never closed");
    }
    const bool has_group = tag_at(s_, pos_) == Tag::kBoxOpen;
    auto boxes = parse_box_group();
    if (boxes.empty()) {
      if (!has_group) {
        report(open_pos, IssueKind::kUnclosedTag,
               "<ref> span is not followed by a <box> group");
      }
      text_.append(phrase);
      return;
    }
    push_ref(std::move(phrase), std::move(boxes));
  }

  // Consumes consecutive <box>...</box> groups starting at pos_.
  std::vector<QuantBox> parse_box_group() {
    std::vector<QuantBox> boxes;
    while (tag_at(s_, pos_) == Tag::kBoxOpen) {
      const std::size_t open_pos = pos_;
      pos_ += kBoxOpen.size();
      const std::size_t body_start = pos_;
      const std::size_t end = next_tag(s_, pos_);
      const std::string_view body = s_.substr(body_start, end - body_start);
      pos_ = end;
      if (tag_at(s_, pos_) == Tag::kBoxClose) {
        pos_ += kBoxClose.size();
      } else {
        report(open_pos, IssueKind::kUnclosedTag, "<box> is never closed");
      }
      if (auto box = decode_box(body, body_start)) boxes.push_back(*box);
    }
    return boxes;
  }

  std::optional<QuantBox> decode_box(std::string_view body, std::size_t base) {
    const bool lenient = mode_ == ParseMode::kLenient;
    BoxBodyReader reader(body, base, lenient);
    ParseIssue error;
    auto raw = reader.read(error);
    if (!raw) {
      // Past this point only lenient mode runs; the box is dropped.
      report(error.offset, error.kind, error.detail);
      return std::nullopt;
    }
    if (reader.irregular()) {
      report(base, IssueKind::kMalformedCoordinate,
             "non-canonical number formatting in '" + std::string(body) + "'");
    }
    long long v[4] = {raw->v[0], raw->v[1], raw->v[2], raw->v[3]};
    bool clamped = false;
    for (long long& c : v) {
      if (c < 0 || c > kQuantMax) {
        c = std::clamp<long long>(c, 0, kQuantMax);
        clamped = true;
      }
    }
    if (clamped) {
      report(base, IssueKind::kOutOfRange,
             "coordinate outside [0,1000] in '" + std::string(body) + "'");
    }
    if (v[0] > v[2] || v[1] > v[3]) {
      report(base, IssueKind::kMalformedCoordinate,
             "inverted corners in '" + std::string(body) + "'");
      if (v[0] > v[2]) std::swap(v[0], v[2]);
      if (v[1] > v[3]) std::swap(v[1], v[3]);
    }
    return QuantBox{static_cast<int>(v[0]), static_cast<int>(v[1]),
                    static_cast<int>(v[2]), static_cast<int>(v[3])};
  }

  std::string_view s_;
  ParseMode mode_;
  std::size_t pos_ = 0;
  std::string text_;
  ParseResult result_;
};

}  // namespace

MarkedText& MarkedText::text(std::string raw) {
  segments.emplace_back(TextSegment{std::move(raw)});
  return *this;
}

MarkedText& MarkedText::ref(std::string phrase, std::vector<QuantBox> boxes) {
  segments.emplace_back(RefSegment{std::move(phrase), std::move(boxes)});
  return *this;
}

std::size_t MarkedText::ref_count() const {
  return static_cast<std::size_t>(
      std::count_if(segments.begin(), segments.end(), [](const Segment& s) {
        return std::holds_alternative<RefSegment>(s);
      }));
}

bool contains_reserved_token(std::string_view s) {
  return next_tag(s, 0) != s.size();
}

bool is_canonical(const MarkedText& mt) {
  bool prev_text = false;
  for (const Segment& seg : mt.segments) {
    if (const auto* t = std::get_if<TextSegment>(&seg)) {
      if (t->raw.empty() || prev_text || contains_reserved_token(t->raw)) {
        return false;
      }
      prev_text = true;
    } else {
      const auto& r = std::get<RefSegment>(seg);
      if (r.boxes.empty() || contains_reserved_token(r.phrase)) return false;
      for (const auto& b : r.boxes) {
        if (!b.valid()) return false;
      }
      prev_text = false;
    }
  }
  return true;
}

MarkedText canonicalize(MarkedText mt) {
  MarkedText out;
  for (Segment& seg : mt.segments) {
    if (auto* t = std::get_if<TextSegment>(&seg)) {
      if (t->raw.empty()) continue;
      if (!out.segments.empty()) {
        if (auto* prev = std::get_if<TextSegment>(&out.segments.back())) {
          prev->raw += t->raw;
          continue;
        }
      }
    }
    out.segments.push_back(std::move(seg));
  }
  return out;
}

int quantize_coord(double v) {
  const double scaled = std::floor(v * kQuantMax + 0.5);
  return static_cast<int>(std::clamp(scaled, 0.0, double{kQuantMax}));
}

QuantBox quantize(const NormBox& box) {
  return QuantBox{quantize_coord(box.x0), quantize_coord(box.y0),
                  quantize_coord(box.x1), quantize_coord(box.y1)};
}

NormBox dequantize(const QuantBox& box) {
  constexpr double k = kQuantMax;
  return NormBox{box.x0 / k, box.y0 / k, box.x1 / k, box.y1 / k};
}

std::string render_box(const QuantBox& box) {
  std::string out(kBoxOpen);
  out += '(' + std::to_string(box.x0) + ',' + std::to_string(box.y0) + "),(" +
         std::to_string(box.x1) + ',' + std::to_string(box.y1) + ')';
  out += kBoxClose;
  return out;
}

std::string render(const MarkedText& mt) {
  std::string out;
  for (const Segment& seg : mt.segments) {
    if (const auto* t = std::get_if<TextSegment>(&seg)) {
      if (contains_reserved_token(t->raw)) {
        throw Error(ErrorCode::kReservedTokenInText,
                    "text segment contains a reserved token: " + t->raw);
      }
      out += t->raw;
      continue;
    }
    const auto& r = std::get<RefSegment>(seg);
    if (contains_reserved_token(r.phrase)) {
      throw Error(ErrorCode::kReservedTokenInText,
                  "ref phrase contains a reserved token: " + r.phrase);
    }
    if (r.boxes.empty()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "ref '" + r.phrase + "' has no boxes");
    }
    out += kRefOpen;
    out += r.phrase;
    out += kRefClose;
    for (const QuantBox& b : r.boxes) {
      if (!b.valid()) {
        throw Error(ErrorCode::kInvalidArgument,
                    "box outside [0,1000] or inverted for ref '" + r.phrase + "'");
      }
      out += render_box(b);
    }
  }
  return out;
}

std::string_view issue_kind_name(IssueKind kind) {
  switch (kind) {
    case IssueKind::kUnclosedTag: return "UnclosedTag";
    case IssueKind::kMalformedCoordinate: return "MalformedCoordinate";
    case IssueKind::kOutOfRange: return "OutOfRange";
    case IssueKind::kStrayClose: return "StrayClose";
    case IssueKind::kBoxWithoutRef: return "BoxWithoutRef";
  }
  return "";
}

MarkupError::MarkupError(ParseIssue issue)
    : Error(ErrorCode::kMarkupParse,
            std::string(issue_kind_name(issue.kind)) + " at offset " +
                std::to_string(issue.offset) + ": " + issue.detail),
      issue_(std::move(issue)) {}

ParseResult parse(std::string_view s, ParseMode mode) {
  return Parser(s, mode).run();
}

std::vector<PhraseBox> extract_boxes(const MarkedText& mt) {
  std::vector<PhraseBox> out;
  for (const Segment& seg : mt.segments) {
    if (const auto* r = std::get_if<RefSegment>(&seg)) {
      for (const QuantBox& b : r->boxes) out.push_back({r->phrase, b});
    }
  }
  return out;
}

std::string plain_text(const MarkedText& mt) {
  std::string out;
  for (const Segment& seg : mt.segments) {
    if (const auto* t = std::get_if<TextSegment>(&seg)) {
      out += t->raw;
    } else {
      out += std::get<RefSegment>(seg).phrase;
    }
  }
  return out;
}

std::string render_prompt(std::string_view image_ref,
                          const MarkedText& question) {
  auto has_img_marker = [](std::string_view s) {
    return s.find(kImgOpen) != std::string_view::npos ||
           s.find(kImgClose) != std::string_view::npos;
  };
  if (has_img_marker(image_ref) || contains_reserved_token(image_ref)) {
    throw Error(ErrorCode::kReservedTokenInText,
                "image reference contains a markup token");
  }
  std::string body = render(question);
  if (has_img_marker(body)) {
    throw Error(ErrorCode::kReservedTokenInText,
                "question already contains an image marker");
  }
  std::string out(kImgOpen);
  out += image_ref;
  out += kImgClose;
  out += '\n';
  out += body;
  return out;
}

}  // namespace grit
