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

#include "grit/grounding_markup.hpp"
#include "support/generators.hpp"

namespace grit {
namespace {

TEST(Quantize, Examples) {
  EXPECT_EQ(quantize({0.25, 0.5, 0.75, 1.0}), (QuantBox{250, 500, 750, 1000}));
  EXPECT_EQ(quantize({0, 0, 0, 0}), (QuantBox{0, 0, 0, 0}));
  EXPECT_EQ(quantize({0.1234, 0.5, 0.9999, 1.0}), (QuantBox{123, 500, 1000, 1000}));
  // Half-way values go up.
  EXPECT_EQ(quantize_coord(0.0005), 1);
  EXPECT_EQ(quantize_coord(0.0125), 13);
  EXPECT_EQ(quantize_coord(1.2), 1000);
  EXPECT_EQ(quantize_coord(-0.1), 0);
}

TEST(Quantize, ErrorBoundAndOrderOnGrid) {
  int prev = -1;
  for (int i = 0; i <= 10000; ++i) {
    const double v = i / 10000.0;
    const int q = quantize_coord(v);
    EXPECT_LE(std::abs(q / 1000.0 - v), 0.0005 + 1e-12) << v;
    EXPECT_GE(q, prev);
    prev = q;
  }
}

TEST(Dequantize, InvertsQuantizeOnTheIntegerGrid) {
  for (int q = 0; q <= kQuantMax; ++q) {
    const QuantBox b{q, q, q, q};
    EXPECT_EQ(quantize(dequantize(b)), b);
  }
  EXPECT_EQ(dequantize({250, 500, 750, 1000}), (NormBox{0.25, 0.5, 0.75, 1.0}));
}

TEST(Render, Examples) {
  EXPECT_EQ(render(MarkedText().ref("liver", {{103, 214, 486, 702}})),
            "<ref>liver</ref><box>(103,214),(486,702)</box>");
  EXPECT_EQ(render(MarkedText().text("hello")), "hello");
  EXPECT_EQ(render(MarkedText().ref("lesions", {{1, 2, 3, 4}, {5, 6, 7, 8}})),
            "<ref>lesions</ref><box>(1,2),(3,4)</box><box>(5,6),(7,8)</box>");
}

TEST(Render, RefusesReservedTokensInText) {
  for (const MarkedText& mt : {MarkedText().text("a <ref> b"), MarkedText().ref("x</box>", {{0, 0, 1, 1}})}) {
    try {
      render(mt);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kReservedTokenInText);
    }
  }
  EXPECT_THROW(render(MarkedText().ref("x", {})), Error);
  EXPECT_THROW(render(MarkedText().ref("x", {{5, 0, 4, 1}})), Error);
}

TEST(Parse, RoundTripsRandomValues) {
  SplitMix64 rng(123);
  for (int i = 0; i < 5000; ++i) {
    const MarkedText mt = testgen::random_marked_text(rng);
    ASSERT_TRUE(is_canonical(mt));
    const std::string wire = render(mt);
    for (ParseMode mode : {ParseMode::kStrict, ParseMode::kLenient}) {
      const ParseResult r = parse(wire, mode);
      ASSERT_EQ(r.text, mt) << wire;
      ASSERT_TRUE(r.issues.empty()) << wire;
    }
  }
}

TEST(Parse, StrictRejectsOrphanBox) {
  try {
    parse("<box>(1,2),(3,4)</box>", ParseMode::kStrict);
    FAIL();
  } catch (const MarkupError& e) {
    EXPECT_EQ(e.issue().kind, IssueKind::kBoxWithoutRef);
    EXPECT_EQ(e.issue().offset, 0u);
    EXPECT_EQ(e.code(), ErrorCode::kMarkupParse);
  }
}

TEST(Parse, LenientRecoversOrphanBox) {
  const ParseResult r = parse("<box>(1,2),(3,4)</box>", ParseMode::kLenient);
  EXPECT_EQ(r.text, MarkedText().ref("", {{1, 2, 3, 4}}));
  ASSERT_EQ(r.issues.size(), 1u);
  EXPECT_EQ(r.issues[0].kind, IssueKind::kBoxWithoutRef);
}

TEST(Parse, LenientClampsOutOfRange) {
  const ParseResult r = parse("<ref>liver</ref><box>(1,2),(3,1400)</box>", ParseMode::kLenient);
  EXPECT_EQ(r.text, MarkedText().ref("liver", {{1, 2, 3, 1000}}));
  ASSERT_EQ(r.issues.size(), 1u);
  EXPECT_EQ(r.issues[0].kind, IssueKind::kOutOfRange);
}

TEST(Parse, LenientRecoveries) {
  struct Case {
    const char* in;
    MarkedText want;
    std::vector<IssueKind> kinds;
  };
  const std::vector<Case> cases = {
      {"<ref>liver", MarkedText().text("liver"), {IssueKind::kUnclosedTag, IssueKind::kUnclosedTag}},
      {"<ref>liver<box>(1,2),(3,4)</box>", MarkedText().ref("liver", {{1, 2, 3, 4}}),
       {IssueKind::kUnclosedTag}},
      {"a</ref>b", MarkedText().text("ab"), {IssueKind::kStrayClose}},
      {"<ref>x</ref><box>( 1 , 2 ),(3,04)</box>", MarkedText().ref("x", {{1, 2, 3, 4}}),
       {IssueKind::kMalformedCoordinate}},
      {"a<re<ref></ref>f>", MarkedText().text("aref>"),
       {IssueKind::kUnclosedTag}},
      {"<ref>x</ref><box>(9,2),(3,4)</box>", MarkedText().ref("x", {{3, 2, 9, 4}}),
       {IssueKind::kMalformedCoordinate}},
      {"<ref>x</ref><box>garbage</box> tail", MarkedText().text("x tail"),
       {IssueKind::kMalformedCoordinate}},
      {"<ref>x</ref><box>(1,2),(3,4)", MarkedText().ref("x", {{1, 2, 3, 4}}),
       {IssueKind::kUnclosedTag}},
      {"<ref>x</ref><box>(-5,2),(3,4)</box>", MarkedText().ref("x", {{0, 2, 3, 4}}),
       {IssueKind::kOutOfRange}},
  };
  for (const Case& c : cases) {
    const ParseResult r = parse(c.in, ParseMode::kLenient);
    EXPECT_EQ(r.text, c.want) << c.in;
    std::vector<IssueKind> kinds;
    for (const auto& i : r.issues) kinds.push_back(i.kind);
    EXPECT_EQ(kinds, c.kinds) << c.in;
    EXPECT_TRUE(is_canonical(r.text)) << c.in;
  }
}

TEST(Parse, MalformedCorpusStrictKindsAndLenientTotality) {
  const auto corpus = testgen::malformed_corpus(99);
  ASSERT_EQ(corpus.size(), 200u);
  for (const auto& c : corpus) {
    try {
      parse(c.input, ParseMode::kStrict);
      ADD_FAILURE() << "accepted: " << c.input;
    } catch (const MarkupError& e) {
      EXPECT_EQ(e.issue().kind, c.expected) << c.input << " -> " << e.what();
      EXPECT_LE(e.issue().offset, c.input.size());
    }
    ParseResult r;
    ASSERT_NO_THROW(r = parse(c.input, ParseMode::kLenient)) << c.input;
    EXPECT_TRUE(is_canonical(r.text)) << c.input;
    EXPECT_FALSE(r.issues.empty()) << c.input;
    EXPECT_NO_THROW(render(r.text));
    for (const auto& i : r.issues) EXPECT_LE(i.offset, c.input.size());
  }
}

TEST(Parse, LenientNeverFailsOnRandomBytes) {
  SplitMix64 rng(5);
  static const std::vector<std::string> kAtoms = {"<ref>", "</ref>", "<box>", "</box>", "(", ")",
                                                  ",", "1", "999", "-", "1001", "x", " ", "<"};
  for (int i = 0; i < 5000; ++i) {
    std::string s;
    const auto n = rng.between(0, 12);
    for (std::int64_t k = 0; k < n; ++k) s += kAtoms[rng.below(kAtoms.size())];
    ParseResult r;
    ASSERT_NO_THROW(r = parse(s, ParseMode::kLenient)) << s;
    ASSERT_TRUE(is_canonical(r.text)) << s;
    // Clean output parses strictly back to itself.
    EXPECT_EQ(parse(render(r.text), ParseMode::kStrict).text, r.text) << s;
  }
}

TEST(ExtractBoxes, DocumentOrder) {
  const MarkedText mt = MarkedText()
                            .text("see ")
                            .ref("liver", {{1, 1, 2, 2}, {3, 3, 4, 4}})
                            .text(" and ")
                            .ref("kidney", {{5, 5, 6, 6}});
  const std::vector<PhraseBox> want = {
      {"liver", {1, 1, 2, 2}}, {"liver", {3, 3, 4, 4}}, {"kidney", {5, 5, 6, 6}}};
  EXPECT_EQ(extract_boxes(mt), want);
  EXPECT_TRUE(extract_boxes(MarkedText().text("plain")).empty());
  EXPECT_EQ(plain_text(mt), "see liver and kidney");
}

TEST(Canonicalize, MergesAndDropsText) {
  MarkedText mt;
  mt.text("a").text("").text("b").ref("r", {{0, 0, 1, 1}}).text("");
  EXPECT_FALSE(is_canonical(mt));
  EXPECT_EQ(canonicalize(mt), MarkedText().text("ab").ref("r", {{0, 0, 1, 1}}));
}

TEST(RenderPrompt, WrapsImageOnce) {
  const std::string p = render_prompt("img_001.png", MarkedText().text("What is this?"));
  EXPECT_EQ(p, "<img>img_001.png</img>\nWhat is this?");
}

}  // namespace
}  // namespace grit
