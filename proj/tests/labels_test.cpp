// Copyright 2026 The tlink Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tlink/labels.hpp"

#include <gtest/gtest.h>

namespace tlink {
namespace {

TEST(NormalizeRelation, ReproducesTheEightConversionRows) {
  EXPECT_EQ(normalize_relation(Raw14::kAfter), (NormalizedRelation{Norm6::kBefore, true}));
  EXPECT_EQ(normalize_relation(Raw14::kIAfter), (NormalizedRelation{Norm6::kIBefore, true}));
  EXPECT_EQ(normalize_relation(Raw14::kEndedBy), (NormalizedRelation{Norm6::kEnds, true}));
  EXPECT_EQ(normalize_relation(Raw14::kBegunBy), (NormalizedRelation{Norm6::kBegins, true}));
  EXPECT_EQ(normalize_relation(Raw14::kIsIncluded), (NormalizedRelation{Norm6::kIncludes, true}));
  EXPECT_EQ(normalize_relation(Raw14::kDuring), (NormalizedRelation{Norm6::kIncludes, true}));
  EXPECT_EQ(normalize_relation(Raw14::kIdentity), (NormalizedRelation{Norm6::kSimultaneous, false}));
  EXPECT_EQ(normalize_relation(Raw14::kDuringInv), (NormalizedRelation{Norm6::kIncludes, false}));
}

TEST(NormalizeRelation, ForwardRelationsPassThrough) {
  EXPECT_EQ(normalize_relation(Raw14::kSimultaneous), (NormalizedRelation{Norm6::kSimultaneous, false}));
  EXPECT_EQ(normalize_relation(Raw14::kBefore), (NormalizedRelation{Norm6::kBefore, false}));
  EXPECT_EQ(normalize_relation(Raw14::kIBefore), (NormalizedRelation{Norm6::kIBefore, false}));
  EXPECT_EQ(normalize_relation(Raw14::kIncludes), (NormalizedRelation{Norm6::kIncludes, false}));
  EXPECT_EQ(normalize_relation(Raw14::kBegins), (NormalizedRelation{Norm6::kBegins, false}));
  EXPECT_EQ(normalize_relation(Raw14::kEnds), (NormalizedRelation{Norm6::kEnds, false}));
}

TEST(NormalizeRelation, SwapsExactlyTheInverseRelations) {
  for (std::size_t i = 0; i < label_count(Scheme::kRaw14); ++i) {
    const auto raw = static_cast<Raw14>(i);
    const bool expected = raw == Raw14::kAfter || raw == Raw14::kIAfter ||
                          raw == Raw14::kEndedBy || raw == Raw14::kBegunBy ||
                          raw == Raw14::kIsIncluded || raw == Raw14::kDuring;
    EXPECT_EQ(normalize_relation(raw).swapped, expected) << label_name(Scheme::kRaw14, i);
  }
}

TEST(CoarsenRelation, MergesBeforeAfterAndCollapsesTheRest) {
  EXPECT_EQ(coarsen_relation(Raw14::kIBefore), Coarse3::kBefore);
  EXPECT_EQ(coarsen_relation(Raw14::kBefore), Coarse3::kBefore);
  EXPECT_EQ(coarsen_relation(Raw14::kIAfter), Coarse3::kAfter);
  EXPECT_EQ(coarsen_relation(Raw14::kAfter), Coarse3::kAfter);
  EXPECT_EQ(coarsen_relation(Raw14::kBegins), Coarse3::kOverlap);
  int overlaps = 0;
  for (std::size_t i = 0; i < label_count(Scheme::kRaw14); ++i) {
    if (coarsen_relation(static_cast<Raw14>(i)) == Coarse3::kOverlap) ++overlaps;
  }
  EXPECT_EQ(overlaps, 10);
}

TEST(CoarsenRelation, AgreesWithNormalizationUnderSwap) {
  for (std::size_t i = 0; i < label_count(Scheme::kRaw14); ++i) {
    const auto raw = static_cast<Raw14>(i);
    const auto norm = normalize_relation(raw);
    Coarse3 via_norm = coarsen_relation(norm.value);
    if (norm.swapped) via_norm = invert(via_norm);
    EXPECT_EQ(coarsen_relation(raw), via_norm) << label_name(Scheme::kRaw14, i);
  }
}

TEST(Labels, ParseIsCaseInsensitiveAndRejectsForeignNames) {
  EXPECT_EQ(parse_label(Scheme::kRaw14, "during_inv"), static_cast<LabelId>(Raw14::kDuringInv));
  EXPECT_EQ(parse_label(Scheme::kRaw14, "IS-INCLUDED"), static_cast<LabelId>(Raw14::kIsIncluded));
  EXPECT_EQ(parse_label(Scheme::kCoarse3, "overlap"), static_cast<LabelId>(Coarse3::kOverlap));
  EXPECT_THROW(parse_label(Scheme::kCoarse3, "INCLUDES"), ParseError);
  EXPECT_THROW(parse_scheme("norm7"), ParseError);
  EXPECT_EQ(parse_scheme("Norm6"), Scheme::kNorm6);
}

TEST(Labels, ConvertLabelRefusesRefinement) {
  EXPECT_THROW(convert_label(make_label(Coarse3::kBefore), Scheme::kNorm6), UnsupportedError);
  const auto c = convert_label(make_label(Raw14::kDuring), Scheme::kNorm6);
  EXPECT_EQ(c.label, make_label(Norm6::kIncludes));
  EXPECT_TRUE(c.swapped);
}

}  // namespace
}  // namespace tlink
