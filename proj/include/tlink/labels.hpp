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

#pragma once

// Temporal relation label schemes and conversions between them.
//
//   Raw14   - the fourteen TimeML TLINK relation types.
//   Norm6   - inverse relations merged by swapping arguments.
//   Coarse3 - BEFORE / AFTER / OVERLAP.
//
// Label values are small integers whose order is the scheme's canonical order;
// every argmax tie in the library is broken towards the lower value.

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "tlink/error.hpp"
#include "tlink/text.hpp"

namespace tlink {

enum class Scheme : std::uint8_t { kRaw14, kNorm6, kCoarse3 };

enum class Raw14 : std::uint8_t {
  kSimultaneous,
  kIdentity,
  kBefore,
  kAfter,
  kIBefore,
  kIAfter,
  kIncludes,
  kIsIncluded,
  kDuring,
  kDuringInv,
  kBegins,
  kBegunBy,
  kEnds,
  kEndedBy,
};

// Row order of the normalized class-distribution table.
enum class Norm6 : std::uint8_t {
  kIBefore,
  kBegins,
  kEnds,
  kSimultaneous,
  kIncludes,
  kBefore,
};

enum class Coarse3 : std::uint8_t { kBefore, kAfter, kOverlap };

using LabelId = std::uint8_t;

inline constexpr std::size_t kMaxLabels = 14;

namespace detail {

inline constexpr std::array<std::string_view, 14> kRaw14Names = {
    "SIMULTANEOUS", "IDENTITY", "BEFORE",  "AFTER",      "IBEFORE",
    "IAFTER",       "INCLUDES", "IS_INCLUDED", "DURING", "DURING_INV",
    "BEGINS",       "BEGUN_BY", "ENDS",    "ENDED_BY"};
inline constexpr std::array<std::string_view, 6> kNorm6Names = {
    "IBEFORE", "BEGINS", "ENDS", "SIMULTANEOUS", "INCLUDES", "BEFORE"};
inline constexpr std::array<std::string_view, 3> kCoarse3Names = {
    "BEFORE", "AFTER", "OVERLAP"};

}  // namespace detail

constexpr std::size_t label_count(Scheme scheme) {
  switch (scheme) {
    case Scheme::kRaw14:
      return 14;
    case Scheme::kNorm6:
      return 6;
    case Scheme::kCoarse3:
      return 3;
  }
  return 0;
}

inline std::string_view scheme_name(Scheme scheme) {
  switch (scheme) {
    case Scheme::kRaw14:
      return "raw14";
    case Scheme::kNorm6:
      return "norm6";
    case Scheme::kCoarse3:
      return "coarse3";
  }
  return "?";
}

inline Scheme parse_scheme(std::string_view text) {
  const std::string lower = to_lower(text);
  if (lower == "raw14") return Scheme::kRaw14;
  if (lower == "norm6") return Scheme::kNorm6;
  if (lower == "coarse3") return Scheme::kCoarse3;
  throw ParseError("unknown label scheme '" + std::string(text) + "'");
}

inline std::string_view label_name(Scheme scheme, LabelId value) {
  if (value >= label_count(scheme)) {
    throw ValidationError("label value " + std::to_string(value) +
                          " out of range for scheme " +
                          std::string(scheme_name(scheme)));
  }
  switch (scheme) {
    case Scheme::kRaw14:
      return detail::kRaw14Names[value];
    case Scheme::kNorm6:
      return detail::kNorm6Names[value];
    case Scheme::kCoarse3:
      return detail::kCoarse3Names[value];
  }
  return "?";
}

// Case-insensitive lookup; '-' is accepted for '_'.
inline LabelId parse_label(Scheme scheme, std::string_view text) {
  std::string upper = to_upper(text);
  for (char& c : upper) {
    if (c == '-') c = '_';
  }
  for (std::size_t i = 0; i < label_count(scheme); ++i) {
    if (label_name(scheme, static_cast<LabelId>(i)) == upper) {
      return static_cast<LabelId>(i);
    }
  }
  throw ParseError("'" + std::string(text) + "' is not a " +
                   std::string(scheme_name(scheme)) + " label");
}

struct RelationLabel {
  Scheme scheme = Scheme::kCoarse3;
  LabelId value = 0;

  std::string_view name() const { return label_name(scheme, value); }

  friend bool operator==(const RelationLabel&, const RelationLabel&) = default;
};

constexpr RelationLabel make_label(Raw14 v) {
  return {Scheme::kRaw14, static_cast<LabelId>(v)};
}
constexpr RelationLabel make_label(Norm6 v) {
  return {Scheme::kNorm6, static_cast<LabelId>(v)};
}
constexpr RelationLabel make_label(Coarse3 v) {
  return {Scheme::kCoarse3, static_cast<LabelId>(v)};
}

struct NormalizedRelation {
  Norm6 value;
  bool swapped;  // caller must exchange source and target

  friend bool operator==(const NormalizedRelation&,
                         const NormalizedRelation&) = default;
};

// Inverse relations fold onto their forward form by swapping arguments;
// IDENTITY and DURING_INV fold onto their supertypes in place.
constexpr NormalizedRelation normalize_relation(Raw14 raw) {
  switch (raw) {
    case Raw14::kSimultaneous:
      return {Norm6::kSimultaneous, false};
    case Raw14::kIdentity:
      return {Norm6::kSimultaneous, false};
    case Raw14::kBefore:
      return {Norm6::kBefore, false};
    case Raw14::kAfter:
      return {Norm6::kBefore, true};
    case Raw14::kIBefore:
      return {Norm6::kIBefore, false};
    case Raw14::kIAfter:
      return {Norm6::kIBefore, true};
    case Raw14::kIncludes:
      return {Norm6::kIncludes, false};
    case Raw14::kIsIncluded:
      return {Norm6::kIncludes, true};
    case Raw14::kDuring:
      return {Norm6::kIncludes, true};
    case Raw14::kDuringInv:
      return {Norm6::kIncludes, false};
    case Raw14::kBegins:
      return {Norm6::kBegins, false};
    case Raw14::kBegunBy:
      return {Norm6::kBegins, true};
    case Raw14::kEnds:
      return {Norm6::kEnds, false};
    case Raw14::kEndedBy:
      return {Norm6::kEnds, true};
  }
  return {Norm6::kSimultaneous, false};
}

constexpr Coarse3 coarsen_relation(Raw14 raw) {
  switch (raw) {
    case Raw14::kBefore:
    case Raw14::kIBefore:
      return Coarse3::kBefore;
    case Raw14::kAfter:
    case Raw14::kIAfter:
      return Coarse3::kAfter;
    default:
      return Coarse3::kOverlap;
  }
}

// Same-orientation coarsening of a normalized label.
constexpr Coarse3 coarsen_relation(Norm6 norm) {
  return (norm == Norm6::kBefore || norm == Norm6::kIBefore)
             ? Coarse3::kBefore
             : Coarse3::kOverlap;
}

// Coarse3 label of the reversed pair.
constexpr Coarse3 invert(Coarse3 label) {
  switch (label) {
    case Coarse3::kBefore:
      return Coarse3::kAfter;
    case Coarse3::kAfter:
      return Coarse3::kBefore;
    case Coarse3::kOverlap:
      return Coarse3::kOverlap;
  }
  return label;
}

struct ConvertedLabel {
  RelationLabel label;
  bool swapped;
};

// Converts towards a coarser scheme. Raw14 -> Norm6 may request an endpoint
// swap; every other supported direction keeps orientation.
inline ConvertedLabel convert_label(RelationLabel from, Scheme to) {
  if (from.scheme == to) return {from, false};
  if (from.scheme == Scheme::kRaw14 && to == Scheme::kNorm6) {
    const auto n = normalize_relation(static_cast<Raw14>(from.value));
    return {make_label(n.value), n.swapped};
  }
  if (from.scheme == Scheme::kRaw14 && to == Scheme::kCoarse3) {
    return {make_label(coarsen_relation(static_cast<Raw14>(from.value))),
            false};
  }
  if (from.scheme == Scheme::kNorm6 && to == Scheme::kCoarse3) {
    return {make_label(coarsen_relation(static_cast<Norm6>(from.value))),
            false};
  }
  throw UnsupportedError("cannot convert " + std::string(from.name()) +
                         " from " + std::string(scheme_name(from.scheme)) +
                         " to " + std::string(scheme_name(to)));
}

}  // namespace tlink
