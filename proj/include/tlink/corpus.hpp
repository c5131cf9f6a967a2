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

// Documents, annotated event instances and temporal links.

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_set>
#include <utility>
#include <vector>

#include "tlink/error.hpp"
#include "tlink/labels.hpp"
#include "tlink/text.hpp"

namespace tlink {

enum class PartOfSpeech : std::uint8_t { kVerb, kNoun, kAdj, kOther };
enum class Tense : std::uint8_t { kNone, kPresent, kPast, kFuture };
enum class Aspect : std::uint8_t { kNone, kProg, kPerfect, kProgPerfect };
enum class Modality : std::uint8_t {
  kNone,
  kTo,
  kShould,
  kWould,
  kCould,
  kCan,
  kMight,
};
enum class Polarity : std::uint8_t { kPositive, kNegative };
enum class EventClass : std::uint8_t {
  kReport,
  kAspectual,
  kState,
  kIState,
  kIAction,
  kPerception,
  kOccurrence,
};

// Per-enum name tables. `kNames` is the canonical spelling (also the feature
// value), `kAliases` maps alternative spellings seen in TimeML markup, and
// `kFallback` is the value unknown spellings collapse to, when the attribute
// has a "none" member.
template <typename E>
struct AttributeTraits;

template <>
struct AttributeTraits<PartOfSpeech> {
  static constexpr std::string_view kAttribute = "pos";
  static constexpr std::array<std::string_view, 4> kNames = {"verb", "noun",
                                                             "adj", "other"};
  static constexpr std::array<std::pair<std::string_view, PartOfSpeech>, 3>
      kAliases = {{{"adjective", PartOfSpeech::kAdj},
                   {"preposition", PartOfSpeech::kOther},
                   {"prep", PartOfSpeech::kOther}}};
  static constexpr std::optional<PartOfSpeech> kFallback = std::nullopt;
};

template <>
struct AttributeTraits<Tense> {
  static constexpr std::string_view kAttribute = "tense";
  static constexpr std::array<std::string_view, 4> kNames = {
      "none", "present", "past", "future"};
  static constexpr std::array<std::pair<std::string_view, Tense>, 1> kAliases =
      {{{"pres", Tense::kPresent}}};
  static constexpr std::optional<Tense> kFallback = Tense::kNone;
};

template <>
struct AttributeTraits<Aspect> {
  static constexpr std::string_view kAttribute = "aspect";
  static constexpr std::array<std::string_view, 4> kNames = {
      "none", "prog", "perfect", "prog_perfect"};
  static constexpr std::array<std::pair<std::string_view, Aspect>, 4>
      kAliases = {{{"progressive", Aspect::kProg},
                   {"perfective", Aspect::kPerfect},
                   {"perfective_progressive", Aspect::kProgPerfect},
                   {"perfect_progressive", Aspect::kProgPerfect}}};
  static constexpr std::optional<Aspect> kFallback = Aspect::kNone;
};

template <>
struct AttributeTraits<Modality> {
  static constexpr std::string_view kAttribute = "modality";
  static constexpr std::array<std::string_view, 7> kNames = {
      "none", "to", "should", "would", "could", "can", "might"};
  static constexpr std::array<std::pair<std::string_view, Modality>, 0>
      kAliases = {};
  static constexpr std::optional<Modality> kFallback = Modality::kNone;
};

template <>
struct AttributeTraits<Polarity> {
  static constexpr std::string_view kAttribute = "polarity";
  static constexpr std::array<std::string_view, 2> kNames = {"positive",
                                                             "negative"};
  static constexpr std::array<std::pair<std::string_view, Polarity>, 2>
      kAliases = {{{"pos", Polarity::kPositive}, {"neg", Polarity::kNegative}}};
  static constexpr std::optional<Polarity> kFallback = std::nullopt;
};

template <>
struct AttributeTraits<EventClass> {
  static constexpr std::string_view kAttribute = "event_class";
  static constexpr std::array<std::string_view, 7> kNames = {
      "report",  "aspectual",  "state",     "i_state",
      "i_action", "perception", "occurrence"};
  static constexpr std::array<std::pair<std::string_view, EventClass>, 2>
      kAliases = {{{"i-state", EventClass::kIState},
                   {"i-action", EventClass::kIAction}}};
  static constexpr std::optional<EventClass> kFallback = std::nullopt;
};

template <typename E>
constexpr std::size_t attribute_cardinality() {
  return AttributeTraits<E>::kNames.size();
}

template <typename E>
std::string_view to_string(E value) {
  return AttributeTraits<E>::kNames[static_cast<std::size_t>(value)];
}

// Case-insensitive. Unknown values map to the attribute's "none" member when
// it has one and are rejected otherwise.
template <typename E>
E parse_attribute(std::string_view text) {
  using Traits = AttributeTraits<E>;
  const std::string lower = to_lower(trim(text));
  for (std::size_t i = 0; i < Traits::kNames.size(); ++i) {
    if (Traits::kNames[i] == lower) return static_cast<E>(i);
  }
  for (const auto& [alias, value] : Traits::kAliases) {
    if (alias == lower) return value;
  }
  if (Traits::kFallback) return *Traits::kFallback;
  throw ValidationError("invalid " + std::string(Traits::kAttribute) +
                        " value '" + std::string(text) + "'");
}

struct TokenSpan {
  std::size_t begin = 0;  // inclusive
  std::size_t end = 0;    // exclusive

  friend bool operator==(const TokenSpan&, const TokenSpan&) = default;
};

struct EventInstance {
  std::string event_id;
  std::size_t sentence_index = 0;
  TokenSpan token_span;
  std::string word;
  std::optional<std::string> lemma;
  PartOfSpeech pos = PartOfSpeech::kVerb;
  Tense tense = Tense::kNone;
  Aspect aspect = Aspect::kNone;
  Modality modality = Modality::kNone;
  Polarity polarity = Polarity::kPositive;
  EventClass event_class = EventClass::kOccurrence;
  bool in_prep_phrase = false;
  std::optional<std::string> governing_verb;
  std::optional<std::string> governing_verb_pos;
  std::optional<std::string> auxiliary;
  std::optional<std::string> synset_id;
  std::vector<std::string> entity_args;

  // Lemma when annotated, else the lowercased surface word.
  std::string head() const { return lemma ? *lemma : to_lower(word); }

  friend bool operator==(const EventInstance&, const EventInstance&) = default;
};

struct Tlink {
  std::string source;
  std::string target;
  RelationLabel label;

  friend bool operator==(const Tlink&, const Tlink&) = default;
};

struct Document {
  std::string doc_id;
  std::optional<std::string> topic;
  std::vector<std::vector<std::string>> sentences;
  std::vector<EventInstance> events;
  std::vector<Tlink> tlinks;
  // (a, b): a syntactically dominates b.
  std::vector<std::pair<std::string, std::string>> dominance_pairs;

  const EventInstance* find_event(std::string_view id) const {
    for (const auto& e : events) {
      if (e.event_id == id) return &e;
    }
    return nullptr;
  }

  const EventInstance& event(std::string_view id) const {
    if (const auto* e = find_event(id)) return *e;
    throw ValidationError("document '" + doc_id + "' has no event '" +
                          std::string(id) + "'");
  }

  bool dominates(std::string_view a, std::string_view b) const {
    return std::any_of(dominance_pairs.begin(), dominance_pairs.end(),
                       [&](const auto& p) { return p.first == a && p.second == b; });
  }

  friend bool operator==(const Document&, const Document&) = default;
};

using Corpus = std::vector<Document>;

// Strict textual order of events: sentence, first token, then id.
inline bool occurs_before(const EventInstance& a, const EventInstance& b) {
  return std::tie(a.sentence_index, a.token_span.begin, a.event_id) <
         std::tie(b.sentence_index, b.token_span.begin, b.event_id);
}

inline void validate_document(const Document& doc) {
  if (doc.doc_id.empty()) throw ValidationError("document with empty doc_id");
  std::unordered_set<std::string> ids;
  for (const auto& e : doc.events) {
    if (e.event_id.empty()) {
      throw ValidationError("document '" + doc.doc_id +
                            "' has an event with empty event_id");
    }
    if (!ids.insert(e.event_id).second) {
      throw ValidationError("document '" + doc.doc_id +
                            "' repeats event_id '" + e.event_id + "'");
    }
    if (e.sentence_index >= doc.sentences.size()) {
      throw ValidationError("event '" + e.event_id + "' refers to sentence " +
                            std::to_string(e.sentence_index) +
                            " which does not exist");
    }
    const std::size_t n = doc.sentences[e.sentence_index].size();
    if (e.token_span.begin >= e.token_span.end || e.token_span.end > n) {
      throw ValidationError("event '" + e.event_id + "' token span [" +
                            std::to_string(e.token_span.begin) + ", " +
                            std::to_string(e.token_span.end) +
                            ") does not fit sentence of " + std::to_string(n) +
                            " tokens");
    }
  }
  const auto require = [&](const std::string& id, std::string_view what) {
    if (!ids.count(id)) {
      throw ValidationError("document '" + doc.doc_id + "': " +
                            std::string(what) + " references unknown event '" +
                            id + "'");
    }
  };
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& t : doc.tlinks) {
    require(t.source, "tlink");
    require(t.target, "tlink");
    if (t.source == t.target) {
      throw ValidationError("document '" + doc.doc_id + "': tlink from '" +
                            t.source + "' to itself");
    }
    if (t.label.value >= label_count(t.label.scheme)) {
      throw ValidationError("document '" + doc.doc_id +
                            "': tlink label out of range");
    }
    if (!seen.emplace(t.source, t.target).second) {
      throw ValidationError("document '" + doc.doc_id + "': duplicate tlink " +
                            t.source + " -> " + t.target);
    }
  }
  for (const auto& [a, b] : doc.dominance_pairs) {
    require(a, "dominance pair");
    require(b, "dominance pair");
  }
}

inline void validate_corpus(const Corpus& corpus) {
  std::unordered_set<std::string> ids;
  for (const auto& doc : corpus) {
    validate_document(doc);
    if (!ids.insert(doc.doc_id).second) {
      throw ValidationError("duplicate doc_id '" + doc.doc_id + "'");
    }
  }
}

// Converts every tlink to `scheme`, swapping endpoints where normalization
// asks for it. A later link over an already-labelled unordered pair is dropped
// (and counted) so each event pair keeps exactly one relation.
inline Corpus convert_corpus(const Corpus& corpus, Scheme scheme,
                             std::size_t* dropped = nullptr) {
  Corpus out = corpus;
  std::size_t n_dropped = 0;
  for (auto& doc : out) {
    std::vector<Tlink> links;
    std::set<std::pair<std::string, std::string>> pairs;
    for (const auto& t : doc.tlinks) {
      const auto converted = convert_label(t.label, scheme);
      Tlink link{t.source, t.target, converted.label};
      if (converted.swapped) std::swap(link.source, link.target);
      const auto key = std::minmax(link.source, link.target);
      if (!pairs.emplace(key.first, key.second).second) {
        ++n_dropped;
        continue;
      }
      links.push_back(std::move(link));
    }
    doc.tlinks = std::move(links);
  }
  if (dropped) *dropped = n_dropped;
  return out;
}

struct LabelStats {
  Scheme scheme = Scheme::kCoarse3;
  std::vector<std::size_t> counts;  // indexed by label value
  std::size_t total = 0;
  std::optional<LabelId> majority;
  double majority_fraction = 0.0;
};

// Majority ties resolve to the earliest label in scheme order.
inline LabelStats stats_from_counts(Scheme scheme,
                                    std::vector<std::size_t> counts) {
  if (counts.size() != label_count(scheme)) {
    throw ValidationError("expected " + std::to_string(label_count(scheme)) +
                          " label counts");
  }
  LabelStats stats;
  stats.scheme = scheme;
  stats.counts = std::move(counts);
  for (std::size_t i = 0; i < stats.counts.size(); ++i) {
    stats.total += stats.counts[i];
    if (!stats.majority || stats.counts[i] > stats.counts[*stats.majority]) {
      stats.majority = static_cast<LabelId>(i);
    }
  }
  if (stats.total == 0) {
    stats.majority.reset();
    return stats;
  }
  stats.majority_fraction = static_cast<double>(stats.counts[*stats.majority]) /
                            static_cast<double>(stats.total);
  return stats;
}

inline LabelStats corpus_stats(const Corpus& corpus, Scheme scheme) {
  std::vector<std::size_t> counts(label_count(scheme), 0);
  for (const auto& doc : corpus) {
    for (const auto& t : doc.tlinks) {
      ++counts[convert_label(t.label, scheme).label.value];
    }
  }
  return stats_from_counts(scheme, std::move(counts));
}

}  // namespace tlink
