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

// Categorical features of event pairs and their sparse vector form.

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tlink/corpus.hpp"
#include "tlink/error.hpp"
#include "tlink/text.hpp"

namespace tlink {

inline constexpr std::string_view kAbsent = "ABSENT";

enum class FeatureSet : std::uint8_t { kBcdcBasic, kBcdcExtra, kEmtrl };

inline FeatureSet parse_feature_set(std::string_view s) {
  if (iequals(s, "basic") || iequals(s, "bcdc_basic")) return FeatureSet::kBcdcBasic;
  if (iequals(s, "extra") || iequals(s, "bcdc_extra")) return FeatureSet::kBcdcExtra;
  if (iequals(s, "emtrl")) return FeatureSet::kEmtrl;
  throw ValidationError("unknown feature set '" + std::string(s) + "'");
}

struct FeatureValue {
  std::string slot;
  std::string value;

  friend bool operator==(const FeatureValue&, const FeatureValue&) = default;
};

using FeatureVector = std::vector<FeatureValue>;

// Slot names of the EM feature set, in emission order.
inline const std::vector<std::string>& emtrl_slots() {
  static const std::vector<std::string> slots = {
      "word_1",        "word_2",        "lemma_1",      "lemma_2",     "synset_1",
      "synset_2",      "pos_1",         "pos_2",        "gov_verb_1",  "gov_verb_2",
      "gov_verb_pos_1", "gov_verb_pos_2", "auxiliary",  "class_1",     "class_2",
      "tense_1",       "tense_2",       "aspect_1",     "aspect_2",    "modality_1",
      "modality_2",    "polarity_1",    "polarity_2",   "tense_match", "aspect_match",
      "class_match",   "tense_pair",    "aspect_pair",  "class_pair",  "pos_pair",
      "prep_1",        "prep_2",        "text_order",   "dominates",   "entity_match",
  };
  return slots;
}

namespace detail {

inline std::string flag(bool b) { return b ? "true" : "false"; }

inline std::string or_absent(const std::optional<std::string>& s) {
  return s ? *s : std::string(kAbsent);
}

inline std::string joined(std::string_view a, std::string_view b) {
  std::string out(a);
  out += ',';
  out += b;
  return out;
}

inline std::string distance_bucket(const EventInstance& a, const EventInstance& b) {
  const std::size_t d = a.sentence_index > b.sentence_index ? a.sentence_index - b.sentence_index
                                                            : b.sentence_index - a.sentence_index;
  if (d == 0) return "0";
  if (d == 1) return "1";
  return "2+";
}

inline void append_suffixed(FeatureVector& out, const FeatureVector& in, std::string_view suffix) {
  for (const auto& f : in) out.push_back({f.slot + std::string(suffix), f.value});
}

inline bool shares_entity(const EventInstance& a, const EventInstance& b) {
  return std::any_of(a.entity_args.begin(), a.entity_args.end(), [&](const std::string& x) {
    return std::find(b.entity_args.begin(), b.entity_args.end(), x) != b.entity_args.end();
  });
}

}  // namespace detail

inline FeatureVector extract_basic(const EventInstance& e) {
  return {
      {"tense", std::string(to_string(e.tense))},
      {"aspect", std::string(to_string(e.aspect))},
      {"modality", std::string(to_string(e.modality))},
      {"polarity", std::string(to_string(e.polarity))},
      {"event_class", std::string(to_string(e.event_class))},
      {"word", to_lower(e.word)},
      {"pos", std::string(to_string(e.pos))},
  };
}

inline FeatureVector extract_pair(const Document& doc, std::string_view e1, std::string_view e2,
                                  FeatureSet set) {
  const EventInstance& a = doc.event(e1);
  const EventInstance& b = doc.event(e2);
  using detail::flag;
  FeatureVector out;

  if (set != FeatureSet::kEmtrl) {
    detail::append_suffixed(out, extract_basic(a), "_1");
    detail::append_suffixed(out, extract_basic(b), "_2");
    out.push_back({"tense_agree", flag(a.tense == b.tense)});
    out.push_back({"aspect_agree", flag(a.aspect == b.aspect)});
    if (set == FeatureSet::kBcdcExtra) {
      out.push_back({"prep_1", flag(a.in_prep_phrase)});
      out.push_back({"prep_2", flag(b.in_prep_phrase)});
      out.push_back({"same_sentence", flag(a.sentence_index == b.sentence_index)});
      out.push_back({"distance", detail::distance_bucket(a, b)});
    }
    return out;
  }

  const auto cls = [](const EventInstance& e) { return std::string(to_string(e.event_class)); };
  const auto tense = [](const EventInstance& e) { return std::string(to_string(e.tense)); };
  const auto aspect = [](const EventInstance& e) { return std::string(to_string(e.aspect)); };
  const auto pos = [](const EventInstance& e) { return std::string(to_string(e.pos)); };
  std::string aux = detail::or_absent(a.auxiliary) + "|" + detail::or_absent(b.auxiliary);

  out = {
      {"word_1", to_lower(a.word)},
      {"word_2", to_lower(b.word)},
      {"lemma_1", detail::or_absent(a.lemma)},
      {"lemma_2", detail::or_absent(b.lemma)},
      {"synset_1", detail::or_absent(a.synset_id)},
      {"synset_2", detail::or_absent(b.synset_id)},
      {"pos_1", pos(a)},
      {"pos_2", pos(b)},
      {"gov_verb_1", detail::or_absent(a.governing_verb)},
      {"gov_verb_2", detail::or_absent(b.governing_verb)},
      {"gov_verb_pos_1", detail::or_absent(a.governing_verb_pos)},
      {"gov_verb_pos_2", detail::or_absent(b.governing_verb_pos)},
      {"auxiliary", std::move(aux)},
      {"class_1", cls(a)},
      {"class_2", cls(b)},
      {"tense_1", tense(a)},
      {"tense_2", tense(b)},
      {"aspect_1", aspect(a)},
      {"aspect_2", aspect(b)},
      {"modality_1", std::string(to_string(a.modality))},
      {"modality_2", std::string(to_string(b.modality))},
      {"polarity_1", std::string(to_string(a.polarity))},
      {"polarity_2", std::string(to_string(b.polarity))},
      {"tense_match", flag(a.tense == b.tense)},
      {"aspect_match", flag(a.aspect == b.aspect)},
      {"class_match", flag(a.event_class == b.event_class)},
      {"tense_pair", detail::joined(tense(a), tense(b))},
      {"aspect_pair", detail::joined(aspect(a), aspect(b))},
      {"class_pair", detail::joined(cls(a), cls(b))},
      {"pos_pair", detail::joined(pos(a), pos(b))},
      {"prep_1", flag(a.in_prep_phrase)},
      {"prep_2", flag(b.in_prep_phrase)},
      {"text_order", flag(occurs_before(a, b))},
      {"dominates", flag(doc.dominates(a.event_id, b.event_id))},
      {"entity_match", flag(detail::shares_entity(a, b))},
  };
  return out;
}

// The EM likelihood treats tense and aspect of one event as a single joint
// variable; this folds tense_k/aspect_k into tense_aspect_k.
inline FeatureVector joint_tense_aspect(const FeatureVector& vec) {
  FeatureVector out;
  out.reserve(vec.size());
  const std::string* tense[2] = {nullptr, nullptr};
  for (const auto& f : vec) {
    for (int k = 0; k < 2; ++k) {
      const std::string n = std::to_string(k + 1);
      if (f.slot == "tense_" + n) tense[k] = &f.value;
    }
  }
  for (const auto& f : vec) {
    if (f.slot == "tense_1" || f.slot == "tense_2") continue;
    if (f.slot == "aspect_1" || f.slot == "aspect_2") {
      const int k = f.slot.back() - '1';
      const std::string t = tense[k] ? *tense[k] : std::string(kAbsent);
      out.push_back({"tense_aspect_" + std::string(1, f.slot.back()), t + "/" + f.value});
      continue;
    }
    out.push_back(f);
  }
  return out;
}

struct SparseVector {
  // Sorted by index, no duplicates.
  std::vector<std::pair<std::uint32_t, double>> entries;

  double dot(const std::vector<double>& w) const {
    double s = 0.0;
    for (const auto& [i, v] : entries) {
      if (i < w.size()) s += w[i] * v;
    }
    return s;
  }

  friend bool operator==(const SparseVector&, const SparseVector&) = default;
};

// Stable (slot, value) -> dimension map. Reads are safe to share; registration
// needs exclusive access.
class FeatureIndex {
 public:
  std::optional<std::uint32_t> find(std::string_view slot, std::string_view value) const {
    auto it = dims_.find(key(slot, value));
    if (it == dims_.end()) return std::nullopt;
    return it->second;
  }

  std::uint32_t add(std::string_view slot, std::string_view value) {
    auto [it, inserted] = dims_.try_emplace(key(slot, value), static_cast<std::uint32_t>(entries_.size()));
    if (inserted) entries_.push_back({std::string(slot), std::string(value)});
    return it->second;
  }

  std::size_t size() const { return entries_.size(); }
  const FeatureValue& entry(std::uint32_t dim) const { return entries_.at(dim); }

  void save(std::ostream& out) const {
    for (std::size_t d = 0; d < entries_.size(); ++d) {
      out << entries_[d].slot << '\t' << entries_[d].value << '\t' << d << '\n';
    }
  }

  static FeatureIndex load(std::istream& in) {
    FeatureIndex index;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const auto parts = split(line, '\t');
      if (parts.size() != 3) throw ParseError("feature index: expected 3 fields", line_no);
      std::size_t dim = 0;
      if (!parse_int(parts[2], dim) || dim != index.size()) {
        throw ParseError("feature index: dimensions must be dense and ascending", line_no);
      }
      if (index.find(parts[0], parts[1])) throw ParseError("feature index: duplicate entry", line_no);
      index.add(parts[0], parts[1]);
    }
    return index;
  }

  friend bool operator==(const FeatureIndex& a, const FeatureIndex& b) { return a.entries_ == b.entries_; }

 private:
  static std::string key(std::string_view slot, std::string_view value) {
    std::string k(slot);
    k += '\t';
    k += value;
    return k;
  }

  std::map<std::string, std::uint32_t, std::less<>> dims_;
  std::vector<FeatureValue> entries_;
};

namespace detail {

inline SparseVector finish_sparse(SparseVector out) {
  std::sort(out.entries.begin(), out.entries.end());
  out.entries.erase(std::unique(out.entries.begin(), out.entries.end()), out.entries.end());
  return out;
}

}  // namespace detail

// Frozen lookup: unseen (slot, value) pairs are dropped.
inline SparseVector vectorize(const FeatureVector& vec, const FeatureIndex& index) {
  SparseVector out;
  for (const auto& f : vec) {
    if (auto d = index.find(f.slot, f.value)) out.entries.emplace_back(*d, 1.0);
  }
  return detail::finish_sparse(std::move(out));
}

inline SparseVector vectorize(const FeatureVector& vec, FeatureIndex& index, bool frozen) {
  if (frozen) return vectorize(vec, std::as_const(index));
  SparseVector out;
  for (const auto& f : vec) out.entries.emplace_back(index.add(f.slot, f.value), 1.0);
  return detail::finish_sparse(std::move(out));
}

}  // namespace tlink
