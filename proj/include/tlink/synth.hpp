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

// Synthetic corpora with interval-derived gold relations.
//
// Every event sits in one cell of an integer timeline: a slot s and a shape
// within it (full [4s,4s+4], head [4s,4s+2], tail [4s+2,4s+4], middle
// [4s+1,4s+3]). Gold labels are read off the intervals, so each document's
// tlinks are realizable. Attributes are drawn from per-topic tables
// conditioned on the event's cell.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "tlink/algebra.hpp"
#include "tlink/corpus.hpp"
#include "tlink/error.hpp"
#include "tlink/random.hpp"
#include "tlink/text.hpp"

namespace tlink {

inline constexpr std::size_t kShapeCount = 4;
inline constexpr std::size_t kMaxTimelineSlots = 7;

struct SynthConfig {
  std::uint64_t seed = 1;
  std::size_t documents = 50;
  std::size_t topics = 5;
  // Topic numbering (and so topic vocabulary) starts here.
  std::size_t first_topic = 0;
  std::string doc_prefix = "doc";
  std::size_t events_min = 4;
  std::size_t events_max = 8;
  double link_density = 0.5;
  Scheme scheme = Scheme::kCoarse3;
  double informativeness = 0.9;
  // Overrides keyed by attribute: tense, aspect, event_class, word.
  std::map<std::string, double> slot_informativeness;
  double annotation_noise_rate = 0.0;
  double intra_sentence_fraction = 0.5;
  std::size_t timeline_slots = 6;
  // Spread of the per-topic slot and shape priors; 0 makes them uniform.
  double topic_skew = 1.5;
  std::size_t words_per_cell = 2;
  std::size_t filler_words = 30;
  // Chance that a document tells its events in its topic's direction
  // (chronological or reverse) instead of in random order.
  double narrative_order = 0.0;

  double informativeness_of(const std::string& attribute) const {
    const auto it = slot_informativeness.find(attribute);
    return it == slot_informativeness.end() ? informativeness : it->second;
  }
};

inline void validate(const SynthConfig& c) {
  const auto unit = [](double x) { return x >= 0.0 && x <= 1.0; };
  if (c.documents == 0 || c.topics == 0) throw ValidationError("synth needs at least one document and topic");
  if (c.events_min < 2 || c.events_max < c.events_min) throw ValidationError("synth events range must be 2 <= min <= max");
  if (!(c.link_density > 0.0 && c.link_density <= 1.0)) throw ValidationError("link density must be in (0,1]");
  if (!unit(c.informativeness) || !unit(c.annotation_noise_rate) || !unit(c.intra_sentence_fraction) ||
      !unit(c.narrative_order)) {
    throw ValidationError("informativeness, noise, intra-sentence fraction and narrative order must be in [0,1]");
  }
  for (const auto& [name, value] : c.slot_informativeness) {
    if (name != "tense" && name != "aspect" && name != "event_class" && name != "word") {
      throw ValidationError("no planted attribute '" + name + "'");
    }
    if (!unit(value)) throw ValidationError("informativeness of " + name + " must be in [0,1]");
  }
  if (c.timeline_slots == 0 || c.timeline_slots > kMaxTimelineSlots) {
    throw ValidationError("timeline slots must be in [1,7]");
  }
  if (c.words_per_cell == 0 || c.filler_words == 0) throw ValidationError("vocabulary sizes must be positive");
  if (c.topic_skew < 0.0) throw ValidationError("topic skew must be non-negative");
}

// One conditional table P(value | latent) for a topic. `latent` is "slot",
// "shape" or "cell" (slot * 4 + shape).
struct PlantedTable {
  std::string attribute;
  std::size_t topic = 0;
  std::string latent;
  std::vector<std::string> values;
  std::vector<std::vector<double>> probs;  // [latent][value]

  friend bool operator==(const PlantedTable&, const PlantedTable&) = default;
};

struct PlantedModel {
  std::size_t topics = 0;
  std::size_t timeline_slots = 0;
  std::vector<std::vector<double>> slot_prior;   // [topic][slot]
  std::vector<std::vector<double>> shape_prior;  // [topic][shape]
  std::vector<int> narrative;                     // [topic] +1 chronological, -1 reverse
  std::vector<PlantedTable> tables;

  const PlantedTable& table(std::string_view attribute, std::size_t topic) const {
    for (const auto& t : tables) {
      if (t.attribute == attribute && t.topic == topic) return t;
    }
    throw ValidationError("no planted table for " + std::string(attribute));
  }

  friend bool operator==(const PlantedModel&, const PlantedModel&) = default;
};

struct SynthOutput {
  Corpus corpus;
  PlantedModel planted;
  std::vector<std::vector<std::size_t>> cells;  // [doc][event] = slot * 4 + shape
  std::size_t first_topic = 0;
};

namespace detail {

struct Interval {
  int start;
  int end;
};

inline Interval cell_interval(std::size_t slot, std::size_t shape) {
  const int base = static_cast<int>(4 * slot);
  switch (shape) {
    case 0:
      return {base, base + 4};
    case 1:
      return {base, base + 2};
    case 2:
      return {base + 2, base + 4};
    default:
      return {base + 1, base + 3};
  }
}

inline std::vector<double> normalized(std::vector<double> w) {
  double total = 0.0;
  for (double x : w) total += x;
  for (double& x : w) x /= total;
  return w;
}

inline std::vector<double> skewed_prior(Rng& rng, std::size_t n, double skew) {
  std::vector<double> w(n);
  for (double& x : w) x = std::exp(skew * (2.0 * uniform_real(rng) - 1.0));
  return normalized(std::move(w));
}

// Row `latent` puts `p` on the encoded value(s) and spreads the rest evenly.
inline PlantedTable encoding_table(std::string attribute, std::size_t topic, std::string latent,
                                   std::vector<std::string> values, std::size_t latents, double p,
                                   const std::function<std::vector<std::size_t>(std::size_t)>& encode) {
  PlantedTable t{std::move(attribute), topic, std::move(latent), std::move(values), {}};
  const double floor = (1.0 - p) / static_cast<double>(t.values.size());
  for (std::size_t l = 0; l < latents; ++l) {
    std::vector<double> row(t.values.size(), floor);
    const auto hits = encode(l);
    for (std::size_t v : hits) row[v] += p / static_cast<double>(hits.size());
    t.probs.push_back(std::move(row));
  }
  return t;
}

template <typename E>
std::vector<std::string> attribute_values() {
  const auto& names = AttributeTraits<E>::kNames;
  return {names.begin(), names.end()};
}

inline std::string topic_word(std::size_t topic, std::size_t k) {
  return "t" + std::to_string(topic) + "v" + std::to_string(k);
}

inline std::string filler_word(std::size_t topic, std::size_t k) {
  return "t" + std::to_string(topic) + "f" + std::to_string(k);
}

inline std::size_t draw_value(Rng& rng, const std::vector<double>& row, std::size_t size, double noise) {
  std::size_t v = sample_weighted(rng, row);
  if (size > 1 && bernoulli(rng, noise)) {
    const std::size_t other = uniform_index(rng, size - 1);
    v = other >= v ? other + 1 : other;
  }
  return v;
}

inline std::optional<RelationLabel> raw14_for(AllenRelation r) {
  using A = AllenRelation;
  switch (r) {
    case A::kBefore:
      return make_label(Raw14::kBefore);
    case A::kAfter:
      return make_label(Raw14::kAfter);
    case A::kMeets:
      return make_label(Raw14::kIBefore);
    case A::kMetBy:
      return make_label(Raw14::kIAfter);
    case A::kStarts:
      return make_label(Raw14::kBegins);
    case A::kStartedBy:
      return make_label(Raw14::kBegunBy);
    case A::kFinishes:
      return make_label(Raw14::kEnds);
    case A::kFinishedBy:
      return make_label(Raw14::kEndedBy);
    case A::kEquals:
      return make_label(Raw14::kSimultaneous);
    case A::kDuring:
      return make_label(Raw14::kIsIncluded);
    case A::kContains:
      return make_label(Raw14::kIncludes);
    default:
      return std::nullopt;
  }
}

// Gold link between a (textually first) and b, or nothing when the scheme
// cannot name the relation in either direction.
inline std::optional<Tlink> gold_link(Scheme scheme, const EventInstance& a, Interval ia,
                                      const EventInstance& b, Interval ib) {
  const AllenRelation r = relation_between(ia.start, ia.end, ib.start, ib.end);
  if (scheme == Scheme::kRaw14) {
    if (const auto label = raw14_for(r)) return Tlink{a.event_id, b.event_id, *label};
    return std::nullopt;
  }
  if (const auto label = label_for_relation(scheme, r)) {
    return Tlink{a.event_id, b.event_id, RelationLabel{scheme, *label}};
  }
  if (const auto label = label_for_relation(scheme, converse(r))) {
    return Tlink{b.event_id, a.event_id, RelationLabel{scheme, *label}};
  }
  return std::nullopt;
}

inline PlantedModel plant(const SynthConfig& c) {
  PlantedModel m;
  m.topics = c.topics;
  m.timeline_slots = c.timeline_slots;
  const std::size_t slots = c.timeline_slots;
  const std::size_t cells = slots * kShapeCount;
  for (std::size_t t = 0; t < c.topics; ++t) {
    Rng rng = make_rng(c.seed, 1'000'000 + t);
    m.slot_prior.push_back(skewed_prior(rng, slots, c.topic_skew));
    m.shape_prior.push_back(skewed_prior(rng, kShapeCount, c.topic_skew));
    m.narrative.push_back(bernoulli(rng, 0.5) ? 1 : -1);
    // Tense tells which third of the timeline the slot lies in.
    m.tables.push_back(encoding_table("tense", t, "slot", attribute_values<Tense>(), slots,
                                      c.informativeness_of("tense"), [&](std::size_t s) {
                                        return std::vector<std::size_t>{1 + (3 * s) / slots};
                                      }));
    m.tables.push_back(encoding_table("aspect", t, "shape", attribute_values<Aspect>(), kShapeCount,
                                      c.informativeness_of("aspect"),
                                      [](std::size_t shape) { return std::vector<std::size_t>{shape}; }));
    m.tables.push_back(encoding_table("event_class", t, "slot", attribute_values<EventClass>(), slots,
                                      c.informativeness_of("event_class"),
                                      [](std::size_t s) { return std::vector<std::size_t>{s}; }));
    std::vector<std::string> words;
    for (std::size_t k = 0; k < cells * c.words_per_cell; ++k) words.push_back(topic_word(c.first_topic + t, k));
    m.tables.push_back(encoding_table("word", t, "cell", words, cells, c.informativeness_of("word"),
                                      [&](std::size_t cell) {
                                        std::vector<std::size_t> out;
                                        for (std::size_t k = 0; k < c.words_per_cell; ++k) {
                                          out.push_back(cell * c.words_per_cell + k);
                                        }
                                        return out;
                                      }));
  }
  return m;
}

inline Document generate_document(const SynthConfig& c, const PlantedModel& m, std::size_t index,
                                  std::vector<std::size_t>& cells) {
  Rng rng = make_rng(c.seed, index);
  const std::size_t topic = uniform_index(rng, c.topics);
  const std::size_t n = c.events_min + uniform_index(rng, c.events_max - c.events_min + 1);

  Document doc;
  doc.doc_id = c.doc_prefix + std::to_string(index);
  doc.topic = "topic" + std::to_string(c.first_topic + topic);

  const auto& tense = m.table("tense", topic);
  const auto& aspect = m.table("aspect", topic);
  const auto& klass = m.table("event_class", topic);
  const auto& word = m.table("word", topic);

  std::vector<std::size_t> slots(n);
  std::vector<std::size_t> shapes(n);
  for (std::size_t i = 0; i < n; ++i) {
    slots[i] = sample_weighted(rng, m.slot_prior[topic]);
    shapes[i] = sample_weighted(rng, m.shape_prior[topic]);
  }
  if (c.narrative_order > 0.0 && bernoulli(rng, c.narrative_order)) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    const int dir = m.narrative[topic];
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return dir * cell_interval(slots[a], shapes[a]).start < dir * cell_interval(slots[b], shapes[b]).start;
    });
    std::vector<std::size_t> s2(n), h2(n);
    for (std::size_t i = 0; i < n; ++i) {
      s2[i] = slots[order[i]];
      h2[i] = shapes[order[i]];
    }
    slots = std::move(s2);
    shapes = std::move(h2);
  }

  std::vector<Interval> intervals;
  std::vector<std::size_t> sentence_of(n);
  std::size_t sentence = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0 && !bernoulli(rng, c.intra_sentence_fraction)) ++sentence;
    sentence_of[i] = sentence;
  }
  doc.sentences.resize(sentence + 1);

  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t slot = slots[i];
    const std::size_t shape = shapes[i];
    intervals.push_back(cell_interval(slot, shape));
    cells.push_back(slot * kShapeCount + shape);
    const double noise = c.annotation_noise_rate;
    EventInstance e;
    e.event_id = "e" + std::to_string(i + 1);
    e.tense = static_cast<Tense>(draw_value(rng, tense.probs[slot], tense.values.size(), noise));
    e.aspect = static_cast<Aspect>(draw_value(rng, aspect.probs[shape], aspect.values.size(), noise));
    e.event_class =
        static_cast<EventClass>(draw_value(rng, klass.probs[slot], klass.values.size(), noise));
    e.word = word.values[draw_value(rng, word.probs[slot * kShapeCount + shape], word.values.size(), noise)];
    e.lemma = e.word;
    if (bernoulli(rng, 0.1)) e.modality = static_cast<Modality>(1 + uniform_index(rng, 6));
    if (bernoulli(rng, 0.05)) e.polarity = Polarity::kNegative;

    auto& tokens = doc.sentences[sentence_of[i]];
    const std::size_t filler = 1 + uniform_index(rng, 4);
    for (std::size_t k = 0; k < filler; ++k) {
      tokens.push_back(bernoulli(rng, 0.7) ? filler_word(c.first_topic + topic, uniform_index(rng, c.filler_words))
                                           : "g" + std::to_string(uniform_index(rng, 60)));
    }
    e.sentence_index = sentence_of[i];
    e.token_span = {tokens.size(), tokens.size() + 1};
    tokens.push_back(e.word);
    doc.events.push_back(std::move(e));
  }
  for (auto& tokens : doc.sentences) tokens.push_back(".");

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!bernoulli(rng, c.link_density)) continue;
      if (auto link = gold_link(c.scheme, doc.events[i], intervals[i], doc.events[j], intervals[j])) {
        doc.tlinks.push_back(std::move(*link));
      }
    }
  }
  return doc;
}

}  // namespace detail

inline SynthOutput generate(const SynthConfig& config) {
  validate(config);
  SynthOutput out;
  out.planted = detail::plant(config);
  out.first_topic = config.first_topic;
  for (std::size_t d = 0; d < config.documents; ++d) {
    out.cells.emplace_back();
    out.corpus.push_back(detail::generate_document(config, out.planted, d, out.cells.back()));
  }
  return out;
}

// Plain-text dump of the planted tables:
//   tlink-planted 1
//   topics T slots S
//   prior <topic> slot|shape p...
//   narrative <topic> 1|-1
//   table <attribute> <topic> <latent> <value...>
//   row <probabilities...>
inline void describe_planted(std::ostream& out, const PlantedModel& m) {
  out << "tlink-planted 1\n";
  out << "topics " << m.topics << " slots " << m.timeline_slots << "\n";
  const auto row = [&](const std::vector<double>& p) {
    for (double x : p) out << ' ' << format_double(x);
    out << '\n';
  };
  for (std::size_t t = 0; t < m.topics; ++t) {
    out << "prior " << t << " slot";
    row(m.slot_prior[t]);
    out << "prior " << t << " shape";
    row(m.shape_prior[t]);
    out << "narrative " << t << ' ' << m.narrative[t] << '\n';
  }
  for (const auto& t : m.tables) {
    out << "table " << t.attribute << ' ' << t.topic << ' ' << t.latent;
    for (const auto& v : t.values) out << ' ' << v;
    out << '\n';
    for (const auto& p : t.probs) {
      out << "row";
      row(p);
    }
  }
}

inline std::string describe_planted(const PlantedModel& m) {
  std::ostringstream out;
  describe_planted(out, m);
  return out.str();
}

inline PlantedModel parse_planted(std::istream& in) {
  PlantedModel m;
  std::string line;
  std::size_t number = 0;
  const auto fail = [&](const std::string& what) -> ParseError { return ParseError(what, number); };
  const auto numbers = [&](std::istringstream& ss) {
    std::vector<double> out;
    std::string tok;
    while (ss >> tok) {
      double x;
      if (!parse_double(tok, x)) throw fail("bad number '" + tok + "'");
      out.push_back(x);
    }
    return out;
  };
  bool header = false;
  while (std::getline(in, line)) {
    ++number;
    std::istringstream ss(line);
    std::string head;
    if (!(ss >> head)) continue;
    if (!header) {
      if (line != "tlink-planted 1") throw fail("not a planted model dump");
      header = true;
    } else if (head == "topics") {
      std::string word;
      if (!(ss >> m.topics >> word >> m.timeline_slots) || word != "slots") throw fail("bad topics line");
      m.slot_prior.resize(m.topics);
      m.shape_prior.resize(m.topics);
      m.narrative.assign(m.topics, 1);
    } else if (head == "prior") {
      std::size_t t;
      std::string kind;
      if (!(ss >> t >> kind) || t >= m.topics) throw fail("bad prior line");
      (kind == "slot" ? m.slot_prior : m.shape_prior)[t] = numbers(ss);
    } else if (head == "narrative") {
      std::size_t t;
      int dir;
      if (!(ss >> t >> dir) || t >= m.topics || (dir != 1 && dir != -1)) throw fail("bad narrative line");
      m.narrative[t] = dir;
    } else if (head == "table") {
      PlantedTable t;
      if (!(ss >> t.attribute >> t.topic >> t.latent)) throw fail("bad table line");
      std::string v;
      while (ss >> v) t.values.push_back(v);
      m.tables.push_back(std::move(t));
    } else if (head == "row") {
      if (m.tables.empty()) throw fail("row before any table");
      auto p = numbers(ss);
      if (p.size() != m.tables.back().values.size()) throw fail("row width differs from table");
      m.tables.back().probs.push_back(std::move(p));
    } else {
      throw fail("unknown record '" + head + "'");
    }
  }
  if (!header) throw ParseError("empty planted model dump", 0);
  return m;
}

// Largest total-variation distance between planted rows and the attribute
// frequencies observed in the generated corpus (empty rows are skipped).
inline double planted_attribute_tv(const SynthOutput& output, std::string_view attribute) {
  const auto& m = output.planted;
  double worst = 0.0;
  for (std::size_t topic = 0; topic < m.topics; ++topic) {
    const auto& table = m.table(attribute, topic);
    std::vector<std::vector<double>> counts(table.probs.size(), std::vector<double>(table.values.size(), 0.0));
    for (std::size_t d = 0; d < output.corpus.size(); ++d) {
      const Document& doc = output.corpus[d];
      if (doc.topic != "topic" + std::to_string(output.first_topic + topic)) continue;
      for (std::size_t i = 0; i < doc.events.size(); ++i) {
        const EventInstance& e = doc.events[i];
        const std::size_t cell = output.cells[d][i];
        std::string value;
        std::size_t latent = cell / kShapeCount;
        if (attribute == "tense") value = to_string(e.tense);
        if (attribute == "event_class") value = to_string(e.event_class);
        if (attribute == "aspect") {
          value = to_string(e.aspect);
          latent = cell % kShapeCount;
        }
        if (attribute == "word") {
          value = e.word;
          latent = cell;
        }
        const auto it = std::find(table.values.begin(), table.values.end(), value);
        counts[latent][static_cast<std::size_t>(it - table.values.begin())] += 1.0;
      }
    }
    for (std::size_t l = 0; l < counts.size(); ++l) {
      double total = 0.0;
      for (double x : counts[l]) total += x;
      if (total == 0.0) continue;
      double tv = 0.0;
      for (std::size_t v = 0; v < counts[l].size(); ++v) tv += std::abs(counts[l][v] / total - table.probs[l][v]);
      worst = std::max(worst, tv / 2.0);
    }
  }
  return worst;
}

}  // namespace tlink
