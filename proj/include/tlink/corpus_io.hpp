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

// Native corpus file: UTF-8, one JSON document record per line.
//
//   {"doc_id": "...", "topic": "...", "sentences": [["tok", ...], ...],
//    "events": [{"event_id": ..., "sentence_index": 0, "token_span": [b, e],
//                "word": ..., "pos": "verb", "tense": "past", ...}, ...],
//    "dominance_pairs": [["e1", "e2"], ...],
//    "tlinks": [{"source": "e1", "target": "e2", "scheme": "raw14",
//                "value": "BEFORE"}, ...]}
//
// Optional event fields (lemma, governing_verb, governing_verb_pos, auxiliary,
// synset_id) and the document topic are omitted when absent.

#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "tlink/corpus.hpp"
#include "tlink/error.hpp"

namespace tlink {

namespace detail {

using Json = nlohmann::ordered_json;

inline std::optional<std::string> optional_string(const Json& obj,
                                                  const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  return it->get<std::string>();
}

inline EventInstance event_from_json(const Json& j) {
  EventInstance e;
  e.event_id = j.at("event_id").get<std::string>();
  e.sentence_index = j.at("sentence_index").get<std::size_t>();
  const auto& span = j.at("token_span");
  if (!span.is_array() || span.size() != 2) {
    throw ParseError("event '" + e.event_id +
                     "': token_span must be a two-element array");
  }
  e.token_span = {span[0].get<std::size_t>(), span[1].get<std::size_t>()};
  e.word = j.at("word").get<std::string>();
  e.lemma = optional_string(j, "lemma");
  e.pos = parse_attribute<PartOfSpeech>(j.at("pos").get<std::string>());
  e.tense = parse_attribute<Tense>(j.value("tense", "none"));
  e.aspect = parse_attribute<Aspect>(j.value("aspect", "none"));
  e.modality = parse_attribute<Modality>(j.value("modality", "none"));
  e.polarity = parse_attribute<Polarity>(j.at("polarity").get<std::string>());
  e.event_class =
      parse_attribute<EventClass>(j.at("event_class").get<std::string>());
  e.in_prep_phrase = j.value("in_prep_phrase", false);
  e.governing_verb = optional_string(j, "governing_verb");
  e.governing_verb_pos = optional_string(j, "governing_verb_pos");
  e.auxiliary = optional_string(j, "auxiliary");
  e.synset_id = optional_string(j, "synset_id");
  if (const auto it = j.find("entity_args"); it != j.end() && !it->is_null()) {
    e.entity_args = it->get<std::vector<std::string>>();
  }
  return e;
}

inline Json event_to_json(const EventInstance& e) {
  Json j;
  j["event_id"] = e.event_id;
  j["sentence_index"] = e.sentence_index;
  j["token_span"] = {e.token_span.begin, e.token_span.end};
  j["word"] = e.word;
  if (e.lemma) j["lemma"] = *e.lemma;
  j["pos"] = to_string(e.pos);
  j["tense"] = to_string(e.tense);
  j["aspect"] = to_string(e.aspect);
  j["modality"] = to_string(e.modality);
  j["polarity"] = to_string(e.polarity);
  j["event_class"] = to_string(e.event_class);
  j["in_prep_phrase"] = e.in_prep_phrase;
  if (e.governing_verb) j["governing_verb"] = *e.governing_verb;
  if (e.governing_verb_pos) j["governing_verb_pos"] = *e.governing_verb_pos;
  if (e.auxiliary) j["auxiliary"] = *e.auxiliary;
  if (e.synset_id) j["synset_id"] = *e.synset_id;
  j["entity_args"] = e.entity_args;
  return j;
}

}  // namespace detail

inline Document document_from_json_line(std::string_view line,
                                        std::size_t line_number = 0) {
  detail::Json j;
  try {
    j = detail::Json::parse(line);
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError(std::string("malformed record: ") + ex.what(),
                     line_number);
  }
  Document doc;
  try {
    if (!j.is_object()) throw ParseError("record is not an object");
    doc.doc_id = j.at("doc_id").get<std::string>();
    doc.topic = detail::optional_string(j, "topic");
    doc.sentences =
        j.at("sentences").get<std::vector<std::vector<std::string>>>();
    for (const auto& ej : j.at("events")) {
      doc.events.push_back(detail::event_from_json(ej));
    }
    if (const auto it = j.find("dominance_pairs"); it != j.end()) {
      for (const auto& p : *it) {
        if (!p.is_array() || p.size() != 2) {
          throw ParseError("dominance pair must be a two-element array");
        }
        doc.dominance_pairs.emplace_back(p[0].get<std::string>(),
                                         p[1].get<std::string>());
      }
    }
    if (const auto it = j.find("tlinks"); it != j.end()) {
      for (const auto& t : *it) {
        const Scheme scheme = parse_scheme(t.at("scheme").get<std::string>());
        doc.tlinks.push_back(
            {t.at("source").get<std::string>(),
             t.at("target").get<std::string>(),
             {scheme, parse_label(scheme, t.at("value").get<std::string>())}});
      }
    }
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError(std::string("malformed record: ") + ex.what(),
                     line_number);
  } catch (const ParseError& ex) {
    if (ex.line() != 0 || line_number == 0) throw;
    throw ParseError(ex.what(), line_number);
  }
  try {
    validate_document(doc);
  } catch (const ValidationError& ex) {
    if (line_number == 0) throw;
    throw ValidationError("line " + std::to_string(line_number) + ": " +
                          ex.what());
  }
  return doc;
}

inline std::string document_to_json_line(const Document& doc) {
  detail::Json j;
  j["doc_id"] = doc.doc_id;
  if (doc.topic) j["topic"] = *doc.topic;
  j["sentences"] = doc.sentences;
  j["events"] = detail::Json::array();
  for (const auto& e : doc.events) j["events"].push_back(detail::event_to_json(e));
  j["dominance_pairs"] = detail::Json::array();
  for (const auto& [a, b] : doc.dominance_pairs) {
    j["dominance_pairs"].push_back({a, b});
  }
  j["tlinks"] = detail::Json::array();
  for (const auto& t : doc.tlinks) {
    j["tlinks"].push_back({{"source", t.source},
                           {"target", t.target},
                           {"scheme", scheme_name(t.label.scheme)},
                           {"value", t.label.name()}});
  }
  return j.dump();
}

// Blank lines are skipped. Throws ParseError / ValidationError carrying the
// 1-based line number of the offending record.
inline Corpus parse_corpus(std::istream& in) {
  Corpus corpus;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (trim(line).empty()) continue;
    corpus.push_back(document_from_json_line(line, line_number));
  }
  validate_corpus(corpus);
  return corpus;
}

inline Corpus parse_corpus(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_corpus(in);
}

inline void write_corpus(std::ostream& out, const Corpus& corpus) {
  for (const auto& doc : corpus) out << document_to_json_line(doc) << '\n';
}

inline std::string serialize_corpus(const Corpus& corpus) {
  std::ostringstream out;
  write_corpus(out, corpus);
  return out.str();
}

}  // namespace tlink
