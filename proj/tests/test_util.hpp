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

// Builders shared by the unit tests.

#include <string>
#include <utility>
#include <vector>

#include "tlink/corpus.hpp"

namespace tlink::testing {

inline EventInstance make_event(std::string id, std::size_t sentence,
                                std::size_t token, std::string word,
                                Tense tense = Tense::kPast,
                                Aspect aspect = Aspect::kNone) {
  EventInstance e;
  e.event_id = std::move(id);
  e.sentence_index = sentence;
  e.token_span = {token, token + 1};
  e.word = std::move(word);
  e.tense = tense;
  e.aspect = aspect;
  return e;
}

// A document whose sentences are long enough for every event placed in it.
inline Document make_document(std::string id, std::vector<EventInstance> events,
                              std::vector<Tlink> tlinks = {}) {
  Document doc;
  doc.doc_id = std::move(id);
  std::size_t sentences = 0;
  for (const auto& e : events) sentences = std::max(sentences, e.sentence_index + 1);
  doc.sentences.resize(sentences);
  for (auto& s : doc.sentences) s.assign(12, "w");
  for (const auto& e : events) {
    doc.sentences[e.sentence_index][e.token_span.begin] = e.word;
  }
  doc.events = std::move(events);
  doc.tlinks = std::move(tlinks);
  return doc;
}

inline Tlink link(std::string a, std::string b, Coarse3 label) {
  return {std::move(a), std::move(b), make_label(label)};
}

}  // namespace tlink::testing
