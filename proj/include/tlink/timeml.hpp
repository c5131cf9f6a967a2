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

// Importer for the event-event subset of TimeML markup: EVENT, MAKEINSTANCE
// and TLINK. Other tags are walked through (their text still contributes
// tokens) but must be balanced. Links that touch a time expression are dropped
// and counted.

#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "tlink/corpus.hpp"
#include "tlink/error.hpp"
#include "tlink/labels.hpp"
#include "tlink/text.hpp"

namespace tlink {

struct TimemlImport {
  Document document;
  std::size_t skipped_time_links = 0;
  std::size_t dropped_duplicate_links = 0;
};

namespace detail {

struct MarkupTag {
  std::string name;
  std::map<std::string, std::string> attributes;
  bool closing = false;
  bool self_closing = false;
  std::size_t line = 0;
};

class MarkupScanner {
 public:
  explicit MarkupScanner(std::string_view text) : text_(text) {}

  bool at_end() const { return pos_ >= text_.size(); }

  // Text up to the next '<' (or end).
  std::string_view next_text() {
    const std::size_t start = pos_;
    const std::size_t lt = text_.find('<', pos_);
    pos_ = lt == std::string_view::npos ? text_.size() : lt;
    const auto chunk = text_.substr(start, pos_ - start);
    for (char c : chunk) {
      if (c == '\n') ++line_;
    }
    return chunk;
  }

  // Called with pos_ on '<'. Returns nullopt for comments, declarations and
  // processing instructions.
  std::optional<MarkupTag> next_tag() {
    const std::size_t tag_line = line_;
    if (text_.compare(pos_, 4, "<!--") == 0) {
      skip_past("-->", tag_line);
      return std::nullopt;
    }
    if (text_.compare(pos_, 2, "<?") == 0 || text_.compare(pos_, 2, "<!") == 0) {
      skip_past(">", tag_line);
      return std::nullopt;
    }
    const std::size_t gt = find_tag_end();
    if (gt == std::string_view::npos) {
      throw ParseError("unterminated tag", tag_line);
    }
    std::string_view body = text_.substr(pos_ + 1, gt - pos_ - 1);
    for (char c : text_.substr(pos_, gt - pos_)) {
      if (c == '\n') ++line_;
    }
    pos_ = gt + 1;

    MarkupTag tag;
    tag.line = tag_line;
    body = trim(body);
    if (!body.empty() && body.front() == '/') {
      tag.closing = true;
      body.remove_prefix(1);
    }
    if (!body.empty() && body.back() == '/') {
      tag.self_closing = true;
      body.remove_suffix(1);
    }
    std::size_t i = 0;
    while (i < body.size() && !std::isspace(static_cast<unsigned char>(body[i]))) ++i;
    tag.name = std::string(body.substr(0, i));
    if (tag.name.empty()) throw ParseError("tag without a name", tag_line);
    parse_attributes(body.substr(i), tag);
    return tag;
  }

  std::size_t line() const { return line_; }

 private:
  std::size_t find_tag_end() const {
    char quote = 0;
    for (std::size_t i = pos_ + 1; i < text_.size(); ++i) {
      const char c = text_[i];
      if (quote) {
        if (c == quote) quote = 0;
      } else if (c == '"' || c == '\'') {
        quote = c;
      } else if (c == '>') {
        return i;
      } else if (c == '<') {
        return std::string_view::npos;
      }
    }
    return std::string_view::npos;
  }

  void skip_past(std::string_view marker, std::size_t tag_line) {
    const std::size_t end = text_.find(marker, pos_);
    if (end == std::string_view::npos) {
      throw ParseError("unterminated markup declaration", tag_line);
    }
    for (std::size_t i = pos_; i < end; ++i) {
      if (text_[i] == '\n') ++line_;
    }
    pos_ = end + marker.size();
  }

  static void parse_attributes(std::string_view rest, MarkupTag& tag) {
    std::size_t i = 0;
    const auto skip_space = [&] {
      while (i < rest.size() && std::isspace(static_cast<unsigned char>(rest[i]))) ++i;
    };
    while (true) {
      skip_space();
      if (i >= rest.size()) return;
      const std::size_t name_start = i;
      while (i < rest.size() && rest[i] != '=' &&
             !std::isspace(static_cast<unsigned char>(rest[i]))) {
        ++i;
      }
      const std::string name(rest.substr(name_start, i - name_start));
      skip_space();
      if (i >= rest.size() || rest[i] != '=') {
        throw ParseError("attribute '" + name + "' of <" + tag.name +
                             "> has no value",
                         tag.line);
      }
      ++i;
      skip_space();
      if (i >= rest.size() || (rest[i] != '"' && rest[i] != '\'')) {
        throw ParseError("attribute '" + name + "' of <" + tag.name +
                             "> is not quoted",
                         tag.line);
      }
      const char quote = rest[i++];
      const std::size_t value_start = i;
      while (i < rest.size() && rest[i] != quote) ++i;
      if (i >= rest.size()) {
        throw ParseError("unterminated attribute value", tag.line);
      }
      tag.attributes[name] = std::string(rest.substr(value_start, i - value_start));
      ++i;
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

inline std::string decode_entities(std::string_view text) {
  static const std::pair<std::string_view, char> kEntities[] = {
      {"&amp;", '&'}, {"&lt;", '<'}, {"&gt;", '>'}, {"&quot;", '"'}, {"&apos;", '\''}};
  std::string out;
  for (std::size_t i = 0; i < text.size();) {
    bool matched = false;
    if (text[i] == '&') {
      for (const auto& [entity, ch] : kEntities) {
        if (text.compare(i, entity.size(), entity) == 0) {
          out.push_back(ch);
          i += entity.size();
          matched = true;
          break;
        }
      }
    }
    if (!matched) out.push_back(text[i++]);
  }
  return out;
}

// Whitespace tokenization with leading/trailing punctuation split off.
inline std::vector<std::string> tokenize(std::string_view text) {
  static constexpr std::string_view kLeading = "\"'([{`";
  static constexpr std::string_view kTrailing = ".,;:!?\"')]}`";
  std::vector<std::string> tokens;
  const std::string decoded = decode_entities(text);
  std::vector<std::string> words;
  std::string current;
  for (char c : decoded) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!current.empty()) words.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  for (const auto& word : words) {
    std::string_view w = word;
    while (w.size() > 1 && kLeading.find(w.front()) != std::string_view::npos) {
      tokens.emplace_back(1, w.front());
      w.remove_prefix(1);
    }
    std::vector<std::string> tail;
    while (w.size() > 1 && kTrailing.find(w.back()) != std::string_view::npos) {
      tail.emplace_back(1, w.back());
      w.remove_suffix(1);
    }
    tokens.emplace_back(w);
    tokens.insert(tokens.end(), tail.rbegin(), tail.rend());
  }
  return tokens;
}

inline bool ends_sentence(std::string_view token) {
  return token == "." || token == "!" || token == "?";
}

struct PendingEvent {
  std::string eid;
  std::string event_class;
  std::size_t sentence = 0;
  std::size_t begin = 0;
  std::size_t end = 0;
  std::string word;
};

}  // namespace detail

// `doc_id` overrides the document's DOCID element; one of the two must exist.
inline TimemlImport import_timeml_subset(std::string_view markup,
                                         std::string doc_id = {}) {
  detail::MarkupScanner scanner(markup);
  const bool has_text_element = markup.find("<TEXT") != std::string_view::npos;
  bool in_text = !has_text_element;
  bool in_docid = false;
  std::string docid_text;

  std::vector<std::vector<std::string>> sentences(1);
  std::vector<detail::MarkupTag> stack;
  std::vector<detail::PendingEvent> events;
  std::optional<detail::PendingEvent> open_event;
  std::vector<detail::MarkupTag> instances;
  std::vector<detail::MarkupTag> links;

  const auto close_sentence = [&] {
    if (!sentences.back().empty()) sentences.emplace_back();
  };
  const auto add_tokens = [&](std::string_view text) {
    for (auto& token : detail::tokenize(text)) {
      const bool boundary = detail::ends_sentence(token);
      sentences.back().push_back(std::move(token));
      if (boundary && !open_event) close_sentence();
    }
  };

  while (!scanner.at_end()) {
    const auto text = scanner.next_text();
    if (in_docid) docid_text += std::string(text);
    if (in_text) add_tokens(text);
    if (scanner.at_end()) break;
    auto tag = scanner.next_tag();
    if (!tag) continue;
    if (tag->closing) {
      if (stack.empty() || stack.back().name != tag->name) {
        throw ParseError("unmatched closing tag </" + tag->name + ">",
                         tag->line);
      }
      stack.pop_back();
      if (tag->name == "EVENT") {
        open_event->end = sentences.back().size();
        for (std::size_t i = open_event->begin; i < open_event->end; ++i) {
          if (!open_event->word.empty()) open_event->word += ' ';
          open_event->word += sentences.back()[i];
        }
        if (open_event->end == open_event->begin) {
          throw ParseError("EVENT " + open_event->eid + " has no text",
                           tag->line);
        }
        events.push_back(*open_event);
        open_event.reset();
        if (!sentences.back().empty() &&
            detail::ends_sentence(sentences.back().back())) {
          close_sentence();
        }
      } else if (tag->name == "TEXT") {
        in_text = false;
      } else if (tag->name == "DOCID") {
        in_docid = false;
      } else if (tag->name == "s") {
        close_sentence();
      }
      continue;
    }
    if (tag->name == "MAKEINSTANCE") {
      instances.push_back(*tag);
    } else if (tag->name == "TLINK") {
      links.push_back(*tag);
    } else if (tag->name == "EVENT") {
      if (open_event) {
        throw ParseError("nested EVENT tags", tag->line);
      }
      const auto eid = tag->attributes.find("eid");
      if (eid == tag->attributes.end()) {
        throw ValidationError("EVENT without eid (line " +
                              std::to_string(tag->line) + ")");
      }
      detail::PendingEvent pending;
      pending.eid = eid->second;
      const auto cls = tag->attributes.find("class");
      pending.event_class = cls == tag->attributes.end() ? "" : cls->second;
      pending.sentence = sentences.size() - 1;
      pending.begin = sentences.back().size();
      open_event = pending;
    } else if (tag->name == "TEXT") {
      in_text = true;
    } else if (tag->name == "DOCID") {
      in_docid = true;
    }
    if (!tag->self_closing) stack.push_back(*tag);
  }
  if (!stack.empty()) {
    throw ParseError("unclosed tag <" + stack.back().name + ">",
                     stack.back().line);
  }
  if (sentences.back().empty()) sentences.pop_back();

  TimemlImport result;
  Document& doc = result.document;
  doc.doc_id = doc_id.empty() ? std::string(trim(docid_text)) : doc_id;
  if (doc.doc_id.empty()) {
    throw ValidationError("TimeML document has no DOCID and no id was given");
  }
  doc.sentences = std::move(sentences);

  const auto attr = [](const detail::MarkupTag& tag, const char* name)
      -> std::optional<std::string> {
    const auto it = tag.attributes.find(name);
    if (it == tag.attributes.end()) return std::nullopt;
    return it->second;
  };

  for (const auto& inst : instances) {
    const auto eiid = attr(inst, "eiid");
    const auto event_ref = attr(inst, "eventID");
    if (!eiid || !event_ref) {
      throw ValidationError("MAKEINSTANCE needs eiid and eventID (line " +
                            std::to_string(inst.line) + ")");
    }
    const detail::PendingEvent* source = nullptr;
    for (const auto& e : events) {
      if (e.eid == *event_ref) source = &e;
    }
    if (!source) {
      throw ValidationError("MAKEINSTANCE " + *eiid +
                            " refers to unknown EVENT '" + *event_ref + "'");
    }
    EventInstance ev;
    ev.event_id = *eiid;
    ev.sentence_index = source->sentence;
    ev.token_span = {source->begin, source->end};
    ev.word = source->word;
    if (source->event_class.empty()) {
      throw ValidationError("EVENT " + source->eid + " has no class");
    }
    ev.event_class = parse_attribute<EventClass>(source->event_class);
    ev.tense = parse_attribute<Tense>(attr(inst, "tense").value_or("NONE"));
    ev.aspect = parse_attribute<Aspect>(attr(inst, "aspect").value_or("NONE"));
    ev.polarity =
        parse_attribute<Polarity>(attr(inst, "polarity").value_or("POS"));
    ev.modality =
        parse_attribute<Modality>(attr(inst, "modality").value_or("NONE"));
    const auto pos = attr(inst, "pos");
    if (!pos) {
      throw ValidationError("MAKEINSTANCE " + *eiid + " has no pos");
    }
    ev.pos = parse_attribute<PartOfSpeech>(*pos);
    doc.events.push_back(std::move(ev));
  }

  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& link : links) {
    const auto source = attr(link, "eventInstanceID");
    const auto target = attr(link, "relatedToEventInstance");
    if (!source || !target || attr(link, "timeID") ||
        attr(link, "relatedToTime")) {
      ++result.skipped_time_links;
      continue;
    }
    const auto rel = attr(link, "relType");
    if (!rel) {
      throw ValidationError("TLINK without relType (line " +
                            std::to_string(link.line) + ")");
    }
    const LabelId value = parse_label(Scheme::kRaw14, *rel);
    if (!seen.emplace(*source, *target).second) {
      ++result.dropped_duplicate_links;
      continue;
    }
    doc.tlinks.push_back({*source, *target, {Scheme::kRaw14, value}});
  }
  validate_document(doc);
  return result;
}

}  // namespace tlink
