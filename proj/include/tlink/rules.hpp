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

// Initialization rules for the EM learner.
//
// Attribute and signal rules use a block format:
//
//   if conjBetweenEvents = YES &&
//       isTheSameSentence = TRUE &&
//       event1.class = (OCCURRENCE|PERCEPTION) &&
//       event2.tense = PAST
//   Then
//   relation(event1, event2) = AFTER
//
// Lexical rules are "lemma1<TAB>lemma2<TAB>strength" lines, or lines of the
// form "announce [happens-before] postpone :: 12.84"; each states that the
// first verb happens before the second.

#include <algorithm>
#include <cmath>
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

struct RuleCondition {
  std::string key;                  // e.g. "isTheSameSentence", "event1.tense"
  std::vector<std::string> values;  // normalized alternatives
};

struct AttributeRule {
  std::vector<RuleCondition> conditions;
  LabelId label = 0;
};

struct LexicalRule {
  std::string first;  // happens before `second`
  std::string second;
  double strength = 0.0;
};

struct RuleBase {
  Scheme scheme = Scheme::kCoarse3;
  std::vector<AttributeRule> attribute_rules;
  std::vector<LexicalRule> lexical_rules;
  std::vector<AttributeRule> signal_rules;
};

// Coordinating conjunctions recognized by conjBetweenEvents.
inline const std::set<std::string, std::less<>>& conjunction_tokens() {
  static const std::set<std::string, std::less<>> tokens = {"and", "but", "nor", "or", "so", "yet"};
  return tokens;
}

namespace detail {

template <typename E>
std::optional<std::string> strict_attribute(std::string_view text) {
  using Traits = AttributeTraits<E>;
  const std::string lower = to_lower(trim(text));
  for (const auto& name : Traits::kNames) {
    if (name == lower) return std::string(name);
  }
  for (const auto& [alias, value] : Traits::kAliases) {
    if (alias == lower) return std::string(to_string(value));
  }
  return std::nullopt;
}

inline std::optional<std::string> normalize_flag(std::string_view v) {
  if (iequals(v, "yes") || iequals(v, "true")) return "true";
  if (iequals(v, "no") || iequals(v, "false")) return "false";
  return std::nullopt;
}

// Normalized condition value, or nothing when `key` does not accept `value`.
inline std::optional<std::string> normalize_value(std::string_view key, std::string_view value) {
  if (key == "conjBetweenEvents" || key == "isTheSameSentence" || key == "signalBetweenTwoEvents") {
    return normalize_flag(value);
  }
  if (key == "signal") return to_lower(value);
  if (key.size() < 8 || (key.substr(0, 7) != "event1." && key.substr(0, 7) != "event2.")) return std::nullopt;
  const std::string_view attr = key.substr(7);
  if (attr == "class") return strict_attribute<EventClass>(value);
  if (attr == "tense") return strict_attribute<Tense>(value);
  if (attr == "aspect") return strict_attribute<Aspect>(value);
  if (attr == "pos") return strict_attribute<PartOfSpeech>(value);
  if (attr == "modality") return strict_attribute<Modality>(value);
  if (attr == "polarity") return strict_attribute<Polarity>(value);
  if (attr == "word" || attr == "lemma") return to_lower(value);
  return std::nullopt;
}

inline bool known_key(std::string_view key) {
  static const std::set<std::string, std::less<>> keys = {
      "conjBetweenEvents", "isTheSameSentence", "signal", "signalBetweenTwoEvents",
      "event1.class",      "event1.tense",      "event1.aspect", "event1.pos",
      "event1.modality",   "event1.polarity",   "event1.word",   "event1.lemma",
      "event2.class",      "event2.tense",      "event2.aspect", "event2.pos",
      "event2.modality",   "event2.polarity",   "event2.word",   "event2.lemma"};
  return keys.count(key) > 0;
}

inline std::size_t find_word(std::string_view text, std::string_view word, std::size_t from) {
  const auto is_word = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; };
  for (std::size_t pos = from; pos + word.size() <= text.size(); ++pos) {
    if (!iequals(text.substr(pos, word.size()), word)) continue;
    const bool left = pos == 0 || !is_word(text[pos - 1]);
    const bool right = pos + word.size() == text.size() || !is_word(text[pos + word.size()]);
    if (left && right) return pos;
  }
  return std::string_view::npos;
}

inline std::vector<std::string_view> split_on(std::string_view text, std::string_view sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t at = text.find(sep, start);
    if (at == std::string_view::npos) {
      parts.push_back(text.substr(start));
      return parts;
    }
    parts.push_back(text.substr(start, at - start));
    start = at + sep.size();
  }
}

inline std::size_t line_of(std::string_view text, std::size_t pos) {
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

}  // namespace detail

inline std::vector<AttributeRule> parse_attribute_rules(std::string_view input, Scheme scheme) {
  // Drop comment lines, keeping line breaks so line numbers stay right.
  std::string text;
  for (std::string_view line : split(input, '\n')) {
    if (trim(line).empty() || trim(line).front() != '#') text += line;
    text += '\n';
  }
  const std::string_view view(text);
  std::vector<AttributeRule> rules;
  std::size_t pos = 0;
  while (true) {
    while (pos < view.size() && std::isspace(static_cast<unsigned char>(view[pos]))) ++pos;
    if (pos >= view.size()) break;
    const std::size_t index = rules.size() + 1;
    const std::size_t line = detail::line_of(view, pos);
    const auto fail = [&](const std::string& msg) -> void {
      throw ParseError("rule " + std::to_string(index) + ": " + msg, line);
    };
    if (detail::find_word(view, "if", pos) != pos) fail("expected 'if'");
    // The 'Then' that introduces the relation (a signal may itself be "then").
    std::size_t then = detail::find_word(view, "then", pos + 2);
    while (then != std::string_view::npos &&
           trim(view.substr(then + 4)).substr(0, 8) != "relation") {
      then = detail::find_word(view, "then", then + 4);
    }
    if (then == std::string_view::npos) fail("missing 'Then relation(...)'");
    AttributeRule rule;
    for (std::string_view cond : detail::split_on(view.substr(pos + 2, then - pos - 2), "&&")) {
      cond = trim(cond);
      const std::size_t eq = cond.find('=');
      if (eq == std::string_view::npos) fail("condition without '='");
      const std::string key(trim(cond.substr(0, eq)));
      if (!detail::known_key(key)) fail("unknown condition '" + key + "'");
      std::string_view rhs = trim(cond.substr(eq + 1));
      if (rhs.size() >= 2 && rhs.front() == '(' && rhs.back() == ')') rhs = rhs.substr(1, rhs.size() - 2);
      RuleCondition c{key, {}};
      for (std::string_view alt : split(rhs, '|')) {
        auto v = detail::normalize_value(key, trim(alt));
        if (!v || v->empty()) fail("invalid value '" + std::string(trim(alt)) + "' for " + key);
        c.values.push_back(*v);
      }
      rule.conditions.push_back(std::move(c));
    }
    const bool has_signal = std::any_of(rule.conditions.begin(), rule.conditions.end(),
                                        [](const RuleCondition& c) { return c.key == "signal"; });
    const bool needs_signal = std::any_of(rule.conditions.begin(), rule.conditions.end(),
                                          [](const RuleCondition& c) { return c.key == "signalBetweenTwoEvents"; });
    if (needs_signal && !has_signal) fail("signalBetweenTwoEvents needs a signal condition");

    // relation(event1, event2) = LABEL
    pos = then + 4;
    std::size_t eol = view.find('=', pos);
    if (eol == std::string_view::npos) fail("missing relation");
    std::string head;
    for (char ch : view.substr(pos, eol - pos)) {
      if (!std::isspace(static_cast<unsigned char>(ch))) head += ch;
    }
    if (head != "relation(event1,event2)") fail("expected 'relation(event1, event2) = LABEL'");
    pos = eol + 1;
    while (pos < view.size() && (view[pos] == ' ' || view[pos] == '\t')) ++pos;
    std::size_t end = pos;
    while (end < view.size() && (std::isalnum(static_cast<unsigned char>(view[end])) || view[end] == '_' || view[end] == '-')) ++end;
    if (end == pos) fail("missing relation label");
    try {
      rule.label = parse_label(scheme, view.substr(pos, end - pos));
    } catch (const ParseError& e) {
      fail(e.what());
    }
    pos = end;
    rules.push_back(std::move(rule));
  }
  return rules;
}

inline std::vector<LexicalRule> parse_lexical_rules(std::string_view text) {
  std::vector<LexicalRule> rules;
  std::size_t line_no = 0;
  for (std::string_view line : split(text, '\n')) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto fail = [&](const std::string& msg) -> void {
      throw ParseError("lexical rule on line " + std::to_string(line_no) + ": " + msg, line_no);
    };
    LexicalRule rule;
    std::string_view strength;
    if (const auto open = line.find('['); open != std::string_view::npos) {
      const auto close = line.find(']', open);
      const auto colons = line.find("::", close == std::string_view::npos ? open : close);
      if (close == std::string_view::npos || colons == std::string_view::npos) fail("expected 'a [relation] b :: strength'");
      if (trim(line.substr(open + 1, close - open - 1)) != "happens-before") continue;
      rule.first = to_lower(trim(line.substr(0, open)));
      rule.second = to_lower(trim(line.substr(close + 1, colons - close - 1)));
      strength = trim(line.substr(colons + 2));
    } else {
      const auto parts = split(line, '\t');
      if (parts.size() != 3) fail("expected lemma1<TAB>lemma2<TAB>strength");
      rule.first = to_lower(trim(parts[0]));
      rule.second = to_lower(trim(parts[1]));
      strength = parts[2];
    }
    if (rule.first.empty() || rule.second.empty()) fail("empty lemma");
    if (!parse_double(strength, rule.strength) || !std::isfinite(rule.strength)) fail("strength must be a finite number");
    rules.push_back(std::move(rule));
  }
  return rules;
}

// Pair context used by the condition keys.
struct RuleContext {
  bool same_sentence = false;
  std::vector<std::string> between;  // lowercased tokens strictly between the events
  std::vector<std::string> span;     // lowercased tokens of the sentences covering both
};

inline RuleContext rule_context(const Document& doc, const EventInstance& a, const EventInstance& b) {
  RuleContext ctx;
  ctx.same_sentence = a.sentence_index == b.sentence_index;
  const EventInstance& first = occurs_before(a, b) ? a : b;
  const EventInstance& last = occurs_before(a, b) ? b : a;
  for (std::size_t s = first.sentence_index; s <= last.sentence_index && s < doc.sentences.size(); ++s) {
    const auto& tokens = doc.sentences[s];
    for (std::size_t t = 0; t < tokens.size(); ++t) {
      ctx.span.push_back(to_lower(tokens[t]));
      const bool after_first = s > first.sentence_index || t >= first.token_span.end;
      const bool before_last = s < last.sentence_index || t < last.token_span.begin;
      if (after_first && before_last) ctx.between.push_back(ctx.span.back());
    }
  }
  return ctx;
}

namespace detail {

inline std::string event_attribute(const EventInstance& e, std::string_view attr) {
  if (attr == "class") return std::string(to_string(e.event_class));
  if (attr == "tense") return std::string(to_string(e.tense));
  if (attr == "aspect") return std::string(to_string(e.aspect));
  if (attr == "pos") return std::string(to_string(e.pos));
  if (attr == "modality") return std::string(to_string(e.modality));
  if (attr == "polarity") return std::string(to_string(e.polarity));
  if (attr == "word") return to_lower(e.word);
  return e.head();
}

inline bool contains_any(const std::vector<std::string>& tokens, const std::vector<std::string>& values) {
  return std::any_of(tokens.begin(), tokens.end(), [&](const std::string& t) {
    return std::find(values.begin(), values.end(), t) != values.end();
  });
}

}  // namespace detail

inline bool rule_matches(const AttributeRule& rule, const RuleContext& ctx, const EventInstance& e1,
                         const EventInstance& e2) {
  const std::vector<std::string>* signals = nullptr;
  for (const auto& c : rule.conditions) {
    if (c.key == "signal") signals = &c.values;
  }
  const auto has = [](const RuleCondition& c, const std::string& v) {
    return std::find(c.values.begin(), c.values.end(), v) != c.values.end();
  };
  const auto flag = [](bool b) { return std::string(b ? "true" : "false"); };
  for (const auto& c : rule.conditions) {
    bool ok = false;
    if (c.key == "isTheSameSentence") {
      ok = has(c, flag(ctx.same_sentence));
    } else if (c.key == "conjBetweenEvents") {
      const bool conj = std::any_of(ctx.between.begin(), ctx.between.end(),
                                    [](const std::string& t) { return conjunction_tokens().count(t) > 0; });
      ok = has(c, flag(conj));
    } else if (c.key == "signal") {
      ok = detail::contains_any(ctx.span, c.values);
    } else if (c.key == "signalBetweenTwoEvents") {
      ok = has(c, flag(signals && detail::contains_any(ctx.between, *signals)));
    } else {
      const EventInstance& e = c.key[5] == '1' ? e1 : e2;
      ok = has(c, detail::event_attribute(e, std::string_view(c.key).substr(7)));
    }
    if (!ok) return false;
  }
  return true;
}

// First attribute rule in file order, else the strongest lexical rule, else
// the first signal rule.
inline std::optional<LabelId> apply_rules(const RuleBase& rules, const Document& doc, const EventInstance& e1,
                                          const EventInstance& e2) {
  const RuleContext ctx = rule_context(doc, e1, e2);
  for (const auto& r : rules.attribute_rules) {
    if (rule_matches(r, ctx, e1, e2)) return r.label;
  }
  const std::string h1 = e1.head();
  const std::string h2 = e2.head();
  const LexicalRule* best = nullptr;
  bool forward = true;
  for (const auto& r : rules.lexical_rules) {
    const bool fwd = r.first == h1 && r.second == h2;
    const bool bwd = r.first == h2 && r.second == h1;
    if ((fwd || bwd) && (!best || r.strength > best->strength)) {
      best = &r;
      forward = fwd;
    }
  }
  if (best) {
    const std::string_view name = forward ? "BEFORE" : "AFTER";
    for (std::size_t l = 0; l < label_count(rules.scheme); ++l) {
      if (label_name(rules.scheme, static_cast<LabelId>(l)) == name) return static_cast<LabelId>(l);
    }
  }
  for (const auto& r : rules.signal_rules) {
    if (rule_matches(r, ctx, e1, e2)) return r.label;
  }
  return std::nullopt;
}

}  // namespace tlink
