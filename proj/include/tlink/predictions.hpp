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

// Per-pair predictions and their tab-separated file form:
//   doc_id  source  target  scheme  label  confidence

#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

#include "tlink/corpus.hpp"
#include "tlink/error.hpp"
#include "tlink/labels.hpp"
#include "tlink/text.hpp"

namespace tlink {

struct Prediction {
  std::string doc_id;
  std::string source;
  std::string target;
  RelationLabel label;
  double confidence = 0.0;

  std::string key() const { return doc_id + ":" + source + "->" + target; }

  friend bool operator==(const Prediction&, const Prediction&) = default;
};

inline constexpr std::string_view kPredictionHeader = "doc_id\tsource\ttarget\tscheme\tlabel\tconfidence";

inline void write_predictions(std::ostream& out, const std::vector<Prediction>& predictions) {
  out << kPredictionHeader << '\n';
  for (const auto& p : predictions) {
    out << p.doc_id << '\t' << p.source << '\t' << p.target << '\t' << scheme_name(p.label.scheme) << '\t'
        << p.label.name() << '\t' << format_double(p.confidence) << '\n';
  }
}

inline std::vector<Prediction> read_predictions(std::istream& in) {
  std::vector<Prediction> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (number == 1) {
      if (line != kPredictionHeader) throw ParseError("predictions: missing header", number);
      continue;
    }
    if (trim(line).empty()) continue;
    const auto f = split(line, '\t');
    if (f.size() != 6) throw ParseError("predictions: expected 6 fields, got " + std::to_string(f.size()), number);
    Prediction p;
    p.doc_id = f[0];
    p.source = f[1];
    p.target = f[2];
    try {
      const Scheme scheme = parse_scheme(f[3]);
      p.label = {scheme, parse_label(scheme, f[4])};
    } catch (const ParseError& e) {
      throw ParseError(std::string("predictions: ") + e.what(), number);
    }
    if (!parse_double(f[5], p.confidence)) throw ParseError("predictions: bad confidence", number);
    out.push_back(std::move(p));
  }
  if (number == 0) throw ParseError("predictions: empty file", 0);
  return out;
}

// The corpus tlinks as predictions with confidence 1.
inline std::vector<Prediction> gold_predictions(const Corpus& corpus) {
  std::vector<Prediction> out;
  for (const auto& doc : corpus) {
    for (const auto& t : doc.tlinks) out.push_back({doc.doc_id, t.source, t.target, t.label, 1.0});
  }
  return out;
}

struct AlignedLabels {
  Scheme scheme = Scheme::kCoarse3;
  std::vector<std::string> keys;  // gold order
  std::vector<std::vector<LabelId>> systems;
  std::vector<LabelId> gold;
};

// Lines up each system's labels with the gold pairs. Every system must cover
// exactly the gold pairs in the gold scheme.
inline AlignedLabels align_predictions(const std::vector<std::vector<Prediction>>& systems,
                                       const std::vector<Prediction>& gold) {
  AlignedLabels out;
  if (!gold.empty()) out.scheme = gold.front().label.scheme;
  std::map<std::string, std::size_t> index;
  for (const auto& g : gold) {
    if (g.label.scheme != out.scheme) throw ValidationError("gold labels mix schemes");
    if (!index.emplace(g.key(), out.keys.size()).second) throw ValidationError("gold pair " + g.key() + " repeated");
    out.keys.push_back(g.key());
    out.gold.push_back(g.label.value);
  }
  for (const auto& system : systems) {
    std::vector<LabelId> labels(gold.size());
    std::vector<bool> seen(gold.size(), false);
    std::vector<std::string> extra;
    for (const auto& p : system) {
      const auto it = index.find(p.key());
      if (it == index.end() || seen[it->second]) {
        extra.push_back(p.key());
        continue;
      }
      if (p.label.scheme != out.scheme) {
        throw ValidationError("prediction " + p.key() + " is in scheme " + std::string(scheme_name(p.label.scheme)) +
                              ", gold is " + std::string(scheme_name(out.scheme)));
      }
      seen[it->second] = true;
      labels[it->second] = p.label.value;
    }
    std::vector<std::string> missing;
    for (std::size_t k = 0; k < seen.size(); ++k) {
      if (!seen[k]) missing.push_back(out.keys[k]);
    }
    if (!extra.empty() || !missing.empty()) {
      std::string msg = "pair sets differ:";
      const auto list = [&](const char* what, const std::vector<std::string>& keys) {
        if (keys.empty()) return;
        msg += std::string(" ") + what + " " + std::to_string(keys.size()) + " (";
        for (std::size_t k = 0; k < keys.size() && k < 5; ++k) msg += (k ? ", " : "") + keys[k];
        msg += keys.size() > 5 ? ", ...)" : ")";
      };
      list("only in predictions", extra);
      list("only in gold", missing);
      throw ValidationError(msg);
    }
    out.systems.push_back(std::move(labels));
  }
  return out;
}

}  // namespace tlink
