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

// Bootstrapped cross-document classification: a general one-vs-one model is
// specialized for each test document by self-training on the most confident
// predictions over topically related documents.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "tlink/classifier.hpp"
#include "tlink/corpus.hpp"
#include "tlink/features.hpp"
#include "tlink/labels.hpp"
#include "tlink/predictions.hpp"

namespace tlink {

// ---- retrieval --------------------------------------------------------------

// TF-IDF over lowercased tokens: tf weight 1 + log(tf), idf
// log((1 + N) / (1 + df)) + 1, vectors scaled to unit length.
class RetrievalIndex {
 public:
  using Vector = std::map<std::string, double, std::less<>>;

  static RetrievalIndex build(const Corpus& pool) {
    RetrievalIndex index;
    std::vector<std::map<std::string, std::size_t>> counts;
    for (const auto& doc : pool) {
      index.doc_ids_.push_back(doc.doc_id);
      counts.push_back(term_counts(doc));
      for (const auto& [term, n] : counts.back()) ++index.df_[term];
    }
    for (const auto& c : counts) index.vectors_.push_back(index.weigh(c));
    return index;
  }

  std::size_t size() const { return doc_ids_.size(); }
  const std::string& doc_id(std::size_t k) const { return doc_ids_.at(k); }
  const Vector& vector(std::size_t k) const { return vectors_.at(k); }
  std::size_t document_frequency(std::string_view term) const {
    const auto it = df_.find(term);
    return it == df_.end() ? 0 : it->second;
  }

  double idf(std::string_view term) const {
    const double n = static_cast<double>(size());
    return std::log((1.0 + n) / (1.0 + static_cast<double>(document_frequency(term)))) + 1.0;
  }

  // Vector of any document under this index's statistics; terms unseen in
  // the pool get no weight.
  Vector query_vector(const Document& doc) const { return weigh(term_counts(doc)); }

  static double cosine(const Vector& a, const Vector& b) {
    double s = 0.0;
    for (const auto& [term, w] : a) {
      const auto it = b.find(term);
      if (it != b.end()) s += w * it->second;
    }
    return s;
  }

 private:
  static std::map<std::string, std::size_t> term_counts(const Document& doc) {
    std::map<std::string, std::size_t> c;
    for (const auto& sentence : doc.sentences) {
      for (const auto& token : sentence) ++c[to_lower(token)];
    }
    return c;
  }

  Vector weigh(const std::map<std::string, std::size_t>& counts) const {
    Vector v;
    double norm = 0.0;
    for (const auto& [term, n] : counts) {
      if (document_frequency(term) == 0) continue;
      const double w = (1.0 + std::log(static_cast<double>(n))) * idf(term);
      v.emplace(term, w);
      norm += w * w;
    }
    if (norm > 0.0) {
      for (auto& [term, w] : v) w /= std::sqrt(norm);
    }
    return v;
  }

  std::vector<std::string> doc_ids_;
  std::vector<Vector> vectors_;
  std::map<std::string, std::size_t, std::less<>> df_;
};

inline RetrievalIndex build_index(const Corpus& pool) { return RetrievalIndex::build(pool); }

struct RetrievedDocument {
  std::size_t index = 0;  // position in the pool
  std::string doc_id;
  double score = 0.0;
};

// Top n pool documents by cosine similarity, ties by doc id; a pool copy of
// the query (same doc id) is skipped.
inline std::vector<RetrievedDocument> retrieve_related(const RetrievalIndex& index, const Document& query,
                                                       std::size_t n) {
  if (n == 0) throw ValidationError("retrieval needs n >= 1");
  const auto q = index.query_vector(query);
  std::vector<RetrievedDocument> ranked;
  for (std::size_t k = 0; k < index.size(); ++k) {
    if (index.doc_id(k) == query.doc_id) continue;
    ranked.push_back({k, index.doc_id(k), RetrievalIndex::cosine(q, index.vector(k))});
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.score != b.score ? a.score > b.score : a.doc_id < b.doc_id;
  });
  if (ranked.size() > n) ranked.resize(n);
  return ranked;
}

// ---- models -----------------------------------------------------------------

struct BcdcConfig {
  std::size_t related_docs = 25;
  std::size_t confident_per_round = 40;
  std::size_t max_rounds = 10;
  bool reuse_models_for_related_tests = true;
  double reuse_jaccard = 0.5;
  FeatureSet features = FeatureSet::kBcdcExtra;
  Routing routing = Routing::kIntraInter;
  TrainConfig train;
};

inline void validate(const BcdcConfig& c) {
  if (c.related_docs == 0 || c.confident_per_round == 0) {
    throw ValidationError("related docs and confident relations per round must be positive");
  }
  if (c.features == FeatureSet::kEmtrl) throw ValidationError("BCDC uses the basic or extra feature set");
}

struct BcdcModel {
  FeatureSet features = FeatureSet::kBcdcExtra;
  FeatureIndex index;
  OvoLinearModel model;

  friend bool operator==(const BcdcModel&, const BcdcModel&) = default;
};

struct LabeledPair {
  FeatureVector features;
  LabelId label = 0;
  bool intra = true;
};

inline bool same_sentence(const Document& doc, std::string_view a, std::string_view b) {
  return doc.event(a).sentence_index == doc.event(b).sentence_index;
}

// Gold-labeled pairs of a corpus, in document and link order.
inline std::vector<LabeledPair> labeled_pairs(const Corpus& corpus, Scheme scheme, FeatureSet set) {
  std::vector<LabeledPair> out;
  for (const auto& doc : corpus) {
    for (const auto& t : doc.tlinks) {
      if (t.label.scheme != scheme) {
        throw UnsupportedError("link " + doc.doc_id + ":" + t.source + "->" + t.target + " is not in scheme " +
                               std::string(scheme_name(scheme)));
      }
      out.push_back({extract_pair(doc, t.source, t.target, set), t.label.value, same_sentence(doc, t.source, t.target)});
    }
  }
  return out;
}

// Registers every feature of `data` (in order) on top of `base` and trains.
inline BcdcModel train_bcdc_model(const std::vector<LabeledPair>& data, Scheme scheme, const BcdcConfig& config,
                                  FeatureIndex base = {}) {
  BcdcModel out;
  out.features = config.features;
  out.index = std::move(base);
  std::vector<Example> examples;
  examples.reserve(data.size());
  for (const auto& p : data) examples.push_back({vectorize(p.features, out.index, false), p.label, p.intra});
  out.model = train(examples, scheme, config.train, config.routing);
  return out;
}

struct PairDecision {
  LabelId label = 0;
  double confidence = 0.0;
};

inline PairDecision classify_pair(const BcdcModel& m, const Document& doc, std::string_view source,
                                  std::string_view target) {
  const SparseVector x = vectorize(extract_pair(doc, source, target, m.features), m.index);
  const bool intra = same_sentence(doc, source, target);
  const auto c = classify(m.model, x, intra);
  return {c.label, confidence_for(m.model, x, c.label, intra)};
}

// Predictions for the document's tlink slots.
inline std::vector<Prediction> classify_document(const BcdcModel& m, const Document& doc) {
  std::vector<Prediction> out;
  for (const auto& t : doc.tlinks) {
    const auto d = classify_pair(m, doc, t.source, t.target);
    out.push_back({doc.doc_id, t.source, t.target, RelationLabel{m.model.scheme, d.label}, d.confidence});
  }
  return out;
}

// Every unordered event pair in textual order, optionally same-sentence only.
inline std::vector<std::pair<std::string, std::string>> event_pairs(const Document& doc, bool intra_only) {
  std::vector<const EventInstance*> events;
  for (const auto& e : doc.events) events.push_back(&e);
  std::sort(events.begin(), events.end(), [](const auto* a, const auto* b) { return occurs_before(*a, *b); });
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t i = 0; i < events.size(); ++i) {
    for (std::size_t j = i + 1; j < events.size(); ++j) {
      if (intra_only && events[i]->sentence_index != events[j]->sentence_index) continue;
      out.emplace_back(events[i]->event_id, events[j]->event_id);
    }
  }
  return out;
}

inline std::vector<Prediction> classify_all_pairs(const BcdcModel& m, const Document& doc) {
  std::vector<Prediction> out;
  for (const auto& [a, b] : event_pairs(doc, false)) {
    const auto d = classify_pair(m, doc, a, b);
    out.push_back({doc.doc_id, a, b, RelationLabel{m.model.scheme, d.label}, d.confidence});
  }
  return out;
}

// ---- bootstrapping ----------------------------------------------------------

struct BootstrapRound {
  std::vector<Prediction> injected;  // pseudo-labels chosen this round
};

struct BootstrapResult {
  BcdcModel model;
  std::vector<RetrievedDocument> related;
  std::vector<BootstrapRound> rounds;
};

// Self-trains `general` for `test_doc`. Each round labels the not yet chosen
// same-sentence pairs of the related documents with the current model, adds
// the K most confident to the chosen set and retrains on `training` plus
// everything chosen so far.
inline BootstrapResult bootstrap(const BcdcModel& general, const std::vector<LabeledPair>& training,
                                 const Document& test_doc, const Corpus& pool, const RetrievalIndex& index,
                                 const BcdcConfig& config) {
  validate(config);
  BootstrapResult result{general, {}, {}};
  if (config.max_rounds == 0 || pool.empty()) return result;
  result.related = retrieve_related(index, test_doc, config.related_docs);

  struct Candidate {
    std::size_t doc;
    std::string source;
    std::string target;
    bool chosen = false;
  };
  std::vector<Candidate> candidates;
  for (const auto& r : result.related) {
    for (auto& [a, b] : event_pairs(pool[r.index], true)) candidates.push_back({r.index, a, b});
  }

  std::vector<LabeledPair> data = training;
  const Scheme scheme = general.model.scheme;
  for (std::size_t round = 0; round < config.max_rounds; ++round) {
    struct Scored {
      std::size_t candidate;
      PairDecision decision;
    };
    std::vector<Scored> scored;
    for (std::size_t k = 0; k < candidates.size(); ++k) {
      const auto& c = candidates[k];
      if (c.chosen) continue;
      scored.push_back({k, classify_pair(result.model, pool[c.doc], c.source, c.target)});
    }
    if (scored.empty()) break;
    std::stable_sort(scored.begin(), scored.end(),
                     [](const Scored& a, const Scored& b) { return a.decision.confidence > b.decision.confidence; });
    if (scored.size() > config.confident_per_round) scored.resize(config.confident_per_round);

    BootstrapRound log;
    for (const auto& s : scored) {
      auto& c = candidates[s.candidate];
      c.chosen = true;
      const Document& doc = pool[c.doc];
      data.push_back({extract_pair(doc, c.source, c.target, general.features), s.decision.label, true});
      log.injected.push_back({doc.doc_id, c.source, c.target, RelationLabel{scheme, s.decision.label},
                              s.decision.confidence});
    }
    result.rounds.push_back(std::move(log));
    result.model = train_bcdc_model(data, scheme, config, general.index);
  }
  return result;
}

// ---- pipeline ---------------------------------------------------------------

struct BcdcDocumentResult {
  std::string doc_id;
  std::vector<std::string> related;
  std::vector<BootstrapRound> rounds;
  std::optional<std::string> reused_from;
  std::vector<Prediction> predictions;
  std::vector<Prediction> general_predictions;
  std::optional<double> accuracy;
  std::optional<double> general_accuracy;
};

struct BcdcRun {
  BcdcModel general;
  std::vector<BcdcDocumentResult> documents;
  std::size_t bootstraps = 0;
};

inline double jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  const std::set<std::string> sa(a.begin(), a.end());
  const std::set<std::string> sb(b.begin(), b.end());
  std::size_t common = 0;
  for (const auto& x : sa) common += sb.count(x);
  const std::size_t all = sa.size() + sb.size() - common;
  return all == 0 ? 1.0 : static_cast<double>(common) / static_cast<double>(all);
}

namespace detail {

inline std::optional<double> gold_accuracy(const Document& doc, const std::vector<Prediction>& predictions) {
  if (predictions.empty()) return std::nullopt;
  std::size_t right = 0;
  for (std::size_t k = 0; k < predictions.size(); ++k) right += predictions[k].label == doc.tlinks[k].label;
  return static_cast<double>(right) / static_cast<double>(predictions.size());
}

}  // namespace detail

// Tests are processed in the given order. A test whose related set overlaps
// an earlier bootstrapped test's set by at least the reuse threshold takes
// that test's specialized model (the best overlap, earliest on ties).
inline BcdcRun run_bcdc(const Corpus& train, const Corpus& tests, const Corpus& pool, Scheme scheme,
                        const BcdcConfig& config) {
  validate(config);
  BcdcRun run;
  const auto training = labeled_pairs(train, scheme, config.features);
  run.general = train_bcdc_model(training, scheme, config);
  const RetrievalIndex index = build_index(pool);

  struct Built {
    std::string doc_id;
    std::vector<std::string> related;
    BcdcModel model;
  };
  std::vector<Built> built;
  for (const auto& doc : tests) {
    BcdcDocumentResult r;
    r.doc_id = doc.doc_id;
    const BcdcModel* model = &run.general;
    if (!pool.empty() && config.max_rounds > 0) {
      for (const auto& rel : retrieve_related(index, doc, config.related_docs)) r.related.push_back(rel.doc_id);
      const Built* reuse = nullptr;
      double best = -1.0;
      if (config.reuse_models_for_related_tests) {
        for (const auto& b : built) {
          const double j = jaccard(r.related, b.related);
          if (j >= config.reuse_jaccard && j > best) {
            best = j;
            reuse = &b;
          }
        }
      }
      if (reuse) {
        r.reused_from = reuse->doc_id;
        model = &reuse->model;
      } else {
        auto boot = bootstrap(run.general, training, doc, pool, index, config);
        ++run.bootstraps;
        r.rounds = std::move(boot.rounds);
        built.push_back({doc.doc_id, r.related, std::move(boot.model)});
        model = &built.back().model;
      }
    }
    r.predictions = classify_document(*model, doc);
    r.general_predictions = classify_document(run.general, doc);
    r.accuracy = detail::gold_accuracy(doc, r.predictions);
    r.general_accuracy = detail::gold_accuracy(doc, r.general_predictions);
    run.documents.push_back(std::move(r));
  }
  return run;
}

inline nlohmann::ordered_json bcdc_report_json(const BcdcRun& run) {
  nlohmann::ordered_json docs = nlohmann::ordered_json::array();
  std::size_t right = 0, general_right = 0, total = 0;
  for (const auto& d : run.documents) {
    nlohmann::ordered_json j;
    j["doc_id"] = d.doc_id;
    j["related"] = d.related;
    j["reused_from"] = d.reused_from ? nlohmann::ordered_json(*d.reused_from) : nlohmann::ordered_json();
    auto rounds = nlohmann::ordered_json::array();
    for (const auto& round : d.rounds) {
      auto injected = nlohmann::ordered_json::array();
      for (const auto& p : round.injected) {
        injected.push_back({{"pair", p.key()}, {"label", p.label.name()}, {"confidence", p.confidence}});
      }
      rounds.push_back(injected);
    }
    j["rounds"] = rounds;
    j["pairs"] = d.predictions.size();
    j["accuracy"] = d.accuracy ? nlohmann::ordered_json(*d.accuracy) : nlohmann::ordered_json();
    j["general_accuracy"] = d.general_accuracy ? nlohmann::ordered_json(*d.general_accuracy) : nlohmann::ordered_json();
    if (d.accuracy) {
      total += d.predictions.size();
      right += static_cast<std::size_t>(std::lround(*d.accuracy * static_cast<double>(d.predictions.size())));
      general_right +=
          static_cast<std::size_t>(std::lround(*d.general_accuracy * static_cast<double>(d.predictions.size())));
    }
    docs.push_back(j);
  }
  nlohmann::ordered_json out;
  out["documents"] = docs;
  out["bootstraps"] = run.bootstraps;
  out["pairs"] = total;
  out["accuracy"] = total ? nlohmann::ordered_json(static_cast<double>(right) / static_cast<double>(total))
                          : nlohmann::ordered_json();
  out["general_accuracy"] = total ? nlohmann::ordered_json(static_cast<double>(general_right) /
                                                           static_cast<double>(total))
                                  : nlohmann::ordered_json();
  return out;
}

inline void write_bcdc_report(std::ostream& out, const BcdcRun& run) {
  for (const auto& d : run.documents) {
    out << "document " << d.doc_id;
    if (d.reused_from) {
      out << " reused " << *d.reused_from;
    } else {
      out << " rounds " << d.rounds.size();
    }
    if (d.accuracy) out << " accuracy " << format_double(*d.accuracy) << " general " << format_double(*d.general_accuracy);
    out << '\n';
    for (std::size_t r = 0; r < d.rounds.size(); ++r) {
      out << "  round " << r + 1 << " injected " << d.rounds[r].injected.size();
      for (const auto& p : d.rounds[r].injected) out << ' ' << p.key() << '=' << p.label.name() << '@' << format_double(p.confidence);
      out << '\n';
    }
  }
}

// ---- model file -------------------------------------------------------------

// Feature set, feature index and classifier in one stream.
inline void save_bcdc_model(std::ostream& out, const BcdcModel& m) {
  out << "tlink-bcdc 1\n";
  out << "features " << (m.features == FeatureSet::kBcdcBasic ? "basic" : "extra") << '\n';
  out << "index " << m.index.size() << '\n';
  m.index.save(out);
  save_model(out, m.model);
}

inline BcdcModel load_bcdc_model(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "tlink-bcdc 1") throw ParseError("bcdc model: bad header", 1);
  BcdcModel m;
  if (!std::getline(in, line) || line.rfind("features ", 0) != 0) throw ParseError("bcdc model: missing features", 2);
  m.features = parse_feature_set(line.substr(9));
  std::size_t dims = 0;
  if (!std::getline(in, line) || line.rfind("index ", 0) != 0 || !parse_int(line.substr(6), dims)) {
    throw ParseError("bcdc model: missing index size", 3);
  }
  std::string block;
  for (std::size_t k = 0; k < dims; ++k) {
    if (!std::getline(in, line)) throw ParseError("bcdc model: truncated index", 4 + k);
    block += line + '\n';
  }
  std::istringstream index_in(block);
  m.index = FeatureIndex::load(index_in);
  m.model = load_model(in);
  return m;
}

}  // namespace tlink
