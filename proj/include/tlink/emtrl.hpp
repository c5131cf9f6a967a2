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

// EM learning of temporal relations over event pairs.
//
// Each pair's features are generated independently given its hidden class,
// with a uniform class prior. Training alternates a relative-frequency M-step
// with a hard E-step that commits every pair to its most probable class, and
// starts at the M-step from an initial assignment.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "tlink/algebra.hpp"
#include "tlink/consistency.hpp"
#include "tlink/corpus.hpp"
#include "tlink/error.hpp"
#include "tlink/features.hpp"
#include "tlink/labels.hpp"
#include "tlink/random.hpp"
#include "tlink/rules.hpp"
#include "tlink/text.hpp"

namespace tlink {

enum class Smoothing : std::uint8_t { kAddOne, kNone };
enum class RepairMode : std::uint8_t { kNone, kGreedy, kIlp };

inline std::string_view smoothing_name(Smoothing s) { return s == Smoothing::kAddOne ? "add1" : "none"; }

inline Smoothing parse_smoothing(std::string_view s) {
  if (iequals(s, "add1") || iequals(s, "add-1")) return Smoothing::kAddOne;
  if (iequals(s, "none")) return Smoothing::kNone;
  throw ValidationError("unknown smoothing '" + std::string(s) + "'");
}

inline std::string_view repair_mode_name(RepairMode r) {
  switch (r) {
    case RepairMode::kNone: return "none";
    case RepairMode::kGreedy: return "greedy";
    case RepairMode::kIlp: return "ilp";
  }
  return "none";
}

inline RepairMode parse_repair_mode(std::string_view s) {
  if (iequals(s, "none")) return RepairMode::kNone;
  if (iequals(s, "greedy")) return RepairMode::kGreedy;
  if (iequals(s, "ilp")) return RepairMode::kIlp;
  throw ValidationError("unknown repair mode '" + std::string(s) + "'");
}

// ---- event pairs ------------------------------------------------------------

struct EventPair {
  std::size_t doc = 0;
  std::string source;
  std::string target;

  friend bool operator==(const EventPair&, const EventPair&) = default;
};

// The linked pairs of a corpus, in document and link order.
inline std::vector<EventPair> collect_pairs(const Corpus& corpus) {
  std::vector<EventPair> pairs;
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    for (const auto& t : corpus[d].tlinks) pairs.push_back({d, t.source, t.target});
  }
  return pairs;
}

inline std::string pair_id(const Corpus& corpus, const EventPair& p) {
  return corpus.at(p.doc).doc_id + ":" + p.source + "->" + p.target;
}

inline std::vector<LabelId> gold_labels(const Corpus& corpus, const std::vector<EventPair>& pairs, Scheme scheme) {
  std::vector<LabelId> gold;
  for (const auto& p : pairs) {
    const auto& links = corpus.at(p.doc).tlinks;
    const auto it = std::find_if(links.begin(), links.end(),
                                 [&](const Tlink& t) { return t.source == p.source && t.target == p.target; });
    if (it == links.end()) throw ValidationError("no gold link for pair " + pair_id(corpus, p));
    if (it->label.scheme != scheme) {
      throw UnsupportedError("gold link " + pair_id(corpus, p) + " is not in scheme " +
                             std::string(scheme_name(scheme)));
    }
    gold.push_back(it->label.value);
  }
  return gold;
}

// Slots of the EM likelihood: the EM feature set with per-event tense and
// aspect folded into one joint slot.
inline const std::vector<std::string>& em_likelihood_slots() {
  static const std::vector<std::string> slots = [] {
    FeatureVector probe;
    for (const auto& s : emtrl_slots()) probe.push_back({s, ""});
    std::vector<std::string> out;
    for (const auto& f : joint_tense_aspect(probe)) out.push_back(f.slot);
    return out;
  }();
  return slots;
}

inline std::vector<std::string> em_features(const Document& doc, const EventPair& p) {
  std::vector<std::string> values;
  for (auto& f : joint_tense_aspect(extract_pair(doc, p.source, p.target, FeatureSet::kEmtrl))) {
    values.push_back(std::move(f.value));
  }
  return values;
}

// Observed side of an EM run: the pairs, their feature values and the
// per-slot vocabularies (in order of first appearance).
class EmProblem {
 public:
  static EmProblem build(const Corpus& corpus, Scheme scheme) {
    if (scheme == Scheme::kRaw14) throw UnsupportedError("EM runs on Norm6 or Coarse3 labels");
    EmProblem p;
    p.corpus_ = &corpus;
    p.scheme_ = scheme;
    p.pairs_ = collect_pairs(corpus);
    const std::size_t slots = em_likelihood_slots().size();
    p.vocab_.resize(slots);
    std::vector<std::map<std::string, std::uint32_t, std::less<>>> index(slots);
    for (const auto& pair : p.pairs_) {
      const auto values = em_features(corpus[pair.doc], pair);
      std::vector<std::uint32_t> codes(slots);
      for (std::size_t s = 0; s < slots; ++s) {
        auto [it, inserted] = index[s].try_emplace(values[s], static_cast<std::uint32_t>(p.vocab_[s].size()));
        if (inserted) p.vocab_[s].push_back(values[s]);
        codes[s] = it->second;
      }
      p.codes_.push_back(std::move(codes));
    }
    return p;
  }

  const Corpus& corpus() const { return *corpus_; }
  Scheme scheme() const { return scheme_; }
  std::size_t size() const { return pairs_.size(); }
  const std::vector<EventPair>& pairs() const { return pairs_; }
  const std::vector<std::vector<std::string>>& vocab() const { return vocab_; }
  const std::vector<std::uint32_t>& codes(std::size_t pair) const { return codes_[pair]; }

 private:
  const Corpus* corpus_ = nullptr;
  Scheme scheme_ = Scheme::kCoarse3;
  std::vector<EventPair> pairs_;
  std::vector<std::vector<std::string>> vocab_;
  std::vector<std::vector<std::uint32_t>> codes_;
};

// ---- model ------------------------------------------------------------------

class EmModel {
 public:
  EmModel() = default;
  EmModel(Scheme scheme, Smoothing smoothing, std::vector<std::string> slots,
          std::vector<std::vector<std::string>> vocab)
      : scheme_(scheme), smoothing_(smoothing), slots_(std::move(slots)), vocab_(std::move(vocab)) {
    if (slots_.size() != vocab_.size()) throw ValidationError("EM model needs one vocabulary per slot");
    const std::size_t m = labels();
    class_counts_.assign(m, 0.0);
    index_.resize(slots_.size());
    counts_.resize(slots_.size());
    for (std::size_t s = 0; s < slots_.size(); ++s) {
      for (std::size_t v = 0; v < vocab_[s].size(); ++v) {
        if (!index_[s].try_emplace(vocab_[s][v], static_cast<std::uint32_t>(v)).second) {
          throw ValidationError("duplicate value '" + vocab_[s][v] + "' in slot " + slots_[s]);
        }
      }
      counts_[s].assign((vocab_[s].size() + 1) * m, 0.0);
    }
  }

  Scheme scheme() const { return scheme_; }
  Smoothing smoothing() const { return smoothing_; }
  std::size_t labels() const { return label_count(scheme_); }
  const std::vector<std::string>& slots() const { return slots_; }
  const std::vector<std::string>& vocab(std::size_t slot) const { return vocab_.at(slot); }

  // Vocabulary index; the vocabulary size stands for the unseen bucket.
  std::uint32_t code(std::size_t slot, std::string_view value) const {
    const auto it = index_[slot].find(value);
    return it == index_[slot].end() ? static_cast<std::uint32_t>(vocab_[slot].size()) : it->second;
  }

  double count(std::size_t slot, std::uint32_t code, LabelId label) const {
    return counts_[slot][code * labels() + label];
  }
  double class_count(LabelId label) const { return class_counts_[label]; }

  void add(std::size_t slot, std::uint32_t code, LabelId label, double weight) {
    if (code >= vocab_[slot].size()) throw ValidationError("cannot count an unseen value");
    counts_[slot][code * labels() + label] += weight;
  }
  void add_class(LabelId label, double weight) { class_counts_[label] += weight; }

  // add1: (N(v, c) + 1) / (N(c) + |V| + 1), one reserved unseen bucket.
  // none: N(v, c) / N(c), zero when the class is empty.
  double probability(std::size_t slot, std::uint32_t code, LabelId label) const {
    const double n = code < vocab_[slot].size() ? count(slot, code, label) : 0.0;
    if (smoothing_ == Smoothing::kAddOne) {
      return (n + 1.0) / (class_counts_[label] + static_cast<double>(vocab_[slot].size()) + 1.0);
    }
    return class_counts_[label] > 0.0 ? n / class_counts_[label] : 0.0;
  }

  double log_probability(std::size_t slot, std::uint32_t code, LabelId label) const {
    return std::log(probability(slot, code, label));
  }

  // log P(c) + sum over slots of log P(value | c), uniform P(c).
  std::vector<double> log_joint(const std::vector<std::uint32_t>& codes) const {
    const std::size_t m = labels();
    std::vector<double> out(m, -std::log(static_cast<double>(m)));
    for (std::size_t c = 0; c < m; ++c) {
      for (std::size_t s = 0; s < slots_.size(); ++s) {
        out[c] += log_probability(s, codes[s], static_cast<LabelId>(c));
      }
    }
    return out;
  }

  std::vector<std::uint32_t> encode(const std::vector<std::string>& values) const {
    if (values.size() != slots_.size()) throw ValidationError("feature count does not match the model");
    std::vector<std::uint32_t> codes(values.size());
    for (std::size_t s = 0; s < values.size(); ++s) codes[s] = code(s, values[s]);
    return codes;
  }

  void save(std::ostream& out) const {
    out << "tlink-em 1\n";
    out << "scheme " << scheme_name(scheme_) << '\n';
    out << "smoothing " << smoothing_name(smoothing_) << '\n';
    out << "classes";
    for (double c : class_counts_) out << ' ' << format_double(c);
    out << "\nslots " << slots_.size() << '\n';
    for (std::size_t s = 0; s < slots_.size(); ++s) {
      out << "slot\t" << slots_[s] << '\t' << vocab_[s].size() << '\n';
      for (std::size_t v = 0; v < vocab_[s].size(); ++v) {
        if (vocab_[s][v].find_first_of("\t\n") != std::string::npos) {
          throw ValidationError("feature value with a tab or newline cannot be saved");
        }
        out << vocab_[s][v];
        for (std::size_t c = 0; c < labels(); ++c) {
          out << '\t' << format_double(count(s, static_cast<std::uint32_t>(v), static_cast<LabelId>(c)));
        }
        out << '\n';
      }
    }
  }

  static EmModel load(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    const auto next = [&](std::string_view what) -> std::string& {
      if (!std::getline(in, line)) throw ParseError("EM model: missing " + std::string(what), line_no + 1);
      ++line_no;
      return line;
    };
    const auto fail = [&](const std::string& msg) { throw ParseError("EM model: " + msg, line_no); };
    const auto number = [&](std::string_view s) {
      double v = 0.0;
      if (!parse_double(s, v) || !(v >= 0.0)) fail("bad count '" + std::string(s) + "'");
      return v;
    };
    if (next("header") != "tlink-em 1") fail("not a tlink-em v1 model");
    auto fields = split(next("scheme"), ' ');
    if (fields.size() != 2 || fields[0] != "scheme") fail("expected 'scheme'");
    const Scheme scheme = parse_scheme(fields[1]);
    fields = split(next("smoothing"), ' ');
    if (fields.size() != 2 || fields[0] != "smoothing") fail("expected 'smoothing'");
    const Smoothing smoothing = parse_smoothing(fields[1]);
    const std::string classes_line = next("classes");
    const auto classes = split(classes_line, ' ');
    const std::size_t m = label_count(scheme);
    if (classes.size() != m + 1 || classes[0] != "classes") fail("expected one class count per label");
    std::vector<double> class_counts;
    for (std::size_t c = 0; c < m; ++c) class_counts.push_back(number(classes[c + 1]));
    fields = split(next("slots"), ' ');
    std::size_t slot_count = 0;
    if (fields.size() != 2 || fields[0] != "slots" || !parse_int(fields[1], slot_count)) fail("expected 'slots N'");
    std::vector<std::string> slots;
    std::vector<std::vector<std::string>> vocab;
    std::vector<std::vector<std::vector<double>>> counts;
    for (std::size_t s = 0; s < slot_count; ++s) {
      const std::string head = next("slot");
      const auto h = split(head, '\t');
      std::size_t size = 0;
      if (h.size() != 3 || h[0] != "slot" || !parse_int(h[2], size)) fail("expected 'slot<TAB>name<TAB>size'");
      slots.emplace_back(h[1]);
      vocab.emplace_back();
      counts.emplace_back();
      for (std::size_t v = 0; v < size; ++v) {
        const std::string row = next("vocabulary row");
        const auto r = split(row, '\t');
        if (r.size() != m + 1) fail("expected value and one count per label");
        vocab.back().emplace_back(r[0]);
        counts.back().emplace_back();
        for (std::size_t c = 0; c < m; ++c) counts.back().back().push_back(number(r[c + 1]));
      }
    }
    EmModel model(scheme, smoothing, std::move(slots), std::move(vocab));
    model.class_counts_ = std::move(class_counts);
    for (std::size_t s = 0; s < counts.size(); ++s) {
      for (std::size_t v = 0; v < counts[s].size(); ++v) {
        for (std::size_t c = 0; c < m; ++c) {
          model.counts_[s][v * m + c] = counts[s][v][c];
        }
      }
    }
    return model;
  }

  friend bool operator==(const EmModel& a, const EmModel& b) {
    return a.scheme_ == b.scheme_ && a.smoothing_ == b.smoothing_ && a.slots_ == b.slots_ &&
           a.vocab_ == b.vocab_ && a.counts_ == b.counts_ && a.class_counts_ == b.class_counts_;
  }

 private:
  Scheme scheme_ = Scheme::kCoarse3;
  Smoothing smoothing_ = Smoothing::kAddOne;
  std::vector<std::string> slots_;
  std::vector<std::vector<std::string>> vocab_;
  std::vector<std::map<std::string, std::uint32_t, std::less<>>> index_;
  // counts_[slot][code * labels + label]; the last row is the unseen bucket.
  std::vector<std::vector<double>> counts_;
  std::vector<double> class_counts_;
};

// Normalized posterior from log joints; uniform when every class has zero
// probability.
inline std::vector<double> normalize_log(const std::vector<double>& log_joint) {
  const double top = *std::max_element(log_joint.begin(), log_joint.end());
  std::vector<double> p(log_joint.size());
  if (top == -std::numeric_limits<double>::infinity()) {
    std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(p.size()));
    return p;
  }
  double sum = 0.0;
  for (std::size_t c = 0; c < p.size(); ++c) sum += (p[c] = std::exp(log_joint[c] - top));
  for (double& x : p) x /= sum;
  return p;
}

// First maximum, i.e. ties go to the scheme's label order.
inline LabelId argmax_label(const std::vector<double>& scores) {
  return static_cast<LabelId>(std::max_element(scores.begin(), scores.end()) - scores.begin());
}

// ---- assignments ------------------------------------------------------------

struct PairAssignment {
  std::optional<LabelId> label;  // empty: not yet assigned (uniform posterior)
  std::vector<double> posterior;
  bool pinned = false;

  friend bool operator==(const PairAssignment&, const PairAssignment&) = default;
};

struct Assignment {
  Scheme scheme = Scheme::kCoarse3;
  std::vector<PairAssignment> pairs;

  friend bool operator==(const Assignment&, const Assignment&) = default;
};

namespace detail {

inline std::vector<double> one_hot(std::size_t m, LabelId label) {
  std::vector<double> p(m, 0.0);
  p[label] = 1.0;
  return p;
}

inline PairAssignment unassigned(std::size_t m) {
  return {std::nullopt, std::vector<double>(m, 1.0 / static_cast<double>(m)), false};
}

}  // namespace detail

inline Assignment init_random(std::size_t pairs, Scheme scheme, std::uint64_t seed) {
  const std::size_t m = label_count(scheme);
  Rng rng = make_rng(seed);
  Assignment a{scheme, {}};
  for (std::size_t k = 0; k < pairs; ++k) {
    const auto label = static_cast<LabelId>(uniform_index(rng, m));
    a.pairs.push_back({label, detail::one_hot(m, label), false});
  }
  return a;
}

// Per gold label, a random ceil(fraction * count) subset is pinned to gold.
inline Assignment init_supervised(const std::vector<LabelId>& gold, Scheme scheme, double fraction,
                                  std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw ValidationError("supervised fraction must be in (0, 1]");
  const std::size_t m = label_count(scheme);
  Assignment a{scheme, std::vector<PairAssignment>(gold.size(), detail::unassigned(m))};
  Rng rng = make_rng(seed);
  for (std::size_t label = 0; label < m; ++label) {
    std::vector<std::size_t> members;
    for (std::size_t k = 0; k < gold.size(); ++k) {
      if (gold[k] == label) members.push_back(k);
    }
    shuffle(std::span<std::size_t>(members), rng);
    const auto keep = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(members.size()) - 1e-9));
    for (std::size_t k = 0; k < keep && k < members.size(); ++k) {
      const auto l = static_cast<LabelId>(label);
      a.pairs[members[k]] = {l, detail::one_hot(m, l), true};
    }
  }
  return a;
}

inline Assignment init_rules(const EmProblem& problem, const RuleBase& rules) {
  if (rules.scheme != problem.scheme()) throw ValidationError("rule base scheme differs from the EM scheme");
  const std::size_t m = label_count(problem.scheme());
  Assignment a{problem.scheme(), {}};
  for (const auto& p : problem.pairs()) {
    const Document& doc = problem.corpus()[p.doc];
    if (auto label = apply_rules(rules, doc, doc.event(p.source), doc.event(p.target))) {
      a.pairs.push_back({*label, detail::one_hot(m, *label), false});
    } else {
      a.pairs.push_back(detail::unassigned(m));
    }
  }
  return a;
}

// ---- M and E steps ----------------------------------------------------------

// Counts the assigned pairs. Soft counting weights non-pinned pairs by their
// posterior instead of their hard label.
inline EmModel m_step(const EmProblem& problem, const Assignment& assignment, Smoothing smoothing,
                      bool soft = false) {
  if (assignment.pairs.size() != problem.size()) throw ValidationError("assignment does not cover the pairs");
  EmModel model(problem.scheme(), smoothing, em_likelihood_slots(), problem.vocab());
  const std::size_t m = model.labels();
  for (std::size_t k = 0; k < problem.size(); ++k) {
    const auto& pa = assignment.pairs[k];
    if (!pa.label) continue;
    const auto& codes = problem.codes(k);
    for (std::size_t c = 0; c < m; ++c) {
      const auto label = static_cast<LabelId>(c);
      const double w = (soft && !pa.pinned) ? pa.posterior[c] : (c == *pa.label ? 1.0 : 0.0);
      if (w == 0.0) continue;
      model.add_class(label, w);
      for (std::size_t s = 0; s < codes.size(); ++s) model.add(s, codes[s], label, w);
    }
  }
  return model;
}

// Pinned pairs keep their label but get a fresh posterior.
inline Assignment e_step(const EmModel& model, const EmProblem& problem, const Assignment& previous) {
  Assignment out{problem.scheme(), {}};
  out.pairs.reserve(problem.size());
  for (std::size_t k = 0; k < problem.size(); ++k) {
    PairAssignment pa;
    pa.posterior = normalize_log(model.log_joint(problem.codes(k)));
    const bool pinned = k < previous.pairs.size() && previous.pairs[k].pinned;
    pa.label = pinned ? *previous.pairs[k].label : argmax_label(pa.posterior);
    pa.pinned = pinned;
    out.pairs.push_back(std::move(pa));
  }
  return out;
}

inline Assignment e_step(const EmModel& model, const EmProblem& problem) {
  return e_step(model, problem, Assignment{problem.scheme(), {}});
}

// Sum over assigned pairs of log P(pair features, label).
inline double complete_log_likelihood(const EmModel& model, const EmProblem& problem, const Assignment& a) {
  double sum = 0.0;
  for (std::size_t k = 0; k < problem.size(); ++k) {
    if (a.pairs[k].label) sum += model.log_joint(problem.codes(k))[*a.pairs[k].label];
  }
  return sum;
}

// Complete log-likelihood plus the log density of the Dirichlet(2) prior that
// add-1 smoothing is the MAP estimate of (up to a constant). Hard EM with
// add-1 smoothing ascends this exactly.
inline double map_objective(const EmModel& model, const EmProblem& problem, const Assignment& a) {
  double sum = complete_log_likelihood(model, problem, a);
  if (model.smoothing() != Smoothing::kAddOne) return sum;
  for (std::size_t s = 0; s < model.slots().size(); ++s) {
    for (std::size_t c = 0; c < model.labels(); ++c) {
      for (std::uint32_t v = 0; v <= model.vocab(s).size(); ++v) {
        sum += model.log_probability(s, v, static_cast<LabelId>(c));
      }
    }
  }
  return sum;
}

// log P(corpus) = sum over pairs of log sum over classes of P(pair, class).
inline double marginal_log_likelihood(const EmModel& model, const EmProblem& problem) {
  double sum = 0.0;
  for (std::size_t k = 0; k < problem.size(); ++k) {
    const auto lj = model.log_joint(problem.codes(k));
    const double top = *std::max_element(lj.begin(), lj.end());
    double acc = 0.0;
    for (double x : lj) acc += std::exp(x - top);
    sum += top + std::log(acc);
  }
  return sum;
}

inline double max_parameter_change(const EmModel& a, const EmModel& b) {
  double delta = 0.0;
  for (std::size_t s = 0; s < a.slots().size(); ++s) {
    for (std::uint32_t v = 0; v <= a.vocab(s).size(); ++v) {
      for (std::size_t c = 0; c < a.labels(); ++c) {
        const auto l = static_cast<LabelId>(c);
        delta = std::max(delta, std::abs(a.probability(s, v, l) - b.probability(s, v, l)));
      }
    }
  }
  return delta;
}

// ---- repair inside EM -------------------------------------------------------

struct RepairStats {
  std::size_t documents = 0;
  std::size_t changed = 0;  // hard labels altered by the repair
  std::size_t flagged = 0;  // greedy edges left without a consistent label
};

// Per document graph of the assignment's pairs, with pinned pairs restricted.
inline WeightedGraph document_graph(const Corpus& corpus, const std::vector<EventPair>& pairs, Scheme scheme,
                                    const Assignment& a, std::size_t doc,
                                    std::vector<std::size_t>* members = nullptr) {
  WeightedGraph g(scheme);
  std::map<std::string, std::size_t, std::less<>> nodes;
  const auto node = [&](const std::string& id) {
    auto [it, inserted] = nodes.try_emplace(id, g.node_count());
    if (inserted) g.add_node(id);
    return it->second;
  };
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto& p = pairs[k];
    if (p.doc != doc) continue;
    const std::size_t from = node(p.source);
    const std::size_t to = node(p.target);
    if (g.find_edge(from, to)) {
      throw ValidationError("document '" + corpus[doc].doc_id + "' links " + p.source + " and " + p.target +
                            " twice; repair needs one link per event pair");
    }
    const auto& pa = a.pairs[k];
    g.add_edge(from, to, EdgeBelief{pa.posterior, pa.pinned ? pa.label : std::nullopt});
    if (members) members->push_back(k);
  }
  return g;
}

inline WeightedGraph document_graph(const EmProblem& problem, const Assignment& a, std::size_t doc,
                                    std::vector<std::size_t>* members = nullptr) {
  return document_graph(problem.corpus(), problem.pairs(), problem.scheme(), a, doc, members);
}

// Replaces each document's hard labels by a consistent labeling.
inline RepairStats repair_assignment(const Corpus& corpus, const std::vector<EventPair>& pairs, Assignment& a,
                                     RepairMode mode) {
  RepairStats stats;
  if (mode == RepairMode::kNone) return stats;
  std::vector<bool> has_doc(corpus.size(), false);
  for (const auto& p : pairs) has_doc[p.doc] = true;
  for (std::size_t d = 0; d < has_doc.size(); ++d) {
    if (!has_doc[d]) continue;
    ++stats.documents;
    std::vector<std::size_t> members;
    const WeightedGraph g = document_graph(corpus, pairs, a.scheme, a, d, &members);
    const RepairResult r = mode == RepairMode::kGreedy ? greedy_repair(g) : ilp_repair(g);
    stats.flagged += r.flagged.size();
    for (std::size_t k : members) {
      const auto& p = pairs[k];
      const std::size_t from = *g.find_node(p.source);
      const std::size_t to = *g.find_node(p.target);
      const LabelId label = r.graph.find_edge(from, to)->value;
      if (a.pairs[k].label != label) ++stats.changed;
      a.pairs[k].label = label;
    }
  }
  return stats;
}

inline RepairStats repair_assignment(const EmProblem& problem, Assignment& a, RepairMode mode) {
  return repair_assignment(problem.corpus(), problem.pairs(), a, mode);
}

// ---- training loop ----------------------------------------------------------

struct EmConfig {
  std::size_t max_iters = 30;
  double param_tol = 1e-6;
  RepairMode repair = RepairMode::kNone;
  Smoothing smoothing = Smoothing::kAddOne;
  bool soft = false;
};

struct EmIteration {
  std::size_t iteration = 0;
  std::size_t flips = 0;  // hard labels that changed in this E-step
  double max_param_change = 0.0;
  double log_likelihood = 0.0;  // complete-data, after the following M-step
  double map_objective = 0.0;
  RepairStats repair;
};

struct EmResult {
  EmModel model;
  Assignment assignment;
  std::vector<EmIteration> trace;
  bool converged = false;
};

inline EmResult run_em(const EmProblem& problem, const Assignment& init, const EmConfig& config) {
  if (init.pairs.size() != problem.size()) throw ValidationError("initial assignment does not cover the pairs");
  if (init.scheme != problem.scheme()) throw ValidationError("initial assignment scheme differs from the problem");
  EmResult result{m_step(problem, init, config.smoothing, config.soft), init, {}, false};
  for (std::size_t it = 1; it <= config.max_iters; ++it) {
    Assignment next = e_step(result.model, problem, result.assignment);
    EmIteration step;
    step.iteration = it;
    step.repair = repair_assignment(problem, next, config.repair);
    for (std::size_t k = 0; k < problem.size(); ++k) {
      step.flips += next.pairs[k].label != result.assignment.pairs[k].label;
    }
    EmModel model = m_step(problem, next, config.smoothing, config.soft);
    step.max_param_change = max_parameter_change(result.model, model);
    step.log_likelihood = complete_log_likelihood(model, problem, next);
    step.map_objective = map_objective(model, problem, next);
    result.model = std::move(model);
    result.assignment = std::move(next);
    result.trace.push_back(step);
    if (step.max_param_change < config.param_tol) {
      result.converged = true;
      break;
    }
  }
  return result;
}

// ---- prediction and evaluation ----------------------------------------------

// Posterior and argmax label for each pair, optionally repaired per document.
inline Assignment predict_assignment(const EmModel& model, const Corpus& corpus, const std::vector<EventPair>& pairs,
                                     RepairMode repair = RepairMode::kNone) {
  Assignment out{model.scheme(), {}};
  out.pairs.reserve(pairs.size());
  for (const auto& p : pairs) {
    if (p.doc >= corpus.size()) throw ValidationError("pair refers to a missing document");
    PairAssignment pa;
    pa.posterior = normalize_log(model.log_joint(model.encode(em_features(corpus[p.doc], p))));
    pa.label = argmax_label(pa.posterior);
    out.pairs.push_back(std::move(pa));
  }
  repair_assignment(corpus, pairs, out, repair);
  return out;
}

inline std::vector<LabelId> predict(const EmModel& model, const Corpus& corpus, const std::vector<EventPair>& pairs,
                                    RepairMode repair = RepairMode::kNone) {
  std::vector<LabelId> out;
  for (const auto& pa : predict_assignment(model, corpus, pairs, repair).pairs) out.push_back(*pa.label);
  return out;
}

struct ClusterMapping {
  std::vector<LabelId> permutation;  // cluster -> label
  double accuracy = 0.0;
  double unmapped_accuracy = 0.0;
  bool exhaustive = true;  // false: greedy matching was used
};

inline ClusterMapping map_clusters_to_labels(const std::vector<LabelId>& predicted, const std::vector<LabelId>& gold,
                                             Scheme scheme) {
  if (predicted.size() != gold.size()) throw ValidationError("prediction and gold sizes differ");
  const std::size_t m = label_count(scheme);
  std::vector<std::vector<std::size_t>> joint(m, std::vector<std::size_t>(m, 0));
  std::size_t same = 0;
  for (std::size_t k = 0; k < gold.size(); ++k) {
    ++joint.at(predicted[k]).at(gold[k]);
    same += predicted[k] == gold[k];
  }
  const double n = gold.empty() ? 1.0 : static_cast<double>(gold.size());
  ClusterMapping out;
  out.unmapped_accuracy = static_cast<double>(same) / n;
  std::vector<LabelId> perm(m);
  std::iota(perm.begin(), perm.end(), LabelId{0});
  std::size_t best = 0;
  if (m <= 6) {
    bool first = true;
    do {
      std::size_t hits = 0;
      for (std::size_t c = 0; c < m; ++c) hits += joint[c][perm[c]];
      if (first || hits > best) {
        best = hits;
        out.permutation = perm;
        first = false;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    out.exhaustive = false;
    out.permutation.assign(m, 0);
    std::vector<bool> cluster_used(m, false);
    std::vector<bool> label_used(m, false);
    for (std::size_t round = 0; round < m; ++round) {
      std::size_t bc = 0;
      std::size_t bl = 0;
      bool found = false;
      for (std::size_t c = 0; c < m; ++c) {
        for (std::size_t l = 0; l < m; ++l) {
          if (cluster_used[c] || label_used[l]) continue;
          if (!found || joint[c][l] > joint[bc][bl]) {
            bc = c;
            bl = l;
            found = true;
          }
        }
      }
      cluster_used[bc] = label_used[bl] = true;
      out.permutation[bc] = static_cast<LabelId>(bl);
      best += joint[bc][bl];
    }
  }
  out.accuracy = static_cast<double>(best) / n;
  return out;
}

inline std::vector<LabelId> apply_mapping(const std::vector<LabelId>& predicted, const std::vector<LabelId>& permutation) {
  std::vector<LabelId> out;
  out.reserve(predicted.size());
  for (LabelId p : predicted) out.push_back(permutation.at(p));
  return out;
}

}  // namespace tlink
