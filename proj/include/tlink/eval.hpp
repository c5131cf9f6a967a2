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

// Accuracy, majority baselines, document-level cross-validation and the
// stratified shuffling significance test.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "tlink/corpus.hpp"
#include "tlink/emtrl.hpp"
#include "tlink/error.hpp"
#include "tlink/labels.hpp"
#include "tlink/predictions.hpp"
#include "tlink/random.hpp"
#include "tlink/text.hpp"

namespace tlink {

inline double accuracy(std::span<const LabelId> predicted, std::span<const LabelId> gold) {
  if (predicted.size() != gold.size()) {
    throw ValidationError("accuracy: " + std::to_string(predicted.size()) + " predictions for " +
                          std::to_string(gold.size()) + " gold labels");
  }
  if (gold.empty()) throw ValidationError("accuracy of an empty pair set");
  std::size_t right = 0;
  for (std::size_t k = 0; k < gold.size(); ++k) right += predicted[k] == gold[k];
  return static_cast<double>(right) / static_cast<double>(gold.size());
}

inline double accuracy(const std::vector<Prediction>& predicted, const std::vector<Prediction>& gold) {
  const auto aligned = align_predictions({predicted}, gold);
  return accuracy(aligned.systems[0], aligned.gold);
}

struct MajorityBaseline {
  LabelId label = 0;
  double accuracy = 0.0;
};

inline MajorityBaseline majority_baseline(const Corpus& corpus, Scheme scheme) {
  const auto stats = corpus_stats(corpus, scheme);
  if (!stats.majority) throw ValidationError("majority baseline of a corpus without links");
  return {*stats.majority, stats.majority_fraction};
}

// ---- confusion matrix -------------------------------------------------------

struct ConfusionMatrix {
  Scheme scheme = Scheme::kCoarse3;
  std::vector<std::vector<std::size_t>> counts;  // [gold][predicted]

  ConfusionMatrix() = default;
  ConfusionMatrix(Scheme s, std::span<const LabelId> predicted, std::span<const LabelId> gold)
      : scheme(s), counts(label_count(s), std::vector<std::size_t>(label_count(s), 0)) {
    if (predicted.size() != gold.size()) throw ValidationError("confusion matrix: length mismatch");
    for (std::size_t k = 0; k < gold.size(); ++k) ++counts.at(gold[k]).at(predicted[k]);
  }

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

inline void write_confusion(std::ostream& out, const ConfusionMatrix& cm) {
  const std::size_t m = cm.counts.size();
  out << "gold\\pred";
  for (std::size_t j = 0; j < m; ++j) out << '\t' << label_name(cm.scheme, static_cast<LabelId>(j));
  out << '\n';
  for (std::size_t i = 0; i < m; ++i) {
    out << label_name(cm.scheme, static_cast<LabelId>(i));
    for (std::size_t j = 0; j < m; ++j) out << '\t' << cm.counts[i][j];
    out << '\n';
  }
}

inline nlohmann::ordered_json confusion_json(const ConfusionMatrix& cm) {
  nlohmann::ordered_json j;
  j["scheme"] = scheme_name(cm.scheme);
  auto labels = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < cm.counts.size(); ++i) labels.push_back(label_name(cm.scheme, static_cast<LabelId>(i)));
  j["labels"] = labels;
  j["counts"] = cm.counts;
  return j;
}

// ---- cross-validation -------------------------------------------------------

// Labels for `pairs` of `test`, having trained on `train`.
using Learner =
    std::function<std::vector<LabelId>(const Corpus& train, const Corpus& test, const std::vector<EventPair>& pairs)>;

struct FoldResult {
  std::vector<std::string> test_docs;
  std::size_t pairs = 0;
  double accuracy = 0.0;
  ConfusionMatrix confusion;
};

struct CrossValidationResult {
  std::vector<FoldResult> folds;
  double mean_accuracy = 0.0;
};

// Document indices of each fold after dropping the holdout ids: a seeded
// shuffle dealt round-robin.
inline std::vector<std::vector<std::size_t>> make_folds(const Corpus& corpus, std::size_t folds, std::uint64_t seed,
                                                        const std::vector<std::string>& holdout_docs = {}) {
  if (folds < 2) throw ValidationError("cross-validation needs at least 2 folds");
  const std::set<std::string> holdout(holdout_docs.begin(), holdout_docs.end());
  std::vector<std::size_t> docs;
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    if (!holdout.count(corpus[d].doc_id)) docs.push_back(d);
  }
  if (docs.size() < folds) {
    throw ValidationError(std::to_string(docs.size()) + " documents left after holdout, fewer than " +
                          std::to_string(folds) + " folds");
  }
  Rng rng = make_rng(seed);
  shuffle(std::span<std::size_t>(docs), rng);
  std::vector<std::vector<std::size_t>> out(folds);
  for (std::size_t k = 0; k < docs.size(); ++k) out[k % folds].push_back(docs[k]);
  for (auto& f : out) std::sort(f.begin(), f.end());
  return out;
}

inline CrossValidationResult cross_validate(const Corpus& corpus, Scheme scheme, const Learner& learner,
                                            std::size_t folds, std::uint64_t seed,
                                            const std::vector<std::string>& holdout_docs = {}) {
  const auto split = make_folds(corpus, folds, seed, holdout_docs);
  CrossValidationResult result;
  for (std::size_t f = 0; f < split.size(); ++f) {
    Corpus train;
    Corpus test;
    for (std::size_t g = 0; g < split.size(); ++g) {
      for (std::size_t d : split[g]) (g == f ? test : train).push_back(corpus[d]);
    }
    const auto pairs = collect_pairs(test);
    FoldResult fold;
    for (const auto& doc : test) fold.test_docs.push_back(doc.doc_id);
    fold.pairs = pairs.size();
    if (!pairs.empty()) {
      const auto gold = gold_labels(test, pairs, scheme);
      const auto predicted = learner(train, test, pairs);
      fold.accuracy = accuracy(predicted, gold);
      fold.confusion = ConfusionMatrix(scheme, predicted, gold);
    } else {
      fold.confusion = ConfusionMatrix(scheme, {}, {});
    }
    result.folds.push_back(std::move(fold));
  }
  double sum = 0.0;
  for (const auto& f : result.folds) sum += f.accuracy;
  result.mean_accuracy = sum / static_cast<double>(result.folds.size());
  return result;
}

// ---- stratified shuffling ---------------------------------------------------

struct SignificanceResult {
  double observed_diff = 0.0;
  std::size_t nc = 0;
  std::size_t nt = 0;
  double p_value = 1.0;
};

// Each trial swaps the two systems' outputs on every pair independently with
// probability 1/2 and counts trials whose accuracy gap is at least the
// observed one. Trial t draws from its own stream, so the result does not
// depend on `threads`.
inline SignificanceResult stratified_shuffling(std::span<const LabelId> a, std::span<const LabelId> b,
                                               std::span<const LabelId> gold, std::size_t nt, std::uint64_t seed,
                                               std::size_t threads = 1) {
  if (a.size() != gold.size() || b.size() != gold.size()) {
    throw ValidationError("significance test needs both systems to label the same pairs as gold");
  }
  if (gold.empty()) throw ValidationError("significance test on an empty pair set");
  if (nt == 0) throw ValidationError("significance test needs at least one shuffle");
  // Correct-count difference; only pairs where exactly one system is right
  // move it when swapped.
  std::vector<std::int8_t> delta(gold.size());
  std::int64_t observed = 0;
  for (std::size_t k = 0; k < gold.size(); ++k) {
    delta[k] = static_cast<std::int8_t>((a[k] == gold[k]) - (b[k] == gold[k]));
    observed += delta[k];
  }
  const std::int64_t target = observed < 0 ? -observed : observed;

  const auto run = [&](std::size_t begin, std::size_t end) {
    std::size_t hits = 0;
    for (std::size_t t = begin; t < end; ++t) {
      Rng rng = make_rng(seed, t);
      std::int64_t diff = 0;
      std::uint64_t bits = 0;
      for (std::size_t k = 0; k < delta.size(); ++k) {
        if (k % 64 == 0) bits = rng();
        const bool swap = (bits >> (k % 64)) & 1u;
        diff += swap ? -delta[k] : delta[k];
      }
      hits += (diff < 0 ? -diff : diff) >= target;
    }
    return hits;
  };

  std::size_t nc = 0;
  threads = std::max<std::size_t>(1, std::min(threads, nt));
  if (threads == 1) {
    nc = run(0, nt);
  } else {
    std::vector<std::size_t> partial(threads, 0);
    std::vector<std::thread> workers;
    for (std::size_t w = 0; w < threads; ++w) {
      workers.emplace_back([&, w] { partial[w] = run(nt * w / threads, nt * (w + 1) / threads); });
    }
    for (auto& w : workers) w.join();
    for (std::size_t x : partial) nc += x;
  }
  SignificanceResult r;
  r.observed_diff = static_cast<double>(target) / static_cast<double>(gold.size());
  r.nc = nc;
  r.nt = nt;
  r.p_value = static_cast<double>(nc + 1) / static_cast<double>(nt + 1);
  return r;
}

inline SignificanceResult stratified_shuffling(const std::vector<Prediction>& a, const std::vector<Prediction>& b,
                                               const std::vector<Prediction>& gold, std::size_t nt,
                                               std::uint64_t seed, std::size_t threads = 1) {
  const auto aligned = align_predictions({a, b}, gold);
  return stratified_shuffling(aligned.systems[0], aligned.systems[1], aligned.gold, nt, seed, threads);
}

// ---- reports ----------------------------------------------------------------

inline nlohmann::ordered_json significance_json(const SignificanceResult& r) {
  nlohmann::ordered_json j;
  j["observed_diff"] = r.observed_diff;
  j["nc"] = r.nc;
  j["nt"] = r.nt;
  j["p_value"] = r.p_value;
  return j;
}

inline nlohmann::ordered_json cross_validation_json(const CrossValidationResult& r) {
  nlohmann::ordered_json j;
  auto folds = nlohmann::ordered_json::array();
  for (const auto& f : r.folds) {
    nlohmann::ordered_json fj;
    fj["test_docs"] = f.test_docs;
    fj["pairs"] = f.pairs;
    fj["accuracy"] = f.accuracy;
    fj["confusion"] = confusion_json(f.confusion);
    folds.push_back(fj);
  }
  j["folds"] = folds;
  j["mean_accuracy"] = r.mean_accuracy;
  return j;
}

}  // namespace tlink
