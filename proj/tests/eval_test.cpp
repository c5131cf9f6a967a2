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

#include "tlink/eval.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "test_util.hpp"

namespace tlink {
namespace {

using testing::link;
using testing::make_document;
using testing::make_event;

TEST(Accuracy, SimpleFractions) {
  const std::vector<LabelId> gold = {0, 1, 2, 1};
  EXPECT_DOUBLE_EQ(accuracy(gold, gold), 1.0);
  EXPECT_DOUBLE_EQ(accuracy(std::vector<LabelId>{1, 2, 0, 0}, gold), 0.0);
  EXPECT_DOUBLE_EQ(accuracy(std::vector<LabelId>{0, 1, 2, 2}, gold), 0.75);
  EXPECT_THROW(accuracy(std::vector<LabelId>{0}, gold), ValidationError);
}

Prediction pred(std::string doc, std::string a, std::string b, Coarse3 label) {
  return {std::move(doc), std::move(a), std::move(b), make_label(label), 0.5};
}

TEST(Accuracy, MismatchedPairSetsNameTheDifference) {
  const std::vector<Prediction> gold = {pred("d", "a", "b", Coarse3::kBefore), pred("d", "b", "c", Coarse3::kAfter)};
  std::vector<Prediction> mine = {pred("d", "b", "c", Coarse3::kAfter), pred("d", "a", "b", Coarse3::kOverlap)};
  EXPECT_DOUBLE_EQ(accuracy(mine, gold), 0.5);
  mine[1].target = "x";
  try {
    accuracy(mine, gold);
    FAIL();
  } catch (const ValidationError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("d:a->x"), std::string::npos);
    EXPECT_NE(what.find("d:a->b"), std::string::npos);
  }
  mine[1] = {"d", "a", "b", make_label(Norm6::kBefore), 1.0};
  EXPECT_THROW(accuracy(mine, gold), ValidationError);
}

TEST(MajorityBaseline, UniformThreeWayPicksFirstLabel) {
  Corpus corpus = {make_document("d", {make_event("a", 0, 0, "x"), make_event("b", 0, 1, "y"),
                                       make_event("c", 0, 2, "z")},
                                 {link("a", "b", Coarse3::kAfter), link("b", "c", Coarse3::kOverlap),
                                  link("a", "c", Coarse3::kBefore)})};
  const auto m = majority_baseline(corpus, Scheme::kCoarse3);
  EXPECT_EQ(m.label, static_cast<LabelId>(Coarse3::kBefore));
  EXPECT_DOUBLE_EQ(m.accuracy, 1.0 / 3);
  EXPECT_THROW(majority_baseline({}, Scheme::kCoarse3), ValidationError);
}

TEST(ConfusionMatrix, CountsGoldByPredicted) {
  const ConfusionMatrix cm(Scheme::kCoarse3, std::vector<LabelId>{0, 0, 2, 1}, std::vector<LabelId>{0, 1, 2, 1});
  EXPECT_EQ(cm.counts, (std::vector<std::vector<std::size_t>>{{1, 0, 0}, {1, 1, 0}, {0, 0, 1}}));
  std::ostringstream out;
  write_confusion(out, cm);
  EXPECT_EQ(out.str(), "gold\\pred\tBEFORE\tAFTER\tOVERLAP\nBEFORE\t1\t0\t0\nAFTER\t1\t1\t0\nOVERLAP\t0\t0\t1\n");
}

Corpus one_link_documents(std::size_t n) {
  Corpus corpus;
  for (std::size_t d = 0; d < n; ++d) {
    const Coarse3 label = d % 3 == 0 ? Coarse3::kAfter : Coarse3::kOverlap;
    corpus.push_back(make_document("doc" + std::to_string(d), {make_event("a", 0, 0, "x"), make_event("b", 0, 1, "y")},
                                   {link("a", "b", label)}));
  }
  return corpus;
}

TEST(CrossValidation, FoldsPartitionTheDocuments) {
  const Corpus corpus = one_link_documents(10);
  const auto folds = make_folds(corpus, 5, 3);
  std::multiset<std::size_t> seen;
  for (const auto& f : folds) {
    EXPECT_EQ(f.size(), 2u);
    seen.insert(f.begin(), f.end());
  }
  EXPECT_EQ(seen, (std::multiset<std::size_t>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9}));
  EXPECT_EQ(make_folds(corpus, 5, 3), folds);
  EXPECT_NE(make_folds(corpus, 5, 4), folds);
}

TEST(CrossValidation, HoldoutDocumentsAreNeverUsed) {
  const Corpus corpus = one_link_documents(12);
  const std::vector<std::string> holdout = {"doc0", "doc5"};
  std::size_t tested = 0;
  const Learner spy = [&](const Corpus& train, const Corpus& test, const std::vector<EventPair>& pairs) {
    for (const Corpus* c : {&train, &test}) {
      for (const auto& doc : *c) {
        EXPECT_NE(doc.doc_id, "doc0");
        EXPECT_NE(doc.doc_id, "doc5");
      }
    }
    tested += test.size();
    return std::vector<LabelId>(pairs.size(), 0);
  };
  cross_validate(corpus, Scheme::kCoarse3, spy, 5, 1, holdout);
  EXPECT_EQ(tested, 10u);
  EXPECT_THROW(make_folds(corpus, 11, 1, holdout), ValidationError);
  EXPECT_THROW(make_folds(corpus, 1, 1), ValidationError);
}

TEST(CrossValidation, ConstantLearnerMatchesLabelShare) {
  // 10 one-link documents: doc0, doc3, doc6, doc9 are AFTER, the rest OVERLAP.
  const Corpus corpus = one_link_documents(10);
  const Learner overlap = [](const Corpus&, const Corpus&, const std::vector<EventPair>& pairs) {
    return std::vector<LabelId>(pairs.size(), static_cast<LabelId>(Coarse3::kOverlap));
  };
  const auto r = cross_validate(corpus, Scheme::kCoarse3, overlap, 5, 9);
  EXPECT_NEAR(r.mean_accuracy, 0.6, 1e-12);
  std::size_t total = 0;
  for (const auto& f : r.folds) total += f.confusion.counts[1][2] + f.confusion.counts[2][2];
  EXPECT_EQ(total, 10u);
}

TEST(Shuffling, IdenticalSystemsGiveOne) {
  const std::vector<LabelId> a = {0, 1, 2, 2, 1};
  const std::vector<LabelId> gold = {0, 0, 2, 1, 1};
  const auto r = stratified_shuffling(a, a, gold, 500, 1);
  EXPECT_EQ(r.nc, 500u);
  EXPECT_DOUBLE_EQ(r.p_value, 1.0);
  EXPECT_DOUBLE_EQ(r.observed_diff, 0.0);
}

// Fraction of the 2^n swap patterns whose accuracy gap reaches the observed one.
double exact_p(const std::vector<LabelId>& a, const std::vector<LabelId>& b, const std::vector<LabelId>& gold) {
  const std::size_t n = gold.size();
  const auto gap = [&](const std::vector<LabelId>& x, const std::vector<LabelId>& y) {
    double cx = 0, cy = 0;
    for (std::size_t k = 0; k < n; ++k) {
      cx += x[k] == gold[k];
      cy += y[k] == gold[k];
    }
    return std::abs(cx - cy) / static_cast<double>(n);
  };
  const double observed = gap(a, b);
  std::size_t hits = 0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    std::vector<LabelId> x = a, y = b;
    for (std::size_t k = 0; k < n; ++k) {
      if ((mask >> k) & 1) std::swap(x[k], y[k]);
    }
    hits += gap(x, y) >= observed - 1e-12;
  }
  return static_cast<double>(hits) / static_cast<double>(std::size_t{1} << n);
}

TEST(Shuffling, ThreePairsAgreeWithExhaustiveEnumeration) {
  const std::vector<LabelId> gold = {0, 0, 0};
  const std::vector<std::pair<std::vector<LabelId>, std::vector<LabelId>>> cases = {
      {{0, 0, 1}, {1, 1, 1}}, {{0, 0, 0}, {1, 1, 1}}, {{0, 2, 1}, {1, 0, 2}}};
  const std::vector<double> expected = {0.5, 0.25, 1.0};
  for (std::size_t c = 0; c < cases.size(); ++c) {
    const auto& [a, b] = cases[c];
    const double exact = exact_p(a, b, gold);
    EXPECT_DOUBLE_EQ(exact, expected[c]);
    const std::size_t nt = 20000;
    const auto r = stratified_shuffling(a, b, gold, nt, 77);
    const double sampled = static_cast<double>(r.nc) / static_cast<double>(nt);
    const double se = std::sqrt(std::max(exact * (1 - exact), 1e-12) / static_cast<double>(nt));
    EXPECT_LE(std::abs(sampled - exact), 3 * se + 1e-12) << c;
  }
}

TEST(Shuffling, PerfectAgainstRandomIsSignificant) {
  Rng rng = make_rng(5);
  std::vector<LabelId> gold, random;
  for (int k = 0; k < 1000; ++k) {
    gold.push_back(static_cast<LabelId>(uniform_index(rng, 3)));
    random.push_back(static_cast<LabelId>(uniform_index(rng, 3)));
  }
  const auto r = stratified_shuffling(gold, random, gold, 10000, 2);
  EXPECT_LE(r.p_value, 0.001);
  EXPECT_GT(r.observed_diff, 0.5);
}

TEST(Shuffling, SymmetricDeterministicAndThreadIndependent) {
  Rng rng = make_rng(8);
  std::vector<LabelId> gold, a, b;
  for (int k = 0; k < 300; ++k) {
    gold.push_back(static_cast<LabelId>(uniform_index(rng, 3)));
    a.push_back(bernoulli(rng, 0.55) ? gold.back() : static_cast<LabelId>(uniform_index(rng, 3)));
    b.push_back(bernoulli(rng, 0.5) ? gold.back() : static_cast<LabelId>(uniform_index(rng, 3)));
  }
  const auto ab = stratified_shuffling(a, b, gold, 3000, 4);
  EXPECT_EQ(stratified_shuffling(b, a, gold, 3000, 4).nc, ab.nc);
  EXPECT_EQ(stratified_shuffling(a, b, gold, 3000, 4, 3).nc, ab.nc);
  EXPECT_GT(ab.p_value, 0.0);
  EXPECT_LE(ab.p_value, 1.0);
  EXPECT_DOUBLE_EQ(ab.p_value, static_cast<double>(ab.nc + 1) / 3001.0);
}

TEST(Shuffling, LargerGapNeverRaisesP) {
  // Same draws (seed, length); make system a right on more pairs each step.
  Rng rng = make_rng(10);
  std::vector<LabelId> gold, a, b;
  for (int k = 0; k < 200; ++k) {
    gold.push_back(static_cast<LabelId>(uniform_index(rng, 3)));
    b.push_back(bernoulli(rng, 0.5) ? gold.back() : static_cast<LabelId>((gold.back() + 1) % 3));
    a.push_back(b.back());
  }
  double last = 1.0;
  for (int k = 0; k < 200; k += 20) {
    for (int j = k; j < k + 20; ++j) a[j] = gold[j];
    const double p = stratified_shuffling(a, b, gold, 2000, 6).p_value;
    EXPECT_LE(p, last);
    last = p;
  }
}

TEST(Predictions, FileRoundTripAndErrors) {
  const std::vector<Prediction> preds = {pred("d1", "e1", "e2", Coarse3::kBefore),
                                         {"d2", "x", "y", make_label(Norm6::kIncludes), 0.125}};
  std::stringstream ss;
  write_predictions(ss, preds);
  EXPECT_EQ(read_predictions(ss), preds);
  std::istringstream no_header("d\ta\tb\tcoarse3\tBEFORE\t1\n");
  EXPECT_THROW(read_predictions(no_header), ParseError);
  std::istringstream bad_label(std::string(kPredictionHeader) + "\nd\ta\tb\tcoarse3\tLATER\t1\n");
  try {
    read_predictions(bad_label);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

}  // namespace
}  // namespace tlink
