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

#include "tlink/bcdc.hpp"

#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "test_util.hpp"
#include "tlink/synth.hpp"

namespace tlink {
namespace {

using testing::make_document;
using testing::make_event;

Document text_doc(std::string id, std::vector<std::vector<std::string>> sentences) {
  Document d;
  d.doc_id = std::move(id);
  d.sentences = std::move(sentences);
  return d;
}

TEST(Retrieval, TfIdfMatchesHandComputation) {
  const Corpus pool = {text_doc("d1", {{"a", "A", "b"}}), text_doc("d2", {{"b", "c"}})};
  const auto index = build_index(pool);
  // idf(a) = log(3/2) + 1, idf(b) = 1; tf(a) = 2 -> 1 + log 2.
  EXPECT_NEAR(index.vector(0).at("a"), 0.9219069698164416, 1e-12);
  EXPECT_NEAR(index.vector(0).at("b"), 0.3874113305052739, 1e-12);
  EXPECT_EQ(index.document_frequency("b"), 2u);
  EXPECT_NEAR(index.vector(1).at("b") * index.vector(1).at("b") + index.vector(1).at("c") * index.vector(1).at("c"),
              1.0, 1e-12);
}

TEST(Retrieval, IdenticalDocumentsShareVectorsAndUnseenTermsWeighNothing) {
  const Corpus pool = {text_doc("d1", {{"x", "y", "y"}}), text_doc("d2", {{"x", "y", "y"}}),
                       text_doc("d3", {{"z"}})};
  const auto index = build_index(pool);
  EXPECT_EQ(index.vector(0), index.vector(1));
  const auto q = index.query_vector(text_doc("q", {{"x", "never"}}));
  EXPECT_EQ(q.count("never"), 0u);
  EXPECT_NEAR(q.at("x"), 1.0, 1e-12);
}

TEST(Retrieval, RankingSkipsSelfAndCapsAtPoolSize) {
  const Corpus pool = {text_doc("d1", {{"storm", "flood", "rain"}}), text_doc("d2", {{"vote", "poll"}}),
                       text_doc("d3", {{"storm", "flood", "rain", "wind"}}), text_doc("d4", {{"goal", "match"}})};
  const auto index = build_index(pool);
  const auto related = retrieve_related(index, pool[0], 10);
  ASSERT_EQ(related.size(), 3u);
  EXPECT_EQ(related[0].doc_id, "d3");
  for (const auto& r : related) EXPECT_NE(r.doc_id, "d1");
  EXPECT_THROW(retrieve_related(index, pool[0], 0), ValidationError);
  // Zero-score ties fall back to doc id order.
  EXPECT_EQ(related[1].doc_id, "d2");
  EXPECT_EQ(related[2].doc_id, "d4");
}

TEST(Retrieval, SyntheticTopicsAreRecovered) {
  SynthConfig c;
  c.topics = 10;
  c.documents = 200;
  const auto corpus = generate(c).corpus;
  const auto index = build_index(corpus);
  std::size_t same = 0;
  std::size_t total = 0;
  for (std::size_t q = 0; q < 20; ++q) {
    for (const auto& r : retrieve_related(index, corpus[q], 10)) {
      same += corpus[r.index].topic == corpus[q].topic;
      ++total;
    }
  }
  EXPECT_GE(static_cast<double>(same) / static_cast<double>(total), 0.9);
}

struct Fixture {
  Corpus train;
  Corpus pool;
  Corpus tests;
};

Fixture small_setup() {
  SynthConfig c;
  c.topics = 3;
  c.documents = 60;
  c.events_min = 5;
  c.events_max = 8;
  c.intra_sentence_fraction = 0.7;
  const auto corpus = generate(c).corpus;
  Fixture f;
  for (std::size_t k = 0; k < corpus.size(); ++k) (k < 20 ? f.train : k < 50 ? f.pool : f.tests).push_back(corpus[k]);
  return f;
}

BcdcConfig quick_config() {
  BcdcConfig cfg;
  cfg.related_docs = 5;
  cfg.confident_per_round = 6;
  cfg.max_rounds = 3;
  cfg.train.epochs = 10;
  return cfg;
}

TEST(Bootstrap, ZeroRoundsKeepsTheGeneralModel) {
  const auto f = small_setup();
  auto cfg = quick_config();
  const auto data = labeled_pairs(f.train, Scheme::kCoarse3, cfg.features);
  const auto general = train_bcdc_model(data, Scheme::kCoarse3, cfg);
  cfg.max_rounds = 0;
  const auto r = bootstrap(general, data, f.tests[0], f.pool, build_index(f.pool), cfg);
  EXPECT_TRUE(r.rounds.empty());
  EXPECT_EQ(r.model, general);
}

TEST(Bootstrap, PoolWithoutIntraSentencePairsInjectsNothing) {
  const auto f = small_setup();
  const auto cfg = quick_config();
  const auto data = labeled_pairs(f.train, Scheme::kCoarse3, cfg.features);
  const auto general = train_bcdc_model(data, Scheme::kCoarse3, cfg);
  const Corpus pool = {make_document("p1", {make_event("e1", 0, 0, "went"), make_event("e2", 1, 0, "came")}),
                       make_document("p2", {make_event("e1", 0, 0, "ran")})};
  const auto r = bootstrap(general, data, f.tests[0], pool, build_index(pool), cfg);
  EXPECT_TRUE(r.rounds.empty());
  EXPECT_EQ(r.model, general);
}

TEST(Bootstrap, LargeKFinishesInOneRound) {
  const auto f = small_setup();
  auto cfg = quick_config();
  cfg.confident_per_round = 100000;
  const auto data = labeled_pairs(f.train, Scheme::kCoarse3, cfg.features);
  const auto general = train_bcdc_model(data, Scheme::kCoarse3, cfg);
  const auto r = bootstrap(general, data, f.tests[0], f.pool, build_index(f.pool), cfg);
  ASSERT_EQ(r.rounds.size(), 1u);
  std::size_t candidates = 0;
  for (const auto& rel : r.related) candidates += event_pairs(f.pool[rel.index], true).size();
  EXPECT_EQ(r.rounds[0].injected.size(), candidates);
}

TEST(Bootstrap, SelectionGrowsWithoutRepeatsAndByConfidence) {
  const auto f = small_setup();
  const auto cfg = quick_config();
  const auto data = labeled_pairs(f.train, Scheme::kCoarse3, cfg.features);
  const auto general = train_bcdc_model(data, Scheme::kCoarse3, cfg);
  const auto r = bootstrap(general, data, f.tests[0], f.pool, build_index(f.pool), cfg);
  ASSERT_EQ(r.rounds.size(), cfg.max_rounds);
  std::set<std::string> seen;
  for (const auto& round : r.rounds) {
    EXPECT_EQ(round.injected.size(), cfg.confident_per_round);
    for (std::size_t k = 0; k < round.injected.size(); ++k) {
      EXPECT_TRUE(seen.insert(round.injected[k].key()).second) << round.injected[k].key();
      if (k > 0) {
        EXPECT_GE(round.injected[k - 1].confidence, round.injected[k].confidence);
      }
    }
  }
  std::set<std::string> related;
  for (const auto& rel : r.related) related.insert(rel.doc_id);
  for (const auto& round : r.rounds) {
    for (const auto& p : round.injected) EXPECT_EQ(related.count(p.doc_id), 1u);
  }
}

TEST(RunBcdc, NearDuplicateTestsReuseOneModel) {
  const auto f = small_setup();
  Document twin = f.tests[0];
  twin.doc_id = "twin";
  const Corpus tests = {f.tests[0], twin};
  const auto run = run_bcdc(f.train, tests, f.pool, Scheme::kCoarse3, quick_config());
  EXPECT_EQ(run.bootstraps, 1u);
  ASSERT_TRUE(run.documents[1].reused_from);
  EXPECT_EQ(*run.documents[1].reused_from, f.tests[0].doc_id);
  EXPECT_EQ(run.documents[1].predictions.size(), run.documents[0].predictions.size());

  auto cfg = quick_config();
  cfg.reuse_models_for_related_tests = false;
  EXPECT_EQ(run_bcdc(f.train, tests, f.pool, Scheme::kCoarse3, cfg).bootstraps, 2u);
}

TEST(RunBcdc, EmptyPoolFallsBackToTheGeneralModel) {
  const auto f = small_setup();
  const auto run = run_bcdc(f.train, f.tests, {}, Scheme::kCoarse3, quick_config());
  EXPECT_EQ(run.bootstraps, 0u);
  for (const auto& d : run.documents) {
    EXPECT_EQ(d.predictions, d.general_predictions);
    EXPECT_TRUE(d.rounds.empty());
  }
}

TEST(RunBcdc, ReportsAreDeterministic) {
  const auto f = small_setup();
  const auto a = bcdc_report_json(run_bcdc(f.train, f.tests, f.pool, Scheme::kCoarse3, quick_config()));
  const auto b = bcdc_report_json(run_bcdc(f.train, f.tests, f.pool, Scheme::kCoarse3, quick_config()));
  EXPECT_EQ(a.dump(), b.dump());
  EXPECT_EQ(a["documents"].size(), f.tests.size());
}

TEST(BcdcModelFile, RoundTrips) {
  const auto f = small_setup();
  const auto cfg = quick_config();
  const auto model = train_bcdc_model(labeled_pairs(f.train, Scheme::kCoarse3, cfg.features), Scheme::kCoarse3, cfg);
  std::stringstream io;
  save_bcdc_model(io, model);
  const auto back = load_bcdc_model(io);
  EXPECT_EQ(back, model);
  std::istringstream bad("tlink-bcdc 2\n");
  EXPECT_THROW(load_bcdc_model(bad), ParseError);
}

TEST(LabeledPairs, MarkSentenceRouting) {
  const Document doc = make_document(
      "d", {make_event("e1", 0, 0, "a"), make_event("e2", 0, 2, "b"), make_event("e3", 1, 0, "c")},
      {testing::link("e1", "e2", Coarse3::kBefore), testing::link("e2", "e3", Coarse3::kAfter)});
  const auto pairs = labeled_pairs({doc}, Scheme::kCoarse3, FeatureSet::kBcdcExtra);
  ASSERT_EQ(pairs.size(), 2u);
  EXPECT_TRUE(pairs[0].intra);
  EXPECT_FALSE(pairs[1].intra);
  EXPECT_EQ(event_pairs(doc, true).size(), 1u);
  EXPECT_EQ(event_pairs(doc, false).size(), 3u);
  EXPECT_THROW(labeled_pairs({doc}, Scheme::kNorm6, FeatureSet::kBcdcExtra), UnsupportedError);
}

TEST(Jaccard, SetOverlap) {
  EXPECT_DOUBLE_EQ(jaccard({"a", "b"}, {"b", "c"}), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(jaccard({}, {}), 1.0);
  EXPECT_DOUBLE_EQ(jaccard({"a"}, {"a", "a"}), 1.0);
}

}  // namespace
}  // namespace tlink
