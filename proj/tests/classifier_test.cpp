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

#include "tlink/classifier.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

namespace tlink {
namespace {

SparseVector dense(std::initializer_list<double> xs) {
  SparseVector v;
  std::uint32_t i = 0;
  for (double x : xs) {
    if (x != 0.0) v.entries.emplace_back(i, x);
    ++i;
  }
  return v;
}

// Three hand-set hyperplanes over two dimensions.
OvoLinearModel hand_model() {
  OvoLinearModel m;
  m.scheme = Scheme::kCoarse3;
  m.bank = {{0, 1, {1.0, 0.0}, 0.0}, {0, 2, {0.0, 1.0}, -1.0}, {1, 2, {1.0, 1.0}, 0.5}};
  return m;
}

// Points around three well separated centres.
std::vector<Example> blobs(std::size_t n, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  const double pi = std::acos(-1.0);
  std::vector<Example> data;
  for (std::size_t k = 0; k < n; ++k) {
    const auto label = static_cast<LabelId>(k % 3);
    const double angle = 2.0 * pi * label / 3.0;
    const double r = 1.5 * std::sqrt(uniform_real(rng));
    const double t = 2.0 * pi * uniform_real(rng);
    data.push_back({dense({5.0 * std::cos(angle) + r * std::cos(t), 5.0 * std::sin(angle) + r * std::sin(t)}),
                    label});
  }
  return data;
}

double accuracy(const OvoLinearModel& model, const std::vector<Example>& data) {
  std::size_t right = 0;
  for (const auto& ex : data) right += classify(model, ex.x, ex.intra).label == ex.label;
  return static_cast<double>(right) / static_cast<double>(data.size());
}

TEST(Distance, DotProductPlusBias) {
  const DecisionHyperplane h{0, 1, {1.0, 0.0}, 0.0};
  EXPECT_DOUBLE_EQ(distance(h, dense({2.0, 5.0})), 2.0);
  const DecisionHyperplane g{0, 1, {3.0, 4.0}, -0.25};
  EXPECT_DOUBLE_EQ(distance(g, SparseVector{}), -0.25);
}

TEST(Distance, HandSetThreeClassModel) {
  const auto m = hand_model();
  const auto x = dense({3.0, 3.0});
  EXPECT_DOUBLE_EQ(distance(m.bank[0], x), 3.0);
  EXPECT_DOUBLE_EQ(distance(m.bank[1], x), 2.0);
  EXPECT_DOUBLE_EQ(distance(m.bank[2], x), 6.5);
}

TEST(Classify, HandSetVotesAndConfidence) {
  const auto m = hand_model();
  const auto x = dense({3.0, 3.0});
  const auto c = classify(m, x);
  EXPECT_EQ(c.label, 0);
  EXPECT_EQ(c.votes, (std::vector<std::size_t>{2, 1, 0}));
  EXPECT_DOUBLE_EQ(confidence(m, x), 5.0);
  EXPECT_DOUBLE_EQ(confidence_for(m, x, 2), 8.5);
  EXPECT_DOUBLE_EQ(normalized_confidence(m, x), 2.5);
}

TEST(Classify, CyclicTieGoesToFirstLabel) {
  const auto m = hand_model();
  // d01 = 2 votes 0, d02 = -2 votes 2, d12 = 1.5 votes 1.
  const auto c = classify(m, dense({2.0, -1.0}));
  EXPECT_EQ(c.votes, (std::vector<std::size_t>{1, 1, 1}));
  EXPECT_EQ(c.label, 0);
}

TEST(Classify, TwoClassVoteAndConfidence) {
  OvoLinearModel m;
  m.scheme = Scheme::kCoarse3;
  m.bank = {{0, 1, {2.0}, -1.0}, {0, 2, {}, 0.0}, {1, 2, {}, 0.0}};
  // Only the first plane matters when label 2 cannot win.
  const auto x = dense({-3.0});
  const auto c = classify(m, x);
  EXPECT_EQ(c.label, 1);
  EXPECT_DOUBLE_EQ(std::abs(distance(m.bank[0], x)), 7.0);
}

TEST(Classify, VotesSumAndScaleInvariance) {
  auto m = hand_model();
  auto scaled = m;
  for (auto& h : scaled.bank) {
    for (double& w : h.weights) w *= 3.5;
    h.bias *= 3.5;
  }
  Rng rng = make_rng(3);
  for (int k = 0; k < 500; ++k) {
    const auto x = dense({uniform_real(rng) * 10 - 5, uniform_real(rng) * 10 - 5});
    const auto c = classify(m, x);
    EXPECT_EQ(c.votes[0] + c.votes[1] + c.votes[2], 3u);
    EXPECT_EQ(classify(scaled, x).label, c.label);
    EXPECT_GE(confidence(m, x), 0.0);
  }
}

TEST(Train, OneHyperplanePerClassPair) {
  const auto data = blobs(30, 1);
  EXPECT_EQ(train(data, Scheme::kCoarse3, {}).bank.size(), 3u);
  std::vector<Example> six;
  for (LabelId l = 0; l < 6; ++l) six.push_back({dense({double(l)}), l});
  EXPECT_EQ(train(six, Scheme::kNorm6, {}).bank.size(), 15u);
  EXPECT_EQ(pair_index(6, 4, 5), 14u);
}

TEST(Train, SeparableTwoClassToySet) {
  std::vector<Example> data;
  for (int k = 0; k < 40; ++k) {
    const double y = (k % 7) * 0.3;
    data.push_back({dense({1.0 + (k % 5) * 0.2, y}), 0});
    data.push_back({dense({-1.0 - (k % 3) * 0.2, y}), 1});
    data.push_back({dense({0.0, 40.0}), 2});
  }
  const auto model = train(data, Scheme::kCoarse3, {});
  EXPECT_DOUBLE_EQ(accuracy(model, data), 1.0);
}

TEST(Train, SeparableThreeClassAgreesWithGeneratingLabels) {
  const auto data = blobs(300, 7);
  EXPECT_DOUBLE_EQ(accuracy(train(data, Scheme::kCoarse3, {}), data), 1.0);
  EXPECT_DOUBLE_EQ(accuracy(train(data, Scheme::kCoarse3, {}), blobs(300, 8)), 1.0);
}

TEST(Train, DeterministicGivenSeed) {
  const auto data = blobs(90, 2);
  TrainConfig config;
  config.seed = 17;
  EXPECT_EQ(train(data, Scheme::kCoarse3, config), train(data, Scheme::kCoarse3, config));
  config.seed = 18;
  EXPECT_NE(train(data, Scheme::kCoarse3, config), train(data, Scheme::kCoarse3, {}));
}

TEST(Train, MissingClassIsNamed) {
  auto data = blobs(30, 1);
  std::erase_if(data, [](const Example& e) { return e.label == 2; });
  try {
    train(data, Scheme::kCoarse3, {});
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("OVERLAP"), std::string::npos);
  }
}

TEST(Train, IntraInterRoutingUsesSeparateBanks) {
  auto data = blobs(60, 4);
  // Inter-sentence examples with labels flipped between classes 0 and 1.
  auto inter = blobs(60, 5);
  for (auto& ex : inter) {
    ex.intra = false;
    if (ex.label < 2) ex.label = static_cast<LabelId>(1 - ex.label);
  }
  data.insert(data.end(), inter.begin(), inter.end());
  const auto model = train(data, Scheme::kCoarse3, {}, Routing::kIntraInter);
  ASSERT_TRUE(model.inter);
  EXPECT_DOUBLE_EQ(accuracy(model, data), 1.0);

  // An inter subset without OVERLAP falls back to the whole data.
  std::erase_if(data, [](const Example& e) { return !e.intra && e.label == 2; });
  const auto fallback = train(data, Scheme::kCoarse3, {}, Routing::kIntraInter);
  EXPECT_EQ(*fallback.inter, train(data, Scheme::kCoarse3, {}).bank);
}

TEST(ModelFile, RoundTripsExactly) {
  auto data = blobs(60, 9);
  for (std::size_t k = 0; k < data.size(); k += 2) data[k].intra = false;
  for (Routing routing : {Routing::kSingle, Routing::kIntraInter}) {
    const auto model = train(data, Scheme::kCoarse3, {}, routing);
    std::stringstream ss;
    save_model(ss, model);
    const std::string text = ss.str();
    const auto again = load_model(ss);
    EXPECT_EQ(again, model);
    std::ostringstream out;
    save_model(out, again);
    EXPECT_EQ(out.str(), text);
  }
}

TEST(ModelFile, RejectsTruncatedInput) {
  std::stringstream ss;
  save_model(ss, hand_model());
  std::string text = ss.str();
  text.resize(text.size() - 10);
  std::istringstream in(text);
  EXPECT_THROW(load_model(in), ParseError);
}

}  // namespace
}  // namespace tlink
