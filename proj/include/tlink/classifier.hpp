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

// One-vs-one linear max-margin classifier.
//
// Each unordered label pair (i, j), i < j, gets a hinge-loss separator trained
// by Pegasos-style stochastic subgradient descent on the examples of those two
// labels only. The bias is a constant feature and is regularized with the
// weights. Positive distance votes for i.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "tlink/error.hpp"
#include "tlink/features.hpp"
#include "tlink/labels.hpp"
#include "tlink/random.hpp"
#include "tlink/text.hpp"

namespace tlink {

struct TrainConfig {
  std::size_t epochs = 50;
  double lambda = 1e-4;
  std::uint64_t seed = 1;
};

struct Example {
  SparseVector x;
  LabelId label = 0;
  bool intra = true;  // both events in one sentence
};

struct DecisionHyperplane {
  LabelId positive = 0;
  LabelId negative = 1;
  std::vector<double> weights;
  double bias = 0.0;

  friend bool operator==(const DecisionHyperplane&, const DecisionHyperplane&) = default;
};

// m(m-1)/2 hyperplanes ordered by (positive, negative).
using HyperplaneBank = std::vector<DecisionHyperplane>;

enum class Routing : std::uint8_t { kSingle, kIntraInter };

struct OvoLinearModel {
  Scheme scheme = Scheme::kCoarse3;
  Routing routing = Routing::kSingle;
  HyperplaneBank bank;                  // single model, or intra-sentence pairs
  std::optional<HyperplaneBank> inter;  // inter-sentence pairs

  std::size_t labels() const { return label_count(scheme); }
  const HyperplaneBank& bank_for(bool intra) const {
    return (routing == Routing::kIntraInter && !intra && inter) ? *inter : bank;
  }

  friend bool operator==(const OvoLinearModel&, const OvoLinearModel&) = default;
};

struct Classification {
  LabelId label = 0;
  std::vector<std::size_t> votes;
};

inline double distance(const DecisionHyperplane& h, const SparseVector& x) {
  return x.dot(h.weights) + h.bias;
}

inline std::size_t pair_index(std::size_t m, std::size_t i, std::size_t j) {
  // Position of (i, j), i < j, in row-major upper-triangle order.
  return i * m - i * (i + 1) / 2 + (j - i - 1);
}

namespace detail {

inline DecisionHyperplane train_separator(std::span<const Example> data, LabelId pos, LabelId neg,
                                          const TrainConfig& config, std::uint64_t stream) {
  std::vector<std::size_t> order;
  std::size_t dims = 0;
  for (std::size_t k = 0; k < data.size(); ++k) {
    if (data[k].label != pos && data[k].label != neg) continue;
    order.push_back(k);
    if (!data[k].x.entries.empty()) dims = std::max<std::size_t>(dims, data[k].x.entries.back().first + 1);
  }
  // w = scale * v keeps the shrink step O(1).
  std::vector<double> v(dims, 0.0);
  double scale = 1.0;
  double bias = 0.0;  // also scaled
  Rng rng = make_rng(config.seed, stream);
  std::size_t t = 0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle(std::span<std::size_t>(order), rng);
    for (std::size_t k : order) {
      ++t;
      const Example& ex = data[k];
      const double y = ex.label == pos ? 1.0 : -1.0;
      const double eta = 1.0 / (config.lambda * static_cast<double>(t));
      const double margin = y * scale * (ex.x.dot(v) + bias);
      scale *= 1.0 - eta * config.lambda;
      if (scale <= 0.0) {
        std::fill(v.begin(), v.end(), 0.0);
        bias = 0.0;
        scale = 1.0;
      }
      if (margin < 1.0) {
        for (const auto& [i, val] : ex.x.entries) v[i] += eta * y * val / scale;
        bias += eta * y / scale;
      }
    }
  }
  for (double& w : v) w *= scale;
  return {pos, neg, std::move(v), bias * scale};
}

inline HyperplaneBank train_bank(std::span<const Example> data, std::size_t m,
                                 const TrainConfig& config) {
  HyperplaneBank bank;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      bank.push_back(train_separator(data, static_cast<LabelId>(i), static_cast<LabelId>(j), config,
                                     pair_index(m, i, j)));
    }
  }
  return bank;
}

inline std::optional<LabelId> missing_label(std::span<const Example> data, std::size_t m) {
  std::vector<bool> seen(m, false);
  for (const auto& ex : data) seen.at(ex.label) = true;
  for (std::size_t l = 0; l < m; ++l) {
    if (!seen[l]) return static_cast<LabelId>(l);
  }
  return std::nullopt;
}

}  // namespace detail

// With kIntraInter, a bank whose subset lacks some label is trained on all
// the data instead.
inline OvoLinearModel train(std::span<const Example> data, Scheme scheme, const TrainConfig& config,
                            Routing routing = Routing::kSingle) {
  const std::size_t m = label_count(scheme);
  if (auto l = detail::missing_label(data, m)) {
    throw ValidationError("cannot train: no examples of class " + std::string(label_name(scheme, *l)));
  }
  OvoLinearModel model;
  model.scheme = scheme;
  model.routing = routing;
  if (routing == Routing::kSingle) {
    model.bank = detail::train_bank(data, m, config);
    return model;
  }
  std::vector<Example> intra;
  std::vector<Example> inter;
  for (const auto& ex : data) (ex.intra ? intra : inter).push_back(ex);
  const auto subset_bank = [&](const std::vector<Example>& subset) {
    return detail::missing_label(subset, m) ? detail::train_bank(data, m, config)
                                            : detail::train_bank(subset, m, config);
  };
  model.bank = subset_bank(intra);
  model.inter = subset_bank(inter);
  return model;
}

inline Classification classify(const OvoLinearModel& model, const SparseVector& x, bool intra = true) {
  Classification out;
  out.votes.assign(model.labels(), 0);
  for (const auto& h : model.bank_for(intra)) {
    ++out.votes[distance(h, x) >= 0.0 ? h.positive : h.negative];
  }
  const auto best = std::max_element(out.votes.begin(), out.votes.end());
  out.label = static_cast<LabelId>(best - out.votes.begin());
  return out;
}

// Sum of the distances to the m-1 hyperplanes that separate `label` from the
// other classes, each signed towards `label`, in absolute value.
inline double confidence_for(const OvoLinearModel& model, const SparseVector& x, LabelId label,
                             bool intra = true) {
  double sum = 0.0;
  for (const auto& h : model.bank_for(intra)) {
    if (h.positive == label) sum += distance(h, x);
    if (h.negative == label) sum -= distance(h, x);
  }
  return std::abs(sum);
}

inline double confidence(const OvoLinearModel& model, const SparseVector& x, bool intra = true) {
  return confidence_for(model, x, classify(model, x, intra).label, intra);
}

// Per-hyperplane average, for reports.
inline double normalized_confidence(const OvoLinearModel& model, const SparseVector& x, bool intra = true) {
  const std::size_t m = model.labels();
  return m > 1 ? confidence(model, x, intra) / static_cast<double>(m - 1) : 0.0;
}

// ---- model file -------------------------------------------------------------

namespace detail {

inline void write_bank(std::ostream& out, std::string_view name, const HyperplaneBank& bank) {
  out << "bank " << name << ' ' << bank.size() << '\n';
  for (const auto& h : bank) {
    std::size_t nnz = 0;
    for (double w : h.weights) nnz += w != 0.0;
    out << "plane " << int(h.positive) << ' ' << int(h.negative) << ' ' << h.weights.size() << ' '
        << format_double(h.bias) << ' ' << nnz;
    for (std::size_t i = 0; i < h.weights.size(); ++i) {
      if (h.weights[i] != 0.0) out << ' ' << i << ':' << format_double(h.weights[i]);
    }
    out << '\n';
  }
}

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  std::vector<std::string_view> next(std::string_view what) {
    if (!std::getline(in_, line_)) throw ParseError("model file: missing " + std::string(what), line_no_ + 1);
    ++line_no_;
    return split(line_, ' ');
  }

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError("model file: " + msg, line_no_); }

  template <typename Int>
  Int integer(std::string_view s) const {
    Int v{};
    if (!parse_int(s, v)) fail("bad integer '" + std::string(s) + "'");
    return v;
  }

  double real(std::string_view s) const {
    double v = 0.0;
    if (!parse_double(s, v)) fail("bad number '" + std::string(s) + "'");
    return v;
  }

 private:
  std::istream& in_;
  std::string line_;
  std::size_t line_no_ = 0;
};

inline HyperplaneBank read_bank(LineReader& reader, std::string_view name, std::size_t m) {
  const auto head = reader.next("bank header");
  if (head.size() != 3 || head[0] != "bank" || head[1] != name) reader.fail("expected 'bank " + std::string(name) + "'");
  const auto count = reader.integer<std::size_t>(head[2]);
  if (count != m * (m - 1) / 2) reader.fail("wrong hyperplane count");
  HyperplaneBank bank;
  for (std::size_t k = 0; k < count; ++k) {
    const auto f = reader.next("plane");
    if (f.size() < 6 || f[0] != "plane") reader.fail("expected 'plane'");
    DecisionHyperplane h;
    h.positive = reader.integer<LabelId>(f[1]);
    h.negative = reader.integer<LabelId>(f[2]);
    if (h.positive >= m || h.negative >= m || h.positive == h.negative) reader.fail("bad class pair");
    h.weights.assign(reader.integer<std::size_t>(f[3]), 0.0);
    h.bias = reader.real(f[4]);
    const auto nnz = reader.integer<std::size_t>(f[5]);
    if (f.size() != 6 + nnz) reader.fail("weight count mismatch");
    for (std::size_t e = 0; e < nnz; ++e) {
      const auto colon = f[6 + e].find(':');
      if (colon == std::string_view::npos) reader.fail("expected index:weight");
      const auto i = reader.integer<std::size_t>(f[6 + e].substr(0, colon));
      if (i >= h.weights.size()) reader.fail("weight index out of range");
      h.weights[i] = reader.real(f[6 + e].substr(colon + 1));
    }
    bank.push_back(std::move(h));
  }
  return bank;
}

}  // namespace detail

inline void save_model(std::ostream& out, const OvoLinearModel& model) {
  out << "tlink-ovo 1\n";
  out << "scheme " << scheme_name(model.scheme) << '\n';
  out << "routing " << (model.routing == Routing::kSingle ? "single" : "intra_inter") << '\n';
  detail::write_bank(out, "main", model.bank);
  if (model.inter) detail::write_bank(out, "inter", *model.inter);
}

inline OvoLinearModel load_model(std::istream& in) {
  detail::LineReader reader(in);
  const auto magic = reader.next("header");
  if (magic.size() != 2 || magic[0] != "tlink-ovo" || magic[1] != "1") reader.fail("not a tlink-ovo v1 model");
  OvoLinearModel model;
  const auto scheme = reader.next("scheme");
  if (scheme.size() != 2 || scheme[0] != "scheme") reader.fail("expected 'scheme'");
  model.scheme = parse_scheme(scheme[1]);
  const auto routing = reader.next("routing");
  if (routing.size() != 2 || routing[0] != "routing") reader.fail("expected 'routing'");
  if (routing[1] == "single") {
    model.routing = Routing::kSingle;
  } else if (routing[1] == "intra_inter") {
    model.routing = Routing::kIntraInter;
  } else {
    reader.fail("unknown routing");
  }
  const std::size_t m = model.labels();
  model.bank = detail::read_bank(reader, "main", m);
  if (model.routing == Routing::kIntraInter) model.inter = detail::read_bank(reader, "inter", m);
  return model;
}

}  // namespace tlink
