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

// Repair of per-document predictions into consistent labelings: greedy
// best-first acceptance and an exact integer program.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "tlink/algebra.hpp"
#include "tlink/error.hpp"
#include "tlink/labels.hpp"
#include "tlink/text.hpp"

namespace tlink {

// Posterior over the scheme's labels for the edge's stored orientation. A
// pinned edge may only take its pinned label.
struct EdgeBelief {
  std::vector<double> posterior;
  std::optional<LabelId> pinned;
};

using WeightedGraph = BasicTemporalGraph<EdgeBelief>;

struct RepairResult {
  TemporalGraph graph;
  double objective = 0.0;
  // Edges for which every allowed label contradicted the accepted ones.
  std::vector<NodePair> flagged;
};

namespace detail {

inline void validate_beliefs(const WeightedGraph& g) {
  const std::size_t m = label_count(g.scheme());
  for (const auto& [pair, edge] : g.edges()) {
    const auto& p = edge.value.posterior;
    if (p.size() != m) throw ValidationError("edge posterior has the wrong number of labels");
    double sum = 0.0;
    for (double x : p) {
      if (!(x >= 0.0)) throw ValidationError("edge posterior has a negative or NaN entry");
      sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ValidationError("edge posterior does not sum to 1");
    if (edge.value.pinned && *edge.value.pinned >= m) throw ValidationError("pinned label out of range");
  }
}

// Allowed labels of an edge, most probable first; ties by label order.
inline std::vector<LabelId> ranked_labels(const EdgeBelief& b) {
  if (b.pinned) return {*b.pinned};
  std::vector<LabelId> order(b.posterior.size());
  std::iota(order.begin(), order.end(), LabelId{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](LabelId x, LabelId y) { return b.posterior[x] > b.posterior[y]; });
  return order;
}

inline double edge_confidence(const EdgeBelief& b) {
  if (b.pinned) return std::numeric_limits<double>::infinity();
  return *std::max_element(b.posterior.begin(), b.posterior.end());
}

inline TemporalGraph crisp_skeleton(const WeightedGraph& g) {
  return TemporalGraph(g.scheme(), g.nodes());
}

inline void add_oriented(TemporalGraph& out, NodePair pair, bool reversed, LabelId label) {
  if (reversed) {
    out.add_edge(pair.hi, pair.lo, label);
  } else {
    out.add_edge(pair.lo, pair.hi, label);
  }
}

}  // namespace detail

inline double labeling_objective(const WeightedGraph& g, const TemporalGraph& crisp) {
  double sum = 0.0;
  for (const auto& [pair, edge] : g.edges()) {
    const auto* c = crisp.find_edge(pair.lo, pair.hi);
    if (!c) throw ValidationError("labeling is missing an edge");
    LabelId label = c->value;
    if (c->reversed != edge.reversed) {
      throw ValidationError("labeling orientation differs from the weighted graph");
    }
    sum += edge.value.posterior[label];
  }
  return sum;
}

// ---- greedy best-first ------------------------------------------------------

inline RepairResult greedy_repair(const WeightedGraph& g) {
  detail::validate_beliefs(g);
  const Scheme scheme = g.scheme();
  struct Item {
    NodePair pair;
    const GraphEdge<EdgeBelief>* edge;
  };
  // SL: every edge, most confident first.
  std::vector<Item> sl;
  for (const auto& [pair, edge] : g.edges()) sl.push_back({pair, &edge});
  std::stable_sort(sl.begin(), sl.end(), [](const Item& a, const Item& b) {
    return detail::edge_confidence(a.edge->value) > detail::edge_confidence(b.edge->value);
  });

  PathConsistency fl(g.node_count());
  std::vector<std::vector<std::optional<AllenSet>>> accepted(
      g.node_count(), std::vector<std::optional<AllenSet>>(g.node_count()));
  RepairResult result{detail::crisp_skeleton(g), 0.0, {}};

  for (const Item& item : sl) {
    const auto& belief = item.edge->value;
    const auto candidates = detail::ranked_labels(belief);
    std::optional<LabelId> chosen;
    for (LabelId label : candidates) {
      PathConsistency trial = fl;
      if (trial.add(item.pair.lo, item.pair.hi, oriented_allen(scheme, label, item.edge->reversed))) {
        fl = std::move(trial);
        chosen = label;
        break;
      }
    }
    const std::size_t lo = item.pair.lo;
    const std::size_t hi = item.pair.hi;
    if (!chosen) {
      // Fewest violated triples against the accepted crisp edges.
      std::size_t best_violations = std::numeric_limits<std::size_t>::max();
      for (LabelId label : candidates) {
        const AllenSet image = oriented_allen(scheme, label, item.edge->reversed);
        std::size_t violations = 0;
        for (std::size_t k = 0; k < g.node_count(); ++k) {
          if (!accepted[lo][k] || !accepted[k][hi]) continue;
          violations += !image.intersects(allen_compose(*accepted[lo][k], *accepted[k][hi]));
        }
        if (violations < best_violations) {
          best_violations = violations;
          chosen = label;
        }
      }
      result.flagged.push_back(item.pair);
    }
    const AllenSet image = oriented_allen(scheme, *chosen, item.edge->reversed);
    accepted[lo][hi] = image;
    accepted[hi][lo] = image.converse();
    detail::add_oriented(result.graph, item.pair, item.edge->reversed, *chosen);
    result.objective += belief.posterior[*chosen];
  }
  std::sort(result.flagged.begin(), result.flagged.end());
  return result;
}

// ---- integer program --------------------------------------------------------

// x[a] + x[b] - sum x[c] <= 1.
struct TransitivityConstraint {
  std::size_t a = 0;
  std::size_t b = 0;
  std::vector<std::size_t> entailed;
};

struct IlpInstance {
  Scheme scheme = Scheme::kCoarse3;
  std::size_t labels = 0;
  std::size_t node_count = 0;
  std::vector<std::string> node_names;
  // Variable v = pair * labels + label.
  std::vector<NodePair> pairs;
  std::vector<bool> reversed;
  std::vector<double> objective;
  std::vector<bool> fixed_zero;
  std::vector<TransitivityConstraint> transitivity;

  std::size_t variable(std::size_t pair, LabelId label) const { return pair * labels + label; }
  std::size_t variable_count() const { return objective.size(); }
  // One exactly-one constraint per pair.
  std::size_t exactly_one_count() const { return pairs.size(); }
};

inline IlpInstance build_ilp(const WeightedGraph& g) {
  detail::validate_beliefs(g);
  IlpInstance inst;
  inst.scheme = g.scheme();
  inst.labels = label_count(g.scheme());
  inst.node_count = g.node_count();
  inst.node_names = g.nodes();
  std::map<NodePair, std::size_t> pair_index;
  for (const auto& [pair, edge] : g.edges()) {
    pair_index.emplace(pair, inst.pairs.size());
    inst.pairs.push_back(pair);
    inst.reversed.push_back(edge.reversed);
    for (std::size_t l = 0; l < inst.labels; ++l) {
      inst.objective.push_back(edge.value.posterior[l]);
      inst.fixed_zero.push_back(edge.value.pinned && *edge.value.pinned != l);
    }
  }
  // Image of pair p's label read from node x to node y.
  const auto image = [&](std::size_t p, LabelId label, std::size_t x) {
    const AllenSet s = oriented_allen(inst.scheme, label, inst.reversed[p]);
    return inst.pairs[p].lo == x ? s : s.converse();
  };
  const auto find = [&](std::size_t x, std::size_t y) -> std::optional<std::size_t> {
    auto it = pair_index.find({std::min(x, y), std::max(x, y)});
    if (it == pair_index.end()) return std::nullopt;
    return it->second;
  };
  const std::size_t n = g.node_count();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = i + 1; k < n; ++k) {
      const auto ik = find(i, k);
      if (!ik) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i || j == k) continue;
        const auto ij = find(i, j);
        const auto jk = find(j, k);
        if (!ij || !jk) continue;
        // i -> j -> k constrains (i, k); each triangle appears once per middle node.
        for (std::size_t m1 = 0; m1 < inst.labels; ++m1) {
          for (std::size_t m2 = 0; m2 < inst.labels; ++m2) {
            const AllenSet composed =
                allen_compose(image(*ij, static_cast<LabelId>(m1), i), image(*jk, static_cast<LabelId>(m2), j));
            TransitivityConstraint c{inst.variable(*ij, static_cast<LabelId>(m1)),
                                     inst.variable(*jk, static_cast<LabelId>(m2)),
                                     {}};
            for (std::size_t m3 = 0; m3 < inst.labels; ++m3) {
              if (image(*ik, static_cast<LabelId>(m3), i).intersects(composed)) {
                c.entailed.push_back(inst.variable(*ik, static_cast<LabelId>(m3)));
              }
            }
            if (c.entailed.size() < inst.labels) inst.transitivity.push_back(std::move(c));
          }
        }
      }
    }
  }
  return inst;
}

struct IlpSolution {
  std::vector<LabelId> labels;  // per pair
  double objective = 0.0;
  std::size_t nodes_explored = 0;
};

struct IlpOptions {
  // Prune partial labelings that path consistency already refutes. These act
  // as lazily generated global-consistency cuts; without them only the
  // triangle constraints of the instance are enforced.
  bool global_consistency = true;
};

namespace detail {

class BranchAndBound {
 public:
  BranchAndBound(const IlpInstance& inst, const IlpOptions& options)
      : inst_(inst), options_(options), assigned_(inst.pairs.size()) {
    const std::size_t p = inst.pairs.size();
    by_pair_.resize(p);
    for (std::size_t c = 0; c < inst.transitivity.size(); ++c) {
      const auto& t = inst.transitivity[c];
      const std::size_t ik = t.entailed.empty() ? p : t.entailed.front() / inst.labels;
      for (std::size_t q : {t.a / inst.labels, t.b / inst.labels}) by_pair_[q].push_back(c);
      if (ik < p) by_pair_[ik].push_back(c);
      triple_third_.push_back(ik);
    }
    // Best allowed posterior per pair, and suffix sums for the bound.
    suffix_.assign(p + 1, 0.0);
    ranked_.resize(p);
    for (std::size_t q = p; q-- > 0;) {
      for (std::size_t l = 0; l < inst.labels; ++l) {
        if (!inst.fixed_zero[inst.variable(q, static_cast<LabelId>(l))]) ranked_[q].push_back(static_cast<LabelId>(l));
      }
      std::stable_sort(ranked_[q].begin(), ranked_[q].end(), [&](LabelId x, LabelId y) {
        return inst.objective[inst.variable(q, x)] > inst.objective[inst.variable(q, y)];
      });
      const double best = ranked_[q].empty() ? 0.0 : inst.objective[inst.variable(q, ranked_[q].front())];
      suffix_[q] = suffix_[q + 1] + best;
    }
  }

  std::optional<IlpSolution> run() {
    PathConsistency network(inst_.node_count);
    search(0, 0.0, network);
    if (!best_) return std::nullopt;
    best_->nodes_explored = explored_;
    return best_;
  }

 private:
  bool value(std::size_t var) const {
    const std::size_t q = var / inst_.labels;
    return assigned_[q] && *assigned_[q] == var % inst_.labels;
  }

  bool known(std::size_t var) const { return assigned_[var / inst_.labels].has_value(); }

  bool satisfied(std::size_t pair) const {
    for (std::size_t c : by_pair_[pair]) {
      const auto& t = inst_.transitivity[c];
      if (!known(t.a) || !known(t.b)) continue;
      if (!value(t.a) || !value(t.b)) continue;
      const std::size_t ik = triple_third_[c];
      if (ik < inst_.pairs.size() && !assigned_[ik]) continue;
      const bool any = std::any_of(t.entailed.begin(), t.entailed.end(), [&](std::size_t v) { return value(v); });
      if (!any) return false;
    }
    return true;
  }

  void search(std::size_t q, double value_so_far, const PathConsistency& network) {
    ++explored_;
    if (best_ && value_so_far + suffix_[q] <= best_->objective + 1e-12) return;
    if (q == inst_.pairs.size()) {
      IlpSolution s;
      for (const auto& a : assigned_) s.labels.push_back(*a);
      s.objective = value_so_far;
      best_ = std::move(s);
      return;
    }
    for (LabelId label : ranked_[q]) {
      assigned_[q] = label;
      if (satisfied(q)) {
        const double next = value_so_far + inst_.objective[inst_.variable(q, label)];
        if (options_.global_consistency) {
          PathConsistency child = network;
          if (child.add(inst_.pairs[q].lo, inst_.pairs[q].hi, oriented_allen(inst_.scheme, label, inst_.reversed[q]))) {
            search(q + 1, next, child);
          }
        } else {
          search(q + 1, next, network);
        }
      }
      assigned_[q].reset();
    }
  }

  const IlpInstance& inst_;
  IlpOptions options_;
  std::vector<std::optional<LabelId>> assigned_;
  std::vector<std::vector<std::size_t>> by_pair_;
  std::vector<std::size_t> triple_third_;
  std::vector<double> suffix_;
  std::vector<std::vector<LabelId>> ranked_;
  std::optional<IlpSolution> best_;
  std::size_t explored_ = 0;
};

}  // namespace detail

inline IlpSolution solve_ilp(const IlpInstance& inst, const IlpOptions& options = {}) {
  auto solution = detail::BranchAndBound(inst, options).run();
  if (!solution) throw ValidationError("integer program is infeasible");
  return *solution;
}

inline TemporalGraph labeling_graph(const IlpInstance& inst, const std::vector<LabelId>& labels) {
  TemporalGraph out(inst.scheme, inst.node_names);
  for (std::size_t q = 0; q < inst.pairs.size(); ++q) {
    detail::add_oriented(out, inst.pairs[q], inst.reversed[q], labels.at(q));
  }
  return out;
}

inline RepairResult ilp_repair(const WeightedGraph& g, const IlpOptions& options = {}) {
  const IlpInstance inst = build_ilp(g);
  const IlpSolution s = solve_ilp(inst, options);
  return {labeling_graph(inst, s.labels), s.objective, {}};
}

// CPLEX LP text format.
inline void write_lp(std::ostream& out, const IlpInstance& inst) {
  const auto name = [&](std::size_t var) {
    const std::size_t q = var / inst.labels;
    return "x_" + std::to_string(inst.pairs[q].lo) + "_" + std::to_string(inst.pairs[q].hi) + "_" +
           std::string(label_name(inst.scheme, var % inst.labels));
  };
  out << "\\ temporal relation labeling\nMaximize\n obj:";
  for (std::size_t v = 0; v < inst.variable_count(); ++v) {
    out << (v ? " + " : " ") << format_double(inst.objective[v]) << ' ' << name(v);
  }
  out << "\nSubject To\n";
  for (std::size_t q = 0; q < inst.pairs.size(); ++q) {
    out << " one_" << q << ':';
    for (std::size_t l = 0; l < inst.labels; ++l) out << (l ? " + " : " ") << name(inst.variable(q, static_cast<LabelId>(l)));
    out << " = 1\n";
  }
  for (std::size_t c = 0; c < inst.transitivity.size(); ++c) {
    const auto& t = inst.transitivity[c];
    out << " tr_" << c << ": " << name(t.a) << " + " << name(t.b);
    for (std::size_t v : t.entailed) out << " - " << name(v);
    out << " <= 1\n";
  }
  out << "Bounds\n";
  for (std::size_t v = 0; v < inst.variable_count(); ++v) {
    if (inst.fixed_zero[v]) out << ' ' << name(v) << " = 0\n";
  }
  out << "Binary\n";
  for (std::size_t v = 0; v < inst.variable_count(); ++v) out << ' ' << name(v) << '\n';
  out << "End\n";
}

}  // namespace tlink
