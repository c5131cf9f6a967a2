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

// Allen's interval algebra over the 13 base relations: sets of relations,
// composition, the mapping from label schemes to relation sets, path
// consistency and a brute-force realizability check.

#include <array>
#include <bit>
#include <compare>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tlink/error.hpp"
#include "tlink/labels.hpp"

namespace tlink {

enum class AllenRelation : std::uint8_t {
  kBefore,
  kAfter,
  kMeets,
  kMetBy,
  kOverlaps,
  kOverlappedBy,
  kStarts,
  kStartedBy,
  kDuring,
  kContains,
  kFinishes,
  kFinishedBy,
  kEquals,
};

inline constexpr std::size_t kAllenBaseCount = 13;

inline constexpr std::array<std::string_view, kAllenBaseCount> kAllenNames = {
    "before",    "after",    "meets",       "met_by",
    "overlaps",  "overlapped_by", "starts", "started_by",
    "during",    "contains", "finishes",    "finished_by",
    "equals"};

constexpr AllenRelation converse(AllenRelation r) {
  switch (r) {
    case AllenRelation::kEquals:
      return r;
    default: {
      // Relations come in (r, r^-1) pairs at indices (2k, 2k+1).
      const auto i = static_cast<std::uint8_t>(r);
      return static_cast<AllenRelation>(i ^ 1u);
    }
  }
}

// Disjunction of base relations as a 13-bit mask. The empty set denotes a
// contradiction.
class AllenSet {
 public:
  constexpr AllenSet() = default;
  constexpr explicit AllenSet(std::uint16_t bits) : bits_(bits & kFullBits) {}
  constexpr AllenSet(AllenRelation r)  // NOLINT(google-explicit-constructor)
      : bits_(static_cast<std::uint16_t>(1u << static_cast<unsigned>(r))) {}
  constexpr AllenSet(std::initializer_list<AllenRelation> rs) {
    for (auto r : rs) bits_ |= static_cast<std::uint16_t>(1u << static_cast<unsigned>(r));
  }

  static constexpr AllenSet full() { return AllenSet(kFullBits); }
  static constexpr AllenSet empty_set() { return AllenSet(); }

  constexpr std::uint16_t bits() const { return bits_; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr int size() const { return std::popcount(bits_); }
  constexpr bool contains(AllenRelation r) const {
    return (bits_ >> static_cast<unsigned>(r)) & 1u;
  }
  constexpr bool contains(AllenSet other) const {
    return (bits_ & other.bits_) == other.bits_;
  }
  constexpr bool intersects(AllenSet other) const {
    return (bits_ & other.bits_) != 0;
  }

  constexpr AllenSet converse() const {
    AllenSet out;
    for (std::size_t i = 0; i < kAllenBaseCount; ++i) {
      if ((bits_ >> i) & 1u) out = out | tlink::converse(static_cast<AllenRelation>(i));
    }
    return out;
  }

  friend constexpr AllenSet operator|(AllenSet a, AllenSet b) {
    return AllenSet(static_cast<std::uint16_t>(a.bits_ | b.bits_));
  }
  friend constexpr AllenSet operator&(AllenSet a, AllenSet b) {
    return AllenSet(static_cast<std::uint16_t>(a.bits_ & b.bits_));
  }
  friend constexpr bool operator==(AllenSet, AllenSet) = default;

  std::string to_string() const {
    std::string out = "{";
    for (std::size_t i = 0; i < kAllenBaseCount; ++i) {
      if ((bits_ >> i) & 1u) {
        if (out.size() > 1) out += ", ";
        out += kAllenNames[i];
      }
    }
    return out + "}";
  }

 private:
  static constexpr std::uint16_t kFullBits = 0x1fff;
  std::uint16_t bits_ = 0;
};

namespace detail {

// Row r1, column r2: the relations possible between x and z when x r1 y and
// y r2 z. Bit i stands for AllenRelation(i).
inline constexpr std::uint16_t kComposition[kAllenBaseCount][kAllenBaseCount] = {
    {0x0001, 0x1fff, 0x0001, 0x0155, 0x0001, 0x0155, 0x0001, 0x0001, 0x0155, 0x0001, 0x0155, 0x0001, 0x0001},  // before
    {0x1fff, 0x0002, 0x052a, 0x0002, 0x052a, 0x0002, 0x052a, 0x0002, 0x052a, 0x0002, 0x0002, 0x0002, 0x0002},  // after
    {0x0001, 0x02aa, 0x0001, 0x1c00, 0x0001, 0x0150, 0x0004, 0x0004, 0x0150, 0x0001, 0x0150, 0x0001, 0x0004},  // meets
    {0x0a15, 0x0002, 0x10c0, 0x0002, 0x0520, 0x0002, 0x0520, 0x0002, 0x0520, 0x0002, 0x0008, 0x0008, 0x0008},  // met_by
    {0x0001, 0x02aa, 0x0001, 0x02a0, 0x0015, 0x1ff0, 0x0010, 0x0a10, 0x0150, 0x0a15, 0x0150, 0x0015, 0x0010},  // overlaps
    {0x0a15, 0x0002, 0x0a10, 0x0002, 0x1ff0, 0x002a, 0x0520, 0x002a, 0x0520, 0x02aa, 0x0020, 0x02a0, 0x0020},  // overlapped_by
    {0x0001, 0x0002, 0x0001, 0x0008, 0x0015, 0x0520, 0x0040, 0x10c0, 0x0100, 0x0a15, 0x0100, 0x0015, 0x0040},  // starts
    {0x0a15, 0x0002, 0x0a10, 0x0008, 0x0a10, 0x0020, 0x10c0, 0x0080, 0x0520, 0x0200, 0x0020, 0x0200, 0x0080},  // started_by
    {0x0001, 0x0002, 0x0001, 0x0002, 0x0155, 0x052a, 0x0100, 0x052a, 0x0100, 0x1fff, 0x0100, 0x0155, 0x0100},  // during
    {0x0a15, 0x02aa, 0x0a10, 0x02a0, 0x0a10, 0x02a0, 0x0a10, 0x0200, 0x1ff0, 0x0200, 0x02a0, 0x0200, 0x0200},  // contains
    {0x0001, 0x0002, 0x0004, 0x0002, 0x0150, 0x002a, 0x0100, 0x002a, 0x0100, 0x02aa, 0x0400, 0x1c00, 0x0400},  // finishes
    {0x0001, 0x02aa, 0x0004, 0x02a0, 0x0010, 0x02a0, 0x0010, 0x0200, 0x0150, 0x0200, 0x1c00, 0x0800, 0x0800},  // finished_by
    {0x0001, 0x0002, 0x0004, 0x0008, 0x0010, 0x0020, 0x0040, 0x0080, 0x0100, 0x0200, 0x0400, 0x0800, 0x1000},  // equals
};

}  // namespace detail

constexpr AllenSet compose(AllenRelation a, AllenRelation b) {
  return AllenSet(detail::kComposition[static_cast<std::size_t>(a)]
                                      [static_cast<std::size_t>(b)]);
}

// Union of base compositions; empty if either side is empty.
constexpr AllenSet allen_compose(AllenSet a, AllenSet b) {
  AllenSet out;
  for (std::size_t i = 0; i < kAllenBaseCount; ++i) {
    if (!a.contains(static_cast<AllenRelation>(i))) continue;
    for (std::size_t j = 0; j < kAllenBaseCount; ++j) {
      if (b.contains(static_cast<AllenRelation>(j))) {
        out = out | compose(static_cast<AllenRelation>(i),
                            static_cast<AllenRelation>(j));
      }
    }
  }
  return out;
}

// Human-readable dump of the composition table, one "r1 ; r2 = {...}" line
// per cell.
inline std::string composition_table_dump() {
  std::ostringstream out;
  for (std::size_t i = 0; i < kAllenBaseCount; ++i) {
    for (std::size_t j = 0; j < kAllenBaseCount; ++j) {
      out << kAllenNames[i] << " ; " << kAllenNames[j] << " = "
          << compose(static_cast<AllenRelation>(i),
                     static_cast<AllenRelation>(j))
                 .to_string()
          << '\n';
    }
  }
  return out.str();
}

// Relation between intervals [xs, xe] and [ys, ye]; requires xs < xe, ys < ye.
template <typename T>
constexpr AllenRelation relation_between(T xs, T xe, T ys, T ye) {
  if (xe < ys) return AllenRelation::kBefore;
  if (ye < xs) return AllenRelation::kAfter;
  if (xe == ys) return AllenRelation::kMeets;
  if (ye == xs) return AllenRelation::kMetBy;
  if (xs == ys && xe == ye) return AllenRelation::kEquals;
  if (xs == ys) return xe < ye ? AllenRelation::kStarts : AllenRelation::kStartedBy;
  if (xe == ye) return xs > ys ? AllenRelation::kFinishes : AllenRelation::kFinishedBy;
  if (ys < xs && xe < ye) return AllenRelation::kDuring;
  if (xs < ys && ye < xe) return AllenRelation::kContains;
  return xs < ys ? AllenRelation::kOverlaps : AllenRelation::kOverlappedBy;
}

// Allen image of a Norm6 or Coarse3 label, read source -> target.
inline AllenSet label_to_allen(RelationLabel label) {
  using R = AllenRelation;
  switch (label.scheme) {
    case Scheme::kNorm6:
      switch (static_cast<Norm6>(label.value)) {
        case Norm6::kIBefore:
          return R::kMeets;
        case Norm6::kBegins:
          return R::kStarts;
        case Norm6::kEnds:
          return R::kFinishes;
        case Norm6::kSimultaneous:
          return R::kEquals;
        case Norm6::kIncludes:
          return R::kContains;
        case Norm6::kBefore:
          return R::kBefore;
      }
      break;
    case Scheme::kCoarse3:
      switch (static_cast<Coarse3>(label.value)) {
        case Coarse3::kBefore:
          return {R::kBefore, R::kMeets};
        case Coarse3::kAfter:
          return {R::kAfter, R::kMetBy};
        case Coarse3::kOverlap:
          return AllenSet::full() &
                 AllenSet(static_cast<std::uint16_t>(
                     ~AllenSet{R::kBefore, R::kMeets, R::kAfter, R::kMetBy}.bits()));
      }
      break;
    case Scheme::kRaw14:
      throw UnsupportedError(
          "Raw14 labels have no Allen image; normalize them first");
  }
  throw ValidationError("label value out of range");
}

inline AllenSet label_to_allen(Scheme scheme, LabelId value) {
  return label_to_allen(RelationLabel{scheme, value});
}

// Image of `label` for a stored edge; `reversed` means the label reads
// hi -> lo and the result is converted to lo -> hi.
inline AllenSet oriented_allen(Scheme scheme, LabelId label, bool reversed) {
  const AllenSet image = label_to_allen(scheme, label);
  return reversed ? image.converse() : image;
}

// The label whose image contains `r`, if any (images are disjoint in every
// supported scheme).
inline std::optional<LabelId> label_for_relation(Scheme scheme, AllenRelation r) {
  for (std::size_t i = 0; i < label_count(scheme); ++i) {
    if (label_to_allen(scheme, static_cast<LabelId>(i)).contains(r)) {
      return static_cast<LabelId>(i);
    }
  }
  return std::nullopt;
}

// Bit i set <=> label i of the scheme.
using LabelSet = std::uint16_t;

// Labels m3 that stay possible between x and z given x m1 y and y m2 z.
inline LabelSet entailed_labels(LabelId m1, LabelId m2, Scheme scheme) {
  const AllenSet composed = allen_compose(label_to_allen(scheme, m1),
                                          label_to_allen(scheme, m2));
  LabelSet out = 0;
  for (std::size_t i = 0; i < label_count(scheme); ++i) {
    if (label_to_allen(scheme, static_cast<LabelId>(i)).intersects(composed)) {
      out |= static_cast<LabelSet>(1u << i);
    }
  }
  return out;
}

struct NodePair {
  std::size_t lo = 0;
  std::size_t hi = 0;

  friend auto operator<=>(const NodePair&, const NodePair&) = default;
};

template <typename Value>
struct GraphEdge {
  Value value{};
  // The stored relation reads hi -> lo instead of lo -> hi.
  bool reversed = false;
};

// Event graph with at most one edge per unordered node pair. Edges keep the
// orientation they were added with so schemes without inverse labels (Norm6)
// can still be represented.
template <typename Value>
class BasicTemporalGraph {
 public:
  using Edge = GraphEdge<Value>;
  using EdgeMap = std::map<NodePair, Edge>;

  explicit BasicTemporalGraph(Scheme scheme = Scheme::kCoarse3,
                              std::vector<std::string> nodes = {})
      : scheme_(scheme), nodes_(std::move(nodes)) {
    if (scheme == Scheme::kRaw14) {
      throw UnsupportedError("temporal graphs need Norm6 or Coarse3 labels");
    }
  }

  Scheme scheme() const { return scheme_; }
  const std::vector<std::string>& nodes() const { return nodes_; }
  std::size_t node_count() const { return nodes_.size(); }
  const EdgeMap& edges() const { return edges_; }
  EdgeMap& mutable_edges() { return edges_; }

  std::size_t add_node(std::string id) {
    nodes_.push_back(std::move(id));
    return nodes_.size() - 1;
  }

  std::optional<std::size_t> find_node(std::string_view id) const {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (nodes_[i] == id) return i;
    }
    return std::nullopt;
  }

  std::size_t node_index(std::string_view id) const {
    if (auto i = find_node(id)) return *i;
    throw ValidationError("graph has no node '" + std::string(id) + "'");
  }

  // Adds the relation `from -> to`.
  void add_edge(std::size_t from, std::size_t to, Value value) {
    if (from == to || from >= nodes_.size() || to >= nodes_.size()) {
      throw ValidationError("invalid edge endpoints");
    }
    const NodePair key{std::min(from, to), std::max(from, to)};
    if (edges_.count(key)) {
      throw ValidationError("duplicate edge between '" + nodes_[key.lo] +
                            "' and '" + nodes_[key.hi] + "'");
    }
    edges_.emplace(key, Edge{std::move(value), from > to});
  }

  const Edge* find_edge(std::size_t a, std::size_t b) const {
    const auto it = edges_.find({std::min(a, b), std::max(a, b)});
    return it == edges_.end() ? nullptr : &it->second;
  }

 private:
  Scheme scheme_;
  std::vector<std::string> nodes_;
  EdgeMap edges_;
};

// Crisp graph: every edge carries one label of the graph's scheme.
using TemporalGraph = BasicTemporalGraph<LabelId>;

inline AllenSet edge_allen(const TemporalGraph& graph,
                           const TemporalGraph::Edge& edge) {
  return oriented_allen(graph.scheme(), edge.value, edge.reversed);
}

// Incremental path consistency over a complete constraint matrix. Sets only
// ever shrink; `add` either leaves a path-consistent network or reports the
// triple (a, b, c) whose refinement S_ac & (S_ab o S_bc) came out empty.
class PathConsistency {
 public:
  using Triple = std::array<std::size_t, 3>;

  explicit PathConsistency(std::size_t n)
      : n_(n), sets_(n * n, AllenSet::full()) {
    for (std::size_t i = 0; i < n; ++i) at(i, i) = AllenRelation::kEquals;
  }

  std::size_t size() const { return n_; }
  AllenSet get(std::size_t i, std::size_t j) const { return sets_[i * n_ + j]; }
  const std::optional<Triple>& witness() const { return witness_; }

  // Intersects S_ij with `constraint` (and S_ji with its converse) and
  // propagates. Returns false on contradiction; the network is then invalid.
  bool add(std::size_t i, std::size_t j, AllenSet constraint) {
    std::deque<std::pair<std::size_t, std::size_t>> queue;
    if (!restrict_pair(i, j, constraint, queue)) {
      witness_ = Triple{i, j, j};
      return false;
    }
    return propagate(queue);
  }

  // Adds several constraints before propagating once.
  template <typename Range>
  bool add_all(const Range& constraints) {
    std::deque<std::pair<std::size_t, std::size_t>> queue;
    for (const auto& [i, j, set] : constraints) {
      if (!restrict_pair(i, j, set, queue)) {
        witness_ = Triple{i, j, j};
        return false;
      }
    }
    return propagate(queue);
  }

 private:
  AllenSet& at(std::size_t i, std::size_t j) { return sets_[i * n_ + j]; }

  bool restrict_pair(std::size_t i, std::size_t j, AllenSet constraint,
                     std::deque<std::pair<std::size_t, std::size_t>>& queue) {
    const AllenSet refined = at(i, j) & constraint;
    if (refined == at(i, j)) return true;
    at(i, j) = refined;
    at(j, i) = refined.converse();
    if (refined.empty()) return false;
    queue.emplace_back(i, j);
    return true;
  }

  bool propagate(std::deque<std::pair<std::size_t, std::size_t>>& queue) {
    while (!queue.empty()) {
      const auto [i, j] = queue.front();
      queue.pop_front();
      for (std::size_t k = 0; k < n_; ++k) {
        if (k == i || k == j) continue;
        // i -> j -> k constrains (i, k).
        if (!restrict_pair(i, k, allen_compose(at(i, j), at(j, k)), queue)) {
          witness_ = Triple{i, j, k};
          return false;
        }
        // k -> i -> j constrains (k, j).
        if (!restrict_pair(k, j, allen_compose(at(k, i), at(i, j)), queue)) {
          witness_ = Triple{k, i, j};
          return false;
        }
      }
    }
    return true;
  }

  std::size_t n_;
  std::vector<AllenSet> sets_;
  std::optional<Triple> witness_;
};

struct ConsistencyResult {
  bool consistent = true;
  // Node indices (a, b, c) of the first emptied composition S_ac & S_ab o S_bc.
  std::optional<std::array<std::size_t, 3>> witness;
};

inline ConsistencyResult check_consistency(const TemporalGraph& graph) {
  PathConsistency network(graph.node_count());
  std::vector<std::tuple<std::size_t, std::size_t, AllenSet>> constraints;
  for (const auto& [pair, edge] : graph.edges()) {
    constraints.emplace_back(pair.lo, pair.hi, edge_allen(graph, edge));
  }
  if (network.add_all(constraints)) return {};
  return {false, network.witness()};
}

namespace detail {

// Depth-first search over weak orderings of interval endpoints. Intervals are
// inserted one at a time into an ordered list of endpoint levels; each new
// interval is checked against every already placed neighbour.
class EndpointSearch {
 public:
  EndpointSearch(std::size_t n, const std::vector<std::vector<std::pair<std::size_t, AllenSet>>>& adj,
                 std::vector<std::size_t> order)
      : adj_(adj), order_(std::move(order)), start_(n, -1), end_(n, -1) {}

  bool run() { return place(0, 0); }

 private:
  // Moves every rank >= gap up by one to open a new level at `gap`.
  void open_level(int gap) {
    for (std::size_t v : order_) {
      if (start_[v] >= gap) ++start_[v];
      if (end_[v] >= gap) ++end_[v];
    }
  }
  void close_level(int gap) {
    for (std::size_t v : order_) {
      if (start_[v] > gap) --start_[v];
      if (end_[v] > gap) --end_[v];
    }
  }

  bool fits(std::size_t v) const {
    for (const auto& [u, allowed] : adj_[v]) {
      if (start_[u] < 0) continue;
      if (!allowed.contains(
              relation_between(start_[v], end_[v], start_[u], end_[u]))) {
        return false;
      }
    }
    return true;
  }

  // Candidate slots for a new endpoint among `levels` levels: even codes
  // 2g are new levels in gap g, odd codes 2r+1 reuse level r.
  bool place(std::size_t depth, int levels) {
    if (depth == order_.size()) return true;
    const std::size_t v = order_[depth];
    for (int s_code = 0; s_code <= 2 * levels; ++s_code) {
      int s_levels = levels;
      int s_rank;
      if (s_code % 2 == 0) {
        s_rank = s_code / 2;
        open_level(s_rank);
        ++s_levels;
      } else {
        s_rank = s_code / 2;
      }
      start_[v] = s_rank;
      for (int e_code = 2 * (s_rank + 1); e_code <= 2 * s_levels; ++e_code) {
        int e_levels = s_levels;
        const int e_rank = e_code / 2;
        if (e_code % 2 == 0) {
          open_level(e_rank);
          ++e_levels;
        }
        end_[v] = e_rank;
        if (fits(v) && place(depth + 1, e_levels)) return true;
        end_[v] = -1;
        if (e_code % 2 == 0) close_level(e_rank);
      }
      start_[v] = -1;
      if (s_code % 2 == 0) close_level(s_rank);
    }
    return false;
  }

  const std::vector<std::vector<std::pair<std::size_t, AllenSet>>>& adj_;
  std::vector<std::size_t> order_;
  std::vector<int> start_;
  std::vector<int> end_;
};

}  // namespace detail

// True iff real intervals exist that satisfy every edge. Exhaustive search,
// so graphs larger than `max_nodes` are refused.
inline bool realizable(const TemporalGraph& graph, std::size_t max_nodes = 6) {
  const std::size_t n = graph.node_count();
  if (n > max_nodes) {
    throw UnsupportedError("realizability check refuses " + std::to_string(n) +
                           " nodes (limit " + std::to_string(max_nodes) + ")");
  }
  std::vector<std::vector<std::pair<std::size_t, AllenSet>>> adj(n);
  for (const auto& [pair, edge] : graph.edges()) {
    const AllenSet s = edge_allen(graph, edge);
    adj[pair.lo].emplace_back(pair.hi, s);
    adj[pair.hi].emplace_back(pair.lo, s.converse());
  }
  // Components are independent; search each in BFS order so every new
  // interval is constrained by an already placed one.
  std::vector<bool> seen(n, false);
  for (std::size_t root = 0; root < n; ++root) {
    if (seen[root]) continue;
    std::vector<std::size_t> order{root};
    seen[root] = true;
    for (std::size_t head = 0; head < order.size(); ++head) {
      for (const auto& [u, s] : adj[order[head]]) {
        if (!seen[u]) {
          seen[u] = true;
          order.push_back(u);
        }
      }
    }
    if (order.size() == 1) continue;
    detail::EndpointSearch search(n, adj, order);
    if (!search.run()) return false;
  }
  return true;
}

}  // namespace tlink
