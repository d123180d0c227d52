#pragma once

// Causal DAGs over named variables, the edge-list file format, orderings,
// edge reversal and structural Hamming distance.

#include <algorithm>
#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cattr/error.hpp"
#include "cattr/rng.hpp"
#include "cattr/text.hpp"

namespace cattr {

struct Edge {
  std::string cause;
  std::string effect;

  auto operator<=>(const Edge&) const = default;
  bool operator==(const Edge&) const = default;

  Edge reversed() const { return {effect, cause}; }
};

using EdgeSet = std::set<Edge>;

class CausalDag {
 public:
  CausalDag() = default;

  // Validates: distinct non-empty names, known endpoints, no self-loops,
  // no duplicate edges, no directed cycles.
  CausalDag(std::vector<std::string> nodes, const std::vector<Edge>& edges) : nodes_(std::move(nodes)) {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (nodes_[i].empty()) throw GraphError("empty node name");
      if (!index_.emplace(nodes_[i], i).second) throw GraphError("duplicate node name: " + nodes_[i]);
    }
    for (const auto& e : edges) {
      if (!contains(e.cause)) throw GraphError("edge endpoint not a node: " + e.cause);
      if (!contains(e.effect)) throw GraphError("edge endpoint not a node: " + e.effect);
      if (e.cause == e.effect) throw GraphError("self-loop on " + e.cause);
      if (!edges_.insert(e).second) throw GraphError("duplicate edge: " + e.cause + " -> " + e.effect);
    }
    if (auto cyc = find_cycle_node()) throw GraphError("directed cycle through " + *cyc);
  }

  CausalDag(std::vector<std::string> nodes, const EdgeSet& edges)
      : CausalDag(std::move(nodes), std::vector<Edge>(edges.begin(), edges.end())) {}

  const std::vector<std::string>& nodes() const { return nodes_; }
  const EdgeSet& edges() const { return edges_; }
  std::size_t size() const { return nodes_.size(); }

  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  bool has_edge(const std::string& u, const std::string& v) const { return edges_.count({u, v}) != 0; }

  std::size_t index_of(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw GraphError("unknown node: " + name);
    return it->second;
  }

  std::vector<std::string> parents(const std::string& node) const {
    std::vector<std::string> out;
    for (const auto& e : edges_)
      if (e.effect == node) out.push_back(e.cause);
    return out;
  }

  bool operator==(const CausalDag& o) const { return nodes_ == o.nodes_ && edges_ == o.edges_; }

 private:
  std::optional<std::string> find_cycle_node() const {
    std::vector<int> indeg(nodes_.size(), 0);
    std::vector<std::vector<std::size_t>> out(nodes_.size());
    for (const auto& e : edges_) {
      out[index_.at(e.cause)].push_back(index_.at(e.effect));
      ++indeg[index_.at(e.effect)];
    }
    std::vector<std::size_t> stack;
    for (std::size_t i = 0; i < nodes_.size(); ++i)
      if (indeg[i] == 0) stack.push_back(i);
    std::size_t seen = 0;
    while (!stack.empty()) {
      auto u = stack.back();
      stack.pop_back();
      ++seen;
      for (auto v : out[u])
        if (--indeg[v] == 0) stack.push_back(v);
    }
    if (seen == nodes_.size()) return std::nullopt;
    for (std::size_t i = 0; i < nodes_.size(); ++i)
      if (indeg[i] > 0) return nodes_[i];
    return std::nullopt;
  }

  std::vector<std::string> nodes_;
  EdgeSet edges_;
  std::unordered_map<std::string, std::size_t> index_;
};

// A sequence of node names; topological when every edge points forward.
struct NodeOrdering {
  std::vector<std::string> names;

  std::size_t position(const std::string& name) const {
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw GraphError("name not in ordering: " + name);
    return static_cast<std::size_t>(it - names.begin());
  }

  bool is_topological_for(const CausalDag& dag) const {
    for (const auto& e : dag.edges())
      if (position(e.cause) >= position(e.effect)) return false;
    return true;
  }
};

// Parses `<cause> -> <effect>` lines. `#` starts a comment. When
// `declared_nodes` is absent, nodes are the endpoints in first-appearance order.
inline CausalDag from_edge_list(std::string_view text,
                                const std::optional<std::vector<std::string>>& declared_nodes = std::nullopt) {
  std::vector<Edge> edges;
  std::vector<std::string> seen_order;
  std::set<std::string> seen;
  std::set<Edge> dup_check;
  std::size_t line_no = 0;
  for (auto raw : split_lines(text)) {
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    auto line = trim(raw);
    if (line.empty()) continue;
    auto arrow = line.find("->");
    if (arrow == std::string_view::npos) throw ParseError("expected '<cause> -> <effect>'", line_no);
    std::string cause(trim(line.substr(0, arrow)));
    std::string effect(trim(line.substr(arrow + 2)));
    if (cause.empty() || effect.empty()) throw ParseError("empty node name", line_no);
    if (effect.find("->") != std::string::npos) throw ParseError("more than one arrow", line_no);
    if (declared_nodes) {
      const auto& d = *declared_nodes;
      for (const auto& n : {cause, effect})
        if (std::find(d.begin(), d.end(), n) == d.end())
          throw GraphError("line " + std::to_string(line_no) + ": endpoint not declared: " + n);
    }
    Edge e{cause, effect};
    if (!dup_check.insert(e).second)
      throw GraphError("line " + std::to_string(line_no) + ": duplicate edge " + cause + " -> " + effect);
    for (const auto& n : {cause, effect})
      if (seen.insert(n).second) seen_order.push_back(n);
    edges.push_back(std::move(e));
  }
  return CausalDag(declared_nodes ? *declared_nodes : seen_order, edges);
}

inline std::string to_edge_list(const CausalDag& dag) {
  std::string out;
  for (const auto& e : dag.edges()) out += e.cause + " -> " + e.effect + "\n";
  return out;
}

// Kahn's algorithm; among ready nodes the lexicographically smallest goes first.
inline NodeOrdering topological_order(const CausalDag& dag) {
  const auto& nodes = dag.nodes();
  std::map<std::string, int> indeg;
  std::map<std::string, std::vector<std::string>> children;
  for (const auto& n : nodes) indeg[n] = 0;
  for (const auto& e : dag.edges()) {
    ++indeg[e.effect];
    children[e.cause].push_back(e.effect);
  }
  std::priority_queue<std::string, std::vector<std::string>, std::greater<>> ready;
  for (const auto& [n, d] : indeg)
    if (d == 0) ready.push(n);
  NodeOrdering order;
  while (!ready.empty()) {
    auto u = ready.top();
    ready.pop();
    order.names.push_back(u);
    for (const auto& v : children[u])
      if (--indeg[v] == 0) ready.push(v);
  }
  return order;
}

inline CausalDag flip_edges(const CausalDag& dag) {
  std::vector<Edge> flipped;
  flipped.reserve(dag.edges().size());
  for (const auto& e : dag.edges()) flipped.push_back(e.reversed());
  return CausalDag(dag.nodes(), flipped);
}

// Structural Hamming distance over unordered node pairs. A reversed edge
// costs 1. A predicted pair asserting both directions never matches the
// truth status of that pair and costs 1.
inline std::size_t shd(const EdgeSet& predicted, const CausalDag& truth) {
  for (const auto& e : predicted) {
    if (!truth.contains(e.cause)) throw GraphError("unknown node in prediction: " + e.cause);
    if (!truth.contains(e.effect)) throw GraphError("unknown node in prediction: " + e.effect);
  }
  // Status per unordered pair keyed by (min, max): bit 1 = min->max, bit 2 = max->min.
  auto key = [](const Edge& e) {
    return e.cause < e.effect ? std::pair{e.cause, e.effect} : std::pair{e.effect, e.cause};
  };
  auto bit = [](const Edge& e) { return e.cause < e.effect ? 1 : 2; };
  std::map<std::pair<std::string, std::string>, int> pred_status, true_status;
  for (const auto& e : predicted)
    if (e.cause != e.effect) pred_status[key(e)] |= bit(e);
  for (const auto& e : truth.edges()) true_status[key(e)] |= bit(e);
  std::size_t d = 0;
  for (const auto& [k, s] : pred_status) {
    auto it = true_status.find(k);
    if (it == true_status.end() || it->second != s) ++d;
  }
  for (const auto& [k, s] : true_status)
    if (!pred_status.count(k)) ++d;
  return d;
}

inline std::size_t shd(const CausalDag& predicted, const CausalDag& truth) { return shd(predicted.edges(), truth); }

// Random DAG over `names`: a random permutation fixes the causal order and
// each forward pair becomes an edge with probability `edge_probability`.
inline CausalDag random_dag(const std::vector<std::string>& names, double edge_probability, Rng& rng) {
  auto perm = rng.permutation(names.size());
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < perm.size(); ++i)
    for (std::size_t j = i + 1; j < perm.size(); ++j)
      if (rng.bernoulli(edge_probability)) edges.push_back({names[perm[i]], names[perm[j]]});
  return CausalDag(names, edges);
}

inline std::vector<std::string> default_node_names(std::size_t d) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < d; ++i) out.push_back("V" + std::to_string(i));
  return out;
}

}  // namespace cattr
