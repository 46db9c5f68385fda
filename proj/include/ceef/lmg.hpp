#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "ceef/expr.hpp"
#include "ceef/partition.hpp"

namespace ceef {

// One edge of a labeled multigraph. The label is a matrix expression whose
// (row, col) entry is the edge's factor, so consuming the edge in the other
// direction means transposing the label. Parallel edges stay as separate
// entries until a pruning step combines them.
struct LmgEdge {
  int row = 0;
  int col = 0;
  Expr label;
};

// Labeled multigraph: vector-valued node labels, matrix-valued edge labels.
struct Lmg {
  std::vector<int> nodes;    // ascending ids
  std::vector<Expr> labels;  // parallel to nodes
  std::vector<LmgEdge> edges;

  int index_of(int id) const {
    auto it = std::lower_bound(nodes.begin(), nodes.end(), id);
    if (it == nodes.end() || *it != id)
      throw std::logic_error("lmg: no such node");
    return static_cast<int>(it - nodes.begin());
  }

  const Expr& label_of(int id) const { return labels[index_of(id)]; }

  std::vector<int> distinct_neighbors(int id) const {
    std::vector<int> out;
    for (const LmgEdge& e : edges) {
      int other = -1;
      if (e.row == id) other = e.col;
      else if (e.col == id) other = e.row;
      else continue;
      if (std::find(out.begin(), out.end(), other) == out.end()) out.push_back(other);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  std::vector<int> incident_edges(int id) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < edges.size(); ++i)
      if (edges[i].row == id || edges[i].col == id) out.push_back(static_cast<int>(i));
    return out;
  }

  void erase_node(int id) {
    int idx = index_of(id);
    nodes.erase(nodes.begin() + idx);
    labels.erase(labels.begin() + idx);
    edges.erase(std::remove_if(edges.begin(), edges.end(),
                               [id](const LmgEdge& e) { return e.row == id || e.col == id; }),
                edges.end());
  }
};

// Starting point of the reduction: node i of the multigraph becomes node i
// with label 1, and each unit of multiplicity between i < j becomes one edge
// labeled A oriented (i, j).
inline Lmg default_lmg(const MultiGraph& g) {
  Lmg out;
  for (int i = 0; i < g.k; ++i) {
    out.nodes.push_back(i);
    out.labels.push_back(ones());
  }
  for (int i = 0; i < g.k; ++i)
    for (int j = i + 1; j < g.k; ++j)
      for (int c = 0; c < g.weight(i, j); ++c)
        out.edges.push_back({i, j, base_a()});
  return out;
}

struct PendantHit {
  int node = -1;
  int type = 0;  // 1 or 2 = number of distinct neighbors
};

// Every currently removable node, in ascending id order.
inline std::vector<PendantHit> pendant_candidates(const Lmg& g) {
  std::vector<PendantHit> out;
  if (g.nodes.size() <= 1) return out;
  for (int id : g.nodes) {
    std::size_t nn = g.distinct_neighbors(id).size();
    if (nn == 1 || nn == 2) out.push_back({id, static_cast<int>(nn)});
  }
  return out;
}

// Default policy: remove the highest-id candidate.
inline PendantHit pick_highest_id(const std::vector<PendantHit>& cands) {
  return cands.back();
}

inline std::optional<PendantHit> find_pendant(const Lmg& g) {
  auto cands = pendant_candidates(g);
  if (cands.empty()) return std::nullopt;
  return pick_highest_id(cands);
}

namespace detail {

inline Expr oriented_label(const LmgEdge& e, int row, int col) {
  if (e.row == row && e.col == col) return e.label;
  if (e.row == col && e.col == row) return transpose(e.label);
  throw std::logic_error("lmg: edge does not join the requested nodes");
}

}  // namespace detail

// Removes a node with exactly one distinct neighbor h. The parallel edge
// labels combine entrywise, act on the pendant's vector label, and the
// resulting vector folds into h's label entrywise.
inline Lmg prune_type1(const Lmg& g, int pendant) {
  auto nb = g.distinct_neighbors(pendant);
  if (nb.size() != 1)
    throw std::logic_error("prune_type1: node does not have exactly one distinct neighbor");
  int h = nb[0];
  std::vector<Expr> parts;
  for (int ei : g.incident_edges(pendant))
    parts.push_back(detail::oriented_label(g.edges[ei], h, pendant));
  Expr folded = matvec(hadamard(std::move(parts)), g.label_of(pendant));
  Lmg out = g;
  out.labels[out.index_of(h)] = hadamard_v({g.label_of(h), std::move(folded)});
  out.erase_node(pendant);
  return out;
}

// Removes a node with exactly two distinct neighbors h1 < h2. Summation over
// the pendant's index turns its two edge bundles and its own label into one
// new edge between the neighbors.
inline Lmg prune_type2(const Lmg& g, int pendant) {
  auto nb = g.distinct_neighbors(pendant);
  if (nb.size() != 2)
    throw std::logic_error("prune_type2: node does not have exactly two distinct neighbors");
  int h1 = nb[0], h2 = nb[1];
  std::vector<Expr> left, right;
  for (int ei : g.incident_edges(pendant)) {
    const LmgEdge& e = g.edges[ei];
    if (e.row == h1 || e.col == h1)
      left.push_back(detail::oriented_label(e, h1, pendant));
    else
      right.push_back(detail::oriented_label(e, pendant, h2));
  }
  Expr label = matmul({hadamard(std::move(left)), diag(g.label_of(pendant)),
                       hadamard(std::move(right))});
  Lmg out = g;
  out.erase_node(pendant);
  out.edges.push_back({h1, h2, std::move(label)});
  return out;
}

inline Lmg prune_step(const Lmg& g, const PendantHit& hit) {
  return hit.type == 1 ? prune_type1(g, hit.node) : prune_type2(g, hit.node);
}

struct PruneResult {
  Lmg terminal;
  int steps = 0;

  bool is_sea() const { return terminal.nodes.size() == 1; }
  int layers() const { return static_cast<int>(terminal.nodes.size()); }
  // For a fully collapsed graph the remaining value is 1' times this vector.
  const Expr& sea_vector() const {
    if (!is_sea()) throw std::logic_error("sea_vector: reduction did not collapse to one node");
    return terminal.labels[0];
  }
};

using PrunePolicy = std::function<PendantHit(const Lmg&, const std::vector<PendantHit>&)>;
using PruneObserver = std::function<void(const Lmg&)>;

// Repeatedly removes pendants until none is left. The observer (if any) sees
// the graph after every step; the policy (if any) picks among candidates,
// defaulting to the highest id.
inline PruneResult prune_to_completion(const MultiGraph& g, PrunePolicy policy = {},
                                       PruneObserver observer = {}) {
  PruneResult r;
  r.terminal = default_lmg(g);
  for (;;) {
    auto cands = pendant_candidates(r.terminal);
    if (cands.empty()) break;
    PendantHit hit = policy ? policy(r.terminal, cands) : pick_highest_id(cands);
    r.terminal = prune_step(r.terminal, hit);
    ++r.steps;
    if (observer) observer(r.terminal);
  }
  return r;
}

}  // namespace ceef
