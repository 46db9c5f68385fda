#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ceef/catalog.hpp"
#include "ceef/lmg.hpp"

namespace ceef {

// One factor of an irreducible sum: label[j_p, j_q] with 1-based positions
// p < q into the sum's index tuple. oriented marks labels that change under
// transposition, i.e. where the (p, q) order carries information.
struct IfsFactor {
  int p = 0;
  int q = 0;
  Expr label;
  bool oriented = false;
};

enum class TermKind { sea, ifs };

// One summand of the closed-form statistic. A single-node reduction leaves
// 1' times a vector expression; an irreducible core leaves a sum over index
// tuples, one free index per layer, of a product of pairwise factors.
struct Term {
  std::int64_t coef = 0;
  TermKind kind = TermKind::sea;
  int k = 0;
  int t = 0;
  Expr sea_vector;                 // kind == sea
  int layers = 0;                  // kind == ifs
  std::vector<IfsFactor> factors;  // kind == ifs
};

struct Formula {
  int m = 0;
  std::vector<Term> terms;
};

// Turns a fully pruned graph into a term. For irreducible graphs the surviving
// node ids are renamed to positions 1..layers in ascending order, parallel
// edges combine entrywise per node pair, and any surviving non-trivial node
// label is absorbed as a diagonal factor into the first factor touching it.
inline Term make_term(const GraphClass& cls, const PruneResult& pr) {
  Term t;
  t.coef = cls.a;
  t.k = cls.k;
  t.t = cls.t;
  if (pr.is_sea()) {
    t.kind = TermKind::sea;
    t.sea_vector = pr.sea_vector();
    return t;
  }
  t.kind = TermKind::ifs;
  const Lmg& g = pr.terminal;
  t.layers = static_cast<int>(g.nodes.size());
  if (t.layers < 4)
    throw std::logic_error("make_term: irreducible graph with fewer than four nodes");

  auto position = [&](int id) { return g.index_of(id) + 1; };
  std::map<std::pair<int, int>, std::vector<Expr>> groups;
  for (const LmgEdge& e : g.edges) {
    int p = position(e.row), q = position(e.col);
    if (p < q)
      groups[{p, q}].push_back(e.label);
    else
      groups[{q, p}].push_back(transpose(e.label));
  }
  for (auto& [pq, labels] : groups)
    t.factors.push_back({pq.first, pq.second, hadamard(std::move(labels)), false});

  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    if (g.labels[i] == ones()) continue;
    int pos = static_cast<int>(i) + 1;
    bool placed = false;
    for (IfsFactor& f : t.factors) {
      if (f.p == pos) {
        f.label = matmul({diag(g.labels[i]), f.label});
        placed = true;
        break;
      }
      if (f.q == pos) {
        f.label = matmul({f.label, diag(g.labels[i])});
        placed = true;
        break;
      }
    }
    if (!placed) throw std::logic_error("make_term: node label with no incident factor");
  }
  for (IfsFactor& f : t.factors) f.oriented = !is_symmetric_expr(f.label);
  return t;
}

// Prunes every class of the catalog. Terms inherit the catalog order
// (k descending, t ascending).
inline Formula build_formula(const Catalog& cat) {
  Formula f;
  f.m = cat.m;
  f.terms.reserve(cat.classes.size());
  for (const GraphClass& cls : cat.classes) {
    PruneResult pr = prune_to_completion(cls.graph);
    if (!pr.is_sea()) {
      // the irreducible terminal graphs are guaranteed small relative to the
      // order; a violation here means the reduction itself is broken
      if (pr.layers() > cat.m / 2)
        throw std::logic_error("build_formula: irreducible graph with too many nodes");
      for (int id : pr.terminal.nodes)
        if (pr.terminal.distinct_neighbors(id).size() < 3)
          throw std::logic_error("build_formula: irreducible node with fewer than three neighbors");
    }
    f.terms.push_back(make_term(cls, pr));
  }
  return f;
}

}  // namespace ceef
