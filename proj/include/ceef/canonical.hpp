#pragma once

#include <algorithm>
#include <climits>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ceef/partition.hpp"

namespace ceef {

namespace detail {

// Iterated neighborhood refinement. Returns one color id per node; ids are
// assigned by sorted signature order, so they are invariant under node
// relabeling.
inline std::vector<int> refine_colors(const MultiGraph& g) {
  int k = g.k;
  std::vector<std::vector<int>> sig(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    std::vector<int> mults;
    for (int j = 0; j < k; ++j)
      if (g.weight(i, j) > 0) mults.push_back(g.weight(i, j));
    std::sort(mults.begin(), mults.end());
    sig[i].push_back(g.degree(i));
    sig[i].insert(sig[i].end(), mults.begin(), mults.end());
  }
  std::vector<int> color(static_cast<std::size_t>(k));
  int ncolors = 0;
  for (;;) {
    std::map<std::vector<int>, int> rank;
    for (int i = 0; i < k; ++i) rank[sig[i]] = 0;
    int next = 0;
    for (auto& kv : rank) kv.second = next++;
    for (int i = 0; i < k; ++i) color[i] = rank[sig[i]];
    if (next == ncolors || next == k) break;
    ncolors = next;
    for (int i = 0; i < k; ++i) {
      std::vector<std::pair<int, int>> nb;
      for (int j = 0; j < k; ++j)
        if (g.weight(i, j) > 0) nb.emplace_back(g.weight(i, j), color[j]);
      std::sort(nb.begin(), nb.end());
      sig[i].assign(1, color[i]);
      for (auto& [w, c] : nb) {
        sig[i].push_back(w);
        sig[i].push_back(c);
      }
    }
  }
  return color;
}

// Branch-and-bound search for the ordering that minimizes the serialized
// upper triangle. Entries are serialized column by column ((0,1), (0,2),
// (1,2), (0,3), ...) so that placing node p determines exactly the next p
// entries, keeping comparisons aligned with placement order.
struct CanonSearch {
  const MultiGraph& g;
  std::vector<int> pos_color;           // required color at each position
  std::vector<int> best;                // serialized entries, INT_MAX = unset
  std::vector<int> best_perm;           // node placed at each position
  std::vector<int> perm;
  std::vector<char> used;

  explicit CanonSearch(const MultiGraph& graph, const std::vector<int>& color)
      : g(graph) {
    int k = g.k;
    std::vector<int> order(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return color[a] < color[b]; });
    pos_color.resize(static_cast<std::size_t>(k));
    for (int p = 0; p < k; ++p) pos_color[p] = color[order[p]];
    best.assign(static_cast<std::size_t>(k) * (k - 1) / 2, INT_MAX);
    best_perm.assign(static_cast<std::size_t>(k), -1);
    perm.assign(static_cast<std::size_t>(k), -1);
    used.assign(static_cast<std::size_t>(k), 0);
    color_ = color;
    descend(0, 0, true);
  }

  void descend(int p, int offset, bool tied) {
    int k = g.k;
    if (p == k) {
      if (tied) std::copy(perm.begin(), perm.end(), best_perm.begin());
      return;
    }
    // candidates of the right color, ordered by the column they would add
    std::vector<std::pair<std::vector<int>, int>> cand;
    for (int u = 0; u < k; ++u) {
      if (used[u] || color_[u] != pos_color[p]) continue;
      std::vector<int> col(static_cast<std::size_t>(p));
      for (int i = 0; i < p; ++i) col[i] = g.weight(perm[i], u);
      cand.emplace_back(std::move(col), u);
    }
    std::sort(cand.begin(), cand.end());
    for (auto& [col, u] : cand) {
      bool sub_tied = tied;
      bool prune = false;
      if (sub_tied) {
        for (int i = 0; i < p; ++i) {
          int b = best[offset + i];
          if (col[i] > b) {
            prune = true;
            break;
          }
          if (col[i] < b) {
            sub_tied = false;
            break;
          }
        }
      }
      if (prune) continue;
      if (!sub_tied) {
        // strictly better prefix: commit it and tighten the bound
        for (int i = 0; i < p; ++i) best[offset + i] = col[i];
        std::fill(best.begin() + offset + p, best.end(), INT_MAX);
        std::copy(perm.begin(), perm.begin() + p, best_perm.begin());
        best_perm[p] = u;
        sub_tied = true;
      }
      perm[p] = u;
      used[u] = 1;
      descend(p + 1, offset + p, sub_tied);
      used[u] = 0;
      perm[p] = -1;
    }
  }

 private:
  std::vector<int> color_;
};

}  // namespace detail

// Canonical byte string: [k] followed by the minimal column-serialized upper
// triangle. Equal strings exactly characterize isomorphic multigraphs.
inline std::string canonical_form(const MultiGraph& g) {
  std::string out;
  out.push_back(static_cast<char>(g.k));
  if (g.k <= 1) return out;
  detail::CanonSearch s(g, detail::refine_colors(g));
  for (int v : s.best) out.push_back(static_cast<char>(v));
  return out;
}

// The graph relabeled into its canonical ordering. block_sizes are derived
// from degrees, which pruning and coefficient computation rely on.
inline MultiGraph canonical_representative(const MultiGraph& g) {
  MultiGraph out;
  out.k = g.k;
  out.w.assign(static_cast<std::size_t>(g.k) * g.k, 0);
  if (g.k == 0) return out;
  std::vector<int> perm;
  if (g.k == 1) {
    perm = {0};
  } else {
    detail::CanonSearch s(g, detail::refine_colors(g));
    perm = s.best_perm;
  }
  for (int a = 0; a < g.k; ++a)
    for (int b = 0; b < g.k; ++b) out.weight(a, b) = g.weight(perm[a], perm[b]);
  out.block_sizes.resize(static_cast<std::size_t>(g.k));
  for (int a = 0; a < g.k; ++a) out.block_sizes[a] = out.degree(a) / 2;
  return out;
}

inline MultiGraph graph_from_canonical(const std::string& key) {
  MultiGraph g;
  g.k = static_cast<unsigned char>(key.at(0));
  g.w.assign(static_cast<std::size_t>(g.k) * g.k, 0);
  std::size_t idx = 1;
  for (int j = 1; j < g.k; ++j)
    for (int i = 0; i < j; ++i) {
      int w = static_cast<unsigned char>(key.at(idx++));
      g.weight(i, j) = w;
      g.weight(j, i) = w;
    }
  g.block_sizes.resize(static_cast<std::size_t>(g.k));
  for (int a = 0; a < g.k; ++a) g.block_sizes[a] = g.degree(a) / 2;
  return g;
}

inline bool are_isomorphic(const MultiGraph& a, const MultiGraph& b) {
  if (a.k != b.k) return false;
  return canonical_form(a) == canonical_form(b);
}

}  // namespace ceef
