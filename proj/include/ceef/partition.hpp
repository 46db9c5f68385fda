#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ceef {

// Set partition of {0, ..., m-1} stored as a restricted growth string:
// assignment[0] == 0 and assignment[i] <= 1 + max(assignment[0..i-1]).
// Blocks are numbered 0..k-1 in order of first appearance.
class Partition {
 public:
  Partition(int m, std::vector<std::uint8_t> assignment)
      : m_(m), a_(std::move(assignment)) {
    if (m < 1) throw std::invalid_argument("Partition: order must be >= 1");
    if (static_cast<int>(a_.size()) != m)
      throw std::invalid_argument("Partition: assignment length != order");
    int max_seen = -1;
    for (int i = 0; i < m; ++i) {
      if (a_[i] > max_seen + 1)
        throw std::invalid_argument("Partition: not a restricted growth string");
      if (a_[i] == max_seen + 1) ++max_seen;
    }
    k_ = max_seen + 1;
  }

  static Partition from_blocks(int m, const std::vector<std::vector<int>>& blocks) {
    std::vector<std::uint8_t> a(static_cast<std::size_t>(m), 255);
    for (const auto& blk : blocks)
      for (int i : blk) {
        if (i < 0 || i >= m) throw std::invalid_argument("Partition: element out of range");
        if (a[i] != 255) throw std::invalid_argument("Partition: element repeated");
        a[i] = 0;
      }
    for (int i = 0; i < m; ++i)
      if (a[i] == 255) throw std::invalid_argument("Partition: element missing");
    // renumber blocks by first appearance
    std::vector<int> block_of(static_cast<std::size_t>(m));
    for (std::size_t b = 0; b < blocks.size(); ++b)
      for (int i : blocks[b]) block_of[i] = static_cast<int>(b);
    std::vector<int> relabel(blocks.size(), -1);
    int next = 0;
    for (int i = 0; i < m; ++i) {
      int b = block_of[i];
      if (relabel[b] < 0) relabel[b] = next++;
      a[i] = static_cast<std::uint8_t>(relabel[b]);
    }
    return Partition(m, std::move(a));
  }

  int order() const { return m_; }
  int size() const { return k_; }
  int block_of(int i) const { return a_[i]; }
  const std::vector<std::uint8_t>& assignment() const { return a_; }

  std::vector<std::vector<int>> blocks() const {
    std::vector<std::vector<int>> out(static_cast<std::size_t>(k_));
    for (int i = 0; i < m_; ++i) out[a_[i]].push_back(i);
    return out;
  }

  std::vector<int> block_sizes() const {
    std::vector<int> out(static_cast<std::size_t>(k_), 0);
    for (int i = 0; i < m_; ++i) ++out[a_[i]];
    return out;
  }

 private:
  int m_;
  int k_;
  std::vector<std::uint8_t> a_;
};

// A partition induces a self-loop when some cyclically adjacent pair of
// indices lands in one block (indices are arranged around an m-cycle).
inline bool has_self_loop(const Partition& p) {
  int m = p.order();
  if (m == 1) return true;  // the lone index is cyclically adjacent to itself
  for (int i = 0; i + 1 < m; ++i)
    if (p.block_of(i) == p.block_of(i + 1)) return true;
  return p.block_of(m - 1) == p.block_of(0);
}

// Multigraph on nodes 0..k-1 with symmetric integer edge multiplicities and
// no self-loops. block_sizes[i] is the size of the merged class behind node
// i; it always equals degree(i) / 2 for graphs induced by admissible
// partitions.
struct MultiGraph {
  int k = 0;
  std::vector<int> w;  // k*k, symmetric, zero diagonal
  std::vector<int> block_sizes;

  int weight(int a, int b) const { return w[static_cast<std::size_t>(a) * k + b]; }
  int& weight(int a, int b) { return w[static_cast<std::size_t>(a) * k + b]; }

  int degree(int a) const {
    int d = 0;
    for (int b = 0; b < k; ++b) d += weight(a, b);
    return d;
  }

  int total_multiplicity() const {
    int s = 0;
    for (int a = 0; a < k; ++a)
      for (int b = a + 1; b < k; ++b) s += weight(a, b);
    return s;
  }

  friend bool operator==(const MultiGraph& x, const MultiGraph& y) {
    return x.k == y.k && x.w == y.w;
  }
};

// Walks the m-cycle once and accumulates one unit of multiplicity per cycle
// edge between the blocks of its endpoints.
inline MultiGraph induce_multigraph(const Partition& p) {
  if (has_self_loop(p))
    throw std::invalid_argument("induce_multigraph: partition induces a self-loop");
  int m = p.order();
  MultiGraph g;
  g.k = p.size();
  g.w.assign(static_cast<std::size_t>(g.k) * g.k, 0);
  g.block_sizes = p.block_sizes();
  for (int i = 0; i < m; ++i) {
    int a = p.block_of(i), b = p.block_of((i + 1) % m);
    ++g.weight(a, b);
    ++g.weight(b, a);
  }
  return g;
}

namespace detail {

template <class F>
void partition_dfs(std::vector<std::uint8_t>& a, int pos, int max_used, F& f) {
  int m = static_cast<int>(a.size());
  if (pos == m) {
    f(const_cast<const std::vector<std::uint8_t>&>(a));
    return;
  }
  for (int b = 0; b <= max_used + 1; ++b) {
    a[pos] = static_cast<std::uint8_t>(b);
    partition_dfs(a, pos + 1, b > max_used ? b : max_used, f);
  }
}

// Enumerates only assignments where no two cyclically adjacent indices share
// a block, skipping whole subtrees as soon as a prefix violates that.
template <class F>
void admissible_dfs(std::vector<std::uint8_t>& a, int pos, int max_used, F& f) {
  int m = static_cast<int>(a.size());
  if (pos == m) {
    if (a[m - 1] != a[0]) f(const_cast<const std::vector<std::uint8_t>&>(a));
    return;
  }
  int prev = a[pos - 1];
  for (int b = 0; b <= max_used + 1; ++b) {
    if (b == prev) continue;
    a[pos] = static_cast<std::uint8_t>(b);
    admissible_dfs(a, pos + 1, b > max_used ? b : max_used, f);
  }
}

}  // namespace detail

// All set partitions of {0..m-1} in lexicographic restricted-growth order.
template <class F>
void for_each_partition(int m, F f) {
  if (m < 1) throw std::invalid_argument("for_each_partition: order must be >= 1");
  std::vector<std::uint8_t> a(static_cast<std::size_t>(m), 0);
  detail::partition_dfs(a, 1, 0, f);
}

// Partitions that survive the exclusion rules: no self-loop in the induced
// multigraph (which also rules out the one-block partition for m >= 1).
template <class F>
void for_each_admissible_partition(int m, F f) {
  if (m < 1) throw std::invalid_argument("for_each_admissible_partition: order must be >= 1");
  if (m == 1) return;  // lone index is cyclically adjacent to itself
  std::vector<std::uint8_t> a(static_cast<std::size_t>(m), 0);
  detail::admissible_dfs(a, 1, 0, f);
}

inline std::uint64_t count_partitions(int m) {
  std::uint64_t c = 0;
  for_each_partition(m, [&](const std::vector<std::uint8_t>&) { ++c; });
  return c;
}

}  // namespace ceef
