#pragma once

#include <atomic>
#include <cstdint>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "ceef/canonical.hpp"
#include "ceef/partition.hpp"

namespace ceef {

inline std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_mul_overflow(a, b, &r))
    throw std::overflow_error("coefficient arithmetic overflowed 64 bits");
  return r;
}

inline std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r))
    throw std::overflow_error("coefficient arithmetic overflowed 64 bits");
  return r;
}

inline std::int64_t factorial(int n) {
  std::int64_t r = 1;
  for (int i = 2; i <= n; ++i) r = checked_mul(r, i);
  return r;
}

// Value at the finest partition in the interval below p on the partition
// lattice: sign alternates with the number of merges, magnitude is the
// product of (block size - 1)! over the blocks of p.
inline std::int64_t mobius_finest(const Partition& p) {
  std::int64_t h = 1;
  for (int sz : p.block_sizes()) h = checked_mul(h, factorial(sz - 1));
  return ((p.order() - p.size()) % 2 == 0) ? h : -h;
}

// One isomorphism class of induced multigraphs, with everything the formula
// builder needs: class size d, magnitude h, signed coefficient a, and the
// canonical representative graph.
struct GraphClass {
  int k = 0;
  int t = 0;
  std::int64_t d = 0;
  std::int64_t h = 0;
  std::int64_t a = 0;
  MultiGraph graph;
};

struct Catalog {
  int m = 0;
  std::vector<GraphClass> classes;  // k descending, then t ascending

  friend bool operator==(const Catalog& x, const Catalog& y) {
    if (x.m != y.m || x.classes.size() != y.classes.size()) return false;
    for (std::size_t i = 0; i < x.classes.size(); ++i) {
      const GraphClass &a = x.classes[i], &b = y.classes[i];
      if (a.k != b.k || a.t != b.t || a.d != b.d || a.h != b.h || a.a != b.a ||
          !(a.graph == b.graph))
        return false;
    }
    return true;
  }
};

struct CatalogOptions {
  int threads = 1;
  int max_order = 12;
};

namespace detail {

struct ClassAgg {
  std::int64_t d = 0;
  std::int64_t h = 0;
};

inline std::int64_t h_of_assignment(const std::vector<std::uint8_t>& a, int k) {
  int counts[16] = {0};
  for (std::uint8_t b : a) ++counts[b];
  std::int64_t h = 1;
  for (int b = 0; b < k; ++b) h = checked_mul(h, factorial(counts[b] - 1));
  return h;
}

struct CatalogWorker {
  int m;
  std::map<std::string, ClassAgg> agg;
  MultiGraph scratch;

  explicit CatalogWorker(int order) : m(order) {}

  void consume(const std::vector<std::uint8_t>& a) {
    int k = 0;
    for (std::uint8_t b : a)
      if (b + 1 > k) k = b + 1;
    scratch.k = k;
    scratch.w.assign(static_cast<std::size_t>(k) * k, 0);
    for (int i = 0; i < m; ++i) {
      int x = a[i], y = a[(i + 1) % m];
      ++scratch.weight(x, y);
      ++scratch.weight(y, x);
    }
    std::string key = canonical_form(scratch);
    std::int64_t h = h_of_assignment(a, k);
    auto [it, fresh] = agg.try_emplace(std::move(key), ClassAgg{0, h});
    it->second.d = checked_add(it->second.d, 1);
    if (!fresh && it->second.h != h)
      throw std::logic_error("members of one class disagree on h");
  }
};

// Splits the enumeration into fixed-prefix tasks so several workers can walk
// disjoint subtrees. The aggregation is a keyed sum, so the merge result does
// not depend on task order.
inline std::map<std::string, ClassAgg> aggregate_classes(int m, int threads) {
  int prefix_len = std::min(m - 1, 5);
  struct Task {
    std::vector<std::uint8_t> a;
    int max_used;
  };
  std::vector<Task> tasks;
  std::vector<std::uint8_t> a(static_cast<std::size_t>(m), 0);
  auto build = [&](auto&& self, int pos, int max_used) -> void {
    if (pos == prefix_len) {
      tasks.push_back({a, max_used});
      return;
    }
    int prev = a[pos - 1];
    for (int b = 0; b <= max_used + 1; ++b) {
      if (b == prev) continue;
      a[pos] = static_cast<std::uint8_t>(b);
      self(self, pos + 1, b > max_used ? b : max_used);
    }
  };
  build(build, 1, 0);

  auto run_task = [&](CatalogWorker& w, const Task& t) {
    std::vector<std::uint8_t> buf = t.a;
    auto dfs = [&](auto&& self, int pos, int max_used) -> void {
      if (pos == m) {
        if (buf[m - 1] != buf[0]) w.consume(buf);
        return;
      }
      int prev = buf[pos - 1];
      for (int b = 0; b <= max_used + 1; ++b) {
        if (b == prev) continue;
        buf[pos] = static_cast<std::uint8_t>(b);
        self(self, pos + 1, b > max_used ? b : max_used);
      }
    };
    if (prefix_len == m) {
      if (buf[m - 1] != buf[0]) w.consume(buf);
    } else {
      dfs(dfs, prefix_len, t.max_used);
    }
  };

  int nthreads = std::max(1, threads);
  std::vector<CatalogWorker> workers(static_cast<std::size_t>(nthreads), CatalogWorker(m));
  if (nthreads == 1) {
    for (const Task& t : tasks) run_task(workers[0], t);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < nthreads; ++w)
      pool.emplace_back([&, w] {
        for (;;) {
          std::size_t i = next.fetch_add(1);
          if (i >= tasks.size()) return;
          run_task(workers[static_cast<std::size_t>(w)], tasks[i]);
        }
      });
    for (auto& th : pool) th.join();
  }

  std::map<std::string, ClassAgg> merged = std::move(workers[0].agg);
  for (int w = 1; w < nthreads; ++w)
    for (auto& [key, val] : workers[static_cast<std::size_t>(w)].agg) {
      auto [it, fresh] = merged.try_emplace(key, val);
      if (!fresh) {
        it->second.d = checked_add(it->second.d, val.d);
        if (it->second.h != val.h)
          throw std::logic_error("members of one class disagree on h");
      }
    }
  return merged;
}

}  // namespace detail

inline Catalog build_catalog(int m, const CatalogOptions& opts = {}) {
  if (m < 3) throw std::invalid_argument("catalog: order must be at least 3");
  if (m > opts.max_order)
    throw std::invalid_argument("catalog: order " + std::to_string(m) +
                                " exceeds the limit of " + std::to_string(opts.max_order) +
                                " (raise the limit explicitly to proceed)");
  auto merged = detail::aggregate_classes(m, opts.threads);

  Catalog cat;
  cat.m = m;
  // keys sort by (k, triangle) because k is the leading byte; walking the
  // map in reverse k order while numbering t in forward key order gives the
  // required (k desc, t asc) layout
  std::map<int, std::vector<std::pair<const std::string*, const detail::ClassAgg*>>> by_k;
  for (auto& [key, val] : merged)
    by_k[static_cast<unsigned char>(key[0])].emplace_back(&key, &val);
  for (auto it = by_k.rbegin(); it != by_k.rend(); ++it) {
    int t = 1;
    for (auto& [key, val] : it->second) {
      GraphClass c;
      c.k = it->first;
      c.t = t++;
      c.d = val->d;
      c.h = val->h;
      c.a = ((m - c.k) % 2 == 0) ? checked_mul(val->d, val->h)
                                 : -checked_mul(val->d, val->h);
      c.graph = graph_from_canonical(*key);
      std::int64_t h_structural = 1;
      for (int g : c.graph.block_sizes) h_structural = checked_mul(h_structural, factorial(g - 1));
      if (h_structural != c.h)
        throw std::logic_error("class magnitude disagrees with its graph degrees");
      if (c.graph.total_multiplicity() != m)
        throw std::logic_error("class graph multiplicity disagrees with the order");
      cat.classes.push_back(std::move(c));
    }
  }
  return cat;
}

inline nlohmann::ordered_json catalog_to_json(const Catalog& cat) {
  nlohmann::ordered_json j;
  j["m"] = cat.m;
  j["classes"] = nlohmann::ordered_json::array();
  for (const GraphClass& c : cat.classes) {
    nlohmann::ordered_json jc;
    jc["k"] = c.k;
    jc["t"] = c.t;
    jc["d"] = c.d;
    jc["h"] = c.h;
    jc["a"] = c.a;
    auto rows = nlohmann::ordered_json::array();
    for (int i = 0; i < c.graph.k; ++i) {
      auto row = nlohmann::ordered_json::array();
      for (int jcol = 0; jcol < c.graph.k; ++jcol) row.push_back(c.graph.weight(i, jcol));
      rows.push_back(std::move(row));
    }
    jc["weights"] = std::move(rows);
    j["classes"].push_back(std::move(jc));
  }
  return j;
}

inline Catalog catalog_from_json(const nlohmann::json& j) {
  Catalog cat;
  cat.m = j.at("m").get<int>();
  if (cat.m < 3) throw std::invalid_argument("catalog data: bad order");
  for (const auto& jc : j.at("classes")) {
    GraphClass c;
    c.k = jc.at("k").get<int>();
    c.t = jc.at("t").get<int>();
    c.d = jc.at("d").get<std::int64_t>();
    c.h = jc.at("h").get<std::int64_t>();
    c.a = jc.at("a").get<std::int64_t>();
    const auto& rows = jc.at("weights");
    if (c.k < 2 || static_cast<int>(rows.size()) != c.k)
      throw std::invalid_argument("catalog data: bad weight matrix");
    c.graph.k = c.k;
    c.graph.w.assign(static_cast<std::size_t>(c.k) * c.k, 0);
    for (int i = 0; i < c.k; ++i) {
      if (static_cast<int>(rows[i].size()) != c.k)
        throw std::invalid_argument("catalog data: bad weight matrix");
      for (int jcol = 0; jcol < c.k; ++jcol)
        c.graph.weight(i, jcol) = rows[i][jcol].get<int>();
    }
    for (int i = 0; i < c.k; ++i) {
      if (c.graph.weight(i, i) != 0)
        throw std::invalid_argument("catalog data: self-loop in class graph");
      for (int jcol = 0; jcol < c.k; ++jcol)
        if (c.graph.weight(i, jcol) != c.graph.weight(jcol, i))
          throw std::invalid_argument("catalog data: asymmetric weights");
    }
    if (c.graph.total_multiplicity() != cat.m)
      throw std::invalid_argument("catalog data: weights disagree with the order");
    c.graph.block_sizes.resize(static_cast<std::size_t>(c.k));
    std::int64_t h = 1;
    for (int i = 0; i < c.k; ++i) {
      int deg = c.graph.degree(i);
      if (deg % 2 != 0) throw std::invalid_argument("catalog data: odd node degree");
      c.graph.block_sizes[i] = deg / 2;
      h = checked_mul(h, factorial(deg / 2 - 1));
    }
    if (h != c.h) throw std::invalid_argument("catalog data: h disagrees with degrees");
    std::int64_t expect_a = ((cat.m - c.k) % 2 == 0) ? checked_mul(c.d, c.h)
                                                     : -checked_mul(c.d, c.h);
    if (expect_a != c.a) throw std::invalid_argument("catalog data: inconsistent coefficient");
    cat.classes.push_back(std::move(c));
  }
  if (cat.classes.empty()) throw std::invalid_argument("catalog data: no classes");
  return cat;
}

inline void save_catalog(const Catalog& cat, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write catalog file: " + path);
  out << catalog_to_json(cat).dump(1) << '\n';
}

inline Catalog load_catalog(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read catalog file: " + path);
  nlohmann::json j = nlohmann::json::parse(in);
  return catalog_from_json(j);
}

}  // namespace ceef
