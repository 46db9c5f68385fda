#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <random>
#include <set>

#include "ceef/canonical.hpp"
#include "ceef/catalog.hpp"
#include "support/oracles.hpp"

using namespace ceef;

namespace {

MultiGraph graph_of(int m, std::vector<std::uint8_t> a) {
  return induce_multigraph(Partition(m, std::move(a)));
}

MultiGraph shuffled(const MultiGraph& g, std::mt19937_64& rng) {
  std::vector<int> perm(static_cast<std::size_t>(g.k));
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  MultiGraph out;
  out.k = g.k;
  out.w.assign(g.w.size(), 0);
  for (int i = 0; i < g.k; ++i)
    for (int j = 0; j < g.k; ++j) out.weight(perm[i], perm[j]) = g.weight(i, j);
  out.block_sizes.resize(static_cast<std::size_t>(g.k));
  for (int i = 0; i < g.k; ++i) out.block_sizes[i] = out.degree(i) / 2;
  return out;
}

}  // namespace

TEST_CASE("canonical form is invariant under relabeling") {
  std::mt19937_64 rng(11);
  for (int m = 3; m <= 8; ++m)
    for_each_admissible_partition(m, [&](const std::vector<std::uint8_t>& a) {
      MultiGraph g = graph_of(m, a);
      std::string key = canonical_form(g);
      for (int r = 0; r < 3; ++r) REQUIRE(canonical_form(shuffled(g, rng)) == key);
    });
}

TEST_CASE("canonical form separates non-isomorphic graphs") {
  // the three admissible shapes at order four are pairwise distinct
  MultiGraph cycle = graph_of(4, {0, 1, 2, 3});
  MultiGraph doubled_path = graph_of(4, {0, 1, 0, 2});
  MultiGraph stacked = graph_of(4, {0, 1, 0, 1});
  CHECK(canonical_form(cycle) != canonical_form(doubled_path));
  CHECK(canonical_form(cycle) != canonical_form(stacked));
  CHECK(canonical_form(doubled_path) != canonical_form(stacked));
}

TEST_CASE("canonical equality matches exhaustive permutation search") {
  // all pairs of admissible order-six graphs, checked both ways
  std::vector<MultiGraph> graphs;
  for_each_admissible_partition(6, [&](const std::vector<std::uint8_t>& a) {
    graphs.push_back(graph_of(6, a));
  });
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::size_t> pick(0, graphs.size() - 1);
  for (int trial = 0; trial < 300; ++trial) {
    const MultiGraph& x = graphs[pick(rng)];
    const MultiGraph& y = graphs[pick(rng)];
    REQUIRE(are_isomorphic(x, y) == oracles::isomorphic_by_force(x, y));
  }
}

TEST_CASE("equal node count and total multiplicity do not imply isomorphism") {
  // doubled triangle vs a path carrying multiplicities 2 and 4
  MultiGraph tri = graph_of(6, {0, 1, 2, 0, 1, 2});
  MultiGraph path = graph_of(6, {0, 1, 0, 2, 0, 2});
  REQUIRE(tri.k == 3);
  REQUIRE(path.k == 3);
  CHECK_FALSE(are_isomorphic(tri, path));
  CHECK(oracles::isomorphic_by_force(tri, path) == false);
}

TEST_CASE("canonical representative reproduces the canonical form") {
  std::mt19937_64 rng(13);
  for_each_admissible_partition(7, [&](const std::vector<std::uint8_t>& a) {
    MultiGraph g = graph_of(7, a);
    MultiGraph rep = canonical_representative(g);
    REQUIRE(canonical_form(rep) == canonical_form(g));
    REQUIRE(oracles::isomorphic_by_force(rep, g));
    // the serialized representative is exactly the canonical key
    std::string key = canonical_form(g);
    std::size_t idx = 1;
    for (int j = 1; j < rep.k; ++j)
      for (int i = 0; i < j; ++i)
        REQUIRE(rep.weight(i, j) == static_cast<unsigned char>(key.at(idx++)));
  });
}

TEST_CASE("round trip through the canonical key") {
  for_each_admissible_partition(6, [&](const std::vector<std::uint8_t>& a) {
    MultiGraph g = graph_of(6, a);
    MultiGraph back = graph_from_canonical(canonical_form(g));
    REQUIRE(are_isomorphic(back, g));
    REQUIRE(back.block_sizes == canonical_representative(g).block_sizes);
  });
}

TEST_CASE("lattice values at the finest partition") {
  CHECK(mobius_finest(Partition(3, {0, 1, 2})) == 1);
  CHECK(mobius_finest(Partition(3, {0, 1, 0})) == -1);
  CHECK(mobius_finest(Partition(4, {0, 0, 0, 1})) == 2);
  CHECK(mobius_finest(Partition(4, {0, 0, 1, 1})) == 1);
  CHECK(mobius_finest(Partition(4, {0, 0, 0, 0})) == -6);
  CHECK(mobius_finest(Partition(5, {0, 0, 0, 1, 1})) == -2);
}

TEST_CASE("closed form agrees with the lattice recursion everywhere") {
  for (int m = 2; m <= 6; ++m) {
    std::map<std::vector<std::uint8_t>, std::int64_t> memo;
    for_each_partition(m, [&](const std::vector<std::uint8_t>& a) {
      Partition p(m, a);
      REQUIRE(mobius_finest(p) == oracles::mobius_recursive(p, memo));
    });
  }
}

TEST_CASE("catalog for order four matches hand-computed classes") {
  Catalog cat = build_catalog(4);
  REQUIRE(cat.m == 4);
  REQUIRE(cat.classes.size() == 3);

  CHECK(cat.classes[0].k == 4);
  CHECK(cat.classes[0].t == 1);
  CHECK(cat.classes[0].d == 1);
  CHECK(cat.classes[0].h == 1);
  CHECK(cat.classes[0].a == 1);

  CHECK(cat.classes[1].k == 3);
  CHECK(cat.classes[1].t == 1);
  CHECK(cat.classes[1].d == 2);
  CHECK(cat.classes[1].h == 1);
  CHECK(cat.classes[1].a == -2);

  CHECK(cat.classes[2].k == 2);
  CHECK(cat.classes[2].t == 1);
  CHECK(cat.classes[2].d == 1);
  CHECK(cat.classes[2].h == 1);
  CHECK(cat.classes[2].a == 1);
  CHECK(cat.classes[2].graph.weight(0, 1) == 4);
}

TEST_CASE("catalog layout and aggregate invariants") {
  for (int m : {3, 5, 6, 7, 8}) {
    Catalog cat = build_catalog(m);
    std::int64_t total_d = 0;
    int prev_k = m + 1, prev_t = 0;
    for (const GraphClass& c : cat.classes) {
      if (c.k == prev_k) {
        REQUIRE(c.t == prev_t + 1);
      } else {
        REQUIRE(c.k < prev_k);
        REQUIRE(c.t == 1);
      }
      prev_k = c.k;
      prev_t = c.t;
      REQUIRE(c.k >= 2);
      REQUIRE(c.graph.total_multiplicity() == m);
      REQUIRE(c.a == (((m - c.k) % 2 == 0) ? c.d * c.h : -c.d * c.h));
      total_d += c.d;
    }
    std::int64_t admissible = 0;
    for_each_admissible_partition(m, [&](const std::vector<std::uint8_t>&) { ++admissible; });
    REQUIRE(total_d == admissible);
  }
}

TEST_CASE("every admissible partition lands in a class of its shape") {
  int m = 7;
  Catalog cat = build_catalog(m);
  std::map<std::string, const GraphClass*> by_key;
  for (const GraphClass& c : cat.classes) by_key[canonical_form(c.graph)] = &c;
  std::map<std::string, std::int64_t> seen;
  for_each_admissible_partition(m, [&](const std::vector<std::uint8_t>& a) {
    Partition p(m, a);
    MultiGraph g = induce_multigraph(p);
    std::string key = canonical_form(g);
    REQUIRE(by_key.count(key) == 1);
    // h is a class invariant: every member computes the same magnitude
    std::int64_t h = 1;
    for (int sz : p.block_sizes()) h = checked_mul(h, factorial(sz - 1));
    REQUIRE(h == by_key[key]->h);
    ++seen[key];
  });
  for (const GraphClass& c : cat.classes) REQUIRE(seen[canonical_form(c.graph)] == c.d);
}

TEST_CASE("catalog build is deterministic and thread-count independent") {
  CatalogOptions one;
  one.threads = 1;
  CatalogOptions four;
  four.threads = 4;
  Catalog a = build_catalog(7, one);
  Catalog b = build_catalog(7, four);
  Catalog c = build_catalog(7, one);
  CHECK(a == b);
  CHECK(a == c);
}

TEST_CASE("catalog rejects out-of-range orders") {
  CHECK_THROWS_AS(build_catalog(2), std::invalid_argument);
  CHECK_THROWS_AS(build_catalog(0), std::invalid_argument);
  CatalogOptions opts;
  opts.max_order = 12;
  CHECK_THROWS_AS(build_catalog(13, opts), std::invalid_argument);
  opts.max_order = 5;
  CHECK_THROWS_AS(build_catalog(6, opts), std::invalid_argument);
  CHECK_NOTHROW(build_catalog(5, opts));
}

TEST_CASE("catalog JSON round trip") {
  for (int m : {4, 8}) {
    Catalog cat = build_catalog(m);
    Catalog back = catalog_from_json(catalog_to_json(cat));
    REQUIRE(cat == back);
  }
}

TEST_CASE("corrupted catalog data is rejected") {
  Catalog cat = build_catalog(4);
  auto j = catalog_to_json(cat);
  auto bad = j;
  bad["classes"][0]["a"] = 5;
  CHECK_THROWS_AS(catalog_from_json(bad), std::invalid_argument);
  bad = j;
  bad["classes"][1]["weights"][0][1] = 7;
  CHECK_THROWS_AS(catalog_from_json(bad), std::invalid_argument);
  bad = j;
  bad["classes"][2]["weights"][0][0] = 1;
  CHECK_THROWS_AS(catalog_from_json(bad), std::invalid_argument);
}
