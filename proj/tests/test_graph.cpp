#include <doctest.h>

#include <algorithm>
#include <set>
#include <unordered_set>

#include "dagmc/graph.hpp"
#include "dagmc/rng.hpp"

using namespace dagmc;

namespace {

Dag chain3() {
  // 0 -> 1 -> 2
  Dag g(3);
  g.parents[1] = bit(0);
  g.parents[2] = bit(1);
  return g;
}

Dag random_dag(int d, double p, Rng& rng) {
  // Random order, then edges forward along it.
  std::vector<int> perm(d);
  for (int i = 0; i < d; ++i) perm[i] = i;
  for (int i = d - 1; i > 0; --i) std::swap(perm[i], perm[rng.uniform_int(i + 1)]);
  Dag g(d);
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b)
      if (rng.bernoulli(p)) g.parents[perm[b]] |= bit(perm[a]);
  return g;
}

// Reference cycle check by DFS with colors.
bool dfs_acyclic(const Dag& g) {
  std::vector<int> color(g.d, 0);
  std::function<bool(int)> visit = [&](int u) {
    color[u] = 1;
    for (int v = 0; v < g.d; ++v) {
      if (!g.has_edge(u, v)) continue;
      if (color[v] == 1) return false;
      if (color[v] == 0 && !visit(v)) return false;
    }
    color[u] = 2;
    return true;
  };
  for (int u = 0; u < g.d; ++u)
    if (color[u] == 0 && !visit(u)) return false;
  return true;
}

// Closure by boolean matrix powering.
std::vector<NodeSet> closure_oracle(const Dag& g) {
  std::vector<NodeSet> reach(g.d, 0);
  for (int v = 0; v < g.d; ++v)
    for (int u = 0; u < g.d; ++u)
      if (g.has_edge(u, v)) reach[u] |= bit(v);
  for (bool changed = true; changed;) {
    changed = false;
    for (int u = 0; u < g.d; ++u)
      for (NodeSet r = reach[u]; r;) {
        int v = lowest(r);
        r &= r - 1;
        NodeSet grown = reach[u] | reach[v];
        if (grown != reach[u]) {
          reach[u] = grown;
          changed = true;
        }
      }
  }
  return reach;
}

unsigned long long factorial(int n) {
  unsigned long long f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// Linear extensions by permutation enumeration.
unsigned long long linext_oracle(const Dag& g) {
  std::vector<int> perm(g.d);
  for (int i = 0; i < g.d; ++i) perm[i] = i;
  unsigned long long count = 0;
  do {
    Order o;
    o.perm = perm;
    if (o.consistent_with(g)) ++count;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return count;
}

}  // namespace

TEST_CASE("is_acyclic basics") {
  CHECK(is_acyclic({{1, 2}, {2, 0}}, 3));
  CHECK(is_acyclic({{1, 2}, {2, 3}}, 4));
  CHECK_FALSE(is_acyclic({{1, 2}, {2, 1}}, 3));
  CHECK_FALSE(is_acyclic({{0, 1}, {1, 2}, {2, 0}}, 3));
  CHECK_THROWS_AS(is_acyclic({{0, 7}}, 3), InputError);
}

TEST_CASE("is_acyclic agrees with DFS oracle on random edge sets") {
  Rng rng(12345);
  for (int trial = 0; trial < 1000; ++trial) {
    Dag g(6);
    std::vector<std::pair<int, int>> edges;
    for (int u = 0; u < 6; ++u)
      for (int v = 0; v < 6; ++v)
        if (u != v && rng.bernoulli(0.2)) {
          g.parents[v] |= bit(u);
          edges.push_back({u, v});
        }
    CHECK(is_acyclic(edges, 6) == dfs_acyclic(g));
  }
}

TEST_CASE("has_path on a chain") {
  Dag g = chain3();
  CHECK(has_path(g, 0, 2));
  CHECK_FALSE(has_path(g, 2, 0));
  CHECK_THROWS_AS(has_path(g, 1, 1), InputError);
}

TEST_CASE("has_path agrees with closure oracle") {
  Rng rng(777);
  for (int trial = 0; trial < 200; ++trial) {
    Dag g = random_dag(6, 0.3, rng);
    auto reach = closure_oracle(g);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j)
        if (i != j) CHECK(has_path(g, i, j) == contains(reach[i], j));
  }
}

TEST_CASE("neighborhood of the empty graph and a chain") {
  CHECK(neighborhood(Dag(3)).size() == 6);
  // chain 0->1->2: delete either edge, reverse either edge, add 0->2.
  CHECK(neighborhood(chain3()).size() == 5);
}

TEST_CASE("neighborhood equals brute-force edit enumeration") {
  Rng rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    Dag g = random_dag(5, 0.35, rng);
    auto nbd = neighborhood(g);
    std::set<std::string> got;
    for (const Dag& h : nbd) got.insert(encode_dag(h));
    CHECK(got.size() == nbd.size());  // no duplicates

    std::set<std::string> expected;
    for (int u = 0; u < 5; ++u)
      for (int v = 0; v < 5; ++v) {
        if (u == v) continue;
        if (g.has_edge(u, v)) {
          Dag del = g;
          del.parents[v] &= ~bit(u);
          expected.insert(encode_dag(del));
          Dag rev = del;
          rev.parents[u] |= bit(v);
          if (is_acyclic(rev)) expected.insert(encode_dag(rev));
        } else if (!g.has_edge(v, u)) {
          Dag add = g;
          add.parents[v] |= bit(u);
          if (is_acyclic(add)) expected.insert(encode_dag(add));
        }
      }
    CHECK(got == expected);
  }
}

TEST_CASE("neighborhood moves are symmetric") {
  Rng rng(4242);
  for (int trial = 0; trial < 20; ++trial) {
    Dag g = random_dag(5, 0.3, rng);
    for (const Dag& h : neighborhood(g)) {
      auto back = neighborhood(h);
      CHECK(std::find(back.begin(), back.end(), g) != back.end());
    }
  }
}

TEST_CASE("ancestor matrix incremental updates") {
  Dag g(3);
  AncestorMatrix m(g);
  m.add_edge(g, 1, 2);
  CHECK(m.reaches(1, 2));
  CHECK_FALSE(m.reaches(2, 1));
  CHECK_FALSE(m.reaches(0, 2));

  Dag chain = chain3();
  AncestorMatrix cm(chain);
  CHECK(cm.reaches(0, 2));
  Dag before = chain;
  CHECK_THROWS_AS(cm.add_edge(chain, 2, 0), InputError);
  CHECK(chain == before);
}

TEST_CASE("ancestor matrix matches from-scratch closure over random edits") {
  Rng rng(31337);
  Dag g(8);
  AncestorMatrix m(g);
  int applied = 0;
  while (applied < 10000) {
    auto edits = legal_edits(g, m);
    if (edits.empty()) break;
    const EdgeEdit e = edits[rng.uniform_int(edits.size())];
    switch (e.kind) {
      case EditKind::Add: m.add_edge(g, e.u, e.v); break;
      case EditKind::Delete: m.delete_edge(g, e.u, e.v); break;
      case EditKind::Reverse: m.reverse_edge(g, e.u, e.v); break;
    }
    ++applied;
    if (applied % 97 == 0) {
      auto reach = closure_oracle(g);
      for (int i = 0; i < 8; ++i) CHECK(m.descendants(i) == reach[i]);
      CHECK(is_acyclic(g));
    }
  }
  auto reach = closure_oracle(g);
  for (int i = 0; i < 8; ++i) {
    CHECK(m.descendants(i) == reach[i]);
    CHECK_FALSE(m.reaches(i, i));
  }
  CHECK(applied == 10000);
}

TEST_CASE("count_linear_extensions small cases") {
  CHECK(count_linear_extensions(chain3()) == 1);
  Dag fork(3);  // 0 <- 1 -> 2
  fork.parents[0] = bit(1);
  fork.parents[2] = bit(1);
  CHECK(count_linear_extensions(fork) == 2);
  CHECK(count_linear_extensions(Dag(3)) == 6);
}

TEST_CASE("count_linear_extensions equals permutation enumeration") {
  Rng rng(5150);
  for (int trial = 0; trial < 200; ++trial) {
    int d = 2 + int(rng.uniform_int(5));
    Dag g = random_dag(d, 0.4, rng);
    CHECK(count_linear_extensions(g) == linext_oracle(g));
  }
}

TEST_CASE("count_linear_extensions properties") {
  Rng rng(6001);
  for (int trial = 0; trial < 50; ++trial) {
    Dag g = random_dag(6, 0.3, rng);
    auto c = count_linear_extensions(g);
    CHECK(c >= 1);
    if (g.num_edges() == 0) CHECK(c == factorial(g.d));
  }
  // Hamiltonian path => exactly one extension.
  Dag path(6);
  for (int i = 1; i < 6; ++i) path.parents[i] = bit(i - 1);
  CHECK(count_linear_extensions(path) == 1);
}

TEST_CASE("DAGs consistent with a fixed order sum to 2^(d choose 2)") {
  for (int d = 2; d <= 4; ++d) {
    Order o;
    for (int i = 0; i < d; ++i) o.perm.push_back(i);
    unsigned long long consistent = 0;
    enumerate_dags(d, [&](const Dag& g) {
      if (o.consistent_with(g)) ++consistent;
    });
    CHECK(consistent == (1ull << (d * (d - 1) / 2)));
  }
}

TEST_CASE("enumerate_dags counts match the published sequence") {
  CHECK(count_dags(1) == 1);
  CHECK(count_dags(2) == 3);
  CHECK(count_dags(3) == 25);
  CHECK(count_dags(4) == 543);
  CHECK(count_dags(5) == 29281);
  CHECK_THROWS_AS(count_dags(7), ResourceError);
}

TEST_CASE("enumerate_dags yields distinct acyclic graphs") {
  std::unordered_set<std::string> seen;
  enumerate_dags(4, [&](const Dag& g) {
    CHECK(is_acyclic(g));
    CHECK(seen.insert(encode_dag(g)).second);
  });
  CHECK(seen.size() == 543);
}

TEST_CASE("dag text encoding round-trips") {
  Rng rng(808);
  for (int trial = 0; trial < 100; ++trial) {
    Dag g = random_dag(2 + int(rng.uniform_int(7)), 0.4, rng);
    CHECK(decode_dag(encode_dag(g)) == g);
  }
  CHECK(encode_dag(chain3()) == "3;0,1,2");
  CHECK_THROWS_AS(decode_dag("3;0,1,cat"), InputError);
  CHECK_THROWS_AS(decode_dag("2;2,1"), InputError);  // cycle
}
