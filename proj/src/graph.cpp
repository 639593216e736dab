#include "dagmc/graph.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <sstream>

namespace dagmc {

bool is_acyclic(const std::vector<std::pair<int, int>>& edges, int d) {
  std::vector<NodeSet> parents(d, 0);
  for (auto [u, v] : edges) {
    if (u < 0 || u >= d || v < 0 || v >= d)
      throw InputError("edge endpoint out of range");
    if (u == v) return false;
    parents[v] |= bit(u);
  }
  Dag g(d);
  g.parents = std::move(parents);
  return is_acyclic(g);
}

bool is_acyclic(const Dag& g) {
  // Kahn: repeatedly strip nodes whose parents are all stripped.
  NodeSet removed = 0;
  NodeSet all = full_set(g.d);
  for (;;) {
    NodeSet next = removed;
    for (int i = 0; i < g.d; ++i)
      if (!contains(removed, i) && (g.parents[i] & ~removed) == 0) next |= bit(i);
    if (next == removed) break;
    removed = next;
  }
  return removed == all;
}

std::vector<int> topological_order(const Dag& g) {
  std::vector<int> order;
  order.reserve(g.d);
  NodeSet placed = 0;
  while ((int)order.size() < g.d) {
    bool progressed = false;
    for (int i = 0; i < g.d; ++i) {
      if (!contains(placed, i) && (g.parents[i] & ~placed) == 0) {
        order.push_back(i);
        placed |= bit(i);
        progressed = true;
      }
    }
    if (!progressed) throw ContractError("topological_order: graph has a cycle");
  }
  return order;
}

bool has_path(const Dag& g, int i, int j) {
  if (i == j) throw InputError("has_path: i == j");
  // BFS over children.
  std::vector<NodeSet> children(g.d, 0);
  for (int v = 0; v < g.d; ++v)
    for (int u = 0; u < g.d; ++u)
      if (contains(g.parents[v], u)) children[u] |= bit(v);
  NodeSet frontier = bit(i), seen = bit(i);
  while (frontier) {
    NodeSet next = 0;
    for (NodeSet f = frontier; f;) {
      int u = lowest(f);
      f &= f - 1;
      next |= children[u] & ~seen;
    }
    if (contains(next, j)) return true;
    seen |= next;
    frontier = next;
  }
  return false;
}

AncestorMatrix::AncestorMatrix(const Dag& g) { recompute(g); }

void AncestorMatrix::recompute(const Dag& g) {
  d_ = g.d;
  reach_.assign(d_, 0);
  // Process in reverse topological order: reach[u] = union over children.
  std::vector<int> order = topological_order(g);
  std::vector<NodeSet> children(d_, 0);
  for (int v = 0; v < d_; ++v)
    for (NodeSet p = g.parents[v]; p;) {
      int u = lowest(p);
      p &= p - 1;
      children[u] |= bit(v);
    }
  for (int k = d_ - 1; k >= 0; --k) {
    int u = order[k];
    NodeSet r = children[u];
    for (NodeSet c = children[u]; c;) {
      int v = lowest(c);
      c &= c - 1;
      r |= reach_[v];
    }
    reach_[u] = r;
  }
}

void AncestorMatrix::add_edge(Dag& g, int u, int v) {
  if (addition_cyclic(u, v)) throw InputError("add_edge: would create a cycle");
  g.parents[v] |= bit(u);
  // Everything reaching u (plus u) now reaches everything v reaches (plus v).
  NodeSet gain = reach_[v] | bit(v);
  for (int i = 0; i < d_; ++i)
    if (i == u || contains(reach_[i], u)) reach_[i] |= gain;
}

void AncestorMatrix::delete_edge(Dag& g, int u, int v) {
  g.parents[v] &= ~bit(u);
  recompute(g);
}

void AncestorMatrix::reverse_edge(Dag& g, int u, int v) {
  g.parents[v] &= ~bit(u);
  Dag probe = g;
  AncestorMatrix pm(probe);
  if (pm.addition_cyclic(v, u)) {
    g.parents[v] |= bit(u);  // restore
    throw InputError("reverse_edge: would create a cycle");
  }
  g.parents[u] |= bit(v);
  recompute(g);
}

std::vector<EdgeEdit> legal_edits(const Dag& g, const AncestorMatrix& m) {
  std::vector<EdgeEdit> edits;
  for (int v = 0; v < g.d; ++v) {
    for (int u = 0; u < g.d; ++u) {
      if (u == v) continue;
      if (g.has_edge(u, v)) {
        edits.push_back({EditKind::Delete, u, v});
        // Reversal legal iff no alternative path u ~> v once u->v is dropped.
        Dag h = g;
        h.parents[v] &= ~bit(u);
        if (!has_path(h, u, v)) edits.push_back({EditKind::Reverse, u, v});
      } else if (!g.has_edge(v, u) && !m.addition_cyclic(u, v)) {
        edits.push_back({EditKind::Add, u, v});
      }
    }
  }
  return edits;
}

std::vector<EdgeEdit> legal_edits(const Dag& g) {
  AncestorMatrix m(g);
  return legal_edits(g, m);
}

std::vector<Dag> neighborhood(const Dag& g) {
  std::vector<Dag> out;
  for (const EdgeEdit& e : legal_edits(g)) {
    Dag h = g;
    switch (e.kind) {
      case EditKind::Add: h.parents[e.v] |= bit(e.u); break;
      case EditKind::Delete: h.parents[e.v] &= ~bit(e.u); break;
      case EditKind::Reverse:
        h.parents[e.v] &= ~bit(e.u);
        h.parents[e.u] |= bit(e.v);
        break;
    }
    out.push_back(std::move(h));
  }
  return out;
}

unsigned __int128 count_linear_extensions(const Dag& g, int cap) {
  if (g.d > cap || g.d > 24)
    throw ResourceError("count_linear_extensions: d over cap");
  const NodeSet all = full_set(g.d);
  std::vector<unsigned __int128> f(std::size_t(1) << g.d, 0);
  f[0] = 1;
  for (NodeSet s = 1; s <= all; ++s) {
    unsigned __int128 acc = 0;
    // v can be last in the prefix s iff its parents all lie in s \ {v}.
    for (NodeSet t = s; t;) {
      int v = lowest(t);
      t &= t - 1;
      if ((g.parents[v] & ~(s & ~bit(v))) == 0) acc += f[s & ~bit(v)];
    }
    f[s] = acc;
    if (s == all) break;
  }
  return f[all];
}

std::string uint128_to_string(unsigned __int128 v) {
  if (v == 0) return "0";
  std::string s;
  while (v > 0) {
    s.push_back(char('0' + int(v % 10)));
    v /= 10;
  }
  std::reverse(s.begin(), s.end());
  return s;
}

namespace {

// Recursive enumeration: assign parents node by node, pruning assignments
// that close a cycle against the partial graph's closure.
void enumerate_rec(Dag& g, int i, std::vector<NodeSet>& desc,
                   const std::function<void(const Dag&)>& visit) {
  if (i == g.d) {
    visit(g);
    return;
  }
  const NodeSet others = full_set(g.d) & ~bit(i);
  for (NodeSet mask = 0;; mask = ((mask | ~others) + 1) & others) {
    // Parent p is legal unless i already reaches p.
    if ((mask & desc[i]) == 0) {
      g.parents[i] = mask;
      // Closure gain: ancestors of i (incl. i) now reach desc[i] and i.
      std::vector<NodeSet> saved = desc;
      NodeSet gain = desc[i] | bit(i);
      for (NodeSet p = mask; p;) {
        int u = lowest(p);
        p &= p - 1;
        for (int a = 0; a < g.d; ++a)
          if (a == u || contains(desc[a], u)) desc[a] |= gain;
      }
      enumerate_rec(g, i + 1, desc, visit);
      desc = std::move(saved);
    }
    if (mask == others) break;
  }
  g.parents[i] = 0;
}

}  // namespace

void enumerate_dags(int d, const std::function<void(const Dag&)>& visit) {
  if (d < 1 || d > 6) throw ResourceError("enumerate_dags: d must be in 1..6");
  if (d <= 4) {
    // Brute force: every parent-set assignment, filtered by acyclicity.
    Dag g(d);
    const NodeSet lim = full_set(d);
    std::function<void(int)> rec = [&](int i) {
      if (i == d) {
        if (is_acyclic(g)) visit(g);
        return;
      }
      for (NodeSet m = 0; m <= lim; ++m) {
        if (contains(m, i)) continue;
        g.parents[i] = m;
        rec(i + 1);
      }
      g.parents[i] = 0;
    };
    rec(0);
    return;
  }
  Dag g(d);
  std::vector<NodeSet> desc(d, 0);
  enumerate_rec(g, 0, desc, visit);
}

std::uint64_t count_dags(int d) {
  std::uint64_t n = 0;
  enumerate_dags(d, [&](const Dag&) { ++n; });
  return n;
}

std::string encode_dag(const Dag& g) {
  std::ostringstream os;
  os << g.d << ';';
  for (int i = 0; i < g.d; ++i) {
    if (i) os << ',';
    os << g.parents[i];
  }
  return os.str();
}

Dag decode_dag(const std::string& line) {
  std::size_t semi = line.find(';');
  if (semi == std::string::npos) throw InputError("decode_dag: missing ';'");
  int d = 0;
  auto r = std::from_chars(line.data(), line.data() + semi, d);
  if (r.ec != std::errc() || d < 1 || d > kMaxNodes)
    throw InputError("decode_dag: bad node count");
  Dag g(d);
  std::size_t pos = semi + 1;
  for (int i = 0; i < d; ++i) {
    std::size_t end = line.find(',', pos);
    if (end == std::string::npos) end = line.size();
    unsigned long v = 0;
    auto rr = std::from_chars(line.data() + pos, line.data() + end, v);
    if (rr.ec != std::errc()) throw InputError("decode_dag: bad parent mask");
    g.parents[i] = NodeSet(v);
    if (contains(g.parents[i], i)) throw InputError("decode_dag: self-loop");
    pos = end + 1;
  }
  if (!is_acyclic(g)) throw InputError("decode_dag: graph has a cycle");
  return g;
}

}  // namespace dagmc
