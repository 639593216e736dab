#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dagmc/bits.hpp"

namespace dagmc {

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ContractError : std::logic_error {
  using std::logic_error::logic_error;
};

// Directed acyclic graph over d <= 32 nodes, stored as per-node parent sets.
struct Dag {
  int d = 0;
  std::vector<NodeSet> parents;  // parents[i] = set of parents of node i

  Dag() = default;
  explicit Dag(int d_) : d(d_), parents(d_, 0) {}

  bool has_edge(int u, int v) const { return contains(parents[v], u); }
  int num_edges() const {
    int e = 0;
    for (NodeSet p : parents) e += set_size(p);
    return e;
  }
  bool operator==(const Dag& o) const { return d == o.d && parents == o.parents; }
};

struct DagHash {
  std::size_t operator()(const Dag& g) const {
    std::size_t h = std::hash<int>()(g.d);
    for (NodeSet p : g.parents) h = h * 1000003u + p;
    return h;
  }
};

// Total order over nodes; perm[k] = k-th node.
struct Order {
  std::vector<int> perm;

  // Predecessor set of node i under this order.
  NodeSet predecessors(int i) const {
    NodeSet u = 0;
    for (int v : perm) {
      if (v == i) return u;
      u |= bit(v);
    }
    return u;
  }
  bool consistent_with(const Dag& g) const {
    for (int i = 0; i < g.d; ++i)
      if ((g.parents[i] & ~predecessors(i)) != 0) return false;
    return true;
  }
};

// Transitive closure of a Dag, maintained under edge edits.
// reach[i] = set of j with a directed path i ~> j (i itself excluded).
class AncestorMatrix {
 public:
  AncestorMatrix() = default;
  explicit AncestorMatrix(const Dag& g);

  int d() const { return d_; }
  bool reaches(int i, int j) const { return contains(reach_[i], j); }
  NodeSet descendants(int i) const { return reach_[i]; }

  // Would adding u->v close a cycle?
  bool addition_cyclic(int u, int v) const { return u == v || reaches(v, u); }

  // Apply one edit, keeping the closure exact. The graph is edited in place.
  // Throws InputError if the edit would create a cycle (graph unchanged).
  void add_edge(Dag& g, int u, int v);
  void delete_edge(Dag& g, int u, int v);
  void reverse_edge(Dag& g, int u, int v);

 private:
  void recompute(const Dag& g);

  int d_ = 0;
  std::vector<NodeSet> reach_;
};

// Cycle check on a raw edge list. Independent of edge insertion order.
bool is_acyclic(const std::vector<std::pair<int, int>>& edges, int d);
bool is_acyclic(const Dag& g);

bool has_path(const Dag& g, int i, int j);

// One topological order of g (g must be acyclic).
std::vector<int> topological_order(const Dag& g);

enum class EditKind { Add, Delete, Reverse };
struct EdgeEdit {
  EditKind kind;
  int u, v;  // the edge u->v (for Reverse: the existing edge being flipped)
};

// All legal single-edge edits of g (result stays acyclic).
std::vector<EdgeEdit> legal_edits(const Dag& g, const AncestorMatrix& m);
std::vector<EdgeEdit> legal_edits(const Dag& g);

// All acyclic graphs one edit away from g; no duplicates, g excluded.
std::vector<Dag> neighborhood(const Dag& g);

// Exact number of linear extensions via subset DP, O(d 2^d).
// Result fits unsigned 128-bit for d <= 24 (24! < 2^127).
unsigned __int128 count_linear_extensions(const Dag& g, int cap = 24);

std::string uint128_to_string(unsigned __int128 v);

// Every labeled DAG on d nodes exactly once, d <= 6.
void enumerate_dags(int d, const std::function<void(const Dag&)>& visit);
std::uint64_t count_dags(int d);

// Text encoding: "d;p0,p1,...,p(d-1)" with p_i the parent bitmask in decimal.
std::string encode_dag(const Dag& g);
Dag decode_dag(const std::string& line);

}  // namespace dagmc
