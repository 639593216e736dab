#pragma once

#include <unordered_map>
#include <vector>

#include "dagmc/data.hpp"
#include "dagmc/graph.hpp"

namespace dagmc {

// Contingency counts for one family (i, parents): counts[j*q + k] = N_ijk,
// with j a mixed-radix parent configuration (ascending node index = most
// significant digit, matching CptSet::config_of) and k the child state.
struct FamilyCounts {
  int child_arity = 0;
  int parent_configs = 0;
  std::vector<long long> counts;

  long long at(int j, int k) const { return counts[std::size_t(j) * child_arity + k]; }
  long long row_total(int j) const {
    long long t = 0;
    for (int k = 0; k < child_arity; ++k) t += at(j, k);
    return t;
  }
};

// Records with an intervention at node i are excluded from i's counts.
FamilyCounts family_counts(const Dataset& ds, int i, NodeSet parents);

// Memoizing wrapper around family_counts.
class CountCache {
 public:
  explicit CountCache(const Dataset& ds) : ds_(&ds) {}
  const FamilyCounts& get(int i, NodeSet parents);

 private:
  const Dataset* ds_;
  std::unordered_map<std::uint64_t, FamilyCounts> cache_;
};

// BDeu log marginal likelihood of one family, alpha_i = 1/(q_i r_i) with
// q_i the child arity and r_i the parent-configuration count.
double family_log_marglik(const Dataset& ds, int i, NodeSet parents);
double bdeu_from_counts(const FamilyCounts& fc);

// Log family score for every admissible (node, parent set) pair.
class FamilyScoreTable {
 public:
  FamilyScoreTable() = default;
  FamilyScoreTable(int d, int max_indegree)
      : d_(d), max_indegree_(max_indegree),
        scores_(d, std::vector<double>(std::size_t(1) << (d - 1), 0.0)) {}

  int d() const { return d_; }
  int max_indegree() const { return max_indegree_; }
  bool admissible(int i, NodeSet parents) const {
    return !contains(parents, i) && set_size(parents) <= max_indegree_;
  }
  // parents is a subset of V \ {i}.
  double score(int i, NodeSet parents) const;
  void set_score(int i, NodeSet parents, double value);

  double graph_log_marglik(const Dag& g) const;

  std::string to_json() const;
  static FamilyScoreTable from_json(const std::string& text);

  static int default_max_indegree(int d) { return d <= 14 ? d - 1 : 5; }

 private:
  static std::size_t compress(int i, NodeSet parents) {
    return compress_without(i, parents);
  }

  int d_ = 0;
  int max_indegree_ = 0;
  std::vector<std::vector<double>> scores_;
};

struct ScoreTableOptions {
  int max_indegree = -1;               // -1 = per-d default
  std::size_t memory_budget = 2ull << 30;  // bytes
};

FamilyScoreTable build_score_table(const Dataset& ds,
                                   const ScoreTableOptions& opt = {});

}  // namespace dagmc
