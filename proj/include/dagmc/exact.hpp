#pragma once

#include <vector>

#include "dagmc/priors.hpp"
#include "dagmc/scoring.hpp"

namespace dagmc {

// Forward/backward subset DP over node orders. All tables in log space.
// A[i] is indexed by the compressed subset of V \ {i} (same packing as
// FamilyScoreTable); g and h by the raw subset of V.
struct DpTables {
  int d = 0;
  std::vector<std::vector<double>> A;   // A_i(S) = log sum_{G_i subset S} rho_i * score_i
  std::vector<double> fwd;              // g(S)
  std::vector<double> bwd;              // h(S)
  double log_gV = 0.0;                  // log g(V) = log total (prior x likelihood) mass
  double log_Z = 0.0;                   // same with all family scores set to 1
  double log_pD = 0.0;                  // log_gV - log_Z

  double A_at(int i, NodeSet s_without_i) const;
};

inline constexpr int kDpNodeCap = 22;

DpTables dp_build(const FamilyScoreTable& t, const ModularPrior& prior);

// log rho_i(parents) + family score; -inf past either indegree cap.
double family_weight(const FamilyScoreTable& t, const ModularPrior& prior,
                     int i, NodeSet parents);

// Per-node zeta tables A_i(S) = log sum_{G_i subset S} exp(family_weight),
// indexed by the compressed subset of V \ {i}.
std::vector<std::vector<double>> node_subset_sums(const FamilyScoreTable& t,
                                                  const ModularPrior& prior);

// Posterior edge probabilities p[u][v] = p(u -> v | D) under the
// order-marginalized modular prior.
struct EdgeMarginals {
  int d = 0;
  std::vector<double> p;  // d*d row-major, diagonal 0
  double at(int u, int v) const { return p[std::size_t(u) * d + v]; }
  double& at(int u, int v) { return p[std::size_t(u) * d + v]; }
};

EdgeMarginals dp_edge_marginals(const DpTables& tables, const FamilyScoreTable& t,
                                const ModularPrior& prior);

// Normalized posterior over every DAG at d <= 5.
struct BruteForcePosterior {
  std::vector<Dag> graphs;
  std::vector<double> prob;
  double log_pD = 0.0;

  EdgeMarginals edge_marginals() const;
  // expectation of an arbitrary boolean feature of the graph
  double expectation(const std::function<bool(const Dag&)>& feature) const;
  EdgeMarginals feature_matrix(const std::function<bool(const Dag&, int, int)>& f) const;
};

BruteForcePosterior brute_force_posterior(const FamilyScoreTable& t,
                                          const GlobalPrior& prior);

// MAP graph under sum_i [log rho_i + score_i], ties broken by fewest edges
// then lexicographically smallest parent-bitmask vector.
struct MapResult {
  Dag graph;
  double log_score = 0.0;
};

MapResult map_dag(const FamilyScoreTable& t, const ModularPrior& prior);

// Maximum-likelihood tree/forest under empirical mutual information,
// rooted at the lowest index per component, edges directed away from roots.
Dag chow_liu(const Dataset& ds);

// log p(x | D) = log p({x} u D) - log p(D), each side via dp_build.
double dp_predictive_logprob(const Dataset& train, const std::vector<int>& x,
                             const ModularPrior& prior,
                             const ScoreTableOptions& opt = {});

}  // namespace dagmc
