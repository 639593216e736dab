#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "dagmc/graph.hpp"

namespace dagmc {

// Per-node parent-set prior weights rho_i; order weights are uniform.
// Families beyond the indegree cap get log weight -inf.
class ModularPrior {
 public:
  enum class Kind { Flat, Koivisto, Custom };

  static ModularPrior flat(int max_indegree = kMaxNodes);
  static ModularPrior koivisto(int max_indegree = kMaxNodes);
  // custom_log_rho[(i, parents)] = log weight; missing entries are -inf.
  static ModularPrior custom(std::map<std::pair<int, NodeSet>, double> log_rho,
                             int max_indegree = kMaxNodes);

  Kind kind() const { return kind_; }
  int max_indegree() const { return max_indegree_; }
  std::string name() const;

  double log_rho(int i, NodeSet parents, int d) const;

 private:
  Kind kind_ = Kind::Flat;
  int max_indegree_ = kMaxNodes;
  std::map<std::pair<int, NodeSet>, double> custom_;
};

// log of the unnormalized induced graph prior:
//   sum_i log rho_i(G_i) + log (#linear extensions of g).
double induced_graph_log_prior(const ModularPrior& p, const Dag& g);

// Exact Ellis importance weight 1 / #linear-extensions, kept as a rational.
struct EllisWeight {
  unsigned __int128 denom = 1;  // weight = 1/denom
  double value() const { return 1.0 / double(denom); }
  double log_value() const { return -std::log(double(denom)); }
};

EllisWeight ellis_weight_exact(const Dag& g);

// Sampled approximation 1 / #{consistent sampled orders}.
// Returns false (weight untouched) when no sampled order is consistent.
bool ellis_weight_sampled(const Dag& g, const std::vector<Order>& sampled_orders,
                          double& weight);

// Unnormalized log prior mass over DAGs.
class GlobalPrior {
 public:
  static GlobalPrior uniform_dag();
  static GlobalPrior modular_induced(ModularPrior p);
  static GlobalPrior custom(std::function<double(const Dag&)> log_mass,
                            std::string name);

  double log_mass(const Dag& g) const;
  const std::string& name() const { return name_; }
  bool is_uniform() const { return kind_ == Kind::Uniform; }
  const ModularPrior* modular() const {
    return kind_ == Kind::ModularInduced ? &modular_ : nullptr;
  }

 private:
  enum class Kind { Uniform, ModularInduced, Custom };
  Kind kind_ = Kind::Uniform;
  ModularPrior modular_;
  std::function<double(const Dag&)> custom_;
  std::string name_ = "uniform-dag";
};

// Normalized distributions over all DAGs at d <= 5 for the standard priors,
// with KL(p || uniform) per prior.
struct PriorReport {
  int d = 0;
  std::vector<Dag> graphs;
  std::vector<std::string> prior_names;
  std::vector<std::vector<double>> mass;  // mass[p][g]
  std::vector<double> kl_to_uniform;
};

PriorReport prior_report(int d);

}  // namespace dagmc
