#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dagmc/graph.hpp"
#include "dagmc/rng.hpp"

namespace dagmc {

// Integer-coded discrete records with per-node arities and an optional
// per-cell intervention mask (true = cell fixed by the experimenter).
struct Dataset {
  int n = 0;
  int d = 0;
  std::vector<int> arities;              // size d, each >= 2
  std::vector<int> records;              // n*d row-major category codes
  std::vector<std::uint8_t> mask;        // empty, or n*d of 0/1
  std::vector<std::string> names;        // optional column names

  int at(int r, int i) const { return records[std::size_t(r) * d + i]; }
  bool intervened(int r, int i) const {
    return !mask.empty() && mask[std::size_t(r) * d + i];
  }
  bool has_interventions() const { return !mask.empty(); }
  void validate() const;
};

// A Dag plus one conditional probability table per node.
// tables[i] is row-major over (parent configuration j, child state k);
// parent configurations are mixed-radix over parents in ascending node order.
struct CptSet {
  Dag dag;
  std::vector<int> arities;
  std::vector<std::vector<double>> tables;

  int parent_configs(int i) const;
  // Row start offset for the configuration of `record` (full d-vector).
  int config_of(int i, const std::vector<int>& record) const;
};

struct CsvOptions {
  bool has_header = false;
  std::optional<std::string> intervention_path;
  std::optional<std::vector<int>> arity_override;
};

Dataset load_csv(const std::string& path, const CsvOptions& options = {});
void save_csv(const Dataset& ds, const std::string& data_path,
              const std::optional<std::string>& intervention_path = {});

struct NetworkOptions {
  int arity_lo = 2;
  int arity_hi = 4;
  double dirichlet_strength = 0.5;
  double expected_indegree = 1.5;
  int max_indegree = -1;  // -1 = d-1
};

CptSet random_network(int d, const NetworkOptions& opt, std::uint64_t seed);

// Per-node CPTs for an explicit graph, rows drawn from a symmetric Dirichlet.
CptSet random_cpts(const Dag& g, const std::vector<int>& arities,
                   double dirichlet_strength, std::uint64_t seed);

struct Intervention {
  int node;
  int forced_state;
  int first_record;  // inclusive
  int last_record;   // exclusive
};

Dataset ancestral_sample(const CptSet& net, int n,
                         const std::vector<Intervention>& interventions,
                         std::uint64_t seed);

struct Fold {
  Dataset train;
  Dataset test;
};

std::vector<Fold> split_folds(const Dataset& ds, int k, std::uint64_t seed);

}  // namespace dagmc
