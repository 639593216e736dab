#pragma once

#include <vector>

#include "dagmc/data.hpp"
#include "dagmc/exact.hpp"
#include "dagmc/samplers.hpp"

namespace dagmc {

enum class FeatureKind { DirectedEdge, UndirectedEdge, DirectedPath };

// Weighted fraction of samples in which the feature holds for each (i, j).
EdgeMarginals feature_posterior(const SampleSet& samples, FeatureKind kind);

// Posterior-mean CPTs for one graph: theta = (N_ijk + a) / (N_ij. + q a).
CptSet posterior_mean_cpt(const Dataset& train, const Dag& g);

double record_logprob(const CptSet& cpt, const std::vector<int>& record);

struct PredictiveResult {
  std::vector<double> per_record;  // log p(x_r | D)
  double mean = 0.0;
};

// BMA predictive: per record, weighted average over sample plug-ins.
PredictiveResult predictive_loglik_samples(const SampleSet& samples,
                                           const Dataset& train,
                                           const Dataset& test);

// Same, restricted to samples available within `seconds` of chain time.
PredictiveResult predictive_loglik_samples_at(const SampleSet& samples,
                                              const Dataset& train,
                                              const Dataset& test, double seconds);

// Plug-in predictive under one graph with posterior-mean parameters.
PredictiveResult predictive_loglik_plugin(const Dag& g, const Dataset& train,
                                          const Dataset& test);

// Sum of absolute differences, diagonal excluded.
double sad(const EdgeMarginals& est, const EdgeMarginals& exact);

// Feature truth from a generating graph: directed edges, skeleton, or
// transitive closure.
std::vector<std::uint8_t> feature_truth(const Dag& truth, FeatureKind kind);

// Rank-based AUC over all off-diagonal (i, j) pairs; ties count half.
// Throws InputError when all labels are identical.
double auc(const EdgeMarginals& scores, const Dag& truth, FeatureKind kind);

}  // namespace dagmc
