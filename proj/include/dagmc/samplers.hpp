#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dagmc/exact.hpp"
#include "dagmc/priors.hpp"
#include "dagmc/rng.hpp"
#include "dagmc/scoring.hpp"

namespace dagmc {

enum class KernelKind { Local, Global, Hybrid, Gibbs, Order };

std::string kernel_name(KernelKind k);

struct SamplerConfig {
  double beta = 0.1;       // probability of the local kernel inside Hybrid
  double trunc_c = 1e-4;   // marginal truncation constant, in (0, 0.5)
  long long steps = 0;
  long long burn_in = 0;
  long long thin = 1;
  std::uint64_t seed = 0;
  GlobalPrior target_prior = GlobalPrior::uniform_dag();
  int max_global_retries = 100;
  std::optional<Dag> initial;  // default: empty graph

  void validate() const;
};

// DP edge marginals truncated into [C, 1-C], plus orientation probabilities.
class GlobalProposal {
 public:
  static GlobalProposal from_marginals(const EdgeMarginals& m, double trunc_c);

  int d() const { return d_; }
  double p(int i, int j) const { return p_[std::size_t(i) * d_ + j]; }
  // P(orient i->j | edge between i and j present)
  double orient(int i, int j) const { return p(i, j) / (p(i, j) + p(j, i)); }

  // One draw from the pairwise-independent distribution (may be cyclic).
  Dag draw(Rng& rng) const;
  // Unnormalized log proposal density (acyclicity normalizer omitted;
  // it cancels in the independence-sampler ratio).
  double log_density(const Dag& g) const;

 private:
  int d_ = 0;
  std::vector<double> p_;
};

struct ChainState {
  Dag current;
  AncestorMatrix ancestors;
  std::vector<double> family_scores;  // score of parents[i] from the table
  double log_lik = 0.0;
  double log_prior = 0.0;
  long long step = 0;

  double log_target() const { return log_lik + log_prior; }
};

ChainState make_chain_state(const Dag& start, const FamilyScoreTable& t,
                            const GlobalPrior& target_prior);

struct SampleRecord {
  long long step;
  Dag graph;
  double weight;
  double log_target;
  double seconds;  // wall clock since chain start (not seed-reproducible)
};

struct KernelStats {
  long long proposed = 0;
  long long accepted = 0;
  long long retry_exhausted = 0;  // global kernel only
  double rate() const { return proposed ? double(accepted) / double(proposed) : 0.0; }
};

struct SampleSet {
  std::vector<SampleRecord> samples;
  KernelStats local;
  KernelStats global;
  long long gibbs_sweeps = 0;
  KernelStats order;
  double total_seconds = 0.0;
};

// One MH step with the uniform add/delete/reverse proposal.
bool local_step(ChainState& s, const FamilyScoreTable& t,
                const GlobalPrior& target_prior, Rng& rng, KernelStats& stats);

// One MH step with the DP-derived independence proposal.
bool global_step(ChainState& s, const GlobalProposal& gp, const FamilyScoreTable& t,
                 const GlobalPrior& target_prior, int max_retries, Rng& rng,
                 KernelStats& stats);

// One systematic-scan Gibbs sweep over all unordered pairs.
void gibbs_sweep(ChainState& s, const FamilyScoreTable& t,
                 const GlobalPrior& target_prior, Rng& rng);

// Multi-kernel chain driver: Local, Global, Hybrid (local w.p. beta), Gibbs.
SampleSet run_chain(const SamplerConfig& cfg, KernelKind kernel,
                    const FamilyScoreTable& t,
                    const GlobalProposal* gp = nullptr);

// MH over orders (random transposition proposal) with one DAG drawn per kept
// order; sample weights are the sampled Ellis correction over kept orders.
SampleSet order_chain(const SamplerConfig& cfg, const FamilyScoreTable& t,
                      const ModularPrior& prior);

// Sample file round-trip: lines `step,weight,log_target,graph-encoding`.
void save_samples(const SampleSet& s, const std::string& path);
SampleSet load_samples(const std::string& path);

}  // namespace dagmc
