#include "dagmc/samplers.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "dagmc/logsum.hpp"

namespace dagmc {

std::string kernel_name(KernelKind k) {
  switch (k) {
    case KernelKind::Local: return "local";
    case KernelKind::Global: return "global";
    case KernelKind::Hybrid: return "hybrid";
    case KernelKind::Gibbs: return "gibbs";
    case KernelKind::Order: return "order";
  }
  return "?";
}

void SamplerConfig::validate() const {
  if (beta < 0.0 || beta > 1.0) throw InputError("sampler config: beta outside [0,1]");
  if (trunc_c <= 0.0 || trunc_c >= 0.5)
    throw InputError("sampler config: trunc_c outside (0, 0.5)");
  if (steps < 0 || burn_in < 0) throw InputError("sampler config: negative step count");
  if (thin < 1) throw InputError("sampler config: thin < 1");
  if (max_global_retries < 1) throw InputError("sampler config: max_global_retries < 1");
}

GlobalProposal GlobalProposal::from_marginals(const EdgeMarginals& m, double trunc_c) {
  if (trunc_c <= 0.0 || trunc_c >= 0.5) throw InputError("truncation constant outside (0, 0.5)");
  GlobalProposal gp;
  gp.d_ = m.d;
  gp.p_ = m.p;
  auto& p = gp.p_;
  const int d = m.d;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      if (i == j) continue;
      double& v = p[std::size_t(i) * d + j];
      v = std::min(std::max(v, trunc_c), 1.0 - trunc_c);
    }
  // If truncation pushed a pair above 1, rescale both entries; this keeps
  // the orientation ratio and a valid three-way pair distribution.
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      double sum = gp.p(i, j) + gp.p(j, i);
      if (sum > 1.0) {
        double scale = (1.0 - 1e-9) / sum;
        p[std::size_t(i) * d + j] *= scale;
        p[std::size_t(j) * d + i] *= scale;
      }
    }
  return gp;
}

Dag GlobalProposal::draw(Rng& rng) const {
  Dag g(d_);
  for (int i = 0; i < d_; ++i)
    for (int j = i + 1; j < d_; ++j) {
      double edge_p = p(i, j) + p(j, i);
      if (rng.uniform() < edge_p) {
        if (rng.uniform() < orient(i, j))
          g.parents[j] |= bit(i);
        else
          g.parents[i] |= bit(j);
      }
    }
  return g;
}

double GlobalProposal::log_density(const Dag& g) const {
  double total = 0.0;
  for (int i = 0; i < d_; ++i)
    for (int j = i + 1; j < d_; ++j) {
      double edge_p = p(i, j) + p(j, i);
      if (g.has_edge(i, j))
        total += std::log(edge_p) + std::log(orient(i, j));
      else if (g.has_edge(j, i))
        total += std::log(edge_p) + std::log(orient(j, i));
      else
        total += std::log1p(-edge_p);
    }
  return total;
}

ChainState make_chain_state(const Dag& start, const FamilyScoreTable& t,
                            const GlobalPrior& target_prior) {
  ChainState s;
  s.current = start;
  s.ancestors = AncestorMatrix(start);
  s.family_scores.resize(start.d);
  s.log_lik = 0.0;
  for (int i = 0; i < start.d; ++i) {
    s.family_scores[i] = t.score(i, start.parents[i]);
    s.log_lik += s.family_scores[i];
  }
  s.log_prior = target_prior.log_mass(start);
  return s;
}

bool local_step(ChainState& s, const FamilyScoreTable& t,
                const GlobalPrior& target_prior, Rng& rng, KernelStats& stats) {
  ++stats.proposed;
  std::vector<EdgeEdit> edits = legal_edits(s.current, s.ancestors);
  if (edits.empty()) return false;
  const EdgeEdit e = edits[rng.uniform_int(edits.size())];

  Dag proposed = s.current;
  switch (e.kind) {
    case EditKind::Add: proposed.parents[e.v] |= bit(e.u); break;
    case EditKind::Delete: proposed.parents[e.v] &= ~bit(e.u); break;
    case EditKind::Reverse:
      proposed.parents[e.v] &= ~bit(e.u);
      proposed.parents[e.u] |= bit(e.v);
      break;
  }
  // Only the changed families contribute to the likelihood delta.
  double new_v = t.score(e.v, proposed.parents[e.v]);
  double delta_lik = new_v - s.family_scores[e.v];
  double new_u = 0.0;
  if (e.kind == EditKind::Reverse) {
    new_u = t.score(e.u, proposed.parents[e.u]);
    delta_lik += new_u - s.family_scores[e.u];
  }
  double new_prior = target_prior.log_mass(proposed);
  double log_nbd_ratio =
      std::log(double(edits.size())) - std::log(double(legal_edits(proposed).size()));
  double log_alpha = delta_lik + (new_prior - s.log_prior) + log_nbd_ratio;
  if (log_alpha < 0.0 && rng.uniform() >= std::exp(log_alpha)) return false;

  switch (e.kind) {
    case EditKind::Add: s.ancestors.add_edge(s.current, e.u, e.v); break;
    case EditKind::Delete: s.ancestors.delete_edge(s.current, e.u, e.v); break;
    case EditKind::Reverse: s.ancestors.reverse_edge(s.current, e.u, e.v); break;
  }
  s.family_scores[e.v] = new_v;
  if (e.kind == EditKind::Reverse) s.family_scores[e.u] = new_u;
  s.log_lik += delta_lik;
  s.log_prior = new_prior;
  ++stats.accepted;
  return true;
}

bool global_step(ChainState& s, const GlobalProposal& gp, const FamilyScoreTable& t,
                 const GlobalPrior& target_prior, int max_retries, Rng& rng,
                 KernelStats& stats) {
  ++stats.proposed;
  Dag proposed;
  bool found = false;
  for (int attempt = 0; attempt < max_retries; ++attempt) {
    proposed = gp.draw(rng);
    if (is_acyclic(proposed)) {
      found = true;
      break;
    }
  }
  if (!found) {
    ++stats.retry_exhausted;
    return false;
  }
  double prop_lik = 0.0;
  for (int i = 0; i < proposed.d; ++i) prop_lik += t.score(i, proposed.parents[i]);
  double prop_prior = target_prior.log_mass(proposed);
  double log_alpha = (prop_lik + prop_prior) - s.log_target() +
                     gp.log_density(s.current) - gp.log_density(proposed);
  if (log_alpha < 0.0 && rng.uniform() >= std::exp(log_alpha)) return false;

  s.current = proposed;
  s.ancestors = AncestorMatrix(proposed);
  for (int i = 0; i < proposed.d; ++i)
    s.family_scores[i] = t.score(i, proposed.parents[i]);
  s.log_lik = prop_lik;
  s.log_prior = prop_prior;
  ++stats.accepted;
  return true;
}

void gibbs_sweep(ChainState& s, const FamilyScoreTable& t,
                 const GlobalPrior& target_prior, Rng& rng) {
  const int d = s.current.d;
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      Dag base = s.current;
      base.parents[j] &= ~bit(i);
      base.parents[i] &= ~bit(j);
      AncestorMatrix bm(base);
      // Candidate states for the pair: none, i->j, j->i (acyclic only).
      struct Option {
        int kind;  // 0 none, 1 i->j, 2 j->i
        double log_mass;
      };
      std::vector<Option> opts;
      auto add_option = [&](int kind) {
        Dag cand = base;
        if (kind == 1) cand.parents[j] |= bit(i);
        if (kind == 2) cand.parents[i] |= bit(j);
        double lik = t.score(i, cand.parents[i]) + t.score(j, cand.parents[j]);
        double rest = s.log_lik - s.family_scores[i] - s.family_scores[j];
        opts.push_back({kind, rest + lik + target_prior.log_mass(cand)});
      };
      add_option(0);
      if (!bm.addition_cyclic(i, j)) add_option(1);
      if (!bm.addition_cyclic(j, i)) add_option(2);
      double mx = kLogZero;
      for (const Option& o : opts) mx = std::max(mx, o.log_mass);
      double total = 0.0;
      for (const Option& o : opts) total += std::exp(o.log_mass - mx);
      double u = rng.uniform() * total;
      int chosen = opts.back().kind;
      for (const Option& o : opts) {
        u -= std::exp(o.log_mass - mx);
        if (u <= 0.0) {
          chosen = o.kind;
          break;
        }
      }
      s.current = base;
      if (chosen == 1) s.current.parents[j] |= bit(i);
      if (chosen == 2) s.current.parents[i] |= bit(j);
      s.family_scores[i] = t.score(i, s.current.parents[i]);
      s.family_scores[j] = t.score(j, s.current.parents[j]);
      s.log_lik = 0.0;
      for (int k = 0; k < d; ++k) s.log_lik += s.family_scores[k];
      s.log_prior = target_prior.log_mass(s.current);
    }
  }
  s.ancestors = AncestorMatrix(s.current);
}

SampleSet run_chain(const SamplerConfig& cfg, KernelKind kernel,
                    const FamilyScoreTable& t, const GlobalProposal* gp) {
  cfg.validate();
  if ((kernel == KernelKind::Global || kernel == KernelKind::Hybrid) && gp == nullptr)
    throw InputError("run_chain: global/hybrid kernel needs a GlobalProposal");
  if (kernel == KernelKind::Order)
    throw InputError("run_chain: use order_chain for the order sampler");

  Dag start = cfg.initial ? *cfg.initial : Dag(t.d());
  if (!is_acyclic(start)) throw InputError("run_chain: initial graph is cyclic");
  ChainState s = make_chain_state(start, t, cfg.target_prior);
  Rng rng(cfg.seed);
  SampleSet out;
  auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  auto one_step = [&] {
    switch (kernel) {
      case KernelKind::Local:
        local_step(s, t, cfg.target_prior, rng, out.local);
        break;
      case KernelKind::Global:
        global_step(s, *gp, t, cfg.target_prior, cfg.max_global_retries, rng, out.global);
        break;
      case KernelKind::Hybrid:
        if (rng.uniform() < cfg.beta)
          local_step(s, t, cfg.target_prior, rng, out.local);
        else
          global_step(s, *gp, t, cfg.target_prior, cfg.max_global_retries, rng, out.global);
        break;
      case KernelKind::Gibbs:
        gibbs_sweep(s, t, cfg.target_prior, rng);
        ++out.gibbs_sweeps;
        break;
      case KernelKind::Order:
        break;
    }
    ++s.step;
  };

  for (long long i = 0; i < cfg.burn_in; ++i) one_step();
  if (cfg.steps == 0 && cfg.burn_in == 0)
    out.samples.push_back({0, s.current, 1.0, s.log_target(), elapsed()});
  for (long long i = 0; i < cfg.steps; ++i) {
    one_step();
    if (i % cfg.thin == 0)
      out.samples.push_back({s.step, s.current, 1.0, s.log_target(), elapsed()});
  }
  out.total_seconds = elapsed();
  return out;
}

SampleSet order_chain(const SamplerConfig& cfg, const FamilyScoreTable& t,
                      const ModularPrior& prior) {
  cfg.validate();
  const int d = t.d();
  std::vector<std::vector<double>> A = node_subset_sums(t, prior);

  Order order;
  order.perm.resize(d);
  for (int i = 0; i < d; ++i) order.perm[i] = i;
  Rng rng(cfg.seed);

  auto order_log_score = [&](const Order& o) {
    double total = 0.0;
    NodeSet pre = 0;
    for (int v : o.perm) {
      total += A[v][compress_without(v, pre)];
      pre |= bit(v);
    }
    return total;
  };
  double cur_score = order_log_score(order);

  SampleSet out;
  auto step = [&] {
    if (d < 2) return;
    int a = (int)rng.uniform_int(d);
    int b = (int)rng.uniform_int(d - 1);
    if (b >= a) ++b;
    std::swap(order.perm[a], order.perm[b]);
    double prop_score = order_log_score(order);
    double log_alpha = prop_score - cur_score;  // transposition proposal is symmetric
    if (log_alpha >= 0.0 || rng.uniform() < std::exp(log_alpha)) {
      cur_score = prop_score;
      ++out.order.accepted;
    } else {
      std::swap(order.perm[a], order.perm[b]);
    }
    ++out.order.proposed;
  };

  // One DAG per kept order: G_i subset U_i w.p. proportional to B_i(G_i).
  auto sample_dag = [&](const Order& o) {
    Dag g(d);
    NodeSet pre = 0;
    for (int v : o.perm) {
      double total = A[v][compress_without(v, pre)];
      double u = std::log(std::max(rng.uniform(), 1e-300)) + total;
      // Walk subsets of pre accumulating until the target mass is passed.
      double acc = kLogZero;
      NodeSet chosen = pre;
      for (NodeSet sub = pre;; sub = (sub - 1) & pre) {
        double w = family_weight(t, prior, v, sub);
        if (w != kLogZero) {
          acc = log_add(acc, w);
          if (acc >= u) {
            chosen = sub;
            break;
          }
        }
        if (sub == 0) break;
      }
      g.parents[v] = chosen;
      pre |= bit(v);
    }
    return g;
  };

  auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };
  std::vector<Order> kept_orders;
  for (long long i = 0; i < cfg.burn_in; ++i) step();
  for (long long i = 0; i < cfg.steps; ++i) {
    step();
    if (i % cfg.thin == 0) {
      kept_orders.push_back(order);
      Dag g = sample_dag(order);
      double lt = t.graph_log_marglik(g);
      out.samples.push_back({i + cfg.burn_in + 1, std::move(g), 1.0, lt, elapsed()});
    }
  }
  // Ellis correction over the chain's kept orders. Every sampled DAG is
  // consistent with at least its own source order.
  for (SampleRecord& rec : out.samples) {
    double w = 1.0;
    ellis_weight_sampled(rec.graph, kept_orders, w);
    rec.weight = w;
  }
  out.total_seconds = elapsed();
  return out;
}

void save_samples(const SampleSet& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write file: " + path);
  out.precision(17);
  for (const SampleRecord& r : s.samples)
    out << r.step << ',' << r.weight << ',' << r.log_target << ','
        << encode_dag(r.graph) << '\n';
}

SampleSet load_samples(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open file: " + path);
  SampleSet s;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream is(line);
    SampleRecord r;
    char c1, c2, c3;
    std::string rest;
    if (!(is >> r.step >> c1 >> r.weight >> c2 >> r.log_target >> c3) ||
        c1 != ',' || c2 != ',' || c3 != ',')
      throw InputError("sample file: malformed line");
    std::getline(is, rest);
    r.graph = decode_dag(rest);
    r.seconds = 0.0;
    s.samples.push_back(std::move(r));
  }
  return s;
}

}  // namespace dagmc
