#include "dagmc/exact.hpp"

#include <algorithm>
#include <cmath>

#include "dagmc/logsum.hpp"

namespace dagmc {

namespace {

// B_i over compressed subsets: log rho + family score (-inf past either cap).
std::vector<double> family_weights(const FamilyScoreTable& t, const ModularPrior& prior,
                                   int i, bool unit_scores) {
  const int d = t.d();
  std::vector<double> b(std::size_t(1) << (d - 1), kLogZero);
  for (NodeSet c = 0; c < b.size(); ++c) {
    NodeSet parents = expand_without(i, c);
    if (set_size(parents) > t.max_indegree()) continue;
    double lr = prior.log_rho(i, parents, d);
    if (lr == kLogZero) continue;
    b[c] = unit_scores ? lr : lr + t.score(i, parents);
  }
  return b;
}

void zeta_in_place(std::vector<double>& f, int dims) {
  for (int b = 0; b < dims; ++b)
    for (NodeSet s = 0; s < f.size(); ++s)
      if (contains(s, b)) f[s] = log_add(f[s], f[s ^ bit(b)]);
}

struct DpCore {
  std::vector<std::vector<double>> A;
  std::vector<double> fwd, bwd;
};

DpCore dp_core(const FamilyScoreTable& t, const ModularPrior& prior, bool unit_scores) {
  const int d = t.d();
  DpCore core;
  core.A.resize(d);
  for (int i = 0; i < d; ++i) {
    core.A[i] = family_weights(t, prior, i, unit_scores);
    zeta_in_place(core.A[i], d - 1);
  }
  const std::size_t full = std::size_t(1) << d;
  core.fwd.assign(full, kLogZero);
  core.fwd[0] = 0.0;
  for (NodeSet s = 1; s < full; ++s) {
    double acc = kLogZero;
    for (NodeSet rest = s; rest;) {
      int i = lowest(rest);
      rest &= rest - 1;
      NodeSet pre = s & ~bit(i);
      acc = log_add(acc, core.fwd[pre] + core.A[i][compress_without(i, pre)]);
    }
    core.fwd[s] = acc;
  }
  core.bwd.assign(full, kLogZero);
  core.bwd[full - 1] = 0.0;
  for (NodeSet s = NodeSet(full - 2);; --s) {
    double acc = kLogZero;
    for (NodeSet rest = full_set(d) & ~s; rest;) {
      int i = lowest(rest);
      rest &= rest - 1;
      acc = log_add(acc, core.A[i][compress_without(i, s)] + core.bwd[s | bit(i)]);
    }
    core.bwd[s] = acc;
    if (s == 0) break;
  }
  return core;
}

}  // namespace

double family_weight(const FamilyScoreTable& t, const ModularPrior& prior,
                     int i, NodeSet parents) {
  if (set_size(parents) > t.max_indegree()) return kLogZero;
  double lr = prior.log_rho(i, parents, t.d());
  if (lr == kLogZero) return kLogZero;
  return lr + t.score(i, parents);
}

std::vector<std::vector<double>> node_subset_sums(const FamilyScoreTable& t,
                                                  const ModularPrior& prior) {
  std::vector<std::vector<double>> a(t.d());
  for (int i = 0; i < t.d(); ++i) {
    a[i] = family_weights(t, prior, i, false);
    zeta_in_place(a[i], t.d() - 1);
  }
  return a;
}

double DpTables::A_at(int i, NodeSet s_without_i) const {
  return A[i][compress_without(i, s_without_i)];
}

DpTables dp_build(const FamilyScoreTable& t, const ModularPrior& prior) {
  const int d = t.d();
  if (d > kDpNodeCap) throw ResourceError("dp_build: d over cap");
  DpCore scored = dp_core(t, prior, false);
  DpCore unit = dp_core(t, prior, true);
  DpTables out;
  out.d = d;
  out.A = std::move(scored.A);
  out.fwd = std::move(scored.fwd);
  out.bwd = std::move(scored.bwd);
  out.log_gV = out.fwd.back();
  out.log_Z = unit.fwd.back();
  out.log_pD = out.log_gV - out.log_Z;
  return out;
}

EdgeMarginals dp_edge_marginals(const DpTables& tables, const FamilyScoreTable& t,
                                const ModularPrior& prior) {
  const int d = tables.d;
  EdgeMarginals em;
  em.d = d;
  em.p.assign(std::size_t(d) * d, 0.0);
  for (int v = 0; v < d; ++v) {
    std::vector<double> b = family_weights(t, prior, v, false);
    for (int u = 0; u < d; ++u) {
      if (u == v) continue;
      // Zeta of B_v restricted to parent sets containing u.
      std::vector<double> restricted(b.size(), kLogZero);
      int ubit = u < v ? u : u - 1;  // u's position in the compressed mask
      for (NodeSet c = 0; c < b.size(); ++c)
        if (contains(c, ubit)) restricted[c] = b[c];
      zeta_in_place(restricted, d - 1);
      double acc = kLogZero;
      const NodeSet others = full_set(d) & ~bit(v);
      for (NodeSet s = 0;; s = ((s | ~others) + 1) & others) {
        acc = log_add(acc, tables.fwd[s] + restricted[compress_without(v, s)] +
                               tables.bwd[s | bit(v)]);
        if (s == others) break;
      }
      em.at(u, v) = std::exp(acc - tables.log_gV);
    }
  }
  return em;
}

EdgeMarginals BruteForcePosterior::edge_marginals() const {
  return feature_matrix([](const Dag& g, int u, int v) { return g.has_edge(u, v); });
}

double BruteForcePosterior::expectation(const std::function<bool(const Dag&)>& feature) const {
  double e = 0.0;
  for (std::size_t g = 0; g < graphs.size(); ++g)
    if (feature(graphs[g])) e += prob[g];
  return e;
}

EdgeMarginals BruteForcePosterior::feature_matrix(
    const std::function<bool(const Dag&, int, int)>& f) const {
  const int d = graphs.empty() ? 0 : graphs[0].d;
  EdgeMarginals em;
  em.d = d;
  em.p.assign(std::size_t(d) * d, 0.0);
  for (std::size_t g = 0; g < graphs.size(); ++g)
    for (int u = 0; u < d; ++u)
      for (int v = 0; v < d; ++v)
        if (u != v && f(graphs[g], u, v)) em.at(u, v) += prob[g];
  return em;
}

BruteForcePosterior brute_force_posterior(const FamilyScoreTable& t,
                                          const GlobalPrior& prior) {
  const int d = t.d();
  if (d > 5) throw ResourceError("brute_force_posterior: d must be <= 5");
  BruteForcePosterior post;
  std::vector<double> log_joint, log_prior;
  enumerate_dags(d, [&](const Dag& g) {
    bool capped = false;
    for (int i = 0; i < d; ++i)
      if (set_size(g.parents[i]) > t.max_indegree()) capped = true;
    double lp = prior.log_mass(g);
    if (capped) lp = kLogZero;
    post.graphs.push_back(g);
    log_prior.push_back(lp);
    log_joint.push_back(lp == kLogZero ? kLogZero : lp + t.graph_log_marglik(g));
  });
  double log_num = kLogZero, log_den = kLogZero;
  for (std::size_t g = 0; g < log_joint.size(); ++g) {
    log_num = log_add(log_num, log_joint[g]);
    log_den = log_add(log_den, log_prior[g]);
  }
  post.log_pD = log_num - log_den;
  post.prob.resize(log_joint.size());
  for (std::size_t g = 0; g < log_joint.size(); ++g)
    post.prob[g] = log_joint[g] == kLogZero ? 0.0 : std::exp(log_joint[g] - log_num);
  return post;
}

namespace {

struct BestFam {
  double val = kLogZero;
  NodeSet mask = 0;
};

// Total order: higher value, then fewer edges, then smaller mask.
bool fam_better(const BestFam& a, const BestFam& b) {
  if (a.val != b.val) return a.val > b.val;
  int ea = set_size(a.mask), eb = set_size(b.mask);
  if (ea != eb) return ea < eb;
  return a.mask < b.mask;
}

}  // namespace

MapResult map_dag(const FamilyScoreTable& t, const ModularPrior& prior) {
  const int d = t.d();
  if (d > kDpNodeCap) throw ResourceError("map_dag: d over cap");
  // Max-variant subset transform of B_i, tracking the argmax parent set.
  std::vector<std::vector<BestFam>> best(d);
  for (int i = 0; i < d; ++i) {
    std::vector<double> b = family_weights(t, prior, i, false);
    best[i].resize(b.size());
    for (NodeSet c = 0; c < b.size(); ++c) best[i][c] = {b[c], expand_without(i, c)};
    for (int bitpos = 0; bitpos < d - 1; ++bitpos)
      for (NodeSet s = 0; s < b.size(); ++s)
        if (contains(s, bitpos) && fam_better(best[i][s ^ bit(bitpos)], best[i][s]))
          best[i][s] = best[i][s ^ bit(bitpos)];
  }
  struct BestNet {
    double val = kLogZero;
    int edges = 0;
    int sink = -1;
  };
  const std::size_t full = std::size_t(1) << d;
  std::vector<BestNet> net(full);
  net[0] = {0.0, 0, -1};
  for (NodeSet s = 1; s < full; ++s) {
    BestNet bn;
    for (NodeSet rest = s; rest;) {
      int i = lowest(rest);
      rest &= rest - 1;
      NodeSet pre = s & ~bit(i);
      const BestFam& bf = best[i][compress_without(i, pre)];
      double val = net[pre].val + bf.val;
      int edges = net[pre].edges + set_size(bf.mask);
      if (val > bn.val || (val == bn.val && edges < bn.edges)) bn = {val, edges, i};
    }
    net[s] = bn;
  }
  MapResult res;
  res.graph = Dag(d);
  res.log_score = net[full - 1].val;
  NodeSet s = full_set(d);
  while (s) {
    int i = net[s].sink;
    NodeSet pre = s & ~bit(i);
    res.graph.parents[i] = best[i][compress_without(i, pre)].mask;
    s = pre;
  }
  return res;
}

namespace {

double pair_mutual_information(const Dataset& ds, int i, int j) {
  const int qi = ds.arities[i], qj = ds.arities[j];
  std::vector<long long> nij(std::size_t(qi) * qj, 0), ni(qi, 0), nj(qj, 0);
  long long n = 0;
  for (int r = 0; r < ds.n; ++r) {
    int a = ds.at(r, i), b = ds.at(r, j);
    ++nij[std::size_t(a) * qj + b];
    ++ni[a];
    ++nj[b];
    ++n;
  }
  if (n == 0) return 0.0;
  double mi = 0.0;
  for (int a = 0; a < qi; ++a)
    for (int b = 0; b < qj; ++b) {
      long long c = nij[std::size_t(a) * qj + b];
      if (c == 0) continue;
      mi += double(c) / n * std::log(double(c) * n / (double(ni[a]) * nj[b]));
    }
  return std::max(0.0, mi);
}

}  // namespace

Dag chow_liu(const Dataset& ds) {
  const int d = ds.d;
  struct Cand {
    double mi;
    int i, j;  // i < j
  };
  std::vector<Cand> cands;
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j)
      cands.push_back({pair_mutual_information(ds, i, j), i, j});
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.mi != b.mi) return a.mi > b.mi;
    if (a.i != b.i) return a.i < b.i;
    return a.j < b.j;
  });
  // Kruskal on the complete graph; MI >= 0 so the result spans.
  std::vector<int> comp(d);
  for (int i = 0; i < d; ++i) comp[i] = i;
  std::function<int(int)> find = [&](int x) {
    return comp[x] == x ? x : comp[x] = find(comp[x]);
  };
  std::vector<std::pair<int, int>> chosen;
  for (const Cand& c : cands) {
    int a = find(c.i), b = find(c.j);
    if (a == b) continue;
    comp[std::max(a, b)] = std::min(a, b);
    chosen.push_back({c.i, c.j});
  }
  // Direct away from the lowest-index node of each component via BFS.
  std::vector<std::vector<int>> adj(d);
  for (auto [i, j] : chosen) {
    adj[i].push_back(j);
    adj[j].push_back(i);
  }
  Dag g(d);
  std::vector<bool> seen(d, false);
  for (int root = 0; root < d; ++root) {
    if (seen[root]) continue;
    seen[root] = true;
    std::vector<int> queue = {root};
    for (std::size_t q = 0; q < queue.size(); ++q) {
      int u = queue[q];
      for (int v : adj[u]) {
        if (seen[v]) continue;
        seen[v] = true;
        g.parents[v] |= bit(u);
        queue.push_back(v);
      }
    }
  }
  return g;
}

double dp_predictive_logprob(const Dataset& train, const std::vector<int>& x,
                             const ModularPrior& prior, const ScoreTableOptions& opt) {
  if ((int)x.size() != train.d) throw InputError("dp_predictive_logprob: record length mismatch");
  for (int i = 0; i < train.d; ++i)
    if (x[i] < 0 || x[i] >= train.arities[i])
      throw InputError("dp_predictive_logprob: record value out of arity range");
  Dataset augmented = train;
  augmented.n += 1;
  augmented.records.insert(augmented.records.end(), x.begin(), x.end());
  if (augmented.has_interventions())
    augmented.mask.insert(augmented.mask.end(), std::size_t(train.d), 0);
  FamilyScoreTable t0 = build_score_table(train, opt);
  FamilyScoreTable t1 = build_score_table(augmented, opt);
  return dp_build(t1, prior).log_gV - dp_build(t0, prior).log_gV;
}

}  // namespace dagmc
