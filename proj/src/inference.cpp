#include "dagmc/inference.hpp"

#include <algorithm>
#include <cmath>

#include "dagmc/logsum.hpp"

namespace dagmc {

EdgeMarginals feature_posterior(const SampleSet& samples, FeatureKind kind) {
  if (samples.samples.empty()) throw InputError("feature_posterior: no samples");
  const int d = samples.samples[0].graph.d;
  double wsum = 0.0;
  for (const SampleRecord& r : samples.samples) wsum += r.weight;
  if (wsum <= 0.0) throw InputError("feature_posterior: all sample weights are zero");
  EdgeMarginals em;
  em.d = d;
  em.p.assign(std::size_t(d) * d, 0.0);
  for (const SampleRecord& r : samples.samples) {
    const Dag& g = r.graph;
    switch (kind) {
      case FeatureKind::DirectedEdge:
        for (int v = 0; v < d; ++v)
          for (NodeSet p = g.parents[v]; p;) {
            int u = lowest(p);
            p &= p - 1;
            em.at(u, v) += r.weight;
          }
        break;
      case FeatureKind::UndirectedEdge:
        for (int v = 0; v < d; ++v)
          for (NodeSet p = g.parents[v]; p;) {
            int u = lowest(p);
            p &= p - 1;
            em.at(u, v) += r.weight;
            em.at(v, u) += r.weight;
          }
        break;
      case FeatureKind::DirectedPath: {
        AncestorMatrix m(g);
        for (int u = 0; u < d; ++u)
          for (NodeSet rch = m.descendants(u); rch;) {
            int v = lowest(rch);
            rch &= rch - 1;
            em.at(u, v) += r.weight;
          }
        break;
      }
    }
  }
  for (double& v : em.p) v /= wsum;
  return em;
}

CptSet posterior_mean_cpt(const Dataset& train, const Dag& g) {
  CptSet cpt;
  cpt.dag = g;
  cpt.arities = train.arities;
  cpt.tables.resize(g.d);
  for (int i = 0; i < g.d; ++i) {
    FamilyCounts fc = family_counts(train, i, g.parents[i]);
    const int q = fc.child_arity;
    const double alpha = 1.0 / (double(q) * fc.parent_configs);
    cpt.tables[i].resize(std::size_t(fc.parent_configs) * q);
    for (int j = 0; j < fc.parent_configs; ++j) {
      double denom = double(fc.row_total(j)) + q * alpha;
      for (int k = 0; k < q; ++k)
        cpt.tables[i][std::size_t(j) * q + k] = (double(fc.at(j, k)) + alpha) / denom;
    }
  }
  return cpt;
}

double record_logprob(const CptSet& cpt, const std::vector<int>& record) {
  double total = 0.0;
  for (int i = 0; i < cpt.dag.d; ++i) {
    int q = cpt.arities[i];
    total += std::log(cpt.tables[i][std::size_t(cpt.config_of(i, record)) * q + record[i]]);
  }
  return total;
}

namespace {

PredictiveResult predictive_from(const std::vector<const SampleRecord*>& recs,
                                 const Dataset& train, const Dataset& test) {
  if (test.n == 0) throw InputError("predictive: empty test set");
  if (test.arities != train.arities) throw InputError("predictive: arity mismatch");
  if (recs.empty()) throw InputError("predictive: no samples");
  double wsum = 0.0;
  for (const SampleRecord* r : recs) wsum += r->weight;
  if (wsum <= 0.0) throw InputError("predictive: all sample weights are zero");

  PredictiveResult out;
  out.per_record.assign(test.n, kLogZero);
  std::vector<int> row(test.d);
  for (const SampleRecord* r : recs) {
    CptSet cpt = posterior_mean_cpt(train, r->graph);
    double lw = std::log(r->weight / wsum);
    for (int rec = 0; rec < test.n; ++rec) {
      for (int i = 0; i < test.d; ++i) row[i] = test.at(rec, i);
      out.per_record[rec] = log_add(out.per_record[rec], lw + record_logprob(cpt, row));
    }
  }
  for (double v : out.per_record) out.mean += v;
  out.mean /= test.n;
  return out;
}

}  // namespace

PredictiveResult predictive_loglik_samples(const SampleSet& samples,
                                           const Dataset& train, const Dataset& test) {
  std::vector<const SampleRecord*> recs;
  for (const SampleRecord& r : samples.samples) recs.push_back(&r);
  return predictive_from(recs, train, test);
}

PredictiveResult predictive_loglik_samples_at(const SampleSet& samples,
                                              const Dataset& train,
                                              const Dataset& test, double seconds) {
  std::vector<const SampleRecord*> recs;
  for (const SampleRecord& r : samples.samples)
    if (r.seconds <= seconds) recs.push_back(&r);
  return predictive_from(recs, train, test);
}

PredictiveResult predictive_loglik_plugin(const Dag& g, const Dataset& train,
                                          const Dataset& test) {
  if (test.n == 0) throw InputError("predictive: empty test set");
  if (test.arities != train.arities) throw InputError("predictive: arity mismatch");
  CptSet cpt = posterior_mean_cpt(train, g);
  PredictiveResult out;
  out.per_record.resize(test.n);
  std::vector<int> row(test.d);
  for (int rec = 0; rec < test.n; ++rec) {
    for (int i = 0; i < test.d; ++i) row[i] = test.at(rec, i);
    out.per_record[rec] = record_logprob(cpt, row);
    out.mean += out.per_record[rec];
  }
  out.mean /= test.n;
  return out;
}

double sad(const EdgeMarginals& est, const EdgeMarginals& exact) {
  if (est.d != exact.d) throw InputError("sad: shape mismatch");
  double total = 0.0;
  for (int i = 0; i < est.d; ++i)
    for (int j = 0; j < est.d; ++j)
      if (i != j) total += std::abs(est.at(i, j) - exact.at(i, j));
  return total;
}

std::vector<std::uint8_t> feature_truth(const Dag& truth, FeatureKind kind) {
  const int d = truth.d;
  std::vector<std::uint8_t> labels(std::size_t(d) * d, 0);
  switch (kind) {
    case FeatureKind::DirectedEdge:
      for (int v = 0; v < d; ++v)
        for (int u = 0; u < d; ++u)
          if (truth.has_edge(u, v)) labels[std::size_t(u) * d + v] = 1;
      break;
    case FeatureKind::UndirectedEdge:
      for (int v = 0; v < d; ++v)
        for (int u = 0; u < d; ++u)
          if (truth.has_edge(u, v)) {
            labels[std::size_t(u) * d + v] = 1;
            labels[std::size_t(v) * d + u] = 1;
          }
      break;
    case FeatureKind::DirectedPath: {
      AncestorMatrix m(truth);
      for (int u = 0; u < d; ++u)
        for (int v = 0; v < d; ++v)
          if (u != v && m.reaches(u, v)) labels[std::size_t(u) * d + v] = 1;
      break;
    }
  }
  return labels;
}

double auc(const EdgeMarginals& scores, const Dag& truth, FeatureKind kind) {
  if (scores.d != truth.d) throw InputError("auc: shape mismatch");
  std::vector<std::uint8_t> labels = feature_truth(truth, kind);
  // Mann-Whitney form: ties contribute one half.
  std::vector<std::pair<double, int>> pts;
  for (int i = 0; i < scores.d; ++i)
    for (int j = 0; j < scores.d; ++j)
      if (i != j) pts.push_back({scores.at(i, j), labels[std::size_t(i) * scores.d + j]});
  long long n_pos = 0, n_neg = 0;
  for (auto& [s, l] : pts) (l ? n_pos : n_neg)++;
  if (n_pos == 0 || n_neg == 0) throw InputError("auc: all labels identical");
  double u = 0.0;
  for (const auto& [sp, lp] : pts) {
    if (!lp) continue;
    for (const auto& [sn, ln] : pts) {
      if (ln) continue;
      if (sp > sn) u += 1.0;
      else if (sp == sn) u += 0.5;
    }
  }
  return u / (double(n_pos) * double(n_neg));
}

}  // namespace dagmc
