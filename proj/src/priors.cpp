#include "dagmc/priors.hpp"

#include <cmath>
#include <limits>

namespace dagmc {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_choose(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}
}  // namespace

ModularPrior ModularPrior::flat(int max_indegree) {
  ModularPrior p;
  p.kind_ = Kind::Flat;
  p.max_indegree_ = max_indegree;
  return p;
}

ModularPrior ModularPrior::koivisto(int max_indegree) {
  ModularPrior p;
  p.kind_ = Kind::Koivisto;
  p.max_indegree_ = max_indegree;
  return p;
}

ModularPrior ModularPrior::custom(std::map<std::pair<int, NodeSet>, double> log_rho,
                                  int max_indegree) {
  ModularPrior p;
  p.kind_ = Kind::Custom;
  p.max_indegree_ = max_indegree;
  p.custom_ = std::move(log_rho);
  return p;
}

std::string ModularPrior::name() const {
  switch (kind_) {
    case Kind::Flat: return "flat";
    case Kind::Koivisto: return "koivisto";
    case Kind::Custom: return "custom";
  }
  return "?";
}

double ModularPrior::log_rho(int i, NodeSet parents, int d) const {
  if (contains(parents, i)) throw InputError("log_rho: i in parents");
  if (set_size(parents) > max_indegree_) return kNegInf;
  switch (kind_) {
    case Kind::Flat:
      return 0.0;
    case Kind::Koivisto:
      return -log_choose(d - 1, set_size(parents));
    case Kind::Custom: {
      auto it = custom_.find({i, parents});
      return it == custom_.end() ? kNegInf : it->second;
    }
  }
  return kNegInf;
}

double induced_graph_log_prior(const ModularPrior& p, const Dag& g) {
  double total = 0.0;
  for (int i = 0; i < g.d; ++i) total += p.log_rho(i, g.parents[i], g.d);
  if (total == kNegInf) return kNegInf;
  return total + std::log(double(count_linear_extensions(g)));
}

EllisWeight ellis_weight_exact(const Dag& g) {
  return EllisWeight{count_linear_extensions(g)};
}

bool ellis_weight_sampled(const Dag& g, const std::vector<Order>& sampled_orders,
                          double& weight) {
  long long consistent = 0;
  for (const Order& o : sampled_orders)
    if (o.consistent_with(g)) ++consistent;
  if (consistent == 0) return false;
  weight = 1.0 / double(consistent);
  return true;
}

GlobalPrior GlobalPrior::uniform_dag() { return GlobalPrior(); }

GlobalPrior GlobalPrior::modular_induced(ModularPrior p) {
  GlobalPrior g;
  g.kind_ = Kind::ModularInduced;
  g.name_ = "modular-induced(" + p.name() + ")";
  g.modular_ = std::move(p);
  return g;
}

GlobalPrior GlobalPrior::custom(std::function<double(const Dag&)> log_mass,
                                std::string name) {
  GlobalPrior g;
  g.kind_ = Kind::Custom;
  g.custom_ = std::move(log_mass);
  g.name_ = std::move(name);
  return g;
}

double GlobalPrior::log_mass(const Dag& g) const {
  switch (kind_) {
    case Kind::Uniform: return 0.0;
    case Kind::ModularInduced: return induced_graph_log_prior(modular_, g);
    case Kind::Custom: return custom_(g);
  }
  return 0.0;
}

PriorReport prior_report(int d) {
  if (d < 1 || d > 5) throw ResourceError("prior_report: d must be <= 5");
  PriorReport rep;
  rep.d = d;
  enumerate_dags(d, [&](const Dag& g) { rep.graphs.push_back(g); });
  const std::size_t m = rep.graphs.size();
  ModularPrior flat = ModularPrior::flat();
  ModularPrior koi = ModularPrior::koivisto();

  auto normalized = [&](auto&& log_mass_fn) {
    std::vector<double> mass(m);
    double mx = kNegInf;
    for (std::size_t g = 0; g < m; ++g) {
      mass[g] = log_mass_fn(rep.graphs[g]);
      mx = std::max(mx, mass[g]);
    }
    double z = 0.0;
    for (double& v : mass) {
      v = std::exp(v - mx);
      z += v;
    }
    for (double& v : mass) v /= z;
    return mass;
  };

  rep.prior_names = {"uniform", "modular-flat", "koivisto", "koivisto-ellis",
                     "flat-ellis"};
  rep.mass.push_back(std::vector<double>(m, 1.0 / double(m)));
  rep.mass.push_back(normalized([&](const Dag& g) { return induced_graph_log_prior(flat, g); }));
  rep.mass.push_back(normalized([&](const Dag& g) { return induced_graph_log_prior(koi, g); }));
  // Ellis reweighting divides the induced prior by the linear-extension count.
  rep.mass.push_back(normalized([&](const Dag& g) {
    return induced_graph_log_prior(koi, g) + ellis_weight_exact(g).log_value();
  }));
  rep.mass.push_back(normalized([&](const Dag& g) {
    return induced_graph_log_prior(flat, g) + ellis_weight_exact(g).log_value();
  }));

  for (const auto& mass : rep.mass) {
    double kl = 0.0;
    for (double p : mass)
      if (p > 0) kl += p * std::log(p * double(m));
    rep.kl_to_uniform.push_back(std::max(0.0, kl));
  }
  return rep;
}

}  // namespace dagmc
