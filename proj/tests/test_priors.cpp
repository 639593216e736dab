#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "dagmc/logsum.hpp"
#include "dagmc/priors.hpp"
#include "dagmc/rng.hpp"

using namespace dagmc;

TEST_CASE("log_rho for flat and koivisto priors") {
  ModularPrior flat = ModularPrior::flat();
  ModularPrior koi = ModularPrior::koivisto();
  CHECK(flat.log_rho(0, bit(1) | bit(2), 5) == 0.0);
  CHECK(koi.log_rho(0, bit(1) | bit(2), 5) == doctest::Approx(-std::log(6.0)).epsilon(1e-12));
  CHECK(koi.log_rho(0, 0, 5) == doctest::Approx(0.0));
  CHECK(koi.log_rho(3, full_set(5) & ~bit(3), 5) == doctest::Approx(0.0));
}

TEST_CASE("log_rho honors the indegree cap") {
  ModularPrior flat = ModularPrior::flat(1);
  CHECK(flat.log_rho(0, bit(1), 4) == 0.0);
  CHECK(flat.log_rho(0, bit(1) | bit(2), 4) == kLogZero);
}

TEST_CASE("custom prior defaults missing families to -inf") {
  std::map<std::pair<int, NodeSet>, double> table;
  table[{0, 0}] = -1.5;
  table[{1, bit(0)}] = -0.25;
  ModularPrior p = ModularPrior::custom(table);
  CHECK(p.log_rho(0, 0, 2) == -1.5);
  CHECK(p.log_rho(1, bit(0), 2) == -0.25);
  CHECK(p.log_rho(1, 0, 2) == kLogZero);
}

TEST_CASE("koivisto rho sums to d over all parent sets of a node") {
  for (int d = 2; d <= 8; ++d) {
    ModularPrior koi = ModularPrior::koivisto();
    const int i = 0;
    const NodeSet others = full_set(d) & ~bit(i);
    double acc = kLogZero;
    for (NodeSet s = 0;; s = ((s | ~others) + 1) & others) {
      acc = log_add(acc, koi.log_rho(i, s, d));
      if (s == others) break;
    }
    CHECK(std::exp(acc) == doctest::Approx(double(d)).epsilon(1e-10));
  }
}

TEST_CASE("induced prior prefers the fork over the Markov-equivalent chain") {
  ModularPrior flat = ModularPrior::flat();
  Dag chain(3), fork(3);
  chain.parents[1] = bit(0);
  chain.parents[2] = bit(1);
  fork.parents[0] = bit(1);
  fork.parents[2] = bit(1);
  CHECK(induced_graph_log_prior(flat, chain) == doctest::Approx(std::log(1.0)));
  CHECK(induced_graph_log_prior(flat, fork) == doctest::Approx(std::log(2.0)));
  // The fully disconnected graph is the most probable.
  CHECK(induced_graph_log_prior(flat, Dag(3)) == doctest::Approx(std::log(6.0)));
  double best = kLogZero;
  enumerate_dags(3, [&](const Dag& g) {
    best = std::max(best, induced_graph_log_prior(flat, g));
  });
  CHECK(best == doctest::Approx(std::log(6.0)));
}

TEST_CASE("double-counting identity: sum over DAGs equals sum over orders") {
  // sum_G rho(G) linext(G) = sum_orders sum_{G consistent} rho(G)
  for (int d = 2; d <= 4; ++d) {
    for (auto kind : {0, 1}) {
      ModularPrior p = kind == 0 ? ModularPrior::flat() : ModularPrior::koivisto();
      double lhs = kLogZero;
      std::vector<Dag> all;
      enumerate_dags(d, [&](const Dag& g) {
        all.push_back(g);
        lhs = log_add(lhs, induced_graph_log_prior(p, g));
      });
      std::vector<int> perm(d);
      for (int i = 0; i < d; ++i) perm[i] = i;
      double rhs = kLogZero;
      do {
        Order o;
        o.perm = perm;
        for (const Dag& g : all) {
          if (!o.consistent_with(g)) continue;
          double mass = 0.0;
          for (int i = 0; i < d; ++i) mass += p.log_rho(i, g.parents[i], d);
          rhs = log_add(rhs, mass);
        }
      } while (std::next_permutation(perm.begin(), perm.end()));
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    }
  }
}

TEST_CASE("exact ellis weight inverts the extension count") {
  Dag chain(3);
  chain.parents[1] = bit(0);
  chain.parents[2] = bit(1);
  CHECK(ellis_weight_exact(chain).denom == 1);
  CHECK(ellis_weight_exact(Dag(3)).denom == 6);
  enumerate_dags(4, [&](const Dag& g) {
    CHECK(ellis_weight_exact(g).denom == count_linear_extensions(g));
  });
}

TEST_CASE("flat prior with exact ellis reweighting is uniform over DAGs") {
  ModularPrior flat = ModularPrior::flat();
  std::vector<double> logmass;
  enumerate_dags(4, [&](const Dag& g) {
    logmass.push_back(induced_graph_log_prior(flat, g) + ellis_weight_exact(g).log_value());
  });
  for (double v : logmass) CHECK(v == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("sampled ellis weight counts consistent orders") {
  Dag g(3);
  g.parents[2] = bit(0) | bit(1);  // 0,1 before 2
  Order o1{{0, 1, 2}}, o2{{1, 0, 2}}, o3{{2, 0, 1}};
  double w = 0.0;
  CHECK(ellis_weight_sampled(g, {o1, o2, o3}, w));
  CHECK(w == doctest::Approx(0.5));
  CHECK(ellis_weight_sampled(g, {o1}, w));
  CHECK(w == 1.0);
  CHECK(ellis_weight_sampled(Dag(3), {o1, o2, o3}, w));
  CHECK(w == doctest::Approx(1.0 / 3.0));
  CHECK_FALSE(ellis_weight_sampled(g, {o3}, w));
}

TEST_CASE("sampled ellis weight under uniform orders converges to d!/linext") {
  Rng rng(271828);
  const int d = 4;
  std::vector<Order> orders;
  const int S = 200000;
  for (int s = 0; s < S; ++s) {
    Order o;
    o.perm.resize(d);
    for (int i = 0; i < d; ++i) o.perm[i] = i;
    for (int i = d - 1; i > 0; --i)
      std::swap(o.perm[i], o.perm[rng.uniform_int(i + 1)]);
    orders.push_back(std::move(o));
  }
  Dag g(4);
  g.parents[1] = bit(0);
  g.parents[3] = bit(2);
  double w = 0.0;
  REQUIRE(ellis_weight_sampled(g, orders, w));
  double expected = 24.0 / double(count_linear_extensions(g));
  CHECK(double(S) * w == doctest::Approx(expected).epsilon(0.02));
}

TEST_CASE("prior report ranks priors by distance to uniform") {
  PriorReport rep = prior_report(4);
  CHECK(rep.graphs.size() == 543);
  auto idx = [&](const std::string& name) {
    return std::find(rep.prior_names.begin(), rep.prior_names.end(), name) -
           rep.prior_names.begin();
  };
  CHECK(rep.kl_to_uniform[idx("uniform")] == 0.0);
  CHECK(rep.kl_to_uniform[idx("flat-ellis")] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(rep.kl_to_uniform[idx("modular-flat")] < rep.kl_to_uniform[idx("koivisto")]);
  for (const auto& mass : rep.mass) {
    double total = 0.0;
    for (double v : mass) total += v;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("global priors expose their log mass") {
  GlobalPrior u = GlobalPrior::uniform_dag();
  CHECK(u.log_mass(Dag(3)) == 0.0);
  GlobalPrior mi = GlobalPrior::modular_induced(ModularPrior::flat());
  CHECK(mi.log_mass(Dag(3)) == doctest::Approx(std::log(6.0)));
  GlobalPrior c = GlobalPrior::custom(
      [](const Dag& g) { return -double(g.num_edges()); }, "edge-penalty");
  Dag one(2);
  one.parents[1] = bit(0);
  CHECK(c.log_mass(one) == -1.0);
}
