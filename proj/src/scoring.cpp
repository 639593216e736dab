#include "dagmc/scoring.hpp"

#include <cmath>
#include <limits>

#include <json.hpp>

namespace dagmc {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

FamilyCounts family_counts(const Dataset& ds, int i, NodeSet parents) {
  if (contains(parents, i)) throw InputError("family_counts: i in parents");
  FamilyCounts fc;
  fc.child_arity = ds.arities[i];
  fc.parent_configs = 1;
  for (NodeSet p = parents; p;) {
    int u = lowest(p);
    p &= p - 1;
    fc.parent_configs *= ds.arities[u];
  }
  fc.counts.assign(std::size_t(fc.parent_configs) * fc.child_arity, 0);
  for (int r = 0; r < ds.n; ++r) {
    if (ds.intervened(r, i)) continue;
    int j = 0;
    for (NodeSet p = parents; p;) {
      int u = lowest(p);
      p &= p - 1;
      j = j * ds.arities[u] + ds.at(r, u);
    }
    ++fc.counts[std::size_t(j) * fc.child_arity + ds.at(r, i)];
  }
  return fc;
}

const FamilyCounts& CountCache::get(int i, NodeSet parents) {
  std::uint64_t key = (std::uint64_t(i) << 32) | parents;
  auto it = cache_.find(key);
  if (it == cache_.end())
    it = cache_.emplace(key, family_counts(*ds_, i, parents)).first;
  return it->second;
}

double bdeu_from_counts(const FamilyCounts& fc) {
  const int q = fc.child_arity;
  const int r = fc.parent_configs;
  const double alpha = 1.0 / (double(q) * r);
  const double row_alpha = q * alpha;
  double lg_alpha = std::lgamma(alpha);
  double lg_row_alpha = std::lgamma(row_alpha);
  double total = 0.0;
  for (int j = 0; j < r; ++j) {
    long long nj = fc.row_total(j);
    if (nj == 0) continue;  // empty row contributes log 1
    total += lg_row_alpha - std::lgamma(row_alpha + double(nj));
    for (int k = 0; k < q; ++k) {
      long long njk = fc.at(j, k);
      if (njk > 0) total += std::lgamma(alpha + double(njk)) - lg_alpha;
    }
  }
  return total;
}

double family_log_marglik(const Dataset& ds, int i, NodeSet parents) {
  return bdeu_from_counts(family_counts(ds, i, parents));
}

double FamilyScoreTable::score(int i, NodeSet parents) const {
  if (!admissible(i, parents))
    throw ContractError("score table: family inadmissible (indegree cap exceeded)");
  return scores_[i][compress(i, parents)];
}

void FamilyScoreTable::set_score(int i, NodeSet parents, double value) {
  scores_[i][compress(i, parents)] = value;
}

double FamilyScoreTable::graph_log_marglik(const Dag& g) const {
  double total = 0.0;
  for (int i = 0; i < d_; ++i) total += score(i, g.parents[i]);
  return total;
}

FamilyScoreTable build_score_table(const Dataset& ds, const ScoreTableOptions& opt) {
  const int d = ds.d;
  if (d < 1 || d > kMaxNodes) throw InputError("build_score_table: bad d");
  int cap = opt.max_indegree < 0 ? FamilyScoreTable::default_max_indegree(d) : opt.max_indegree;
  if (cap > d - 1) cap = d - 1;
  std::size_t entries = std::size_t(d) << (d - 1);
  if (entries * sizeof(double) > opt.memory_budget)
    throw ResourceError("build_score_table: table exceeds memory budget");
  FamilyScoreTable table(d, cap);
  for (int i = 0; i < d; ++i) {
    const NodeSet others = full_set(d) & ~bit(i);
    for (NodeSet s = 0;; s = ((s | ~others) + 1) & others) {
      if (set_size(s) <= cap)
        table.set_score(i, s, family_log_marglik(ds, i, s));
      else
        table.set_score(i, s, kNegInf);
      if (s == others) break;
    }
  }
  return table;
}

std::string FamilyScoreTable::to_json() const {
  nlohmann::json j;
  j["d"] = d_;
  j["max_indegree"] = max_indegree_;
  nlohmann::json per_node = nlohmann::json::array();
  for (int i = 0; i < d_; ++i) {
    nlohmann::json entries = nlohmann::json::array();
    const NodeSet others = full_set(d_) & ~bit(i);
    for (NodeSet s = 0;; s = ((s | ~others) + 1) & others) {
      if (set_size(s) <= max_indegree_)
        entries.push_back({s, score(i, s)});
      if (s == others) break;
    }
    per_node.push_back(std::move(entries));
  }
  j["scores"] = std::move(per_node);
  return j.dump();
}

FamilyScoreTable FamilyScoreTable::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  int d = j.at("d").get<int>();
  int cap = j.at("max_indegree").get<int>();
  if (d < 1 || d > kMaxNodes) throw InputError("score table json: bad d");
  FamilyScoreTable table(d, cap);
  for (int i = 0; i < d; ++i) {
    const NodeSet others = full_set(d) & ~bit(i);
    for (NodeSet s = 0;; s = ((s | ~others) + 1) & others) {
      if (set_size(s) > cap) table.set_score(i, s, kNegInf);
      if (s == others) break;
    }
    for (const auto& entry : j.at("scores").at(i)) {
      NodeSet s = entry.at(0).get<NodeSet>();
      if (contains(s, i) || (s & ~others))
        throw InputError("score table json: bad parent mask");
      table.set_score(i, s, entry.at(1).get<double>());
    }
  }
  return table;
}

}  // namespace dagmc
