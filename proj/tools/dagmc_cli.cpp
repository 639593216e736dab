// dagmc: structure learning for discrete Bayesian networks.
//
// Subcommands: gen, score, exact, sample, features, convergence,
// structure-eval, predict, priors. Every run writes a manifest.json with the
// fully resolved configuration next to its outputs; rerunning with the same
// manifest reproduces every data file byte for byte.

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "dagmc/data.hpp"
#include "dagmc/exact.hpp"
#include "dagmc/inference.hpp"
#include "dagmc/samplers.hpp"

using nlohmann::json;
using namespace dagmc;

namespace {

constexpr const char* kVersion = "0.1.0";

// ---------------------------------------------------------------- output ----

// All file output goes through a temp-file-plus-rename so a failed run never
// leaves a partial artifact behind.
void atomic_write(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw InputError("cannot write file: " + tmp.string());
    out << content;
  }
  std::filesystem::rename(tmp, path);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string matrix_csv(const EdgeMarginals& m) {
  std::ostringstream os;
  for (int i = 0; i < m.d; ++i) {
    for (int j = 0; j < m.d; ++j) {
      if (j) os << ',';
      os << fmt(m.at(i, j));
    }
    os << '\n';
  }
  return os.str();
}

json matrix_json(const EdgeMarginals& m) {
  json rows = json::array();
  for (int i = 0; i < m.d; ++i) {
    json row = json::array();
    for (int j = 0; j < m.d; ++j) row.push_back(m.at(i, j));
    rows.push_back(row);
  }
  return rows;
}

void write_matrix(const std::filesystem::path& dir, const std::string& stem,
                  const EdgeMarginals& m, const std::string& format) {
  if (format == "json")
    atomic_write(dir / (stem + ".json"), matrix_json(m).dump(2) + "\n");
  else
    atomic_write(dir / (stem + ".csv"), matrix_csv(m));
}

EdgeMarginals read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open file: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream is(line);
    std::string cell;
    while (std::getline(is, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  EdgeMarginals m;
  m.d = (int)rows.size();
  for (const auto& row : rows) {
    if ((int)row.size() != m.d) throw InputError("matrix file is not square: " + path);
    m.p.insert(m.p.end(), row.begin(), row.end());
  }
  return m;
}

std::filesystem::path prepare_outdir(const std::string& out) {
  std::filesystem::path dir(out);
  std::filesystem::create_directories(dir);
  return dir;
}

void write_manifest(const std::filesystem::path& dir, json config) {
  config["version"] = kVersion;
  atomic_write(dir / "manifest.json", config.dump(2) + "\n");
}

// ---------------------------------------------------------------- parsing ---

ModularPrior parse_modular_prior(const std::string& name, int max_indegree) {
  int cap = max_indegree < 0 ? kMaxNodes : max_indegree;
  if (name == "flat") return ModularPrior::flat(cap);
  if (name == "koivisto") return ModularPrior::koivisto(cap);
  throw InputError("unknown modular prior: " + name + " (expected flat|koivisto)");
}

GlobalPrior parse_target_prior(const std::string& name, int max_indegree) {
  if (name == "uniform") return GlobalPrior::uniform_dag();
  return GlobalPrior::modular_induced(parse_modular_prior(name, max_indegree));
}

KernelKind parse_kernel(const std::string& name) {
  if (name == "local") return KernelKind::Local;
  if (name == "global") return KernelKind::Global;
  if (name == "hybrid") return KernelKind::Hybrid;
  if (name == "gibbs") return KernelKind::Gibbs;
  if (name == "order") return KernelKind::Order;
  throw InputError("unknown kernel: " + name);
}

FeatureKind parse_feature(const std::string& name) {
  if (name == "edge") return FeatureKind::DirectedEdge;
  if (name == "undirected") return FeatureKind::UndirectedEdge;
  if (name == "path") return FeatureKind::DirectedPath;
  throw InputError("unknown feature: " + name + " (expected edge|undirected|path)");
}

Dataset load_data(const std::string& path, bool header,
                  const std::string& interventions) {
  CsvOptions opt;
  opt.has_header = header;
  if (!interventions.empty()) opt.intervention_path = interventions;
  return load_csv(path, opt);
}

// The hybrid's endpoints are labeled after the pure kernels they reduce to.
std::string kernel_label(KernelKind k, double beta) {
  if (k == KernelKind::Hybrid) {
    if (beta == 1.0) return "local";
    if (beta == 0.0) return "global";
  }
  return kernel_name(k);
}

// Run fn(i) for i in [0, jobs) on a small worker pool.
void parallel_for(int jobs, int workers, const std::function<void(int)>& fn) {
  workers = std::max(1, std::min(workers, jobs));
  if (workers == 1) {
    for (int i = 0; i < jobs; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::mutex err_mu;
  std::exception_ptr err;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < jobs; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mu);
          if (!err) err = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

// ------------------------------------------------------------ subcommands ---

struct GenArgs {
  int d = 8;
  int n = 1000;
  std::uint64_t seed = 0;
  int arity_lo = 2, arity_hi = 4;
  double indegree = 1.5;
  double dirichlet = 0.5;
  int max_indegree = -1;
  std::vector<std::string> intervene;  // node:state:first:last
  std::string out;
};

void cmd_gen(const GenArgs& a) {
  NetworkOptions opt;
  opt.arity_lo = a.arity_lo;
  opt.arity_hi = a.arity_hi;
  opt.expected_indegree = a.indegree;
  opt.dirichlet_strength = a.dirichlet;
  opt.max_indegree = a.max_indegree;
  CptSet net = random_network(a.d, opt, a.seed);

  std::vector<Intervention> ivs;
  for (const std::string& spec : a.intervene) {
    Intervention iv{};
    if (std::sscanf(spec.c_str(), "%d:%d:%d:%d", &iv.node, &iv.forced_state,
                    &iv.first_record, &iv.last_record) != 4)
      throw InputError("bad --intervene spec (want node:state:first:last): " + spec);
    ivs.push_back(iv);
  }
  Dataset ds = ancestral_sample(net, a.n, ivs, Rng::split_seed(a.seed, 1));
  for (int i = 0; i < a.d; ++i) ds.names.push_back("x" + std::to_string(i));

  std::filesystem::path dir = prepare_outdir(a.out);
  {
    // save_csv goes straight to its target path, so stage through temps.
    std::filesystem::path data_tmp = dir / "data.csv.tmp";
    std::optional<std::string> iv_tmp;
    if (!ivs.empty()) iv_tmp = (dir / "interventions.csv.tmp").string();
    save_csv(ds, data_tmp.string(), iv_tmp);
    std::filesystem::rename(data_tmp, dir / "data.csv");
    if (iv_tmp) std::filesystem::rename(*iv_tmp, dir / "interventions.csv");
  }
  atomic_write(dir / "truth.dag", encode_dag(net.dag) + "\n");

  json network;
  network["graph"] = encode_dag(net.dag);
  network["arities"] = net.arities;
  network["tables"] = net.tables;
  atomic_write(dir / "network.json", network.dump(2) + "\n");

  write_manifest(dir, {{"command", "gen"}, {"d", a.d}, {"n", a.n}, {"seed", a.seed},
                       {"arity_lo", a.arity_lo}, {"arity_hi", a.arity_hi},
                       {"indegree", a.indegree}, {"dirichlet", a.dirichlet},
                       {"max_indegree", a.max_indegree}, {"intervene", a.intervene}});
}

struct ScoreArgs {
  std::string data;
  bool header = false;
  std::string interventions;
  int max_indegree = -1;
  std::string out;
};

void cmd_score(const ScoreArgs& a) {
  Dataset ds = load_data(a.data, a.header, a.interventions);
  ScoreTableOptions opt;
  opt.max_indegree = a.max_indegree;
  FamilyScoreTable t = build_score_table(ds, opt);
  std::filesystem::path dir = prepare_outdir(a.out);
  atomic_write(dir / "scores.json", t.to_json());
  write_manifest(dir, {{"command", "score"}, {"data", a.data}, {"header", a.header},
                       {"interventions", a.interventions},
                       {"max_indegree", t.max_indegree()}});
}

struct ExactArgs {
  std::string data;
  std::string scores;
  bool header = false;
  std::string interventions;
  std::string prior = "flat";
  int max_indegree = -1;
  bool brute_force = false;
  std::string format = "csv";
  std::string out;
};

void cmd_exact(const ExactArgs& a) {
  Dataset ds = load_data(a.data, a.header, a.interventions);
  FamilyScoreTable t;
  if (!a.scores.empty()) {
    std::ifstream in(a.scores);
    if (!in) throw InputError("cannot open file: " + a.scores);
    std::stringstream buf;
    buf << in.rdbuf();
    t = FamilyScoreTable::from_json(buf.str());
  } else {
    ScoreTableOptions opt;
    opt.max_indegree = a.max_indegree;
    t = build_score_table(ds, opt);
  }
  ModularPrior prior = parse_modular_prior(a.prior, t.max_indegree());

  EdgeMarginals em;
  double log_pD;
  if (a.brute_force) {
    if (t.d() > 5)
      throw InputError("--brute-force requires d <= 5 (got d=" + std::to_string(t.d()) + ")");
    BruteForcePosterior post =
        brute_force_posterior(t, GlobalPrior::modular_induced(prior));
    em = post.edge_marginals();
    log_pD = post.log_pD;
  } else {
    DpTables dp = dp_build(t, prior);
    em = dp_edge_marginals(dp, t, prior);
    log_pD = dp.log_pD;
  }
  MapResult map = map_dag(t, prior);
  Dag cl = chow_liu(ds);

  std::filesystem::path dir = prepare_outdir(a.out);
  write_matrix(dir, "edge_marginals", em, a.format);
  json summary;
  summary["log_evidence"] = log_pD;
  summary["map_graph"] = encode_dag(map.graph);
  summary["map_log_score"] = map.log_score;
  summary["chow_liu"] = encode_dag(cl);
  summary["method"] = a.brute_force ? "brute-force" : "dp";
  atomic_write(dir / "summary.json", summary.dump(2) + "\n");
  write_manifest(dir, {{"command", "exact"}, {"data", a.data}, {"scores", a.scores},
                       {"header", a.header}, {"interventions", a.interventions},
                       {"prior", a.prior}, {"max_indegree", t.max_indegree()},
                       {"brute_force", a.brute_force}, {"format", a.format}});
}

struct SampleArgs {
  std::string data;
  bool header = false;
  std::string interventions;
  std::string kernel = "hybrid";
  double beta = 0.1;
  double trunc_c = 1e-4;
  long long steps = 10000;
  long long burn_in = 0;
  long long thin = 1;
  int chains = 1;
  std::uint64_t seed = 0;
  std::string prior = "uniform";
  int max_indegree = -1;
  int jobs = (int)std::thread::hardware_concurrency();
  std::string out;
};

void cmd_sample(const SampleArgs& a) {
  Dataset ds = load_data(a.data, a.header, a.interventions);
  ScoreTableOptions opt;
  opt.max_indegree = a.max_indegree;
  FamilyScoreTable t = build_score_table(ds, opt);
  KernelKind kernel = parse_kernel(a.kernel);
  GlobalPrior target = parse_target_prior(a.prior, t.max_indegree());

  // The global proposal's marginals come from the DP under a modular prior;
  // use the target's own modular prior when it has one, flat otherwise.
  GlobalProposal gp;
  bool needs_gp = kernel == KernelKind::Global || kernel == KernelKind::Hybrid;
  if (needs_gp) {
    ModularPrior pp = target.modular() ? *target.modular()
                                       : ModularPrior::flat(t.max_indegree());
    DpTables dp = dp_build(t, pp);
    gp = GlobalProposal::from_marginals(dp_edge_marginals(dp, t, pp), a.trunc_c);
  }

  std::vector<SampleSet> sets(a.chains);
  parallel_for(a.chains, a.jobs, [&](int c) {
    SamplerConfig cfg;
    cfg.beta = a.beta;
    cfg.trunc_c = a.trunc_c;
    cfg.steps = a.steps;
    cfg.burn_in = a.burn_in;
    cfg.thin = a.thin;
    cfg.seed = Rng::split_seed(a.seed, c);
    cfg.target_prior = target;
    if (kernel == KernelKind::Order) {
      const ModularPrior* mp = target.modular();
      if (!mp) throw InputError("order kernel needs a modular target prior (flat|koivisto)");
      sets[c] = order_chain(cfg, t, *mp);
    } else {
      sets[c] = run_chain(cfg, kernel, t, needs_gp ? &gp : nullptr);
    }
  });

  std::filesystem::path dir = prepare_outdir(a.out);
  json stats = json::array();
  for (int c = 0; c < a.chains; ++c) {
    std::filesystem::path tmp = dir / ("samples_" + std::to_string(c) + ".csv.tmp");
    save_samples(sets[c], tmp.string());
    std::filesystem::rename(tmp, dir / ("samples_" + std::to_string(c) + ".csv"));
    const SampleSet& s = sets[c];
    stats.push_back({{"chain", c},
                     {"local_rate", s.local.rate()},
                     {"global_rate", s.global.rate()},
                     {"order_rate", s.order.rate()},
                     {"retry_exhausted", s.global.retry_exhausted},
                     {"gibbs_sweeps", s.gibbs_sweeps}});
  }
  atomic_write(dir / "stats.json", stats.dump(2) + "\n");
  write_manifest(dir, {{"command", "sample"}, {"data", a.data}, {"header", a.header},
                       {"interventions", a.interventions}, {"kernel", a.kernel},
                       {"kernel_label", kernel_label(kernel, a.beta)},
                       {"beta", a.beta}, {"trunc_c", a.trunc_c}, {"steps", a.steps},
                       {"burn_in", a.burn_in}, {"thin", a.thin}, {"chains", a.chains},
                       {"seed", a.seed}, {"prior", a.prior},
                       {"max_indegree", t.max_indegree()}});
}

struct FeaturesArgs {
  std::vector<std::string> samples;
  std::string feature = "edge";
  std::string format = "csv";
  std::string out;
};

void cmd_features(const FeaturesArgs& a) {
  SampleSet all;
  for (const std::string& path : a.samples) {
    SampleSet s = load_samples(path);
    all.samples.insert(all.samples.end(), s.samples.begin(), s.samples.end());
  }
  EdgeMarginals em = feature_posterior(all, parse_feature(a.feature));
  std::filesystem::path dir = prepare_outdir(a.out);
  write_matrix(dir, "features", em, a.format);
  write_manifest(dir, {{"command", "features"}, {"samples", a.samples},
                       {"feature", a.feature}, {"format", a.format}});
}

struct ConvergenceArgs {
  std::string data;
  bool header = false;
  std::string interventions;
  std::string kernel = "hybrid";
  double beta = 0.1;
  double trunc_c = 1e-4;
  long long steps = 100000;
  long long burn_in = 0;
  long long thin = 1;
  int chains = 1;
  int checkpoints = 50;
  std::uint64_t seed = 0;
  std::string prior = "uniform";
  int max_indegree = -1;
  int jobs = (int)std::thread::hardware_concurrency();
  std::string out;
};

// SAD of the running directed-edge posterior against the
// exact marginals under the same target prior, on a checkpoint grid.
void cmd_convergence(const ConvergenceArgs& a) {
  Dataset ds = load_data(a.data, a.header, a.interventions);
  ScoreTableOptions opt;
  opt.max_indegree = a.max_indegree;
  FamilyScoreTable t = build_score_table(ds, opt);
  KernelKind kernel = parse_kernel(a.kernel);
  GlobalPrior target = parse_target_prior(a.prior, t.max_indegree());

  EdgeMarginals exact;
  if (target.modular()) {
    DpTables dp = dp_build(t, *target.modular());
    exact = dp_edge_marginals(dp, t, *target.modular());
  } else {
    if (t.d() > 5)
      throw InputError("uniform-prior exact reference needs d <= 5; use a modular prior");
    exact = brute_force_posterior(t, target).edge_marginals();
  }

  GlobalProposal gp;
  bool needs_gp = kernel == KernelKind::Global || kernel == KernelKind::Hybrid;
  if (needs_gp) {
    ModularPrior pp = target.modular() ? *target.modular()
                                       : ModularPrior::flat(t.max_indegree());
    DpTables dp = dp_build(t, pp);
    gp = GlobalProposal::from_marginals(dp_edge_marginals(dp, t, pp), a.trunc_c);
  }

  std::vector<std::string> series(a.chains);
  parallel_for(a.chains, a.jobs, [&](int c) {
    SamplerConfig cfg;
    cfg.beta = a.beta;
    cfg.trunc_c = a.trunc_c;
    cfg.steps = a.steps;
    cfg.burn_in = a.burn_in;
    cfg.thin = a.thin;
    cfg.seed = Rng::split_seed(a.seed, c);
    cfg.target_prior = target;
    SampleSet s;
    if (kernel == KernelKind::Order) {
      const ModularPrior* mp = target.modular();
      if (!mp) throw InputError("order kernel needs a modular target prior (flat|koivisto)");
      s = order_chain(cfg, t, *mp);
    } else {
      s = run_chain(cfg, kernel, t, needs_gp ? &gp : nullptr);
    }
    // Running weighted edge frequencies, evaluated at the checkpoint grid.
    const int d = t.d();
    std::vector<double> acc(std::size_t(d) * d, 0.0);
    double wsum = 0.0;
    std::ostringstream os;
    os << "samples,sad\n";
    std::size_t next_cp = 0;
    for (std::size_t k = 0; k < s.samples.size(); ++k) {
      const SampleRecord& r = s.samples[k];
      for (int v = 0; v < d; ++v)
        for (NodeSet p = r.graph.parents[v]; p;) {
          int u = lowest(p);
          p &= p - 1;
          acc[std::size_t(u) * d + v] += r.weight;
        }
      wsum += r.weight;
      std::size_t cp = (next_cp + 1) * s.samples.size() / a.checkpoints;
      if (k + 1 == cp || k + 1 == s.samples.size()) {
        EdgeMarginals est;
        est.d = d;
        est.p = acc;
        for (double& v : est.p) v /= wsum;
        os << (k + 1) << ',' << fmt(sad(est, exact)) << '\n';
        while ((next_cp + 1) * s.samples.size() / a.checkpoints <= k + 1 &&
               next_cp + 1 <= (std::size_t)a.checkpoints)
          ++next_cp;
      }
    }
    series[c] = os.str();
  });

  std::filesystem::path dir = prepare_outdir(a.out);
  for (int c = 0; c < a.chains; ++c)
    atomic_write(dir / ("sad_" + std::to_string(c) + ".csv"), series[c]);
  write_manifest(dir, {{"command", "convergence"}, {"data", a.data},
                       {"header", a.header}, {"interventions", a.interventions},
                       {"kernel", a.kernel},
                       {"kernel_label", kernel_label(kernel, a.beta)},
                       {"beta", a.beta}, {"trunc_c", a.trunc_c}, {"steps", a.steps},
                       {"burn_in", a.burn_in}, {"thin", a.thin},
                       {"chains", a.chains}, {"checkpoints", a.checkpoints},
                       {"seed", a.seed}, {"prior", a.prior},
                       {"max_indegree", t.max_indegree()}});
}

struct StructureEvalArgs {
  std::string truth;
  std::string marginals;
  std::vector<std::string> samples;
  std::string feature = "undirected";
  std::string out;
};

void cmd_structure_eval(const StructureEvalArgs& a) {
  std::ifstream in(a.truth);
  if (!in) throw InputError("cannot open file: " + a.truth);
  std::string code;
  std::getline(in, code);
  Dag truth = decode_dag(code);

  FeatureKind kind = parse_feature(a.feature);
  EdgeMarginals scores;
  if (!a.marginals.empty()) {
    scores = read_matrix_csv(a.marginals);
  } else if (!a.samples.empty()) {
    SampleSet all;
    for (const std::string& path : a.samples) {
      SampleSet s = load_samples(path);
      all.samples.insert(all.samples.end(), s.samples.begin(), s.samples.end());
    }
    scores = feature_posterior(all, kind);
  } else {
    throw InputError("structure-eval needs --marginals or --samples");
  }
  if (scores.d != truth.d) throw InputError("truth and scores disagree on d");

  json summary;
  summary["feature"] = a.feature;
  summary["auc"] = auc(scores, truth, kind);
  std::filesystem::path dir = prepare_outdir(a.out);
  atomic_write(dir / "summary.json", summary.dump(2) + "\n");
  write_manifest(dir, {{"command", "structure-eval"}, {"truth", a.truth},
                       {"marginals", a.marginals}, {"samples", a.samples},
                       {"feature", a.feature}});
}

struct PredictArgs {
  std::string data;
  bool header = false;
  std::string interventions;
  int folds = 5;
  int seeds = 1;
  std::string kernel = "hybrid";
  double beta = 0.1;
  double trunc_c = 1e-4;
  long long steps = 20000;
  long long burn_in = 1000;
  long long thin = 10;
  std::uint64_t seed = 0;
  std::string prior = "uniform";
  int max_indegree = -1;
  bool with_dp = false;
  int jobs = (int)std::thread::hardware_concurrency();
  std::string out;
};

// Cross-validated test log-likelihood per method.
void cmd_predict(const PredictArgs& a) {
  Dataset ds = load_data(a.data, a.header, a.interventions);
  KernelKind kernel = parse_kernel(a.kernel);
  if (kernel == KernelKind::Order) throw InputError("predict: use a graph-space kernel");

  struct Row {
    int seed_idx, fold;
    double bma, map, factored, dp;
  };
  std::vector<Row> rows(std::size_t(a.seeds) * a.folds);
  parallel_for(a.seeds * a.folds, a.jobs, [&](int job) {
    int si = job / a.folds, fi = job % a.folds;
    std::vector<Fold> folds = split_folds(ds, a.folds, Rng::split_seed(a.seed, si));
    const Fold& fold = folds[fi];
    ScoreTableOptions opt;
    opt.max_indegree = a.max_indegree;
    FamilyScoreTable t = build_score_table(fold.train, opt);
    GlobalPrior target = parse_target_prior(a.prior, t.max_indegree());
    ModularPrior mp = target.modular() ? *target.modular()
                                       : ModularPrior::flat(t.max_indegree());

    SamplerConfig cfg;
    cfg.beta = a.beta;
    cfg.trunc_c = a.trunc_c;
    cfg.steps = a.steps;
    cfg.burn_in = a.burn_in;
    cfg.thin = a.thin;
    cfg.seed = Rng::split_seed(Rng::split_seed(a.seed, 1000 + si), fi);
    cfg.target_prior = target;
    GlobalProposal gp;
    bool needs_gp = kernel == KernelKind::Global || kernel == KernelKind::Hybrid;
    if (needs_gp) {
      DpTables dp = dp_build(t, mp);
      gp = GlobalProposal::from_marginals(dp_edge_marginals(dp, t, mp), a.trunc_c);
    }
    SampleSet s = run_chain(cfg, kernel, t, needs_gp ? &gp : nullptr);

    Row row{si, fi, 0.0, 0.0, 0.0, 0.0};
    row.bma = predictive_loglik_samples(s, fold.train, fold.test).mean;
    row.map = predictive_loglik_plugin(map_dag(t, mp).graph, fold.train, fold.test).mean;
    row.factored =
        predictive_loglik_plugin(Dag(fold.train.d), fold.train, fold.test).mean;
    if (a.with_dp) {
      double total = 0.0;
      std::vector<int> x(fold.test.d);
      for (int r = 0; r < fold.test.n; ++r) {
        for (int i = 0; i < fold.test.d; ++i) x[i] = fold.test.at(r, i);
        total += dp_predictive_logprob(fold.train, x, mp, opt);
      }
      row.dp = total / fold.test.n;
    }
    rows[job] = row;
  });

  std::ostringstream os;
  os << "seed,fold,bma,map,factored" << (a.with_dp ? ",dp" : "") << '\n';
  for (const Row& r : rows) {
    os << r.seed_idx << ',' << r.fold << ',' << fmt(r.bma) << ',' << fmt(r.map) << ','
       << fmt(r.factored);
    if (a.with_dp) os << ',' << fmt(r.dp);
    os << '\n';
  }
  std::filesystem::path dir = prepare_outdir(a.out);
  atomic_write(dir / "predictive.csv", os.str());
  write_manifest(dir, {{"command", "predict"}, {"data", a.data}, {"header", a.header},
                       {"interventions", a.interventions}, {"folds", a.folds},
                       {"seeds", a.seeds}, {"kernel", a.kernel},
                       {"kernel_label", kernel_label(kernel, a.beta)},
                       {"beta", a.beta}, {"trunc_c", a.trunc_c}, {"steps", a.steps},
                       {"burn_in", a.burn_in}, {"thin", a.thin}, {"seed", a.seed},
                       {"prior", a.prior}, {"max_indegree", a.max_indegree},
                       {"with_dp", a.with_dp}});
}

struct PriorsArgs {
  int d = 4;
  std::string out;
};

void cmd_priors(const PriorsArgs& a) {
  PriorReport report = prior_report(a.d);
  std::ostringstream os;
  os << "graph";
  for (const std::string& name : report.prior_names) os << ',' << name;
  os << '\n';
  for (std::size_t g = 0; g < report.graphs.size(); ++g) {
    // The graph encoding contains commas, so the field is CSV-quoted.
    os << '"' << encode_dag(report.graphs[g]) << '"';
    for (std::size_t p = 0; p < report.prior_names.size(); ++p)
      os << ',' << fmt(report.mass[p][g]);
    os << '\n';
  }
  std::filesystem::path dir = prepare_outdir(a.out);
  atomic_write(dir / "prior_mass.csv", os.str());
  json kl;
  for (std::size_t p = 0; p < report.prior_names.size(); ++p)
    kl[report.prior_names[p]] = report.kl_to_uniform[p];
  atomic_write(dir / "kl_to_uniform.json", kl.dump(2) + "\n");
  write_manifest(dir, {{"command", "priors"}, {"d", a.d}});
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact and MCMC structure learning for discrete Bayesian networks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  GenArgs gen;
  auto* c_gen = app.add_subcommand("gen", "Generate a synthetic network and dataset");
  c_gen->add_option("-d,--nodes", gen.d, "node count")->check(CLI::Range(1, 32));
  c_gen->add_option("-n,--records", gen.n, "record count")->check(CLI::NonNegativeNumber);
  c_gen->add_option("--seed", gen.seed, "rng seed");
  c_gen->add_option("--arity-lo", gen.arity_lo, "minimum arity");
  c_gen->add_option("--arity-hi", gen.arity_hi, "maximum arity");
  c_gen->add_option("--indegree", gen.indegree, "expected indegree");
  c_gen->add_option("--dirichlet", gen.dirichlet, "CPT Dirichlet strength");
  c_gen->add_option("--max-indegree", gen.max_indegree, "truth indegree cap (-1 = d-1)");
  c_gen->add_option("--intervene", gen.intervene, "node:state:first:last (repeatable)");
  c_gen->add_option("--out", gen.out, "output directory")->required();

  ScoreArgs score;
  auto* c_score = app.add_subcommand("score", "Build and save a family score table");
  c_score->add_option("--data", score.data, "data csv")->required();
  c_score->add_flag("--header", score.header, "data csv has a header row");
  c_score->add_option("--interventions", score.interventions, "intervention mask csv");
  c_score->add_option("--max-indegree", score.max_indegree, "indegree cap (-1 = default)");
  c_score->add_option("--out", score.out, "output directory")->required();

  ExactArgs exact;
  auto* c_exact = app.add_subcommand("exact", "Exact marginals, evidence, MAP, Chow-Liu");
  c_exact->add_option("--data", exact.data, "data csv")->required();
  c_exact->add_option("--scores", exact.scores, "precomputed scores.json");
  c_exact->add_flag("--header", exact.header, "data csv has a header row");
  c_exact->add_option("--interventions", exact.interventions, "intervention mask csv");
  c_exact->add_option("--prior", exact.prior, "flat|koivisto");
  c_exact->add_option("--max-indegree", exact.max_indegree, "indegree cap (-1 = default)");
  c_exact->add_flag("--brute-force", exact.brute_force, "enumerate all DAGs (d <= 5)");
  c_exact->add_option("--format", exact.format, "csv|json matrices")
      ->check(CLI::IsMember({"csv", "json"}));
  c_exact->add_option("--out", exact.out, "output directory")->required();

  SampleArgs sample;
  auto* c_sample = app.add_subcommand("sample", "Run MCMC chains over structures");
  c_sample->add_option("--data", sample.data, "data csv")->required();
  c_sample->add_flag("--header", sample.header, "data csv has a header row");
  c_sample->add_option("--interventions", sample.interventions, "intervention mask csv");
  c_sample->add_option("--kernel", sample.kernel, "local|global|hybrid|gibbs|order");
  c_sample->add_option("--beta", sample.beta, "hybrid local-kernel probability");
  c_sample->add_option("--trunc-c", sample.trunc_c, "proposal truncation constant");
  c_sample->add_option("--steps", sample.steps, "steps per chain");
  c_sample->add_option("--burn-in", sample.burn_in, "burn-in steps");
  c_sample->add_option("--thin", sample.thin, "thinning interval");
  c_sample->add_option("--chains", sample.chains, "chain count")->check(CLI::PositiveNumber);
  c_sample->add_option("--seed", sample.seed, "rng seed (split per chain)");
  c_sample->add_option("--prior", sample.prior, "target prior: uniform|flat|koivisto");
  c_sample->add_option("--max-indegree", sample.max_indegree, "indegree cap (-1 = default)");
  c_sample->add_option("--jobs", sample.jobs, "worker threads");
  c_sample->add_option("--out", sample.out, "output directory")->required();

  FeaturesArgs features;
  auto* c_features = app.add_subcommand("features", "Feature posteriors from sample files");
  c_features->add_option("--samples", features.samples, "sample csv files")->required();
  c_features->add_option("--feature", features.feature, "edge|undirected|path");
  c_features->add_option("--format", features.format, "csv|json matrices")
      ->check(CLI::IsMember({"csv", "json"}));
  c_features->add_option("--out", features.out, "output directory")->required();

  ConvergenceArgs conv;
  auto* c_conv = app.add_subcommand("convergence", "SAD-vs-samples against exact marginals");
  c_conv->add_option("--data", conv.data, "data csv")->required();
  c_conv->add_flag("--header", conv.header, "data csv has a header row");
  c_conv->add_option("--interventions", conv.interventions, "intervention mask csv");
  c_conv->add_option("--kernel", conv.kernel, "local|global|hybrid|gibbs|order");
  c_conv->add_option("--beta", conv.beta, "hybrid local-kernel probability");
  c_conv->add_option("--trunc-c", conv.trunc_c, "proposal truncation constant");
  c_conv->add_option("--steps", conv.steps, "steps per chain");
  c_conv->add_option("--burn-in", conv.burn_in, "burn-in steps");
  c_conv->add_option("--thin", conv.thin, "thinning interval");
  c_conv->add_option("--chains", conv.chains, "chain count")->check(CLI::PositiveNumber);
  c_conv->add_option("--checkpoints", conv.checkpoints, "SAD evaluation points")
      ->check(CLI::PositiveNumber);
  c_conv->add_option("--seed", conv.seed, "rng seed (split per chain)");
  c_conv->add_option("--prior", conv.prior, "target prior: uniform|flat|koivisto");
  c_conv->add_option("--max-indegree", conv.max_indegree, "indegree cap (-1 = default)");
  c_conv->add_option("--jobs", conv.jobs, "worker threads");
  c_conv->add_option("--out", conv.out, "output directory")->required();

  StructureEvalArgs seval;
  auto* c_seval = app.add_subcommand("structure-eval", "AUC against a known truth graph");
  c_seval->add_option("--truth", seval.truth, "truth.dag file")->required();
  c_seval->add_option("--marginals", seval.marginals, "marginal matrix csv");
  c_seval->add_option("--samples", seval.samples, "sample csv files");
  c_seval->add_option("--feature", seval.feature, "edge|undirected|path");
  c_seval->add_option("--out", seval.out, "output directory")->required();

  PredictArgs predict;
  auto* c_predict = app.add_subcommand("predict", "Cross-validated predictive log-likelihood");
  c_predict->add_option("--data", predict.data, "data csv")->required();
  c_predict->add_flag("--header", predict.header, "data csv has a header row");
  c_predict->add_option("--interventions", predict.interventions, "intervention mask csv");
  c_predict->add_option("--folds", predict.folds, "fold count")->check(CLI::Range(2, 1000));
  c_predict->add_option("--seeds", predict.seeds, "independent repetitions")
      ->check(CLI::PositiveNumber);
  c_predict->add_option("--kernel", predict.kernel, "local|global|hybrid|gibbs");
  c_predict->add_option("--beta", predict.beta, "hybrid local-kernel probability");
  c_predict->add_option("--trunc-c", predict.trunc_c, "proposal truncation constant");
  c_predict->add_option("--steps", predict.steps, "steps per chain");
  c_predict->add_option("--burn-in", predict.burn_in, "burn-in steps");
  c_predict->add_option("--thin", predict.thin, "thinning interval");
  c_predict->add_option("--seed", predict.seed, "rng seed (split per fold/seed)");
  c_predict->add_option("--prior", predict.prior, "target prior: uniform|flat|koivisto");
  c_predict->add_option("--max-indegree", predict.max_indegree,
                        "indegree cap (-1 = default)");
  c_predict->add_flag("--with-dp", predict.with_dp, "also compute the DP predictive");
  c_predict->add_option("--jobs", predict.jobs, "worker threads");
  c_predict->add_option("--out", predict.out, "output directory")->required();

  PriorsArgs priors;
  auto* c_priors = app.add_subcommand("priors", "Prior mass report over all DAGs (d <= 5)");
  c_priors->add_option("-d,--nodes", priors.d, "node count")->check(CLI::Range(1, 5));
  c_priors->add_option("--out", priors.out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*c_gen) cmd_gen(gen);
    if (*c_score) cmd_score(score);
    if (*c_exact) cmd_exact(exact);
    if (*c_sample) cmd_sample(sample);
    if (*c_features) cmd_features(features);
    if (*c_conv) cmd_convergence(conv);
    if (*c_seval) cmd_structure_eval(seval);
    if (*c_predict) cmd_predict(predict);
    if (*c_priors) cmd_priors(priors);
  } catch (const ResourceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
