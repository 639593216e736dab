#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dagmc/data.hpp"
#include "dagmc/samplers.hpp"

using namespace dagmc;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
  std::string cmd = std::string(DAGMC_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::vector<double>> read_matrix(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
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
  return rows;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string sub(const std::string& s) const { return (path / s).string(); }
};

}  // namespace

TEST_CASE("gen writes loadable deterministic data with a manifest") {
  TempDir tmp("dagmc_cli_gen");
  REQUIRE(run_cli("gen -d 5 -n 100 --seed 9 --indegree 1.0 --out " + tmp.sub("a")) == 0);
  REQUIRE(run_cli("gen -d 5 -n 100 --seed 9 --indegree 1.0 --out " + tmp.sub("b")) == 0);

  Dataset ds = load_csv(tmp.sub("a") + "/data.csv", CsvOptions{.has_header = true});
  CHECK(ds.d == 5);
  CHECK(ds.n == 100);
  ds.validate();
  Dag truth = decode_dag(slurp(tmp.sub("a") + "/truth.dag"));
  CHECK(truth.d == 5);
  CHECK(is_acyclic(truth));

  // Byte-identical reruns, and a manifest carrying the resolved config.
  CHECK(slurp(tmp.sub("a") + "/data.csv") == slurp(tmp.sub("b") + "/data.csv"));
  CHECK(slurp(tmp.sub("a") + "/truth.dag") == slurp(tmp.sub("b") + "/truth.dag"));
  json manifest = json::parse(slurp(tmp.sub("a") + "/manifest.json"));
  CHECK(manifest["command"] == "gen");
  CHECK(manifest["seed"] == 9);
  CHECK(manifest.contains("version"));
}

TEST_CASE("score output round-trips through FamilyScoreTable::from_json") {
  TempDir tmp("dagmc_cli_score");
  REQUIRE(run_cli("gen -d 4 -n 80 --seed 3 --out " + tmp.sub("g")) == 0);
  REQUIRE(run_cli("score --data " + tmp.sub("g") + "/data.csv --header --out " +
                  tmp.sub("s")) == 0);
  FamilyScoreTable t = FamilyScoreTable::from_json(slurp(tmp.sub("s") + "/scores.json"));
  CHECK(t.d() == 4);
  Dataset ds = load_csv(tmp.sub("g") + "/data.csv", CsvOptions{.has_header = true});
  FamilyScoreTable direct = build_score_table(ds, {});
  CHECK(t.score(1, bit(0)) == direct.score(1, bit(0)));
}

TEST_CASE("exact dp and brute-force agree through the file formats") {
  TempDir tmp("dagmc_cli_exact");
  REQUIRE(run_cli("gen -d 5 -n 150 --seed 4 --indegree 1.0 --out " + tmp.sub("g")) == 0);
  std::string data = tmp.sub("g") + "/data.csv";
  for (std::string prior : {"flat", "koivisto"}) {
    REQUIRE(run_cli("exact --data " + data + " --header --prior " + prior + " --out " +
                    tmp.sub("dp_" + prior)) == 0);
    REQUIRE(run_cli("exact --data " + data + " --header --prior " + prior +
                    " --brute-force --out " + tmp.sub("bf_" + prior)) == 0);
    auto dp = read_matrix(tmp.sub("dp_" + prior) + "/edge_marginals.csv");
    auto bf = read_matrix(tmp.sub("bf_" + prior) + "/edge_marginals.csv");
    REQUIRE(dp.size() == 5);
    REQUIRE(bf.size() == 5);
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j)
        CHECK(dp[i][j] == doctest::Approx(bf[i][j]).epsilon(1e-9));
    json a = json::parse(slurp(tmp.sub("dp_" + prior) + "/summary.json"));
    json b = json::parse(slurp(tmp.sub("bf_" + prior) + "/summary.json"));
    CHECK(double(a["log_evidence"]) ==
          doctest::Approx(double(b["log_evidence"])).epsilon(1e-9));
    CHECK(a["map_graph"] == b["map_graph"]);
  }
}

TEST_CASE("exact --format json emits the same matrix as csv") {
  TempDir tmp("dagmc_cli_fmt");
  REQUIRE(run_cli("gen -d 4 -n 60 --seed 5 --out " + tmp.sub("g")) == 0);
  std::string data = tmp.sub("g") + "/data.csv";
  REQUIRE(run_cli("exact --data " + data + " --header --out " + tmp.sub("csv")) == 0);
  REQUIRE(run_cli("exact --data " + data + " --header --format json --out " +
                  tmp.sub("json")) == 0);
  auto csv = read_matrix(tmp.sub("csv") + "/edge_marginals.csv");
  json mat = json::parse(slurp(tmp.sub("json") + "/edge_marginals.json"));
  REQUIRE(mat.size() == 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      CHECK(double(mat[i][j]) == csv[i][j]);
}

TEST_CASE("usage, input, and resource errors map to distinct exit codes") {
  TempDir tmp("dagmc_cli_err");
  CHECK(run_cli("no-such-command") == 1);
  CHECK(run_cli("exact --no-such-flag") == 1);
  CHECK(run_cli("exact --data missing.csv --out " + tmp.sub("x")) == 2);
  REQUIRE(run_cli("gen -d 6 -n 30 --seed 1 --out " + tmp.sub("g6")) == 0);
  CHECK(run_cli("exact --data " + tmp.sub("g6") + "/data.csv --header --brute-force --out " +
                tmp.sub("x")) == 2);
  // The DP node cap surfaces as a resource error.
  REQUIRE(run_cli("gen -d 23 -n 30 --seed 1 --out " + tmp.sub("g23")) == 0);
  CHECK(run_cli("exact --data " + tmp.sub("g23") + "/data.csv --header --out " +
                tmp.sub("x")) == 3);
  // Failed runs leave no output files behind.
  CHECK(!fs::exists(tmp.sub("x") + "/edge_marginals.csv"));
  CHECK(!fs::exists(tmp.sub("x") + "/manifest.json"));
}

TEST_CASE("sample labels hybrid endpoints and reproduces chains per seed") {
  TempDir tmp("dagmc_cli_sample");
  REQUIRE(run_cli("gen -d 4 -n 60 --seed 6 --out " + tmp.sub("g")) == 0);
  std::string data = tmp.sub("g") + "/data.csv";
  std::string base = "sample --data " + data + " --header --kernel hybrid --steps 400 "
                     "--thin 4 --chains 2 --seed 11 --out ";
  REQUIRE(run_cli(base + tmp.sub("a") + " --beta 1.0") == 0);
  REQUIRE(run_cli(base + tmp.sub("b") + " --beta 0.0") == 0);
  REQUIRE(run_cli(base + tmp.sub("c") + " --beta 0.25") == 0);
  CHECK(json::parse(slurp(tmp.sub("a") + "/manifest.json"))["kernel_label"] == "local");
  CHECK(json::parse(slurp(tmp.sub("b") + "/manifest.json"))["kernel_label"] == "global");
  CHECK(json::parse(slurp(tmp.sub("c") + "/manifest.json"))["kernel_label"] == "hybrid");

  REQUIRE(run_cli(base + tmp.sub("c2") + " --beta 0.25") == 0);
  CHECK(slurp(tmp.sub("c") + "/samples_0.csv") == slurp(tmp.sub("c2") + "/samples_0.csv"));
  CHECK(slurp(tmp.sub("c") + "/samples_1.csv") == slurp(tmp.sub("c2") + "/samples_1.csv"));
  // Chains use split seed streams.
  CHECK(slurp(tmp.sub("c") + "/samples_0.csv") != slurp(tmp.sub("c") + "/samples_1.csv"));
  SampleSet s = load_samples(tmp.sub("c") + "/samples_0.csv");
  CHECK(s.samples.size() == 100);
}

TEST_CASE("features emits a probability matrix from sample files") {
  TempDir tmp("dagmc_cli_feat");
  REQUIRE(run_cli("gen -d 4 -n 60 --seed 8 --out " + tmp.sub("g")) == 0);
  REQUIRE(run_cli("sample --data " + tmp.sub("g") + "/data.csv --header --kernel local "
                  "--steps 500 --seed 2 --out " + tmp.sub("s")) == 0);
  for (std::string feature : {"edge", "undirected", "path"}) {
    REQUIRE(run_cli("features --samples " + tmp.sub("s") + "/samples_0.csv --feature " +
                    feature + " --out " + tmp.sub("f_" + feature)) == 0);
    auto m = read_matrix(tmp.sub("f_" + feature) + "/features.csv");
    REQUIRE(m.size() == 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        CHECK(m[i][j] >= 0.0);
        CHECK(m[i][j] <= 1.0);
        if (i == j) CHECK(m[i][j] == 0.0);
      }
  }
  auto ue = read_matrix(tmp.sub("f_undirected") + "/features.csv");
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) CHECK(ue[i][j] == ue[j][i]);
}

TEST_CASE("convergence series is deterministic and ends near the exact answer") {
  TempDir tmp("dagmc_cli_conv");
  REQUIRE(run_cli("gen -d 4 -n 100 --seed 12 --indegree 1.0 --out " + tmp.sub("g")) == 0);
  std::string base = "convergence --data " + tmp.sub("g") + "/data.csv --header "
                     "--kernel gibbs --steps 4000 --prior flat --seed 5 --out ";
  REQUIRE(run_cli(base + tmp.sub("a")) == 0);
  REQUIRE(run_cli(base + tmp.sub("b")) == 0);
  CHECK(slurp(tmp.sub("a") + "/sad_0.csv") == slurp(tmp.sub("b") + "/sad_0.csv"));

  std::ifstream in(tmp.sub("a") + "/sad_0.csv");
  std::string header, line, last;
  std::getline(in, header);
  CHECK(header == "samples,sad");
  double first_sad = -1.0;
  while (std::getline(in, line)) {
    if (first_sad < 0.0) first_sad = std::stod(line.substr(line.find(',') + 1));
    last = line;
  }
  double final_sad = std::stod(last.substr(last.find(',') + 1));
  CHECK(final_sad < first_sad);
  CHECK(final_sad < 0.5);
}

TEST_CASE("structure-eval scores exact marginals against the truth") {
  TempDir tmp("dagmc_cli_seval");
  REQUIRE(run_cli("gen -d 5 -n 2000 --seed 7 --indegree 1.0 --out " + tmp.sub("g")) == 0);
  REQUIRE(run_cli("exact --data " + tmp.sub("g") + "/data.csv --header --out " +
                  tmp.sub("e")) == 0);
  REQUIRE(run_cli("structure-eval --truth " + tmp.sub("g") + "/truth.dag --marginals " +
                  tmp.sub("e") + "/edge_marginals.csv --feature undirected --out " +
                  tmp.sub("s")) == 0);
  json summary = json::parse(slurp(tmp.sub("s") + "/summary.json"));
  double v = summary["auc"];
  CHECK(v >= 0.0);
  CHECK(v <= 1.0);
  CHECK(v > 0.7);  // plenty of data for an easy truth
  CHECK(run_cli("structure-eval --truth " + tmp.sub("g") + "/truth.dag --out " +
                tmp.sub("x")) == 2);
}

TEST_CASE("predict writes one row per seed and fold") {
  TempDir tmp("dagmc_cli_pred");
  REQUIRE(run_cli("gen -d 4 -n 120 --seed 13 --indegree 1.0 --out " + tmp.sub("g")) == 0);
  REQUIRE(run_cli("predict --data " + tmp.sub("g") + "/data.csv --header --folds 3 "
                  "--seeds 2 --steps 800 --burn-in 100 --thin 4 --seed 1 --with-dp "
                  "--out " + tmp.sub("p")) == 0);
  std::ifstream in(tmp.sub("p") + "/predictive.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "seed,fold,bma,map,factored,dp");
  int rows = 0;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 6);
}

TEST_CASE("priors report masses normalize per prior") {
  TempDir tmp("dagmc_cli_priors");
  REQUIRE(run_cli("priors -d 3 --out " + tmp.sub("p")) == 0);
  std::ifstream in(tmp.sub("p") + "/prior_mass.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header.substr(0, 6) == "graph,");
  int n_priors = (int)std::count(header.begin(), header.end(), ',');
  std::vector<double> totals(n_priors, 0.0);
  std::string line;
  int n_graphs = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++n_graphs;
    // First field is the quoted graph encoding (it contains commas itself).
    REQUIRE(line[0] == '"');
    std::size_t close = line.find('"', 1);
    REQUIRE(close != std::string::npos);
    std::istringstream is(line.substr(close + 2));
    std::string cell;
    for (int p = 0; p < n_priors; ++p) {
      std::getline(is, cell, ',');
      totals[p] += std::stod(cell);
    }
  }
  CHECK(n_graphs == 25);
  for (double t : totals) CHECK(t == doctest::Approx(1.0).epsilon(1e-9));
  json kl = json::parse(slurp(tmp.sub("p") + "/kl_to_uniform.json"));
  CHECK(double(kl["uniform"]) == doctest::Approx(0.0).epsilon(1e-12));
}
