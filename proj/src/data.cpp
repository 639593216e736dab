#include "dagmc/data.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>

namespace dagmc {

void Dataset::validate() const {
  if ((int)arities.size() != d) throw InputError("dataset: arity vector size mismatch");
  if (records.size() != std::size_t(n) * d) throw InputError("dataset: record matrix size mismatch");
  if (!mask.empty() && mask.size() != records.size())
    throw InputError("dataset: intervention mask shape mismatch");
  for (int i = 0; i < d; ++i)
    if (arities[i] < 2) throw InputError("dataset: arity < 2 at column " + std::to_string(i));
  for (int r = 0; r < n; ++r)
    for (int i = 0; i < d; ++i)
      if (at(r, i) < 0 || at(r, i) >= arities[i])
        throw InputError("dataset: cell out of arity range at row " + std::to_string(r) +
                         ", column " + std::to_string(i));
}

int CptSet::parent_configs(int i) const {
  int q = 1;
  for (NodeSet p = dag.parents[i]; p;) {
    int u = lowest(p);
    p &= p - 1;
    q *= arities[u];
  }
  return q;
}

int CptSet::config_of(int i, const std::vector<int>& record) const {
  int j = 0;
  for (NodeSet p = dag.parents[i]; p;) {
    int u = lowest(p);
    p &= p - 1;
    j = j * arities[u] + record[u];
  }
  return j;
}

namespace {

std::vector<std::vector<int>> parse_int_csv(const std::string& path, bool has_header,
                                            std::vector<std::string>* names) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open file: " + path);
  std::vector<std::vector<int>> rows;
  std::string line;
  int lineno = 0;
  bool header_pending = has_header;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t pos = 0;
    while (true) {
      std::size_t comma = line.find(',', pos);
      cells.push_back(line.substr(pos, comma == std::string::npos ? comma : comma - pos));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (header_pending) {
      header_pending = false;
      if (names) *names = cells;
      continue;
    }
    std::vector<int> row;
    row.reserve(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      int v = 0;
      const std::string& cell = cells[c];
      auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc() || res.ptr != cell.data() + cell.size() || v < 0)
        throw InputError(path + ": non-integer cell at row " + std::to_string(lineno) +
                         ", column " + std::to_string(c + 1));
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  for (std::size_t r = 1; r < rows.size(); ++r)
    if (rows[r].size() != rows[0].size())
      throw InputError(path + ": ragged row " + std::to_string(r + 1));
  return rows;
}

}  // namespace

Dataset load_csv(const std::string& path, const CsvOptions& options) {
  Dataset ds;
  auto rows = parse_int_csv(path, options.has_header, &ds.names);
  ds.n = (int)rows.size();
  ds.d = rows.empty() ? (int)ds.names.size() : (int)rows[0].size();
  if (ds.d == 0) throw InputError(path + ": no columns");
  ds.records.reserve(std::size_t(ds.n) * ds.d);
  for (auto& row : rows)
    ds.records.insert(ds.records.end(), row.begin(), row.end());

  if (options.arity_override) {
    ds.arities = *options.arity_override;
    if ((int)ds.arities.size() != ds.d)
      throw InputError(path + ": arity override length != column count");
  } else {
    ds.arities.assign(ds.d, 2);
    for (int r = 0; r < ds.n; ++r)
      for (int i = 0; i < ds.d; ++i)
        ds.arities[i] = std::max(ds.arities[i], ds.at(r, i) + 1);
  }

  if (options.intervention_path) {
    auto mrows = parse_int_csv(*options.intervention_path, options.has_header, nullptr);
    if ((int)mrows.size() != ds.n || (ds.n > 0 && (int)mrows[0].size() != ds.d))
      throw InputError("intervention file shape mismatch with data file");
    ds.mask.reserve(ds.records.size());
    for (int r = 0; r < ds.n; ++r)
      for (int i = 0; i < ds.d; ++i) {
        int v = mrows[r][i];
        if (v != 0 && v != 1)
          throw InputError("intervention cell not 0/1 at row " + std::to_string(r + 1) +
                           ", column " + std::to_string(i + 1));
        ds.mask.push_back((std::uint8_t)v);
      }
  }
  ds.validate();
  return ds;
}

void save_csv(const Dataset& ds, const std::string& data_path,
              const std::optional<std::string>& intervention_path) {
  std::ofstream out(data_path);
  if (!out) throw InputError("cannot write file: " + data_path);
  if (!ds.names.empty()) {
    for (int i = 0; i < ds.d; ++i) out << (i ? "," : "") << ds.names[i];
    out << '\n';
  }
  for (int r = 0; r < ds.n; ++r) {
    for (int i = 0; i < ds.d; ++i) out << (i ? "," : "") << ds.at(r, i);
    out << '\n';
  }
  if (intervention_path) {
    std::ofstream mout(*intervention_path);
    if (!mout) throw InputError("cannot write file: " + *intervention_path);
    for (int r = 0; r < ds.n; ++r) {
      for (int i = 0; i < ds.d; ++i)
        mout << (i ? "," : "") << (ds.intervened(r, i) ? 1 : 0);
      mout << '\n';
    }
  }
}

CptSet random_cpts(const Dag& g, const std::vector<int>& arities,
                   double dirichlet_strength, std::uint64_t seed) {
  CptSet net;
  net.dag = g;
  net.arities = arities;
  net.tables.resize(g.d);
  Rng rng(seed);
  for (int i = 0; i < g.d; ++i) {
    int q = arities[i];
    int nconf = net.parent_configs(i);
    net.tables[i].resize(std::size_t(nconf) * q);
    for (int j = 0; j < nconf; ++j) {
      double sum = 0;
      for (int k = 0; k < q; ++k) {
        double x = rng.gamma(dirichlet_strength);
        net.tables[i][std::size_t(j) * q + k] = x;
        sum += x;
      }
      for (int k = 0; k < q; ++k) net.tables[i][std::size_t(j) * q + k] /= sum;
    }
  }
  return net;
}

CptSet random_network(int d, const NetworkOptions& opt, std::uint64_t seed) {
  if (opt.arity_lo < 2) throw InputError("random_network: arity lower bound < 2");
  if (opt.arity_hi < opt.arity_lo) throw InputError("random_network: bad arity range");
  Rng rng(Rng::split_seed(seed, 0));
  int cap = opt.max_indegree < 0 ? d - 1 : opt.max_indegree;
  // Upper-triangular edges at density p = expected_indegree / ((d-1)/2),
  // then relabel by a random permutation.
  double p = d > 1 ? std::min(1.0, opt.expected_indegree * 2.0 / (d - 1)) : 0.0;
  std::vector<int> label(d);
  std::iota(label.begin(), label.end(), 0);
  for (int i = d - 1; i > 0; --i)
    std::swap(label[i], label[rng.uniform_int(i + 1)]);
  Dag g(d);
  for (int j = 1; j < d; ++j)
    for (int i = 0; i < j; ++i)
      if (rng.bernoulli(p) && set_size(g.parents[label[j]]) < cap)
        g.parents[label[j]] |= bit(label[i]);
  std::vector<int> arities(d);
  for (int i = 0; i < d; ++i)
    arities[i] = opt.arity_lo + (int)rng.uniform_int(opt.arity_hi - opt.arity_lo + 1);
  return random_cpts(g, arities, opt.dirichlet_strength, Rng::split_seed(seed, 1));
}

Dataset ancestral_sample(const CptSet& net, int n,
                         const std::vector<Intervention>& interventions,
                         std::uint64_t seed) {
  if (n < 0) throw InputError("ancestral_sample: n < 0");
  const int d = net.dag.d;
  for (const auto& iv : interventions) {
    if (iv.node < 0 || iv.node >= d) throw InputError("intervention node out of range");
    if (iv.forced_state < 0 || iv.forced_state >= net.arities[iv.node])
      throw InputError("intervention state out of arity range");
  }
  Dataset ds;
  ds.n = n;
  ds.d = d;
  ds.arities = net.arities;
  ds.records.assign(std::size_t(n) * d, 0);
  if (!interventions.empty()) ds.mask.assign(std::size_t(n) * d, 0);

  std::vector<int> order = topological_order(net.dag);
  Rng rng(seed);
  std::vector<int> row(d, 0);
  for (int r = 0; r < n; ++r) {
    for (int i : order) {
      bool forced = false;
      for (const auto& iv : interventions) {
        if (iv.node == i && r >= iv.first_record && r < iv.last_record) {
          row[i] = iv.forced_state;
          ds.mask[std::size_t(r) * d + i] = 1;
          forced = true;
          break;
        }
      }
      if (!forced) {
        int q = net.arities[i];
        const double* theta = net.tables[i].data() + std::size_t(net.config_of(i, row)) * q;
        double u = rng.uniform();
        int k = 0;
        double acc = theta[0];
        while (k + 1 < q && u >= acc) acc += theta[++k];
        row[i] = k;
      }
    }
    std::copy(row.begin(), row.end(), ds.records.begin() + std::size_t(r) * d);
  }
  ds.validate();
  return ds;
}

std::vector<Fold> split_folds(const Dataset& ds, int k, std::uint64_t seed) {
  if (k < 2) throw InputError("split_folds: k < 2");
  if (ds.n < k) throw InputError("split_folds: fewer records than folds");
  std::vector<int> idx(ds.n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  for (int i = ds.n - 1; i > 0; --i)
    std::swap(idx[i], idx[rng.uniform_int(i + 1)]);
  std::vector<Fold> folds(k);
  auto subset = [&](const std::vector<int>& rows) {
    Dataset out;
    out.n = (int)rows.size();
    out.d = ds.d;
    out.arities = ds.arities;
    out.names = ds.names;
    out.records.reserve(rows.size() * ds.d);
    if (ds.has_interventions()) out.mask.reserve(rows.size() * ds.d);
    for (int r : rows) {
      for (int i = 0; i < ds.d; ++i) {
        out.records.push_back(ds.at(r, i));
        if (ds.has_interventions()) out.mask.push_back(ds.intervened(r, i) ? 1 : 0);
      }
    }
    return out;
  };
  for (int f = 0; f < k; ++f) {
    std::vector<int> test_rows, train_rows;
    for (int pos = 0; pos < ds.n; ++pos)
      (pos % k == f ? test_rows : train_rows).push_back(idx[pos]);
    std::sort(test_rows.begin(), test_rows.end());
    std::sort(train_rows.begin(), train_rows.end());
    folds[f].test = subset(test_rows);
    folds[f].train = subset(train_rows);
  }
  return folds;
}

}  // namespace dagmc
