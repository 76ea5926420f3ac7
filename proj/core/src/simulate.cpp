#include "mixclips/simulate.hpp"

#include <fstream>
#include <numeric>

#include <json.hpp>

#include "mixclips/error.hpp"

namespace mixclips {

Eigen::MatrixXd example1_means() {
  Eigen::MatrixXd mu(6, 4);
  mu << -2, -2, -2, 2,
        -3,  3, -3, 3,
         4,  4,  4, 4,
         0,  0,  0, 0,
         2,  2,  0, 2,
         2,  0,  0, 2;
  return mu;
}

std::vector<std::vector<Eigen::VectorXd>> fear_table() {
  auto v = [](std::initializer_list<double> p) -> Eigen::VectorXd {
    Eigen::VectorXd x(static_cast<Eigen::Index>(p.size()));
    Eigen::Index i = 0;
    for (double q : p) x(i++) = q;
    return x / x.sum();
  };
  return {
      {v({0.63, 0.28, 0.09}), v({0.68, 0.11, 0.21}), v({0.22, 0.58, 0.13, 0.07})},
      {v({0.07, 0.29, 0.63}), v({0.27, 0.30, 0.43}), v({0.15, 0.17, 0.40, 0.28})},
  };
}

std::vector<Eigen::MatrixXd> persistence_transitions(const std::vector<double>& diagonals, int states) {
  std::vector<Eigen::MatrixXd> out;
  for (double d : diagonals) {
    Eigen::MatrixXd xi = Eigen::MatrixXd::Constant(states, states, (1.0 - d) / (states - 1));
    xi.diagonal().setConstant(d);
    out.push_back(xi);
  }
  return out;
}

namespace {

std::vector<double> resolve_weights(const GeneratorSpec& spec, std::vector<double> fallback) {
  if (!spec.weights.empty() && spec.weights.size() != fallback.size()) {
    throw Error(ErrorKind::config, "generator " + spec.name + ": weights has " +
                                       std::to_string(spec.weights.size()) + " entries, expected " +
                                       std::to_string(fallback.size()));
  }
  std::vector<double> w = spec.weights.empty() ? std::move(fallback) : spec.weights;
  double total = 0.0;
  for (double x : w) {
    if (!(x >= 0.0)) throw Error(ErrorKind::config, "generator " + spec.name + ": negative weight");
    total += x;
  }
  if (total <= 0.0) throw Error(ErrorKind::config, "generator " + spec.name + ": weights sum to zero");
  for (double& x : w) x /= total;
  return w;
}

std::vector<int> draw_labels(int n, const std::vector<double>& w, RandomSource& rng) {
  std::vector<int> s(static_cast<std::size_t>(n));
  for (int& x : s) x = draw_categorical(w, rng);
  return s;
}

Simulated gaussian(const GeneratorSpec& spec, const std::vector<GaussianComponent>& comps,
                   std::vector<double> default_w, RandomSource& rng) {
  Simulated sim;
  sim.weights = resolve_weights(spec, std::move(default_w));
  sim.labels = draw_labels(spec.n, sim.weights, rng);
  const auto r = comps.front().mu.size();
  GaussianData d;
  d.y.resize(spec.n, r);
  for (int i = 0; i < spec.n; ++i) {
    const auto& c = comps[sim.labels[i]];
    d.y.row(i) = draw_mvn(c.mu, c.sigma, rng).transpose();
  }
  sim.data = std::move(d);
  for (const auto& c : comps) sim.components.emplace_back(c);
  for (Eigen::Index j = 0; j < r; ++j) sim.header.push_back("y" + std::to_string(j + 1));
  return sim;
}

Simulated simulate_lca(const GeneratorSpec& spec, RandomSource& rng) {
  const auto table = spec.lca_table.empty() ? fear_table() : spec.lca_table;
  const std::size_t r = table.front().size();
  std::vector<int> levels;
  for (const auto& p : table.front()) levels.push_back(static_cast<int>(p.size()));
  for (const auto& row : table) {
    if (row.size() != r) throw Error(ErrorKind::config, "lca table: classes disagree on variable count");
    for (std::size_t j = 0; j < r; ++j) {
      if (row[j].size() != levels[j]) throw Error(ErrorKind::config, "lca table: classes disagree on level counts");
      if (std::abs(row[j].sum() - 1.0) > 1e-9 || (row[j].array() < 0).any()) {
        throw Error(ErrorKind::config, "lca table: probability rows must lie on the simplex");
      }
    }
  }
  Simulated sim;
  sim.weights = resolve_weights(spec, std::vector<double>(table.size(), 1.0));
  sim.labels = draw_labels(spec.n, sim.weights, rng);
  std::vector<std::vector<int>> rows(static_cast<std::size_t>(spec.n));
  for (int i = 0; i < spec.n; ++i) {
    for (std::size_t j = 0; j < r; ++j) {
      const auto& p = table[sim.labels[i]][j];
      rows[i].push_back(draw_categorical(std::span<const double>(p.data(), p.size()), rng));
    }
  }
  sim.data = CategoricalData(std::move(rows), levels);
  for (const auto& row : table) sim.components.emplace_back(CategoricalComponent{row});
  for (std::size_t j = 0; j < r; ++j) sim.header.push_back("x" + std::to_string(j + 1));
  return sim;
}

Simulated simulate_markov(const GeneratorSpec& spec, RandomSource& rng) {
  const auto xis = spec.transitions.empty() ? persistence_transitions({0.8, 0.5, 0.2}, 4) : spec.transitions;
  const int states = static_cast<int>(xis.front().rows());
  for (const auto& xi : xis) {
    if (xi.rows() != states || xi.cols() != states) throw Error(ErrorKind::config, "markov: matrices must be L x L");
    for (Eigen::Index j = 0; j < states; ++j) {
      if (std::abs(xi.row(j).sum() - 1.0) > 1e-9 || (xi.row(j).array() < 0).any()) {
        throw Error(ErrorKind::config, "markov: transition rows must lie on the simplex");
      }
    }
  }
  if (spec.sequence_length < 2) throw Error(ErrorKind::config, "markov: sequence_length must be >= 2");
  Simulated sim;
  sim.weights = resolve_weights(spec, std::vector<double>(xis.size(), 1.0));
  sim.labels = draw_labels(spec.n, sim.weights, rng);
  const std::vector<double> uniform(static_cast<std::size_t>(states), 1.0);
  std::vector<std::vector<int>> seqs(static_cast<std::size_t>(spec.n));
  for (int i = 0; i < spec.n; ++i) {
    const auto& xi = xis[sim.labels[i]];
    auto& s = seqs[i];
    s.push_back(draw_categorical(uniform, rng));
    for (int t = 1; t < spec.sequence_length; ++t) {
      Eigen::RowVectorXd row = xi.row(s.back());
      s.push_back(draw_categorical(std::span<const double>(row.data(), row.size()), rng));
    }
  }
  sim.data = MarkovData(std::move(seqs), states);
  for (const auto& xi : xis) sim.components.emplace_back(MarkovComponent{xi});
  for (int t = 0; t < spec.sequence_length; ++t) sim.header.push_back("t" + std::to_string(t + 1));
  return sim;
}

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
  nlohmann::json j = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> row(m.cols());
    for (Eigen::Index k = 0; k < m.cols(); ++k) row[k] = m(i, k);
    j.push_back(row);
  }
  return j;
}

}  // namespace

Simulated simulate(const GeneratorSpec& spec) {
  if (spec.n <= 0) throw Error(ErrorKind::data, "generator " + spec.name + ": N must be positive (got " +
                                                   std::to_string(spec.n) + ")");
  RandomSource rng(spec.seed);
  if (spec.name == "example1") {
    const auto mu = example1_means();
    std::vector<GaussianComponent> comps;
    for (Eigen::Index k = 0; k < mu.cols(); ++k) {
      comps.push_back({mu.col(k), SpdMatrix(0.6 * Eigen::MatrixXd::Identity(6, 6))});
    }
    return gaussian(spec, comps, std::vector<double>(4, 0.25), rng);
  }
  if (spec.name == "figure1") {
    std::vector<GaussianComponent> comps;
    const double mean[] = {-3.0, 0.0, 2.0};
    const double var[] = {1.0, 0.5, 0.8};
    for (int k = 0; k < 3; ++k) {
      comps.push_back({Eigen::VectorXd::Constant(1, mean[k]), SpdMatrix(Eigen::MatrixXd::Constant(1, 1, var[k]))});
    }
    return gaussian(spec, comps, {0.3, 0.5, 0.2}, rng);
  }
  if (spec.name == "lca" || spec.name == "fear") return simulate_lca(spec, rng);
  if (spec.name == "markov") return simulate_markov(spec, rng);
  throw Error(ErrorKind::config, "unknown generator '" + spec.name + "' (expected example1, figure1, lca, markov)");
}

void save_truth(const Simulated& sim, const GeneratorSpec& spec, const std::filesystem::path& path) {
  nlohmann::json j;
  j["generator"] = spec.name;
  j["n"] = spec.n;
  j["seed"] = spec.seed;
  j["weights"] = sim.weights;
  nlohmann::json comps = nlohmann::json::array();
  for (const auto& theta : sim.components) {
    nlohmann::json c;
    if (const auto* g = std::get_if<GaussianComponent>(&theta)) {
      c["kernel"] = "gaussian";
      c["mu"] = std::vector<double>(g->mu.data(), g->mu.data() + g->mu.size());
      c["sigma"] = matrix_json(g->sigma.matrix());
    } else if (const auto* cat = std::get_if<CategoricalComponent>(&theta)) {
      c["kernel"] = "categorical";
      c["pi"] = nlohmann::json::array();
      for (const auto& p : cat->pi) c["pi"].push_back(std::vector<double>(p.data(), p.data() + p.size()));
    } else {
      c["kernel"] = "markov";
      c["xi"] = matrix_json(std::get<MarkovComponent>(theta).xi);
    }
    comps.push_back(c);
  }
  j["components"] = comps;
  std::vector<int> one_based(sim.labels);
  for (int& s : one_based) ++s;
  j["labels"] = one_based;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  out << j.dump() << '\n';
}

std::vector<int> load_truth_labels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::data, "cannot open truth file " + path.string());
  try {
    const auto j = nlohmann::json::parse(in);
    auto labels = j.at("labels").get<std::vector<int>>();
    for (int& s : labels) {
      if (s < 1) throw Error(ErrorKind::data, "truth labels are 1-based");
      --s;
    }
    return labels;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::data, path.string() + ": " + e.what());
  }
}

}  // namespace mixclips
