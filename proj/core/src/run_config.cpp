#include "mixclips/run_config.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "mixclips/error.hpp"

namespace mixclips {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>> kKeys = {
    {"data", {"path", "generator", "n", "seed", "weights", "levels", "states", "truth", "sequence_length",
              "diagonals"}},
    {"model", {"kernel", "k_mode", "k", "bnb", "gamma_rule", "gamma", "b0_scale", "categorical_prior",
               "markov_persistence_prior", "markov_off_diagonal_prior"}},
    {"mcmc", {"burnin", "draws", "thin", "seed", "init", "init_k", "init_restarts", "chains"}},
    {"clips", {"functional", "min_fill", "kplus", "restarts", "max_iter", "clr", "seed"}},
    {"output", {"dir"}},
};

// lca_class<k> and transition<k> carry generator tables.
bool indexed_key(const std::string& key, const std::string& stem) {
  return key.size() > stem.size() && key.compare(0, stem.size(), stem) == 0 &&
         key.find_first_not_of("0123456789", stem.size()) == std::string::npos;
}

class Reader {
 public:
  Reader(const std::string& text, std::string source) : source_(std::move(source)) {
    std::istringstream lines(text);
    std::string line, section;
    int no = 0;
    while (std::getline(lines, line)) {
      ++no;
      const auto b = line.find_first_not_of(" \t");
      if (b == std::string::npos || line[b] == ';' || line[b] == '#') continue;
      if (line[b] == '[') {
        const auto e = line.find(']', b);
        section = line.substr(b + 1, e == std::string::npos ? std::string::npos : e - b - 1);
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::string key = line.substr(b, eq - b);
      key.erase(key.find_last_not_of(" \t") + 1);
      lines_[section + "." + key] = no;
    }
    std::istringstream in(text);
    try {
      pt::ini_parser::read_ini(in, tree_);
    } catch (const pt::ini_parser_error& e) {
      throw Error(ErrorKind::config, source_ + ":" + std::to_string(e.line()) + ": " + e.message());
    }
    for (const auto& [section, body] : tree_) {
      const auto known = kKeys.find(section);
      if (known == kKeys.end()) {
        throw Error(ErrorKind::config, source_ + ": unknown section [" + section + "]");
      }
      for (const auto& [key, value] : body) {
        if (known->second.count(key) || (section == "data" && (indexed_key(key, "lca_class") ||
                                                               indexed_key(key, "transition")))) {
          continue;
        }
        fail(section, key, "unknown key");
      }
    }
  }

  [[noreturn]] void fail(const std::string& section, const std::string& key, const std::string& what) const {
    const auto it = lines_.find(section + "." + key);
    const std::string where = it == lines_.end() ? source_ : source_ + ":" + std::to_string(it->second);
    throw Error(ErrorKind::config, where + ": [" + section + "] " + key + ": " + what);
  }

  bool has(const std::string& section, const std::string& key) const {
    return tree_.get_child_optional(pt::ptree::path_type(section + "." + key, '.')).has_value();
  }

  std::string text(const std::string& section, const std::string& key, const std::string& fallback) const {
    return tree_.get<std::string>(pt::ptree::path_type(section + "." + key, '.'), fallback);
  }

  template <class T>
  T get(const std::string& section, const std::string& key, T fallback) const {
    if (!has(section, key)) return fallback;
    const auto v = tree_.get_optional<T>(pt::ptree::path_type(section + "." + key, '.'));
    if (!v) fail(section, key, "cannot parse '" + text(section, key, "") + "'");
    return *v;
  }

  std::vector<double> reals(const std::string& section, const std::string& key) const {
    std::vector<double> out;
    std::string s = text(section, key, "");
    std::istringstream in(s);
    std::string tok;
    while (std::getline(in, tok, ',')) {
      try {
        std::size_t used = 0;
        out.push_back(std::stod(tok, &used));
        if (tok.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(tok);
      } catch (const std::logic_error&) {
        fail(section, key, "bad number '" + tok + "'");
      }
    }
    if (out.empty()) fail(section, key, "empty list");
    return out;
  }

  std::vector<int> ints(const std::string& section, const std::string& key) const {
    std::vector<int> out;
    for (double x : reals(section, key)) {
      if (x != static_cast<int>(x)) fail(section, key, "expected integers");
      out.push_back(static_cast<int>(x));
    }
    return out;
  }

  // "a,b,c | d,e | ..." -> blocks of reals
  std::vector<std::vector<double>> blocks(const std::string& section, const std::string& key) const {
    std::vector<std::vector<double>> out;
    std::istringstream in(text(section, key, ""));
    std::string block;
    while (std::getline(in, block, '|')) {
      std::vector<double> row;
      std::istringstream b(block);
      std::string tok;
      while (std::getline(b, tok, ',')) {
        try {
          row.push_back(std::stod(tok));
        } catch (const std::logic_error&) {
          fail(section, key, "bad number '" + tok + "'");
        }
      }
      out.push_back(std::move(row));
    }
    return out;
  }

  const pt::ptree& tree() const { return tree_; }

 private:
  std::string source_;
  pt::ptree tree_;
  std::map<std::string, int> lines_;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_relative() && !base.empty() ? base / path : path;
}

}  // namespace

RunConfig parse_run_config(std::istream& in, const std::string& source, const std::filesystem::path& base_dir) {
  std::stringstream buf;
  buf << in.rdbuf();
  const Reader r(buf.str(), source);
  RunConfig rc;
  rc.source = source;

  // [model]
  auto& m = rc.model;
  try {
    m.kernel = kernel_kind_from_string(r.text("model", "kernel", "gaussian"));
  } catch (const Error& e) {
    r.fail("model", "kernel", e.what());
  }
  try {
    m.k_prior.mode = k_mode_from_string(r.text("model", "k_mode", "bnb"));
  } catch (const Error& e) {
    r.fail("model", "k_mode", e.what());
  }
  m.k_prior.k = r.get<int>("model", "k", 4);
  if (r.has("model", "bnb")) {
    const auto abc = r.reals("model", "bnb");
    if (abc.size() != 3) r.fail("model", "bnb", "expected three values a,b,c");
    m.k_prior.a = abc[0];
    m.k_prior.b = abc[1];
    m.k_prior.c = abc[2];
  }
  const std::string rule = r.text("model", "gamma_rule", m.k_prior.mode == KMode::bnb ? "dynamic" : "static");
  if (rule != "dynamic" && rule != "static") r.fail("model", "gamma_rule", "expected dynamic or static");
  m.gamma.dynamic = rule == "dynamic";
  m.gamma.value = r.get<double>("model", "gamma", m.gamma.dynamic ? 0.5 : 0.01);
  const std::string b0 = r.text("model", "b0_scale", "range_squared");
  if (b0 != "range_squared" && b0 != "range") r.fail("model", "b0_scale", "expected range_squared or range");
  m.hyper.b0_scale = b0 == "range" ? B0Scale::range : B0Scale::range_squared;
  m.hyper.categorical_prior = r.get<double>("model", "categorical_prior", 1.0);
  m.hyper.markov_persistence_prior = r.get<double>("model", "markov_persistence_prior", 0.0);
  m.hyper.markov_off_diagonal_prior = r.get<double>("model", "markov_off_diagonal_prior", 1.0);

  // [mcmc]
  m.burnin = r.get<int>("mcmc", "burnin", 1000);
  m.draws = r.get<int>("mcmc", "draws", 1000);
  m.thin = r.get<int>("mcmc", "thin", 1);
  m.seed = r.get<std::uint64_t>("mcmc", "seed", 1);
  const std::string init = r.text("mcmc", "init", "kmeans");
  if (init != "kmeans" && init != "random") r.fail("mcmc", "init", "expected kmeans or random");
  m.init = init == "random" ? InitKind::random : InitKind::kmeans;
  m.init_k = r.get<int>("mcmc", "init_k", 0);
  m.init_restarts = r.get<int>("mcmc", "init_restarts", 10);
  rc.chains = r.get<int>("mcmc", "chains", 1);
  if (rc.chains < 1) r.fail("mcmc", "chains", "must be >= 1");
  try {
    m.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::config, source + ": " + e.what());
  }

  // [data]
  if (r.has("data", "path") == r.has("data", "generator")) {
    throw Error(ErrorKind::config, source + ": [data] needs exactly one of 'path' or 'generator'");
  }
  if (r.has("data", "path")) rc.data.path = resolve(base_dir, r.text("data", "path", ""));
  if (r.has("data", "truth")) rc.data.truth = resolve(base_dir, r.text("data", "truth", ""));
  if (r.has("data", "levels")) rc.data.csv.levels = r.ints("data", "levels");
  rc.data.csv.states = r.get<int>("data", "states", 0);
  if (r.has("data", "generator")) {
    GeneratorSpec g;
    g.name = r.text("data", "generator", "example1");
    g.n = r.get<int>("data", "n", 1000);
    g.seed = r.get<std::uint64_t>("data", "seed", 1);
    if (r.has("data", "weights")) g.weights = r.reals("data", "weights");
    g.sequence_length = r.get<int>("data", "sequence_length", 30);
    if (r.has("data", "diagonals")) {
      const int states = rc.data.csv.states > 0 ? rc.data.csv.states : 4;
      for (double d : r.reals("data", "diagonals")) {
        if (d < 0.0 || d > 1.0) r.fail("data", "diagonals", "persistence must lie in [0, 1]");
      }
      g.transitions = persistence_transitions(r.reals("data", "diagonals"), states);
    }
    for (int k = 1; r.has("data", "lca_class" + std::to_string(k)); ++k) {
      std::vector<Eigen::VectorXd> row;
      for (const auto& b : r.blocks("data", "lca_class" + std::to_string(k))) {
        row.push_back(Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size())));
      }
      g.lca_table.push_back(std::move(row));
    }
    for (int k = 1; r.has("data", "transition" + std::to_string(k)); ++k) {
      const std::string key = "transition" + std::to_string(k);
      const auto rows = r.blocks("data", key);
      Eigen::MatrixXd xi(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.size()));
      for (std::size_t j = 0; j < rows.size(); ++j) {
        if (rows[j].size() != rows.size()) r.fail("data", key, "transition matrix must be square");
        for (std::size_t l = 0; l < rows.size(); ++l) xi(j, l) = rows[j][l];
      }
      g.transitions.push_back(xi);
    }
    rc.data.generator = g;
  }

  // [clips]
  auto& c = rc.clips;
  if (r.has("clips", "functional")) {
    try {
      c.functional = FunctionalSpec::from_string(r.text("clips", "functional", ""));
    } catch (const Error& e) {
      r.fail("clips", "functional", e.what());
    }
    rc.functional_given = true;
  } else {
    c.functional = default_functional(m.kernel);
  }
  c.min_fill_fraction = r.get<double>("clips", "min_fill", 0.0);
  if (c.min_fill_fraction < 0.0 || c.min_fill_fraction >= 1.0) r.fail("clips", "min_fill", "must lie in [0, 1)");
  if (r.has("clips", "kplus")) {
    c.kplus = r.get<int>("clips", "kplus", 1);
    if (*c.kplus < 1) r.fail("clips", "kplus", "must be >= 1");
  }
  c.kmeans.restarts = r.get<int>("clips", "restarts", 10);
  if (c.kmeans.restarts < 1) r.fail("clips", "restarts", "must be >= 1");
  c.kmeans.max_iter = r.get<int>("clips", "max_iter", 100);
  if (c.kmeans.max_iter < 1) r.fail("clips", "max_iter", "must be >= 1");
  c.clr_transform = r.get<bool>("clips", "clr", false);
  c.seed = r.get<std::uint64_t>("clips", "seed", 1);

  // [output]
  rc.out_dir = resolve(base_dir, r.text("output", "dir", "out"));
  return rc;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::config, "cannot open config file " + path.string());
  return parse_run_config(in, path.string(), path.parent_path());
}

}  // namespace mixclips
