#include "mixclips/store_io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace mixclips {

using nlohmann::json;

std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

class Line {
 public:
  Line& raw(const std::string& s) {
    out_ += s;
    return *this;
  }
  Line& key(const char* k) {
    if (need_comma_) out_ += ',';
    out_ += '"';
    out_ += k;
    out_ += "\":";
    need_comma_ = false;
    return *this;
  }
  Line& open(char c) {
    out_ += c;
    need_comma_ = false;
    return *this;
  }
  Line& close(char c) {
    out_ += c;
    need_comma_ = true;
    return *this;
  }
  Line& value(double x) {
    sep();
    out_ += format_real(x);
    need_comma_ = true;
    return *this;
  }
  Line& value(long long x) {
    sep();
    out_ += std::to_string(x);
    need_comma_ = true;
    return *this;
  }
  Line& value(std::uint64_t x) {
    sep();
    out_ += std::to_string(x);
    need_comma_ = true;
    return *this;
  }
  Line& text(const std::string& s) {
    sep();
    out_ += '"' + s + '"';
    need_comma_ = true;
    return *this;
  }
  Line& vec(const double* p, Eigen::Index n) {
    sep();
    out_ += '[';
    for (Eigen::Index i = 0; i < n; ++i) {
      if (i) out_ += ',';
      out_ += format_real(p[i]);
    }
    out_ += ']';
    need_comma_ = true;
    return *this;
  }
  Line& matrix(const Eigen::MatrixXd& m) {
    open_array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      Eigen::RowVectorXd row = m.row(i);
      vec(row.data(), row.size());
    }
    return close(']');
  }
  Line& open_array() {
    sep();
    return open('[');
  }
  Line& open_object() {
    sep();
    return open('{');
  }
  const std::string& str() const { return out_; }

 private:
  void sep() {
    if (need_comma_) out_ += ',';
  }
  std::string out_;
  bool need_comma_ = false;
};

void write_config(Line& line, const MixtureConfig& c) {
  line.open_object();
  line.key("kernel").text(to_string(c.kernel));
  line.key("k_mode").text(to_string(c.k_prior.mode));
  line.key("k").value(static_cast<long long>(c.k_prior.k));
  line.key("bnb").open_array().value(c.k_prior.a).value(c.k_prior.b).value(c.k_prior.c).close(']');
  line.key("gamma_rule").text(c.gamma.dynamic ? "dynamic" : "static");
  line.key("gamma").value(c.gamma.value);
  line.key("b0_scale").text(c.hyper.b0_scale == B0Scale::range_squared ? "range_squared" : "range");
  line.key("categorical_prior").value(c.hyper.categorical_prior);
  line.key("markov_persistence_prior").value(c.hyper.markov_persistence_prior);
  line.key("markov_off_diagonal_prior").value(c.hyper.markov_off_diagonal_prior);
  line.key("burnin").value(static_cast<long long>(c.burnin));
  line.key("draws").value(static_cast<long long>(c.draws));
  line.key("thin").value(static_cast<long long>(c.thin));
  line.key("seed").value(c.seed);
  line.key("init").text(c.init == InitKind::kmeans ? "kmeans" : "random");
  line.key("init_k").value(static_cast<long long>(c.init_k));
  line.key("init_restarts").value(static_cast<long long>(c.init_restarts));
  line.close('}');
}

MixtureConfig parse_config(const json& j) {
  MixtureConfig c;
  c.kernel = kernel_kind_from_string(j.at("kernel").get<std::string>());
  c.k_prior.mode = k_mode_from_string(j.at("k_mode").get<std::string>());
  c.k_prior.k = j.at("k").get<int>();
  const auto& bnb = j.at("bnb");
  c.k_prior.a = bnb.at(0).get<double>();
  c.k_prior.b = bnb.at(1).get<double>();
  c.k_prior.c = bnb.at(2).get<double>();
  c.gamma.dynamic = j.at("gamma_rule").get<std::string>() == "dynamic";
  c.gamma.value = j.at("gamma").get<double>();
  c.hyper.b0_scale = j.at("b0_scale").get<std::string>() == "range" ? B0Scale::range : B0Scale::range_squared;
  c.hyper.categorical_prior = j.at("categorical_prior").get<double>();
  c.hyper.markov_persistence_prior = j.at("markov_persistence_prior").get<double>();
  c.hyper.markov_off_diagonal_prior = j.at("markov_off_diagonal_prior").get<double>();
  c.burnin = j.at("burnin").get<int>();
  c.draws = j.at("draws").get<int>();
  c.thin = j.at("thin").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.init = j.at("init").get<std::string>() == "random" ? InitKind::random : InitKind::kmeans;
  c.init_k = j.at("init_k").get<int>();
  c.init_restarts = j.at("init_restarts").get<int>();
  return c;
}

void write_theta(Line& line, const ComponentParams& theta) {
  std::visit(
      [&line](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        line.open_object();
        if constexpr (std::is_same_v<T, GaussianComponent>) {
          line.key("kernel").text("gaussian");
          line.key("mu").vec(c.mu.data(), c.mu.size());
          line.key("sigma").matrix(c.sigma.matrix());
        } else if constexpr (std::is_same_v<T, CategoricalComponent>) {
          line.key("kernel").text("categorical");
          line.key("pi").open_array();
          for (const auto& row : c.pi) line.vec(row.data(), row.size());
          line.close(']');
        } else {
          line.key("kernel").text("markov");
          line.key("xi").matrix(c.xi);
        }
        line.close('}');
      },
      theta);
}

Eigen::VectorXd to_vector(const json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

Eigen::MatrixXd to_matrix(const json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows > 0 ? static_cast<Eigen::Index>(j[0].size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (static_cast<Eigen::Index>(j[i].size()) != cols) throw Error(ErrorKind::io, "store: ragged matrix");
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = j[i][k].get<double>();
  }
  return m;
}

ComponentParams parse_theta(const json& j) {
  const std::string kind = j.at("kernel").get<std::string>();
  if (kind == "gaussian") return GaussianComponent{to_vector(j.at("mu")), SpdMatrix(to_matrix(j.at("sigma")))};
  if (kind == "categorical") {
    CategoricalComponent c;
    for (const auto& row : j.at("pi")) c.pi.push_back(to_vector(row));
    return c;
  }
  if (kind == "markov") return MarkovComponent{to_matrix(j.at("xi"))};
  throw Error(ErrorKind::io, "store: unknown kernel tag '" + kind + "'");
}

}  // namespace

std::string config_json(const MixtureConfig& config) {
  Line line;
  write_config(line, config);
  return line.str();
}

MixtureConfig config_from_json(const std::string& text) { return parse_config(json::parse(text)); }

void write_store(const DrawStore& store, std::ostream& out) {
  {
    Line h;
    h.open('{');
    h.key("type").text("header");
    h.key("schema_version").value(static_cast<long long>(store.schema_version));
    h.key("kernel").text(to_string(store.config.kernel));
    h.key("n_obs").value(static_cast<std::uint64_t>(store.n_obs));
    h.key("records").value(static_cast<std::uint64_t>(store.records.size()));
    h.key("config");
    write_config(h, store.config);
    h.close('}');
    out << h.str() << '\n';
  }
  for (const auto& rec : store.records) {
    Line l;
    l.open('{');
    l.key("m").value(static_cast<long long>(rec.m));
    l.key("K").value(static_cast<long long>(rec.K));
    l.key("K_plus").value(static_cast<long long>(rec.K_plus));
    l.key("eta").vec(rec.eta.data(), static_cast<Eigen::Index>(rec.eta.size()));
    l.key("theta").open_array();
    for (const auto& t : rec.theta) write_theta(l, t);
    l.close(']');
    l.key("S").open_array();
    for (int s : rec.S) l.value(static_cast<long long>(s + 1));
    l.close(']');
    l.close('}');
    out << l.str() << '\n';
  }
}

DrawStore read_store(std::istream& in) {
  DrawStore store;
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::io, "store: missing header line");
  std::size_t expected = 0;
  try {
    const json h = json::parse(line);
    if (h.value("type", "") != "header") throw Error(ErrorKind::io, "store: first line is not a header");
    store.schema_version = h.at("schema_version").get<int>();
    if (store.schema_version != DrawStore::kSchemaVersion) {
      throw Error(ErrorKind::io, "store: unsupported schema version " + std::to_string(store.schema_version));
    }
    store.n_obs = h.at("n_obs").get<std::size_t>();
    expected = h.at("records").get<std::size_t>();
    store.config = parse_config(h.at("config"));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::io, std::string("store header: ") + e.what());
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      DrawRecord rec;
      rec.m = j.at("m").get<int>();
      rec.K = j.at("K").get<int>();
      rec.K_plus = j.at("K_plus").get<int>();
      rec.eta = j.at("eta").get<std::vector<double>>();
      for (const auto& t : j.at("theta")) rec.theta.push_back(parse_theta(t));
      rec.S = j.at("S").get<std::vector<int>>();
      for (int& s : rec.S) {
        if (s < 1 || s > rec.K) throw Error(ErrorKind::io, "label out of range");
        --s;
      }
      if (rec.S.size() != store.n_obs || rec.eta.size() != static_cast<std::size_t>(rec.K) ||
          rec.theta.size() != static_cast<std::size_t>(rec.K)) {
        throw Error(ErrorKind::io, "record sizes disagree with header or K");
      }
      if (!store.records.empty() && rec.m <= store.records.back().m) {
        throw Error(ErrorKind::io, "iteration indices are not increasing");
      }
      store.records.push_back(std::move(rec));
    } catch (const json::exception& e) {
      throw Error(ErrorKind::io, "store line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(ErrorKind::io, "store line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (store.records.size() != expected) {
    throw Error(ErrorKind::io, "store: header announces " + std::to_string(expected) + " records, found " +
                                   std::to_string(store.records.size()));
  }
  return store;
}

void save_store(const DrawStore& store, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  write_store(store, out);
}

DrawStore load_store(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot read " + path.string());
  return read_store(in);
}

}  // namespace mixclips
