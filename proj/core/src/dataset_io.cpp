#include "mixclips/dataset_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

#include "mixclips/error.hpp"

namespace mixclips {

std::string to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::gaussian: return "gaussian";
    case KernelKind::categorical: return "categorical";
    case KernelKind::markov: return "markov";
  }
  return "gaussian";
}

KernelKind kernel_kind_from_string(const std::string& name) {
  if (name == "gaussian") return KernelKind::gaussian;
  if (name == "categorical" || name == "lca") return KernelKind::categorical;
  if (name == "markov") return KernelKind::markov;
  throw Error(ErrorKind::config, "unknown kernel '" + name + "' (expected gaussian, categorical, markov)");
}

CategoricalData::CategoricalData(std::vector<std::vector<int>> rows, std::vector<int> lv)
    : levels(std::move(lv)), n(rows.size()) {
  codes.reserve(n * levels.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != levels.size()) {
      throw Error(ErrorKind::data, "observation " + std::to_string(i + 1) + " has " +
                                       std::to_string(rows[i].size()) + " variables, expected " +
                                       std::to_string(levels.size()));
    }
    for (std::size_t j = 0; j < levels.size(); ++j) {
      if (rows[i][j] < 0 || rows[i][j] >= levels[j]) {
        throw Error(ErrorKind::data, "observation " + std::to_string(i + 1) + ", variable " + std::to_string(j + 1) +
                                         ": category out of range");
      }
      codes.push_back(rows[i][j]);
    }
  }
}

TransitionCounts count_transitions(std::span<const int> sequence, int states) {
  if (sequence.size() < 2) throw Error(ErrorKind::data, "sequence needs at least two states");
  TransitionCounts tc;
  tc.counts = Eigen::MatrixXi::Zero(states, states);
  for (int s : sequence) {
    if (s < 0 || s >= states) throw Error(ErrorKind::data, "state out of range");
  }
  for (std::size_t t = 1; t < sequence.size(); ++t) ++tc.counts(sequence[t - 1], sequence[t]);
  return tc;
}

MarkovData::MarkovData(std::vector<std::vector<int>> seqs, int l) : sequences(std::move(seqs)), states(l) {
  transitions.reserve(sequences.size());
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    try {
      transitions.push_back(count_transitions(sequences[i], states));
    } catch (const Error& e) {
      throw Error(ErrorKind::data, "sequence " + std::to_string(i + 1) + ": " + e.what());
    }
  }
}

KernelKind kind_of(const Dataset& data) {
  return static_cast<KernelKind>(data.index());
}

std::size_t size_of(const Dataset& data) {
  return std::visit([](const auto& d) { return d.size(); }, data);
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    std::string field = line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : field.substr(b, e - b + 1));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

[[noreturn]] void bad_field(const std::string& source, std::size_t line, std::size_t col, const std::string& what) {
  throw Error(ErrorKind::data,
              source + ":" + std::to_string(line) + ": field " + std::to_string(col) + ": " + what);
}

double parse_real(const std::string& s, const std::string& source, std::size_t line, std::size_t col) {
  if (s.empty()) bad_field(source, line, col, "empty value");
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || !std::isfinite(v)) bad_field(source, line, col, "not a finite number '" + s + "'");
  return v;
}

int parse_code(const std::string& s, const std::string& source, std::size_t line, std::size_t col) {
  int v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) bad_field(source, line, col, "not an integer '" + s + "'");
  if (v < 1) bad_field(source, line, col, "categories are 1-based");
  return v - 1;
}

}  // namespace

Dataset read_dataset(std::istream& in, KernelKind kernel, const CsvOptions& options, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::data, source + ": empty file (missing header)");
  const std::size_t width = split(line).size();
  std::size_t line_no = 1;
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fields = split(line);
    if (kernel == KernelKind::markov) {
      while (!fields.empty() && fields.back().empty()) fields.pop_back();
    } else if (fields.size() != width) {
      throw Error(ErrorKind::data, source + ":" + std::to_string(line_no) + ": expected " + std::to_string(width) +
                                       " fields, found " + std::to_string(fields.size()));
    }
    fields.insert(fields.begin(), std::to_string(line_no));
    rows.push_back(std::move(fields));
  }
  if (rows.empty()) throw Error(ErrorKind::data, source + ": no observations");

  auto ln = [](const std::vector<std::string>& r) { return static_cast<std::size_t>(std::stoul(r[0])); };
  switch (kernel) {
    case KernelKind::gaussian: {
      GaussianData d;
      d.y.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
      for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < width; ++j)
          d.y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
              parse_real(rows[i][j + 1], source, ln(rows[i]), j + 1);
      return d;
    }
    case KernelKind::categorical: {
      std::vector<std::vector<int>> codes(rows.size());
      std::vector<int> levels = options.levels;
      if (!levels.empty() && levels.size() != width) {
        throw Error(ErrorKind::config, "categorical levels list has " + std::to_string(levels.size()) +
                                           " entries but the data has " + std::to_string(width) + " columns");
      }
      const bool infer = levels.empty();
      if (infer) levels.assign(width, 1);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < width; ++j) {
          const int c = parse_code(rows[i][j + 1], source, ln(rows[i]), j + 1);
          if (infer) {
            levels[j] = std::max(levels[j], c + 1);
          } else if (c >= levels[j]) {
            bad_field(source, ln(rows[i]), j + 1, "category exceeds declared level count");
          }
          codes[i].push_back(c);
        }
      }
      return CategoricalData(std::move(codes), std::move(levels));
    }
    case KernelKind::markov: {
      std::vector<std::vector<int>> seqs(rows.size());
      int states = options.states;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 1; j < rows[i].size(); ++j) {
          const int s = parse_code(rows[i][j], source, ln(rows[i]), j);
          if (options.states > 0 && s >= options.states) {
            bad_field(source, ln(rows[i]), j, "state exceeds declared state count");
          }
          if (options.states == 0) states = std::max(states, s + 1);
          seqs[i].push_back(s);
        }
        if (seqs[i].size() < 2) {
          throw Error(ErrorKind::data, source + ":" + std::to_string(ln(rows[i])) +
                                           ": sequence has fewer than two states");
        }
      }
      return MarkovData(std::move(seqs), states);
    }
  }
  throw Error(ErrorKind::config, "unknown kernel");
}

Dataset load_dataset(const std::filesystem::path& path, KernelKind kernel, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::data, "cannot open data file " + path.string());
  return read_dataset(in, kernel, options, path.string());
}

void write_dataset(const Dataset& data, std::ostream& out, const std::vector<std::string>& header) {
  auto head = [&](std::size_t width, const char* stem) {
    for (std::size_t j = 0; j < width; ++j) {
      if (j) out << ',';
      if (j < header.size()) {
        out << header[j];
      } else {
        out << stem << (j + 1);
      }
    }
    out << '\n';
  };
  if (const auto* g = std::get_if<GaussianData>(&data)) {
    head(static_cast<std::size_t>(g->dim()), "y");
    char buf[40];
    for (Eigen::Index i = 0; i < g->y.rows(); ++i) {
      for (Eigen::Index j = 0; j < g->y.cols(); ++j) {
        std::snprintf(buf, sizeof buf, "%.17g", g->y(i, j));
        out << (j ? "," : "") << buf;
      }
      out << '\n';
    }
  } else if (const auto* c = std::get_if<CategoricalData>(&data)) {
    head(c->levels.size(), "x");
    for (std::size_t i = 0; i < c->size(); ++i) {
      const auto row = c->row(i);
      for (std::size_t j = 0; j < row.size(); ++j) out << (j ? "," : "") << row[j] + 1;
      out << '\n';
    }
  } else {
    const auto& m = std::get<MarkovData>(data);
    std::size_t longest = 0;
    for (const auto& s : m.sequences) longest = std::max(longest, s.size());
    head(longest, "t");
    for (const auto& s : m.sequences) {
      for (std::size_t t = 0; t < s.size(); ++t) out << (t ? "," : "") << s[t] + 1;
      out << '\n';
    }
  }
}

void save_dataset(const Dataset& data, const std::filesystem::path& path, const std::vector<std::string>& header) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  write_dataset(data, out, header);
}

void save_labels(const std::vector<int>& labels, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  out << "label\n";
  for (int s : labels) out << s + 1 << '\n';
}

}  // namespace mixclips
