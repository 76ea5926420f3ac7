#include "mixclips/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "mixclips/error.hpp"
#include "mixclips/partition.hpp"

namespace mixclips {

namespace {

std::string fmt(const char* f, double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

std::string pad(const std::string& s, std::size_t w) {
  return s.size() >= w ? s + " " : s + std::string(w - s.size(), ' ');
}

// "pi[2,3]" -> (2, 3); 1-based as printed
std::pair<int, int> index_pair(const std::string& name) {
  const auto open = name.find('[');
  const auto comma = name.find(',', open);
  return {std::stoi(name.substr(open + 1, comma - open - 1)), std::stoi(name.substr(comma + 1))};
}

void categorical_table(std::ostringstream& out, const nlohmann::json& j) {
  const auto names = j.at("param_names").get<std::vector<std::string>>();
  out << "Occurrence probabilities (posterior means)\n";
  std::string head = pad("", 10), sub = pad("cluster", 10);
  int last_var = 0;
  for (const auto& n : names) {
    const auto [var, level] = index_pair(n);
    head += pad(var != last_var ? "var " + std::to_string(var) : "", 7);
    sub += pad(std::to_string(level), 7);
    last_var = var;
  }
  out << head << '\n' << sub << '\n';
  for (const auto& c : j.at("clusters")) {
    std::string row = pad("k=" + std::to_string(c.at("label").get<int>()), 10);
    for (double v : c.at("param_mean").get<std::vector<double>>()) row += pad(fmt("%.2f", v), 7);
    out << row << '\n';
  }
}

void markov_grids(std::ostringstream& out, const nlohmann::json& j) {
  const auto p = j.at("param_names").size();
  const int l = static_cast<int>(std::lround(std::sqrt(static_cast<double>(p))));
  out << "Transition matrices (posterior means; rows: from, columns: to)\n";
  for (const auto& c : j.at("clusters")) {
    const auto mean = c.at("param_mean").get<std::vector<double>>();
    out << "cluster " << c.at("label").get<int>() << '\n';
    for (int a = 0; a < l; ++a) {
      std::string row = "  ";
      for (int b = 0; b < l; ++b) row += pad(fmt("%.3f", mean[static_cast<std::size_t>(a * l + b)]), 7);
      out << row << '\n';
    }
  }
}

void parameter_table(std::ostringstream& out, const nlohmann::json& j) {
  const auto names = j.at("param_names").get<std::vector<std::string>>();
  out << "Component parameters, posterior mean (sd)\n";
  std::string head = pad("parameter", 14);
  for (const auto& c : j.at("clusters")) head += pad("cluster " + std::to_string(c.at("label").get<int>()), 22);
  out << head << '\n';
  for (std::size_t q = 0; q < names.size(); ++q) {
    std::string row = pad(names[q], 14);
    for (const auto& c : j.at("clusters")) {
      row += pad(fmt("%.3f", c.at("param_mean")[q].get<double>()) + " (" +
                     fmt("%.3f", c.at("param_sd")[q].get<double>()) + ")",
                 22);
    }
    out << row << '\n';
  }
}

}  // namespace

std::string render_report(const std::filesystem::path& clips_json, const std::optional<std::vector<int>>& reference) {
  std::ifstream in(clips_json);
  if (!in) throw Error(ErrorKind::data, "cannot open clips result " + clips_json.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::data, clips_json.string() + ": " + e.what());
  }

  std::ostringstream out;
  try {
    const std::string kernel = j.at("kernel").get<std::string>();
    out << "CliPS report\n";
    out << "kernel: " << kernel << ", functional: " << j.at("functional").get<std::string>()
        << ", observations: " << j.at("n_obs").get<std::size_t>() << "\n\n";

    out << "Posterior of K+\n  k     frequency\n";
    for (const auto& e : j.at("kplus_posterior")) {
      out << "  " << pad(std::to_string(e.at("k").get<int>()), 6) << fmt("%.4f", e.at("frequency").get<double>())
          << '\n';
    }
    out << "\nK_hat_plus = " << j.at("K_hat_plus").get<int>() << '\n';
    out << "retained draws = " << j.at("M_strat").get<int>() << ", non-permutations = " << j.at("M_nu").get<int>()
        << ", nu = " << fmt("%.4f", j.at("nu").get<double>())
        << ", identified draws = " << j.at("M_identified").get<int>() << "\n\n";

    if (j.at("clusters").empty()) {
      out << "No identified draws: cluster summaries unavailable.\n";
      return out.str();
    }

    out << "Cluster weights\n  cluster  weight mean (sd)     size\n";
    for (const auto& c : j.at("clusters")) {
      out << "  " << pad(std::to_string(c.at("label").get<int>()), 9)
          << pad(fmt("%.3f", c.at("weight_mean").get<double>()) + " (" + fmt("%.3f", c.at("weight_sd").get<double>()) +
                     ")",
                 21)
          << c.at("size").get<int>() << '\n';
    }
    out << '\n';
    if (kernel == "categorical") {
      categorical_table(out, j);
    } else if (kernel == "markov") {
      markov_grids(out, j);
    } else {
      parameter_table(out, j);
    }

    if (reference) {
      auto modal = j.at("modal_partition").get<std::vector<int>>();
      for (int& s : modal) --s;
      if (modal.size() != reference->size()) {
        throw Error(ErrorKind::data, "reference labels (" + std::to_string(reference->size()) +
                                         ") and modal partition (" + std::to_string(modal.size()) +
                                         ") differ in length");
      }
      const PartitionAgreement agree = compare_partition(modal, *reference);
      out << "\nConfusion matrix (rows: clusters, columns: reference classes)\n";
      std::string head = pad("", 10);
      for (Eigen::Index c = 0; c < agree.confusion.cols(); ++c) head += pad("class " + std::to_string(c + 1), 9);
      out << head << '\n';
      for (Eigen::Index r = 0; r < agree.confusion.rows(); ++r) {
        std::string row = pad("k=" + std::to_string(r + 1), 10);
        for (Eigen::Index c = 0; c < agree.confusion.cols(); ++c) row += pad(std::to_string(agree.confusion(r, c)), 9);
        out << row << '\n';
      }
      out << "accuracy = " << fmt("%.3f", agree.accuracy) << ", adjusted Rand index = "
          << fmt("%.3f", agree.adjusted_rand_index) << '\n';
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::data, clips_json.string() + ": malformed clips result: " + e.what());
  }
  return out.str();
}

}  // namespace mixclips
