#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mixclips/dataset.hpp"
#include "mixclips/kernels.hpp"

namespace mixclips {

/// Built-in generators:
///   example1  Gaussian, K=4, r=6, Sigma_k = 0.6 I
///   figure1   univariate 0.3 N(-3,1) + 0.5 N(0,0.5) + 0.2 N(2,0.8)
///   lca       latent classes from a probability table (default: fear-style rows)
///   markov    Markov-chain sequences from transition matrices
struct GeneratorSpec {
  std::string name = "example1";
  int n = 1000;
  std::uint64_t seed = 1;
  std::vector<double> weights;  // empty: generator default (equal unless stated)

  // lca: table[k][j] is the occurrence-probability vector of variable j in class k
  std::vector<std::vector<Eigen::VectorXd>> lca_table;
  // markov
  std::vector<Eigen::MatrixXd> transitions;
  int sequence_length = 30;
};

struct Simulated {
  Dataset data;
  std::vector<int> labels;  // 0-based generating component
  std::vector<double> weights;
  std::vector<ComponentParams> components;
  std::vector<std::string> header;
};

Simulated simulate(const GeneratorSpec& spec);

/// Defaults used by the desk studies.
Eigen::MatrixXd example1_means();  // r x K, one column per component
std::vector<std::vector<Eigen::VectorXd>> fear_table();
std::vector<Eigen::MatrixXd> persistence_transitions(const std::vector<double>& diagonals, int states);

/// Truth file: generator, weights, components and 1-based labels.
void save_truth(const Simulated& sim, const GeneratorSpec& spec, const std::filesystem::path& path);

/// Reads 1-based labels from a truth JSON file (key "labels"); 0-based result.
std::vector<int> load_truth_labels(const std::filesystem::path& path);

}  // namespace mixclips
