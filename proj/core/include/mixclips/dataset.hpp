#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace mixclips {

enum class KernelKind { gaussian, categorical, markov };

std::string to_string(KernelKind kind);
KernelKind kernel_kind_from_string(const std::string& name);

/// Real-valued observations, one row per observation.
struct GaussianData {
  Eigen::MatrixXd y;  // N x r

  std::size_t size() const noexcept { return static_cast<std::size_t>(y.rows()); }
  int dim() const noexcept { return static_cast<int>(y.cols()); }
};

/// Multivariate categorical observations. Categories are 0-based in memory
/// and 1-based in files.
struct CategoricalData {
  std::vector<int> codes;  // row-major N x r
  std::vector<int> levels; // D_j per column
  std::size_t n = 0;

  CategoricalData() = default;
  CategoricalData(std::vector<std::vector<int>> rows, std::vector<int> levels);

  std::size_t size() const noexcept { return n; }
  int dim() const noexcept { return static_cast<int>(levels.size()); }
  std::span<const int> row(std::size_t i) const {
    return {codes.data() + i * levels.size(), levels.size()};
  }
};

/// L x L matrix of transition counts N_{jl} = #{t : y_{t-1} = j, y_t = l}.
struct TransitionCounts {
  Eigen::MatrixXi counts;

  int total() const { return counts.sum(); }
};

/// Counts transitions of a 0-based state sequence; throws data error when the
/// sequence has fewer than two states or a state is out of range.
TransitionCounts count_transitions(std::span<const int> sequence, int states);

/// Categorical sequences of varying length over states 0..L-1.
struct MarkovData {
  std::vector<std::vector<int>> sequences;
  int states = 0;
  std::vector<TransitionCounts> transitions;  // precomputed per sequence

  MarkovData() = default;
  MarkovData(std::vector<std::vector<int>> sequences, int states);

  std::size_t size() const noexcept { return sequences.size(); }
};

using Dataset = std::variant<GaussianData, CategoricalData, MarkovData>;

KernelKind kind_of(const Dataset& data);
std::size_t size_of(const Dataset& data);

}  // namespace mixclips
