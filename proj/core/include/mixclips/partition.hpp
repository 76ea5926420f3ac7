#pragma once

#include <vector>

#include <Eigen/Core>

namespace mixclips {

/// Rows: labels of `partition`, columns: labels of `reference` (both 0-based).
Eigen::MatrixXi confusion_matrix(const std::vector<int>& partition, const std::vector<int>& reference);

/// Maximum-trace one-to-one matching of rows to columns. Returns, per row,
/// the matched column or -1 when the row is left unmatched.
std::vector<int> best_matching(const Eigen::MatrixXi& confusion);

/// Exhaustive search over injective maps; used for small label sets.
std::vector<int> best_matching_exhaustive(const Eigen::MatrixXi& confusion);

/// Hungarian assignment on the (padded) negated confusion matrix.
std::vector<int> best_matching_hungarian(const Eigen::MatrixXi& confusion);

struct PartitionAgreement {
  double accuracy = 0.0;
  double adjusted_rand_index = 0.0;
  Eigen::MatrixXi confusion;
  std::vector<int> matching;  // row label -> reference label
};

/// Accuracy after best label matching (exhaustive up to 8 labels, Hungarian
/// beyond) and the Hubert-Arabie adjusted Rand index.
PartitionAgreement compare_partition(const std::vector<int>& partition, const std::vector<int>& reference);

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);

}  // namespace mixclips
