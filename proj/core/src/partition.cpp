#include "mixclips/partition.hpp"

#include <algorithm>
#include <limits>

#include "mixclips/error.hpp"

namespace mixclips {

Eigen::MatrixXi confusion_matrix(const std::vector<int>& partition, const std::vector<int>& reference) {
  if (partition.size() != reference.size()) {
    throw Error(ErrorKind::data, "partition and reference differ in length");
  }
  int rows = 0, cols = 0;
  for (std::size_t i = 0; i < partition.size(); ++i) {
    if (partition[i] < 0 || reference[i] < 0) throw Error(ErrorKind::data, "negative label");
    rows = std::max(rows, partition[i] + 1);
    cols = std::max(cols, reference[i] + 1);
  }
  Eigen::MatrixXi c = Eigen::MatrixXi::Zero(rows, cols);
  for (std::size_t i = 0; i < partition.size(); ++i) ++c(partition[i], reference[i]);
  return c;
}

namespace {

void search(const Eigen::MatrixXi& c, Eigen::Index row, std::vector<bool>& used, std::vector<int>& current,
            long long score, long long& best, std::vector<int>& best_map) {
  if (row == c.rows()) {
    if (score > best) {
      best = score;
      best_map = current;
    }
    return;
  }
  for (Eigen::Index col = 0; col < c.cols(); ++col) {
    if (used[col]) continue;
    used[col] = true;
    current[row] = static_cast<int>(col);
    search(c, row + 1, used, current, score + c(row, col), best, best_map);
    used[col] = false;
  }
  // leave unmatched only if there are more rows than columns left over
  if (c.rows() - row > c.cols() - std::count(used.begin(), used.end(), true)) {
    current[row] = -1;
    search(c, row + 1, used, current, score, best, best_map);
  }
}

}  // namespace

std::vector<int> best_matching_exhaustive(const Eigen::MatrixXi& confusion) {
  std::vector<bool> used(static_cast<std::size_t>(confusion.cols()), false);
  std::vector<int> current(static_cast<std::size_t>(confusion.rows()), -1);
  std::vector<int> best_map = current;
  long long best = -1;
  search(confusion, 0, used, current, 0, best, best_map);
  return best_map;
}

std::vector<int> best_matching_hungarian(const Eigen::MatrixXi& confusion) {
  const int rows = static_cast<int>(confusion.rows());
  const int cols = static_cast<int>(confusion.cols());
  const int n = std::max(rows, cols);
  if (n == 0) return {};
  const long long top = confusion.size() > 0 ? confusion.maxCoeff() : 0;
  auto cost = [&](int i, int j) -> long long {
    return (i < rows && j < cols) ? top - confusion(i, j) : top;
  };
  // potentials formulation, 1-based with a sentinel column 0
  const long long inf = std::numeric_limits<long long>::max() / 4;
  std::vector<long long> u(n + 1, 0), v(n + 1, 0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<long long> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const int i0 = p[j0];
      long long delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const long long cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> match(static_cast<std::size_t>(rows), -1);
  for (int j = 1; j <= n; ++j) {
    const int i = p[j] - 1;
    if (i >= 0 && i < rows && j - 1 < cols) match[i] = j - 1;
  }
  return match;
}

std::vector<int> best_matching(const Eigen::MatrixXi& confusion) {
  if (confusion.rows() <= 8 && confusion.cols() <= 8) return best_matching_exhaustive(confusion);
  return best_matching_hungarian(confusion);
}

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
  const Eigen::MatrixXi c = confusion_matrix(a, b);
  auto pairs = [](double x) { return x * (x - 1.0) / 2.0; };
  double index = 0.0, sum_a = 0.0, sum_b = 0.0;
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    for (Eigen::Index j = 0; j < c.cols(); ++j) index += pairs(c(i, j));
  }
  for (Eigen::Index i = 0; i < c.rows(); ++i) sum_a += pairs(c.row(i).sum());
  for (Eigen::Index j = 0; j < c.cols(); ++j) sum_b += pairs(c.col(j).sum());
  const double total = pairs(static_cast<double>(a.size()));
  if (total == 0.0) return 1.0;
  const double expected = sum_a * sum_b / total;
  const double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

PartitionAgreement compare_partition(const std::vector<int>& partition, const std::vector<int>& reference) {
  PartitionAgreement out;
  out.confusion = confusion_matrix(partition, reference);
  out.matching = best_matching(out.confusion);
  long long hit = 0;
  for (std::size_t i = 0; i < out.matching.size(); ++i) {
    if (out.matching[i] >= 0) hit += out.confusion(static_cast<Eigen::Index>(i), out.matching[i]);
  }
  out.accuracy = partition.empty() ? 0.0 : static_cast<double>(hit) / static_cast<double>(partition.size());
  out.adjusted_rand_index = adjusted_rand_index(partition, reference);
  return out;
}

}  // namespace mixclips
