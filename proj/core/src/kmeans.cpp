#include "mixclips/kmeans.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

namespace mixclips {

namespace {

double sq_dist(const PointSet& p, Eigen::Index i, const Eigen::MatrixXd& c, Eigen::Index k) {
  return (p.row(i) - c.row(k)).squaredNorm();
}

Eigen::MatrixXd seed_plus_plus(const PointSet& p, int k, RandomSource& rng) {
  const Eigen::Index n = p.rows();
  Eigen::MatrixXd centers(k, p.cols());
  const auto first = static_cast<Eigen::Index>(rng.uniform() * static_cast<double>(n));
  centers.row(0) = p.row(std::min(first, n - 1));
  std::vector<double> d2(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) d2[i] = sq_dist(p, i, centers, 0);
  for (int c = 1; c < k; ++c) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    Eigen::Index pick;
    if (total > 0.0) {
      pick = draw_categorical(d2, rng);
    } else {
      pick = std::min(static_cast<Eigen::Index>(rng.uniform() * static_cast<double>(n)), n - 1);
    }
    centers.row(c) = p.row(pick);
    for (Eigen::Index i = 0; i < n; ++i) d2[i] = std::min(d2[i], sq_dist(p, i, centers, c));
  }
  return centers;
}

struct Run {
  Eigen::MatrixXd centers;
  std::vector<int> labels;
  double inertia = 0.0;
  int iterations = 0;
  std::vector<double> trace;
};

Run lloyd(const PointSet& p, int k, int max_iter, RandomSource& rng) {
  Run run;
  run.centers = seed_plus_plus(p, k, rng);
  run.labels = assign(p, run.centers);
  const Eigen::Index n = p.rows();
  for (int it = 0; it < max_iter; ++it) {
    run.iterations = it + 1;
    // Update step.
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, p.cols());
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(run.labels[i]) += p.row(i);
      ++counts[run.labels[i]];
    }
    std::vector<double> own(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) own[i] = sq_dist(p, i, run.centers, run.labels[i]);
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        run.centers.row(c) = sums.row(c) / counts[c];
        continue;
      }
      // Empty cluster: move it onto the point farthest from its center.
      const auto far = static_cast<Eigen::Index>(std::max_element(own.begin(), own.end()) - own.begin());
      run.centers.row(c) = p.row(far);
      own[far] = 0.0;
    }
    std::vector<int> next = assign(p, run.centers);
    const bool changed = next != run.labels;
    run.labels = std::move(next);
    run.trace.push_back(within_cluster_ss(p, run.centers, run.labels));
    if (!changed) break;
  }
  // Final centers are the means of the final partition.
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, p.cols());
  std::vector<int> counts(static_cast<std::size_t>(k), 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    sums.row(run.labels[i]) += p.row(i);
    ++counts[run.labels[i]];
  }
  for (int c = 0; c < k; ++c)
    if (counts[c] > 0) run.centers.row(c) = sums.row(c) / counts[c];
  run.inertia = within_cluster_ss(p, run.centers, run.labels);
  return run;
}

}  // namespace

std::vector<int> assign(const PointSet& points, const Eigen::MatrixXd& centers) {
  if (points.cols() != centers.cols()) throw Error(ErrorKind::invalid_parameter, "assign: dimension mismatch");
  std::vector<int> labels(static_cast<std::size_t>(points.rows()));
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < centers.rows(); ++c) {
      const double d = sq_dist(points, i, centers, c);
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(c);
      }
    }
    labels[i] = best;
  }
  return labels;
}

double within_cluster_ss(const PointSet& points, const Eigen::MatrixXd& centers, const std::vector<int>& labels) {
  double ss = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) ss += sq_dist(points, i, centers, labels[i]);
  return ss;
}

KMeansResult kmeans_fit(const PointSet& points, int k, const KMeansOptions& options, RandomSource& rng) {
  const Eigen::Index n = points.rows();
  if (k < 1) throw Error(ErrorKind::invalid_parameter, "kmeans: K must be positive");
  if (n < k) {
    throw Error(ErrorKind::invalid_parameter,
                "kmeans: need at least K points (n=" + std::to_string(n) + ", K=" + std::to_string(k) + ")");
  }
  if (!points.allFinite()) throw Error(ErrorKind::invalid_parameter, "kmeans: non-finite coordinates");
  if (options.restarts < 1 || options.max_iter < 1) {
    throw Error(ErrorKind::invalid_parameter, "kmeans: restarts and max_iter must be positive");
  }

  // Canonical order: lexicographic on coordinates.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index j = 0; j < points.cols(); ++j) {
      if (points(a, j) != points(b, j)) return points(a, j) < points(b, j);
    }
    return false;
  });
  PointSet sorted(n, points.cols());
  for (Eigen::Index i = 0; i < n; ++i) sorted.row(i) = points.row(order[i]);

  const std::uint64_t base = rng.next_u64();
  RandomSource parent(base);
  Run best;
  bool have_best = false;
  for (int r = 0; r < options.restarts; ++r) {
    RandomSource sub(parent.derive_seed(static_cast<std::uint64_t>(r)));
    Run run = lloyd(sorted, k, options.max_iter, sub);
    if (!have_best || run.inertia < best.inertia) {
      best = std::move(run);
      have_best = true;
    }
  }

  KMeansResult result;
  result.centers = best.centers;
  result.inertia = best.inertia;
  result.iterations = best.iterations;
  result.inertia_trace = best.trace;
  result.labels.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) result.labels[order[i]] = best.labels[i];
  return result;
}

}  // namespace mixclips
