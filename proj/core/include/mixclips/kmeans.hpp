#pragma once

#include <vector>

#include <Eigen/Core>

#include "mixclips/distributions.hpp"

namespace mixclips {

/// n x d matrix of finite points, one per row.
using PointSet = Eigen::MatrixXd;

struct KMeansResult {
  Eigen::MatrixXd centers;  // K x d
  std::vector<int> labels;  // 0-based, one per point
  double inertia = 0.0;     // within-cluster sum of squares
  int iterations = 0;
  std::vector<double> inertia_trace;  // per Lloyd iteration of the selected run
};

struct KMeansOptions {
  int restarts = 10;
  int max_iter = 100;
};

/// Lloyd iterations from k-means++ seeding, best of `restarts` by inertia.
/// Empty clusters are reseeded at the point farthest from its current center.
/// Points are processed in a canonical (lexicographic) order, so the result
/// does not depend on the input row order. Throws invalid-parameter when
/// n < K or points are not finite.
KMeansResult kmeans_fit(const PointSet& points, int k, const KMeansOptions& options, RandomSource& rng);

/// Nearest center by Euclidean distance; ties go to the lowest center index.
std::vector<int> assign(const PointSet& points, const Eigen::MatrixXd& centers);

/// Within-cluster sum of squares of `labels` around `centers`.
double within_cluster_ss(const PointSet& points, const Eigen::MatrixXd& centers, const std::vector<int>& labels);

}  // namespace mixclips
