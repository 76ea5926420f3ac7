#pragma once

#include <cstdint>
#include <random>
#include <span>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "mixclips/error.hpp"

namespace mixclips {

/// Seeded generator owned by exactly one chain or thread. Equal seeds and
/// equal call sequences give bit-identical draws on the same build.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  std::uint64_t next_u64() { return engine_(); }

  /// Deterministic child seed, used to give restarts and chains their own stream.
  std::uint64_t derive_seed(std::uint64_t stream) const noexcept;

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Symmetric positive-definite matrix. Construction validates symmetry
/// (absolute tolerance 1e-10) and positive definiteness via Cholesky.
class SpdMatrix {
 public:
  SpdMatrix() = default;
  explicit SpdMatrix(const Eigen::MatrixXd& m);

  static SpdMatrix identity(int dim);
  static SpdMatrix diagonal(const Eigen::VectorXd& d);

  const Eigen::MatrixXd& matrix() const noexcept { return m_; }
  int dim() const noexcept { return static_cast<int>(m_.rows()); }
  double operator()(int i, int j) const { return m_(i, j); }

  Eigen::MatrixXd lower_cholesky() const;
  Eigen::MatrixXd inverse() const;
  double log_determinant() const;

  friend bool operator==(const SpdMatrix& a, const SpdMatrix& b) { return a.m_ == b.m_; }

 private:
  Eigen::MatrixXd m_;
};

// Matrix-variate conventions follow the mean statements of the model:
//   Wishart W(alpha, A)          has mean alpha * A^-1,
//   inverse Wishart W^-1(alpha, A) has mean A / (alpha - (r+1)/2).
// In textbook terms W(alpha, A) is Wishart(df = 2 alpha, scale = (2A)^-1) and
// W^-1(alpha, A) is inverse-Wishart(df = 2 alpha, scale = 2A); if
// X ~ W^-1(alpha, A) then X^-1 ~ W(alpha, A).

/// Gamma(shape, rate), mean shape/rate. Shape 0 is the point mass at 0.
double draw_gamma(double shape, double rate, RandomSource& rng);

/// log of a Gamma(shape, 1) variate; -inf for shape 0. Stable for tiny shapes.
double draw_log_gamma(double shape, RandomSource& rng);

/// Dirichlet via normalised independent gammas; zero entries of alpha give
/// exactly zero probabilities.
Eigen::VectorXd draw_dirichlet(std::span<const double> alpha, RandomSource& rng);
Eigen::VectorXd draw_dirichlet(const Eigen::VectorXd& alpha, RandomSource& rng);

/// Index in [0, K) with probability proportional to weights (unnormalised).
int draw_categorical(std::span<const double> weights, RandomSource& rng);

/// Same, from log-weights; max-subtracted before exponentiation. Throws
/// numerical error when every entry is -inf.
int draw_categorical_log(std::span<const double> log_weights, RandomSource& rng);

Eigen::VectorXd draw_mvn(const Eigen::VectorXd& mean, const SpdMatrix& cov, RandomSource& rng);

/// Wishart under the alpha * A^-1 mean convention; requires alpha > (r-1)/2.
SpdMatrix draw_wishart(double alpha, const SpdMatrix& scale, RandomSource& rng);

/// Inverse Wishart under the A / (alpha - (r+1)/2) mean convention;
/// requires alpha > (r-1)/2.
SpdMatrix draw_inv_wishart(double alpha, const SpdMatrix& scale, RandomSource& rng);

/// Beta-negative-binomial log pmf; mean a*c/(b-1) for b > 1.
double bnb_log_pmf(long long k, double a, double b, double c);

}  // namespace mixclips
