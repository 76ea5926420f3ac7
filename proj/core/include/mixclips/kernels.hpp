#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "mixclips/dataset.hpp"
#include "mixclips/distributions.hpp"

namespace mixclips {

// ---------------------------------------------------------------------------
// Component parameters and hyperparameters
// ---------------------------------------------------------------------------

struct GaussianComponent {
  Eigen::VectorXd mu;
  SpdMatrix sigma;
};

/// Occurrence probabilities, one simplex per categorical variable.
struct CategoricalComponent {
  std::vector<Eigen::VectorXd> pi;
};

/// Row-stochastic transition matrix.
struct MarkovComponent {
  Eigen::MatrixXd xi;
};

using ComponentParams = std::variant<GaussianComponent, CategoricalComponent, MarkovComponent>;

/// mu_k ~ N(b0, B0), Sigma_k ~ W^-1(c0, C0), C0 ~ W(g0, G0).
struct GaussianHyper {
  Eigen::VectorXd b0;
  SpdMatrix B0;
  double c0 = 0.0;
  SpdMatrix C0;
  double g0 = 0.0;
  SpdMatrix G0;
};

enum class B0Scale { range_squared, range };

/// Data-driven defaults: b0 = column medians, B0 = diag(R_j^2) (or diag(R_j)),
/// c0 = 2.5 + (r-1)/2, g0 = 0.5 + (r-1)/2, G0 = 100 g0/c0 diag(1/R_j^2),
/// C0 started at its prior mean g0 G0^-1.
GaussianHyper gaussian_hyper_from_data(const GaussianData& data, B0Scale scale = B0Scale::range_squared);

struct CategoricalHyper {
  std::vector<int> levels;
  double prior = 1.0;  // symmetric Dirichlet parameter for every pi_{k,j}
};

/// Row j of xi_k ~ D_L(delta.row(j)).
struct MarkovHyper {
  Eigen::MatrixXd delta;
  int states() const { return static_cast<int>(delta.rows()); }
};

/// delta with `persistence` on the diagonal and `off_diagonal` elsewhere.
MarkovHyper markov_hyper(int states, double persistence = 0.0, double off_diagonal = 1.0);

// ---------------------------------------------------------------------------
// Free-function kernel surface
// ---------------------------------------------------------------------------

double kernel_loglik(std::span<const double> y, const GaussianComponent& theta);
/// Categories 0-based; out-of-range categories throw a data error.
double kernel_loglik(std::span<const int> y, const CategoricalComponent& theta);
/// Sum of N_jl log xi_jl with 0 log 0 := 0.
double kernel_loglik(const TransitionCounts& counts, const MarkovComponent& theta);

// ---------------------------------------------------------------------------
// Kernel policy types used by the sampler templates
// ---------------------------------------------------------------------------

struct GaussianKernel {
  using Data = GaussianData;
  using Component = GaussianComponent;
  using Hyper = GaussianHyper;
  static constexpr KernelKind kind = KernelKind::gaussian;

  struct Prepared {
    Eigen::VectorXd mu;
    Eigen::MatrixXd chol;  // lower Cholesky factor of Sigma
    double log_norm = 0.0; // -0.5 (r log 2pi + log|Sigma|)
  };

  static Prepared prepare(const Component& theta);
  static double loglik(const Prepared& p, const Data& data, std::size_t i);

  /// Blocked draw: mu | Sigma, data then Sigma | mu, data.
  static Component draw_posterior(const Data& data, std::span<const std::size_t> members,
                                  const Component& current, const Hyper& hyper, RandomSource& rng);
  static Component draw_prior(const Hyper& hyper, RandomSource& rng);
  /// C0 | Sigma_1..Sigma_K+ ~ W(g0 + K+ c0, G0 + sum Sigma_k^-1).
  static Hyper update_shared_hyper(std::span<const Component> filled, const Hyper& hyper, RandomSource& rng);

  /// Group mean and covariance, regularised by 1e-6 diag(data variance).
  static Component initial_estimate(const Data& data, std::span<const std::size_t> members, const Hyper& hyper);
  static Eigen::MatrixXd embed(const Data& data);
};

struct CategoricalKernel {
  using Data = CategoricalData;
  using Component = CategoricalComponent;
  using Hyper = CategoricalHyper;
  static constexpr KernelKind kind = KernelKind::categorical;

  struct Prepared {
    std::vector<Eigen::VectorXd> log_pi;
  };

  static Prepared prepare(const Component& theta);
  static double loglik(const Prepared& p, const Data& data, std::size_t i);
  static Component draw_posterior(const Data& data, std::span<const std::size_t> members,
                                  const Component& current, const Hyper& hyper, RandomSource& rng);
  static Component draw_prior(const Hyper& hyper, RandomSource& rng);
  static Hyper update_shared_hyper(std::span<const Component> filled, const Hyper& hyper, RandomSource& rng);
  /// Category frequencies with add-one smoothing.
  static Component initial_estimate(const Data& data, std::span<const std::size_t> members, const Hyper& hyper);
  /// One-hot encoding of every variable.
  static Eigen::MatrixXd embed(const Data& data);
};

struct MarkovKernel {
  using Data = MarkovData;
  using Component = MarkovComponent;
  using Hyper = MarkovHyper;
  static constexpr KernelKind kind = KernelKind::markov;

  struct Prepared {
    Eigen::MatrixXd log_xi;  // -inf where xi is exactly 0
  };

  static Prepared prepare(const Component& theta);
  static double loglik(const Prepared& p, const Data& data, std::size_t i);
  static Component draw_posterior(const Data& data, std::span<const std::size_t> members,
                                  const Component& current, const Hyper& hyper, RandomSource& rng);
  static Component draw_prior(const Hyper& hyper, RandomSource& rng);
  static Hyper update_shared_hyper(std::span<const Component> filled, const Hyper& hyper, RandomSource& rng);
  /// Row-normalised (delta + pooled transition counts).
  static Component initial_estimate(const Data& data, std::span<const std::size_t> members, const Hyper& hyper);
  /// Empirical transition frequencies, rows flattened.
  static Eigen::MatrixXd embed(const Data& data);
};

// ---------------------------------------------------------------------------
// Flattened views used by post-processing
// ---------------------------------------------------------------------------

KernelKind kind_of(const ComponentParams& theta);

/// Gaussian: mu then the upper triangle of Sigma row by row (r + r(r+1)/2).
/// Categorical: all pi rows concatenated. Markov: xi row-major.
std::vector<double> flatten(const ComponentParams& theta);
std::vector<std::string> parameter_names(const ComponentParams& theta);

}  // namespace mixclips
