#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mixclips/dataset.hpp"
#include "mixclips/distributions.hpp"
#include "mixclips/kernels.hpp"

namespace mixclips {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

enum class KMode {
  fixed,         // K fixed, standard Gibbs with data augmentation
  bnb,           // K - 1 ~ BNB(a, b, c), telescoping sampler
  fixed_sparse,  // overfitting K with a small static Dirichlet parameter
};

std::string to_string(KMode mode);
KMode k_mode_from_string(const std::string& name);

struct PriorOnK {
  KMode mode = KMode::fixed;
  int k = 4;  // K for fixed and fixed_sparse
  double a = 1.0, b = 4.0, c = 3.0;

  /// log p(K); point mass at `k` unless mode is bnb.
  double log_pmf(int big_k) const;
};

/// gamma_K = value (static) or value / K (dynamic).
struct GammaRule {
  bool dynamic = false;
  double value = 1.0;

  double gamma_k(int big_k) const { return dynamic ? value / big_k : value; }
};

enum class InitKind { kmeans, random };

struct KernelSettings {
  B0Scale b0_scale = B0Scale::range_squared;
  double categorical_prior = 1.0;
  double markov_persistence_prior = 0.0;
  double markov_off_diagonal_prior = 1.0;
};

struct MixtureConfig {
  KernelKind kernel = KernelKind::gaussian;
  PriorOnK k_prior;
  GammaRule gamma;
  KernelSettings hyper;
  int burnin = 1000;   // M0
  int draws = 1000;    // M
  int thin = 1;        // C
  std::uint64_t seed = 1;
  InitKind init = InitKind::kmeans;
  int init_k = 0;      // 0 means: use k_prior.k
  int init_restarts = 10;

  /// Throws config error on violated invariants.
  void validate() const;
  int initial_components() const { return init_k > 0 ? init_k : k_prior.k; }
};

// ---------------------------------------------------------------------------
// Chain state and draws
// ---------------------------------------------------------------------------

template <class Kernel>
struct ChainState {
  int K = 0;
  Eigen::VectorXd eta;
  std::vector<typename Kernel::Component> theta;
  typename Kernel::Hyper zeta;
  std::vector<int> S;   // 0-based allocations
  std::vector<int> Nk;  // occupancy, size K
  bool random_init_fallback = false;

  int k_plus() const;
  void recount();
};

/// One recorded iteration. `S` is 0-based in memory, 1-based on disk.
struct DrawRecord {
  int m = 0;
  int K = 0;
  int K_plus = 0;
  std::vector<double> eta;
  std::vector<ComponentParams> theta;
  std::vector<int> S;

  std::vector<int> occupancy() const;
};

struct DrawStore {
  static constexpr int kSchemaVersion = 1;
  int schema_version = kSchemaVersion;
  MixtureConfig config;
  std::size_t n_obs = 0;
  std::vector<DrawRecord> records;
};

// ---------------------------------------------------------------------------
// Chain operations
// ---------------------------------------------------------------------------

/// Hyperparameters for `Kernel` built from the data and settings.
template <class Kernel>
typename Kernel::Hyper make_hyper(const typename Kernel::Data& data, const KernelSettings& settings);
template <>
GaussianHyper make_hyper<GaussianKernel>(const GaussianData& data, const KernelSettings& settings);
template <>
CategoricalHyper make_hyper<CategoricalKernel>(const CategoricalData& data, const KernelSettings& settings);
template <>
MarkovHyper make_hyper<MarkovKernel>(const MarkovData& data, const KernelSettings& settings);

/// k-means (or random) allocation into the initial K groups, group-wise
/// empirical parameters and equal weights.
template <class Kernel>
ChainState<Kernel> init_chain(const typename Kernel::Data& data, const MixtureConfig& config, RandomSource& rng);

/// Draws every S_i from P(S_i = k) proportional to eta_k f(y_i | theta_k).
template <class Kernel>
void step_classify(ChainState<Kernel>& state, const typename Kernel::Data& data, RandomSource& rng);

/// eta ~ D(gamma_K + N_1, ..., gamma_K + N_K), empty components included.
template <class Kernel>
void step_weights(ChainState<Kernel>& state, double gamma_k, RandomSource& rng);

/// Filled components from their conditional posteriors, then shared
/// hyperparameters from the filled components. With `redraw_empty`, empty
/// components are refreshed from the prior after the hyperparameter update.
template <class Kernel>
void step_components(ChainState<Kernel>& state, const typename Kernel::Data& data, bool redraw_empty,
                     RandomSource& rng);

/// Unnormalised log p(K | N_1..N_K+, gamma) for one K >= K+, using the
/// Dirichlet-multinomial partition probability.
double log_k_conditional(int big_k, std::span<const int> filled_counts, const PriorOnK& prior,
                         const GammaRule& rule);

/// Normalised posterior over K = K+, K+ + 1, ..., truncated once the remaining
/// tail mass falls below `tail_tolerance`. Element 0 corresponds to K+.
std::vector<double> k_conditional(std::span<const int> filled_counts, const PriorOnK& prior, const GammaRule& rule,
                                  double tail_tolerance = 1e-10);

/// Telescoping step: K drawn from `k_conditional`.
int step_sample_K(std::span<const int> filled_counts, const PriorOnK& prior, const GammaRule& rule,
                  RandomSource& rng);

/// Compacts filled components (order preserved) to the front and appends
/// new_K - K+ prior-drawn empty components.
template <class Kernel>
void step_add_empty(ChainState<Kernel>& state, int new_k, RandomSource& rng);

/// Full chain: M0 + C*M sweeps, recording every C-th post-burn-in state.
template <class Kernel>
DrawStore run_chain(const typename Kernel::Data& data, const MixtureConfig& config, RandomSource& rng);

/// Dispatches on the dataset alternative; config.kernel must agree.
DrawStore run_chain(const Dataset& data, const MixtureConfig& config);

template <class Kernel>
DrawRecord make_record(const ChainState<Kernel>& state, int m);

}  // namespace mixclips
