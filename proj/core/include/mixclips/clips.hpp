#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mixclips/kmeans.hpp"
#include "mixclips/sampler.hpp"

namespace mixclips {

/// Which functional of the component parameters is clustered.
struct FunctionalSpec {
  enum class Selector { full_parameter, gaussian_means, markov_persistence, custom };
  Selector selector = Selector::full_parameter;
  std::vector<int> indices;  // 0-based into flatten(theta); custom only

  static FunctionalSpec from_string(const std::string& name);
  std::string name() const;
};

/// Kernel-appropriate default: means for Gaussian, persistence for Markov,
/// the full parameter otherwise.
FunctionalSpec default_functional(KernelKind kernel);

struct ClassificationSequence {
  std::vector<int> rho;  // 0-based group label per component
  bool is_permutation = false;

  /// rho^-1; only meaningful when is_permutation.
  std::vector<int> inverse() const;
};

/// Sorted-and-compare check that `rho` is a permutation of 0..K-1.
bool is_permutation(const std::vector<int>& rho);

struct ClusterSummary {
  int label = 0;  // 0-based identified cluster
  double weight_mean = 0.0;
  double weight_sd = 0.0;
  std::vector<double> param_mean;
  std::vector<double> param_sd;
  int size = 0;   // observations in the modal partition
};

struct Summaries {
  std::vector<std::string> param_names;
  std::vector<ClusterSummary> clusters;
  std::vector<int> modal_partition;  // 0-based, one per observation
};

struct ClipsOptions {
  std::optional<int> kplus;  // override the estimate
  double min_fill_fraction = 0.0;
  FunctionalSpec functional;
  bool clr_transform = false;  // centred log-ratio on simplex-valued functionals
  KMeansOptions kmeans{10, 100};
  std::uint64_t seed = 1;
};

struct ClipsResult {
  int K_hat_plus = 0;
  std::map<int, double> kplus_posterior;
  double nu = 0.0;
  int M_strat = 0;
  int M_nu = 0;
  std::vector<ClassificationSequence> sequences;
  PointSet ppr_points;           // K_hat_plus * M_strat rows, iteration-major
  std::vector<int> ppr_labels;   // k-means group per row
  std::vector<int> ppr_iteration;  // recorded iteration index m per row
  DrawStore identified;
  Summaries summaries;
  std::string functional;
};

// Step 2b(i): K+ posterior and its estimate.
std::map<int, double> kplus_posterior(const DrawStore& store);

/// Mode of the K+ posterior (ties to the smaller k). With min_fill_fraction
/// f > 0, each draw's K+ counts only components holding at least f*N
/// observations before taking the mode.
int estimate_kplus(const std::map<int, double>& posterior, const DrawStore& store, double min_fill_fraction);

/// Keeps records with exactly K_hat filled components, drops empty components
/// from eta and theta without renormalising, and remaps S order-preservingly.
/// Throws empty-stratum error when nothing is retained.
DrawStore stratify(const DrawStore& store, int k_hat);

/// Retention count for every K+ value, used for diagnostics.
std::map<int, int> retention_counts(const DrawStore& store);

/// Row (m, k) = phi(theta_k^(m)), iteration-major.
PointSet extract_functional(const DrawStore& stratified, const FunctionalSpec& spec, bool clr_transform = false);

/// k-means on the PPR points; draws of one iteration may share a group.
std::vector<int> cluster_ppr(const PointSet& points, int k_hat, const KMeansOptions& options, RandomSource& rng);

struct PermutationCheck {
  std::vector<ClassificationSequence> sequences;
  int non_permutations = 0;
  double nu = 0.0;
};

PermutationCheck check_permutations(const std::vector<int>& labels, int k_hat, int m_strat);

/// Drops non-permutation iterations and relabels the rest: eta'_j = eta_{rho^-1(j)},
/// theta'_j = theta_{rho^-1(j)}, S'_i = rho(S_i).
DrawStore relabel(const DrawStore& stratified, const std::vector<ClassificationSequence>& sequences);

/// Posterior mean and sd per identified cluster and the modal partition.
Summaries summarize(const DrawStore& identified);

ClipsResult run_clips(const DrawStore& store, const ClipsOptions& options);

}  // namespace mixclips
