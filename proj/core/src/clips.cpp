#include "mixclips/clips.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace mixclips {

namespace {

int count_filled(const DrawRecord& rec) {
  const auto nk = rec.occupancy();
  return static_cast<int>(std::count_if(nk.begin(), nk.end(), [](int n) { return n > 0; }));
}

std::vector<double> centred_log_ratio(const std::vector<double>& block) {
  std::vector<double> out(block.size());
  double mean_log = 0.0;
  for (std::size_t i = 0; i < block.size(); ++i) {
    out[i] = std::log(std::max(block[i], 1e-12));
    mean_log += out[i];
  }
  mean_log /= static_cast<double>(block.size());
  for (double& v : out) v -= mean_log;
  return out;
}

// clr applied block-wise: per categorical variable, or per transition-matrix row.
std::vector<double> clr_full(const ComponentParams& theta) {
  std::vector<double> out;
  auto append = [&out](const double* p, Eigen::Index n) {
    auto t = centred_log_ratio(std::vector<double>(p, p + n));
    out.insert(out.end(), t.begin(), t.end());
  };
  if (const auto* c = std::get_if<CategoricalComponent>(&theta)) {
    for (const auto& row : c->pi) append(row.data(), row.size());
  } else if (const auto* mc = std::get_if<MarkovComponent>(&theta)) {
    for (Eigen::Index j = 0; j < mc->xi.rows(); ++j) {
      Eigen::RowVectorXd row = mc->xi.row(j);
      append(row.data(), row.size());
    }
  }
  return out;
}

}  // namespace

// ----------------------------------------------------------------------------
// Functional selection
// ----------------------------------------------------------------------------

FunctionalSpec FunctionalSpec::from_string(const std::string& name) {
  FunctionalSpec spec;
  if (name == "full_parameter" || name == "full") {
    spec.selector = Selector::full_parameter;
  } else if (name == "gaussian_means" || name == "means") {
    spec.selector = Selector::gaussian_means;
  } else if (name == "markov_persistence" || name == "persistence") {
    spec.selector = Selector::markov_persistence;
  } else if (name.rfind("custom:", 0) == 0) {
    spec.selector = Selector::custom;
    std::size_t pos = 7;
    while (pos < name.size()) {
      const std::size_t next = name.find(',', pos);
      const std::string tok = name.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
      try {
        const int idx = std::stoi(tok);
        if (idx < 1) throw Error(ErrorKind::config, "functional: custom indices are 1-based");
        spec.indices.push_back(idx - 1);
      } catch (const std::logic_error&) {
        throw Error(ErrorKind::config, "functional: bad custom index '" + tok + "'");
      }
      if (next == std::string::npos) break;
      pos = next + 1;
    }
    if (spec.indices.empty()) throw Error(ErrorKind::config, "functional: custom list is empty");
  } else {
    throw Error(ErrorKind::config, "unknown functional '" + name +
                                       "' (expected full_parameter, gaussian_means, markov_persistence, custom:i,j,...)");
  }
  return spec;
}

std::string FunctionalSpec::name() const {
  switch (selector) {
    case Selector::full_parameter: return "full_parameter";
    case Selector::gaussian_means: return "gaussian_means";
    case Selector::markov_persistence: return "markov_persistence";
    case Selector::custom: {
      std::string s = "custom:";
      for (std::size_t i = 0; i < indices.size(); ++i) s += (i ? "," : "") + std::to_string(indices[i] + 1);
      return s;
    }
  }
  return "full_parameter";
}

FunctionalSpec default_functional(KernelKind kernel) {
  FunctionalSpec spec;
  if (kernel == KernelKind::gaussian) spec.selector = FunctionalSpec::Selector::gaussian_means;
  if (kernel == KernelKind::markov) spec.selector = FunctionalSpec::Selector::markov_persistence;
  return spec;
}

std::vector<int> ClassificationSequence::inverse() const {
  std::vector<int> inv(rho.size(), -1);
  for (std::size_t k = 0; k < rho.size(); ++k) {
    if (rho[k] >= 0 && static_cast<std::size_t>(rho[k]) < rho.size()) inv[rho[k]] = static_cast<int>(k);
  }
  return inv;
}

bool is_permutation(const std::vector<int>& rho) {
  std::vector<int> sorted = rho;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    if (sorted[k] != static_cast<int>(k)) return false;
  }
  return true;
}

// ----------------------------------------------------------------------------
// Step 2b
// ----------------------------------------------------------------------------

std::map<int, double> kplus_posterior(const DrawStore& store) {
  std::map<int, double> freq;
  if (store.records.empty()) throw Error(ErrorKind::contract, "kplus posterior: empty store");
  for (const auto& rec : store.records) freq[count_filled(rec)] += 1.0;
  const double m = static_cast<double>(store.records.size());
  for (auto& [k, v] : freq) v /= m;
  return freq;
}

int estimate_kplus(const std::map<int, double>& posterior, const DrawStore& store, double min_fill_fraction) {
  if (min_fill_fraction < 0.0 || min_fill_fraction >= 1.0) {
    throw Error(ErrorKind::config, "min_fill_fraction must lie in [0, 1)");
  }
  std::map<int, double> counts;
  if (min_fill_fraction == 0.0) {
    counts = posterior;
  } else {
    const double threshold = min_fill_fraction * static_cast<double>(store.n_obs);
    for (const auto& rec : store.records) {
      const auto nk = rec.occupancy();
      const int big = static_cast<int>(
          std::count_if(nk.begin(), nk.end(), [threshold](int n) { return n > 0 && n >= threshold; }));
      counts[big] += 1.0;
    }
  }
  if (counts.empty()) throw Error(ErrorKind::contract, "estimate_kplus: empty posterior");
  int best = counts.begin()->first;
  double best_v = counts.begin()->second;
  for (const auto& [k, v] : counts) {
    if (v > best_v) {
      best = k;
      best_v = v;
    }
  }
  return best;
}

std::map<int, int> retention_counts(const DrawStore& store) {
  std::map<int, int> out;
  for (const auto& rec : store.records) ++out[count_filled(rec)];
  return out;
}

DrawStore stratify(const DrawStore& store, int k_hat) {
  if (k_hat < 1) throw Error(ErrorKind::contract, "stratify: K_hat must be >= 1");
  DrawStore out;
  out.schema_version = store.schema_version;
  out.config = store.config;
  out.n_obs = store.n_obs;
  for (const auto& rec : store.records) {
    const auto nk = rec.occupancy();
    if (count_filled(rec) != k_hat) continue;
    DrawRecord r;
    r.m = rec.m;
    r.K = k_hat;
    r.K_plus = k_hat;
    std::vector<int> remap(nk.size(), -1);
    for (std::size_t k = 0; k < nk.size(); ++k) {
      if (nk[k] == 0) continue;
      remap[k] = static_cast<int>(r.theta.size());
      r.eta.push_back(rec.eta[k]);
      r.theta.push_back(rec.theta[k]);
    }
    r.S.reserve(rec.S.size());
    for (int s : rec.S) r.S.push_back(remap[s]);
    out.records.push_back(std::move(r));
  }
  if (out.records.empty()) {
    std::string alt;
    for (const auto& [k, n] : retention_counts(store)) {
      alt += (alt.empty() ? "" : ", ") + std::to_string(k) + " (" + std::to_string(n) + " draws)";
    }
    throw Error(ErrorKind::empty_stratum, "no recorded draw has " + std::to_string(k_hat) +
                                              " filled components; available K+ values: " + alt);
  }
  return out;
}

// ----------------------------------------------------------------------------
// Steps 3-5
// ----------------------------------------------------------------------------

PointSet extract_functional(const DrawStore& stratified, const FunctionalSpec& spec, bool clr_transform) {
  using Sel = FunctionalSpec::Selector;
  if (stratified.records.empty()) throw Error(ErrorKind::contract, "extract_functional: empty store");
  const int k_hat = stratified.records.front().K;
  const KernelKind kernel = kind_of(stratified.records.front().theta.front());
  if (spec.selector == Sel::gaussian_means && kernel != KernelKind::gaussian) {
    throw Error(ErrorKind::config, "functional gaussian_means requires the gaussian kernel");
  }
  if (spec.selector == Sel::markov_persistence && kernel != KernelKind::markov) {
    throw Error(ErrorKind::config, "functional markov_persistence requires the markov kernel");
  }
  if (clr_transform && (spec.selector != Sel::full_parameter || kernel == KernelKind::gaussian)) {
    throw Error(ErrorKind::config, "clr transform applies only to the full simplex-valued parameter");
  }

  auto phi = [&](const ComponentParams& theta) -> std::vector<double> {
    switch (spec.selector) {
      case Sel::full_parameter:
        return clr_transform ? clr_full(theta) : flatten(theta);
      case Sel::gaussian_means: {
        const auto& g = std::get<GaussianComponent>(theta);
        return {g.mu.data(), g.mu.data() + g.mu.size()};
      }
      case Sel::markov_persistence: {
        const Eigen::VectorXd d = std::get<MarkovComponent>(theta).xi.diagonal();
        return {d.data(), d.data() + d.size()};
      }
      case Sel::custom: {
        const auto flat = flatten(theta);
        std::vector<double> out;
        for (int idx : spec.indices) {
          if (idx < 0 || static_cast<std::size_t>(idx) >= flat.size()) {
            throw Error(ErrorKind::config, "functional: custom index " + std::to_string(idx + 1) +
                                               " out of range (parameter dimension " +
                                               std::to_string(flat.size()) + ")");
          }
          out.push_back(flat[idx]);
        }
        return out;
      }
    }
    return {};
  };

  const auto first = phi(stratified.records.front().theta.front());
  const auto d = static_cast<Eigen::Index>(first.size());
  PointSet points(static_cast<Eigen::Index>(stratified.records.size()) * k_hat, d);
  Eigen::Index row = 0;
  for (const auto& rec : stratified.records) {
    for (const auto& theta : rec.theta) {
      const auto v = phi(theta);
      for (Eigen::Index j = 0; j < d; ++j) points(row, j) = v[j];
      ++row;
    }
  }
  return points;
}

std::vector<int> cluster_ppr(const PointSet& points, int k_hat, const KMeansOptions& options, RandomSource& rng) {
  return kmeans_fit(points, k_hat, options, rng).labels;
}

PermutationCheck check_permutations(const std::vector<int>& labels, int k_hat, int m_strat) {
  if (labels.size() != static_cast<std::size_t>(k_hat) * static_cast<std::size_t>(m_strat)) {
    throw Error(ErrorKind::contract, "check_permutations: label count must equal K_hat * M_strat");
  }
  PermutationCheck out;
  out.sequences.reserve(static_cast<std::size_t>(m_strat));
  for (int m = 0; m < m_strat; ++m) {
    ClassificationSequence seq;
    seq.rho.assign(labels.begin() + static_cast<std::ptrdiff_t>(m) * k_hat,
                   labels.begin() + static_cast<std::ptrdiff_t>(m + 1) * k_hat);
    seq.is_permutation = is_permutation(seq.rho);
    if (!seq.is_permutation) ++out.non_permutations;
    out.sequences.push_back(std::move(seq));
  }
  out.nu = m_strat > 0 ? static_cast<double>(out.non_permutations) / m_strat : 0.0;
  return out;
}

DrawStore relabel(const DrawStore& stratified, const std::vector<ClassificationSequence>& sequences) {
  if (sequences.size() != stratified.records.size()) {
    throw Error(ErrorKind::contract, "relabel: one classification sequence per record required");
  }
  DrawStore out;
  out.schema_version = stratified.schema_version;
  out.config = stratified.config;
  out.n_obs = stratified.n_obs;
  for (std::size_t m = 0; m < sequences.size(); ++m) {
    const auto& seq = sequences[m];
    if (!seq.is_permutation) continue;
    const auto& rec = stratified.records[m];
    if (seq.rho.size() != rec.theta.size()) throw Error(ErrorKind::contract, "relabel: sequence length mismatch");
    const auto inv = seq.inverse();
    DrawRecord r;
    r.m = rec.m;
    r.K = rec.K;
    r.K_plus = rec.K_plus;
    r.eta.resize(rec.eta.size());
    r.theta.reserve(rec.theta.size());
    for (std::size_t j = 0; j < inv.size(); ++j) {
      r.eta[j] = rec.eta[inv[j]];
      r.theta.push_back(rec.theta[inv[j]]);
    }
    r.S.reserve(rec.S.size());
    for (int s : rec.S) r.S.push_back(seq.rho[s]);
    out.records.push_back(std::move(r));
  }
  return out;
}

// ----------------------------------------------------------------------------
// Step 6
// ----------------------------------------------------------------------------

Summaries summarize(const DrawStore& identified) {
  if (identified.records.empty()) throw Error(ErrorKind::empty_stratum, "summarize: no identified draws");
  const int k = identified.records.front().K;
  const double m = static_cast<double>(identified.records.size());
  Summaries out;
  out.param_names = parameter_names(identified.records.front().theta.front());
  const std::size_t p = out.param_names.size();

  for (int j = 0; j < k; ++j) {
    ClusterSummary cs;
    cs.label = j;
    std::vector<double> sum(p, 0.0), sum_sq(p, 0.0);
    double w_sum = 0.0, w_sq = 0.0;
    for (const auto& rec : identified.records) {
      const auto flat = flatten(rec.theta[j]);
      for (std::size_t q = 0; q < p; ++q) {
        sum[q] += flat[q];
        sum_sq[q] += flat[q] * flat[q];
      }
      w_sum += rec.eta[j];
      w_sq += rec.eta[j] * rec.eta[j];
    }
    auto sd = [m](double s, double sq) {
      if (m < 2.0) return 0.0;
      const double var = (sq - s * s / m) / (m - 1.0);
      return var > 0.0 ? std::sqrt(var) : 0.0;
    };
    cs.param_mean.resize(p);
    cs.param_sd.resize(p);
    for (std::size_t q = 0; q < p; ++q) {
      cs.param_mean[q] = sum[q] / m;
      cs.param_sd[q] = sd(sum[q], sum_sq[q]);
    }
    cs.weight_mean = w_sum / m;
    cs.weight_sd = sd(w_sum, w_sq);
    out.clusters.push_back(std::move(cs));
  }

  const std::size_t n = identified.n_obs;
  std::vector<int> tally(n * static_cast<std::size_t>(k), 0);
  for (const auto& rec : identified.records) {
    for (std::size_t i = 0; i < n; ++i) ++tally[i * k + rec.S[i]];
  }
  out.modal_partition.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    int best = 0;
    for (int j = 1; j < k; ++j) {
      if (tally[i * k + j] > tally[i * k + best]) best = j;
    }
    out.modal_partition[i] = best;
    ++out.clusters[best].size;
  }
  return out;
}

ClipsResult run_clips(const DrawStore& store, const ClipsOptions& options) {
  ClipsResult result;
  result.functional = options.functional.name();
  result.kplus_posterior = kplus_posterior(store);
  result.K_hat_plus = options.kplus ? *options.kplus
                                    : estimate_kplus(result.kplus_posterior, store, options.min_fill_fraction);
  const DrawStore strat = stratify(store, result.K_hat_plus);
  result.M_strat = static_cast<int>(strat.records.size());

  result.ppr_points = extract_functional(strat, options.functional, options.clr_transform);
  RandomSource rng(options.seed);
  result.ppr_labels = cluster_ppr(result.ppr_points, result.K_hat_plus, options.kmeans, rng);
  result.ppr_iteration.reserve(result.ppr_labels.size());
  for (const auto& rec : strat.records)
    for (int k = 0; k < result.K_hat_plus; ++k) result.ppr_iteration.push_back(rec.m);

  PermutationCheck check = check_permutations(result.ppr_labels, result.K_hat_plus, result.M_strat);
  result.M_nu = check.non_permutations;
  result.nu = check.nu;
  result.identified = relabel(strat, check.sequences);
  result.sequences = std::move(check.sequences);
  if (!result.identified.records.empty()) result.summaries = summarize(result.identified);
  return result;
}

}  // namespace mixclips
