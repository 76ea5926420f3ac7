#include "mixclips/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "mixclips/kmeans.hpp"

namespace mixclips {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

template <class Kernel>
std::vector<std::vector<std::size_t>> members_by_component(const ChainState<Kernel>& state) {
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(state.K));
  for (std::size_t i = 0; i < state.S.size(); ++i) members[state.S[i]].push_back(i);
  return members;
}

}  // namespace

std::string to_string(KMode mode) {
  switch (mode) {
    case KMode::fixed: return "fixed";
    case KMode::bnb: return "bnb";
    case KMode::fixed_sparse: return "fixed_sparse";
  }
  return "fixed";
}

KMode k_mode_from_string(const std::string& name) {
  if (name == "fixed") return KMode::fixed;
  if (name == "bnb") return KMode::bnb;
  if (name == "fixed_sparse") return KMode::fixed_sparse;
  throw Error(ErrorKind::config, "unknown K mode '" + name + "' (expected fixed, bnb or fixed_sparse)");
}

double PriorOnK::log_pmf(int big_k) const {
  if (big_k < 1) return kNegInf;
  if (mode == KMode::bnb) return bnb_log_pmf(big_k - 1, a, b, c);
  return big_k == k ? 0.0 : kNegInf;
}

void MixtureConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::config, msg); };
  if (burnin < 1) fail("mcmc.burnin must be >= 1");
  if (draws < 1) fail("mcmc.draws must be >= 1");
  if (thin < 1) fail("mcmc.thin must be >= 1");
  if (!(gamma.value > 0.0)) fail("model.gamma must be > 0");
  if (k_prior.mode != KMode::bnb && k_prior.k < 1) fail("model.k must be >= 1");
  if (k_prior.mode == KMode::bnb && !(k_prior.a > 0.0 && k_prior.b > 0.0 && k_prior.c > 0.0)) {
    fail("model.bnb parameters must be positive");
  }
  if (initial_components() < 1) fail("mcmc.init_k must be >= 1");
  if (init_restarts < 1) fail("mcmc.init_restarts must be >= 1");
  if (!(hyper.categorical_prior > 0.0)) fail("hyper.categorical_prior must be > 0");
  if (hyper.markov_persistence_prior < 0.0 || !(hyper.markov_off_diagonal_prior > 0.0)) {
    fail("hyper.markov priors must be nonnegative (off-diagonal positive)");
  }
}

template <class Kernel>
int ChainState<Kernel>::k_plus() const {
  return static_cast<int>(std::count_if(Nk.begin(), Nk.end(), [](int n) { return n > 0; }));
}

template <class Kernel>
void ChainState<Kernel>::recount() {
  Nk.assign(static_cast<std::size_t>(K), 0);
  for (int s : S) ++Nk[s];
}

std::vector<int> DrawRecord::occupancy() const {
  std::vector<int> nk(static_cast<std::size_t>(K), 0);
  for (int s : S) ++nk[s];
  return nk;
}

// ----------------------------------------------------------------------------
// Hyperparameters and initialisation
// ----------------------------------------------------------------------------

template <>
GaussianHyper make_hyper<GaussianKernel>(const GaussianData& data, const KernelSettings& settings) {
  return gaussian_hyper_from_data(data, settings.b0_scale);
}

template <>
CategoricalHyper make_hyper<CategoricalKernel>(const CategoricalData& data, const KernelSettings& settings) {
  return CategoricalHyper{data.levels, settings.categorical_prior};
}

template <>
MarkovHyper make_hyper<MarkovKernel>(const MarkovData& data, const KernelSettings& settings) {
  return markov_hyper(data.states, settings.markov_persistence_prior, settings.markov_off_diagonal_prior);
}

template <class Kernel>
ChainState<Kernel> init_chain(const typename Kernel::Data& data, const MixtureConfig& config, RandomSource& rng) {
  const std::size_t n = data.size();
  if (n == 0) throw Error(ErrorKind::data, "init_chain: empty data");
  ChainState<Kernel> state;
  state.K = config.initial_components();
  state.zeta = make_hyper<Kernel>(data, config.hyper);
  state.S.assign(n, 0);

  const bool want_kmeans = config.init == InitKind::kmeans;
  if (state.K > 1) {
    if (want_kmeans && n >= static_cast<std::size_t>(state.K)) {
      KMeansResult km = kmeans_fit(Kernel::embed(data), state.K, KMeansOptions{config.init_restarts, 100}, rng);
      state.S = std::move(km.labels);
    } else {
      state.random_init_fallback = want_kmeans;
      for (auto& s : state.S) s = std::min(state.K - 1, static_cast<int>(rng.uniform() * state.K));
    }
  }
  state.recount();

  auto members = members_by_component(state);
  state.theta.reserve(static_cast<std::size_t>(state.K));
  for (int k = 0; k < state.K; ++k) {
    if (members[k].empty()) {
      state.theta.push_back(Kernel::draw_prior(state.zeta, rng));
    } else {
      state.theta.push_back(Kernel::initial_estimate(data, members[k], state.zeta));
    }
  }
  state.eta = Eigen::VectorXd::Constant(state.K, 1.0 / state.K);
  return state;
}

// ----------------------------------------------------------------------------
// Gibbs steps
// ----------------------------------------------------------------------------

template <class Kernel>
void step_classify(ChainState<Kernel>& state, const typename Kernel::Data& data, RandomSource& rng) {
  std::vector<typename Kernel::Prepared> prepared;
  prepared.reserve(static_cast<std::size_t>(state.K));
  for (const auto& theta : state.theta) prepared.push_back(Kernel::prepare(theta));
  std::vector<double> log_eta(static_cast<std::size_t>(state.K));
  for (int k = 0; k < state.K; ++k) log_eta[k] = state.eta(k) > 0.0 ? std::log(state.eta(k)) : kNegInf;

  std::vector<double> lw(static_cast<std::size_t>(state.K));
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (int k = 0; k < state.K; ++k) {
      lw[k] = log_eta[k] == kNegInf ? kNegInf : log_eta[k] + Kernel::loglik(prepared[k], data, i);
    }
    try {
      state.S[i] = draw_categorical_log(lw, rng);
    } catch (const Error& e) {
      throw Error(ErrorKind::numerical,
                  "classification: all component log-weights are -inf for observation " + std::to_string(i + 1));
    }
  }
  state.recount();
}

template <class Kernel>
void step_weights(ChainState<Kernel>& state, double gamma_k, RandomSource& rng) {
  Eigen::VectorXd alpha(state.K);
  for (int k = 0; k < state.K; ++k) alpha(k) = gamma_k + state.Nk[k];
  state.eta = draw_dirichlet(alpha, rng);
}

template <class Kernel>
void step_components(ChainState<Kernel>& state, const typename Kernel::Data& data, bool redraw_empty,
                     RandomSource& rng) {
  const auto members = members_by_component(state);
  std::vector<typename Kernel::Component> filled;
  for (int k = 0; k < state.K; ++k) {
    if (members[k].empty()) continue;
    state.theta[k] = Kernel::draw_posterior(data, members[k], state.theta[k], state.zeta, rng);
    filled.push_back(state.theta[k]);
  }
  state.zeta = Kernel::update_shared_hyper(filled, state.zeta, rng);
  if (!redraw_empty) return;
  for (int k = 0; k < state.K; ++k) {
    if (members[k].empty()) state.theta[k] = Kernel::draw_prior(state.zeta, rng);
  }
}

double log_k_conditional(int big_k, std::span<const int> filled_counts, const PriorOnK& prior,
                         const GammaRule& rule) {
  const int k_plus = static_cast<int>(filled_counts.size());
  if (big_k < k_plus) return kNegInf;
  const double prior_term = prior.log_pmf(big_k);
  if (prior_term == kNegInf) return kNegInf;
  const double g = rule.gamma_k(big_k);
  const double n = std::accumulate(filled_counts.begin(), filled_counts.end(), 0.0);
  const double log_g = std::lgamma(g);
  double v = std::lgamma(big_k + 1.0) - std::lgamma(big_k - k_plus + 1.0) + std::lgamma(big_k * g) -
             std::lgamma(big_k * g + n);
  for (int nk : filled_counts) v += std::lgamma(nk + g) - log_g;
  return v + prior_term;
}

std::vector<double> k_conditional(std::span<const int> filled_counts, const PriorOnK& prior, const GammaRule& rule,
                                  double tail_tolerance) {
  const int k_plus = static_cast<int>(filled_counts.size());
  if (k_plus < 1) throw Error(ErrorKind::contract, "sample K: at least one filled component required");
  if (prior.mode != KMode::bnb) {
    if (prior.k < k_plus) {
      throw Error(ErrorKind::contract, "sample K: point-mass prior below the number of filled components");
    }
    std::vector<double> p(static_cast<std::size_t>(prior.k - k_plus + 1), 0.0);
    p.back() = 1.0;
    return p;
  }

  constexpr int kMaxK = 1000000;
  const double log_tol = std::log(tail_tolerance);
  const double tail_factor = std::log(std::max(1.0, 1.0 / prior.b));
  std::vector<double> logs;
  double total = kNegInf;
  for (int big_k = k_plus;; ++big_k) {
    if (big_k > kMaxK) throw Error(ErrorKind::numerical, "sample K: truncation bound exceeded 1e6");
    const double lv = log_k_conditional(big_k, filled_counts, prior, rule);
    logs.push_back(lv);
    total = log_sum_exp(total, lv);
    const bool decreasing = logs.size() > 1 && lv < logs[logs.size() - 2];
    if (decreasing && lv + std::log(static_cast<double>(big_k)) + tail_factor - total < log_tol) break;
  }
  std::vector<double> p(logs.size());
  for (std::size_t i = 0; i < logs.size(); ++i) p[i] = std::exp(logs[i] - total);
  return p;
}

int step_sample_K(std::span<const int> filled_counts, const PriorOnK& prior, const GammaRule& rule,
                  RandomSource& rng) {
  const auto p = k_conditional(filled_counts, prior, rule);
  return static_cast<int>(filled_counts.size()) + draw_categorical(p, rng);
}

template <class Kernel>
void step_add_empty(ChainState<Kernel>& state, int new_k, RandomSource& rng) {
  const int k_plus = state.k_plus();
  if (new_k < k_plus) throw Error(ErrorKind::contract, "add empty: new K below the number of filled components");
  std::vector<int> remap(static_cast<std::size_t>(state.K), -1);
  std::vector<typename Kernel::Component> theta;
  theta.reserve(static_cast<std::size_t>(new_k));
  Eigen::VectorXd eta = Eigen::VectorXd::Zero(new_k);
  int next = 0;
  for (int k = 0; k < state.K; ++k) {
    if (state.Nk[k] == 0) continue;
    remap[k] = next;
    eta(next) = state.eta(k);
    theta.push_back(std::move(state.theta[k]));
    ++next;
  }
  for (auto& s : state.S) s = remap[s];
  for (int k = k_plus; k < new_k; ++k) theta.push_back(Kernel::draw_prior(state.zeta, rng));
  state.theta = std::move(theta);
  state.K = new_k;
  // Placeholder weights until the next weight step; kept on the simplex.
  const double mass = eta.sum();
  state.eta = mass > 0.0 ? Eigen::VectorXd(eta / mass) : Eigen::VectorXd::Constant(new_k, 1.0 / new_k);
  state.recount();
}

template <class Kernel>
DrawRecord make_record(const ChainState<Kernel>& state, int m) {
  DrawRecord rec;
  rec.m = m;
  rec.K = state.K;
  rec.K_plus = state.k_plus();
  rec.eta.assign(state.eta.data(), state.eta.data() + state.eta.size());
  rec.theta.reserve(state.theta.size());
  for (const auto& t : state.theta) rec.theta.emplace_back(t);
  rec.S = state.S;
  return rec;
}

template <class Kernel>
DrawStore run_chain(const typename Kernel::Data& data, const MixtureConfig& config, RandomSource& rng) {
  config.validate();
  if (config.kernel != Kernel::kind) throw Error(ErrorKind::config, "run_chain: kernel does not match data shape");
  ChainState<Kernel> state = init_chain<Kernel>(data, config, rng);

  DrawStore store;
  store.config = config;
  store.n_obs = data.size();
  store.records.reserve(static_cast<std::size_t>(config.draws));

  const bool telescoping = config.k_prior.mode == KMode::bnb;
  const int sweeps = config.burnin + config.thin * config.draws;
  for (int sweep = 1; sweep <= sweeps; ++sweep) {
    step_classify(state, data, rng);
    if (telescoping) {
      step_components(state, data, /*redraw_empty=*/false, rng);
      std::vector<int> filled;
      for (int nk : state.Nk)
        if (nk > 0) filled.push_back(nk);
      const int new_k = step_sample_K(filled, config.k_prior, config.gamma, rng);
      step_add_empty(state, new_k, rng);
      step_weights(state, config.gamma.gamma_k(state.K), rng);
    } else {
      step_weights(state, config.gamma.gamma_k(state.K), rng);
      step_components(state, data, /*redraw_empty=*/true, rng);
    }
    if (sweep > config.burnin && (sweep - config.burnin) % config.thin == 0) {
      store.records.push_back(make_record(state, sweep));
    }
  }
  return store;
}

DrawStore run_chain(const Dataset& data, const MixtureConfig& config) {
  if (kind_of(data) != config.kernel) {
    throw Error(ErrorKind::config, "kernel '" + to_string(config.kernel) + "' does not match " +
                                       to_string(kind_of(data)) + " data");
  }
  RandomSource rng(config.seed);
  return std::visit(
      [&](const auto& d) -> DrawStore {
        using D = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<D, GaussianData>) return run_chain<GaussianKernel>(d, config, rng);
        else if constexpr (std::is_same_v<D, CategoricalData>) return run_chain<CategoricalKernel>(d, config, rng);
        else return run_chain<MarkovKernel>(d, config, rng);
      },
      data);
}

#define MIXCLIPS_INSTANTIATE(K)                                                                          \
  template struct ChainState<K>;                                                                         \
  template ChainState<K> init_chain<K>(const K::Data&, const MixtureConfig&, RandomSource&);             \
  template void step_classify<K>(ChainState<K>&, const K::Data&, RandomSource&);                         \
  template void step_weights<K>(ChainState<K>&, double, RandomSource&);                                  \
  template void step_components<K>(ChainState<K>&, const K::Data&, bool, RandomSource&);                 \
  template void step_add_empty<K>(ChainState<K>&, int, RandomSource&);                                   \
  template DrawRecord make_record<K>(const ChainState<K>&, int);                                         \
  template DrawStore run_chain<K>(const K::Data&, const MixtureConfig&, RandomSource&);

MIXCLIPS_INSTANTIATE(GaussianKernel)
MIXCLIPS_INSTANTIATE(CategoricalKernel)
MIXCLIPS_INSTANTIATE(MarkovKernel)

#undef MIXCLIPS_INSTANTIATE

}  // namespace mixclips
