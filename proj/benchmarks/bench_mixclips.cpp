#include <benchmark/benchmark.h>

#include "mixclips/clips.hpp"
#include "mixclips/sampler.hpp"
#include "mixclips/simulate.hpp"

using namespace mixclips;

namespace {

const GaussianData& example1_data() {
  static const GaussianData data = [] {
    GeneratorSpec spec;
    return std::get<GaussianData>(simulate(spec).data);
  }();
  return data;
}

const DrawStore& example2_store() {
  static const DrawStore store = [] {
    MixtureConfig cfg;
    cfg.k_prior.k = 4;
    cfg.gamma = GammaRule{false, 4.0};
    cfg.burnin = 100;
    cfg.draws = 500;
    return run_chain(Dataset(example1_data()), cfg);
  }();
  return store;
}

}  // namespace

static void BM_GaussianSweep(benchmark::State& state) {
  const auto& data = example1_data();
  MixtureConfig cfg;
  cfg.k_prior.k = static_cast<int>(state.range(0));
  RandomSource rng(1);
  auto chain = init_chain<GaussianKernel>(data, cfg, rng);
  for (auto _ : state) {
    step_classify(chain, data, rng);
    step_weights(chain, 4.0, rng);
    step_components(chain, data, true, rng);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long long>(data.size()));
}
BENCHMARK(BM_GaussianSweep)->Arg(4)->Arg(10)->Arg(20);

static void BM_KConditional(benchmark::State& state) {
  PriorOnK prior;
  prior.mode = KMode::bnb;
  const std::vector<int> nk(static_cast<std::size_t>(state.range(0)), 50);
  for (auto _ : state) benchmark::DoNotOptimize(k_conditional(nk, prior, GammaRule{true, 0.5}));
}
BENCHMARK(BM_KConditional)->Arg(2)->Arg(4)->Arg(8);

static void BM_CategoricalSweep(benchmark::State& state) {
  GeneratorSpec spec;
  spec.name = "lca";
  spec.n = 500;
  const auto data = std::get<CategoricalData>(simulate(spec).data);
  MixtureConfig cfg;
  cfg.kernel = KernelKind::categorical;
  cfg.k_prior.mode = KMode::fixed_sparse;
  cfg.k_prior.k = 20;
  RandomSource rng(2);
  auto chain = init_chain<CategoricalKernel>(data, cfg, rng);
  for (auto _ : state) {
    step_classify(chain, data, rng);
    step_weights(chain, 0.0025, rng);
    step_components(chain, data, true, rng);
  }
}
BENCHMARK(BM_CategoricalSweep);

static void BM_MarkovSweep(benchmark::State& state) {
  GeneratorSpec spec;
  spec.name = "markov";
  spec.n = 300;
  const auto data = std::get<MarkovData>(simulate(spec).data);
  MixtureConfig cfg;
  cfg.kernel = KernelKind::markov;
  cfg.k_prior.mode = KMode::fixed_sparse;
  cfg.k_prior.k = 10;
  RandomSource rng(3);
  auto chain = init_chain<MarkovKernel>(data, cfg, rng);
  for (auto _ : state) {
    step_classify(chain, data, rng);
    step_weights(chain, 0.01, rng);
    step_components(chain, data, true, rng);
  }
}
BENCHMARK(BM_MarkovSweep);

static void BM_KMeansPpr(benchmark::State& state) {
  const auto points = extract_functional(example2_store(), FunctionalSpec::from_string("gaussian_means"));
  for (auto _ : state) {
    RandomSource rng(4);
    benchmark::DoNotOptimize(kmeans_fit(points, 4, KMeansOptions{static_cast<int>(state.range(0)), 100}, rng));
  }
}
BENCHMARK(BM_KMeansPpr)->Arg(1)->Arg(10)->Unit(benchmark::kMillisecond);

static void BM_RunClips(benchmark::State& state) {
  const auto& store = example2_store();
  ClipsOptions opt;
  opt.functional = FunctionalSpec::from_string("gaussian_means");
  for (auto _ : state) benchmark::DoNotOptimize(run_clips(store, opt));
}
BENCHMARK(BM_RunClips)->Unit(benchmark::kMillisecond);

static void BM_Wishart(benchmark::State& state) {
  const int r = static_cast<int>(state.range(0));
  const SpdMatrix scale = SpdMatrix::identity(r);
  RandomSource rng(5);
  for (auto _ : state) benchmark::DoNotOptimize(draw_wishart(r + 2.0, scale, rng));
}
BENCHMARK(BM_Wishart)->Arg(2)->Arg(6)->Arg(20);
BENCHMARK_MAIN();
