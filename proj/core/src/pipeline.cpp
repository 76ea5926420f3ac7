#include "mixclips/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <exception>
#include <fstream>
#include <ostream>
#include <thread>

#include <json.hpp>

#include "mixclips/error.hpp"
#include "mixclips/report.hpp"
#include "mixclips/store_io.hpp"

namespace mixclips {

using ojson = nlohmann::ordered_json;

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex(std::uint64_t x) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::io, "cannot create output directory " + dir.string() + ": " + ec.message());
}

void write_json(const ojson& j, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

std::string describe(const DataSource& d) {
  if (d.path) return d.path->string();
  const auto& g = *d.generator;
  return "generator:" + g.name + ",n=" + std::to_string(g.n) + ",seed=" + std::to_string(g.seed);
}

std::string kplus_line(const std::map<int, double>& post) {
  std::string s;
  char buf[64];
  for (const auto& [k, p] : post) {
    std::snprintf(buf, sizeof buf, "%s%d: %.3f", s.empty() ? "" : ", ", k, p);
    s += buf;
  }
  return s;
}

}  // namespace

RunConfig resolve_config(const Overrides& flags) {
  RunConfig rc;
  if (flags.config) {
    rc = load_run_config(*flags.config);
  } else {
    rc.clips.functional = default_functional(rc.model.kernel);
  }
  if (flags.out) rc.out_dir = *flags.out;
  if (flags.chains) {
    if (*flags.chains < 1) throw Error(ErrorKind::config, "--chains must be >= 1");
    rc.chains = *flags.chains;
  }
  if (flags.kplus) {
    if (*flags.kplus < 1) throw Error(ErrorKind::config, "--kplus must be >= 1");
    rc.clips.kplus = *flags.kplus;
  }
  if (flags.min_fill) {
    if (*flags.min_fill < 0.0 || *flags.min_fill >= 1.0) throw Error(ErrorKind::config, "--min-fill must lie in [0, 1)");
    rc.clips.min_fill_fraction = *flags.min_fill;
  }
  if (flags.functional) {
    rc.clips.functional = FunctionalSpec::from_string(*flags.functional);
    rc.functional_given = true;
  }
  if (flags.restarts) {
    if (*flags.restarts < 1) throw Error(ErrorKind::config, "--restarts must be >= 1");
    rc.clips.kmeans.restarts = *flags.restarts;
  }
  if (flags.truth) rc.data.truth = *flags.truth;
  return rc;
}

Dataset load_source(const RunConfig& rc, Simulated* sim) {
  if (rc.data.path) return load_dataset(*rc.data.path, rc.model.kernel, rc.data.csv);
  if (!rc.data.generator) throw Error(ErrorKind::config, "no data source configured (need [data] path or generator)");
  Simulated s = simulate(*rc.data.generator);
  Dataset d = s.data;
  if (sim) *sim = std::move(s);
  return d;
}

std::string store_file_name(int chain, int chains) {
  if (chains == 1) return kStoreFile;
  return "draws_chain" + std::to_string(chain + 1) + ".jsonl";
}

void save_clips_result(const ClipsResult& result, KernelKind kernel, std::size_t n_obs,
                       const std::filesystem::path& path) {
  ojson j;
  j["kernel"] = to_string(kernel);
  j["functional"] = result.functional;
  j["n_obs"] = n_obs;
  j["K_hat_plus"] = result.K_hat_plus;
  ojson post = ojson::array();
  for (const auto& [k, p] : result.kplus_posterior) post.push_back({{"k", k}, {"frequency", p}});
  j["kplus_posterior"] = post;
  j["M_strat"] = result.M_strat;
  j["M_nu"] = result.M_nu;
  j["nu"] = result.nu;
  j["M_identified"] = result.identified.records.size();
  std::vector<int> bad;
  for (std::size_t m = 0; m < result.sequences.size(); ++m) {
    if (!result.sequences[m].is_permutation) bad.push_back(result.ppr_iteration[m * result.K_hat_plus]);
  }
  j["non_permutation_iterations"] = bad;
  j["param_names"] = result.summaries.param_names;
  ojson clusters = ojson::array();
  for (const auto& c : result.summaries.clusters) {
    clusters.push_back({{"label", c.label + 1},
                        {"size", c.size},
                        {"weight_mean", c.weight_mean},
                        {"weight_sd", c.weight_sd},
                        {"param_mean", c.param_mean},
                        {"param_sd", c.param_sd}});
  }
  j["clusters"] = clusters;
  std::vector<int> modal(result.summaries.modal_partition);
  for (int& s : modal) ++s;
  j["modal_partition"] = modal;
  write_json(j, path);
}

void save_ppr_csv(const ClipsResult& result, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  out << "iteration,component,group_label";
  for (Eigen::Index q = 0; q < result.ppr_points.cols(); ++q) out << ",phi" << q + 1;
  out << '\n';
  for (Eigen::Index row = 0; row < result.ppr_points.rows(); ++row) {
    out << result.ppr_iteration[row] << ',' << row % result.K_hat_plus + 1 << ',' << result.ppr_labels[row] + 1;
    for (Eigen::Index q = 0; q < result.ppr_points.cols(); ++q) out << ',' << format_real(result.ppr_points(row, q));
    out << '\n';
  }
}

void save_partition_csv(const std::vector<int>& partition, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  out << "observation,cluster\n";
  for (std::size_t i = 0; i < partition.size(); ++i) out << i + 1 << ',' << partition[i] + 1 << '\n';
}

int cmd_simulate(const Overrides& flags, std::ostream& log) {
  RunConfig rc = resolve_config(flags);
  if (!rc.data.generator) throw Error(ErrorKind::config, "simulate needs a [data] generator in the config");
  if (flags.seed) rc.data.generator->seed = *flags.seed;
  const Simulated sim = simulate(*rc.data.generator);
  ensure_dir(rc.out_dir);
  save_dataset(sim.data, rc.out_dir / kDataFile, sim.header);
  save_truth(sim, *rc.data.generator, rc.out_dir / kTruthFile);
  log << "simulated " << size_of(sim.data) << " observations (" << rc.data.generator->name << ", seed "
      << rc.data.generator->seed << ") -> " << (rc.out_dir / kDataFile).string() << '\n';
  return 0;
}

int cmd_fit(const Overrides& flags, std::ostream& log) {
  RunConfig rc = resolve_config(flags);
  if (flags.seed) rc.model.seed = *flags.seed;
  Simulated sim;
  const Dataset data = load_source(rc, &sim);
  ensure_dir(rc.out_dir);
  if (rc.data.generator) {
    save_dataset(sim.data, rc.out_dir / kDataFile, sim.header);
    save_truth(sim, *rc.data.generator, rc.out_dir / kTruthFile);
  }

  const int chains = rc.chains;
  std::vector<MixtureConfig> configs(static_cast<std::size_t>(chains), rc.model);
  for (int c = 1; c < chains; ++c) configs[c].seed = RandomSource(rc.model.seed).derive_seed(static_cast<std::uint64_t>(c));
  std::vector<DrawStore> stores(static_cast<std::size_t>(chains));
  std::vector<double> seconds(static_cast<std::size_t>(chains), 0.0);
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(chains));
  auto run = [&](int c) {
    try {
      const auto t0 = std::chrono::steady_clock::now();
      stores[c] = run_chain(data, configs[c]);
      seconds[c] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    } catch (...) {
      errors[c] = std::current_exception();
    }
  };
  const auto start = std::chrono::steady_clock::now();
  if (chains == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (int c = 0; c < chains; ++c) pool.emplace_back(run, c);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  ojson manifest;
  manifest["data"] = describe(rc.data);
  manifest["n_obs"] = size_of(data);
  manifest["config_hash"] = hex(fnv1a(config_json(rc.model) + "|" + describe(rc.data)));
  manifest["config"] = ojson::parse(config_json(rc.model));
  manifest["chains"] = ojson::array();
  for (int c = 0; c < chains; ++c) {
    const std::string file = store_file_name(c, chains);
    save_store(stores[c], rc.out_dir / file);
    manifest["chains"].push_back({{"file", file}, {"seed", configs[c].seed}, {"seconds", seconds[c]}});
    log << "chain " << c + 1 << " (seed " << configs[c].seed << "): " << stores[c].records.size()
        << " draws -> " << (rc.out_dir / file).string() << "; K+ posterior {" << kplus_line(kplus_posterior(stores[c]))
        << "}\n";
  }
  manifest["total_seconds"] = total;
  write_json(manifest, rc.out_dir / kManifestFile);
  return 0;
}

int cmd_clips(const Overrides& flags, std::ostream& log) {
  RunConfig rc = resolve_config(flags);
  const auto store_path = flags.input ? *flags.input : rc.out_dir / kStoreFile;
  const DrawStore store = load_store(store_path);
  if (!rc.functional_given) rc.clips.functional = default_functional(store.config.kernel);
  if (flags.seed) rc.clips.seed = *flags.seed;

  const ClipsResult result = run_clips(store, rc.clips);
  ensure_dir(rc.out_dir);
  save_clips_result(result, store.config.kernel, store.n_obs, rc.out_dir / kClipsFile);
  save_ppr_csv(result, rc.out_dir / kPprFile);
  if (!result.identified.records.empty()) {
    save_partition_csv(result.summaries.modal_partition, rc.out_dir / kPartitionFile);
  }

  char buf[160];
  std::snprintf(buf, sizeof buf, "K_hat_plus = %d, nu = %.4f (%d of %d retained draws are non-permutations)\n",
                result.K_hat_plus, result.nu, result.M_nu, result.M_strat);
  log << "K+ posterior {" << kplus_line(result.kplus_posterior) << "}\n" << buf;
  log << "retained " << result.M_strat << " of " << store.records.size() << " draws; identified "
      << result.identified.records.size() << '\n';
  if (result.identified.records.empty()) {
    log << "warning: no identified draws; modal partition not written\n";
  }
  return 0;
}

int cmd_report(const Overrides& flags, std::ostream& log) {
  RunConfig rc = resolve_config(flags);
  const auto clips_path = flags.input ? *flags.input : rc.out_dir / kClipsFile;
  std::optional<std::vector<int>> reference;
  if (rc.data.truth) reference = load_truth_labels(*rc.data.truth);
  const std::string text = render_report(clips_path, reference);
  ensure_dir(rc.out_dir);
  std::ofstream out(rc.out_dir / kReportFile, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write " + (rc.out_dir / kReportFile).string());
  out << text;
  log << text;
  return 0;
}

}  // namespace mixclips
