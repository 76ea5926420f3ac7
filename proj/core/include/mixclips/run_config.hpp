#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "mixclips/clips.hpp"
#include "mixclips/dataset_io.hpp"
#include "mixclips/sampler.hpp"
#include "mixclips/simulate.hpp"

namespace mixclips {

struct DataSource {
  std::optional<std::filesystem::path> path;  // CSV file
  std::optional<GeneratorSpec> generator;     // or a built-in generator
  CsvOptions csv;
  std::optional<std::filesystem::path> truth;  // reference labels (JSON, key "labels")
};

/// Everything a pipeline run needs. Sections: [data], [model], [mcmc],
/// [clips], [output]. Relative paths resolve against the config file's
/// directory.
struct RunConfig {
  DataSource data;
  MixtureConfig model;
  ClipsOptions clips;
  bool functional_given = false;
  int chains = 1;
  std::filesystem::path out_dir = "out";
  std::string source = "<defaults>";
};

/// Parses INI text. Errors carry "source:line: [section] key: message".
RunConfig parse_run_config(std::istream& in, const std::string& source = "<stream>",
                           const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace mixclips
