#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "mixclips/dataset.hpp"

namespace mixclips {

/// CSV ingestion. Every file has a header row. Continuous columns are
/// decimals; categorical columns and Markov states are 1-based integers.
/// Markov files hold one sequence per row with a varying number of fields.
struct CsvOptions {
  std::vector<int> levels;  // categorical: D_j per column; empty means infer max
  int states = 0;           // markov: L; 0 means infer max
};

Dataset read_dataset(std::istream& in, KernelKind kernel, const CsvOptions& options = {},
                     const std::string& source = "<stream>");
Dataset load_dataset(const std::filesystem::path& path, KernelKind kernel, const CsvOptions& options = {});

void write_dataset(const Dataset& data, std::ostream& out, const std::vector<std::string>& header = {});
void save_dataset(const Dataset& data, const std::filesystem::path& path, const std::vector<std::string>& header = {});

/// Allocation labels as a single-column CSV (`label`, 1-based).
void save_labels(const std::vector<int>& labels, const std::filesystem::path& path);

}  // namespace mixclips
