#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace mixclips {

/// Plain-text report from a clips.json file: K+ posterior, nu, cluster
/// tables (occurrence-probability rows for categorical kernels, transition
/// grids for Markov kernels) and, given reference labels (0-based), the
/// confusion matrix, accuracy and adjusted Rand index.
std::string render_report(const std::filesystem::path& clips_json,
                          const std::optional<std::vector<int>>& reference = std::nullopt);

}  // namespace mixclips
