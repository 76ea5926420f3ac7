#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "mixclips/sampler.hpp"

namespace mixclips {

/// Shortest form is not used: every real is printed with 17 significant
/// digits ("%.17g"), which round-trips IEEE doubles exactly.
std::string format_real(double x);

/// JSON Lines draw store. Line 1 is a header (schema version, config
/// snapshot); each further line is one record with fields m, K, K_plus, eta,
/// theta (kernel-tagged, matrices row-major) and S (1-based labels).
void write_store(const DrawStore& store, std::ostream& out);
DrawStore read_store(std::istream& in);

void save_store(const DrawStore& store, const std::filesystem::path& path);
DrawStore load_store(const std::filesystem::path& path);

/// Compact JSON text of a config snapshot (same encoding as the store header).
std::string config_json(const MixtureConfig& config);
MixtureConfig config_from_json(const std::string& text);

}  // namespace mixclips
