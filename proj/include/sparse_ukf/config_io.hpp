#pragma once

#include <filesystem>
#include <string>

#include "sparse_ukf/experiment.hpp"

namespace sparse_ukf {

/// Parses a YAML experiment definition.
///
/// `benchmark` and `seed` are required. Every other field falls back to the
/// built-in demo setup of the chosen benchmark. Unknown keys, wrong types and
/// out-of-range values raise ConfigError naming the offending field, e.g.
/// "sparsity.gamma".
ExperimentConfig parse_config(const std::string& yaml_text);

ExperimentConfig load_config(const std::filesystem::path& path);

/// YAML text that parse_config() maps back to an equal configuration.
std::string dump_config(const ExperimentConfig& config);

}  // namespace sparse_ukf
