#pragma once

#include "ggs/pipeline.hpp"

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ggs {

/// Applies one `key=value` setting. Unknown keys and malformed values raise ConfigError.
void apply_setting(ExperimentConfig& cfg, std::string_view key, std::string_view value);

/// Parses a key=value config file body: one setting per line, '#' starts a
/// comment, blank lines ignored. `source` names the file in error messages.
void apply_config_text(ExperimentConfig& cfg, std::string_view text, std::string_view source = "config");

void apply_config_file(ExperimentConfig& cfg, const std::filesystem::path& path);

/// Every field of the config as (key, value) pairs in a fixed order.
std::vector<std::pair<std::string, std::string>> config_pairs(const ExperimentConfig& cfg);

/// config_pairs rendered as a config file body; parsing it reproduces `cfg`.
std::string config_to_text(const ExperimentConfig& cfg);

Band parse_band(std::string_view text);

}  // namespace ggs
