#pragma once

#include "coopkal/harness.hpp"

#include <string>

namespace coopkal {

// Flat TOML table whose keys match ExperimentConfig fields. Unknown keys,
// wrong types and invalid values raise ConfigError.
ExperimentConfig parse_config(const std::string& toml_text, const std::string& origin = "<string>");
ExperimentConfig load_config(const std::string& path);

// "0..9" (inclusive) or "1,4,7"
std::vector<std::uint64_t> parse_seed_list(const std::string& spec);

}  // namespace coopkal
