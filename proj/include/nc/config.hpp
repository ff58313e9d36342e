#pragma once

#include "nc/experiment.hpp"

#include <istream>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nc {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using KeyValues = std::vector<std::pair<std::string, std::string>>;

// Flat `section.key = value` lines; '#' starts a comment. Duplicate keys are
// rejected.
std::map<std::string, std::string> parse_flat_config(std::istream& in);

// Typed view of the flat map; unknown keys and malformed values raise
// ConfigError.
ExperimentConfig config_from_map(const std::map<std::string, std::string>& map);

ExperimentConfig load_config_file(const std::string& path);

// Canonical echo of every effective setting, sorted by key. Feeding the
// result back through config_from_map reproduces the config exactly.
KeyValues to_key_values(const ExperimentConfig& config);

void write_config_file(const std::string& path, const KeyValues& kv);

// FNV-1a over the canonical key=value lines, as 16 hex digits.
std::string config_fingerprint(const KeyValues& kv);

}  // namespace nc
