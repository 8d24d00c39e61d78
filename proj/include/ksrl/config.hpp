#pragma once

#include "ksrl/agent.hpp"

#include <filesystem>
#include <map>
#include <string>

namespace ksrl {

/// Flat `key = value` pairs; keys mirror the CLI flag names without the leading dashes.
using KeyValues = std::map<std::string, std::string>;

/// Parses `key = value` lines. Blank lines and `#` comments are skipped.
KeyValues parse_config_text(const std::string& text);
KeyValues read_config_file(const std::filesystem::path& path);

/// Applies recognised keys on top of `cfg`. Selecting `env` first resets the
/// environment-dependent defaults, so it is applied before everything else.
/// Throws std::invalid_argument on unknown keys or bad values.
AgentConfig apply_config(AgentConfig cfg, const KeyValues& kv);

/// Canonical text form, readable by parse_config_text.
std::string format_config(const AgentConfig& cfg);

bool parse_bool(const std::string& s);

}  // namespace ksrl
