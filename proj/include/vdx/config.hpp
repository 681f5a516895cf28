#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "vdx/engine.hpp"

namespace vdx {

// `key = value` lines; `#` starts a comment. Keys are EngineConfig field names.
// Unknown keys, malformed values and out-of-range settings throw Error naming
// the line.
EngineConfig parse_config(std::string_view text, EngineConfig base = {});
EngineConfig load_config(const std::string& path, EngineConfig base = {});

// Sets one field from its text form.
void set_config_value(EngineConfig& cfg, std::string_view key, std::string_view value);

std::vector<std::string> config_keys();

// Every field as `key = value`, parseable by parse_config.
std::string dump_config(const EngineConfig& cfg);

}  // namespace vdx
