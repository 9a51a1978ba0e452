#pragma once

#include <string>

#include <json.hpp>

namespace secfuse {

/// Reads the TOML subset used by scenario files into a JSON document:
/// [tables], [[arrays of tables]], dotted and quoted keys, strings,
/// integers, floats, booleans, (nested, multi-line) arrays and inline tables.
/// Dates and multi-line strings are not supported. Throws ConfigError with
/// the offending line number.
nlohmann::json parse_toml(const std::string& text);

}  // namespace secfuse
