#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace intent {

/// One `key=value` line of a flat config file.
struct ConfigEntry {
  std::string key;
  std::string value;
  int line = 0;
};

/// Parses flat key=value text. Blank lines and '#' comments are skipped;
/// whitespace around keys and values is trimmed. Throws ParseError naming the
/// line for anything else.
std::vector<ConfigEntry> parse_config(std::istream& in, const std::string& source = "<config>");
std::vector<ConfigEntry> parse_config_file(const std::string& path);

// Strict value parsers; throw ConfigError mentioning `key` on bad input.
double parse_double(const std::string& key, const std::string& value);
std::int64_t parse_int(const std::string& key, const std::string& value);
std::uint64_t parse_u64(const std::string& key, const std::string& value);
bool parse_bool(const std::string& key, const std::string& value);

std::string format_double(double v);

}  // namespace intent
