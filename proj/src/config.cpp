#include "intent/config.hpp"

#include <charconv>
#include <fstream>
#include <istream>

#include "intent/errors.hpp"

namespace intent {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value, const char* what) {
  T out{};
  const char* first = value.data();
  const char* last = first + value.size();
  if (!value.empty() && value.front() == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last || first == last) {
    throw ConfigError("key '" + key + "': expected " + what + ", got '" + value + "'");
  }
  return out;
}

}  // namespace

std::vector<ConfigEntry> parse_config(std::istream& in, const std::string& source) {
  std::vector<ConfigEntry> out;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw ParseError(source + ":" + std::to_string(line) + ": expected key=value, got '" + text + "'");
    }
    ConfigEntry e{trim(text.substr(0, eq)), trim(text.substr(eq + 1)), line};
    if (e.key.empty()) throw ParseError(source + ":" + std::to_string(line) + ": empty key");
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<ConfigEntry> parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  return parse_config(in, path);
}

double parse_double(const std::string& key, const std::string& value) {
  return parse_number<double>(key, value, "a number");
}

std::int64_t parse_int(const std::string& key, const std::string& value) {
  return parse_number<std::int64_t>(key, value, "an integer");
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  if (!value.empty() && value.front() == '-') {
    throw ConfigError("key '" + key + "': expected a non-negative integer, got '" + value + "'");
  }
  return parse_number<std::uint64_t>(key, value, "a non-negative integer");
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "Y" || value == "y") return true;
  if (value == "false" || value == "0" || value == "no" || value == "N" || value == "n") return false;
  throw ConfigError("key '" + key + "': expected a boolean, got '" + value + "'");
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace intent
