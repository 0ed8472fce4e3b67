#pragma once

// Flat `key=value` configuration text. Blank lines and lines starting with '#'
// are ignored; whitespace around keys and values is trimmed.

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

#include "avakit/csv.hpp"
#include "avakit/error.hpp"

namespace avakit {

class KeyValues {
 public:
  static KeyValues parse(std::string_view text) {
    KeyValues kv;
    detail::for_each_line(text, [&](std::size_t row, std::string_view line) {
      line = trim(line);
      if (line.empty() || line.front() == '#') return;
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) throw ParseError(row, "expected key=value");
      const auto key = std::string(trim(line.substr(0, eq)));
      if (key.empty()) throw ParseError(row, "empty key");
      if (!kv.values_.emplace(key, std::string(trim(line.substr(eq + 1)))).second) {
        throw ParseError(row, "duplicate key '" + key + "'");
      }
    });
    return kv;
  }

  const std::map<std::string, std::string>& values() const noexcept { return values_; }

  bool contains(const std::string& key) const { return values_.contains(key); }

  double get_double(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : to_double(key, it->second);
  }

  std::int64_t get_int(const std::string& key, std::int64_t fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : to_int(key, it->second);
  }

  std::uint64_t require_seed() const {
    auto it = values_.find("seed");
    if (it == values_.end()) throw ConfigError("spec file must set 'seed'");
    std::uint64_t v = 0;
    const auto* end = it->second.data() + it->second.size();
    auto [ptr, ec] = std::from_chars(it->second.data(), end, v);
    if (ec != std::errc{} || ptr != end) throw ConfigError("seed must be a non-negative integer");
    return v;
  }

  static double to_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    if (!detail::parse_number(v, out)) throw ConfigError("'" + key + "' is not a number: " + v);
    return out;
  }

  static std::int64_t to_int(const std::string& key, const std::string& v) {
    std::int64_t out = 0;
    if (!detail::parse_number(v, out)) throw ConfigError("'" + key + "' is not an integer: " + v);
    return out;
  }

 private:
  static std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
  }

  std::map<std::string, std::string> values_;
};

}  // namespace avakit
