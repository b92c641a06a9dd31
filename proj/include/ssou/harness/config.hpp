// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace ssou::harness {

/**
 * @brief Flat `key = value` configuration.
 *
 * One pair per line; `#` starts a comment; blank lines are ignored. Lists
 * are comma-separated. Getters record the defaults they fall back to, so
 * values() and hash() describe the effective configuration once every key
 * has been resolved.
 */
class Config {
public:
  static Config parse(std::string_view text, std::string_view origin = "<config>");
  static Config load(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key, const std::string& fallback) const;
  std::vector<int> get_ints(const std::string& key, const std::string& fallback) const;
  /// Comma-separated items; commas inside parentheses do not split.
  std::vector<std::string> get_list(const std::string& key, const std::string& fallback) const;

  const std::map<std::string, std::string>& values() const { return values_; }
  /// Keys present in the file that no getter asked for.
  std::vector<std::string> unused_keys() const;
  /// FNV-1a of the canonical "key=value\n" listing.
  std::uint64_t hash() const;

private:
  mutable std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
  std::string origin_;

  const std::string& raw(const std::string& key, const std::string& fallback) const;
};

std::string format_double(double v);
std::string hex64(std::uint64_t v);

}  // namespace ssou::harness
