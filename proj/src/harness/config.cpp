// SPDX-License-Identifier: Apache-2.0
#include "ssou/harness/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "ssou/error.hpp"
#include "ssou/random.hpp"

namespace ssou::harness {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T v{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw InvalidParameter("config key '" + key + "': cannot parse '" + text + "'");
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v, 16);
  std::string s(buf, end);
  return std::string(16 - s.size(), '0') + s;
}

Config Config::parse(std::string_view text, std::string_view origin) {
  Config cfg;
  cfg.origin_ = origin;
  std::istringstream in{std::string(text)};
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      std::ostringstream msg;
      msg << origin << ":" << lineno << ": expected key = value";
      throw InvalidParameter(msg.str());
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    if (key.empty()) throw InvalidParameter(std::string(origin) + ": empty key");
    if (cfg.values_.count(key)) throw InvalidParameter(std::string(origin) + ": duplicate key " + key);
    cfg.values_[key] = trim(std::string_view(body).substr(eq + 1));
  }
  return cfg;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidParameter("cannot open config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse(text.str(), path.string());
}

void Config::set(const std::string& key, const std::string& value) { values_[key] = value; }

const std::string& Config::raw(const std::string& key, const std::string& fallback) const {
  used_.insert(key);
  auto [it, inserted] = values_.try_emplace(key, fallback);
  return it->second;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  return raw(key, fallback);
}

double Config::get_double(const std::string& key, double fallback) const {
  return parse_number<double>(key, raw(key, format_double(fallback)));
}

long long Config::get_int(const std::string& key, long long fallback) const {
  return parse_number<long long>(key, raw(key, std::to_string(fallback)));
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
  return parse_number<std::uint64_t>(key, raw(key, std::to_string(fallback)));
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  const std::string& v = raw(key, fallback ? "true" : "false");
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw InvalidParameter("config key '" + key + "': expected a boolean, got '" + v + "'");
}

std::vector<std::string> Config::get_list(const std::string& key, const std::string& fallback) const {
  const std::string& v = raw(key, fallback);
  std::vector<std::string> out;
  int depth = 0;
  std::string item;
  for (char ch : v) {
    if (ch == '(') ++depth;
    if (ch == ')') --depth;
    if (ch == ',' && depth == 0) {
      out.push_back(trim(item));
      item.clear();
    } else {
      item += ch;
    }
  }
  if (!trim(item).empty() || !out.empty()) out.push_back(trim(item));
  for (const auto& s : out)
    if (s.empty()) throw InvalidParameter("config key '" + key + "': empty list item");
  return out;
}

std::vector<double> Config::get_doubles(const std::string& key, const std::string& fallback) const {
  std::vector<double> out;
  for (const auto& s : get_list(key, fallback)) out.push_back(parse_number<double>(key, s));
  return out;
}

std::vector<int> Config::get_ints(const std::string& key, const std::string& fallback) const {
  std::vector<int> out;
  for (const auto& s : get_list(key, fallback)) out.push_back(parse_number<int>(key, s));
  return out;
}

std::vector<std::string> Config::unused_keys() const {
  std::vector<std::string> out;
  for (const auto& [key, value] : values_)
    if (!used_.count(key)) out.push_back(key);
  return out;
}

std::uint64_t Config::hash() const {
  std::uint64_t h = fnv1a("");
  for (const auto& [key, value] : values_) {
    h = fnv1a(key, h);
    h = fnv1a("=", h);
    h = fnv1a(value, h);
    h = fnv1a("\n", h);
  }
  return h;
}

}  // namespace ssou::harness
