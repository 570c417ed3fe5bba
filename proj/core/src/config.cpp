#include "clpds/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace clpds {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

Config Config::from_file(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config: " + path.string());
  std::ostringstream buf;
  buf << f.rdbuf();
  return from_string(buf.str());
}

Config Config::from_string(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line, section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config line " + std::to_string(lineno) +
                          ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    cfg.values_[section.empty() ? key : section + "." + key] = val;
  }
  return cfg;
}

std::string Config::get_string(const std::string& key,
                               const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

std::string Config::require_string(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end())
    throw ConfigError("missing required config key '" + key + "'");
  return it->second;
}

double Config::require_double(const std::string& key) const {
  const std::string s = require_string(key);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw ConfigError("config key '" + key + "': malformed number '" + s + "'");
  return v;
}

double Config::get_double(const std::string& key, double fallback) const {
  return has(key) ? require_double(key) : fallback;
}

int Config::get_int(const std::string& key, int fallback) const {
  if (!has(key)) return fallback;
  const double v = require_double(key);
  return static_cast<int>(v);
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string s = require_string(key);
  if (s == "true" || s == "on" || s == "1") return true;
  if (s == "false" || s == "off" || s == "0") return false;
  throw ConfigError("config key '" + key + "': expected boolean, got '" + s +
                    "'");
}

void Config::set(const std::string& key, const std::string& value) {
  values_[key] = value;
}

void Config::apply_overrides(const std::vector<std::string>& overrides,
                             const std::vector<std::string>& known) {
  for (const auto& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos)
      throw ConfigError("override '" + ov + "': expected key=value");
    const std::string key = trim(ov.substr(0, eq));
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ConfigError("unknown config key '" + key + "'");
    values_[key] = trim(ov.substr(eq + 1));
  }
}

std::string Config::serialize() const {
  std::ostringstream out;
  std::string section;
  bool first = true;
  for (const auto& [key, val] : values_) {
    const auto dot = key.find('.');
    const std::string sec = dot == std::string::npos ? "" : key.substr(0, dot);
    const std::string name = dot == std::string::npos ? key : key.substr(dot + 1);
    if (sec != section || first) {
      if (!first) out << '\n';
      if (!sec.empty()) out << '[' << sec << "]\n";
      section = sec;
      first = false;
    }
    out << name << " = " << val << '\n';
  }
  return out.str();
}

}  // namespace clpds
