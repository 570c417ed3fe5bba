// INI-style run configuration: [section] blocks of key = value pairs,
// addressed as dotted "section.key" paths.
#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace clpds {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Config {
 public:
  Config() = default;

  static Config from_file(const std::filesystem::path& path);
  static Config from_string(const std::string& text);

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  std::string require_string(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  double require_double(const std::string& key) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  void set(const std::string& key, const std::string& value);

  /// Applies "section.key=value" override strings; unknown keys (not in
  /// `known`) raise a ConfigError naming the key.
  void apply_overrides(const std::vector<std::string>& overrides,
                       const std::vector<std::string>& known);

  /// Serialized INI text, sections sorted, keys sorted within a section.
  std::string serialize() const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace clpds
