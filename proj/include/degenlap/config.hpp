#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace degenlap::config {

/// Flat view of a sectioned `key = value` file; keys are "section.key".
///
/// '#' starts a comment, values may be double-quoted, and lists are
/// comma-separated. Parse and conversion failures raise ConfigError.
class Config {
 public:
  static Config parse(const std::string& text, const std::string& origin = "<string>");
  static Config load(const std::string& path);

  [[nodiscard]] bool has(const std::string& key) const { return values_.count(key) != 0; }
  [[nodiscard]] std::string get_string(const std::string& key, const std::string& fallback) const;
  [[nodiscard]] std::optional<std::string> find(const std::string& key) const;
  [[nodiscard]] double get_double(const std::string& key, double fallback) const;
  [[nodiscard]] std::optional<double> find_double(const std::string& key) const;
  [[nodiscard]] long get_int(const std::string& key, long fallback) const;
  [[nodiscard]] std::vector<double> get_list(const std::string& key) const;
  [[nodiscard]] std::vector<std::string> get_strings(const std::string& key) const;

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  [[nodiscard]] const std::map<std::string, std::string>& values() const { return values_; }
  [[nodiscard]] const std::string& origin() const { return origin_; }

  /// ConfigError naming the first key outside `known`.
  void require_known(const std::vector<std::string>& known) const;

 private:
  std::map<std::string, std::string> values_;
  std::map<std::string, int> lines_;
  std::string origin_;
};

}  // namespace degenlap::config
