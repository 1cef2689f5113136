#include "degenlap/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "degenlap/error.hpp"

namespace degenlap::config {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

std::string unquote(const std::string& v) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return v.substr(1, v.size() - 2);
  return v;
}

std::optional<double> to_double(const std::string& s) {
  const std::string t = trim(s);
  if (t.empty()) return std::nullopt;
  double v = 0.0;
  const auto* end = t.data() + t.size();
  const auto res = std::from_chars(t.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) return std::nullopt;
  return v;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, ',')) {
    cur = unquote(trim(cur));
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

}  // namespace

Config Config::parse(const std::string& text, const std::string& origin) {
  Config cfg;
  cfg.origin_ = origin;
  std::istringstream is(text);
  std::string line;
  std::string section;
  int number = 0;
  auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::ConfigError, origin + ":" + std::to_string(number) + ": " + what);
  };
  while (std::getline(is, line)) {
    ++number;
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) fail("empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) fail("empty key");
    const std::string full = section.empty() ? key : section + "." + key;
    if (cfg.values_.count(full)) fail("duplicate key " + full);
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '[' && value.back() == ']') {
      value = trim(value.substr(1, value.size() - 2));
    } else {
      value = unquote(value);
    }
    cfg.values_[full] = value;
    cfg.lines_[full] = number;
  }
  return cfg;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot read config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

std::optional<std::string> Config::find(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  return find(key).value_or(fallback);
}

std::optional<double> Config::find_double(const std::string& key) const {
  const auto v = find(key);
  if (!v) return std::nullopt;
  const auto d = to_double(*v);
  if (!d) throw Error(ErrorCode::ConfigError, key + " = '" + *v + "' is not a number");
  return d;
}

double Config::get_double(const std::string& key, double fallback) const {
  return find_double(key).value_or(fallback);
}

long Config::get_int(const std::string& key, long fallback) const {
  const auto d = find_double(key);
  if (!d) return fallback;
  if (*d != static_cast<double>(static_cast<long>(*d))) {
    throw Error(ErrorCode::ConfigError, key + " must be an integer");
  }
  return static_cast<long>(*d);
}

std::vector<double> Config::get_list(const std::string& key) const {
  std::vector<double> out;
  const auto v = find(key);
  if (!v) return out;
  for (const auto& item : split_list(*v)) {
    const auto d = to_double(item);
    if (!d) throw Error(ErrorCode::ConfigError, key + " has a non-numeric entry '" + item + "'");
    out.push_back(*d);
  }
  return out;
}

std::vector<std::string> Config::get_strings(const std::string& key) const {
  const auto v = find(key);
  return v ? split_list(*v) : std::vector<std::string>{};
}

void Config::require_known(const std::vector<std::string>& known) const {
  for (const auto& [key, value] : values_) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      const auto line = lines_.count(key) ? ":" + std::to_string(lines_.at(key)) : "";
      throw Error(ErrorCode::ConfigError, origin_ + line + ": unknown key " + key);
    }
  }
}

}  // namespace degenlap::config
