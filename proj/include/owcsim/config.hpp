#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

// Nested key/value configuration: "[section]" headers, "key = value" lines,
// '#' or ';' comments. Values are parsed on demand through typed getters.

namespace owcsim::cfg {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

class Config {
 public:
  Config() = default;

  static Config parse(const std::string& text) {
    Config c;
    c.raw_text_ = text;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      // '#' comments anywhere; ';' only opens a comment at line start (it
      // separates tuples inside values).
      auto cut = line.find('#');
      if (cut != std::string::npos) line = line.substr(0, cut);
      line = trim(line);
      if (line.empty() || line.front() == ';') continue;
      if (line.front() == '[') {
        if (line.back() != ']')
          throw ConfigError("config: bad section header at line " + std::to_string(lineno));
        section = trim(line.substr(1, line.size() - 2));
        continue;
      }
      auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError("config: expected key=value at line " + std::to_string(lineno));
      std::string key = trim(line.substr(0, eq));
      std::string value = trim(line.substr(eq + 1));
      if (key.empty()) throw ConfigError("config: empty key at line " + std::to_string(lineno));
      c.values_[section + "." + key] = value;
    }
    return c;
  }

  static Config load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("config: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("config: missing key " + key);
    return it->second;
  }
  std::string get_string_or(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double get_double(const std::string& key) const { return to_double(key, get_string(key)); }
  double get_double_or(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
  }

  long long get_int(const std::string& key) const {
    const std::string s = get_string(key);
    try {
      std::size_t pos = 0;
      long long v = std::stoll(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("config: key " + key + " is not an integer: " + s);
    }
  }
  long long get_int_or(const std::string& key, long long fallback) const {
    return has(key) ? get_int(key) : fallback;
  }

  std::vector<double> get_doubles(const std::string& key) const {
    std::vector<double> out;
    std::istringstream in(get_string(key));
    std::string tok;
    while (std::getline(in, tok, ',')) {
      tok = trim(tok);
      if (!tok.empty()) out.push_back(to_double(key, tok));
    }
    return out;
  }

  // Semicolon-separated tuples of comma-separated numbers.
  std::vector<std::vector<double>> get_tuples(const std::string& key) const {
    std::vector<std::vector<double>> out;
    std::istringstream in(get_string(key));
    std::string group;
    while (std::getline(in, group, ';')) {
      group = trim(group);
      if (group.empty()) continue;
      std::vector<double> tuple;
      std::istringstream gin(group);
      std::string tok;
      while (std::getline(gin, tok, ',')) {
        tok = trim(tok);
        if (!tok.empty()) tuple.push_back(to_double(key, tok));
      }
      out.push_back(std::move(tuple));
    }
    return out;
  }

  const std::string& raw_text() const { return raw_text_; }

 private:
  static double to_double(const std::string& key, const std::string& s) {
    try {
      std::size_t pos = 0;
      double v = std::stod(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("config: key " + key + " is not a number: " + s);
    }
  }

  std::map<std::string, std::string> values_;
  std::string raw_text_;
};

}  // namespace owcsim::cfg
