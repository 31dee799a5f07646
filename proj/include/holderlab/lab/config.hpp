#pragma once

// INI experiment configs. Every value an experiment reads is recorded so the
// report can echo the fully resolved parameter set; keys nobody read are an error.

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "holderlab/error.hpp"

namespace holderlab::lab {

/// The config file is malformed or a parameter is out of range (exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size() || !std::isfinite(v)) {
    throw ConfigError("config: " + key + " = '" + t + "' is not a finite number");
  }
  return v;
}

inline long long parse_int(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  long long v = 0;
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size()) {
    throw ConfigError("config: " + key + " = '" + t + "' is not an integer");
  }
  return v;
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size()) {
    throw ConfigError("config: " + key + " = '" + t + "' is not an unsigned 64-bit integer");
  }
  return v;
}

inline std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace detail

class Config {
 public:
  static Config from_file(const std::filesystem::path& path) {
    boost::property_tree::ptree tree;
    try {
      boost::property_tree::ini_parser::read_ini(path.string(), tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
    return Config(std::move(tree));
  }

  static Config from_string(const std::string& text) {
    boost::property_tree::ptree tree;
    std::istringstream is(text);
    try {
      boost::property_tree::ini_parser::read_ini(is, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
    return Config(std::move(tree));
  }

  explicit Config(boost::property_tree::ptree tree) : tree_(std::move(tree)) {
    for (const auto& [section, body] : tree_) {
      if (body.empty()) throw ConfigError("config: key '" + section + "' must sit inside a [section]");
      for (const auto& [key, value] : body) {
        (void)value;
        all_keys_.insert(section + "." + key);
      }
    }
  }

  bool has(const std::string& key) const { return tree_.get_optional<std::string>(key).has_value(); }

  /// Forces a value, as a command-line override does.
  void set(const std::string& key, const std::string& value) {
    tree_.put(key, value);
    all_keys_.insert(key);
  }

  std::string get_string(const std::string& key, std::optional<std::string> fallback = std::nullopt) {
    const auto v = raw(key, fallback);
    echo(key, v);
    return v;
  }

  std::string get_choice(const std::string& key, const std::vector<std::string>& choices,
                         std::optional<std::string> fallback = std::nullopt) {
    const auto v = detail::trim(raw(key, fallback));
    bool ok = false;
    std::string list;
    for (const auto& c : choices) {
      ok = ok || v == c;
      list += (list.empty() ? "" : ", ") + c;
    }
    if (!ok) throw ConfigError("config: " + key + " = '" + v + "' is not one of {" + list + "}");
    echo(key, v);
    return v;
  }

  double get_double(const std::string& key, std::optional<double> fallback = std::nullopt,
                    double lo = -std::numeric_limits<double>::infinity(),
                    double hi = std::numeric_limits<double>::infinity()) {
    const double v = has(key) ? detail::parse_double(key, raw(key, std::nullopt)) : require_fallback(key, fallback);
    if (!(v >= lo && v <= hi)) {
      throw ConfigError("config: " + key + " = " + number(v) + " lies outside [" + number(lo) + ", " + number(hi) +
                        "]");
    }
    echo(key, v);
    return v;
  }

  long long get_int(const std::string& key, std::optional<long long> fallback = std::nullopt,
                    long long lo = std::numeric_limits<long long>::min(),
                    long long hi = std::numeric_limits<long long>::max()) {
    const long long v = has(key) ? detail::parse_int(key, raw(key, std::nullopt)) : require_fallback(key, fallback);
    if (v < lo || v > hi) {
      throw ConfigError("config: " + key + " = " + std::to_string(v) + " lies outside [" + std::to_string(lo) + ", " +
                        std::to_string(hi) + "]");
    }
    echo(key, v);
    return v;
  }

  std::uint64_t get_u64(const std::string& key, std::optional<std::uint64_t> fallback = std::nullopt) {
    const std::uint64_t v = has(key) ? detail::parse_u64(key, raw(key, std::nullopt)) : require_fallback(key, fallback);
    echo(key, v);
    return v;
  }

  bool get_bool(const std::string& key, std::optional<bool> fallback = std::nullopt) {
    bool v = false;
    if (has(key)) {
      const auto t = detail::trim(raw(key, std::nullopt));
      if (t == "true" || t == "1" || t == "yes") {
        v = true;
      } else if (t == "false" || t == "0" || t == "no") {
        v = false;
      } else {
        throw ConfigError("config: " + key + " = '" + t + "' is not a boolean");
      }
    } else {
      v = require_fallback(key, fallback);
    }
    echo(key, v);
    return v;
  }

  /// Comma-separated list of numbers.
  std::vector<double> get_doubles(const std::string& key, std::optional<std::vector<double>> fallback = std::nullopt) {
    std::vector<double> v;
    if (has(key)) {
      for (const auto& item : detail::split_list(raw(key, std::nullopt))) v.push_back(detail::parse_double(key, item));
      if (v.empty()) throw ConfigError("config: " + key + " is an empty list");
    } else {
      v = require_fallback(key, fallback);
    }
    echo(key, v);
    return v;
  }

  /// Comma-separated seeds; "a..b" expands to the inclusive range.
  std::vector<std::uint64_t> get_seeds(const std::string& key, std::optional<std::vector<std::uint64_t>> fallback) {
    std::vector<std::uint64_t> v;
    if (has(key)) {
      for (const auto& item : detail::split_list(raw(key, std::nullopt))) {
        const auto dots = item.find("..");
        if (dots == std::string::npos) {
          v.push_back(detail::parse_u64(key, item));
        } else {
          const auto a = detail::parse_u64(key, item.substr(0, dots)), b = detail::parse_u64(key, item.substr(dots + 2));
          if (b < a || b - a > 100000) throw ConfigError("config: " + key + " has an invalid range '" + item + "'");
          for (auto s = a; s <= b; ++s) v.push_back(s);
        }
      }
      if (v.empty()) throw ConfigError("config: " + key + " is an empty list");
    } else {
      v = require_fallback(key, fallback);
    }
    echo(key, v);
    return v;
  }

  /// Keys present in the file that no experiment parameter consumed.
  void reject_unused() const {
    std::string extra;
    for (const auto& k : all_keys_)
      if (!used_.count(k)) extra += (extra.empty() ? "" : ", ") + k;
    if (!extra.empty()) throw ConfigError("config: unknown or unused keys: " + extra);
  }

  /// Every resolved parameter (defaults included), grouped by section.
  const nlohmann::ordered_json& resolved() const { return resolved_; }

 private:
  std::string raw(const std::string& key, const std::optional<std::string>& fallback) const {
    if (auto v = tree_.get_optional<std::string>(key)) return detail::trim(*v);
    if (fallback) return *fallback;
    throw ConfigError("config: missing required key " + key);
  }

  template <class T>
  T require_fallback(const std::string& key, const std::optional<T>& fallback) const {
    if (!fallback) throw ConfigError("config: missing required key " + key);
    return *fallback;
  }

  template <class T>
  void echo(const std::string& key, const T& v) {
    used_.insert(key);
    const auto dot = key.find('.');
    resolved_[key.substr(0, dot)][key.substr(dot + 1)] = v;
  }

  static std::string number(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
  }

  boost::property_tree::ptree tree_;
  std::set<std::string> all_keys_, used_;
  nlohmann::ordered_json resolved_;
};

}  // namespace holderlab::lab
