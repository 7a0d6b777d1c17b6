#pragma once

#include <map>
#include <string>

#include "puck/types.hpp"

namespace puck {

/// Flat `key = value` config file. Lines starting with '#' are comments.
/// Lookups with a default never throw; lookups without one throw ConfigError
/// when the key is missing or malformed.
class KvConfig {
 public:
  KvConfig() = default;

  static KvConfig parse(const std::string& text);
  static KvConfig parse_file(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  void set(const std::string& key, double value);
  void set(const std::string& key, long long value) { values_[key] = std::to_string(value); }

  std::string to_string() const;
  void save(const std::string& path) const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

/// FNV-1a 64-bit digest, used to fingerprint config inputs in run manifests.
uint64_t fnv1a64(const std::string& data);

}  // namespace puck
