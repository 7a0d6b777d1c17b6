#include "puck/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace puck {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

KvConfig KvConfig::parse(const std::string& text) {
  KvConfig cfg;
  std::istringstream in(text);
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    cfg.values_[key] = value;
  }
  return cfg;
}

KvConfig KvConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse(content);
}

std::string KvConfig::get_string(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing config key: " + key);
  return it->second;
}

std::string KvConfig::get_string(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double KvConfig::get_double(const std::string& key) const {
  std::string v = get_string(key);
  char* end = nullptr;
  double d = strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0')
    throw ConfigError("config key " + key + " is not a number: " + v);
  return d;
}

double KvConfig::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

long long KvConfig::get_int(const std::string& key) const {
  std::string v = get_string(key);
  char* end = nullptr;
  long long i = strtoll(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0')
    throw ConfigError("config key " + key + " is not an integer: " + v);
  return i;
}

long long KvConfig::get_int(const std::string& key, long long fallback) const {
  return has(key) ? get_int(key) : fallback;
}

bool KvConfig::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  std::string v = get_string(key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("config key " + key + " is not a boolean: " + v);
}

void KvConfig::set(const std::string& key, double value) {
  char tmp[40];
  snprintf(tmp, sizeof(tmp), "%.10g", value);
  values_[key] = tmp;
}

std::string KvConfig::to_string() const {
  std::string out;
  for (const auto& [k, v] : values_) {
    out += k;
    out += " = ";
    out += v;
    out += "\n";
  }
  return out;
}

void KvConfig::save(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("cannot open " + path + " for writing");
  out << to_string();
  if (!out) throw ConfigError("write failure on " + path);
}

uint64_t fnv1a64(const std::string& data) {
  uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace puck
