#pragma once

// Strict JSON schema walking shared by the config parsers: every key must be
// on the allow list, every getter is typed, and errors carry the JSON-pointer
// path of the offending key.

#include <cstdint>
#include <initializer_list>
#include <string>

#include <json.hpp>

#include "qrun/errors.hpp"

namespace qrun::cfg {

[[noreturn]] inline void bad_key(const std::string& path) {
  throw ContractError("config: unknown key \"" + path + "\"");
}

inline void check_keys(const nlohmann::json& j,
                       std::initializer_list<const char*> allowed,
                       const std::string& prefix) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed)
      if (it.key() == a) {
        ok = true;
        break;
      }
    if (!ok) bad_key(prefix + "/" + it.key());
  }
}

inline const nlohmann::json& need(const nlohmann::json& j, const char* key,
                                  const std::string& prefix) {
  auto it = j.find(key);
  if (it == j.end())
    throw ContractError("config: missing key \"" + prefix + "/" + key + "\"");
  return *it;
}

inline int get_int(const nlohmann::json& j, const char* key,
                   const std::string& prefix) {
  const nlohmann::json& v = need(j, key, prefix);
  if (!v.is_number_integer())
    throw ContractError("config: \"" + prefix + "/" + key +
                        "\" must be an integer");
  return v.get<int>();
}

inline int get_int_or(const nlohmann::json& j, const char* key,
                      const std::string& prefix, int fallback) {
  return j.contains(key) ? get_int(j, key, prefix) : fallback;
}

inline std::uint64_t get_u64(const nlohmann::json& j, const char* key,
                             const std::string& prefix) {
  const nlohmann::json& v = need(j, key, prefix);
  if (!(v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0)))
    throw ContractError("config: \"" + prefix + "/" + key +
                        "\" must be a nonnegative integer");
  return v.get<std::uint64_t>();
}

inline std::uint64_t get_u64_or(const nlohmann::json& j, const char* key,
                                const std::string& prefix,
                                std::uint64_t fallback) {
  return j.contains(key) ? get_u64(j, key, prefix) : fallback;
}

inline double get_num(const nlohmann::json& j, const char* key,
                      const std::string& prefix) {
  const nlohmann::json& v = need(j, key, prefix);
  if (!v.is_number())
    throw ContractError("config: \"" + prefix + "/" + key +
                        "\" must be a number");
  return v.get<double>();
}

inline double get_num_or(const nlohmann::json& j, const char* key,
                         const std::string& prefix, double fallback) {
  return j.contains(key) ? get_num(j, key, prefix) : fallback;
}

inline std::string get_str(const nlohmann::json& j, const char* key,
                           const std::string& prefix) {
  const nlohmann::json& v = need(j, key, prefix);
  if (!v.is_string())
    throw ContractError("config: \"" + prefix + "/" + key +
                        "\" must be a string");
  return v.get<std::string>();
}

inline std::string get_str_or(const nlohmann::json& j, const char* key,
                              const std::string& prefix,
                              const std::string& fallback) {
  return j.contains(key) ? get_str(j, key, prefix) : fallback;
}

}  // namespace qrun::cfg
