#pragma once

// Field access helpers for schema validation with JSON-path style messages.

#include <cmath>
#include <cstdint>
#include <string>

#include "abft_guard/errors.hpp"
#include "json.hpp"

namespace abft_guard::detail {

using Json = nlohmann::ordered_json;

inline std::string join_path(const std::string& parent, const std::string& key) {
  return parent.empty() ? key : parent + "." + key;
}

inline std::string index_path(const std::string& parent, std::size_t i) {
  return parent + "[" + std::to_string(i) + "]";
}

inline Json parse_json(std::string_view text) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    throw ValidationError("", std::string("malformed JSON: ") + e.what());
  }
}

inline const Json& require_object(const Json& j, const std::string& path) {
  if (!j.is_object()) throw ValidationError(path.empty() ? "$" : path, "expected an object");
  return j;
}

inline const Json& require(const Json& j, const std::string& parent, const std::string& key) {
  require_object(j, parent);
  const auto it = j.find(key);
  if (it == j.end()) throw ValidationError(join_path(parent, key), "missing required field");
  return *it;
}

inline std::int64_t as_int(const Json& j, const std::string& path, std::int64_t min_value) {
  if (!j.is_number_integer()) throw ValidationError(path, "expected an integer");
  const auto v = j.get<std::int64_t>();
  if (v < min_value) throw ValidationError(path, "must be >= " + std::to_string(min_value));
  return v;
}

inline std::uint64_t as_uint(const Json& j, const std::string& path) {
  if (!j.is_number_integer() || (j.is_number_integer() && !j.is_number_unsigned() && j.get<std::int64_t>() < 0)) {
    throw ValidationError(path, "expected a non-negative integer");
  }
  return j.get<std::uint64_t>();
}

inline double as_number(const Json& j, const std::string& path) {
  if (!j.is_number()) throw ValidationError(path, "expected a number");
  return j.get<double>();
}

inline double as_positive(const Json& j, const std::string& path) {
  const double v = as_number(j, path);
  if (!(v > 0.0)) throw ValidationError(path, "must be > 0");
  return v;
}

inline std::string as_string(const Json& j, const std::string& path) {
  if (!j.is_string()) throw ValidationError(path, "expected a string");
  return j.get<std::string>();
}

inline bool as_bool(const Json& j, const std::string& path) {
  if (!j.is_boolean()) throw ValidationError(path, "expected a boolean");
  return j.get<bool>();
}

inline void check_schema_version(const Json& j) {
  require_object(j, "");
  const auto it = j.find("schema_version");
  if (it == j.end()) return;
  if (as_int(*it, "schema_version", 1) != 1) {
    throw ValidationError("schema_version", "unsupported version (expected 1)");
  }
}

/// JSON null for non-finite values, the number otherwise.
inline Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace abft_guard::detail
