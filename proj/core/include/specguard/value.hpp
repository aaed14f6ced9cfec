#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace specguard {

/// Marker for a path that is not present in a document. Distinct from null,
/// which is a present JSON null literal.
struct Absent {
  bool operator==(const Absent&) const = default;
};

class Value;
using Array = std::vector<Value>;
using Object = std::map<std::string, Value, std::less<>>;

enum class ValueKind { Absent, Null, Boolean, Integer, Real, Text, Array, Object };

std::string_view to_string(ValueKind kind);

/// Request/response data as seen by validators.
class Value {
 public:
  Value() = default;
  Value(Absent) {}
  Value(std::nullptr_t) : data_(nullptr) {}
  Value(bool b) : data_(b) {}
  Value(int i) : data_(static_cast<std::int64_t>(i)) {}
  Value(std::int64_t i) : data_(i) {}
  Value(double d) : data_(d) {}
  Value(const char* s) : data_(std::string(s)) {}
  Value(std::string s) : data_(std::move(s)) {}
  Value(std::string_view s) : data_(std::string(s)) {}
  Value(Array a) : data_(std::move(a)) {}
  Value(Object o) : data_(std::move(o)) {}

  ValueKind kind() const noexcept { return static_cast<ValueKind>(data_.index()); }

  bool is_absent() const noexcept { return kind() == ValueKind::Absent; }
  bool is_null() const noexcept { return kind() == ValueKind::Null; }
  bool is_missing() const noexcept { return is_absent() || is_null(); }
  bool is_bool() const noexcept { return kind() == ValueKind::Boolean; }
  bool is_integer() const noexcept { return kind() == ValueKind::Integer; }
  bool is_real() const noexcept { return kind() == ValueKind::Real; }
  bool is_number() const noexcept { return is_integer() || is_real(); }
  bool is_text() const noexcept { return kind() == ValueKind::Text; }
  bool is_array() const noexcept { return kind() == ValueKind::Array; }
  bool is_object() const noexcept { return kind() == ValueKind::Object; }
  bool is_scalar() const noexcept { return is_bool() || is_number() || is_text() || is_null(); }

  bool as_bool() const { return std::get<bool>(data_); }
  std::int64_t as_integer() const { return std::get<std::int64_t>(data_); }
  double as_real() const { return std::get<double>(data_); }
  /// Integer or real widened to double.
  double as_number() const;
  const std::string& as_text() const { return std::get<std::string>(data_); }
  const Array& as_array() const { return std::get<Array>(data_); }
  const Object& as_object() const { return std::get<Object>(data_); }
  Array& as_array() { return std::get<Array>(data_); }
  Object& as_object() { return std::get<Object>(data_); }

  /// Field lookup; absent for non-objects and missing keys.
  const Value& field(std::string_view key) const;

  bool operator==(const Value& other) const { return data_ == other.data_; }

  /// Absent fields inside objects are dropped; a top-level absent becomes null.
  nlohmann::json to_json() const;
  static Value from_json(const nlohmann::json& j);
  static Value from_json(const nlohmann::ordered_json& j);

  /// Compact JSON rendering for diagnostics; absent renders as `<absent>`.
  std::string render() const;

 private:
  std::variant<Absent, std::nullptr_t, bool, std::int64_t, double, std::string, Array, Object> data_;
};

const Value& absent_value();

}  // namespace specguard
