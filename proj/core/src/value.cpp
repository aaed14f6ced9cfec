#include "specguard/value.hpp"

namespace specguard {

std::string_view to_string(ValueKind kind) {
  switch (kind) {
    case ValueKind::Absent: return "absent";
    case ValueKind::Null: return "null";
    case ValueKind::Boolean: return "boolean";
    case ValueKind::Integer: return "integer";
    case ValueKind::Real: return "real";
    case ValueKind::Text: return "text";
    case ValueKind::Array: return "array";
    case ValueKind::Object: return "object";
  }
  return "?";
}

const Value& absent_value() {
  static const Value absent;
  return absent;
}

double Value::as_number() const {
  if (is_integer()) return static_cast<double>(as_integer());
  return as_real();
}

const Value& Value::field(std::string_view key) const {
  if (!is_object()) return absent_value();
  const auto& obj = as_object();
  auto it = obj.find(key);
  return it == obj.end() ? absent_value() : it->second;
}

nlohmann::json Value::to_json() const {
  switch (kind()) {
    case ValueKind::Absent:
    case ValueKind::Null: return nullptr;
    case ValueKind::Boolean: return as_bool();
    case ValueKind::Integer: return as_integer();
    case ValueKind::Real: return as_real();
    case ValueKind::Text: return as_text();
    case ValueKind::Array: {
      auto out = nlohmann::json::array();
      for (const auto& v : as_array()) out.push_back(v.to_json());
      return out;
    }
    case ValueKind::Object: {
      auto out = nlohmann::json::object();
      for (const auto& [k, v] : as_object()) {
        if (!v.is_absent()) out[k] = v.to_json();
      }
      return out;
    }
  }
  return nullptr;
}

namespace {

template <typename Json>
Value convert(const Json& j) {
  switch (j.type()) {
    case Json::value_t::null: return Value(nullptr);
    case Json::value_t::boolean: return Value(j.template get<bool>());
    case Json::value_t::number_integer: return Value(j.template get<std::int64_t>());
    case Json::value_t::number_unsigned: {
      auto u = j.template get<std::uint64_t>();
      if (u > static_cast<std::uint64_t>(INT64_MAX)) return Value(static_cast<double>(u));
      return Value(static_cast<std::int64_t>(u));
    }
    case Json::value_t::number_float: return Value(j.template get<double>());
    case Json::value_t::string: return Value(j.template get<std::string>());
    case Json::value_t::array: {
      Array out;
      out.reserve(j.size());
      for (const auto& v : j) out.push_back(convert(v));
      return Value(std::move(out));
    }
    case Json::value_t::object: {
      Object out;
      for (auto it = j.begin(); it != j.end(); ++it) out.emplace(it.key(), convert(it.value()));
      return Value(std::move(out));
    }
    default: return Value(nullptr);
  }
}

}  // namespace

Value Value::from_json(const nlohmann::json& j) { return convert(j); }
Value Value::from_json(const nlohmann::ordered_json& j) { return convert(j); }

std::string Value::render() const {
  if (is_absent()) return "<absent>";
  return to_json().dump();
}

}  // namespace specguard
