#pragma once

#include <compare>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "specguard/property_path.hpp"
#include "specguard/value.hpp"

namespace specguard {

/// Operation identity: upper-case HTTP verb plus the path template.
struct OperationId {
  std::string method;
  std::string path;

  std::string render() const { return method + " " + path; }
  auto operator<=>(const OperationId&) const = default;
};

enum class ParamLocation { Query, Path, Header, Cookie, Body };
std::string_view to_string(ParamLocation loc);

enum class PrimitiveType { String, Integer, Number, Boolean, Array, Object, Null, Unknown };
std::string_view to_string(PrimitiveType t);
PrimitiveType primitive_from_string(std::string_view s);

struct ParamSpec {
  std::string name;  // wire name; anyOf alternatives carry a bracket suffix, e.g. created[gt]
  ParamLocation location = ParamLocation::Query;
  std::optional<std::string> description;
  PrimitiveType declared_type = PrimitiveType::Unknown;
  nlohmann::json schema_fragment;  // resolved schema subtree (null when trivial)
};

struct PropertySpec {
  PropertyPath path;
  std::optional<std::string> description;
  PrimitiveType declared_type = PrimitiveType::Unknown;
  std::optional<std::string> format_hint;
  std::optional<Value> example;
  bool nullable = false;
  /// Set when flattening stopped at the depth cap; the entry stands for an
  /// unexpanded subtree.
  bool truncated = false;
};

struct OperationSpec {
  OperationId id;
  std::optional<std::string> description;
  std::vector<ParamSpec> parameters;
  std::vector<ParamSpec> request_body_fields;
  /// Status-code pattern (`200`, `2XX`) -> flattened leaf properties.
  std::map<std::string, std::vector<PropertySpec>> responses;
  /// Interior object/array nodes of each response schema, used for nullability lookups.
  std::map<std::string, std::vector<PropertySpec>> response_containers;
  /// Status-code pattern -> component schema name when the response is a `$ref`.
  std::map<std::string, std::string> response_schema_names;

  /// Request parameters and body fields, in declaration order.
  std::vector<const ParamSpec*> all_inputs() const;
  /// First success status (`200` preferred, then other 2xx, then `2XX`); empty if none.
  std::string success_status() const;
  /// Leaf or container entry with exactly this path for the status, if any.
  const PropertySpec* find_property(std::string_view status, const PropertyPath& path) const;
};

struct ApiSpec {
  std::string title;
  std::string version;
  std::vector<OperationSpec> operations;
  std::map<std::string, std::vector<PropertySpec>> schemas;
  std::map<std::string, std::vector<std::string>> raw_description_index;

  const OperationSpec* find_operation(const OperationId& id) const;
};

enum class SpecFormat { Yaml, Json };

struct LoadOptions {
  /// Maximum object nesting depth before flattening emits a truncated entry.
  int max_depth = 3;
  /// Throw CycleDepthExceeded instead of truncating when a `$ref` cycle hits the cap.
  bool strict = false;
};

ApiSpec load_spec(const std::filesystem::path& source, const LoadOptions& options = {});
/// Format is taken from the argument; the document must declare `openapi: 3.x`.
ApiSpec load_spec(std::string_view bytes, SpecFormat format, const LoadOptions& options = {});

/// Leaf properties of `op`'s response schema for `status`. Throws NoSuchResponse.
const std::vector<PropertySpec>& flatten_response_schema(const OperationSpec& op, std::string_view status);

/// Fallback description lookup for a name whose local description is absent.
/// Search order: the context operation's other inputs, then every component
/// schema (sorted by schema name, properties in declaration order) matching on
/// the leaf name, then the document-wide description index. First hit wins.
std::optional<std::string> find_exact_match_description(const ApiSpec& spec, std::string_view name,
                                                         const OperationSpec* context = nullptr);

/// Canonical JSON (sorted keys) for golden tests; from_canonical_json inverts it.
nlohmann::json to_canonical_json(const ApiSpec& spec);
ApiSpec from_canonical_json(const nlohmann::json& j);
/// Sorts operations by (path, method) and orders maps; idempotent.
ApiSpec normalize(ApiSpec spec);

/// Prompt-ready listing of a flattened schema, one `path (type): description` line each.
std::string render_schema_listing(const std::vector<PropertySpec>& props);

}  // namespace specguard
