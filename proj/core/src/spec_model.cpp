#include "specguard/spec_model.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>
#include <tuple>

#include <yaml-cpp/yaml.h>

#include "specguard/errors.hpp"

namespace specguard {

using ojson = nlohmann::ordered_json;

std::string_view to_string(ParamLocation loc) {
  switch (loc) {
    case ParamLocation::Query: return "query";
    case ParamLocation::Path: return "path";
    case ParamLocation::Header: return "header";
    case ParamLocation::Cookie: return "cookie";
    case ParamLocation::Body: return "body";
  }
  return "query";
}

namespace {

ParamLocation location_from_string(std::string_view s) {
  if (s == "query") return ParamLocation::Query;
  if (s == "path") return ParamLocation::Path;
  if (s == "header") return ParamLocation::Header;
  if (s == "cookie") return ParamLocation::Cookie;
  if (s == "body") return ParamLocation::Body;
  throw ParseError("unknown parameter location '" + std::string(s) + "'");
}

}  // namespace

std::string_view to_string(PrimitiveType t) {
  switch (t) {
    case PrimitiveType::String: return "string";
    case PrimitiveType::Integer: return "integer";
    case PrimitiveType::Number: return "number";
    case PrimitiveType::Boolean: return "boolean";
    case PrimitiveType::Array: return "array";
    case PrimitiveType::Object: return "object";
    case PrimitiveType::Null: return "null";
    case PrimitiveType::Unknown: return "unknown";
  }
  return "unknown";
}

PrimitiveType primitive_from_string(std::string_view s) {
  if (s == "string") return PrimitiveType::String;
  if (s == "integer") return PrimitiveType::Integer;
  if (s == "number") return PrimitiveType::Number;
  if (s == "boolean") return PrimitiveType::Boolean;
  if (s == "array") return PrimitiveType::Array;
  if (s == "object") return PrimitiveType::Object;
  if (s == "null") return PrimitiveType::Null;
  return PrimitiveType::Unknown;
}

std::vector<const ParamSpec*> OperationSpec::all_inputs() const {
  std::vector<const ParamSpec*> out;
  out.reserve(parameters.size() + request_body_fields.size());
  for (const auto& p : parameters) out.push_back(&p);
  for (const auto& p : request_body_fields) out.push_back(&p);
  return out;
}

std::string OperationSpec::success_status() const {
  if (responses.count("200")) return "200";
  for (const auto& [status, _] : responses) {
    if (status.size() == 3 && status[0] == '2' && std::isdigit(static_cast<unsigned char>(status[1]))) return status;
  }
  if (responses.count("2XX")) return "2XX";
  return {};
}

const PropertySpec* OperationSpec::find_property(std::string_view status, const PropertyPath& path) const {
  for (const auto* table : {&responses, &response_containers}) {
    auto it = table->find(std::string(status));
    if (it == table->end()) continue;
    for (const auto& p : it->second)
      if (p.path == path) return &p;
  }
  return nullptr;
}

const OperationSpec* ApiSpec::find_operation(const OperationId& id) const {
  for (const auto& op : operations)
    if (op.id == id) return &op;
  return nullptr;
}

namespace {

// ---------------------------------------------------------------------------
// Document parsing

bool is_plain_null(const std::string& s) { return s.empty() || s == "~" || s == "null" || s == "Null" || s == "NULL"; }

ojson yaml_scalar(const YAML::Node& node) {
  const std::string& text = node.Scalar();
  // Quoted scalars carry the non-specific tag "!" and are always strings.
  if (node.Tag() == "!") return text;
  if (is_plain_null(text)) return nullptr;
  if (text == "true" || text == "True" || text == "TRUE") return true;
  if (text == "false" || text == "False" || text == "FALSE") return false;
  static const std::regex int_re(R"([-+]?[0-9]+)");
  static const std::regex float_re(R"([-+]?(\.[0-9]+|[0-9]+(\.[0-9]*)?)([eE][-+]?[0-9]+)?)");
  if (std::regex_match(text, int_re)) {
    try {
      return std::stoll(text);
    } catch (const std::out_of_range&) {
      return std::stod(text);
    }
  }
  if (std::regex_match(text, float_re)) return std::stod(text);
  return text;
}

ojson yaml_to_json(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined: return nullptr;
    case YAML::NodeType::Scalar: return yaml_scalar(node);
    case YAML::NodeType::Sequence: {
      ojson arr = ojson::array();
      for (const auto& item : node) arr.push_back(yaml_to_json(item));
      return arr;
    }
    case YAML::NodeType::Map: {
      ojson obj = ojson::object();
      for (const auto& kv : node) obj[kv.first.as<std::string>()] = yaml_to_json(kv.second);
      return obj;
    }
  }
  return nullptr;
}

ojson parse_document(std::string_view bytes, SpecFormat format) {
  try {
    if (format == SpecFormat::Json) return ojson::parse(bytes.begin(), bytes.end());
    return yaml_to_json(YAML::Load(std::string(bytes)));
  } catch (const ojson::parse_error& e) {
    throw ParseError(std::string("malformed JSON document: ") + e.what());
  } catch (const YAML::Exception& e) {
    throw ParseError(std::string("malformed YAML document: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Reference resolution

class Resolver {
 public:
  explicit Resolver(const ojson& doc) : doc_(doc) {}

  const ojson& target(const std::string& ref) const {
    if (ref.rfind("#/", 0) != 0) throw UnresolvedRef(ref);
    try {
      ojson::json_pointer ptr(ref.substr(1));
      if (!doc_.contains(ptr)) throw UnresolvedRef(ref);
      return doc_.at(ptr);
    } catch (const ojson::exception&) {
      throw UnresolvedRef(ref);
    }
  }

  /// Every `$ref` anywhere in the document must resolve.
  void check_all(const ojson& node) const {
    if (node.is_object()) {
      auto it = node.find("$ref");
      if (it != node.end()) {
        if (!it->is_string()) throw ParseError("$ref must be a string");
        (void)target(it->get<std::string>());
      }
      for (const auto& [_, v] : node.items()) check_all(v);
    } else if (node.is_array()) {
      for (const auto& v : node) check_all(v);
    }
  }

  static std::optional<std::string> ref_of(const ojson& node) {
    if (node.is_object()) {
      auto it = node.find("$ref");
      if (it != node.end() && it->is_string()) return it->get<std::string>();
    }
    return std::nullopt;
  }

  /// Follow a `$ref` chain. `chain` receives the refs followed.
  const ojson& deref(const ojson& node, std::vector<std::string>* chain = nullptr) const {
    const ojson* cur = &node;
    std::set<std::string> seen;
    while (auto ref = ref_of(*cur)) {
      if (!seen.insert(*ref).second) throw ParseError("reference loop without structure at " + *ref);
      if (chain) chain->push_back(*ref);
      cur = &target(*ref);
    }
    return *cur;
  }

 private:
  const ojson& doc_;
};

std::string ref_name(const std::string& ref) {
  auto pos = ref.rfind('/');
  return pos == std::string::npos ? ref : ref.substr(pos + 1);
}

std::optional<std::string> opt_string(const ojson& node, const char* key) {
  if (!node.is_object()) return std::nullopt;
  auto it = node.find(key);
  if (it == node.end() || !it->is_string()) return std::nullopt;
  return it->get<std::string>();
}

struct TypeInfo {
  PrimitiveType type = PrimitiveType::Unknown;
  bool nullable = false;
};

TypeInfo type_of(const ojson& schema) {
  TypeInfo info;
  if (!schema.is_object()) return info;
  if (auto it = schema.find("type"); it != schema.end()) {
    if (it->is_string()) {
      info.type = primitive_from_string(it->get<std::string>());
    } else if (it->is_array()) {
      for (const auto& t : *it) {
        if (!t.is_string()) continue;
        auto p = primitive_from_string(t.get<std::string>());
        if (p == PrimitiveType::Null) {
          info.nullable = true;
        } else if (info.type == PrimitiveType::Unknown) {
          info.type = p;
        }
      }
    }
  }
  if (auto it = schema.find("nullable"); it != schema.end() && it->is_boolean() && it->get<bool>()) info.nullable = true;
  if (info.type == PrimitiveType::Unknown) {
    if (schema.contains("properties")) info.type = PrimitiveType::Object;
    else if (schema.contains("items")) info.type = PrimitiveType::Array;
  }
  return info;
}

std::optional<Value> example_of(const ojson& schema) {
  if (!schema.is_object()) return std::nullopt;
  if (auto it = schema.find("example"); it != schema.end()) return Value::from_json(*it);
  if (auto it = schema.find("examples"); it != schema.end() && it->is_array() && !it->empty())
    return Value::from_json(it->front());
  return std::nullopt;
}

class Flattener {
 public:
  Flattener(const Resolver& resolver, const LoadOptions& options) : resolver_(resolver), options_(options) {}

  void run(const ojson& schema, std::vector<PropertySpec>& leaves, std::vector<PropertySpec>& containers) {
    leaves_ = &leaves;
    containers_ = &containers;
    seen_.clear();
    stack_.clear();
    walk(schema, PropertyPath{}, nullptr);
  }

 private:
  // Properties of an object schema including allOf/anyOf/oneOf members.
  void collect_properties(const ojson& schema, std::vector<std::pair<std::string, const ojson*>>& out,
                          std::set<std::string>& names, int guard) {
    if (guard > 16) return;
    if (auto it = schema.find("properties"); it != schema.end() && it->is_object()) {
      for (auto p = it->begin(); p != it->end(); ++p)
        if (names.insert(p.key()).second) out.emplace_back(p.key(), &p.value());
    }
    for (const char* combinator : {"allOf", "anyOf", "oneOf"}) {
      auto it = schema.find(combinator);
      if (it == schema.end() || !it->is_array()) continue;
      for (const auto& member : *it) collect_properties(resolver_.deref(member), out, names, guard + 1);
    }
  }

  const ojson* array_items(const ojson& schema) {
    if (auto it = schema.find("items"); it != schema.end()) return &*it;
    return nullptr;
  }

  PropertySpec describe(const ojson& raw, const ojson& resolved, const PropertyPath& path, const TypeInfo& info) {
    PropertySpec spec;
    spec.path = path;
    spec.description = opt_string(raw, "description");
    if (!spec.description) spec.description = opt_string(resolved, "description");
    spec.declared_type = info.type;
    spec.format_hint = opt_string(resolved, "format");
    spec.example = example_of(raw);
    if (!spec.example) spec.example = example_of(resolved);
    spec.nullable = info.nullable || type_of(raw).nullable;
    return spec;
  }

  void emit(std::vector<PropertySpec>& into, PropertySpec spec) {
    auto key = spec.path.render() + (&into == containers_ ? "#c" : "#l");
    if (seen_.insert(key).second) into.push_back(std::move(spec));
  }

  bool cyclic() const {
    std::set<std::string> uniq(stack_.begin(), stack_.end());
    return uniq.size() != stack_.size();
  }

  void walk(const ojson& raw, const PropertyPath& path, const ojson* /*parent*/) {
    std::vector<std::string> chain;
    const ojson& schema = resolver_.deref(raw, &chain);
    for (const auto& r : chain) stack_.push_back(r);
    struct Pop {
      std::vector<std::string>& s;
      std::size_t n;
      ~Pop() { s.resize(s.size() - n); }
    } pop{stack_, chain.size()};

    if (!schema.is_object()) {
      if (!path.empty()) emit(*leaves_, describe(raw, schema, path, {}));
      return;
    }
    TypeInfo info = type_of(schema);

    std::vector<std::pair<std::string, const ojson*>> props;
    std::set<std::string> names;
    collect_properties(schema, props, names, 0);
    if (!props.empty() && info.type == PrimitiveType::Unknown) info.type = PrimitiveType::Object;

    if (info.type == PrimitiveType::Array) {
      const ojson* items = array_items(schema);
      if (!path.empty()) emit(*containers_, describe(raw, schema, path, info));
      if (!items) {
        if (!path.empty()) emit(*leaves_, describe(raw, schema, path, info));
        return;
      }
      walk(*items, path.element(), &schema);
      return;
    }

    if (info.type == PrimitiveType::Object && !props.empty()) {
      if (static_cast<int>(path.depth()) + 1 > options_.max_depth) {
        if (options_.strict && cyclic()) {
          throw CycleDepthExceeded("cyclic schema exceeds depth " + std::to_string(options_.max_depth) + " at '" +
                                   path.render() + "'");
        }
        auto spec = describe(raw, schema, path, info);
        spec.truncated = true;
        emit(*leaves_, std::move(spec));
        return;
      }
      if (!path.empty()) emit(*containers_, describe(raw, schema, path, info));
      for (const auto& [name, child] : props) walk(*child, path.child(name), &schema);
      return;
    }

    if (!path.empty()) emit(*leaves_, describe(raw, schema, path, info));
  }

  const Resolver& resolver_;
  const LoadOptions& options_;
  std::vector<PropertySpec>* leaves_ = nullptr;
  std::vector<PropertySpec>* containers_ = nullptr;
  std::set<std::string> seen_;
  std::vector<std::string> stack_;
};

/// Inline `$ref`s of a subtree so stored fragments carry no reference nodes.
/// Refs nested deeper than the cap become `{"x-truncated": true}`.
nlohmann::json inline_refs(const Resolver& resolver, const ojson& node, int budget) {
  if (auto ref = Resolver::ref_of(node)) {
    if (budget <= 0) return nlohmann::json{{"x-truncated", true}};
    return inline_refs(resolver, resolver.target(*ref), budget - 1);
  }
  if (node.is_object()) {
    nlohmann::json out = nlohmann::json::object();
    for (auto it = node.begin(); it != node.end(); ++it) out[it.key()] = inline_refs(resolver, it.value(), budget);
    return out;
  }
  if (node.is_array()) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& v : node) out.push_back(inline_refs(resolver, v, budget));
    return out;
  }
  return nlohmann::json::parse(node.dump());
}

std::string normalize_status(const std::string& key) {
  std::string s = key;
  for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  static const std::regex status_re(R"([1-5]XX|[1-5][0-9][0-9])");
  if (!std::regex_match(s, status_re)) throw ParseError("invalid response status key '" + key + "'");
  return s;
}

const ojson* pick_content_schema(const ojson& content) {
  if (!content.is_object() || content.empty()) return nullptr;
  for (const char* mime : {"application/json", "application/x-www-form-urlencoded", "multipart/form-data"}) {
    auto it = content.find(mime);
    if (it != content.end() && it->is_object() && it->contains("schema")) return &(*it)["schema"];
  }
  for (const auto& [_, media] : content.items())
    if (media.is_object() && media.contains("schema")) return &media["schema"];
  return nullptr;
}

class SpecBuilder {
 public:
  SpecBuilder(const ojson& doc, const LoadOptions& options) : doc_(doc), resolver_(doc), options_(options) {}

  ApiSpec build() {
    if (!doc_.is_object()) throw ParseError("document root must be a mapping");
    auto version = opt_string(doc_, "openapi");
    if (!version || version->rfind("3.", 0) != 0) throw ParseError("document does not declare OpenAPI 3.x");
    resolver_.check_all(doc_);

    ApiSpec spec;
    if (auto info = doc_.find("info"); info != doc_.end()) {
      spec.title = opt_string(*info, "title").value_or("");
      spec.version = opt_string(*info, "version").value_or("");
    }
    index_descriptions(doc_, "", spec.raw_description_index, false);

    if (auto comps = doc_.find("components"); comps != doc_.end() && comps->is_object()) {
      if (auto schemas = comps->find("schemas"); schemas != comps->end() && schemas->is_object()) {
        for (auto it = schemas->begin(); it != schemas->end(); ++it) {
          std::vector<PropertySpec> leaves, containers;
          Flattener(resolver_, options_).run(it.value(), leaves, containers);
          spec.schemas[it.key()] = std::move(leaves);
        }
      }
    }

    if (auto paths = doc_.find("paths"); paths != doc_.end() && paths->is_object()) {
      for (auto p = paths->begin(); p != paths->end(); ++p) build_path(p.key(), resolver_.deref(p.value()), spec);
    }
    return spec;
  }

 private:
  void index_descriptions(const ojson& node, const std::string& key, std::map<std::string, std::vector<std::string>>& index,
                          bool under_properties) {
    if (node.is_object()) {
      auto desc = opt_string(node, "description");
      if (desc) {
        if (auto name = opt_string(node, "name"); name && node.contains("in")) {
          index[*name].push_back(*desc);
        } else if (under_properties && !key.empty()) {
          index[key].push_back(*desc);
        }
      }
      for (auto it = node.begin(); it != node.end(); ++it) {
        // Children of a properties map (or of components/schemas) are named entries.
        bool named = (it.key() == "properties") || (it.key() == "schemas" && key == "components");
        if (named && it.value().is_object()) {
          for (auto c = it.value().begin(); c != it.value().end(); ++c) index_descriptions(c.value(), c.key(), index, true);
        } else {
          index_descriptions(it.value(), it.key(), index, false);
        }
      }
    } else if (node.is_array()) {
      for (const auto& v : node) index_descriptions(v, key, index, false);
    }
  }

  void add_param(const ojson& raw, std::vector<ParamSpec>& out) {
    const ojson& param = resolver_.deref(raw);
    auto name = opt_string(param, "name");
    if (!name || name->empty()) throw ParseError("parameter without a name");
    auto loc = location_from_string(opt_string(param, "in").value_or("query"));
    auto desc = opt_string(param, "description");

    // Parameters declared at operation level replace path-level ones.
    std::erase_if(out, [&](const ParamSpec& p) {
      return p.location == loc && (p.name == *name || p.name.rfind(*name + "[", 0) == 0);
    });

    const ojson* schema = param.contains("schema") ? &param["schema"] : nullptr;
    if (!schema) {
      out.push_back({*name, loc, desc, PrimitiveType::Unknown, nullptr});
      return;
    }
    const ojson& resolved = resolver_.deref(*schema);
    const ojson* alternatives = nullptr;
    for (const char* key : {"anyOf", "oneOf"}) {
      if (auto it = resolved.find(key); it != resolved.end() && it->is_array()) alternatives = &*it;
    }
    if (!alternatives) {
      out.push_back({*name, loc, desc, type_of(resolved).type, inline_refs(resolver_, *schema, options_.max_depth)});
      return;
    }
    bool plain_added = false;
    for (const auto& alt_raw : *alternatives) {
      const ojson& alt = resolver_.deref(alt_raw);
      auto props = alt.find("properties");
      if (props != alt.end() && props->is_object() && !props->empty()) {
        auto fragment = inline_refs(resolver_, alt_raw, options_.max_depth);
        for (auto it = props->begin(); it != props->end(); ++it) {
          const ojson& prop = resolver_.deref(it.value());
          out.push_back({*name + "[" + it.key() + "]", loc, desc, type_of(prop).type, fragment});
        }
      } else if (!plain_added) {
        out.push_back({*name, loc, desc, type_of(alt).type, inline_refs(resolver_, alt_raw, options_.max_depth)});
        plain_added = true;
      }
    }
  }

  void add_body_fields(const ojson& request_body, std::vector<ParamSpec>& out) {
    const ojson& body = resolver_.deref(request_body);
    auto content = body.find("content");
    if (content == body.end()) return;
    const ojson* schema_raw = pick_content_schema(*content);
    if (!schema_raw) return;
    const ojson& schema = resolver_.deref(*schema_raw);
    auto props = schema.find("properties");
    if (props == schema.end() || !props->is_object()) return;
    for (auto it = props->begin(); it != props->end(); ++it) {
      const ojson& prop = resolver_.deref(it.value());
      auto desc = opt_string(it.value(), "description");
      if (!desc) desc = opt_string(prop, "description");
      out.push_back({it.key(), ParamLocation::Body, desc, type_of(prop).type,
                     inline_refs(resolver_, it.value(), options_.max_depth)});
    }
  }

  void build_path(const std::string& path, const ojson& item, ApiSpec& spec) {
    static const std::vector<std::string> methods = {"get", "put", "post", "delete", "options", "head", "patch", "trace"};
    std::vector<ParamSpec> shared;
    if (auto it = item.find("parameters"); it != item.end() && it->is_array())
      for (const auto& p : *it) add_param(p, shared);

    for (const auto& method : methods) {
      auto it = item.find(method);
      if (it == item.end() || !it->is_object()) continue;
      const ojson& node = *it;
      OperationSpec op;
      op.id.method = method;
      std::transform(op.id.method.begin(), op.id.method.end(), op.id.method.begin(),
                     [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
      op.id.path = path;
      op.description = opt_string(node, "description");
      if (!op.description) op.description = opt_string(node, "summary");

      op.parameters = shared;
      if (auto ps = node.find("parameters"); ps != node.end() && ps->is_array())
        for (const auto& p : *ps) add_param(p, op.parameters);
      if (auto rb = node.find("requestBody"); rb != node.end()) add_body_fields(*rb, op.request_body_fields);

      if (auto rs = node.find("responses"); rs != node.end() && rs->is_object()) {
        for (auto r = rs->begin(); r != rs->end(); ++r) {
          if (r.key() == "default") continue;
          auto status = normalize_status(r.key());
          const ojson& response = resolver_.deref(r.value());
          auto& leaves = op.responses[status];
          auto& containers = op.response_containers[status];
          auto content = response.find("content");
          if (content == response.end()) continue;
          const ojson* schema = pick_content_schema(*content);
          if (!schema) continue;
          if (auto ref = Resolver::ref_of(*schema)) {
            op.response_schema_names[status] = ref_name(*ref);
          } else if (auto items = schema->find("items"); items != schema->end()) {
            if (auto iref = Resolver::ref_of(*items)) op.response_schema_names[status] = ref_name(*iref);
          }
          Flattener(resolver_, options_).run(*schema, leaves, containers);
        }
      }
      if (spec.find_operation(op.id)) throw ParseError("duplicate operation " + op.id.render());
      spec.operations.push_back(std::move(op));
    }
  }

  const ojson& doc_;
  Resolver resolver_;
  const LoadOptions& options_;
};

// ---------------------------------------------------------------------------
// Canonical JSON

nlohmann::json prop_to_json(const PropertySpec& p) {
  nlohmann::json j;
  j["path"] = p.path.render();
  if (p.description) j["description"] = *p.description;
  j["declared_type"] = std::string(to_string(p.declared_type));
  if (p.format_hint) j["format_hint"] = *p.format_hint;
  if (p.example) j["example"] = p.example->to_json();
  j["nullable"] = p.nullable;
  j["truncated"] = p.truncated;
  return j;
}

PropertySpec prop_from_json(const nlohmann::json& j) {
  PropertySpec p;
  p.path = PropertyPath::parse(j.at("path").get<std::string>());
  if (j.contains("description")) p.description = j["description"].get<std::string>();
  p.declared_type = primitive_from_string(j.at("declared_type").get<std::string>());
  if (j.contains("format_hint")) p.format_hint = j["format_hint"].get<std::string>();
  if (j.contains("example")) p.example = Value::from_json(j["example"]);
  p.nullable = j.value("nullable", false);
  p.truncated = j.value("truncated", false);
  return p;
}

nlohmann::json param_to_json(const ParamSpec& p) {
  nlohmann::json j;
  j["name"] = p.name;
  j["location"] = std::string(to_string(p.location));
  if (p.description) j["description"] = *p.description;
  j["declared_type"] = std::string(to_string(p.declared_type));
  j["schema_fragment"] = p.schema_fragment;
  return j;
}

ParamSpec param_from_json(const nlohmann::json& j) {
  ParamSpec p;
  p.name = j.at("name").get<std::string>();
  if (p.name.empty()) throw ParseError("parameter without a name");
  p.location = location_from_string(j.at("location").get<std::string>());
  if (j.contains("description")) p.description = j["description"].get<std::string>();
  p.declared_type = primitive_from_string(j.at("declared_type").get<std::string>());
  p.schema_fragment = j.value("schema_fragment", nlohmann::json());
  return p;
}

template <typename F>
nlohmann::json map_of_lists(const std::map<std::string, std::vector<PropertySpec>>& m, F&& f) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, list] : m) {
    auto arr = nlohmann::json::array();
    for (const auto& p : list) arr.push_back(f(p));
    j[k] = std::move(arr);
  }
  return j;
}

std::map<std::string, std::vector<PropertySpec>> lists_from_json(const nlohmann::json& j) {
  std::map<std::string, std::vector<PropertySpec>> out;
  for (const auto& [k, arr] : j.items()) {
    auto& list = out[k];
    for (const auto& p : arr) list.push_back(prop_from_json(p));
  }
  return out;
}

}  // namespace

ApiSpec load_spec(std::string_view bytes, SpecFormat format, const LoadOptions& options) {
  ojson doc = parse_document(bytes, format);
  return normalize(SpecBuilder(doc, options).build());
}

ApiSpec load_spec(const std::filesystem::path& source, const LoadOptions& options) {
  std::ifstream in(source, std::ios::binary);
  if (!in) throw ParseError("cannot open spec file " + source.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  auto ext = source.extension().string();
  SpecFormat fmt = (ext == ".json") ? SpecFormat::Json : SpecFormat::Yaml;
  return load_spec(ss.str(), fmt, options);
}

const std::vector<PropertySpec>& flatten_response_schema(const OperationSpec& op, std::string_view status) {
  auto it = op.responses.find(std::string(status));
  if (it == op.responses.end()) {
    throw NoSuchResponse("operation " + op.id.render() + " has no response for status " + std::string(status));
  }
  return it->second;
}

std::optional<std::string> find_exact_match_description(const ApiSpec& spec, std::string_view name,
                                                         const OperationSpec* context) {
  if (context) {
    for (const auto* p : context->all_inputs())
      if (p->name == name && p->description) return p->description;
  }
  for (const auto& [_, props] : spec.schemas) {
    for (const auto& p : props)
      if (p.description && !p.truncated && p.path.leaf_name() == name) return p.description;
  }
  auto it = spec.raw_description_index.find(std::string(name));
  if (it != spec.raw_description_index.end() && !it->second.empty()) return it->second.front();
  return std::nullopt;
}

nlohmann::json to_canonical_json(const ApiSpec& spec) {
  nlohmann::json j;
  j["title"] = spec.title;
  j["version"] = spec.version;
  auto ops = nlohmann::json::array();
  for (const auto& op : spec.operations) {
    nlohmann::json o;
    o["method"] = op.id.method;
    o["path"] = op.id.path;
    if (op.description) o["description"] = *op.description;
    auto params = nlohmann::json::array();
    for (const auto& p : op.parameters) params.push_back(param_to_json(p));
    o["parameters"] = std::move(params);
    auto body = nlohmann::json::array();
    for (const auto& p : op.request_body_fields) body.push_back(param_to_json(p));
    o["request_body_fields"] = std::move(body);
    o["responses"] = map_of_lists(op.responses, prop_to_json);
    o["response_containers"] = map_of_lists(op.response_containers, prop_to_json);
    o["response_schema_names"] = op.response_schema_names;
    ops.push_back(std::move(o));
  }
  j["operations"] = std::move(ops);
  j["schemas"] = map_of_lists(spec.schemas, prop_to_json);
  j["raw_description_index"] = spec.raw_description_index;
  return j;
}

ApiSpec from_canonical_json(const nlohmann::json& j) {
  ApiSpec spec;
  spec.title = j.value("title", "");
  spec.version = j.value("version", "");
  for (const auto& o : j.at("operations")) {
    OperationSpec op;
    op.id = {o.at("method").get<std::string>(), o.at("path").get<std::string>()};
    if (o.contains("description")) op.description = o["description"].get<std::string>();
    for (const auto& p : o.at("parameters")) op.parameters.push_back(param_from_json(p));
    for (const auto& p : o.at("request_body_fields")) op.request_body_fields.push_back(param_from_json(p));
    op.responses = lists_from_json(o.at("responses"));
    op.response_containers = lists_from_json(o.value("response_containers", nlohmann::json::object()));
    op.response_schema_names =
        o.value("response_schema_names", nlohmann::json::object()).get<std::map<std::string, std::string>>();
    if (spec.find_operation(op.id)) throw ParseError("duplicate operation " + op.id.render());
    spec.operations.push_back(std::move(op));
  }
  spec.schemas = lists_from_json(j.value("schemas", nlohmann::json::object()));
  spec.raw_description_index =
      j.value("raw_description_index", nlohmann::json::object()).get<std::map<std::string, std::vector<std::string>>>();
  return normalize(std::move(spec));
}

ApiSpec normalize(ApiSpec spec) {
  std::stable_sort(spec.operations.begin(), spec.operations.end(), [](const OperationSpec& a, const OperationSpec& b) {
    return std::tie(a.id.path, a.id.method) < std::tie(b.id.path, b.id.method);
  });
  return spec;
}

std::string render_schema_listing(const std::vector<PropertySpec>& props) {
  std::string out;
  for (const auto& p : props) {
    out += "- " + p.path.render() + " (" + std::string(to_string(p.declared_type));
    if (p.format_hint) out += ", format " + *p.format_hint;
    if (p.nullable) out += ", nullable";
    out += ")";
    if (p.description) out += ": " + *p.description;
    if (p.example) out += " [example: " + p.example->render() + "]";
    out += "\n";
  }
  return out;
}

}  // namespace specguard
