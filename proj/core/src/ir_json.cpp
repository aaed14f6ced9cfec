#include <map>

#include "specguard/errors.hpp"
#include "specguard/ir.hpp"

namespace specguard {

using nlohmann::json;

json expr_to_json(const Expr& e) {
  return std::visit(
      [&](const auto& n) -> json {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, PathRefNode>) {
          return {{"node", "path"}, {"scope", std::string(to_string(n.scope))}, {"path", n.text}};
        } else if constexpr (std::is_same_v<T, LiteralNode>) {
          return {{"node", "literal"}, {"value", n.value.to_json()}};
        } else if constexpr (std::is_same_v<T, CompareNode>) {
          return {{"node", "compare"}, {"op", std::string(to_string(n.op))}, {"lhs", expr_to_json(*n.lhs)},
                  {"rhs", expr_to_json(*n.rhs)}};
        } else if constexpr (std::is_same_v<T, ArithNode>) {
          return {{"node", "arith"}, {"op", std::string(to_string(n.op))}, {"lhs", expr_to_json(*n.lhs)},
                  {"rhs", expr_to_json(*n.rhs)}};
        } else if constexpr (std::is_same_v<T, StrOpNode>) {
          json j = {{"node", "str"}, {"op", std::string(to_string(n.op))}};
          json args = json::array();
          for (const auto& a : n.args) args.push_back(expr_to_json(*a));
          j["args"] = std::move(args);
          if (n.op == StrOpKind::MatchesRegex) j["pattern"] = n.pattern;
          return j;
        } else if constexpr (std::is_same_v<T, InSetNode>) {
          json set = json::array();
          for (const auto& v : n.set) set.push_back(v.to_json());
          return {{"node", "in_set"}, {"expr", expr_to_json(*n.expr)}, {"set", std::move(set)}};
        } else if constexpr (std::is_same_v<T, TypeCheckNode>) {
          json j = {{"node", "type"}, {"tag", std::string(to_string(n.tag))}, {"expr", expr_to_json(*n.expr)}};
          if (!n.format.empty()) j["format"] = n.format;
          return j;
        } else if constexpr (std::is_same_v<T, ArraySizeNode>) {
          return {{"node", "array_size"}, {"expr", expr_to_json(*n.expr)}};
        } else if constexpr (std::is_same_v<T, QuantifierNode>) {
          return {{"node", "quantifier"}, {"kind", std::string(to_string(n.kind))}, {"array", expr_to_json(*n.array)},
                  {"body", expr_to_json(*n.body)}};
        } else if constexpr (std::is_same_v<T, LogicNode>) {
          json args = json::array();
          for (const auto& a : n.args) args.push_back(expr_to_json(*a));
          return {{"node", "logic"}, {"op", std::string(to_string(n.op))}, {"args", std::move(args)}};
        } else {
          json j = {{"node", "sorted"}, {"direction", std::string(to_string(n.direction))},
                    {"array", expr_to_json(*n.array)}};
          if (n.key) j["key"] = n.key->render();
          return j;
        }
      },
      e.node());
}

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& msg) { throw IrSyntaxError(where, msg); }

const json& member(const json& j, const char* key, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(where, std::string("missing field '") + key + "'");
  return *it;
}

std::string string_member(const json& j, const char* key, const std::string& where) {
  const json& v = member(j, key, where);
  if (!v.is_string()) fail(where + "/" + key, "expected a string");
  return v.get<std::string>();
}

template <typename E>
E lookup(const std::map<std::string, E>& table, const std::string& name, const std::string& where, const char* what) {
  auto it = table.find(name);
  if (it == table.end()) fail(where, std::string("unknown ") + what + " '" + name + "'");
  return it->second;
}

const std::map<std::string, CompareOp> kCompareOps = {
    {"=", CompareOp::Eq},  {"==", CompareOp::Eq}, {"!=", CompareOp::Ne}, {"<>", CompareOp::Ne},
    {"\xE2\x89\xA0", CompareOp::Ne}, {"<", CompareOp::Lt},   {"<=", CompareOp::Le}, {"\xE2\x89\xA4", CompareOp::Le},
    {">", CompareOp::Gt},  {">=", CompareOp::Ge}, {"\xE2\x89\xA5", CompareOp::Ge},
};
const std::map<std::string, ArithOp> kArithOps = {
    {"+", ArithOp::Add}, {"-", ArithOp::Sub}, {"*", ArithOp::Mul}, {"/", ArithOp::Div},
    {"\xC3\x97", ArithOp::Mul}, {"\xC3\xB7", ArithOp::Div},
};
const std::map<std::string, StrOpKind> kStrOps = {
    {"length", StrOpKind::Length},          {"lowercase", StrOpKind::Lowercase},
    {"matches", StrOpKind::MatchesRegex},   {"matches-regex", StrOpKind::MatchesRegex},
    {"substring_of", StrOpKind::IsSubstringOf}, {"is-substring-of", StrOpKind::IsSubstringOf},
};
const std::map<std::string, TypeTag> kTypeTags = {
    {"boolean", TypeTag::Boolean}, {"integer", TypeTag::Integer},   {"number", TypeTag::Number},
    {"string", TypeTag::String},   {"array-of-string", TypeTag::ArrayOfString}, {"array_of_string", TypeTag::ArrayOfString},
    {"url", TypeTag::Url},         {"email", TypeTag::Email},       {"date", TypeTag::Date},
    {"datetime", TypeTag::DateTime}, {"date-time", TypeTag::DateTime}, {"time", TypeTag::Time},
    {"unixtime", TypeTag::UnixTime},
};
const std::map<std::string, QuantKind> kQuantKinds = {{"all", QuantKind::All}, {"any", QuantKind::Any}};
const std::map<std::string, LogicOp> kLogicOps = {{"and", LogicOp::And}, {"or", LogicOp::Or}, {"not", LogicOp::Not}};
const std::map<std::string, Direction> kDirections = {{"asc", Direction::Asc}, {"desc", Direction::Desc}};
const std::map<std::string, PathScope> kScopes = {
    {"request", PathScope::Request}, {"response", PathScope::Response}, {"element", PathScope::Element}};
const std::map<std::string, InputsRequired> kInputs = {{"request-only", InputsRequired::RequestOnly},
                                                       {"response-only", InputsRequired::ResponseOnly},
                                                       {"both", InputsRequired::Both}};

std::vector<ExprPtr> expr_list(const json& j, const char* key, const std::string& where) {
  const json& arr = member(j, key, where);
  std::string w = where + "/" + key;
  if (!arr.is_array()) fail(w, "expected an array");
  std::vector<ExprPtr> out;
  for (std::size_t i = 0; i < arr.size(); ++i) out.push_back(expr_from_json(arr[i], w + "/" + std::to_string(i)));
  return out;
}

ExprPtr child(const json& j, const char* key, const std::string& where) {
  return expr_from_json(member(j, key, where), where + "/" + key);
}

ExprPtr build_node(const json& j, const std::string& where) {
  const std::string tag = string_member(j, "node", where);
  if (tag == "path") {
    auto scope = lookup(kScopes, string_member(j, "scope", where), where + "/scope", "scope");
    return ir::path(string_member(j, "path", where), scope);
  }
  if (tag == "literal") return ir::lit(Value::from_json(member(j, "value", where)));
  if (tag == "compare") {
    auto op = lookup(kCompareOps, string_member(j, "op", where), where + "/op", "comparison");
    return ir::compare(op, child(j, "lhs", where), child(j, "rhs", where));
  }
  if (tag == "arith") {
    auto op = lookup(kArithOps, string_member(j, "op", where), where + "/op", "arithmetic operator");
    return ir::arith(op, child(j, "lhs", where), child(j, "rhs", where));
  }
  if (tag == "str") {
    auto op = lookup(kStrOps, string_member(j, "op", where), where + "/op", "string operation");
    auto args = expr_list(j, "args", where);
    std::size_t want = op == StrOpKind::IsSubstringOf ? 2 : 1;
    if (args.size() != want) fail(where + "/args", "expected " + std::to_string(want) + " argument(s)");
    switch (op) {
      case StrOpKind::Length: return ir::length(args[0]);
      case StrOpKind::Lowercase: return ir::lowercase(args[0]);
      case StrOpKind::MatchesRegex: return ir::matches(args[0], string_member(j, "pattern", where));
      case StrOpKind::IsSubstringOf: return ir::substring_of(args[0], args[1]);
    }
  }
  if (tag == "in_set") {
    const json& set = member(j, "set", where);
    if (!set.is_array()) fail(where + "/set", "expected an array");
    std::vector<Value> values;
    for (const auto& v : set) values.push_back(Value::from_json(v));
    return ir::in_set(child(j, "expr", where), std::move(values));
  }
  if (tag == "type") {
    auto t = lookup(kTypeTags, string_member(j, "tag", where), where + "/tag", "type tag");
    std::string format;
    if (j.contains("format")) format = string_member(j, "format", where);
    return ir::type_check(child(j, "expr", where), t, format);
  }
  if (tag == "array_size") return ir::array_size(child(j, "expr", where));
  if (tag == "quantifier") {
    auto k = lookup(kQuantKinds, string_member(j, "kind", where), where + "/kind", "quantifier");
    return ir::quantifier(k, child(j, "array", where), child(j, "body", where));
  }
  if (tag == "logic") {
    auto op = lookup(kLogicOps, string_member(j, "op", where), where + "/op", "logic operator");
    return ir::logic(op, expr_list(j, "args", where));
  }
  if (tag == "sorted") {
    auto d = lookup(kDirections, string_member(j, "direction", where), where + "/direction", "direction");
    std::optional<std::string> key;
    if (j.contains("key") && !j["key"].is_null()) key = string_member(j, "key", where);
    return ir::sorted(child(j, "array", where), key, d);
  }
  fail(where + "/node", "unknown node tag '" + tag + "'");
}

}  // namespace

ExprPtr expr_from_json(const json& j, const std::string& where) {
  try {
    return build_node(j, where);
  } catch (const IrSyntaxError&) {
    throw;
  } catch (const IrBuildError& e) {
    throw IrSyntaxError(where, e.what());
  } catch (const json::exception& e) {
    throw IrSyntaxError(where, e.what());
  }
}

json program_to_json(const ValidatorProgram& p) {
  json j;
  j["ir_version"] = kIrVersion;
  j["constraint_id"] = p.constraint_id;
  j["inputs_required"] = std::string(to_string(p.inputs_required));
  if (p.operation) j["operation"] = {{"method", p.operation->method}, {"path", p.operation->path}};
  if (p.category) j["category"] = std::string(to_string(*p.category));
  j["body"] = expr_to_json(*p.body);
  return j;
}

ValidatorProgram program_from_json(const json& j) {
  if (!j.is_object()) fail("", "program must be an object");
  const json& version = member(j, "ir_version", "");
  if (!version.is_number_integer() || version.get<int>() != kIrVersion)
    fail("/ir_version", "unsupported ir_version " + version.dump());
  std::string id = string_member(j, "constraint_id", "");
  auto inputs = lookup(kInputs, string_member(j, "inputs_required", ""), "/inputs_required", "inputs_required value");
  std::optional<OperationId> op;
  if (j.contains("operation") && !j["operation"].is_null()) {
    const json& o = j["operation"];
    op = OperationId{string_member(o, "method", "/operation"), string_member(o, "path", "/operation")};
  }
  std::optional<Category> category;
  if (j.contains("category") && !j["category"].is_null()) {
    category = category_from_string(string_member(j, "category", ""));
    if (!category) fail("/category", "unknown category");
  }
  ExprPtr body = expr_from_json(member(j, "body", ""), "/body");
  try {
    return make_program(std::move(id), inputs, std::move(body), std::move(op), category);
  } catch (const IrBuildError& e) {
    throw IrSyntaxError("/body", e.what());
  }
}

std::string serialize_program(const ValidatorProgram& p) { return program_to_json(p).dump(2) + "\n"; }

ValidatorProgram parse_program(std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw IrSyntaxError("", std::string("malformed JSON: ") + e.what());
  }
  return program_from_json(j);
}

}  // namespace specguard
