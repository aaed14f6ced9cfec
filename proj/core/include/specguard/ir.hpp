#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "specguard/category.hpp"
#include "specguard/property_path.hpp"
#include "specguard/spec_model.hpp"
#include "specguard/time_pattern.hpp"
#include "specguard/value.hpp"

namespace specguard {

// ---------------------------------------------------------------------------
// Verdicts

enum class VerdictState : int { Mismatched = -1, Unknown = 0, Matched = 1 };

std::string_view to_string(VerdictState s);
inline int score(VerdictState s) { return static_cast<int>(s); }

/// Strong Kleene connectives over the order Mismatched < Unknown < Matched.
VerdictState kleene_and(VerdictState a, VerdictState b);
VerdictState kleene_or(VerdictState a, VerdictState b);
VerdictState kleene_not(VerdictState a);

enum class FailureKind { None, Format, Type, Pattern, Comparison, Membership, NullValue, Order };
std::string_view to_string(FailureKind k);

struct Verdict {
  VerdictState state = VerdictState::Unknown;
  std::string detail;
  /// Offending path (rendered with its scope, e.g. `return.amount`), if any.
  std::string path;
  std::optional<Value> value;
  FailureKind failure = FailureKind::None;

  static Verdict matched() { return {VerdictState::Matched, {}, {}, std::nullopt, FailureKind::None}; }
  static Verdict unknown(std::string why, std::string path = {}) {
    return {VerdictState::Unknown, std::move(why), std::move(path), std::nullopt, FailureKind::None};
  }
  static Verdict mismatched(FailureKind kind, std::string why, std::string path = {},
                            std::optional<Value> value = std::nullopt) {
    return {VerdictState::Mismatched, std::move(why), std::move(path), std::move(value), kind};
  }
};

/// Any Mismatched wins, then any Matched, else Unknown. Throws EmptyInput.
Verdict aggregate(const std::vector<Verdict>& verdicts);

// ---------------------------------------------------------------------------
// Expressions

enum class Sort { Verdict, Number, Text, Boolean, Array, Any };
std::string_view to_string(Sort s);

enum class PathScope { Request, Response, Element };
enum class CompareOp { Eq, Ne, Lt, Le, Gt, Ge };
enum class ArithOp { Add, Sub, Mul, Div };
enum class StrOpKind { Length, Lowercase, MatchesRegex, IsSubstringOf };
enum class TypeTag { Boolean, Integer, Number, String, ArrayOfString, Url, Email, Date, DateTime, Time, UnixTime };
enum class QuantKind { All, Any };
enum class LogicOp { And, Or, Not };
enum class Direction { Asc, Desc };

std::string_view to_string(PathScope s);
std::string_view to_string(CompareOp op);
std::string_view to_string(ArithOp op);
std::string_view to_string(StrOpKind op);
std::string_view to_string(TypeTag t);
std::string_view to_string(QuantKind q);
std::string_view to_string(LogicOp op);
std::string_view to_string(Direction d);

class Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct PathRefNode {
  std::string text;
  PathScope scope = PathScope::Response;
  /// Parsed form of `text`; absent when the text is only usable as a raw
  /// request key (e.g. `created[gt]`).
  std::optional<PropertyPath> path;
};
struct LiteralNode {
  Value value;
};
struct CompareNode {
  CompareOp op;
  ExprPtr lhs, rhs;
};
struct ArithNode {
  ArithOp op;
  ExprPtr lhs, rhs;
};
struct StrOpNode {
  StrOpKind op;
  std::vector<ExprPtr> args;
  std::string pattern;
  std::shared_ptr<const std::regex> regex;
};
struct InSetNode {
  ExprPtr expr;
  std::vector<Value> set;
};
struct TypeCheckNode {
  ExprPtr expr;
  TypeTag tag;
  std::string format;
  std::shared_ptr<const TimePattern> pattern;
};
struct ArraySizeNode {
  ExprPtr expr;
};
struct QuantifierNode {
  QuantKind kind;
  ExprPtr array;
  ExprPtr body;
};
struct LogicNode {
  LogicOp op;
  std::vector<ExprPtr> args;
};
struct SortedNode {
  ExprPtr array;
  std::optional<PropertyPath> key;
  Direction direction;
};

using ExprNode = std::variant<PathRefNode, LiteralNode, CompareNode, ArithNode, StrOpNode, InSetNode, TypeCheckNode,
                              ArraySizeNode, QuantifierNode, LogicNode, SortedNode>;

/// Immutable, sort-annotated expression node. Build through the factories in
/// namespace `ir`, which reject ill-sorted trees with IrBuildError.
class Expr {
 public:
  Expr(Sort sort, ExprNode node) : sort_(sort), node_(std::move(node)) {}
  Sort sort() const { return sort_; }
  const ExprNode& node() const { return node_; }
  template <typename T>
  const T* as() const {
    return std::get_if<T>(&node_);
  }

 private:
  Sort sort_;
  ExprNode node_;
};

bool structurally_equal(const Expr& a, const Expr& b);
/// True when some node in the tree satisfies `pred`.
bool any_node(const Expr& e, const std::function<bool(const Expr&)>& pred);
std::size_t node_count(const Expr& e);

namespace ir {

ExprPtr path(std::string text, PathScope scope = PathScope::Response);
ExprPtr request(std::string text);
ExprPtr response(std::string text);
/// Current element of the innermost enclosing quantifier or sorted node.
ExprPtr element(std::string text = {});
ExprPtr lit(Value v);
ExprPtr compare(CompareOp op, ExprPtr lhs, ExprPtr rhs);
ExprPtr arith(ArithOp op, ExprPtr lhs, ExprPtr rhs);
ExprPtr length(ExprPtr e);
ExprPtr lowercase(ExprPtr e);
ExprPtr matches(ExprPtr e, std::string pattern);
ExprPtr substring_of(ExprPtr needle, ExprPtr haystack);
ExprPtr in_set(ExprPtr e, std::vector<Value> set);
ExprPtr type_check(ExprPtr e, TypeTag tag, std::string format = {});
ExprPtr array_size(ExprPtr e);
ExprPtr quantifier(QuantKind kind, ExprPtr array, ExprPtr body);
ExprPtr all(ExprPtr array, ExprPtr body);
ExprPtr any(ExprPtr array, ExprPtr body);
ExprPtr logic(LogicOp op, std::vector<ExprPtr> args);
ExprPtr and_(std::vector<ExprPtr> args);
ExprPtr or_(std::vector<ExprPtr> args);
ExprPtr not_(ExprPtr arg);
ExprPtr sorted(ExprPtr array, std::optional<std::string> key, Direction direction);

}  // namespace ir

// ---------------------------------------------------------------------------
// Programs

enum class InputsRequired { RequestOnly, ResponseOnly, Both };
std::string_view to_string(InputsRequired i);

struct ValidatorProgram {
  std::string constraint_id;
  InputsRequired inputs_required = InputsRequired::ResponseOnly;
  ExprPtr body;
  /// Metadata carried alongside the program for reporting.
  std::optional<OperationId> operation;
  std::optional<Category> category;
};

/// Validates the body (verdict sort, element references only under a binder).
/// Throws IrBuildError.
ValidatorProgram make_program(std::string constraint_id, InputsRequired inputs, ExprPtr body,
                              std::optional<OperationId> operation = std::nullopt,
                              std::optional<Category> category = std::nullopt);

bool structurally_equal(const ValidatorProgram& a, const ValidatorProgram& b);

/// Pure three-valued evaluation; never throws for well-built programs.
Verdict evaluate(const ValidatorProgram& program, const Value& request, const Value& response);
Verdict evaluate(const Expr& body, const Value& request, const Value& response);

/// Canonical JSON with an `ir_version` header.
inline constexpr int kIrVersion = 1;
nlohmann::json program_to_json(const ValidatorProgram& p);
ValidatorProgram program_from_json(const nlohmann::json& j);
nlohmann::json expr_to_json(const Expr& e);
/// `where` is the JSON-pointer prefix used in IrSyntaxError.
ExprPtr expr_from_json(const nlohmann::json& j, const std::string& where = "");
std::string serialize_program(const ValidatorProgram& p);
/// Throws IrSyntaxError (malformed or ill-sorted IR).
ValidatorProgram parse_program(std::string_view text);

/// Human-readable infix rendering, e.g. `return.amount > 0`.
std::string render_expr(const Expr& e);

// ---------------------------------------------------------------------------
// Builtins

using BuiltinArg = std::variant<Value, ExprPtr>;

/// Canonical expression for an oracle category applied to `target`, a
/// response path (wildcards expand to universal quantifiers). Arity per
/// category:
///   I/O                       request parameter name [, comparison op]
///   isUrl, isBoolean, isNumber, isUnixTime, ArrayTypeOracle_isString   none
///   isDate, isDateTime, isTime                 [format]
///   Value-In-Set              one array value or one or more values
///   Composite                 two or more expressions (target unused)
///   String_Specific_Length, Array_Specific_Sizes   exact | min, max (null = open)
///   Value-In-Range            lo, hi (null = open)
///   Template Literals         regex
///   N-ary atomic              comparison op, right-hand expression
/// Throws BadArity.
ExprPtr builtin(Category category, const std::string& target, const std::vector<BuiltinArg>& args = {});

}  // namespace specguard
