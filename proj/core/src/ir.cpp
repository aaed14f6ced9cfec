#include "specguard/ir.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "specguard/errors.hpp"

namespace specguard {

// ---------------------------------------------------------------------------
// Names

std::string_view to_string(VerdictState s) {
  switch (s) {
    case VerdictState::Matched: return "matched";
    case VerdictState::Unknown: return "unknown";
    case VerdictState::Mismatched: return "mismatched";
  }
  return "unknown";
}

std::string_view to_string(FailureKind k) {
  switch (k) {
    case FailureKind::None: return "none";
    case FailureKind::Format: return "format";
    case FailureKind::Type: return "type";
    case FailureKind::Pattern: return "pattern";
    case FailureKind::Comparison: return "comparison";
    case FailureKind::Membership: return "membership";
    case FailureKind::NullValue: return "null-value";
    case FailureKind::Order: return "order";
  }
  return "none";
}

std::string_view to_string(Sort s) {
  switch (s) {
    case Sort::Verdict: return "verdict";
    case Sort::Number: return "number";
    case Sort::Text: return "text";
    case Sort::Boolean: return "boolean";
    case Sort::Array: return "array";
    case Sort::Any: return "any";
  }
  return "any";
}

std::string_view to_string(PathScope s) {
  switch (s) {
    case PathScope::Request: return "request";
    case PathScope::Response: return "response";
    case PathScope::Element: return "element";
  }
  return "response";
}

std::string_view to_string(CompareOp op) {
  switch (op) {
    case CompareOp::Eq: return "=";
    case CompareOp::Ne: return "!=";
    case CompareOp::Lt: return "<";
    case CompareOp::Le: return "<=";
    case CompareOp::Gt: return ">";
    case CompareOp::Ge: return ">=";
  }
  return "=";
}

std::string_view to_string(ArithOp op) {
  switch (op) {
    case ArithOp::Add: return "+";
    case ArithOp::Sub: return "-";
    case ArithOp::Mul: return "*";
    case ArithOp::Div: return "/";
  }
  return "+";
}

std::string_view to_string(StrOpKind op) {
  switch (op) {
    case StrOpKind::Length: return "length";
    case StrOpKind::Lowercase: return "lowercase";
    case StrOpKind::MatchesRegex: return "matches";
    case StrOpKind::IsSubstringOf: return "substring_of";
  }
  return "length";
}

std::string_view to_string(TypeTag t) {
  switch (t) {
    case TypeTag::Boolean: return "boolean";
    case TypeTag::Integer: return "integer";
    case TypeTag::Number: return "number";
    case TypeTag::String: return "string";
    case TypeTag::ArrayOfString: return "array-of-string";
    case TypeTag::Url: return "url";
    case TypeTag::Email: return "email";
    case TypeTag::Date: return "date";
    case TypeTag::DateTime: return "datetime";
    case TypeTag::Time: return "time";
    case TypeTag::UnixTime: return "unixtime";
  }
  return "string";
}

std::string_view to_string(QuantKind q) { return q == QuantKind::All ? "all" : "any"; }

std::string_view to_string(LogicOp op) {
  switch (op) {
    case LogicOp::And: return "and";
    case LogicOp::Or: return "or";
    case LogicOp::Not: return "not";
  }
  return "and";
}

std::string_view to_string(Direction d) { return d == Direction::Asc ? "asc" : "desc"; }

std::string_view to_string(InputsRequired i) {
  switch (i) {
    case InputsRequired::RequestOnly: return "request-only";
    case InputsRequired::ResponseOnly: return "response-only";
    case InputsRequired::Both: return "both";
  }
  return "both";
}

// ---------------------------------------------------------------------------
// Kleene logic and aggregation

VerdictState kleene_and(VerdictState a, VerdictState b) { return score(a) < score(b) ? a : b; }
VerdictState kleene_or(VerdictState a, VerdictState b) { return score(a) > score(b) ? a : b; }
VerdictState kleene_not(VerdictState a) { return static_cast<VerdictState>(-score(a)); }

Verdict aggregate(const std::vector<Verdict>& verdicts) {
  if (verdicts.empty()) throw EmptyInput("aggregate over an empty verdict list");
  const Verdict* matched = nullptr;
  for (const auto& v : verdicts) {
    if (v.state == VerdictState::Mismatched) return v;
    if (v.state == VerdictState::Matched && !matched) matched = &v;
  }
  if (matched) return *matched;
  return Verdict::unknown("no response carried enough data");
}

// ---------------------------------------------------------------------------
// Construction

namespace {

bool is_term(Sort s) { return s != Sort::Verdict; }

void require(bool ok, const std::string& message) {
  if (!ok) throw IrBuildError(message);
}

void require_sort(const ExprPtr& e, std::initializer_list<Sort> allowed, std::string_view what) {
  require(e != nullptr, std::string(what) + ": missing operand");
  for (auto s : allowed)
    if (e->sort() == s) return;
  throw IrBuildError(std::string(what) + ": operand of sort " + std::string(to_string(e->sort())) + " not allowed");
}

Sort literal_sort(const Value& v) {
  switch (v.kind()) {
    case ValueKind::Integer:
    case ValueKind::Real: return Sort::Number;
    case ValueKind::Text: return Sort::Text;
    case ValueKind::Boolean: return Sort::Boolean;
    case ValueKind::Array: return Sort::Array;
    default: return Sort::Any;
  }
}

bool eq_compatible(Sort a, Sort b) {
  if (a == Sort::Any || b == Sort::Any || a == b) return true;
  auto pair = [&](Sort x, Sort y) { return (a == x && b == y) || (a == y && b == x); };
  // Numeric strings compare against numbers.
  return pair(Sort::Number, Sort::Text);
}

}  // namespace

namespace ir {

ExprPtr path(std::string text, PathScope scope) {
  PathRefNode n{std::move(text), scope, std::nullopt};
  try {
    n.path = PropertyPath::parse(n.text);
  } catch (const ParseError& e) {
    // Request parameters may use bracketed wire names such as created[gt].
    require(scope == PathScope::Request, std::string("bad path '") + n.text + "': " + e.what());
  }
  return std::make_shared<const Expr>(Sort::Any, std::move(n));
}

ExprPtr request(std::string text) { return path(std::move(text), PathScope::Request); }
ExprPtr response(std::string text) { return path(std::move(text), PathScope::Response); }
ExprPtr element(std::string text) { return path(std::move(text), PathScope::Element); }

ExprPtr lit(Value v) {
  require(!v.is_absent(), "literal cannot be absent");
  Sort s = literal_sort(v);
  return std::make_shared<const Expr>(s, LiteralNode{std::move(v)});
}

ExprPtr compare(CompareOp op, ExprPtr lhs, ExprPtr rhs) {
  require(lhs && rhs, "compare: missing operand");
  require(is_term(lhs->sort()) && is_term(rhs->sort()), "compare: operands must be terms");
  if (op == CompareOp::Eq || op == CompareOp::Ne) {
    require(eq_compatible(lhs->sort(), rhs->sort()), "compare: incompatible operand sorts " +
                                                         std::string(to_string(lhs->sort())) + " and " +
                                                         std::string(to_string(rhs->sort())));
  } else {
    for (const auto& e : {lhs, rhs})
      require(e->sort() == Sort::Number || e->sort() == Sort::Text || e->sort() == Sort::Any,
              "compare: ordering over " + std::string(to_string(e->sort())));
  }
  return std::make_shared<const Expr>(Sort::Verdict, CompareNode{op, std::move(lhs), std::move(rhs)});
}

ExprPtr arith(ArithOp op, ExprPtr lhs, ExprPtr rhs) {
  require_sort(lhs, {Sort::Number, Sort::Any}, "arith");
  require_sort(rhs, {Sort::Number, Sort::Any}, "arith");
  return std::make_shared<const Expr>(Sort::Number, ArithNode{op, std::move(lhs), std::move(rhs)});
}

ExprPtr length(ExprPtr e) {
  require_sort(e, {Sort::Text, Sort::Any}, "length");
  return std::make_shared<const Expr>(Sort::Number, StrOpNode{StrOpKind::Length, {std::move(e)}, {}, nullptr});
}

ExprPtr lowercase(ExprPtr e) {
  require_sort(e, {Sort::Text, Sort::Any}, "lowercase");
  return std::make_shared<const Expr>(Sort::Verdict, StrOpNode{StrOpKind::Lowercase, {std::move(e)}, {}, nullptr});
}

ExprPtr matches(ExprPtr e, std::string pattern) {
  require_sort(e, {Sort::Text, Sort::Number, Sort::Any}, "matches");
  std::shared_ptr<const std::regex> re;
  try {
    re = std::make_shared<const std::regex>(pattern, std::regex::ECMAScript);
  } catch (const std::regex_error& err) {
    throw IrBuildError("matches: invalid regex '" + pattern + "': " + err.what());
  }
  return std::make_shared<const Expr>(Sort::Verdict,
                                      StrOpNode{StrOpKind::MatchesRegex, {std::move(e)}, std::move(pattern), re});
}

ExprPtr substring_of(ExprPtr needle, ExprPtr haystack) {
  require_sort(needle, {Sort::Text, Sort::Number, Sort::Any}, "substring_of");
  require_sort(haystack, {Sort::Text, Sort::Any}, "substring_of");
  return std::make_shared<const Expr>(
      Sort::Verdict, StrOpNode{StrOpKind::IsSubstringOf, {std::move(needle), std::move(haystack)}, {}, nullptr});
}

ExprPtr in_set(ExprPtr e, std::vector<Value> set) {
  require(e && is_term(e->sort()), "in_set: operand must be a term");
  require(!set.empty(), "in_set: empty set");
  for (const auto& v : set) require(!v.is_absent(), "in_set: absent member");
  return std::make_shared<const Expr>(Sort::Verdict, InSetNode{std::move(e), std::move(set)});
}

ExprPtr type_check(ExprPtr e, TypeTag tag, std::string format) {
  require(e && is_term(e->sort()), "type: operand must be a term");
  std::shared_ptr<const TimePattern> pattern;
  if (tag == TypeTag::Date || tag == TypeTag::DateTime || tag == TypeTag::Time) {
    std::string spec = format;
    if (spec.empty()) spec = tag == TypeTag::Date ? "date" : tag == TypeTag::Time ? "time" : "iso8601";
    pattern = std::make_shared<const TimePattern>(TimePattern::compile(spec));
  } else {
    require(format.empty(), "type: format only applies to date, datetime and time");
  }
  return std::make_shared<const Expr>(Sort::Verdict, TypeCheckNode{std::move(e), tag, std::move(format), pattern});
}

ExprPtr array_size(ExprPtr e) {
  require_sort(e, {Sort::Array, Sort::Any}, "array_size");
  return std::make_shared<const Expr>(Sort::Number, ArraySizeNode{std::move(e)});
}

ExprPtr quantifier(QuantKind kind, ExprPtr array, ExprPtr body) {
  require_sort(array, {Sort::Array, Sort::Any}, "quantifier array");
  require_sort(body, {Sort::Verdict}, "quantifier body");
  return std::make_shared<const Expr>(Sort::Verdict, QuantifierNode{kind, std::move(array), std::move(body)});
}

ExprPtr all(ExprPtr array, ExprPtr body) { return quantifier(QuantKind::All, std::move(array), std::move(body)); }
ExprPtr any(ExprPtr array, ExprPtr body) { return quantifier(QuantKind::Any, std::move(array), std::move(body)); }

ExprPtr logic(LogicOp op, std::vector<ExprPtr> args) {
  if (op == LogicOp::Not) {
    if (args.size() != 1) throw BadArity("not takes exactly one argument");
  } else if (args.empty()) {
    throw BadArity(std::string(to_string(op)) + " needs at least one argument");
  }
  for (const auto& a : args) require_sort(a, {Sort::Verdict}, to_string(op));
  return std::make_shared<const Expr>(Sort::Verdict, LogicNode{op, std::move(args)});
}

ExprPtr and_(std::vector<ExprPtr> args) { return logic(LogicOp::And, std::move(args)); }
ExprPtr or_(std::vector<ExprPtr> args) { return logic(LogicOp::Or, std::move(args)); }
ExprPtr not_(ExprPtr arg) { return logic(LogicOp::Not, {std::move(arg)}); }

ExprPtr sorted(ExprPtr array, std::optional<std::string> key, Direction direction) {
  require_sort(array, {Sort::Array, Sort::Any}, "sorted");
  std::optional<PropertyPath> key_path;
  if (key && !key->empty()) {
    try {
      key_path = PropertyPath::parse(*key);
    } catch (const ParseError& e) {
      throw IrBuildError("sorted: bad key '" + *key + "': " + e.what());
    }
  }
  return std::make_shared<const Expr>(Sort::Verdict, SortedNode{std::move(array), std::move(key_path), direction});
}

}  // namespace ir

namespace {

void check_binders(const Expr& e, int depth) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, PathRefNode>) {
          if (n.scope == PathScope::Element && depth == 0)
            throw IrBuildError("element reference '" + n.text + "' outside a quantifier");
        } else if constexpr (std::is_same_v<T, LiteralNode>) {
        } else if constexpr (std::is_same_v<T, CompareNode> || std::is_same_v<T, ArithNode>) {
          check_binders(*n.lhs, depth);
          check_binders(*n.rhs, depth);
        } else if constexpr (std::is_same_v<T, StrOpNode> || std::is_same_v<T, LogicNode>) {
          for (const auto& a : n.args) check_binders(*a, depth);
        } else if constexpr (std::is_same_v<T, InSetNode> || std::is_same_v<T, TypeCheckNode> ||
                             std::is_same_v<T, ArraySizeNode>) {
          check_binders(*n.expr, depth);
        } else if constexpr (std::is_same_v<T, QuantifierNode>) {
          check_binders(*n.array, depth);
          check_binders(*n.body, depth + 1);
        } else if constexpr (std::is_same_v<T, SortedNode>) {
          check_binders(*n.array, depth);
        }
      },
      e.node());
}

}  // namespace

ValidatorProgram make_program(std::string constraint_id, InputsRequired inputs, ExprPtr body,
                              std::optional<OperationId> operation, std::optional<Category> category) {
  require(body != nullptr, "program without a body");
  require(body->sort() == Sort::Verdict, "program body must be a verdict expression");
  check_binders(*body, 0);
  require(!constraint_id.empty(), "program without a constraint id");
  return ValidatorProgram{std::move(constraint_id), inputs, std::move(body), std::move(operation), category};
}

// ---------------------------------------------------------------------------
// Structure

bool structurally_equal(const Expr& a, const Expr& b) {
  if (a.sort() != b.sort() || a.node().index() != b.node().index()) return false;
  auto eq = [](const ExprPtr& x, const ExprPtr& y) { return structurally_equal(*x, *y); };
  auto eq_list = [&](const std::vector<ExprPtr>& x, const std::vector<ExprPtr>& y) {
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (!eq(x[i], y[i])) return false;
    return true;
  };
  return std::visit(
      [&](const auto& n) -> bool {
        using T = std::decay_t<decltype(n)>;
        const T& m = std::get<T>(b.node());
        if constexpr (std::is_same_v<T, PathRefNode>) {
          return n.text == m.text && n.scope == m.scope;
        } else if constexpr (std::is_same_v<T, LiteralNode>) {
          return n.value == m.value;
        } else if constexpr (std::is_same_v<T, CompareNode>) {
          return n.op == m.op && eq(n.lhs, m.lhs) && eq(n.rhs, m.rhs);
        } else if constexpr (std::is_same_v<T, ArithNode>) {
          return n.op == m.op && eq(n.lhs, m.lhs) && eq(n.rhs, m.rhs);
        } else if constexpr (std::is_same_v<T, StrOpNode>) {
          return n.op == m.op && n.pattern == m.pattern && eq_list(n.args, m.args);
        } else if constexpr (std::is_same_v<T, InSetNode>) {
          return n.set == m.set && eq(n.expr, m.expr);
        } else if constexpr (std::is_same_v<T, TypeCheckNode>) {
          return n.tag == m.tag && n.format == m.format && eq(n.expr, m.expr);
        } else if constexpr (std::is_same_v<T, ArraySizeNode>) {
          return eq(n.expr, m.expr);
        } else if constexpr (std::is_same_v<T, QuantifierNode>) {
          return n.kind == m.kind && eq(n.array, m.array) && eq(n.body, m.body);
        } else if constexpr (std::is_same_v<T, LogicNode>) {
          return n.op == m.op && eq_list(n.args, m.args);
        } else {
          return n.direction == m.direction && n.key == m.key && eq(n.array, m.array);
        }
      },
      a.node());
}

bool structurally_equal(const ValidatorProgram& a, const ValidatorProgram& b) {
  return a.constraint_id == b.constraint_id && a.inputs_required == b.inputs_required && a.operation == b.operation &&
         a.category == b.category && structurally_equal(*a.body, *b.body);
}

namespace {

template <typename F>
void for_children(const Expr& e, F&& f) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, CompareNode> || std::is_same_v<T, ArithNode>) {
          f(*n.lhs);
          f(*n.rhs);
        } else if constexpr (std::is_same_v<T, StrOpNode> || std::is_same_v<T, LogicNode>) {
          for (const auto& a : n.args) f(*a);
        } else if constexpr (std::is_same_v<T, InSetNode> || std::is_same_v<T, TypeCheckNode> ||
                             std::is_same_v<T, ArraySizeNode>) {
          f(*n.expr);
        } else if constexpr (std::is_same_v<T, QuantifierNode>) {
          f(*n.array);
          f(*n.body);
        } else if constexpr (std::is_same_v<T, SortedNode>) {
          f(*n.array);
        }
      },
      e.node());
}

}  // namespace

bool any_node(const Expr& e, const std::function<bool(const Expr&)>& pred) {
  if (pred(e)) return true;
  bool found = false;
  for_children(e, [&](const Expr& c) { found = found || any_node(c, pred); });
  return found;
}

std::size_t node_count(const Expr& e) {
  std::size_t n = 1;
  for_children(e, [&](const Expr& c) { n += node_count(c); });
  return n;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

struct Frame {
  const Value* value;
  std::string path;
};

struct Env {
  const Value& request;
  const Value& response;
  std::vector<Frame> elements;
};

/// Result of evaluating a term: a present value, or a verdict explaining why
/// there is none (Unknown for missing data, Mismatched for a type fault).
struct Term {
  std::optional<Value> value;
  Verdict verdict;
  std::string path;
  bool null = false;
};

std::string join_path(const std::string& base, const std::string& text) {
  if (text.empty()) return base;
  if (base.empty()) return text;
  return base + "." + text;
}

Value traverse(const Value& cur, const std::vector<PathSegment>& segs, std::size_t i, std::string& rendered,
               std::string* null_at) {
  if (i == segs.size()) return cur;
  if (cur.is_null()) {
    if (null_at && null_at->empty()) *null_at = rendered;
    return nullptr;
  }
  const auto& seg = segs[i];
  if (seg.wildcard) {
    if (!cur.is_array()) return absent_value();
    bool nested = false;
    for (std::size_t k = i + 1; k < segs.size(); ++k) nested = nested || segs[k].wildcard;
    Array out;
    std::string base = rendered + "[]";
    for (const auto& item : cur.as_array()) {
      std::string r = base;
      Value v = traverse(item, segs, i + 1, r, nullptr);
      if (v.is_absent()) continue;
      if (nested && v.is_array()) {
        for (auto& x : v.as_array()) out.push_back(std::move(x));
      } else {
        out.push_back(std::move(v));
      }
    }
    rendered = base;
    return Value(std::move(out));
  }
  if (!cur.is_object()) return absent_value();
  rendered = rendered.empty() ? seg.name : rendered + "." + seg.name;
  return traverse(cur.field(seg.name), segs, i + 1, rendered, null_at);
}

Term resolve_path(const PathRefNode& n, const Env& env) {
  const Value* root = nullptr;
  std::string base;
  switch (n.scope) {
    case PathScope::Request:
      root = &env.request;
      base = "input";
      break;
    case PathScope::Response:
      root = &env.response;
      base = "return";
      break;
    case PathScope::Element:
      root = env.elements.back().value;
      base = env.elements.back().path;
      break;
  }
  std::string full = n.text.empty() ? base : (n.scope == PathScope::Element ? join_path(base, n.text) : base + "." + n.text);

  Value v = absent_value();
  std::string null_at;
  if (n.scope == PathScope::Request && root->is_object()) {
    const Value& raw = root->field(n.text);
    if (!raw.is_absent()) v = raw;
  }
  if (v.is_absent() && n.path) {
    std::string rendered;
    v = traverse(*root, n.path->segments(), 0, rendered, &null_at);
  }
  if (v.is_absent()) return {std::nullopt, Verdict::unknown(full + " is absent", full), full};
  if (v.is_null()) {
    std::string where = null_at.empty() ? full : join_path(base, null_at);
    return {std::nullopt, Verdict::unknown(where + " is null", where), full, true};
  }
  return {std::move(v), {}, full};
}

Term fault(const std::string& path, const Value& v, const std::string& why) {
  return {std::nullopt, Verdict::mismatched(FailureKind::Type, why, path, v), path};
}

std::optional<Value> numeric_text(const std::string& s) {
  if (s.empty()) return std::nullopt;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  std::int64_t i = 0;
  auto r = std::from_chars(b, e, i);
  if (r.ec == std::errc() && r.ptr == e) return Value(i);
  double d = 0;
  auto rd = std::from_chars(b, e, d);
  if (rd.ec == std::errc() && rd.ptr == e && std::isfinite(d)) return Value(d);
  return std::nullopt;
}

std::optional<Value> as_numeric(const Value& v) {
  if (v.is_number()) return v;
  if (v.is_text()) return numeric_text(v.as_text());
  return std::nullopt;
}

constexpr double kRelTol = 1e-9;

bool reals_equal(double a, double b) {
  if (a == b) return true;
  return std::fabs(a - b) <= kRelTol * std::max(std::fabs(a), std::fabs(b));
}

// -1, 0, +1, or nullopt when the values have no order.
std::optional<int> order(const Value& a, const Value& b) {
  if (a.is_number() && b.is_number()) {
    if (a.is_integer() && b.is_integer()) {
      auto x = a.as_integer(), y = b.as_integer();
      return x < y ? -1 : (x > y ? 1 : 0);
    }
    double x = a.as_number(), y = b.as_number();
    if (reals_equal(x, y)) return 0;
    return x < y ? -1 : 1;
  }
  if (a.is_number() || b.is_number()) {
    auto x = as_numeric(a), y = as_numeric(b);
    if (x && y) return order(*x, *y);
    return std::nullopt;
  }
  if (a.is_text() && b.is_text()) {
    int c = a.as_text().compare(b.as_text());
    return c < 0 ? -1 : (c > 0 ? 1 : 0);
  }
  return std::nullopt;
}

bool values_equal(const Value& a, const Value& b) {
  if (auto o = order(a, b)) return *o == 0;
  if (a.is_array() && b.is_array()) {
    const auto& x = a.as_array();
    const auto& y = b.as_array();
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (!values_equal(x[i], y[i])) return false;
    return true;
  }
  if (a.is_object() && b.is_object()) {
    const auto& x = a.as_object();
    const auto& y = b.as_object();
    if (x.size() != y.size()) return false;
    for (auto it = x.begin(), jt = y.begin(); it != x.end(); ++it, ++jt)
      if (it->first != jt->first || !values_equal(it->second, jt->second)) return false;
    return true;
  }
  return a == b;
}

// nullopt: the operands cannot be ordered.
std::optional<bool> apply_compare(CompareOp op, const Value& a, const Value& b) {
  switch (op) {
    case CompareOp::Eq: return values_equal(a, b);
    case CompareOp::Ne: return !values_equal(a, b);
    default: break;
  }
  auto o = order(a, b);
  if (!o) return std::nullopt;
  switch (op) {
    case CompareOp::Lt: return *o < 0;
    case CompareOp::Le: return *o <= 0;
    case CompareOp::Gt: return *o > 0;
    case CompareOp::Ge: return *o >= 0;
    default: return std::nullopt;
  }
}

std::size_t utf8_length(const std::string& s) {
  std::size_t n = 0;
  for (unsigned char c : s)
    if ((c & 0xC0) != 0x80) ++n;
  return n;
}

std::string text_of(const Value& v) { return v.is_text() ? v.as_text() : v.render(); }

bool is_literal_null(const Expr& e) {
  auto l = e.as<LiteralNode>();
  return l && l->value.is_null();
}

Verdict eval_verdict(const Expr& e, Env& env);

Term eval_term(const Expr& e, Env& env) {
  if (auto p = e.as<PathRefNode>()) return resolve_path(*p, env);
  if (auto l = e.as<LiteralNode>()) {
    if (l->value.is_null()) return {std::nullopt, Verdict::unknown("null literal"), {}};
    return {l->value, {}, {}};
  }
  if (auto a = e.as<ArithNode>()) {
    Term x = eval_term(*a->lhs, env);
    if (!x.value) return x;
    Term y = eval_term(*a->rhs, env);
    if (!y.value) return y;
    auto nx = as_numeric(*x.value);
    if (!nx) return fault(x.path, *x.value, x.path + " is not numeric");
    auto ny = as_numeric(*y.value);
    if (!ny) return fault(y.path, *y.value, y.path + " is not numeric");
    std::string where = x.path.empty() ? y.path : x.path;
    if (nx->is_integer() && ny->is_integer()) {
      std::int64_t p = nx->as_integer(), q = ny->as_integer(), r = 0;
      bool overflow = false;
      switch (a->op) {
        case ArithOp::Add: overflow = __builtin_add_overflow(p, q, &r); break;
        case ArithOp::Sub: overflow = __builtin_sub_overflow(p, q, &r); break;
        case ArithOp::Mul: overflow = __builtin_mul_overflow(p, q, &r); break;
        case ArithOp::Div:
          if (q == 0) return {std::nullopt, Verdict::unknown("division by zero", where), where};
          if (p % q == 0 && !(p == INT64_MIN && q == -1)) return {Value(p / q), {}, where};
          return {Value(static_cast<double>(p) / static_cast<double>(q)), {}, where};
      }
      if (!overflow) return {Value(r), {}, where};
    }
    double p = nx->as_number(), q = ny->as_number(), r = 0;
    switch (a->op) {
      case ArithOp::Add: r = p + q; break;
      case ArithOp::Sub: r = p - q; break;
      case ArithOp::Mul: r = p * q; break;
      case ArithOp::Div:
        if (q == 0) return {std::nullopt, Verdict::unknown("division by zero", where), where};
        r = p / q;
        break;
    }
    return {Value(r), {}, where};
  }
  if (auto s = e.as<StrOpNode>(); s && s->op == StrOpKind::Length) {
    Term x = eval_term(*s->args[0], env);
    if (!x.value) return x;
    if (!x.value->is_text()) return fault(x.path, *x.value, x.path + " is not a string");
    return {Value(static_cast<std::int64_t>(utf8_length(x.value->as_text()))), {}, x.path};
  }
  if (auto n = e.as<ArraySizeNode>()) {
    Term x = eval_term(*n->expr, env);
    if (!x.value) return x;
    if (!x.value->is_array()) return fault(x.path, *x.value, x.path + " is not an array");
    return {Value(static_cast<std::int64_t>(x.value->as_array().size())), {}, x.path};
  }
  // Verdict-sorted nodes never appear in term position in a well-built tree.
  return {std::nullopt, Verdict::unknown("not a term"), {}};
}

Verdict eval_compare(const CompareNode& c, Env& env) {
  const bool lnull = is_literal_null(*c.lhs), rnull = is_literal_null(*c.rhs);
  if ((lnull || rnull) && (c.op == CompareOp::Eq || c.op == CompareOp::Ne)) {
    const Expr& other = lnull ? *c.rhs : *c.lhs;
    if (is_literal_null(other)) return c.op == CompareOp::Eq ? Verdict::matched()
                                                             : Verdict::mismatched(FailureKind::Comparison, "null != null");
    Term t = eval_term(other, env);
    const bool is_null = t.null;
    if (!t.value && !is_null) return t.verdict;
    if (c.op == CompareOp::Eq) {
      if (is_null) return Verdict::matched();
      return Verdict::mismatched(FailureKind::Comparison, t.path + " is not null", t.path, t.value);
    }
    if (is_null) return Verdict::mismatched(FailureKind::NullValue, t.verdict.path + " is null", t.verdict.path, Value(nullptr));
    return Verdict::matched();
  }

  Term x = eval_term(*c.lhs, env);
  Term y = eval_term(*c.rhs, env);
  if (!x.value && x.verdict.state == VerdictState::Unknown) return x.verdict;
  if (!y.value && y.verdict.state == VerdictState::Unknown) return y.verdict;
  if (!x.value) return x.verdict;
  if (!y.value) return y.verdict;

  // Prefer a response-side path when reporting.
  const Term& subject = (!x.path.empty() && !x.path.starts_with("input")) ? x : (!y.path.empty() ? y : x);
  auto result = apply_compare(c.op, *x.value, *y.value);
  if (!result) {
    return Verdict::mismatched(FailureKind::Type,
                               "cannot order " + x.value->render() + " and " + y.value->render(), subject.path,
                               subject.value);
  }
  if (*result) return Verdict::matched();
  std::string lhs = x.path.empty() ? x.value->render() : x.path + "=" + x.value->render();
  std::string rhs = y.path.empty() ? y.value->render() : y.path + "=" + y.value->render();
  return Verdict::mismatched(FailureKind::Comparison, lhs + " violates " + std::string(to_string(c.op)) + " " + rhs,
                             subject.path, subject.value);
}

const std::regex& url_regex() {
  static const std::regex re(R"(^[A-Za-z][A-Za-z0-9+.\-]*://[^\s/?#]+([/?#]\S*)?$)");
  return re;
}

const std::regex& email_regex() {
  static const std::regex re(R"(^[^\s@]+@[^\s@]+\.[^\s@]+$)");
  return re;
}

constexpr std::int64_t kMaxUnixTime = 253402300799;  // 9999-12-31T23:59:59Z

bool integral(const Value& v) {
  if (v.is_integer()) return true;
  return v.is_real() && std::isfinite(v.as_real()) && std::floor(v.as_real()) == v.as_real();
}

Verdict eval_type(const TypeCheckNode& t, Env& env) {
  Term x = eval_term(*t.expr, env);
  if (!x.value) return x.verdict;
  const Value& v = *x.value;
  auto type_fail = [&](const char* expected) {
    return Verdict::mismatched(FailureKind::Type, x.path + " is not " + expected + ": " + v.render(), x.path, v);
  };
  auto format_fail = [&](const std::string& expected) {
    return Verdict::mismatched(FailureKind::Format, x.path + " does not match " + expected + ": " + v.render(), x.path, v);
  };
  switch (t.tag) {
    case TypeTag::Boolean: return v.is_bool() ? Verdict::matched() : type_fail("a boolean");
    case TypeTag::Integer: return integral(v) ? Verdict::matched() : type_fail("an integer");
    case TypeTag::Number: return v.is_number() ? Verdict::matched() : type_fail("a number");
    case TypeTag::String: return v.is_text() ? Verdict::matched() : type_fail("a string");
    case TypeTag::ArrayOfString: {
      if (!v.is_array()) return type_fail("an array");
      const auto& arr = v.as_array();
      if (arr.empty()) return Verdict::unknown(x.path + " is empty", x.path);
      for (std::size_t i = 0; i < arr.size(); ++i) {
        if (arr[i].is_null()) continue;
        if (!arr[i].is_text()) {
          std::string p = x.path + "[" + std::to_string(i) + "]";
          return Verdict::mismatched(FailureKind::Type, p + " is not a string: " + arr[i].render(), p, arr[i]);
        }
      }
      return Verdict::matched();
    }
    case TypeTag::Url:
      if (!v.is_text()) return type_fail("a string");
      return std::regex_match(v.as_text(), url_regex()) ? Verdict::matched() : format_fail("an absolute URL");
    case TypeTag::Email:
      if (!v.is_text()) return type_fail("a string");
      return std::regex_match(v.as_text(), email_regex()) ? Verdict::matched() : format_fail("an email address");
    case TypeTag::Date:
    case TypeTag::DateTime:
    case TypeTag::Time:
      if (!v.is_text()) return type_fail("a string");
      return t.pattern->matches(v.as_text()) ? Verdict::matched() : format_fail("pattern " + t.pattern->source());
    case TypeTag::UnixTime: {
      if (!integral(v)) return type_fail("an integer timestamp");
      double d = v.as_number();
      if (d < 0 || d > static_cast<double>(kMaxUnixTime)) return format_fail("a Unix timestamp");
      return Verdict::matched();
    }
  }
  return Verdict::matched();
}

Verdict eval_strop(const StrOpNode& s, Env& env) {
  Term x = eval_term(*s.args[0], env);
  if (!x.value) return x.verdict;
  const Value& v = *x.value;
  switch (s.op) {
    case StrOpKind::Lowercase: {
      if (!v.is_text()) return Verdict::mismatched(FailureKind::Type, x.path + " is not a string", x.path, v);
      for (unsigned char c : v.as_text())
        if (std::isupper(c)) return Verdict::mismatched(FailureKind::Pattern, x.path + " is not lowercase: " + v.render(), x.path, v);
      return Verdict::matched();
    }
    case StrOpKind::MatchesRegex: {
      if (!v.is_text() && !v.is_number())
        return Verdict::mismatched(FailureKind::Type, x.path + " is not a string", x.path, v);
      if (std::regex_search(text_of(v), *s.regex)) return Verdict::matched();
      return Verdict::mismatched(FailureKind::Pattern, x.path + " does not match /" + s.pattern + "/: " + v.render(),
                                 x.path, v);
    }
    case StrOpKind::IsSubstringOf: {
      Term y = eval_term(*s.args[1], env);
      if (!y.value) return y.verdict;
      if (!(v.is_text() || v.is_number()) || !y.value->is_text())
        return Verdict::mismatched(FailureKind::Type, "substring test over non-strings", x.path, v);
      if (y.value->as_text().find(text_of(v)) != std::string::npos) return Verdict::matched();
      const Term& subject = x.path.starts_with("return") ? x : y;
      return Verdict::mismatched(FailureKind::Comparison, v.render() + " is not a substring of " + y.value->render(),
                                 subject.path, subject.value);
    }
    case StrOpKind::Length: break;
  }
  return Verdict::unknown("length in verdict position");
}

Verdict eval_in_set(const InSetNode& n, Env& env) {
  Term x = eval_term(*n.expr, env);
  if (!x.value) return x.verdict;
  for (const auto& m : n.set)
    if (!m.is_null() && values_equal(*x.value, m)) return Verdict::matched();
  std::string members;
  for (const auto& m : n.set) members += (members.empty() ? "" : ", ") + m.render();
  return Verdict::mismatched(FailureKind::Membership, x.path + "=" + x.value->render() + " not in {" + members + "}",
                             x.path, x.value);
}

Verdict eval_quantifier(const QuantifierNode& q, Env& env) {
  Term arr = eval_term(*q.array, env);
  if (!arr.value) return arr.verdict;
  if (!arr.value->is_array())
    return Verdict::mismatched(FailureKind::Type, arr.path + " is not an array", arr.path, arr.value);
  const auto& items = arr.value->as_array();
  if (items.empty()) return Verdict::unknown(arr.path + " is empty", arr.path);

  std::optional<Verdict> first_mismatch, first_match, first_unknown;
  for (std::size_t i = 0; i < items.size(); ++i) {
    env.elements.push_back({&items[i], arr.path + "[" + std::to_string(i) + "]"});
    Verdict v = eval_verdict(*q.body, env);
    env.elements.pop_back();
    if (v.state == VerdictState::Mismatched && !first_mismatch) first_mismatch = std::move(v);
    else if (v.state == VerdictState::Matched && !first_match) first_match = std::move(v);
    else if (v.state == VerdictState::Unknown && !first_unknown) first_unknown = std::move(v);
    if (q.kind == QuantKind::All && first_mismatch) return *first_mismatch;
    if (q.kind == QuantKind::Any && first_match) return Verdict::matched();
  }
  if (first_unknown) return *first_unknown;
  if (q.kind == QuantKind::All) return Verdict::matched();
  Verdict v = *first_mismatch;
  v.detail = "no element of " + arr.path + " satisfies the condition (first: " + v.detail + ")";
  return v;
}

Verdict eval_logic(const LogicNode& l, Env& env) {
  if (l.op == LogicOp::Not) {
    Verdict v = eval_verdict(*l.args[0], env);
    switch (v.state) {
      case VerdictState::Unknown: return v;
      case VerdictState::Mismatched: return Verdict::matched();
      case VerdictState::Matched:
        return Verdict::mismatched(FailureKind::Comparison, "negated condition holds", v.path, v.value);
    }
  }
  std::optional<Verdict> first_mismatch, first_unknown;
  for (const auto& a : l.args) {
    Verdict v = eval_verdict(*a, env);
    if (l.op == LogicOp::And && v.state == VerdictState::Mismatched) return v;
    if (l.op == LogicOp::Or && v.state == VerdictState::Matched) return v;
    if (v.state == VerdictState::Unknown && !first_unknown) first_unknown = std::move(v);
    else if (v.state == VerdictState::Mismatched && !first_mismatch) first_mismatch = std::move(v);
  }
  if (first_unknown) return *first_unknown;
  if (l.op == LogicOp::And) return Verdict::matched();
  return *first_mismatch;
}

Verdict eval_sorted(const SortedNode& s, Env& env) {
  Term arr = eval_term(*s.array, env);
  if (!arr.value) return arr.verdict;
  if (!arr.value->is_array())
    return Verdict::mismatched(FailureKind::Type, arr.path + " is not an array", arr.path, arr.value);
  const auto& items = arr.value->as_array();
  if (items.size() < 2) return Verdict::unknown(arr.path + " has fewer than two elements", arr.path);

  std::vector<Value> keys;
  keys.reserve(items.size());
  std::string suffix = s.key ? "." + s.key->render() : "";
  for (std::size_t i = 0; i < items.size(); ++i) {
    Value k = items[i];
    if (s.key) {
      std::string rendered;
      k = traverse(items[i], s.key->segments(), 0, rendered, nullptr);
    }
    std::string p = arr.path + "[" + std::to_string(i) + "]" + suffix;
    if (k.is_missing()) return Verdict::unknown(p + " is missing", p);
    keys.push_back(std::move(k));
  }
  for (std::size_t i = 0; i + 1 < keys.size(); ++i) {
    auto o = order(keys[i], keys[i + 1]);
    std::string p = arr.path + "[" + std::to_string(i + 1) + "]" + suffix;
    if (!o) return Verdict::mismatched(FailureKind::Type, "unorderable keys at " + p, p, keys[i + 1]);
    bool bad = s.direction == Direction::Asc ? *o > 0 : *o < 0;
    if (bad) {
      return Verdict::mismatched(FailureKind::Order,
                                 p + "=" + keys[i + 1].render() + " breaks " + std::string(to_string(s.direction)) +
                                     " order after " + keys[i].render(),
                                 p, keys[i + 1]);
    }
  }
  return Verdict::matched();
}

Verdict eval_verdict(const Expr& e, Env& env) {
  return std::visit(
      [&](const auto& n) -> Verdict {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, CompareNode>) return eval_compare(n, env);
        else if constexpr (std::is_same_v<T, StrOpNode>) return eval_strop(n, env);
        else if constexpr (std::is_same_v<T, InSetNode>) return eval_in_set(n, env);
        else if constexpr (std::is_same_v<T, TypeCheckNode>) return eval_type(n, env);
        else if constexpr (std::is_same_v<T, QuantifierNode>) return eval_quantifier(n, env);
        else if constexpr (std::is_same_v<T, LogicNode>) return eval_logic(n, env);
        else if constexpr (std::is_same_v<T, SortedNode>) return eval_sorted(n, env);
        else return Verdict::unknown("term in verdict position");
      },
      e.node());
}

}  // namespace

Verdict evaluate(const Expr& body, const Value& request, const Value& response) {
  Env env{request, response, {}};
  return eval_verdict(body, env);
}

Verdict evaluate(const ValidatorProgram& program, const Value& request, const Value& response) {
  return evaluate(*program.body, request, response);
}

// ---------------------------------------------------------------------------
// Rendering

std::string render_expr(const Expr& e) {
  return std::visit(
      [&](const auto& n) -> std::string {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, PathRefNode>) {
          switch (n.scope) {
            case PathScope::Request: return "input." + n.text;
            case PathScope::Response: return n.text.empty() ? "return" : "return." + n.text;
            case PathScope::Element: return n.text.empty() ? "it" : "it." + n.text;
          }
          return n.text;
        } else if constexpr (std::is_same_v<T, LiteralNode>) {
          return n.value.render();
        } else if constexpr (std::is_same_v<T, CompareNode>) {
          return render_expr(*n.lhs) + " " + std::string(to_string(n.op)) + " " + render_expr(*n.rhs);
        } else if constexpr (std::is_same_v<T, ArithNode>) {
          return "(" + render_expr(*n.lhs) + " " + std::string(to_string(n.op)) + " " + render_expr(*n.rhs) + ")";
        } else if constexpr (std::is_same_v<T, StrOpNode>) {
          switch (n.op) {
            case StrOpKind::Length: return "length(" + render_expr(*n.args[0]) + ")";
            case StrOpKind::Lowercase: return "lowercase(" + render_expr(*n.args[0]) + ")";
            case StrOpKind::MatchesRegex: return render_expr(*n.args[0]) + " matches /" + n.pattern + "/";
            case StrOpKind::IsSubstringOf: return render_expr(*n.args[0]) + " in " + render_expr(*n.args[1]);
          }
          return {};
        } else if constexpr (std::is_same_v<T, InSetNode>) {
          std::string s;
          for (const auto& v : n.set) s += (s.empty() ? "" : ", ") + v.render();
          return render_expr(*n.expr) + " in {" + s + "}";
        } else if constexpr (std::is_same_v<T, TypeCheckNode>) {
          std::string tag(to_string(n.tag));
          if (!n.format.empty()) tag += "(" + n.format + ")";
          return "is_" + tag + "(" + render_expr(*n.expr) + ")";
        } else if constexpr (std::is_same_v<T, ArraySizeNode>) {
          return "size(" + render_expr(*n.expr) + ")";
        } else if constexpr (std::is_same_v<T, QuantifierNode>) {
          return std::string(to_string(n.kind)) + " it in " + render_expr(*n.array) + ": " + render_expr(*n.body);
        } else if constexpr (std::is_same_v<T, LogicNode>) {
          if (n.op == LogicOp::Not) return "not (" + render_expr(*n.args[0]) + ")";
          std::string s;
          for (const auto& a : n.args) s += (s.empty() ? "" : " " + std::string(to_string(n.op)) + " ") + ("(" + render_expr(*a) + ")");
          return s;
        } else {
          return "sorted_" + std::string(to_string(n.direction)) + "(" + render_expr(*n.array) +
                 (n.key ? ", " + n.key->render() : "") + ")";
        }
      },
      e.node());
}

}  // namespace specguard
