#include <functional>

#include "specguard/errors.hpp"
#include "specguard/ir.hpp"

namespace specguard {

namespace {

using Leaf = std::function<ExprPtr(ExprPtr)>;

// Applies `leaf` to the target, quantifying universally over every `[]`.
ExprPtr wrap(const PropertyPath& p, PathScope scope, const Leaf& leaf) {
  const auto& segs = p.segments();
  std::size_t w = 0;
  while (w < segs.size() && !segs[w].wildcard) ++w;
  if (w == segs.size()) return leaf(ir::path(p.render(), scope));
  ExprPtr array = ir::path(p.prefix(w).render(), scope);
  return ir::all(array, wrap(p.suffix(w + 1), PathScope::Element, leaf));
}

PropertyPath parse_target(const std::string& target) {
  try {
    return PropertyPath::parse(target);
  } catch (const ParseError& e) {
    throw IrBuildError("bad builtin target '" + target + "': " + e.what());
  }
}

const Value& value_arg(const std::vector<BuiltinArg>& args, std::size_t i, std::string_view cat) {
  const auto* v = std::get_if<Value>(&args[i]);
  if (!v) throw BadArity(std::string(cat) + ": argument " + std::to_string(i + 1) + " must be a value");
  return *v;
}

std::string text_arg(const std::vector<BuiltinArg>& args, std::size_t i, std::string_view cat) {
  const Value& v = value_arg(args, i, cat);
  if (!v.is_text()) throw BadArity(std::string(cat) + ": argument " + std::to_string(i + 1) + " must be text");
  return v.as_text();
}

void arity(const std::vector<BuiltinArg>& args, std::size_t lo, std::size_t hi, std::string_view cat) {
  if (args.size() < lo || args.size() > hi) {
    std::string want = lo == hi ? std::to_string(lo) : std::to_string(lo) + ".." + std::to_string(hi);
    throw BadArity(std::string(cat) + " takes " + want + " argument(s), got " + std::to_string(args.size()));
  }
}

CompareOp compare_op_from(const std::string& s, std::string_view cat) {
  if (s == "=" || s == "==") return CompareOp::Eq;
  if (s == "!=") return CompareOp::Ne;
  if (s == "<") return CompareOp::Lt;
  if (s == "<=") return CompareOp::Le;
  if (s == ">") return CompareOp::Gt;
  if (s == ">=") return CompareOp::Ge;
  throw BadArity(std::string(cat) + ": unknown comparison '" + s + "'");
}

// Bounds check over a derived number: exact when one bound is given, range for two.
ExprPtr bounded(ExprPtr subject, const std::vector<BuiltinArg>& args, std::string_view cat) {
  arity(args, 1, 2, cat);
  const Value& lo = value_arg(args, 0, cat);
  if (args.size() == 1) {
    if (!lo.is_number()) throw BadArity(std::string(cat) + ": exact bound must be a number");
    return ir::compare(CompareOp::Eq, subject, ir::lit(lo));
  }
  const Value& hi = value_arg(args, 1, cat);
  if (!(lo.is_number() || lo.is_null()) || !(hi.is_number() || hi.is_null()) || (lo.is_null() && hi.is_null()))
    throw BadArity(std::string(cat) + ": bounds must be numbers (null = open), at least one given");
  std::vector<ExprPtr> parts;
  if (!lo.is_null()) parts.push_back(ir::compare(CompareOp::Ge, subject, ir::lit(lo)));
  if (!hi.is_null()) parts.push_back(ir::compare(CompareOp::Le, subject, ir::lit(hi)));
  return parts.size() == 1 ? parts[0] : ir::and_(std::move(parts));
}

PropertyPath strip_trailing_wildcard(const PropertyPath& p) {
  if (!p.empty() && p.segments().back().wildcard) return p.prefix(p.size() - 1);
  return p;
}

ExprPtr type_builtin(const PropertyPath& target, const std::vector<BuiltinArg>& args, TypeTag tag, std::string_view cat,
                     bool takes_format) {
  arity(args, 0, takes_format ? 1 : 0, cat);
  std::string format = args.empty() ? std::string() : text_arg(args, 0, cat);
  return wrap(target, PathScope::Response, [&](ExprPtr t) { return ir::type_check(t, tag, format); });
}

}  // namespace

ExprPtr builtin(Category category, const std::string& target_text, const std::vector<BuiltinArg>& args) {
  const std::string_view cat = to_string(category);
  switch (category) {
    case Category::InputOutput: {
      arity(args, 1, 2, cat);
      std::string param = text_arg(args, 0, cat);
      CompareOp op = args.size() == 2 ? compare_op_from(text_arg(args, 1, cat), cat) : CompareOp::Eq;
      return wrap(parse_target(target_text), PathScope::Response,
                  [&](ExprPtr t) { return ir::compare(op, t, ir::request(param)); });
    }
    case Category::NaryAtomic: {
      arity(args, 2, 2, cat);
      CompareOp op = compare_op_from(text_arg(args, 0, cat), cat);
      const auto* rhs = std::get_if<ExprPtr>(&args[1]);
      if (!rhs || !*rhs) throw BadArity(std::string(cat) + ": second argument must be an expression");
      return wrap(parse_target(target_text), PathScope::Response, [&](ExprPtr t) { return ir::compare(op, t, *rhs); });
    }
    case Category::Composite: {
      if (args.size() < 2) throw BadArity(std::string(cat) + " needs at least two expressions");
      std::vector<ExprPtr> parts;
      for (const auto& a : args) {
        const auto* e = std::get_if<ExprPtr>(&a);
        if (!e || !*e) throw BadArity(std::string(cat) + ": arguments must be expressions");
        parts.push_back(*e);
      }
      return ir::and_(std::move(parts));
    }
    case Category::ValueInSet: {
      if (args.empty()) throw BadArity(std::string(cat) + " needs a set");
      std::vector<Value> set;
      if (args.size() == 1 && value_arg(args, 0, cat).is_array()) {
        set = value_arg(args, 0, cat).as_array();
      } else {
        for (std::size_t i = 0; i < args.size(); ++i) set.push_back(value_arg(args, i, cat));
      }
      if (set.empty()) throw BadArity(std::string(cat) + ": empty set");
      return wrap(parse_target(target_text), PathScope::Response, [&](ExprPtr t) { return ir::in_set(t, set); });
    }
    case Category::ValueInRange: {
      arity(args, 2, 2, cat);
      return wrap(parse_target(target_text), PathScope::Response, [&](ExprPtr t) { return bounded(t, args, cat); });
    }
    case Category::StringSpecificLength:
      return wrap(parse_target(target_text), PathScope::Response,
                  [&](ExprPtr t) { return bounded(ir::length(t), args, cat); });
    case Category::ArraySpecificSizes:
      return wrap(strip_trailing_wildcard(parse_target(target_text)), PathScope::Response,
                  [&](ExprPtr t) { return bounded(ir::array_size(t), args, cat); });
    case Category::TemplateLiterals: {
      arity(args, 1, 1, cat);
      std::string pattern = text_arg(args, 0, cat);
      return wrap(parse_target(target_text), PathScope::Response, [&](ExprPtr t) { return ir::matches(t, pattern); });
    }
    case Category::ArrayOfString:
      return type_builtin(strip_trailing_wildcard(parse_target(target_text)), args, TypeTag::ArrayOfString, cat, false);
    case Category::IsUrl: return type_builtin(parse_target(target_text), args, TypeTag::Url, cat, false);
    case Category::IsBoolean: return type_builtin(parse_target(target_text), args, TypeTag::Boolean, cat, false);
    case Category::IsNumber: return type_builtin(parse_target(target_text), args, TypeTag::Number, cat, false);
    case Category::IsUnixTime: return type_builtin(parse_target(target_text), args, TypeTag::UnixTime, cat, false);
    case Category::IsDate: return type_builtin(parse_target(target_text), args, TypeTag::Date, cat, true);
    case Category::IsDateTime: return type_builtin(parse_target(target_text), args, TypeTag::DateTime, cat, true);
    case Category::IsTime: return type_builtin(parse_target(target_text), args, TypeTag::Time, cat, true);
    case Category::Uncategorized: break;
  }
  throw BadArity("no builtin for category " + std::string(cat));
}

}  // namespace specguard
