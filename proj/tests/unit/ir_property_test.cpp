// Randomized properties of the validator IR: serialization round-trips,
// evaluation purity, and strong Kleene laws against a reference model.

#include <random>

#include <gtest/gtest.h>

#include <specguard/ir.hpp>

using namespace specguard;

namespace {

struct Gen {
  std::mt19937_64 rng;
  explicit Gen(std::uint64_t seed) : rng(seed) {}

  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

  ExprPtr term(bool in_element) {
    static const char* fields[] = {"a", "b", "s", "t"};
    switch (pick(0, in_element ? 3 : 2)) {
      case 0: return ir::response(fields[pick(0, 3)]);
      case 1: return ir::request(fields[pick(0, 3)]);
      case 2: return ir::lit(pick(0, 1) ? Value(pick(-3, 3)) : Value(std::string(1, static_cast<char>('a' + pick(0, 2)))));
      default: return ir::element(fields[pick(0, 3)]);
    }
  }

  ExprPtr verdict(int depth, bool in_element = false) {
    int k = depth <= 0 ? pick(0, 3) : pick(0, 7);
    switch (k) {
      case 0: return ir::compare(static_cast<CompareOp>(pick(0, 5)), term(in_element), term(in_element));
      case 1: return ir::in_set(term(in_element), {Value(1), Value("a")});
      case 2: return ir::type_check(term(in_element), static_cast<TypeTag>(pick(0, 4)));
      case 3: return ir::matches(term(in_element), "^[a-c]+$");
      case 4: return ir::not_(verdict(depth - 1, in_element));
      case 5: return ir::and_({verdict(depth - 1, in_element), verdict(depth - 1, in_element)});
      case 6: return ir::or_({verdict(depth - 1, in_element), verdict(depth - 1, in_element), verdict(depth - 1, in_element)});
      default:
        return ir::quantifier(pick(0, 1) ? QuantKind::All : QuantKind::Any, ir::response("xs"), verdict(depth - 1, true));
    }
  }

  Value scalar() {
    switch (pick(0, 5)) {
      case 0: return Value(Absent{});
      case 1: return Value(nullptr);
      case 2: return Value(pick(-3, 3));
      case 3: return Value(pick(0, 1) == 1);
      default: return Value(std::string(static_cast<std::size_t>(pick(1, 2)), static_cast<char>('a' + pick(0, 3))));
    }
  }

  Value object(bool with_array) {
    Object o;
    for (const char* f : {"a", "b", "s", "t"}) {
      Value v = scalar();
      if (!v.is_absent()) o[f] = v;
    }
    if (with_array && pick(0, 4)) {
      Array xs;
      for (int i = pick(0, 3); i > 0; --i) xs.push_back(object(false));
      o["xs"] = Value(std::move(xs));
    }
    return Value(std::move(o));
  }
};

}  // namespace

TEST(IrProperty, SerializationRoundTripPreservesStructureAndVerdicts) {
  Gen g(11);
  for (int i = 0; i < 3000; ++i) {
    auto p = make_program("p" + std::to_string(i), InputsRequired::Both, g.verdict(3));
    auto back = parse_program(serialize_program(p));
    ASSERT_TRUE(structurally_equal(p, back)) << serialize_program(p);
    Value req = g.object(false), resp = g.object(true);
    auto a = evaluate(p, req, resp), b = evaluate(back, req, resp);
    ASSERT_EQ(a.state, b.state);
    ASSERT_EQ(a.path, b.path);
  }
}

TEST(IrProperty, EvaluationIsTotalAndDeterministic) {
  Gen g(12);
  for (int i = 0; i < 3000; ++i) {
    auto p = make_program("p", InputsRequired::Both, g.verdict(4));
    Value req = g.object(false), resp = g.object(true);
    Verdict v1, v2;
    ASSERT_NO_THROW(v1 = evaluate(p, req, resp));
    v2 = evaluate(p, req, resp);
    ASSERT_EQ(v1.state, v2.state);
    ASSERT_EQ(v1.detail, v2.detail);
    if (v1.state != VerdictState::Mismatched) ASSERT_EQ(v1.failure, FailureKind::None);
  }
}

TEST(IrProperty, KleeneLawsOverGeneratedExpressions) {
  Gen g(13);
  auto s = [](const ExprPtr& e, const Value& req, const Value& resp) { return score(evaluate(*e, req, resp).state); };
  for (int i = 0; i < 4000; ++i) {
    ExprPtr a = g.verdict(2), b = g.verdict(2), c = g.verdict(1);
    Value req = g.object(false), resp = g.object(true);
    int va = s(a, req, resp), vb = s(b, req, resp), vc = s(c, req, resp);
    ASSERT_EQ(s(ir::and_({a, b}), req, resp), std::min(va, vb));
    ASSERT_EQ(s(ir::or_({a, b}), req, resp), std::max(va, vb));
    ASSERT_EQ(s(ir::and_({b, a}), req, resp), s(ir::and_({a, b}), req, resp));
    ASSERT_EQ(s(ir::or_({ir::or_({a, b}), c}), req, resp), s(ir::or_({a, ir::or_({b, c})}), req, resp));
    ASSERT_EQ(s(ir::not_(ir::not_(a)), req, resp), va);
    ASSERT_EQ(s(ir::not_(ir::and_({a, b})), req, resp), s(ir::or_({ir::not_(a), ir::not_(b)}), req, resp));
  }
}

TEST(IrProperty, QuantifiersMatchReferenceFold) {
  Gen g(14);
  for (int i = 0; i < 2000; ++i) {
    ExprPtr body = g.verdict(1, true);
    Value resp = g.object(true);
    const Value& xs = resp.field("xs");
    if (!xs.is_array() || xs.as_array().empty()) continue;
    int lo = 1, hi = -1;
    for (const auto& x : xs.as_array()) {
      // Element bodies only read element fields and literals when evaluated against a lone element.
      Object wrap{{"xs", Value(Array{x})}};
      int v = score(evaluate(*ir::all(ir::response("xs"), body), Value(Object{}), Value(wrap)).state);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (resp.field("a").is_absent() && resp.field("b").is_absent() && resp.field("s").is_absent() &&
        resp.field("t").is_absent()) {
      ASSERT_EQ(score(evaluate(*ir::all(ir::response("xs"), body), Value(Object{}), resp).state), lo);
      ASSERT_EQ(score(evaluate(*ir::any(ir::response("xs"), body), Value(Object{}), resp).state), hi);
    }
  }
}
