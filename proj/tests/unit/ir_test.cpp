#include <gtest/gtest.h>

#include <specguard/errors.hpp>
#include <specguard/ir.hpp>

using namespace specguard;

namespace {

Value J(const char* text) { return Value::from_json(nlohmann::json::parse(text)); }

const Value kFig2 = J(R"({"object": "list", "data": [{"id": "ch_1", "amount": 1099, "created": 1679090539,
  "currency": "usd", "customer": "cus_id"}], "has_more": false, "url": "/v1/charges"})");

}  // namespace

TEST(Verdict, KleeneTables) {
  using V = VerdictState;
  const V all[] = {V::Mismatched, V::Unknown, V::Matched};
  for (V a : all)
    for (V b : all) {
      EXPECT_EQ(score(kleene_and(a, b)), std::min(score(a), score(b)));
      EXPECT_EQ(score(kleene_or(a, b)), std::max(score(a), score(b)));
    }
  for (V a : all) EXPECT_EQ(score(kleene_not(a)), -score(a));
  EXPECT_EQ(to_string(V::Matched), "matched");
  EXPECT_EQ(to_string(V::Unknown), "unknown");
  EXPECT_EQ(to_string(V::Mismatched), "mismatched");
}

TEST(Verdict, Aggregate) {
  auto s = [](std::initializer_list<VerdictState> xs) {
    std::vector<Verdict> v;
    for (auto x : xs) v.push_back(x == VerdictState::Matched ? Verdict::matched() : x == VerdictState::Unknown
                                                                  ? Verdict::unknown("u")
                                                                  : Verdict::mismatched(FailureKind::Comparison, "m"));
    return aggregate(v).state;
  };
  using V = VerdictState;
  EXPECT_EQ(s({V::Matched, V::Matched, V::Unknown}), V::Matched);
  EXPECT_EQ(s({V::Unknown, V::Unknown}), V::Unknown);
  EXPECT_EQ(s({V::Matched, V::Mismatched, V::Unknown}), V::Mismatched);
  EXPECT_THROW(aggregate({}), EmptyInput);
}

TEST(Eval, Fig2AmountPositive) {
  auto p = make_program("amount_pos", InputsRequired::ResponseOnly,
                        ir::all(ir::response("data"), ir::compare(CompareOp::Gt, ir::element("amount"), ir::lit(0))));
  EXPECT_EQ(evaluate(p, Value(Object{}), kFig2).state, VerdictState::Matched);
}

TEST(Eval, RequestResponseMismatchNamesElement) {
  auto body = ir::all(ir::response("data"), ir::compare(CompareOp::Eq, ir::element("customer"), ir::request("customer")));
  auto v = evaluate(*body, J(R"({"customer": "cus_idA"})"), kFig2);
  EXPECT_EQ(v.state, VerdictState::Mismatched);
  EXPECT_EQ(v.path, "return.data[0].customer");
  EXPECT_EQ(v.failure, FailureKind::Comparison);
}

TEST(Eval, MissingDataIsUnknown) {
  auto body = ir::compare(CompareOp::Lt, ir::response("data[].created"), ir::request("created[lt]"));
  auto in_quant = ir::all(ir::response("data"), ir::compare(CompareOp::Lt, ir::element("created"), ir::request("created[lt]")));
  EXPECT_EQ(evaluate(*in_quant, Value(Object{}), kFig2).state, VerdictState::Unknown);
  EXPECT_EQ(evaluate(*ir::compare(CompareOp::Eq, ir::response("nope"), ir::lit(1)), Value(Object{}), kFig2).state,
            VerdictState::Unknown);
  EXPECT_EQ(evaluate(*ir::all(ir::response("items"), ir::compare(CompareOp::Eq, ir::element("x"), ir::lit(1))),
                     Value(Object{}), J(R"({"items": []})"))
                .state,
            VerdictState::Unknown);
  (void)body;
}

TEST(Eval, AnyQuantifier) {
  auto body = ir::any(ir::response("xs"), ir::compare(CompareOp::Eq, ir::element(), ir::lit(3)));
  EXPECT_EQ(evaluate(*body, Value(Object{}), J(R"({"xs": [1, 2, 3]})")).state, VerdictState::Matched);
  EXPECT_EQ(evaluate(*body, Value(Object{}), J(R"({"xs": [1, 2]})")).state, VerdictState::Mismatched);
}

TEST(Eval, StringOperations) {
  auto r = J(R"({"currency": "usd", "name": "Bob", "href": "https://x/market/US/a"})");
  EXPECT_EQ(evaluate(*ir::lowercase(ir::response("currency")), Value(Object{}), r).state, VerdictState::Matched);
  EXPECT_EQ(evaluate(*ir::lowercase(ir::response("name")), Value(Object{}), r).state, VerdictState::Mismatched);
  EXPECT_EQ(evaluate(*ir::compare(CompareOp::Eq, ir::length(ir::response("currency")), ir::lit(3)), Value(Object{}), r)
                .state,
            VerdictState::Matched);
  EXPECT_EQ(evaluate(*ir::substring_of(ir::request("market"), ir::response("href")), J(R"({"market": "US"})"), r).state,
            VerdictState::Matched);
  EXPECT_EQ(evaluate(*ir::matches(ir::response("currency"), "^[a-z]{3}$"), Value(Object{}), r).state,
            VerdictState::Matched);
}

TEST(Eval, ArithmeticAndSize) {
  auto r = J(R"({"total": 5, "items": [1, 2], "a": 6, "b": 3})");
  EXPECT_EQ(evaluate(*ir::compare(CompareOp::Ge, ir::response("total"), ir::array_size(ir::response("items"))),
                     Value(Object{}), r)
                .state,
            VerdictState::Matched);
  EXPECT_EQ(evaluate(*ir::compare(CompareOp::Eq, ir::arith(ArithOp::Div, ir::response("a"), ir::response("b")), ir::lit(2)),
                     Value(Object{}), r)
                .state,
            VerdictState::Matched);
  auto div0 = ir::compare(CompareOp::Eq, ir::arith(ArithOp::Div, ir::response("a"), ir::lit(0)), ir::lit(1));
  EXPECT_NE(evaluate(*div0, Value(Object{}), r).state, VerdictState::Matched);
}

TEST(Eval, SortedOrder) {
  auto desc = ir::sorted(ir::response(""), std::string("created_at"), Direction::Desc);
  auto r = J(R"([{"created_at": "2016-03-11T03:45:40Z"}, {"created_at": "2012-09-20T08:50:22Z"}])");
  EXPECT_EQ(evaluate(*desc, Value(Object{}), r).state, VerdictState::Matched);
  auto asc = ir::sorted(ir::response(""), std::string("created_at"), Direction::Asc);
  auto v = evaluate(*asc, Value(Object{}), r);
  EXPECT_EQ(v.state, VerdictState::Mismatched);
  EXPECT_EQ(v.failure, FailureKind::Order);
}

TEST(Eval, InSetAndNull) {
  auto body = ir::in_set(ir::response("wiki_size"), {Value(0), Value(41943)});
  EXPECT_EQ(evaluate(*body, Value(Object{}), J(R"({"wiki_size": 0})")).state, VerdictState::Matched);
  EXPECT_EQ(evaluate(*body, Value(Object{}), J(R"({"wiki_size": 7})")).state, VerdictState::Mismatched);
  auto ne_null = ir::compare(CompareOp::Ne, ir::response("milestone"), ir::lit(nullptr));
  auto v = evaluate(*ne_null, Value(Object{}), J(R"({"milestone": null})"));
  EXPECT_EQ(v.state, VerdictState::Mismatched);
}

TEST(Build, RejectsIllSortedTrees) {
  EXPECT_THROW(ir::and_({ir::response("a")}), IrBuildError);
  EXPECT_THROW(ir::matches(ir::response("a"), "("), IrBuildError);
  EXPECT_THROW(ir::in_set(ir::response("a"), {}), IrBuildError);
  EXPECT_THROW(make_program("p", InputsRequired::ResponseOnly, ir::response("a")), IrBuildError);
  EXPECT_THROW(make_program("p", InputsRequired::ResponseOnly, ir::compare(CompareOp::Eq, ir::element("x"), ir::lit(1))),
               IrBuildError);
  EXPECT_THROW(ir::type_check(ir::response("a"), TypeTag::Boolean, "YYYY"), IrBuildError);
}

TEST(Serialize, ProgramRoundTrip) {
  auto p = make_program(
      "rt", InputsRequired::Both,
      ir::and_({ir::all(ir::response("data"), ir::compare(CompareOp::Gt, ir::element("created"), ir::request("created[gt]"))),
                ir::not_(ir::in_set(ir::response("object"), {Value("error")})),
                ir::type_check(ir::response("when"), TypeTag::DateTime, "iso8601-lenient"),
                ir::sorted(ir::response("data"), std::string("created"), Direction::Desc)}),
      OperationId{"GET", "/v1/charges"}, Category::Composite);
  std::string text = serialize_program(p);
  ValidatorProgram back = parse_program(text);
  EXPECT_TRUE(structurally_equal(p, back));
  EXPECT_EQ(serialize_program(back), text);
  EXPECT_EQ(program_to_json(p).at("ir_version"), kIrVersion);
}

TEST(Serialize, SyntaxErrorsCarryNodePath) {
  try {
    parse_program(R"({"ir_version": 1, "constraint_id": "x", "inputs_required": "response-only",
                      "body": {"node": "logic", "op": "and", "args": [{"node": "bogus"}]}})");
    FAIL();
  } catch (const IrSyntaxError& e) {
    EXPECT_NE(e.node_path().find("args"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_program("not json"), IrSyntaxError);
  EXPECT_THROW(parse_program(R"({"ir_version": 99})"), IrSyntaxError);
}

TEST(Render, Infix) {
  EXPECT_EQ(render_expr(*ir::compare(CompareOp::Gt, ir::response("amount"), ir::lit(0))), "return.amount > 0");
}
