#include <gtest/gtest.h>

#include <specguard/category.hpp>
#include <specguard/errors.hpp>
#include <specguard/ir.hpp>

using namespace specguard;

namespace {

Value J(const char* text) { return Value::from_json(nlohmann::json::parse(text)); }

VerdictState eval(const ExprPtr& e, const char* response, const char* request = "{}") {
  return evaluate(*e, J(request), J(response)).state;
}

}  // namespace

TEST(Category, NamesRoundTrip) {
  EXPECT_EQ(kOracleCategories.size(), 16u);
  for (auto c : kOracleCategories) EXPECT_EQ(category_from_string(to_string(c)), c);
  EXPECT_EQ(category_from_string("IO"), Category::InputOutput);
  EXPECT_EQ(category_from_string("Template-Literals"), Category::TemplateLiterals);
  EXPECT_FALSE(category_from_string("Bogus"));
}

TEST(Builtins, WildcardsBecomeUniversalQuantifiers) {
  auto e = builtin(Category::InputOutput, "data[].created", {Value("created[gt]"), Value(">")});
  ASSERT_TRUE(e->as<QuantifierNode>());
  EXPECT_EQ(e->as<QuantifierNode>()->kind, QuantKind::All);
  EXPECT_EQ(eval(e, R"({"data": [{"created": 10}, {"created": 12}]})", R"({"created[gt]": 9})"), VerdictState::Matched);
  EXPECT_EQ(eval(e, R"({"data": [{"created": 10}, {"created": 8}]})", R"({"created[gt]": 9})"), VerdictState::Mismatched);
  EXPECT_EQ(eval(e, R"({"data": [{"created": 10}]})"), VerdictState::Unknown);
}

TEST(Builtins, NestedWildcards) {
  auto e = builtin(Category::IsNumber, "rows[].cells[].v");
  EXPECT_EQ(eval(e, R"({"rows": [{"cells": [{"v": 1}, {"v": 2.5}]}, {"cells": [{"v": 3}]}]})"), VerdictState::Matched);
  EXPECT_EQ(eval(e, R"({"rows": [{"cells": [{"v": 1}]}, {"cells": [{"v": "3"}]}]})"), VerdictState::Mismatched);
}

TEST(Builtins, StripeCurrencyTemplate) {
  auto e = builtin(Category::TemplateLiterals, "data[].currency", {Value("^[a-z]{3}$")});
  EXPECT_EQ(eval(e, R"({"data": [{"currency": "usd"}]})"), VerdictState::Matched);
  EXPECT_EQ(eval(e, R"({"data": [{"currency": "usdx"}]})"), VerdictState::Mismatched);
}

TEST(Builtins, RangesWithOpenBounds) {
  auto lower = builtin(Category::ValueInRange, "amount", {Value(1), Value(nullptr)});
  EXPECT_EQ(eval(lower, R"({"amount": 99999999})"), VerdictState::Matched);
  EXPECT_EQ(eval(lower, R"({"amount": 0})"), VerdictState::Mismatched);
  auto adults = builtin(Category::ValueInRange, "adults", {Value(1), Value(9)});
  EXPECT_EQ(eval(adults, R"({"adults": 9})"), VerdictState::Matched);
  EXPECT_EQ(eval(adults, R"({"adults": 0})"), VerdictState::Mismatched);
}

TEST(Builtins, LengthsAndSizes) {
  auto len = builtin(Category::StringSpecificLength, "id", {Value(29)});
  EXPECT_EQ(eval(len, R"({"id": "12345678901234567890123456789"})"), VerdictState::Matched);
  EXPECT_EQ(eval(len, R"({"id": "1234567890123456789012345678"})"), VerdictState::Mismatched);
  auto size = builtin(Category::ArraySpecificSizes, "labels", {Value(0)});
  EXPECT_EQ(eval(size, R"({"labels": []})"), VerdictState::Matched);
  EXPECT_EQ(eval(size, R"({"labels": ["bug"]})"), VerdictState::Mismatched);
}

TEST(Builtins, DurationTemplateAndSet) {
  auto dur = builtin(Category::TemplateLiterals, "duration", {Value(R"(^\d+\smin$)")});
  EXPECT_EQ(eval(dur, R"({"duration": "120 min"})"), VerdictState::Matched);
  EXPECT_EQ(eval(dur, R"({"duration": "2 h"})"), VerdictState::Mismatched);
  auto set = builtin(Category::ValueInSet, "statistics.wiki_size", {Value(Array{Value(0), Value(41943)})});
  EXPECT_EQ(eval(set, R"({"statistics": {"wiki_size": 0}})"), VerdictState::Matched);
  EXPECT_EQ(eval(set, R"({"statistics": {"wiki_size": 1}})"), VerdictState::Mismatched);
}

TEST(Builtins, DateTimeFormats) {
  auto strict = builtin(Category::IsDateTime, "created_at", {Value("YYYY-MM-DDTHH:MM:SSTZD")});
  EXPECT_EQ(eval(strict, R"({"created_at": "2012-09-20T08:50:22.000Z"})"), VerdictState::Mismatched);
  auto lenient = builtin(Category::IsDateTime, "created_at", {Value("iso8601-lenient")});
  EXPECT_EQ(eval(lenient, R"({"created_at": "2012-09-20T08:50:22.000Z"})"), VerdictState::Matched);
}

TEST(Builtins, ArityErrors) {
  EXPECT_THROW(builtin(Category::InputOutput, "x"), BadArity);
  EXPECT_THROW(builtin(Category::InputOutput, "x", {Value("p"), Value("~")}), BadArity);
  EXPECT_THROW(builtin(Category::IsUrl, "x", {Value(1)}), BadArity);
  EXPECT_THROW(builtin(Category::Composite, "", {builtin(Category::IsUrl, "x")}), BadArity);
  EXPECT_THROW(builtin(Category::ValueInRange, "x", {Value(nullptr), Value(nullptr)}), BadArity);
  EXPECT_THROW(builtin(Category::ValueInSet, "x", {Value(Array{})}), BadArity);
  EXPECT_THROW(builtin(Category::NaryAtomic, "x", {Value(">="), Value(3)}), BadArity);
  EXPECT_THROW(builtin(Category::Uncategorized, "x"), BadArity);
  EXPECT_THROW(builtin(Category::IsUrl, "a..b"), IrBuildError);
}
