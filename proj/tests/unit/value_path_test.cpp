#include <gtest/gtest.h>

#include <specguard/errors.hpp>
#include <specguard/property_path.hpp>
#include <specguard/value.hpp>

using namespace specguard;

TEST(PropertyPath, ParseRenderRoundTrip) {
  for (const char* text : {"amount", "data[].customer", "items[].tags[]", "statistics.wiki_size", "[]"}) {
    EXPECT_EQ(PropertyPath::parse(text).render(), text);
  }
}

TEST(PropertyPath, Structure) {
  auto p = PropertyPath::parse("data[].created");
  EXPECT_EQ(p.size(), 3u);
  EXPECT_EQ(p.depth(), 2u);
  EXPECT_TRUE(p.has_wildcard());
  EXPECT_EQ(p.leaf_name(), "created");
  EXPECT_TRUE(p.starts_with(PropertyPath::parse("data[]")));
  EXPECT_EQ(PropertyPath::parse("data").element().child("id").render(), "data[].id");
}

TEST(PropertyPath, EscapedNames) {
  PropertyPath p({PathSegment::field("a.b"), PathSegment::field("c")});
  EXPECT_EQ(PropertyPath::parse(p.render()), p);
}

TEST(PropertyPath, RejectsMalformed) {
  EXPECT_THROW(PropertyPath::parse("a..b"), ParseError);
  EXPECT_THROW(PropertyPath::parse("a[x]"), ParseError);
}

TEST(Value, AbsentIsNotNull) {
  Value obj = Value::from_json(nlohmann::json::parse(R"({"a": null})"));
  EXPECT_TRUE(obj.field("a").is_null());
  EXPECT_TRUE(obj.field("b").is_absent());
  EXPECT_TRUE(obj.field("b").is_missing());
  EXPECT_FALSE(obj.field("a").is_absent());
}

TEST(Value, JsonRoundTrip) {
  auto j = nlohmann::json::parse(R"({"amount": 1099, "ratio": 0.5, "tags": ["a", true, null], "n": {"x": "y"}})");
  EXPECT_EQ(Value::from_json(j).to_json(), j);
  EXPECT_TRUE(Value::from_json(j).field("amount").is_integer());
  EXPECT_TRUE(Value::from_json(j).field("ratio").is_real());
}

TEST(Value, NumberWidening) {
  EXPECT_DOUBLE_EQ(Value(3).as_number(), 3.0);
  EXPECT_DOUBLE_EQ(Value(2.5).as_number(), 2.5);
}
