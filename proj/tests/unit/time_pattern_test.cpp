#include <gtest/gtest.h>

#include <specguard/errors.hpp>
#include <specguard/time_pattern.hpp>

using namespace specguard;

TEST(TimePattern, StrictIsoRejectsFraction) {
  auto p = TimePattern::compile("iso8601");
  EXPECT_TRUE(p.matches("2016-03-11T03:45:40Z"));
  EXPECT_TRUE(p.matches("2016-03-11T03:45:40+02:00"));
  EXPECT_FALSE(p.matches("2012-09-20T08:50:22.000Z"));
  EXPECT_FALSE(p.matches("2016-03-11 03:45:40Z"));
}

TEST(TimePattern, LenientAcceptsFraction) {
  auto p = TimePattern::compile("iso8601-lenient");
  EXPECT_TRUE(p.matches("2012-09-20T08:50:22.000Z"));
  EXPECT_TRUE(p.matches("2012-09-20"));
}

TEST(TimePattern, FieldRanges) {
  auto p = TimePattern::compile("date");
  EXPECT_TRUE(p.matches("2024-02-29"));
  EXPECT_FALSE(p.matches("2024-13-01"));
  EXPECT_FALSE(p.matches("2024-01-32"));
  auto t = TimePattern::compile("time");
  EXPECT_TRUE(t.matches("23:59"));
  EXPECT_FALSE(t.matches("24:00:00"));
}

TEST(TimePattern, MonthVersusMinute) {
  auto p = TimePattern::compile("HH:MM");
  EXPECT_TRUE(p.matches("10:45"));
  auto d = TimePattern::compile("YYYY-MM");
  EXPECT_FALSE(d.matches("2024-45"));
}

TEST(TimePattern, Presets) {
  EXPECT_EQ(expand_time_preset("iso8601"), "YYYY-MM-DDTHH:MM:SSTZD");
  EXPECT_EQ(expand_time_preset("YYYY"), "YYYY");
  EXPECT_THROW(TimePattern::compile(""), IrBuildError);
  EXPECT_THROW(TimePattern::compile("YYYY|"), IrBuildError);
}
