#include <algorithm>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include <specguard/errors.hpp>
#include <specguard/harness.hpp>
#include <specguard/synth.hpp>

using namespace specguard;

namespace {

const std::filesystem::path kFixtures = SPECGUARD_FIXTURES_DIR;

constexpr const char* kFig2Line =
    R"({"operation": {"method": "get", "path": "/v1/charges"}, "request": {"customer": "cus_idA"}, "status": 200,
        "response_body": {"object": "list", "data": [{"id": "ch_1", "amount": 1099, "created": 1679090539,
        "currency": "usd", "customer": "cus_id"}], "has_more": false, "url": "/v1/charges"}})";

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

ValidatorProgram amount_positive() {
  return make_program("amount", InputsRequired::ResponseOnly,
                      builtin(Category::ValueInRange, "data[].amount", {Value(1), Value(99999999)}),
                      OperationId{"GET", "/v1/charges"}, Category::ValueInRange);
}

ValidatorProgram customer_filter() {
  return make_program("customer", InputsRequired::Both,
                      builtin(Category::InputOutput, "data[].customer", {Value("customer")}),
                      OperationId{"GET", "/v1/charges"}, Category::InputOutput);
}

}  // namespace

TEST(Traces, ParsesAndFiltersNon2xx) {
  std::string text = one_line(kFig2Line) + "\n\n" +
                     R"({"operation": {"method": "GET", "path": "/v1/charges"}, "status": 404, "response_body": {"error": {}}})" +
                     "\n";
  TraceSet t = parse_traces(text);
  ASSERT_EQ(t.exchanges.size(), 1u);
  EXPECT_EQ(t.filtered, 1u);
  EXPECT_EQ(t.exchanges[0].operation.method, "GET");
  EXPECT_EQ(t.exchanges[0].request.field("customer"), Value("cus_idA"));
}

TEST(Traces, EmptyInputIsEmptySet) {
  TraceSet t = parse_traces("");
  EXPECT_TRUE(t.exchanges.empty());
  EXPECT_EQ(t.filtered, 0u);
  auto results = run({amount_positive()}, t.exchanges);
  EXPECT_EQ(results[0].final.state, VerdictState::Unknown);
  EXPECT_TRUE(results[0].note);
}

TEST(Traces, ErrorsCarryLineNumbers) {
  auto line_of = [](const std::string& text) -> std::size_t {
    try {
      parse_traces(text);
    } catch (const TraceParseError& e) {
      return e.line();
    }
    return 0;
  };
  std::string ok = one_line(kFig2Line);
  EXPECT_EQ(line_of(ok + "\n{broken"), 2u);
  EXPECT_EQ(line_of(ok + "\n" + ok + "\n" + R"({"operation": {"method": "GET", "path": "/x"}, "status": 700, "response_body": 1})"), 3u);
  EXPECT_EQ(line_of(R"({"operation": {"method": "GET", "path": "/x"}, "status": 200})"), 1u);
  EXPECT_EQ(line_of(R"({"status": 200, "response_body": {}})"), 1u);
  EXPECT_EQ(line_of(R"({"operation": {"method": "GET", "path": "/x"}, "status": 200, "request": [1], "response_body": {}})"), 1u);
}

TEST(Traces, ExchangeJsonPassThrough) {
  auto j = nlohmann::json::parse(kFig2Line);
  Exchange e = exchange_from_json(j, 1);
  auto back = exchange_to_json(e);
  EXPECT_EQ(back.at("response_body"), j.at("response_body"));
  EXPECT_EQ(back.at("request"), j.at("request"));
  EXPECT_EQ(exchange_from_json(back, 1).response_body, e.response_body);
}

TEST(Harness, Fig2Verdicts) {
  TraceSet t = parse_traces(one_line(kFig2Line));
  auto results = run({amount_positive(), customer_filter()}, t.exchanges);
  EXPECT_EQ(results[0].final.state, VerdictState::Matched);
  EXPECT_EQ(results[1].final.state, VerdictState::Mismatched);
  ASSERT_TRUE(results[1].evidence);
  EXPECT_EQ(results[1].per_exchange[*results[1].evidence].verdict.path, "return.data[0].customer");
}

TEST(Harness, ProgramsOnlySeeTheirOperation) {
  TraceSet t = parse_traces(one_line(kFig2Line));
  auto other = make_program("other", InputsRequired::ResponseOnly, builtin(Category::IsUrl, "url"),
                            OperationId{"GET", "/v1/customers"});
  auto anyop = make_program("anyop", InputsRequired::ResponseOnly, builtin(Category::IsBoolean, "has_more"));
  auto results = run({other, anyop}, t.exchanges);
  EXPECT_EQ(results[0].final.state, VerdictState::Unknown);
  EXPECT_TRUE(results[0].per_exchange.empty());
  EXPECT_EQ(results[1].final.state, VerdictState::Matched);
}

TEST(Harness, ConcurrencyDoesNotChangeReport) {
  TraceSet t = load_traces(kFixtures / "stripe/traces.jsonl");
  std::vector<ValidatorProgram> programs = {amount_positive(), customer_filter()};
  for (int i = 0; i < 20; ++i)
    programs.push_back(make_program("p" + std::to_string(i), InputsRequired::ResponseOnly,
                                    builtin(Category::IsUnixTime, "data[].created")));
  auto serial = report_to_json(build_report(run(programs, t.exchanges, {1}), programs, nullptr, t.exchanges.size()));
  auto parallel = report_to_json(build_report(run(programs, t.exchanges, {6}), programs, nullptr, t.exchanges.size()));
  EXPECT_EQ(serial.dump(), parallel.dump());
}

TEST(Harness, ConservationOverFuzzedTraces) {
  std::mt19937_64 rng(99);
  auto programs = std::vector<ValidatorProgram>{amount_positive(), customer_filter(),
                                                make_program("t", InputsRequired::ResponseOnly,
                                                             builtin(Category::TemplateLiterals, "data[].currency",
                                                                     {Value("^[a-z]{3}$")}))};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Exchange> ex;
    for (int n = std::uniform_int_distribution<int>(0, 5)(rng); n > 0; --n) {
      Exchange e;
      e.operation = {"GET", std::uniform_int_distribution<int>(0, 1)(rng) ? "/v1/charges" : "/v1/other"};
      Array data;
      for (int k = std::uniform_int_distribution<int>(0, 2)(rng); k > 0; --k) {
        Object c;
        if (std::uniform_int_distribution<int>(0, 2)(rng)) c["amount"] = Value(std::uniform_int_distribution<int>(-1, 3)(rng));
        if (std::uniform_int_distribution<int>(0, 2)(rng)) c["currency"] = Value(k % 2 ? "usd" : "USD");
        data.push_back(Value(std::move(c)));
      }
      e.response_body = Value(Object{{"data", Value(std::move(data))}});
      e.request = Value(Object{});
      ex.push_back(std::move(e));
    }
    auto report = build_report(run(programs, ex), programs, nullptr, ex.size());
    ASSERT_EQ(report.totals.total(), programs.size());
    ASSERT_EQ(report.results.size(), programs.size());
  }
}

TEST(Report, RootCausesOnGitlabFixture) {
  const auto dir = kFixtures / "gitlab";
  ApiSpec spec = normalize(load_spec(dir / "openapi.yaml"));
  auto programs = load_program_bundle(dir);
  TraceSet t = load_traces(dir / "traces.jsonl");
  EXPECT_EQ(t.filtered, 1u);
  RunReport r = build_report(run(programs, t.exchanges), programs, &spec, t.exchanges.size(), t.filtered);
  std::map<std::string, RootCause> causes;
  for (const auto& m : r.mismatches) causes[m.constraint_id] = m.root_cause;
  EXPECT_EQ(causes.at("issues_created_at_iso8601"), RootCause::IncompatibleDataFormat);
  EXPECT_EQ(causes.at("issues_milestone_present"), RootCause::ImplicitNullable);
  EXPECT_EQ(causes.at("issues_sorted_by_created_at"), RootCause::InterParameterDependency);
  EXPECT_EQ(r.exit_code(), 2);
  auto j = report_to_json(r);
  EXPECT_EQ(j.at("report_version"), kReportVersion);
  EXPECT_EQ(j.at("exchanges").at("filtered"), 1);
  EXPECT_NE(report_to_text(r).find("ImplicitNullable"), std::string::npos);
}

TEST(Report, CleanRunExitsZero) {
  TraceSet t = parse_traces(one_line(kFig2Line));
  std::vector<ValidatorProgram> programs = {amount_positive()};
  RunReport r = build_report(run(programs, t.exchanges), programs);
  EXPECT_FALSE(r.has_mismatches());
  EXPECT_EQ(r.exit_code(), 0);
  EXPECT_EQ(r.by_category.at("Value-In-Range").matched, 1u);
}
