#include <benchmark/benchmark.h>

#include <specguard/evalkit.hpp>
#include <specguard/harness.hpp>
#include <specguard/ir.hpp>
#include <specguard/spec_model.hpp>

using namespace specguard;

namespace {

const std::filesystem::path kFixtures = SPECGUARD_FIXTURES_DIR;

Value page(int n) {
  Array data;
  for (int i = 0; i < n; ++i)
    data.push_back(Value(Object{{"amount", Value(1000 + i)}, {"currency", Value("usd")}, {"customer", Value("cus_A")},
                                {"created", Value(std::int64_t{1679090000} + i)}}));
  return Value(Object{{"data", Value(std::move(data))}});
}

ValidatorProgram composite() {
  return make_program("bench", InputsRequired::Both,
                      ir::and_({builtin(Category::InputOutput, "data[].customer", {Value("customer")}),
                                builtin(Category::TemplateLiterals, "data[].currency", {Value("^[a-z]{3}$")}),
                                builtin(Category::ValueInRange, "data[].amount", {Value(1), Value(99999999)}),
                                builtin(Category::IsUnixTime, "data[].created")}));
}

void BM_Evaluate(benchmark::State& state) {
  auto p = composite();
  Value req(Object{{"customer", Value("cus_A")}});
  Value resp = page(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(evaluate(p, req, resp));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Evaluate)->Arg(10)->Arg(100)->Arg(1000);

void BM_ParseProgram(benchmark::State& state) {
  std::string text = serialize_program(composite());
  for (auto _ : state) benchmark::DoNotOptimize(parse_program(text));
}
BENCHMARK(BM_ParseProgram);

void BM_LoadSpec(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(load_spec(kFixtures / "stripe/openapi.yaml"));
}
BENCHMARK(BM_LoadSpec);

void BM_HarnessRun(benchmark::State& state) {
  std::vector<ValidatorProgram> programs(32, composite());
  std::vector<Exchange> exchanges(64);
  for (auto& e : exchanges) {
    e.request = Value(Object{{"customer", Value("cus_A")}});
    e.response_body = page(20);
  }
  HarnessOptions o{static_cast<int>(state.range(0))};
  for (auto _ : state) benchmark::DoNotOptimize(run(programs, exchanges, o));
}
BENCHMARK(BM_HarnessRun)->Arg(1)->Arg(4);

void BM_ScoreTable(benchmark::State& state) {
  std::vector<TableRow> rows;
  for (int i = 0; i < 20; ++i) rows.push_back({"r" + std::to_string(i), 90.0 + i, 5.0, 3.0 + i});
  for (auto _ : state) benchmark::DoNotOptimize(score_table(rows));
}
BENCHMARK(BM_ScoreTable);

}  // namespace

BENCHMARK_MAIN();
