#include <fstream>

#include <gtest/gtest.h>

#include <specguard/errors.hpp>
#include <specguard/evalkit.hpp>

using namespace specguard;

namespace {

const std::filesystem::path kFixtures = SPECGUARD_FIXTURES_DIR;

Constraint mined(std::string id, std::vector<Variable> vars, std::string op_path = "/v1/charges") {
  Constraint c;
  c.id = std::move(id);
  c.operation = {"GET", std::move(op_path)};
  c.variables = std::move(vars);
  c.description = "d";
  return c;
}

GroundTruth gt_from(const char* text) { return ground_truth_from_json(nlohmann::json::parse(text)); }

}  // namespace

TEST(Metrics, RatiosAndUndefined) {
  auto m = metrics_from_counts(94.6, 7.4, 4.4);
  ASSERT_TRUE(m.precision && m.recall && m.f1);
  EXPECT_NEAR(*m.precision, 94.6 / 102.0, 1e-12);
  EXPECT_NEAR(*m.recall, 94.6 / 99.0, 1e-12);
  EXPECT_NEAR(*m.f1, 2 * *m.precision * *m.recall / (*m.precision + *m.recall), 1e-12);
  auto none = metrics_from_counts(0, 0, 0);
  EXPECT_FALSE(none.precision);
  EXPECT_FALSE(none.recall);
  EXPECT_FALSE(none.f1);
  auto zero = metrics_from_counts(0, 3, 2);
  EXPECT_EQ(zero.precision, 0.0);
  EXPECT_EQ(zero.f1, 0.0);
  EXPECT_TRUE(metrics_to_json(none).at("precision").is_null());
}

TEST(ScoreTable, PooledAndMacroAgainstHandComputation) {
  std::vector<TableRow> rows = {{"a", 8, 2, 0}, {"b", 1, 1, 2}};
  TableScore s = score_table(rows);
  EXPECT_NEAR(*s.pooled.precision, 9.0 / 12.0, 1e-12);
  EXPECT_NEAR(*s.pooled.recall, 9.0 / 11.0, 1e-12);
  EXPECT_NEAR(*s.macro_precision, (0.8 + 0.5) / 2, 1e-12);
  EXPECT_NEAR(*s.macro_recall, (1.0 + 1.0 / 3.0) / 2, 1e-12);
  // Rows with an undefined ratio are left out of the macro mean.
  TableScore t = score_table({{"a", 1, 1, 0}, {"b", 0, 0, 0}});
  EXPECT_NEAR(*t.macro_precision, 0.5, 1e-12);
  EXPECT_FALSE(score_table({}).macro_precision);
}

TEST(ScoreTable, PrintedOwnDatasetTotals) {
  std::vector<TableRow> rows = {{"C.H", 40.8, 6.0, 1.2},   {"G.B", 46.2, 3.2, 14.8}, {"G.C", 67.0, 3.2, 19.4},
                                {"G.G", 78.2, 5.6, 41.0},  {"G.I", 156.6, 3.2, 111.8}, {"G.P", 177.6, 4.6, 71.2},
                                {"G.R", 44.0, 3.4, 11.0},  {"S", 88.4, 18.8, 20.8}};
  TableScore s = score_table(rows);
  EXPECT_NEAR(100 * *s.pooled.precision, 93.6, 0.1);
  EXPECT_NEAR(100 * *s.pooled.recall, 70.6, 0.1);
  EXPECT_NEAR(100 * *s.rows[0].second.recall, 97.1, 0.1);
}

TEST(GroundTruth, ParsesAndRejectsDuplicates) {
  auto gt = gt_from(R"({"entries": [
    {"operation": {"method": "GET", "path": "/v1/charges"}, "variables": ["return.data[].amount"], "description": "positive"},
    {"id": "x", "operation": {"method": "GET", "path": "/v1/charges"}, "variables": ["return.data[].currency"], "description": "3 letters"}]})");
  ASSERT_EQ(gt.entries.size(), 2u);
  EXPECT_EQ(gt.entries[0].id, "gt-1");
  EXPECT_EQ(gt.entries[1].id, "x");
  EXPECT_THROW(gt_from(R"([{"operation": {"method": "GET", "path": "/a"}, "variables": ["return.a"], "description": "d"},
                           {"operation": {"method": "GET", "path": "/a"}, "variables": ["return.a"], "description": "d"}])"),
               ParseError);
  EXPECT_THROW(gt_from(R"([{"id": "a", "operation": {"method": "GET", "path": "/a"}, "variables": ["return.a"], "description": "d"},
                           {"id": "a", "operation": {"method": "GET", "path": "/a"}, "variables": ["return.b"], "description": "d"}])"),
               ParseError);
}

TEST(Score, CountsAndCoverage) {
  auto gt = gt_from(R"([
    {"operation": {"method": "GET", "path": "/v1/charges"}, "variables": ["return.data[].amount"], "description": "a"},
    {"operation": {"method": "GET", "path": "/v1/charges"}, "variables": ["return.data[].currency"], "description": "c"},
    {"operation": {"method": "GET", "path": "/v1/charges"}, "variables": ["input.customer", "return.data[].customer"], "description": "io"}])");
  std::vector<Constraint> cs = {mined("m1", {Variable::response("data[].amount")}),
                                mined("m2", {Variable::response("data[].Currency")}),
                                mined("m3", {Variable::request("customer"), Variable::response("data[].customer")})};
  Judgments j = judgments_from_json(nlohmann::json::parse(R"({"judgments": {"m1": "correct", "m2": true, "m3": {"correct": false}}})"));
  Metrics m = score(cs, gt, j);
  EXPECT_EQ(m.tp, 2);
  EXPECT_EQ(m.fp, 1);
  // Variable names are case-sensitive, so m2 covers nothing.
  EXPECT_EQ(m.fn, 2);
  j.erase("m3");
  EXPECT_THROW(score(cs, gt, j), MissingJudgment);
}

TEST(Score, EquivalentToRestrictsCoverage) {
  auto gt = gt_from(R"([
    {"id": "g1", "operation": {"method": "GET", "path": "/v1/charges"}, "variables": ["return.data[].amount"], "description": "positive"},
    {"id": "g2", "operation": {"method": "GET", "path": "/v1/charges"}, "variables": ["return.data[].amount"], "description": "max 8 digits"}])");
  std::vector<Constraint> cs = {mined("m1", {Variable::response("data[].amount")})};
  auto j = judgments_from_json(nlohmann::json::parse(R"({"m1": {"correct": true, "equivalent_to": ["g1"]}})"));
  EXPECT_EQ(score(cs, gt, j).fn, 1);
  auto k = judgments_from_json(nlohmann::json::parse(R"({"m1": "correct"})"));
  EXPECT_EQ(score(cs, gt, k).fn, 0);
  std::vector<Constraint> other_op = {mined("m1", {Variable::response("data[].amount")}, "/v1/refunds")};
  EXPECT_EQ(score(other_op, gt, k).fn, 2);
}

TEST(Invariants, VariableExtraction) {
  EXPECT_EQ(extract_variables("input.limit >= size(return.items[])"),
            (VariableKey{"input.limit", "return.items[]"}));
  EXPECT_EQ(extract_variables("return.statistics.wiki_size one of { 0, 41943 }"),
            (VariableKey{"return.statistics.wiki_size"}));
  EXPECT_EQ(extract_variables("return.total >= 1 and return.total."), (VariableKey{"return.total"}));
  EXPECT_THROW(external_invariants_from_json(nlohmann::json::parse(R"(["size is positive"])")), ParseError);
}

TEST(Overlap, Table2Fixture) {
  auto inv = load_external_invariants(kFixtures / "overlap/invariants.json");
  std::ifstream in(kFixtures / "overlap/mined.json");
  auto cs = constraints_from_json(nlohmann::json::parse(in));
  auto groups = group_by_variables(inv);
  EXPECT_EQ(groups.size(), 9u);
  EXPECT_EQ(groups.at(VariableKey{"return.total"}).size(), 2u);
  OverlapPartition p = overlap(cs, inv);
  EXPECT_EQ(p.shared, (std::vector<VariableKey>{{"input.limit", "return.items[]"}, {"return.total"}}));
  EXPECT_EQ(p.unique_mined, (std::vector<VariableKey>{{"return.amount"}}));
  EXPECT_EQ(p.unique_external.size(), 7u);
  auto j = overlap_to_json(p);
  EXPECT_EQ(j.at("shared").size(), 2u);
}
