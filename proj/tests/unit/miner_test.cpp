#include <algorithm>
#include <atomic>
#include <fstream>
#include <thread>

#include <gtest/gtest.h>

#include <specguard/errors.hpp>
#include <specguard/miner.hpp>

#include "scripted_provider.hpp"

using namespace specguard;

namespace {

const std::filesystem::path kFixtures = SPECGUARD_FIXTURES_DIR;

std::vector<std::string> golden_ids() {
  std::ifstream in(kFixtures / "stripe/golden/constraints.json");
  std::vector<std::string> ids;
  for (const auto& c : constraints_from_json(nlohmann::json::parse(in))) ids.push_back(c.id);
  return ids;
}

Constraint resp_constraint(std::string var, std::string desc) {
  Constraint c;
  c.source = ConstraintSource::RespProp;
  c.operation = {"GET", "/v1/charges"};
  c.variables = {Variable::response(std::move(var))};
  c.description = std::move(desc);
  c.id = make_constraint_id(c);
  return c;
}

}  // namespace

TEST(Categorize, ByStructureAndCue) {
  using S = ConstraintSource;
  EXPECT_EQ(categorize_text(S::ReqResp, "Only return charges for this customer", 1, 2), Category::InputOutput);
  EXPECT_EQ(categorize_text(S::ReqResp, "between the two bounds", 1, 3), Category::Composite);
  EXPECT_EQ(categorize_text(S::RespProp, "total is at least the number of items", 2, 2), Category::NaryAtomic);
  EXPECT_EQ(categorize_text(S::RespProp, "Measured in seconds since the Unix epoch.", 1, 1), Category::IsUnixTime);
  EXPECT_EQ(categorize_text(S::RespProp, "Three lowercase letters.", 1, 1), Category::TemplateLiterals);
  EXPECT_EQ(categorize_text(S::RespProp, "", 1, 1), Category::Uncategorized);
}

TEST(Categorize, NormalizeDescription) {
  EXPECT_EQ(normalize_description("  Three   Lowercase\nletters. "), "three lowercase letters.");
}

TEST(Constraint, IdIsStableAndJsonRoundTrips) {
  auto a = resp_constraint("data[].currency", "Three lowercase letters.");
  auto b = resp_constraint("data[].currency", "Three lowercase letters.");
  EXPECT_EQ(a.id, b.id);
  EXPECT_EQ(a.id.rfind("get_v1-charges_rp_data-currency_", 0), 0u);
  EXPECT_NE(a.id, resp_constraint("data[].currency", "other").id);
  a.category = Category::TemplateLiterals;
  auto back = constraint_from_json(constraint_to_json(a));
  EXPECT_EQ(constraint_to_json(back), constraint_to_json(a));
}

TEST(Constraint, FinalizeDeduplicatesAndSorts) {
  auto x = resp_constraint("data[].currency", "Three lowercase letters.");
  auto y = resp_constraint("data[].currency", "three  LOWERCASE letters.");
  auto z = resp_constraint("data[].amount", "A positive integer.");
  auto out = finalize_constraints({x, y, z});
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].variables[0].name, "data[].amount");
}

TEST(KnowledgeBase, ComputesOncePerKeyUnderContention) {
  KnowledgeBase kb;
  std::atomic<int> runs{0};
  const std::string key = KnowledgeBase::key("created_at", "description: Creation time");
  std::vector<std::jthread> ts;
  std::atomic<int> computed_flags{0};
  for (int i = 0; i < 16; ++i)
    ts.emplace_back([&] {
      bool computed = false;
      auto e = kb.get_or_compute(key, [&] {
        ++runs;
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
        return KnowledgeEntry{true, std::string("ISO 8601"), {}, {}};
      }, &computed);
      if (computed) ++computed_flags;
      EXPECT_TRUE(e.confirmed);
    });
  ts.clear();
  EXPECT_EQ(runs, 1);
  EXPECT_EQ(computed_flags, 1);
  EXPECT_FALSE(kb.insert(key, KnowledgeEntry{}));
  EXPECT_TRUE(kb.find(key)->confirmed);
}

TEST(KnowledgeBase, PersistsToFile) {
  auto file = std::filesystem::temp_directory_path() / "specguard_kb_test.json";
  std::filesystem::remove(file);
  {
    KnowledgeBase kb(file);
    kb.insert(KnowledgeBase::key("a", "d"), KnowledgeEntry{true, std::string("x"), {}, {}});
    kb.save();
  }
  KnowledgeBase kb(file);
  EXPECT_EQ(kb.size(), 1u);
  EXPECT_EQ(kb.find(KnowledgeBase::key("a", "d"))->description, "x");
  std::filesystem::remove(file);
}

TEST(ComposeDescription, LabelsFields) {
  PropertySpec p;
  p.declared_type = PrimitiveType::Integer;
  p.example = Value(std::int64_t{99999999});
  EXPECT_EQ(compose_property_description(p, std::string("A positive integer.")),
            "description: A positive integer.\ntype: integer\nexample: 99999999");
  EXPECT_EQ(compose_property_description(p, std::nullopt), "");
}

TEST(Miner, ScriptedStripeRunMatchesGolden) {
  ApiSpec spec = normalize(load_spec(kFixtures / "stripe/openapi.yaml"));
  auto provider = fixture::ScriptedProvider::from_file(kFixtures / "stripe/script.json");
  GatewayOptions o;
  o.mode = LlmMode::Record;
  LlmGateway gw(o, std::make_shared<TranscriptCache>(), provider);
  KnowledgeBase kb;
  ConstraintMiner miner(spec, gw, kb);
  auto found = miner.mine_all();
  std::vector<std::string> ids;
  for (const auto& c : found) ids.push_back(c.id);
  EXPECT_EQ(ids, golden_ids());
  auto st = miner.stats();
  EXPECT_EQ(st.parameters_seen, 6);
  EXPECT_EQ(st.parameters_skipped, 1);
  EXPECT_EQ(st.mappings_rejected, 1);
  for (const auto& c : found) {
    EXPECT_FALSE(c.provenance.empty()) << c.id;
    EXPECT_EQ(c.category, categorize(c)) << c.id;
  }
}

TEST(Miner, ReplayFromCacheIsOffline) {
  ApiSpec spec = normalize(load_spec(kFixtures / "stripe/openapi.yaml"));
  auto stub = std::make_shared<FailingProvider>();
  LlmGateway gw({}, std::make_shared<TranscriptCache>(kFixtures / "stripe/transcripts.jsonl"), stub);
  KnowledgeBase kb;
  ConstraintMiner miner(spec, gw, kb, {MiningMode::ObservationConfirmation, 4});
  auto found = miner.mine_all();
  std::vector<std::string> ids;
  for (const auto& c : found) ids.push_back(c.id);
  EXPECT_EQ(ids, golden_ids());
  EXPECT_EQ(stub->contacts(), 0);
  EXPECT_EQ(gw.stats().provider_calls, 0);
}

TEST(Miner, ReplayMissSurfaces) {
  ApiSpec spec = normalize(load_spec(kFixtures / "stripe/openapi.yaml"));
  LlmGateway gw({}, std::make_shared<TranscriptCache>(), std::make_shared<FailingProvider>());
  KnowledgeBase kb;
  ConstraintMiner miner(spec, gw, kb);
  EXPECT_THROW(miner.mine_all(), CacheMiss);
}

TEST(Miner, KnowledgeBaseSharesRepeatedProperty) {
  ApiSpec spec = normalize(load_spec(kFixtures / "kb/openapi.yaml"));
  auto provider = fixture::ScriptedProvider::from_file(kFixtures / "kb/script.json");
  GatewayOptions o;
  o.mode = LlmMode::Record;
  LlmGateway gw(o, nullptr, provider);
  KnowledgeBase kb;
  ConstraintMiner miner(spec, gw, kb);
  auto found = miner.mine_all();
  EXPECT_EQ(found.size(), 5u);
  EXPECT_EQ(provider->calls_by_template()[TemplateId::PropertyObservation], 1);
  EXPECT_EQ(miner.stats().kb_hits, 4);
}
