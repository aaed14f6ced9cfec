#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include <specguard/errors.hpp>

#include <specguard/version.hpp>

#include "commands.hpp"
#include "config.hpp"

using namespace specguard;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = SPECGUARD_FIXTURES_DIR;

struct Captured {
  std::ostringstream out, err;
  int code = 0;
};

Captured invoke(std::vector<std::string> args) {
  Captured c;
  cli::CliEnv env;
  env.out = &c.out;
  env.err = &c.err;
  auto stub = std::make_shared<FailingProvider>();
  env.provider_factory = [stub](const cli::RunConfig&) { return stub; };
  c.code = cli::run_cli(args, env);
  return c;
}

fs::path temp_dir(const std::string& name) {
  auto d = fs::temp_directory_path() / ("specguard_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

fs::path write(const fs::path& file, const std::string& text) {
  std::ofstream(file) << text;
  return file;
}

nlohmann::json read(const fs::path& f) {
  std::ifstream in(f);
  return nlohmann::json::parse(in);
}

}  // namespace

TEST(Config, ResolvesRelativePathsAndDefaults) {
  auto c = cli::parse_config("spec: api.yaml\nllm:\n  cache: c.jsonl\n", "/base");
  EXPECT_EQ(c.spec, fs::path("/base/api.yaml"));
  EXPECT_EQ(c.llm.cache, fs::path("/base/c.jsonl"));
  EXPECT_EQ(c.llm.mode, LlmMode::Replay);
  EXPECT_EQ(c.mining.mode, MiningMode::ObservationConfirmation);
  EXPECT_TRUE(c.synthesis.verify);
}

TEST(Config, ErrorsNameTheField) {
  auto field = [](const std::string& text) {
    try {
      cli::parse_config(text, "/b").validate();
    } catch (const ConfigError& e) {
      return e.field_path();
    }
    return std::string("<none>");
  };
  EXPECT_EQ(field("spec: a.yaml\nllm: {mode: replay}\n"), "llm.cache");
  EXPECT_EQ(field("spec: a.yaml\nllm: {mode: live, top_p: 1.5}\n"), "llm.top_p");
  EXPECT_EQ(field("spec: a.yaml\nllm: {mode: live}\nbogus: 1\n"), "bogus");
  EXPECT_EQ(field("spec: a.yaml\nllm: {mode: live, api_key: sk-123}\n"), "llm.api_key");
  EXPECT_EQ(field("llm: {mode: live}\n"), "spec");
}

TEST(Cli, ConfigErrorExitsOne) {
  auto dir = temp_dir("bad");
  auto cfg = write(dir / "c.yaml", "spec: " + (kFixtures / "stripe/openapi.yaml").string() + "\nllm: {mode: replay}\n");
  auto r = invoke({"--config", cfg.string(), "--out", (dir / "out").string(), "mine"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.str().find("config error"), std::string::npos);
  EXPECT_NE(r.err.str().find("llm.cache"), std::string::npos);
}

TEST(Cli, MissingConfigFlagFails) {
  auto r = invoke({"mine"});
  EXPECT_NE(r.code, 0);
}

TEST(Cli, RunExitsTwoOnMismatch) {
  auto dir = temp_dir("run");
  auto r = invoke({"--config", (kFixtures / "stripe/config.yaml").string(), "--out", dir.string(), "--stamp", "s", "run",
                "--programs", (kFixtures / "stripe/golden").string()});
  EXPECT_EQ(r.code, 2) << r.err.str();
  auto report = read(dir / "s/run_report.json");
  EXPECT_EQ(report.at("totals").at("mismatched"), 1);
  EXPECT_EQ(report.at("tool_version"), std::string(kToolVersion));
}

TEST(Cli, TextFormatRun) {
  auto dir = temp_dir("text");
  auto r = invoke({"--config", (kFixtures / "gitlab/config.yaml").string(), "--out", dir.string(), "--stamp", "s", "run",
                "--programs", (kFixtures / "gitlab").string()});
  EXPECT_EQ(r.code, 2) << r.err.str();
  EXPECT_NE(r.out.str().find("InterParameterDependency"), std::string::npos);
}

TEST(Cli, MineAndGenWriteVersionedArtifacts) {
  auto dir = temp_dir("mine");
  auto cfg = (kFixtures / "stripe/config.yaml").string();
  auto m = invoke({"--config", cfg, "--out", dir.string(), "--stamp", "m", "mine"});
  ASSERT_EQ(m.code, 0) << m.err.str();
  auto report = read(dir / "m/mining_report.json");
  EXPECT_EQ(report.at("tool_version"), std::string(kToolVersion));
  EXPECT_EQ(report.at("llm").at("provider_calls"), 0);
  EXPECT_EQ(report.at("constraints"), 6);
  auto g = invoke({"--config", cfg, "--out", dir.string(), "--stamp", "g", "gen", "--constraints",
                (dir / "m/constraints.json").string()});
  ASSERT_EQ(g.code, 0) << g.err.str();
  EXPECT_EQ(read(dir / "g/synthesis_report.json").at("counts").at("Synthesized"), 5);
}

TEST(Cli, LlmModeOverrideToLiveUsesProvider) {
  auto dir = temp_dir("live");
  auto r = invoke({"--config", (kFixtures / "stripe/config.yaml").string(), "--out", dir.string(), "--llm-mode", "live",
                "mine"});
  EXPECT_EQ(r.code, 1);
}

TEST(Cli, EvalScoresTable) {
  auto dir = temp_dir("eval");
  write(dir / "table.json", R"({"rows": [{"name": "G.C", "tp": 94.6, "fp": 7.4, "fn": 4.4}]})");
  auto cfg = write(dir / "c.yaml", "spec: " + (kFixtures / "stripe/openapi.yaml").string() +
                                       "\nllm: {mode: live}\neval: {table: table.json}\n");
  auto r = invoke({"--config", cfg.string(), "--out", (dir / "out").string(), "--stamp", "e", "eval"});
  ASSERT_EQ(r.code, 0) << r.err.str();
  auto metrics = read(dir / "out/e/metrics.json");
  EXPECT_NEAR(metrics.at("table").at("rows").at(0).at("precision").get<double>(), 94.6 / 102.0, 1e-9);
}

TEST(Session, MiningReportTokensEqualGatewayCounters) {
  auto config = cli::load_config(kFixtures / "stripe/config.yaml");
  cli::Session s(config, [](const cli::RunConfig&) { return std::make_shared<FailingProvider>(); });
  auto dir = temp_dir("session");
  s.mine(dir);
  auto stats = s.gateway().stats();
  auto llm = read(dir / "mining_report.json").at("llm");
  EXPECT_EQ(llm.at("input_tokens"), stats.input_tokens);
  EXPECT_EQ(llm.at("output_tokens"), stats.output_tokens);
  EXPECT_EQ(llm.at("calls"), stats.calls);
  EXPECT_GT(stats.input_tokens, 0);
}
