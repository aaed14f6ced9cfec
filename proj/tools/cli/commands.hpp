#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include <specguard/evalkit.hpp>
#include <specguard/harness.hpp>
#include <specguard/llm.hpp>
#include <specguard/miner.hpp>
#include <specguard/spec_model.hpp>
#include <specguard/synth.hpp>

#include "config.hpp"

namespace specguard::cli {

using ProviderFactory = std::function<std::shared_ptr<Provider>(const RunConfig&)>;

/// OpenAI-compatible provider for live/record, a FailingProvider for replay.
std::shared_ptr<Provider> default_provider(const RunConfig& config);

struct CliEnv {
  ProviderFactory provider_factory = default_provider;
  std::ostream* out = nullptr;
  std::ostream* err = nullptr;
};

/// Entry point shared by the binary and the tests. Returns the process exit code.
int run_cli(int argc, const char* const* argv, const CliEnv& env = {});
int run_cli(const std::vector<std::string>& args, const CliEnv& env = {});

/// `run-YYYYMMDDTHHMMSSZ` for the current UTC time.
std::string current_stamp();

/// One pipeline session: spec, gateway and knowledge base built from a config.
class Session {
 public:
  Session(RunConfig config, const ProviderFactory& factory);

  const RunConfig& config() const { return config_; }
  const ApiSpec& spec() const { return spec_; }
  LlmGateway& gateway() { return *gateway_; }
  KnowledgeBase& kb() { return *kb_; }
  Provider& provider() { return *provider_; }

  std::vector<Constraint> mine(const std::filesystem::path& run_dir);
  std::vector<SynthesisResult> gen(const std::vector<Constraint>& constraints, const std::filesystem::path& run_dir);
  RunReport run(const std::vector<ValidatorProgram>& programs, const std::filesystem::path& traces,
                const std::filesystem::path& run_dir);

 private:
  RunConfig config_;
  ApiSpec spec_;
  std::shared_ptr<Provider> provider_;
  std::shared_ptr<TranscriptCache> cache_;
  std::unique_ptr<LlmGateway> gateway_;
  std::unique_ptr<KnowledgeBase> kb_;
};

nlohmann::json mining_report(const std::vector<Constraint>& constraints, const MiningStats& stats,
                             const GatewayStats& gateway, std::size_t kb_entries, MiningMode mode);

/// metrics.json content; every input beyond the config is optional.
nlohmann::json evaluate_config(const RunConfig& config, const std::optional<std::filesystem::path>& constraints_file);

void write_json(const std::filesystem::path& file, const nlohmann::json& j);
nlohmann::json read_json_file(const std::filesystem::path& file);

}  // namespace specguard::cli
