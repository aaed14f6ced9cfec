#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <specguard/llm.hpp>
#include <specguard/miner.hpp>

namespace specguard::cli {

struct LlmConfig {
  std::string model = "gpt-4o";
  double temperature = 0.0;
  double top_p = 0.95;
  LlmMode mode = LlmMode::Replay;
  std::optional<std::filesystem::path> cache;
  std::optional<std::filesystem::path> prompts;
  int max_concurrency = 4;
  int retry_attempts = 3;
};

struct MiningConfig {
  MiningMode mode = MiningMode::ObservationConfirmation;
  /// Knowledge base is kept in memory for the run unless a path is given.
  std::optional<std::filesystem::path> kb;
  int concurrency = 1;
  int max_depth = 3;
};

struct SynthesisConfig {
  int repair_attempts = 1;
  bool verify = true;
};

struct HarnessConfig {
  std::optional<std::filesystem::path> traces;
  int concurrency = 1;
  std::string format = "json";
};

struct EvalConfig {
  std::optional<std::filesystem::path> ground_truth;
  std::optional<std::filesystem::path> judgments;
  std::optional<std::filesystem::path> external_invariants;
  /// Rows of {name, tp, fp, fn} scored as a table.
  std::optional<std::filesystem::path> table;
};

struct RunConfig {
  std::filesystem::path spec;
  LlmConfig llm;
  MiningConfig mining;
  SynthesisConfig synthesis;
  HarnessConfig harness;
  EvalConfig eval;
  std::filesystem::path output = "out";

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// Parses YAML (JSON is accepted as a YAML subset). Relative paths resolve
/// against the directory holding the file. Throws ConfigError.
RunConfig load_config(const std::filesystem::path& file);
RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir);

}  // namespace specguard::cli
