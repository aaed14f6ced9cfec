#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "specguard/ir.hpp"
#include "specguard/llm.hpp"
#include "specguard/miner.hpp"
#include "specguard/spec_model.hpp"

namespace specguard {

enum class SynthesisStatus { Synthesized, ParseFailed, RejectedByVerifier };
std::string_view to_string(SynthesisStatus s);

struct VerifierEvidence {
  std::string variable;
  Value example;
  Verdict verdict;
};

struct SynthesisResult {
  std::string constraint_id;
  std::optional<ValidatorProgram> program;
  SynthesisStatus status = SynthesisStatus::ParseFailed;
  std::optional<VerifierEvidence> evidence;
  /// Why the completion could not be turned into a program.
  std::string error;
  std::vector<ProvenanceStep> provenance;
};

struct SynthOptions {
  /// Re-prompts after an unusable completion; only applied in live mode.
  int repair_attempts = 1;
  bool verify = true;
};

class OracleSynthesizer {
 public:
  OracleSynthesizer(const ApiSpec& spec, LlmGateway& gateway, SynthOptions options = {});

  /// Prompt, parse and build only; no example verification.
  SynthesisResult synthesize(const Constraint& c);
  /// synthesize then (optionally) verify_against_examples, in input order.
  std::vector<SynthesisResult> synthesize_all(const std::vector<Constraint>& constraints);

  Bindings testgen_bindings(const Constraint& c, const std::string& repair_note = {}) const;

 private:
  const ApiSpec& spec_;
  LlmGateway& gateway_;
  SynthOptions options_;
};

/// Evaluates the program on a minimal response built from each response
/// variable's spec example. A Mismatched verdict rejects the program.
SynthesisResult verify_against_examples(SynthesisResult r, const Constraint& c, const ApiSpec& spec);

/// Smallest object holding `example` at `path`; each `[]` becomes a
/// one-element array.
Value build_minimal_response(const PropertyPath& path, const Value& example);

/// First fenced ```json block, else the first balanced `{...}` span.
std::optional<std::string> extract_json_block(std::string_view text);

/// Build a program from a completion. Throws IrSyntaxError / IrBuildError.
ValidatorProgram program_from_completion(std::string_view completion, const Constraint& c);

nlohmann::json synthesis_report(const std::vector<SynthesisResult>& results);
/// Writes `programs/<id>.json` for each synthesized program plus `synthesis_report.json`.
void write_program_bundle(const std::filesystem::path& dir, const std::vector<SynthesisResult>& results);
/// Programs from a bundle directory, sorted by constraint id.
std::vector<ValidatorProgram> load_program_bundle(const std::filesystem::path& dir);

}  // namespace specguard
