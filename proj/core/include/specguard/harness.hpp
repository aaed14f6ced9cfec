#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "specguard/ir.hpp"
#include "specguard/spec_model.hpp"

namespace specguard {

/// One recorded request/response pair.
struct Exchange {
  OperationId operation;
  /// Parameters keyed by wire name, e.g. `created[gt]`.
  Value request;
  int status = 200;
  Value response_body;
  std::string captured_at;
};

struct TraceSet {
  std::vector<Exchange> exchanges;
  /// Lines dropped because their status was not 2xx.
  std::size_t filtered = 0;
};

/// JSON-lines trace file; blank lines are skipped. Throws TraceParseError.
TraceSet load_traces(const std::filesystem::path& path);
TraceSet parse_traces(std::string_view text);
Exchange exchange_from_json(const nlohmann::json& j, std::size_t line);
nlohmann::json exchange_to_json(const Exchange& e);

struct ExchangeVerdict {
  std::size_t exchange = 0;
  Verdict verdict;
};

struct ConstraintResult {
  std::string constraint_id;
  std::optional<OperationId> operation;
  std::optional<Category> category;
  std::vector<ExchangeVerdict> per_exchange;
  Verdict final;
  /// Index into per_exchange of the first Mismatched verdict.
  std::optional<std::size_t> evidence;
  /// Set when the program's operation had no exchanges.
  std::optional<std::string> note;
};

struct HarnessOptions {
  int concurrency = 1;
};

/// Evaluates every program on the exchanges of its operation (all exchanges
/// when the program names none). Output order follows the input programs.
std::vector<ConstraintResult> run(const std::vector<ValidatorProgram>& programs,
                                  const std::vector<Exchange>& exchanges, const HarnessOptions& options = {});

enum class RootCause { IncompatibleDataFormat, ImplicitNullable, InterParameterDependency, Other };
std::string_view to_string(RootCause r);

/// Heuristic tag for a Mismatched result. `program` enables the structural
/// checks (ordering nodes, request references).
RootCause classify_mismatch(const ConstraintResult& result, const ApiSpec& spec,
                            const ValidatorProgram* program = nullptr);

struct MismatchEntry {
  std::string constraint_id;
  std::optional<OperationId> operation;
  std::size_t exchange = 0;
  Verdict verdict;
  RootCause root_cause = RootCause::Other;
};

struct RunTotals {
  std::size_t matched = 0;
  std::size_t mismatched = 0;
  std::size_t unknown = 0;
  std::size_t total() const { return matched + mismatched + unknown; }
};

struct RunReport {
  RunTotals totals;
  /// Category name -> totals; programs without a category count as `Uncategorized`.
  std::map<std::string, RunTotals> by_category;
  std::vector<ConstraintResult> results;
  std::vector<MismatchEntry> mismatches;
  std::size_t exchanges = 0;
  std::size_t filtered = 0;

  bool has_mismatches() const { return totals.mismatched > 0; }
  /// 0 without mismatches, 2 with.
  int exit_code() const { return has_mismatches() ? 2 : 0; }
};

inline constexpr int kReportVersion = 1;

RunReport build_report(std::vector<ConstraintResult> results, const std::vector<ValidatorProgram>& programs,
                       const ApiSpec* spec = nullptr, std::size_t exchanges = 0, std::size_t filtered = 0);

nlohmann::json report_to_json(const RunReport& r);
std::string report_to_text(const RunReport& r);

nlohmann::json verdict_to_json(const Verdict& v);

}  // namespace specguard
