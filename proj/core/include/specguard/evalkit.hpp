#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "specguard/category.hpp"
#include "specguard/miner.hpp"
#include "specguard/spec_model.hpp"

namespace specguard {

/// Counts are reals so that means over repeated runs can be scored directly.
struct Metrics {
  double tp = 0;
  double fp = 0;
  double fn = 0;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;
};

/// Fills the ratios; each one stays empty when its denominator is zero.
Metrics metrics_from_counts(double tp, double fp, double fn);
nlohmann::json metrics_to_json(const Metrics& m);

/// Sorted, de-duplicated rendered variables (`input.x`, `return.a[].b`).
using VariableKey = std::vector<std::string>;
std::string render_key(const VariableKey& key);

struct GroundTruthEntry {
  std::string id;
  OperationId operation;
  VariableKey variables;
  std::string description;
  std::optional<Category> category;
};

struct GroundTruth {
  std::vector<GroundTruthEntry> entries;
};

/// Throws ParseError on schema violations or duplicate (operation, variables,
/// description) triples. Entries without an id get `gt-<n>`.
GroundTruth ground_truth_from_json(const nlohmann::json& j);
GroundTruth load_ground_truth(const std::filesystem::path& path);

struct Judgment {
  bool correct = false;
  /// Ground-truth ids this constraint was confirmed equivalent to. When
  /// absent, a correct constraint covers every entry with its operation and
  /// variable set.
  std::optional<std::vector<std::string>> equivalent_to;
};

using Judgments = std::map<std::string, Judgment, std::less<>>;

/// Values are either `"correct"` / `"incorrect"` or `{correct, equivalent_to}`.
Judgments judgments_from_json(const nlohmann::json& j);
Judgments load_judgments(const std::filesystem::path& path);

/// tp = judged correct, fp = judged incorrect, fn = ground-truth entries not
/// covered by a correct constraint. Throws MissingJudgment.
Metrics score(const std::vector<Constraint>& mined, const GroundTruth& gt, const Judgments& judgments);

struct ExternalInvariant {
  std::optional<OperationId> operation;
  VariableKey variables;
  std::string text;
};

/// Tokens of the form `input.*` / `return.*` in invariant text.
VariableKey extract_variables(std::string_view text);
/// Variables are extracted from `text` when not given. Throws ParseError when
/// an invariant references no variable.
std::vector<ExternalInvariant> external_invariants_from_json(const nlohmann::json& j);
std::vector<ExternalInvariant> load_external_invariants(const std::filesystem::path& path);

VariableKey variable_key(const Constraint& c);
VariableKey variable_key(const ExternalInvariant& inv);
VariableKey variable_key(const GroundTruthEntry& e);

template <typename T>
std::map<VariableKey, std::vector<T>> group_by_variables(const std::vector<T>& items) {
  std::map<VariableKey, std::vector<T>> out;
  for (const auto& item : items) out[variable_key(item)].push_back(item);
  return out;
}

struct OverlapPartition {
  std::vector<VariableKey> shared;
  std::vector<VariableKey> unique_mined;
  std::vector<VariableKey> unique_external;
  std::size_t mined_groups = 0;
  std::size_t external_groups = 0;
};

OverlapPartition overlap(const std::vector<Constraint>& mined, const std::vector<ExternalInvariant>& ext);
nlohmann::json overlap_to_json(const OverlapPartition& p);

struct TableRow {
  std::string name;
  double tp = 0;
  double fp = 0;
  double fn = 0;
};

struct TableScore {
  std::vector<std::pair<std::string, Metrics>> rows;
  /// Ratios over summed counts.
  Metrics pooled;
  /// Unweighted means of the defined per-row ratios.
  std::optional<double> macro_precision;
  std::optional<double> macro_recall;
};

TableScore score_table(const std::vector<TableRow>& rows);
nlohmann::json table_score_to_json(const TableScore& t);

}  // namespace specguard
