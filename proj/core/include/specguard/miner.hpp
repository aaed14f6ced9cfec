#pragma once

#include <compare>
#include <filesystem>
#include <future>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "specguard/category.hpp"
#include "specguard/llm.hpp"
#include "specguard/spec_model.hpp"

namespace specguard {

enum class ConstraintSource { ReqResp, RespProp };
std::string_view to_string(ConstraintSource s);

enum class VariableScope { Request, Response };

/// A constrained quantity: a request parameter (wire name) or a response path.
struct Variable {
  VariableScope scope = VariableScope::Response;
  std::string name;

  /// `input.<name>` or `return.<path>`.
  std::string render() const;
  static Variable request(std::string n) { return {VariableScope::Request, std::move(n)}; }
  static Variable response(std::string n) { return {VariableScope::Response, std::move(n)}; }
  auto operator<=>(const Variable&) const = default;
};

enum class ObservationKind { Parameter, Operation, Schema, Property };
std::string_view to_string(ObservationKind k);

struct Observation {
  std::string subject;
  ObservationKind kind = ObservationKind::Property;
  std::string text;
};

/// One LLM exchange that contributed to a constraint.
struct ProvenanceStep {
  TemplateId template_id = TemplateId::Mapping;
  std::string digest;
  std::string answer;
};

struct Constraint {
  std::string id;
  ConstraintSource source = ConstraintSource::RespProp;
  OperationId operation;
  /// Sorted, non-empty.
  std::vector<Variable> variables;
  std::string description;
  Category category = Category::Uncategorized;
  /// Response status the response variables were flattened from.
  std::string status;
  /// Mapping explanation for request-response pairs.
  std::optional<std::string> rationale;
  std::vector<Observation> observations;
  std::vector<ProvenanceStep> provenance;

  std::vector<const Variable*> request_variables() const;
  std::vector<const Variable*> response_variables() const;
};

/// Keyword and structure classifier into the oracle categories.
Category categorize(const Constraint& c);
Category categorize_text(ConstraintSource source, std::string_view description, std::size_t response_variables,
                         std::size_t total_variables);

/// Lower-cased, whitespace-collapsed text used for deduplication.
std::string normalize_description(std::string_view text);

struct KnowledgeEntry {
  bool confirmed = false;
  std::optional<std::string> description;
  std::vector<Observation> observations;
  std::vector<ProvenanceStep> provenance;
};

/// Write-once cache of response-property decisions keyed by (name, composed
/// description). get_or_compute runs at most one computation per key; other
/// callers wait for and share its result.
class KnowledgeBase {
 public:
  KnowledgeBase() = default;
  /// Loads `file` when it exists; save() writes back to it.
  explicit KnowledgeBase(std::filesystem::path file);

  static std::string key(std::string_view name, std::string_view composed_description);

  std::optional<KnowledgeEntry> find(const std::string& key) const;
  /// Returns false (and leaves the entry untouched) when the key exists.
  bool insert(const std::string& key, KnowledgeEntry entry);
  /// `computed` is set to true only for the caller whose function ran.
  KnowledgeEntry get_or_compute(const std::string& key, const std::function<KnowledgeEntry()>& compute,
                                bool* computed = nullptr);
  std::size_t size() const;
  void save() const;
  void save(const std::filesystem::path& file) const;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, KnowledgeEntry> entries_;
  std::map<std::string, std::shared_future<KnowledgeEntry>> in_flight_;
  std::optional<std::filesystem::path> file_;
};

enum class MiningMode { ObservationConfirmation, Merged };
std::string_view to_string(MiningMode m);
MiningMode mining_mode_from_string(std::string_view s);

struct MinerOptions {
  MiningMode mode = MiningMode::ObservationConfirmation;
  /// Operations mined in parallel.
  int concurrency = 1;
};

struct MiningStats {
  std::int64_t parameters_seen = 0;
  std::int64_t parameters_skipped = 0;
  std::int64_t mappings_rejected = 0;
  std::int64_t confirmations_rejected = 0;
  std::int64_t unresolved_properties = 0;
  std::int64_t properties_seen = 0;
  std::int64_t properties_skipped = 0;
  std::int64_t kb_hits = 0;
  std::int64_t parse_failures = 0;
};

class ConstraintMiner {
 public:
  ConstraintMiner(const ApiSpec& spec, LlmGateway& gateway, KnowledgeBase& kb, MinerOptions options = {});

  std::vector<Constraint> mine_request_response(const OperationSpec& op);
  std::vector<Constraint> mine_response_properties(const OperationSpec& op, const std::string& status);
  /// Both miners over every operation, deduplicated and sorted.
  std::vector<Constraint> mine_all();

  MiningStats stats() const;

 private:
  struct Asked {
    LlmResponse response;
    ProvenanceStep step;
  };
  Asked ask(TemplateId id, const Bindings& bindings);
  KnowledgeEntry decide_property(const PropertySpec& prop, const std::string& composed);

  const ApiSpec& spec_;
  LlmGateway& gateway_;
  KnowledgeBase& kb_;
  MinerOptions options_;
  mutable std::mutex stats_mutex_;
  MiningStats stats_;
};

/// Labelled newline-joined description, type, format and example; empty when
/// there is no description.
std::string compose_property_description(const PropertySpec& prop, const std::optional<std::string>& description);

/// Stable id: `<method>_<path>_<rr|rp>_<variables>_<hash8>`.
std::string make_constraint_id(const Constraint& c);
/// Removes duplicates by (variables, normalized description), then sorts by
/// (operation path, method, variables, description).
std::vector<Constraint> finalize_constraints(std::vector<Constraint> constraints);

nlohmann::json constraint_to_json(const Constraint& c);
Constraint constraint_from_json(const nlohmann::json& j);
nlohmann::json constraints_to_json(const std::vector<Constraint>& cs);
std::vector<Constraint> constraints_from_json(const nlohmann::json& j);

}  // namespace specguard
