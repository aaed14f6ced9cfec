#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

namespace specguard {

enum class TemplateId {
  ParameterObservation,
  OperationObservation,
  SchemaObservation,
  Mapping,
  MappingConfirmation,
  PropertyObservation,
  ConstraintConfirmation,
  Testgen,
  MergedObservationConfirmation,
};

inline constexpr TemplateId kAllTemplates[] = {
    TemplateId::ParameterObservation, TemplateId::OperationObservation,  TemplateId::SchemaObservation,
    TemplateId::Mapping,              TemplateId::MappingConfirmation,   TemplateId::PropertyObservation,
    TemplateId::ConstraintConfirmation, TemplateId::Testgen, TemplateId::MergedObservationConfirmation,
};

std::string_view to_string(TemplateId id);
/// Throws ConfigError on an unknown name.
TemplateId template_from_string(std::string_view name);

using Bindings = std::map<std::string, std::string, std::less<>>;

/// Template body with `{name}` placeholders; `{{` and `}}` are literal braces.
class PromptTemplate {
 public:
  PromptTemplate(TemplateId id, std::string body);

  TemplateId id() const { return id_; }
  const std::string& body() const { return body_; }
  const std::vector<std::string>& placeholders() const { return placeholders_; }

  /// Substituted text is not re-scanned. Throws MissingBinding.
  std::string render(const Bindings& bindings) const;

 private:
  TemplateId id_;
  std::string body_;
  std::vector<std::string> placeholders_;
};

class PromptLibrary {
 public:
  /// The templates compiled into the library.
  static PromptLibrary defaults();
  /// Defaults, with any `<id>.txt` found in `dir` taking precedence.
  static PromptLibrary from_directory(const std::filesystem::path& dir);

  const PromptTemplate& get(TemplateId id) const;
  std::string render(TemplateId id, const Bindings& bindings) const { return get(id).render(bindings); }
  void set(PromptTemplate t);

 private:
  std::map<TemplateId, PromptTemplate> templates_;
};

struct LlmRequest {
  TemplateId template_id = TemplateId::Mapping;
  std::string rendered_prompt;
  std::string model = "gpt-4o";
  double temperature = 0.0;
  double top_p = 0.95;

  /// Throws std::invalid_argument when temperature < 0 or top_p outside (0, 1].
  void validate() const;
  /// Hex SHA-256 over (model, temperature, top_p, rendered_prompt).
  std::string digest() const;
};

struct LlmResponse {
  std::string text;
  std::int64_t input_tokens = 0;
  std::int64_t output_tokens = 0;
  bool cached = false;
};

struct CacheEntry {
  std::string digest;
  std::string model;
  double temperature = 0.0;
  double top_p = 1.0;
  std::string prompt;
  std::string completion;
  std::int64_t input_tokens = 0;
  std::int64_t output_tokens = 0;
};

/// Append-only digest -> completion store backed by a JSON-lines file.
/// Writes are serialized; concurrent lookups proceed in parallel.
class TranscriptCache {
 public:
  /// In-memory only.
  TranscriptCache() = default;
  /// Loads `file` if it exists; new entries are appended to it.
  explicit TranscriptCache(std::filesystem::path file);

  std::optional<CacheEntry> lookup(const std::string& digest) const;
  /// No-op when the digest is already present.
  void insert(const CacheEntry& entry);
  std::size_t size() const;
  const std::optional<std::filesystem::path>& file() const { return file_; }

 private:
  mutable std::shared_mutex mutex_;
  std::unordered_map<std::string, CacheEntry> entries_;
  std::optional<std::filesystem::path> file_;
};

struct ProviderReply {
  std::string text;
  std::int64_t input_tokens = 0;
  std::int64_t output_tokens = 0;
};

class Provider {
 public:
  virtual ~Provider() = default;
  /// Throws TransientProviderError for retryable failures, ProviderError otherwise.
  virtual ProviderReply send(const LlmRequest& request) = 0;
};

/// OpenAI-compatible chat-completions client. Endpoint and key come from
/// SPECGUARD_BASE_URL (default https://api.openai.com/v1) and SPECGUARD_API_KEY.
class OpenAiProvider : public Provider {
 public:
  OpenAiProvider();
  OpenAiProvider(std::string base_url, std::string api_key);
  ProviderReply send(const LlmRequest& request) override;

 private:
  std::string base_url_;
  std::string api_key_;
};

/// Provider that throws on any contact; used to prove replay is offline.
class FailingProvider : public Provider {
 public:
  ProviderReply send(const LlmRequest& request) override;
  int contacts() const { return contacts_.load(); }

 private:
  std::atomic<int> contacts_{0};
};

enum class LlmMode { Live, Record, Replay };
std::string_view to_string(LlmMode m);
LlmMode llm_mode_from_string(std::string_view s);

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{500};
  double multiplier = 2.0;
};

struct GatewayOptions {
  LlmMode mode = LlmMode::Replay;
  std::string model = "gpt-4o";
  double temperature = 0.0;
  double top_p = 0.95;
  int max_concurrency = 4;
  RetryPolicy retry;
};

struct GatewayStats {
  std::int64_t calls = 0;
  std::int64_t provider_calls = 0;
  std::int64_t cache_hits = 0;
  std::int64_t input_tokens = 0;
  std::int64_t output_tokens = 0;
  std::map<std::string, std::int64_t> calls_by_template;
};

class LlmGateway {
 public:
  using SleepFn = std::function<void(std::chrono::milliseconds)>;

  LlmGateway(GatewayOptions options, std::shared_ptr<TranscriptCache> cache, std::shared_ptr<Provider> provider,
             PromptLibrary prompts = PromptLibrary::defaults());

  /// Renders the template and completes it.
  LlmResponse ask(TemplateId id, const Bindings& bindings);
  /// Throws CacheMiss (replay) or ProviderError (retries exhausted).
  LlmResponse complete(const LlmRequest& request);

  LlmRequest make_request(TemplateId id, std::string prompt) const;
  const GatewayOptions& options() const { return options_; }
  const PromptLibrary& prompts() const { return prompts_; }
  GatewayStats stats() const;
  void set_sleep(SleepFn fn) { sleep_ = std::move(fn); }

 private:
  ProviderReply send_with_retry(const LlmRequest& request);
  void account(const LlmRequest& request, const LlmResponse& response, bool provider);

  GatewayOptions options_;
  std::shared_ptr<TranscriptCache> cache_;
  std::shared_ptr<Provider> provider_;
  PromptLibrary prompts_;
  std::counting_semaphore<> in_flight_;
  mutable std::mutex stats_mutex_;
  GatewayStats stats_;
  SleepFn sleep_;
};

// ---------------------------------------------------------------------------
// Structured answers

enum class AnswerSchema { Mapping, Confirmation };

struct StructuredAnswer {
  bool verdict = false;
  std::optional<std::string> property;
  std::optional<std::string> explanation;
  std::optional<std::string> constraint;
};

struct ParseFailure {
  std::string reason;
};

using ParsedAnswer = std::variant<StructuredAnswer, ParseFailure>;

/// Lenient extraction of the yes/no verdict and labelled fields; never throws.
ParsedAnswer parse_structured_answer(std::string_view text, AnswerSchema expected);

}  // namespace specguard
