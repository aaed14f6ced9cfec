#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include <specguard/llm.hpp>

namespace specguard::fixture {

/// Canned completion chosen by template and prompt substrings.
struct ScriptRule {
  std::optional<TemplateId> template_id;
  std::vector<std::string> contains;
  std::string reply;
};

/// Offline provider answering from a script; used to record fixture
/// transcripts. Token counts are a deterministic function of text length.
class ScriptedProvider : public Provider {
 public:
  ScriptedProvider(std::vector<ScriptRule> rules, std::map<TemplateId, std::string> defaults);
  /// {"rules": [{template?, contains?: [..], reply}], "defaults": {template: reply}}
  static std::shared_ptr<ScriptedProvider> from_json(const nlohmann::json& j);
  static std::shared_ptr<ScriptedProvider> from_file(const std::string& path);

  /// Throws ProviderError when no rule or default applies.
  ProviderReply send(const LlmRequest& request) override;

  int calls() const { return calls_.load(); }
  std::map<TemplateId, int> calls_by_template() const;

 private:
  std::vector<ScriptRule> rules_;
  std::map<TemplateId, std::string> defaults_;
  std::atomic<int> calls_{0};
  mutable std::mutex mutex_;
  std::map<TemplateId, int> by_template_;
};

std::int64_t approx_tokens(std::string_view text);

}  // namespace specguard::fixture
