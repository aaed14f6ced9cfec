#include "scripted_provider.hpp"

#include <fstream>

#include <specguard/errors.hpp>

namespace specguard::fixture {

std::int64_t approx_tokens(std::string_view text) { return static_cast<std::int64_t>((text.size() + 3) / 4); }

ScriptedProvider::ScriptedProvider(std::vector<ScriptRule> rules, std::map<TemplateId, std::string> defaults)
    : rules_(std::move(rules)), defaults_(std::move(defaults)) {}

std::shared_ptr<ScriptedProvider> ScriptedProvider::from_json(const nlohmann::json& j) {
  std::vector<ScriptRule> rules;
  std::map<TemplateId, std::string> defaults;
  const nlohmann::json rule_list = j.value("rules", nlohmann::json::array());
  const nlohmann::json default_map = j.value("defaults", nlohmann::json::object());
  for (const auto& r : rule_list) {
    ScriptRule rule;
    if (r.contains("template")) rule.template_id = template_from_string(r["template"].get<std::string>());
    if (r.contains("contains"))
      for (const auto& c : r["contains"]) rule.contains.push_back(c.get<std::string>());
    const auto& reply = r.at("reply");
    rule.reply = reply.is_string() ? reply.get<std::string>() : reply.dump();
    rules.push_back(std::move(rule));
  }
  for (const auto& [k, v] : default_map.items())
    defaults.emplace(template_from_string(k), v.get<std::string>());
  return std::make_shared<ScriptedProvider>(std::move(rules), std::move(defaults));
}

std::shared_ptr<ScriptedProvider> ScriptedProvider::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open script " + path);
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("script " + path + ": " + e.what());
  }
}

ProviderReply ScriptedProvider::send(const LlmRequest& request) {
  ++calls_;
  {
    std::lock_guard lock(mutex_);
    ++by_template_[request.template_id];
  }
  const std::string* reply = nullptr;
  for (const auto& r : rules_) {
    if (r.template_id && *r.template_id != request.template_id) continue;
    bool all = true;
    for (const auto& c : r.contains) all = all && request.rendered_prompt.find(c) != std::string::npos;
    if (all) {
      reply = &r.reply;
      break;
    }
  }
  if (!reply) {
    auto it = defaults_.find(request.template_id);
    if (it == defaults_.end())
      throw ProviderError("no scripted reply for " + std::string(to_string(request.template_id)));
    reply = &it->second;
  }
  return {*reply, approx_tokens(request.rendered_prompt), approx_tokens(*reply)};
}

std::map<TemplateId, int> ScriptedProvider::calls_by_template() const {
  std::lock_guard lock(mutex_);
  return by_template_;
}

}  // namespace specguard::fixture
