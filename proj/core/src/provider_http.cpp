#include <cstdlib>
#include <regex>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "specguard/errors.hpp"
#include "specguard/llm.hpp"

namespace specguard {

namespace {

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return (v && *v) ? std::string(v) : std::move(fallback);
}

}  // namespace

OpenAiProvider::OpenAiProvider()
    : OpenAiProvider(env_or("SPECGUARD_BASE_URL", "https://api.openai.com/v1"), env_or("SPECGUARD_API_KEY", "")) {}

OpenAiProvider::OpenAiProvider(std::string base_url, std::string api_key)
    : base_url_(std::move(base_url)), api_key_(std::move(api_key)) {
  while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
}

ProviderReply OpenAiProvider::send(const LlmRequest& request) {
  if (api_key_.empty()) throw ProviderError("SPECGUARD_API_KEY is not set");

  static const std::regex url_re(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(base_url_, m, url_re)) throw ProviderError("malformed provider URL " + base_url_);
  const std::string origin = m[1].str();
  const std::string prefix = m[2].matched ? m[2].str() : "";

  httplib::Client client(origin);
  client.set_connection_timeout(30);
  client.set_read_timeout(180);
  client.set_bearer_token_auth(api_key_);

  nlohmann::json body = {
      {"model", request.model},
      {"temperature", request.temperature},
      {"top_p", request.top_p},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", request.rendered_prompt}}})},
  };
  auto res = client.Post(prefix + "/chat/completions", body.dump(), "application/json");
  if (!res) throw TransientProviderError("transport error: " + httplib::to_string(res.error()));
  if (res->status == 429 || res->status >= 500) {
    throw TransientProviderError("provider returned HTTP " + std::to_string(res->status));
  }
  if (res->status != 200) {
    throw ProviderError("provider returned HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 400));
  }
  try {
    auto j = nlohmann::json::parse(res->body);
    ProviderReply reply;
    reply.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
    if (auto u = j.find("usage"); u != j.end() && u->is_object()) {
      reply.input_tokens = u->value("prompt_tokens", std::int64_t{0});
      reply.output_tokens = u->value("completion_tokens", std::int64_t{0});
    }
    return reply;
  } catch (const nlohmann::json::exception& e) {
    throw ProviderError(std::string("malformed provider response: ") + e.what());
  }
}

}  // namespace specguard
