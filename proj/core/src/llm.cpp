#include "specguard/llm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "specguard/digest.hpp"
#include "specguard/errors.hpp"

namespace specguard {

namespace {

struct DefaultPrompt {
  const char* id;
  const char* body;
};

constexpr DefaultPrompt kDefaultPrompts[] = {
#include "specguard/prompt_defaults.inc"
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

// Walks a template body calling `literal` for plain text and `hole` for placeholders.
template <typename Literal, typename Hole>
void scan_template(std::string_view body, Literal&& literal, Hole&& hole) {
  std::size_t i = 0;
  while (i < body.size()) {
    char c = body[i];
    if (c == '{' && i + 1 < body.size() && body[i + 1] == '{') {
      literal("{");
      i += 2;
      continue;
    }
    if (c == '}' && i + 1 < body.size() && body[i + 1] == '}') {
      literal("}");
      i += 2;
      continue;
    }
    if (c == '{' && i + 1 < body.size() && ident_start(body[i + 1])) {
      std::size_t j = i + 1;
      while (j < body.size() && ident_char(body[j])) ++j;
      if (j < body.size() && body[j] == '}') {
        hole(body.substr(i + 1, j - i - 1));
        i = j + 1;
        continue;
      }
    }
    literal(body.substr(i, 1));
    ++i;
  }
}

}  // namespace

std::string_view to_string(TemplateId id) {
  switch (id) {
    case TemplateId::ParameterObservation: return "parameter-observation";
    case TemplateId::OperationObservation: return "operation-observation";
    case TemplateId::SchemaObservation: return "schema-observation";
    case TemplateId::Mapping: return "mapping";
    case TemplateId::MappingConfirmation: return "mapping-confirmation";
    case TemplateId::PropertyObservation: return "property-observation";
    case TemplateId::ConstraintConfirmation: return "constraint-confirmation";
    case TemplateId::Testgen: return "testgen";
    case TemplateId::MergedObservationConfirmation: return "merged-observation-confirmation";
  }
  return "mapping";
}

TemplateId template_from_string(std::string_view name) {
  for (auto id : kAllTemplates)
    if (to_string(id) == name) return id;
  throw ConfigError("prompts", "unknown template id '" + std::string(name) + "'");
}

PromptTemplate::PromptTemplate(TemplateId id, std::string body) : id_(id), body_(std::move(body)) {
  scan_template(
      body_, [](std::string_view) {},
      [this](std::string_view name) {
        if (std::find(placeholders_.begin(), placeholders_.end(), name) == placeholders_.end())
          placeholders_.emplace_back(name);
      });
}

std::string PromptTemplate::render(const Bindings& bindings) const {
  for (const auto& name : placeholders_)
    if (bindings.find(name) == bindings.end()) throw MissingBinding(name);
  std::string out;
  out.reserve(body_.size());
  scan_template(
      body_, [&](std::string_view s) { out.append(s); },
      [&](std::string_view name) { out.append(bindings.find(name)->second); });
  return out;
}

PromptLibrary PromptLibrary::defaults() {
  PromptLibrary lib;
  for (const auto& p : kDefaultPrompts) {
    auto id = template_from_string(p.id);
    lib.templates_.insert_or_assign(id, PromptTemplate(id, p.body));
  }
  for (auto id : kAllTemplates)
    if (!lib.templates_.count(id)) throw ConfigError("prompts", "no default template for " + std::string(to_string(id)));
  return lib;
}

PromptLibrary PromptLibrary::from_directory(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw ConfigError("llm.prompts", "not a directory: " + dir.string());
  PromptLibrary lib = defaults();
  for (auto id : kAllTemplates) {
    auto file = dir / (std::string(to_string(id)) + ".txt");
    if (!std::filesystem::exists(file)) continue;
    std::ifstream in(file, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    lib.set(PromptTemplate(id, ss.str()));
  }
  return lib;
}

const PromptTemplate& PromptLibrary::get(TemplateId id) const { return templates_.at(id); }

void PromptLibrary::set(PromptTemplate t) { templates_.insert_or_assign(t.id(), std::move(t)); }

void LlmRequest::validate() const {
  if (!(temperature >= 0.0)) throw std::invalid_argument("temperature must be >= 0");
  if (!(top_p > 0.0 && top_p <= 1.0)) throw std::invalid_argument("top_p must be in (0, 1]");
}

std::string LlmRequest::digest() const {
  nlohmann::json key = nlohmann::json::array({model, temperature, top_p, rendered_prompt});
  return sha256_hex(key.dump());
}

// ---------------------------------------------------------------------------
// Transcript cache

namespace {

nlohmann::json entry_to_json(const CacheEntry& e) {
  return {{"digest", e.digest},         {"model", e.model},
          {"temperature", e.temperature}, {"top_p", e.top_p},
          {"prompt", e.prompt},         {"completion", e.completion},
          {"input_tokens", e.input_tokens}, {"output_tokens", e.output_tokens}};
}

CacheEntry entry_from_json(const nlohmann::json& j) {
  CacheEntry e;
  e.digest = j.at("digest").get<std::string>();
  e.model = j.at("model").get<std::string>();
  e.temperature = j.at("temperature").get<double>();
  e.top_p = j.at("top_p").get<double>();
  e.prompt = j.at("prompt").get<std::string>();
  e.completion = j.at("completion").get<std::string>();
  e.input_tokens = j.value("input_tokens", std::int64_t{0});
  e.output_tokens = j.value("output_tokens", std::int64_t{0});
  return e;
}

}  // namespace

TranscriptCache::TranscriptCache(std::filesystem::path file) : file_(std::move(file)) {
  if (!std::filesystem::exists(*file_)) return;
  std::ifstream in(*file_);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto e = entry_from_json(nlohmann::json::parse(line));
      entries_.try_emplace(e.digest, std::move(e));
    } catch (const nlohmann::json::exception& ex) {
      throw ParseError(file_->string() + ":" + std::to_string(lineno) + ": " + ex.what());
    }
  }
}

std::optional<CacheEntry> TranscriptCache::lookup(const std::string& digest) const {
  std::shared_lock lock(mutex_);
  auto it = entries_.find(digest);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void TranscriptCache::insert(const CacheEntry& entry) {
  std::unique_lock lock(mutex_);
  if (!entries_.try_emplace(entry.digest, entry).second) return;
  if (file_) {
    if (file_->has_parent_path()) std::filesystem::create_directories(file_->parent_path());
    std::ofstream out(*file_, std::ios::app);
    out << entry_to_json(entry).dump() << '\n';
    if (!out) throw Error("cannot append to transcript cache " + file_->string());
  }
}

std::size_t TranscriptCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

ProviderReply FailingProvider::send(const LlmRequest&) {
  ++contacts_;
  throw ProviderError("provider contacted while offline");
}

std::string_view to_string(LlmMode m) {
  switch (m) {
    case LlmMode::Live: return "live";
    case LlmMode::Record: return "record";
    case LlmMode::Replay: return "replay";
  }
  return "replay";
}

LlmMode llm_mode_from_string(std::string_view s) {
  if (s == "live") return LlmMode::Live;
  if (s == "record") return LlmMode::Record;
  if (s == "replay") return LlmMode::Replay;
  throw ConfigError("llm.mode", "expected live, record or replay, got '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// Gateway

LlmGateway::LlmGateway(GatewayOptions options, std::shared_ptr<TranscriptCache> cache,
                       std::shared_ptr<Provider> provider, PromptLibrary prompts)
    : options_(std::move(options)),
      cache_(cache ? std::move(cache) : std::make_shared<TranscriptCache>()),
      provider_(std::move(provider)),
      prompts_(std::move(prompts)),
      in_flight_(std::max(1, options_.max_concurrency)),
      sleep_([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }) {
  if (options_.max_concurrency < 1) throw ConfigError("llm.max_concurrency", "must be at least 1");
  if (options_.retry.max_attempts < 1) throw ConfigError("llm.retry", "max_attempts must be at least 1");
}

LlmRequest LlmGateway::make_request(TemplateId id, std::string prompt) const {
  LlmRequest req;
  req.template_id = id;
  req.rendered_prompt = std::move(prompt);
  req.model = options_.model;
  req.temperature = options_.temperature;
  req.top_p = options_.top_p;
  return req;
}

LlmResponse LlmGateway::ask(TemplateId id, const Bindings& bindings) {
  return complete(make_request(id, prompts_.render(id, bindings)));
}

ProviderReply LlmGateway::send_with_retry(const LlmRequest& request) {
  if (!provider_) throw ProviderError("no provider configured");
  auto backoff = options_.retry.initial_backoff;
  for (int attempt = 1;; ++attempt) {
    try {
      in_flight_.acquire();
      struct Release {
        std::counting_semaphore<>& s;
        ~Release() { s.release(); }
      } release{in_flight_};
      return provider_->send(request);
    } catch (const TransientProviderError& e) {
      if (attempt >= options_.retry.max_attempts) {
        throw ProviderError("provider failed after " + std::to_string(attempt) + " attempts: " + e.what());
      }
    }
    sleep_(backoff);
    backoff = std::chrono::milliseconds(static_cast<std::int64_t>(std::llround(backoff.count() * options_.retry.multiplier)));
  }
}

void LlmGateway::account(const LlmRequest& request, const LlmResponse& response, bool provider) {
  std::lock_guard lock(stats_mutex_);
  ++stats_.calls;
  if (provider) ++stats_.provider_calls;
  if (response.cached) ++stats_.cache_hits;
  stats_.input_tokens += response.input_tokens;
  stats_.output_tokens += response.output_tokens;
  ++stats_.calls_by_template[std::string(to_string(request.template_id))];
}

LlmResponse LlmGateway::complete(const LlmRequest& request) {
  request.validate();
  const std::string digest = request.digest();

  if (options_.mode != LlmMode::Live) {
    if (auto hit = cache_->lookup(digest)) {
      LlmResponse r{hit->completion, hit->input_tokens, hit->output_tokens, true};
      account(request, r, false);
      return r;
    }
    if (options_.mode == LlmMode::Replay) throw CacheMiss(digest);
  }

  ProviderReply reply = send_with_retry(request);
  if (reply.input_tokens < 0 || reply.output_tokens < 0) throw ProviderError("provider reported negative token counts");
  LlmResponse r{reply.text, reply.input_tokens, reply.output_tokens, false};
  if (options_.mode == LlmMode::Record) {
    cache_->insert({digest, request.model, request.temperature, request.top_p, request.rendered_prompt, reply.text,
                    reply.input_tokens, reply.output_tokens});
  }
  account(request, r, true);
  return r;
}

GatewayStats LlmGateway::stats() const {
  std::lock_guard lock(stats_mutex_);
  return stats_;
}

// ---------------------------------------------------------------------------
// Structured answers

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// Removes list bullets, numbering and markdown emphasis from a line.
std::string strip_decoration(std::string_view raw) {
  std::string s = trim(raw);
  for (;;) {
    if (s.empty()) return s;
    if (s[0] == '-' || s[0] == '*' || s[0] == '#' || s[0] == '>') {
      s = trim(std::string_view(s).substr(1));
      continue;
    }
    if (s.rfind("\xE2\x80\xA2", 0) == 0) {  // bullet
      s = trim(std::string_view(s).substr(3));
      continue;
    }
    std::size_t d = 0;
    while (d < s.size() && std::isdigit(static_cast<unsigned char>(s[d]))) ++d;
    if (d > 0 && d < s.size() && (s[d] == '.' || s[d] == ')')) {
      s = trim(std::string_view(s).substr(d + 1));
      continue;
    }
    break;
  }
  std::erase(s, '*');
  return trim(s);
}

std::string strip_quotes(std::string s) {
  s = trim(s);
  while (s.size() >= 2 && (s.front() == '"' || s.front() == '\'' || s.front() == '`') && s.back() == s.front())
    s = trim(std::string_view(s).substr(1, s.size() - 2));
  if (!s.empty() && s.back() == '.') s.pop_back();
  return trim(s);
}

// Yes/no as a whole leading word.
std::optional<bool> leading_verdict(std::string_view s) {
  auto word = [&](std::string_view w) {
    return s.size() >= w.size() && s.substr(0, w.size()) == w &&
           (s.size() == w.size() || !std::isalnum(static_cast<unsigned char>(s[w.size()])));
  };
  if (word("yes")) return true;
  if (word("no")) return false;
  return std::nullopt;
}

std::optional<std::string> field_after(const std::string& line, const std::string& low, std::string_view label) {
  if (low.rfind(label, 0) != 0) return std::nullopt;
  return strip_quotes(line.substr(label.size()));
}

bool is_placeholder_value(const std::string& v) {
  auto l = lower(v);
  return l.empty() || l == "n/a" || l == "none" || l == "null" || l == "-";
}

}  // namespace

ParsedAnswer parse_structured_answer(std::string_view text, AnswerSchema expected) {
  StructuredAnswer ans;
  std::optional<bool> verdict;
  std::string* open_field = nullptr;

  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    std::string line = strip_decoration(raw);
    if (line.empty()) {
      open_field = nullptr;
      continue;
    }
    std::string low = lower(line);

    static const std::string_view kVerdictLabels[] = {"answer:", "verdict:", "confirmation:", "result:"};
    std::string_view rest = low;
    for (auto label : kVerdictLabels) {
      if (low.rfind(label, 0) == 0) {
        rest = std::string_view(low).substr(label.size());
        while (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
        break;
      }
    }
    if (!verdict) {
      if (auto v = leading_verdict(rest)) {
        verdict = v;
        open_field = nullptr;
        continue;
      }
    }

    if (auto v = field_after(line, low, "corresponding property:")) {
      ans.property = *v;
      open_field = nullptr;
    } else if (auto v2 = field_after(line, low, "property:")) {
      if (!ans.property) ans.property = *v2;
      open_field = nullptr;
    } else if (auto v3 = field_after(line, low, "explanation:")) {
      ans.explanation = *v3;
      open_field = &*ans.explanation;
    } else if (auto v4 = field_after(line, low, "constraint:")) {
      ans.constraint = *v4;
      open_field = &*ans.constraint;
    } else if (open_field) {
      // Continuation of a multi-line field.
      *open_field += " " + line;
    }
  }

  if (!verdict) return ParseFailure{"no yes/no verdict found"};
  ans.verdict = *verdict;
  if (ans.property && is_placeholder_value(*ans.property)) ans.property.reset();
  if (ans.explanation && ans.explanation->empty()) ans.explanation.reset();
  if (ans.constraint && is_placeholder_value(*ans.constraint)) ans.constraint.reset();
  if (!ans.verdict) {
    ans.property.reset();
    ans.constraint.reset();
  }
  if (expected == AnswerSchema::Mapping && ans.verdict && !ans.property)
    return ParseFailure{"mapping answer says yes but names no property"};
  return ans;
}

}  // namespace specguard
