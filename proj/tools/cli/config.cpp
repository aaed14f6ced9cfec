#include "config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include <specguard/errors.hpp>

namespace specguard::cli {

namespace {

void allow_keys(const YAML::Node& node, const std::string& where, const std::set<std::string>& keys) {
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (key == "api_key" || key == "apikey" || key == "token")
      throw ConfigError(where.empty() ? key : where + "." + key,
                        "secrets are read from SPECGUARD_API_KEY, never from the config file");
    if (!keys.count(key)) throw ConfigError(where.empty() ? key : where + "." + key, "unknown field");
  }
}

YAML::Node section(const YAML::Node& root, const std::string& name) {
  YAML::Node n = root[name];
  if (n && !n.IsNull() && !n.IsMap()) throw ConfigError(name, "expected a mapping");
  return n;
}

template <typename T>
T scalar(const YAML::Node& node, const std::string& field, T fallback) {
  if (!node || node.IsNull()) return fallback;
  if (!node.IsScalar()) throw ConfigError(field, "expected a scalar");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(field, "invalid value '" + node.Scalar() + "'");
  }
}

std::optional<std::filesystem::path> path_field(const YAML::Node& node, const std::string& field,
                                                const std::filesystem::path& base) {
  if (!node || node.IsNull()) return std::nullopt;
  auto text = scalar<std::string>(node, field, "");
  if (text.empty()) throw ConfigError(field, "empty path");
  std::filesystem::path p(text);
  return p.is_absolute() ? p : (base / p).lexically_normal();
}

}  // namespace

RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw ConfigError("<config>", std::string("malformed YAML: ") + e.what());
  }
  if (!root.IsMap()) throw ConfigError("<config>", "expected a mapping at the top level");
  allow_keys(root, "", {"spec", "llm", "mining", "synthesis", "harness", "eval", "output"});

  RunConfig c;
  auto spec = path_field(root["spec"], "spec", base_dir);
  if (!spec) throw ConfigError("spec", "required");
  c.spec = *spec;
  if (auto out = path_field(root["output"], "output", base_dir)) c.output = *out;
  else c.output = (base_dir / c.output).lexically_normal();

  if (auto llm = section(root, "llm")) {
    allow_keys(llm, "llm", {"model", "temperature", "top_p", "mode", "cache", "prompts", "max_concurrency",
                            "retry_attempts"});
    c.llm.model = scalar<std::string>(llm["model"], "llm.model", c.llm.model);
    c.llm.temperature = scalar<double>(llm["temperature"], "llm.temperature", c.llm.temperature);
    c.llm.top_p = scalar<double>(llm["top_p"], "llm.top_p", c.llm.top_p);
    if (llm["mode"]) {
      try {
        c.llm.mode = llm_mode_from_string(scalar<std::string>(llm["mode"], "llm.mode", ""));
      } catch (const std::exception&) {
        throw ConfigError("llm.mode", "expected live, record or replay");
      }
    }
    c.llm.cache = path_field(llm["cache"], "llm.cache", base_dir);
    c.llm.prompts = path_field(llm["prompts"], "llm.prompts", base_dir);
    c.llm.max_concurrency = scalar<int>(llm["max_concurrency"], "llm.max_concurrency", c.llm.max_concurrency);
    c.llm.retry_attempts = scalar<int>(llm["retry_attempts"], "llm.retry_attempts", c.llm.retry_attempts);
  }
  if (auto m = section(root, "mining")) {
    allow_keys(m, "mining", {"mode", "kb", "concurrency", "max_depth"});
    if (m["mode"]) {
      auto mode = scalar<std::string>(m["mode"], "mining.mode", "");
      try {
        c.mining.mode = mining_mode_from_string(mode);
      } catch (const std::exception&) {
        throw ConfigError("mining.mode", "expected oc or merged, got '" + mode + "'");
      }
    }
    c.mining.kb = path_field(m["kb"], "mining.kb", base_dir);
    c.mining.concurrency = scalar<int>(m["concurrency"], "mining.concurrency", c.mining.concurrency);
    c.mining.max_depth = scalar<int>(m["max_depth"], "mining.max_depth", c.mining.max_depth);
  }
  if (auto s = section(root, "synthesis")) {
    allow_keys(s, "synthesis", {"repair_attempts", "verify"});
    c.synthesis.repair_attempts = scalar<int>(s["repair_attempts"], "synthesis.repair_attempts", c.synthesis.repair_attempts);
    c.synthesis.verify = scalar<bool>(s["verify"], "synthesis.verify", c.synthesis.verify);
  }
  if (auto h = section(root, "harness")) {
    allow_keys(h, "harness", {"traces", "concurrency", "format"});
    c.harness.traces = path_field(h["traces"], "harness.traces", base_dir);
    c.harness.concurrency = scalar<int>(h["concurrency"], "harness.concurrency", c.harness.concurrency);
    c.harness.format = scalar<std::string>(h["format"], "harness.format", c.harness.format);
  }
  if (auto e = section(root, "eval")) {
    allow_keys(e, "eval", {"ground_truth", "judgments", "external_invariants", "table"});
    c.eval.ground_truth = path_field(e["ground_truth"], "eval.ground_truth", base_dir);
    c.eval.judgments = path_field(e["judgments"], "eval.judgments", base_dir);
    c.eval.external_invariants = path_field(e["external_invariants"], "eval.external_invariants", base_dir);
    c.eval.table = path_field(e["table"], "eval.table", base_dir);
  }
  c.validate();
  return c;
}

void RunConfig::validate() const {
  if (spec.empty()) throw ConfigError("spec", "required");
  if (llm.model.empty()) throw ConfigError("llm.model", "must not be empty");
  if (llm.temperature < 0) throw ConfigError("llm.temperature", "must be >= 0");
  if (!(llm.top_p > 0 && llm.top_p <= 1)) throw ConfigError("llm.top_p", "must be in (0, 1]");
  if (llm.mode == LlmMode::Replay && !llm.cache) throw ConfigError("llm.cache", "required in replay mode");
  if (llm.mode == LlmMode::Record && !llm.cache) throw ConfigError("llm.cache", "required in record mode");
  if (llm.max_concurrency < 1) throw ConfigError("llm.max_concurrency", "must be >= 1");
  if (llm.retry_attempts < 1) throw ConfigError("llm.retry_attempts", "must be >= 1");
  if (mining.concurrency < 1) throw ConfigError("mining.concurrency", "must be >= 1");
  if (mining.max_depth < 1) throw ConfigError("mining.max_depth", "must be >= 1");
  if (synthesis.repair_attempts < 0) throw ConfigError("synthesis.repair_attempts", "must be >= 0");
  if (harness.concurrency < 1) throw ConfigError("harness.concurrency", "must be >= 1");
  if (harness.format != "json" && harness.format != "text") throw ConfigError("harness.format", "expected json or text");
}

RunConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("--config", "cannot read " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  auto base = std::filesystem::absolute(file).parent_path();
  return parse_config(ss.str(), base);
}

}  // namespace specguard::cli
