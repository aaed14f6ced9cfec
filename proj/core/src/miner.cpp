#include "specguard/miner.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <fstream>
#include <regex>
#include <set>
#include <thread>

#include "specguard/digest.hpp"
#include "specguard/errors.hpp"

namespace specguard {

std::string_view to_string(ConstraintSource s) { return s == ConstraintSource::ReqResp ? "ReqResp" : "RespProp"; }

std::string_view to_string(ObservationKind k) {
  switch (k) {
    case ObservationKind::Parameter: return "parameter";
    case ObservationKind::Operation: return "operation";
    case ObservationKind::Schema: return "schema";
    case ObservationKind::Property: return "property";
  }
  return "property";
}

std::string_view to_string(MiningMode m) { return m == MiningMode::Merged ? "merged" : "oc"; }

MiningMode mining_mode_from_string(std::string_view s) {
  if (s == "oc") return MiningMode::ObservationConfirmation;
  if (s == "merged") return MiningMode::Merged;
  throw ConfigError("mining.mode", "expected oc or merged, got '" + std::string(s) + "'");
}

std::string Variable::render() const { return (scope == VariableScope::Request ? "input." : "return.") + name; }

std::vector<const Variable*> Constraint::request_variables() const {
  std::vector<const Variable*> out;
  for (const auto& v : variables)
    if (v.scope == VariableScope::Request) out.push_back(&v);
  return out;
}

std::vector<const Variable*> Constraint::response_variables() const {
  std::vector<const Variable*> out;
  for (const auto& v : variables)
    if (v.scope == VariableScope::Response) out.push_back(&v);
  return out;
}

// ---------------------------------------------------------------------------
// Categorization

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool has(const std::string& text, const char* pattern) {
  return std::regex_search(text, std::regex(pattern, std::regex::ECMAScript | std::regex::icase));
}

enum Cue { Set, Unix, Range, DateTime, Date, Time, Url, ArrayString, ArraySize, Length, Template, Boolean, Number, kCues };

std::array<bool, kCues> cues(const std::string& t) {
  std::array<bool, kCues> c{};
  c[Set] = has(t, R"(\bone of\b|\benum\b|allowed values|possible values|valid values|\beither\b)");
  c[Unix] = has(t, R"(\bunix\b|\bepoch\b)");
  c[Range] = has(t, R"(\bbetween\b|\brange\b|\bpositive\b|\bnegative\b|non-negative|at least|at most|\bup to\b|greater than|less than|\bminimum\b|\bmaximum\b|\bexceed)");
  c[DateTime] = has(t, R"(date-?time|date and time|iso ?8601|rfc ?3339|timestamp)");
  c[Date] = has(t, R"(\bdate\b|yyyy-mm-dd)");
  c[Time] = has(t, R"(\btime\b|hh:mm)");
  c[Url] = has(t, R"(\burl\b|\buri\b|\blink\b|\bhref\b|https?://)");
  c[ArrayString] = has(t, R"((array|list) of (strings?|text))");
  c[ArraySize] = has(t, R"((array|list)\b.*\b(size|items|elements|entries)\b|number of (items|elements|entries))");
  c[Length] = has(t, R"(\blength\b|\bcharacters?\b|\b(one|two|three|four|five|six|seven|eight|nine|ten|\d+)[ -](letters?|characters?|chars?)\b)");
  c[Template] = has(t, R"(\blowercase\b|\buppercase\b|\bpattern\b|\bformat\b|\bprefix\b|starts? with|\bregex\b|\bprefixed\b)");
  c[Boolean] = has(t, R"(\bboolean\b|\bwhether\b|true or false)");
  c[Number] = has(t, R"(\bnumber\b|\bnumeric\b|\binteger\b|\bdecimal\b)");
  return c;
}

}  // namespace

Category categorize_text(ConstraintSource source, std::string_view description, std::size_t response_variables,
                         std::size_t total_variables) {
  std::string t = lower(description);
  if (t.find_first_not_of(" \t\r\n") == std::string::npos) return Category::Uncategorized;
  if (source == ConstraintSource::ReqResp) return total_variables > 2 ? Category::Composite : Category::InputOutput;
  if (response_variables > 1) return Category::NaryAtomic;

  auto c = cues(t);
  // Several independent rules joined by "and" form a composite oracle.
  int strong = 0;
  for (Cue k : {Set, Unix, Range, DateTime, Date, Url, ArraySize, Length, Template}) strong += c[k] ? 1 : 0;
  if (c[DateTime] && c[Date]) --strong;
  std::string without_between = std::regex_replace(t, std::regex(R"(between\s+\S+\s+and)"), "between");
  if (strong >= 2 && without_between.find(" and ") != std::string::npos) return Category::Composite;

  if (c[Set]) return Category::ValueInSet;
  if (c[Unix]) return Category::IsUnixTime;
  if (c[Range]) return Category::ValueInRange;
  if (c[DateTime]) return Category::IsDateTime;
  if (c[Date]) return Category::IsDate;
  if (c[Url]) return Category::IsUrl;
  if (c[ArrayString]) return Category::ArrayOfString;
  if (c[ArraySize]) return Category::ArraySpecificSizes;
  if (c[Template]) return Category::TemplateLiterals;
  if (c[Length]) return Category::StringSpecificLength;
  if (c[Time]) return Category::IsTime;
  if (c[Boolean]) return Category::IsBoolean;
  if (c[Number]) return Category::IsNumber;
  return Category::Uncategorized;
}

Category categorize(const Constraint& c) {
  return categorize_text(c.source, c.description, c.response_variables().size(), c.variables.size());
}

std::string normalize_description(std::string_view text) {
  std::string out;
  bool space = false;
  for (unsigned char ch : text) {
    if (std::isspace(ch)) {
      space = !out.empty();
      continue;
    }
    if (space) out.push_back(' ');
    space = false;
    out.push_back(static_cast<char>(std::tolower(ch)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Knowledge base

namespace {

nlohmann::json step_to_json(const ProvenanceStep& s) {
  return {{"template", std::string(to_string(s.template_id))}, {"digest", s.digest}, {"answer", s.answer}};
}

ProvenanceStep step_from_json(const nlohmann::json& j) {
  return {template_from_string(j.at("template").get<std::string>()), j.at("digest").get<std::string>(),
          j.value("answer", "")};
}

ObservationKind observation_kind_from(const std::string& s) {
  if (s == "parameter") return ObservationKind::Parameter;
  if (s == "operation") return ObservationKind::Operation;
  if (s == "schema") return ObservationKind::Schema;
  return ObservationKind::Property;
}

nlohmann::json observation_to_json(const Observation& o) {
  return {{"subject", o.subject}, {"kind", std::string(to_string(o.kind))}, {"text", o.text}};
}

Observation observation_from_json(const nlohmann::json& j) {
  return {j.at("subject").get<std::string>(), observation_kind_from(j.at("kind").get<std::string>()),
          j.at("text").get<std::string>()};
}

nlohmann::json entry_to_json(const KnowledgeEntry& e) {
  nlohmann::json j;
  j["confirmed"] = e.confirmed;
  if (e.description) j["description"] = *e.description;
  j["observations"] = nlohmann::json::array();
  for (const auto& o : e.observations) j["observations"].push_back(observation_to_json(o));
  j["provenance"] = nlohmann::json::array();
  for (const auto& s : e.provenance) j["provenance"].push_back(step_to_json(s));
  return j;
}

KnowledgeEntry entry_from_json(const nlohmann::json& j) {
  KnowledgeEntry e;
  e.confirmed = j.at("confirmed").get<bool>();
  if (j.contains("description")) e.description = j["description"].get<std::string>();
  for (const auto& o : j.value("observations", nlohmann::json::array())) e.observations.push_back(observation_from_json(o));
  for (const auto& s : j.value("provenance", nlohmann::json::array())) e.provenance.push_back(step_from_json(s));
  return e;
}

}  // namespace

KnowledgeBase::KnowledgeBase(std::filesystem::path file) : file_(std::move(file)) {
  if (!std::filesystem::exists(*file_)) return;
  std::ifstream in(*file_);
  try {
    auto j = nlohmann::json::parse(in);
    for (const auto& [k, v] : j.at("entries").items()) entries_.emplace(k, entry_from_json(v));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("knowledge base " + file_->string() + ": " + e.what());
  }
}

std::string KnowledgeBase::key(std::string_view name, std::string_view composed_description) {
  return sha256_hex(nlohmann::json::array({std::string(name), std::string(composed_description)}).dump());
}

std::optional<KnowledgeEntry> KnowledgeBase::find(const std::string& key) const {
  std::lock_guard lock(mutex_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

bool KnowledgeBase::insert(const std::string& key, KnowledgeEntry entry) {
  std::lock_guard lock(mutex_);
  return entries_.emplace(key, std::move(entry)).second;
}

KnowledgeEntry KnowledgeBase::get_or_compute(const std::string& key, const std::function<KnowledgeEntry()>& compute,
                                             bool* computed) {
  if (computed) *computed = false;
  std::promise<KnowledgeEntry> promise;
  {
    std::unique_lock lock(mutex_);
    if (auto it = entries_.find(key); it != entries_.end()) return it->second;
    if (auto it = in_flight_.find(key); it != in_flight_.end()) {
      auto future = it->second;
      lock.unlock();
      return future.get();
    }
    in_flight_.emplace(key, promise.get_future().share());
  }
  try {
    KnowledgeEntry entry = compute();
    {
      std::lock_guard lock(mutex_);
      entries_.emplace(key, entry);
      in_flight_.erase(key);
    }
    promise.set_value(entry);
    if (computed) *computed = true;
    return entry;
  } catch (...) {
    {
      std::lock_guard lock(mutex_);
      in_flight_.erase(key);
    }
    promise.set_exception(std::current_exception());
    throw;
  }
}

std::size_t KnowledgeBase::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

void KnowledgeBase::save() const {
  if (file_) save(*file_);
}

void KnowledgeBase::save(const std::filesystem::path& file) const {
  nlohmann::json j;
  {
    std::lock_guard lock(mutex_);
    j["entries"] = nlohmann::json::object();
    for (const auto& [k, e] : entries_) j["entries"][k] = entry_to_json(e);
  }
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file);
  out << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Helpers

std::string compose_property_description(const PropertySpec& prop, const std::optional<std::string>& description) {
  if (!description || description->empty()) return {};
  std::string out = "description: " + *description;
  if (prop.declared_type != PrimitiveType::Unknown) out += "\ntype: " + std::string(to_string(prop.declared_type));
  if (prop.format_hint) out += "\nformat: " + *prop.format_hint;
  if (prop.example) out += "\nexample: " + prop.example->render();
  return out;
}

namespace {

std::string slug(std::string_view s) {
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c)) {
      out.push_back(static_cast<char>(std::tolower(c)));
    } else if (!out.empty() && out.back() != '-') {
      out.push_back('-');
    }
  }
  while (!out.empty() && out.back() == '-') out.pop_back();
  return out.empty() ? "root" : out;
}

std::string variables_key(const std::vector<Variable>& vars) {
  std::string k;
  for (const auto& v : vars) k += v.render() + "\x1f";
  return k;
}

}  // namespace

std::string make_constraint_id(const Constraint& c) {
  std::string vars;
  for (const auto& v : c.variables) vars += (vars.empty() ? "" : "+") + v.name;
  std::string h = sha256_hex(variables_key(c.variables) + "\x1e" + normalize_description(c.description)).substr(0, 8);
  return slug(c.operation.method) + "_" + slug(c.operation.path) + "_" +
         (c.source == ConstraintSource::ReqResp ? "rr" : "rp") + "_" + slug(vars) + "_" + h;
}

std::vector<Constraint> finalize_constraints(std::vector<Constraint> constraints) {
  std::vector<Constraint> out;
  std::set<std::tuple<std::string, std::string, std::string, std::string>> seen;
  for (auto& c : constraints) {
    std::sort(c.variables.begin(), c.variables.end());
    auto key = std::make_tuple(c.operation.render(), variables_key(c.variables), normalize_description(c.description),
                               std::string(to_string(c.source)));
    if (!seen.insert(key).second) continue;
    if (c.id.empty()) c.id = make_constraint_id(c);
    out.push_back(std::move(c));
  }
  std::stable_sort(out.begin(), out.end(), [](const Constraint& a, const Constraint& b) {
    return std::tie(a.operation.path, a.operation.method, a.variables, a.description) <
           std::tie(b.operation.path, b.operation.method, b.variables, b.description);
  });
  return out;
}

// ---------------------------------------------------------------------------
// Miner

ConstraintMiner::ConstraintMiner(const ApiSpec& spec, LlmGateway& gateway, KnowledgeBase& kb, MinerOptions options)
    : spec_(spec), gateway_(gateway), kb_(kb), options_(options) {}

MiningStats ConstraintMiner::stats() const {
  std::lock_guard lock(stats_mutex_);
  return stats_;
}

ConstraintMiner::Asked ConstraintMiner::ask(TemplateId id, const Bindings& bindings) {
  LlmRequest req = gateway_.make_request(id, gateway_.prompts().render(id, bindings));
  LlmResponse resp = gateway_.complete(req);
  return {resp, {id, req.digest(), resp.text}};
}

namespace {

std::string trimmed(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

const PropertySpec* resolve_property(const OperationSpec& op, const std::string& status, const std::string& name) {
  auto leaves = op.responses.find(status);
  if (leaves == op.responses.end()) return nullptr;
  std::string n = name;
  if (n.rfind("return.", 0) == 0) n = n.substr(7);
  for (const auto& p : leaves->second)
    if (!p.truncated && p.path.render() == n) return &p;
  for (const auto& p : leaves->second)
    if (!p.truncated && p.path.leaf_name() == n) return &p;
  return nullptr;
}

}  // namespace

std::vector<Constraint> ConstraintMiner::mine_request_response(const OperationSpec& op) {
  std::vector<Constraint> out;
  const std::string status = op.success_status();
  if (status.empty()) return out;
  const auto& leaves = flatten_response_schema(op, status);
  if (leaves.empty()) return out;

  auto schema_name_it = op.response_schema_names.find(status);
  const std::string schema_name = schema_name_it != op.response_schema_names.end() ? schema_name_it->second : "response";
  const std::string listing = render_schema_listing(leaves);
  const std::string op_description = op.description.value_or("N/A");
  const bool merged = options_.mode == MiningMode::Merged;

  // Operation-level observations are only requested once a parameter survives
  // the description filter.
  std::optional<Asked> schema_obs, op_obs;
  auto ensure_observations = [&] {
    if (merged || schema_obs) return;
    schema_obs = ask(TemplateId::SchemaObservation, {{"schema", schema_name}, {"schema_specification", listing}});
    op_obs = ask(TemplateId::OperationObservation,
                 {{"method", op.id.method}, {"endpoint", op.id.path}, {"operation_description", op_description}});
  };

  for (const ParamSpec* param : op.all_inputs()) {
    {
      std::lock_guard lock(stats_mutex_);
      ++stats_.parameters_seen;
    }
    std::optional<std::string> desc = param->description;
    if (!desc || trimmed(*desc).empty()) desc = find_exact_match_description(spec_, param->name, &op);
    if (!desc || trimmed(*desc).empty()) {
      std::lock_guard lock(stats_mutex_);
      ++stats_.parameters_skipped;
      continue;
    }
    ensure_observations();

    Constraint c;
    c.source = ConstraintSource::ReqResp;
    c.operation = op.id;
    c.status = status;
    c.description = *desc;

    std::string param_observation = *desc;
    if (!merged) {
      Asked po = ask(TemplateId::ParameterObservation,
                     {{"method", op.id.method}, {"endpoint", op.id.path}, {"parameter", param->name}, {"description", *desc}});
      param_observation = trimmed(po.response.text);
      if (param_observation.empty()) {
        std::lock_guard lock(stats_mutex_);
        ++stats_.parse_failures;
        continue;
      }
      c.observations.push_back({schema_name, ObservationKind::Schema, trimmed(schema_obs->response.text)});
      c.observations.push_back({op.id.render(), ObservationKind::Operation, trimmed(op_obs->response.text)});
      c.observations.push_back({param->name, ObservationKind::Parameter, param_observation});
      c.provenance.push_back(schema_obs->step);
      c.provenance.push_back(op_obs->step);
      c.provenance.push_back(po.step);
    }

    Asked mapping = ask(TemplateId::Mapping, {{"method", op.id.method},
                                              {"endpoint", op.id.path},
                                              {"parameter", param->name},
                                              {"description", *desc},
                                              {"parameter_observation", param_observation},
                                              {"operation_observation", merged ? op_description : trimmed(op_obs->response.text)},
                                              {"schema", schema_name},
                                              {"schema_observation", merged ? listing : trimmed(schema_obs->response.text)}});
    c.provenance.push_back(mapping.step);
    auto parsed = parse_structured_answer(mapping.response.text, AnswerSchema::Mapping);
    if (std::holds_alternative<ParseFailure>(parsed)) {
      std::lock_guard lock(stats_mutex_);
      ++stats_.parse_failures;
      continue;
    }
    const auto& answer = std::get<StructuredAnswer>(parsed);
    if (!answer.verdict) {
      std::lock_guard lock(stats_mutex_);
      ++stats_.mappings_rejected;
      continue;
    }
    const PropertySpec* prop = resolve_property(op, status, *answer.property);
    if (!prop) {
      std::lock_guard lock(stats_mutex_);
      ++stats_.unresolved_properties;
      continue;
    }
    c.rationale = answer.explanation;

    if (!merged) {
      Asked confirm = ask(TemplateId::MappingConfirmation, {{"method", op.id.method},
                                                            {"endpoint", op.id.path},
                                                            {"parameter_name", param->name},
                                                            {"description", *desc},
                                                            {"schema", schema_name},
                                                            {"corresponding_property", prop->path.render()},
                                                            {"explanation", answer.explanation.value_or("N/A")}});
      c.provenance.push_back(confirm.step);
      auto confirmed = parse_structured_answer(confirm.response.text, AnswerSchema::Confirmation);
      if (std::holds_alternative<ParseFailure>(confirmed)) {
        std::lock_guard lock(stats_mutex_);
        ++stats_.parse_failures;
        continue;
      }
      if (!std::get<StructuredAnswer>(confirmed).verdict) {
        std::lock_guard lock(stats_mutex_);
        ++stats_.confirmations_rejected;
        continue;
      }
    }

    c.variables = {Variable::request(param->name), Variable::response(prop->path.render())};
    std::sort(c.variables.begin(), c.variables.end());
    c.category = categorize(c);
    c.id = make_constraint_id(c);
    out.push_back(std::move(c));
  }
  return out;
}

KnowledgeEntry ConstraintMiner::decide_property(const PropertySpec& prop, const std::string& composed) {
  KnowledgeEntry entry;
  const std::string name = prop.path.render();
  const std::string datatype(to_string(prop.declared_type));

  if (options_.mode == MiningMode::Merged) {
    Asked m = ask(TemplateId::MergedObservationConfirmation,
                  {{"property", name}, {"datatype", datatype}, {"description", composed}});
    entry.provenance.push_back(m.step);
    auto parsed = parse_structured_answer(m.response.text, AnswerSchema::Confirmation);
    if (auto* a = std::get_if<StructuredAnswer>(&parsed); a && a->verdict) {
      entry.confirmed = true;
      entry.description = a->constraint ? a->constraint : prop.description;
    } else if (std::holds_alternative<ParseFailure>(parsed)) {
      std::lock_guard lock(stats_mutex_);
      ++stats_.parse_failures;
    }
    return entry;
  }

  Asked obs = ask(TemplateId::PropertyObservation, {{"property", name}, {"datatype", datatype}, {"description", composed}});
  entry.provenance.push_back(obs.step);
  std::string observation = trimmed(obs.response.text);
  if (observation.empty()) {
    std::lock_guard lock(stats_mutex_);
    ++stats_.parse_failures;
    return entry;
  }
  entry.observations.push_back({name, ObservationKind::Property, observation});

  Asked conf = ask(TemplateId::ConstraintConfirmation, {{"property", name},
                                                        {"datatype", datatype},
                                                        {"description", composed},
                                                        {"property_observation", observation}});
  entry.provenance.push_back(conf.step);
  auto parsed = parse_structured_answer(conf.response.text, AnswerSchema::Confirmation);
  if (auto* a = std::get_if<StructuredAnswer>(&parsed)) {
    entry.confirmed = a->verdict;
    if (a->verdict) entry.description = a->constraint ? *a->constraint : observation;
  } else {
    std::lock_guard lock(stats_mutex_);
    ++stats_.parse_failures;
  }
  return entry;
}

std::vector<Constraint> ConstraintMiner::mine_response_properties(const OperationSpec& op, const std::string& status) {
  std::vector<Constraint> out;
  const auto& leaves = flatten_response_schema(op, status);
  for (const auto& prop : leaves) {
    {
      std::lock_guard lock(stats_mutex_);
      ++stats_.properties_seen;
    }
    if (prop.truncated) {
      std::lock_guard lock(stats_mutex_);
      ++stats_.properties_skipped;
      continue;
    }
    std::optional<std::string> desc = prop.description;
    if (!desc || trimmed(*desc).empty()) desc = find_exact_match_description(spec_, prop.path.leaf_name(), &op);
    std::string composed = compose_property_description(prop, desc);
    if (composed.empty()) {
      std::lock_guard lock(stats_mutex_);
      ++stats_.properties_skipped;
      continue;
    }

    bool computed = false;
    KnowledgeEntry entry = kb_.get_or_compute(KnowledgeBase::key(prop.path.leaf_name(), composed),
                                              [&] { return decide_property(prop, composed); }, &computed);
    if (!computed) {
      std::lock_guard lock(stats_mutex_);
      ++stats_.kb_hits;
    }
    if (!entry.confirmed) continue;

    Constraint c;
    c.source = ConstraintSource::RespProp;
    c.operation = op.id;
    c.status = status;
    c.variables = {Variable::response(prop.path.render())};
    c.description = entry.description.value_or(*desc);
    c.observations = entry.observations;
    c.provenance = entry.provenance;
    c.category = categorize(c);
    c.id = make_constraint_id(c);
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<Constraint> ConstraintMiner::mine_all() {
  const auto& ops = spec_.operations;
  std::vector<std::vector<Constraint>> per_op(ops.size());
  std::vector<std::exception_ptr> errors(ops.size());

  auto work = [&](std::size_t i) {
    try {
      const auto& op = ops[i];
      auto rr = mine_request_response(op);
      std::string status = op.success_status();
      if (!status.empty()) {
        auto rp = mine_response_properties(op, status);
        rr.insert(rr.end(), std::make_move_iterator(rp.begin()), std::make_move_iterator(rp.end()));
      }
      per_op[i] = std::move(rr);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };

  int workers = std::max(1, options_.concurrency);
  if (workers == 1 || ops.size() <= 1) {
    for (std::size_t i = 0; i < ops.size(); ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < ops.size(); i = next++) work(i);
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<Constraint> all;
  for (auto& v : per_op) all.insert(all.end(), std::make_move_iterator(v.begin()), std::make_move_iterator(v.end()));
  return finalize_constraints(std::move(all));
}

// ---------------------------------------------------------------------------
// Serialization

nlohmann::json constraint_to_json(const Constraint& c) {
  nlohmann::json j;
  j["id"] = c.id;
  j["source"] = std::string(to_string(c.source));
  j["operation"] = {{"method", c.operation.method}, {"path", c.operation.path}};
  j["variables"] = nlohmann::json::array();
  for (const auto& v : c.variables) j["variables"].push_back(v.render());
  j["description"] = c.description;
  j["category"] = std::string(to_string(c.category));
  j["status"] = c.status;
  if (c.rationale) j["rationale"] = *c.rationale;
  j["observations"] = nlohmann::json::array();
  for (const auto& o : c.observations) j["observations"].push_back(observation_to_json(o));
  j["provenance"] = nlohmann::json::array();
  for (const auto& s : c.provenance) j["provenance"].push_back(step_to_json(s));
  return j;
}

Constraint constraint_from_json(const nlohmann::json& j) {
  Constraint c;
  c.id = j.at("id").get<std::string>();
  auto src = j.at("source").get<std::string>();
  if (src == "ReqResp") c.source = ConstraintSource::ReqResp;
  else if (src == "RespProp") c.source = ConstraintSource::RespProp;
  else throw ParseError("unknown constraint source '" + src + "'");
  c.operation = {j.at("operation").at("method").get<std::string>(), j.at("operation").at("path").get<std::string>()};
  for (const auto& v : j.at("variables")) {
    auto s = v.get<std::string>();
    if (s.rfind("input.", 0) == 0) c.variables.push_back(Variable::request(s.substr(6)));
    else if (s.rfind("return.", 0) == 0) c.variables.push_back(Variable::response(s.substr(7)));
    else throw ParseError("variable without scope prefix: " + s);
  }
  if (c.variables.empty()) throw ParseError("constraint " + c.id + " has no variables");
  c.description = j.at("description").get<std::string>();
  auto cat = category_from_string(j.at("category").get<std::string>());
  if (!cat) throw ParseError("unknown category in constraint " + c.id);
  c.category = *cat;
  c.status = j.value("status", "");
  if (j.contains("rationale")) c.rationale = j["rationale"].get<std::string>();
  for (const auto& o : j.value("observations", nlohmann::json::array())) c.observations.push_back(observation_from_json(o));
  for (const auto& s : j.value("provenance", nlohmann::json::array())) c.provenance.push_back(step_from_json(s));
  return c;
}

nlohmann::json constraints_to_json(const std::vector<Constraint>& cs) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : cs) arr.push_back(constraint_to_json(c));
  return {{"constraints", std::move(arr)}};
}

std::vector<Constraint> constraints_from_json(const nlohmann::json& j) {
  std::vector<Constraint> out;
  const auto& arr = j.is_array() ? j : j.at("constraints");
  for (const auto& c : arr) out.push_back(constraint_from_json(c));
  return out;
}

}  // namespace specguard
