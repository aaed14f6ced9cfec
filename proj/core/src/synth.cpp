#include "specguard/synth.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "specguard/errors.hpp"
#include "specguard/version.hpp"

namespace specguard {

std::string_view to_string(SynthesisStatus s) {
  switch (s) {
    case SynthesisStatus::Synthesized: return "Synthesized";
    case SynthesisStatus::ParseFailed: return "ParseFailed";
    case SynthesisStatus::RejectedByVerifier: return "Rejected-by-verifier";
  }
  return "ParseFailed";
}

OracleSynthesizer::OracleSynthesizer(const ApiSpec& spec, LlmGateway& gateway, SynthOptions options)
    : spec_(spec), gateway_(gateway), options_(options) {}

namespace {

const std::vector<PropertySpec>* schema_context(const ApiSpec& spec, const Constraint& c) {
  const OperationSpec* op = spec.find_operation(c.operation);
  if (!op) return nullptr;
  auto it = op->responses.find(c.status.empty() ? op->success_status() : c.status);
  return it == op->responses.end() ? nullptr : &it->second;
}

const PropertySpec* find_leaf(const std::vector<PropertySpec>* props, const std::string& rendered) {
  if (!props) return nullptr;
  for (const auto& p : *props)
    if (p.path.render() == rendered) return &p;
  return nullptr;
}

}  // namespace

Bindings OracleSynthesizer::testgen_bindings(const Constraint& c, const std::string& repair_note) const {
  const auto* props = schema_context(spec_, c);
  const OperationSpec* op = spec_.find_operation(c.operation);

  std::string parameter = "N/A";
  for (const auto* v : c.request_variables()) {
    std::string desc;
    if (op)
      for (const auto* p : op->all_inputs())
        if (p->name == v->name && p->description) desc = *p->description;
    if (desc.empty()) desc = c.description;
    parameter = (parameter == "N/A" ? "" : parameter + "\n") + v->name + ": " + desc;
  }

  std::string property, prop_description;
  for (const auto* v : c.response_variables()) {
    const PropertySpec* p = find_leaf(props, v->name);
    std::string d = p && p->description ? *p->description : "N/A";
    if (!property.empty()) {
      property += "\", \"";
      prop_description += "; ";
    }
    property += v->name;
    prop_description += v->name + ": " + d;
  }

  std::string constraint_description = c.description;
  if (c.rationale) constraint_description += "\nMapping explanation: " + *c.rationale;

  return {{"parameter", parameter},
          {"constraint_description", constraint_description},
          {"response_schema_specification", props ? render_schema_listing(*props) : std::string("N/A")},
          {"property", property},
          {"prop_description", prop_description},
          {"repair_note", repair_note}};
}

std::optional<std::string> extract_json_block(std::string_view text) {
  auto fence = text.find("```");
  while (fence != std::string_view::npos) {
    auto line_end = text.find('\n', fence);
    if (line_end == std::string_view::npos) break;
    auto close = text.find("```", line_end + 1);
    if (close == std::string_view::npos) break;
    std::string_view block = text.substr(line_end + 1, close - line_end - 1);
    if (block.find('{') != std::string_view::npos) return std::string(block);
    fence = text.find("```", close + 3);
  }
  auto open = text.find('{');
  if (open == std::string_view::npos) return std::nullopt;
  int depth = 0;
  bool in_string = false, escaped = false;
  for (std::size_t i = open; i < text.size(); ++i) {
    char ch = text[i];
    if (in_string) {
      if (escaped) escaped = false;
      else if (ch == '\\') escaped = true;
      else if (ch == '"') in_string = false;
      continue;
    }
    if (ch == '"') in_string = true;
    else if (ch == '{') ++depth;
    else if (ch == '}' && --depth == 0) return std::string(text.substr(open, i - open + 1));
  }
  return std::nullopt;
}

ValidatorProgram program_from_completion(std::string_view completion, const Constraint& c) {
  auto block = extract_json_block(completion);
  if (!block) throw IrSyntaxError("", "completion contains no JSON object");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(*block);
  } catch (const nlohmann::json::parse_error& e) {
    throw IrSyntaxError("", std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw IrSyntaxError("", "expected a JSON object");
  std::string where;
  const nlohmann::json* body = &j;
  if (!j.contains("node")) {
    if (!j.contains("body")) throw IrSyntaxError("", "missing field 'body'");
    body = &j["body"];
    where = "/body";
  }
  ExprPtr expr = expr_from_json(*body, where);
  InputsRequired inputs = c.source == ConstraintSource::ReqResp ? InputsRequired::Both : InputsRequired::ResponseOnly;
  try {
    return make_program(c.id, inputs, std::move(expr), c.operation, c.category);
  } catch (const IrBuildError& e) {
    throw IrSyntaxError(where, e.what());
  }
}

SynthesisResult OracleSynthesizer::synthesize(const Constraint& c) {
  SynthesisResult r;
  r.constraint_id = c.id;
  int attempts_left = gateway_.options().mode == LlmMode::Live ? std::max(0, options_.repair_attempts) : 0;
  std::string repair_note;
  for (;;) {
    LlmRequest req = gateway_.make_request(TemplateId::Testgen,
                                           gateway_.prompts().render(TemplateId::Testgen, testgen_bindings(c, repair_note)));
    LlmResponse resp = gateway_.complete(req);
    r.provenance.push_back({TemplateId::Testgen, req.digest(), resp.text});
    try {
      r.program = program_from_completion(resp.text, c);
      r.status = SynthesisStatus::Synthesized;
      r.error.clear();
      return r;
    } catch (const Error& e) {
      r.status = SynthesisStatus::ParseFailed;
      r.error = e.what();
    }
    if (attempts_left-- <= 0) return r;
    repair_note = "Your previous answer could not be used (" + r.error +
                  "). Reply again with only the corrected JSON program.";
  }
}

Value build_minimal_response(const PropertyPath& path, const Value& example) {
  Value cur = example;
  const auto& segs = path.segments();
  for (auto it = segs.rbegin(); it != segs.rend(); ++it) {
    if (it->wildcard) {
      cur = Value(Array{std::move(cur)});
    } else {
      Object o;
      o.emplace(it->name, std::move(cur));
      cur = Value(std::move(o));
    }
  }
  return cur;
}

SynthesisResult verify_against_examples(SynthesisResult r, const Constraint& c, const ApiSpec& spec) {
  if (r.status != SynthesisStatus::Synthesized || !r.program) return r;
  const auto* props = schema_context(spec, c);
  const Value request = Value(Object{});
  for (const auto* v : c.response_variables()) {
    const PropertySpec* p = find_leaf(props, v->name);
    if (!p || !p->example) continue;
    Value response = build_minimal_response(p->path, *p->example);
    Verdict verdict = evaluate(*r.program, request, response);
    if (verdict.state == VerdictState::Mismatched) {
      r.status = SynthesisStatus::RejectedByVerifier;
      r.evidence = VerifierEvidence{v->render(), *p->example, verdict};
      return r;
    }
  }
  return r;
}

std::vector<SynthesisResult> OracleSynthesizer::synthesize_all(const std::vector<Constraint>& constraints) {
  std::vector<SynthesisResult> out;
  out.reserve(constraints.size());
  for (const auto& c : constraints) {
    SynthesisResult r = synthesize(c);
    if (options_.verify) r = verify_against_examples(std::move(r), c, spec_);
    out.push_back(std::move(r));
  }
  return out;
}

nlohmann::json synthesis_report(const std::vector<SynthesisResult>& results) {
  nlohmann::json counts = {{"Synthesized", 0}, {"ParseFailed", 0}, {"Rejected-by-verifier", 0}};
  nlohmann::json rejections = nlohmann::json::array();
  nlohmann::json failures = nlohmann::json::array();
  for (const auto& r : results) {
    counts[std::string(to_string(r.status))] = counts[std::string(to_string(r.status))].get<int>() + 1;
    if (r.status == SynthesisStatus::RejectedByVerifier && r.evidence) {
      rejections.push_back({{"constraint_id", r.constraint_id},
                            {"variable", r.evidence->variable},
                            {"example", r.evidence->example.to_json()},
                            {"verdict", std::string(to_string(r.evidence->verdict.state))},
                            {"detail", r.evidence->verdict.detail}});
    } else if (r.status == SynthesisStatus::ParseFailed) {
      failures.push_back({{"constraint_id", r.constraint_id}, {"error", r.error}});
    }
  }
  return {{"tool_version", std::string(kToolVersion)}, {"total", results.size()}, {"counts", counts}, {"rejections", rejections}, {"failures", failures}};
}

void write_program_bundle(const std::filesystem::path& dir, const std::vector<SynthesisResult>& results) {
  std::filesystem::create_directories(dir / "programs");
  for (const auto& r : results) {
    if (r.status != SynthesisStatus::Synthesized || !r.program) continue;
    std::ofstream out(dir / "programs" / (r.constraint_id + ".json"));
    out << serialize_program(*r.program);
  }
  std::ofstream report(dir / "synthesis_report.json");
  report << synthesis_report(results).dump(2) << '\n';
}

std::vector<ValidatorProgram> load_program_bundle(const std::filesystem::path& dir) {
  std::vector<ValidatorProgram> out;
  auto programs = dir / "programs";
  if (!std::filesystem::is_directory(programs)) throw ParseError("no programs/ directory in " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(programs))
    if (e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    std::ifstream in(f);
    std::ostringstream ss;
    ss << in.rdbuf();
    out.push_back(parse_program(ss.str()));
  }
  return out;
}

}  // namespace specguard
