#include "specguard/harness.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <regex>
#include <sstream>
#include <thread>

#include "specguard/errors.hpp"
#include "specguard/version.hpp"

namespace specguard {

namespace {

std::string upper(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

Exchange exchange_from_json(const nlohmann::json& j, std::size_t line) {
  if (!j.is_object()) throw TraceParseError(line, "expected a JSON object");
  Exchange e;
  auto op = j.find("operation");
  if (op == j.end() || !op->is_object()) throw TraceParseError(line, "missing object 'operation'");
  auto method = op->find("method");
  auto path = op->find("path");
  if (method == op->end() || !method->is_string() || path == op->end() || !path->is_string())
    throw TraceParseError(line, "operation needs string 'method' and 'path'");
  e.operation = {upper(method->get<std::string>()), path->get<std::string>()};

  auto status = j.find("status");
  if (status == j.end() || !status->is_number_integer()) throw TraceParseError(line, "missing integer 'status'");
  std::int64_t s = status->get<std::int64_t>();
  if (s < 100 || s > 599) throw TraceParseError(line, "status " + std::to_string(s) + " outside [100, 599]");
  e.status = static_cast<int>(s);

  if (auto req = j.find("request"); req != j.end() && !req->is_null()) {
    if (!req->is_object()) throw TraceParseError(line, "'request' must be an object");
    e.request = Value::from_json(*req);
  } else {
    e.request = Value(Object{});
  }
  auto body = j.find("response_body");
  if (body == j.end()) throw TraceParseError(line, "missing 'response_body'");
  e.response_body = Value::from_json(*body);
  if (auto at = j.find("captured_at"); at != j.end() && !at->is_null()) {
    if (!at->is_string()) throw TraceParseError(line, "'captured_at' must be text");
    e.captured_at = at->get<std::string>();
  }
  return e;
}

nlohmann::json exchange_to_json(const Exchange& e) {
  nlohmann::json j = {{"operation", {{"method", e.operation.method}, {"path", e.operation.path}}},
                      {"request", e.request.to_json()},
                      {"status", e.status},
                      {"response_body", e.response_body.to_json()}};
  if (!e.captured_at.empty()) j["captured_at"] = e.captured_at;
  return j;
}

TraceSet parse_traces(std::string_view text) {
  TraceSet out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) {
      if (end == text.size()) break;
      continue;
    }
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw TraceParseError(line_no, std::string("malformed JSON: ") + e.what());
    }
    Exchange ex = exchange_from_json(j, line_no);
    if (ex.status >= 200 && ex.status < 300) out.exchanges.push_back(std::move(ex));
    else ++out.filtered;
    if (end == text.size()) break;
  }
  return out;
}

TraceSet load_traces(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open trace file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_traces(ss.str());
}

namespace {

ConstraintResult run_one(const ValidatorProgram& p, const std::vector<Exchange>& exchanges) {
  ConstraintResult r;
  r.constraint_id = p.constraint_id;
  r.operation = p.operation;
  r.category = p.category;
  std::vector<Verdict> verdicts;
  for (std::size_t i = 0; i < exchanges.size(); ++i) {
    const Exchange& e = exchanges[i];
    if (p.operation && e.operation != *p.operation) continue;
    Verdict v = evaluate(p, e.request, e.response_body);
    if (v.state == VerdictState::Mismatched && !r.evidence) r.evidence = r.per_exchange.size();
    verdicts.push_back(v);
    r.per_exchange.push_back({i, std::move(v)});
  }
  if (verdicts.empty()) {
    r.final = Verdict::unknown("no exchanges for this operation");
    r.note = "no exchanges";
  } else {
    r.final = aggregate(verdicts);
  }
  return r;
}

}  // namespace

std::vector<ConstraintResult> run(const std::vector<ValidatorProgram>& programs,
                                  const std::vector<Exchange>& exchanges, const HarnessOptions& options) {
  std::vector<ConstraintResult> out(programs.size());
  const int workers = std::clamp(options.concurrency, 1, static_cast<int>(std::max<std::size_t>(programs.size(), 1)));
  if (workers == 1) {
    for (std::size_t i = 0; i < programs.size(); ++i) out[i] = run_one(programs[i], exchanges);
    return out;
  }
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < programs.size(); i = next++) out[i] = run_one(programs[i], exchanges);
      });
  }
  return out;
}

std::string_view to_string(RootCause r) {
  switch (r) {
    case RootCause::IncompatibleDataFormat: return "IncompatibleDataFormat";
    case RootCause::ImplicitNullable: return "ImplicitNullable";
    case RootCause::InterParameterDependency: return "InterParameterDependency";
    case RootCause::Other: return "Other";
  }
  return "Other";
}

namespace {

// `return.items[3].milestone` -> `items[].milestone`; empty when not a response path.
std::optional<PropertyPath> spec_path_of(const std::string& verdict_path) {
  static const std::regex index(R"(\[\d+\])");
  std::string p = verdict_path;
  if (p.rfind("return.", 0) == 0) p = p.substr(7);
  else if (p.rfind("return[", 0) == 0) p = p.substr(6);
  else return std::nullopt;
  p = std::regex_replace(p, index, "[]");
  try {
    return PropertyPath::parse(p);
  } catch (const ParseError&) {
    return std::nullopt;
  }
}

bool declared_nullable(const ApiSpec& spec, const std::optional<OperationId>& op_id, const std::string& verdict_path) {
  if (!op_id) return false;
  const OperationSpec* op = spec.find_operation(*op_id);
  auto path = spec_path_of(verdict_path);
  if (!op || !path) return false;
  for (const auto& [status, props] : op->responses) {
    if (status.empty() || status[0] != '2') continue;
    if (const PropertySpec* p = op->find_property(status, *path)) return p->nullable;
  }
  return false;
}

bool ordering_or_filtering(const std::string& name) {
  static const std::regex cue(R"((order|sort|direction|filter))", std::regex::icase);
  return std::regex_search(name, cue);
}

}  // namespace

RootCause classify_mismatch(const ConstraintResult& result, const ApiSpec& spec, const ValidatorProgram* program) {
  if (result.final.state != VerdictState::Mismatched) return RootCause::Other;
  const Verdict& v = result.final;
  const bool null_value = v.failure == FailureKind::NullValue || (v.value && v.value->is_null());
  const bool format_failure =
      v.failure == FailureKind::Format || v.failure == FailureKind::Type || v.failure == FailureKind::Pattern;
  if (format_failure && !null_value) return RootCause::IncompatibleDataFormat;
  if (null_value && !declared_nullable(spec, result.operation, v.path)) return RootCause::ImplicitNullable;
  if (program && program->body) {
    bool request_side = program->inputs_required != InputsRequired::ResponseOnly;
    bool sorted = false, cue = false;
    any_node(*program->body, [&](const Expr& e) {
      if (e.as<SortedNode>()) sorted = true;
      if (const auto* p = e.as<PathRefNode>(); p && p->scope == PathScope::Request) {
        request_side = true;
        cue = cue || ordering_or_filtering(p->text);
      }
      return false;
    });
    if (request_side && (sorted || cue)) return RootCause::InterParameterDependency;
  }
  return RootCause::Other;
}

RunReport build_report(std::vector<ConstraintResult> results, const std::vector<ValidatorProgram>& programs,
                       const ApiSpec* spec, std::size_t exchanges, std::size_t filtered) {
  RunReport r;
  r.exchanges = exchanges;
  r.filtered = filtered;
  std::map<std::string, const ValidatorProgram*> by_id;
  for (const auto& p : programs) by_id.emplace(p.constraint_id, &p);
  const ApiSpec empty_spec;
  for (const auto& res : results) {
    std::string cat(to_string(res.category.value_or(Category::Uncategorized)));
    RunTotals& bucket = r.by_category[cat];
    switch (res.final.state) {
      case VerdictState::Matched:
        ++r.totals.matched;
        ++bucket.matched;
        break;
      case VerdictState::Unknown:
        ++r.totals.unknown;
        ++bucket.unknown;
        break;
      case VerdictState::Mismatched: {
        ++r.totals.mismatched;
        ++bucket.mismatched;
        auto it = by_id.find(res.constraint_id);
        MismatchEntry m;
        m.constraint_id = res.constraint_id;
        m.operation = res.operation;
        m.exchange = res.evidence ? res.per_exchange[*res.evidence].exchange : 0;
        m.verdict = res.final;
        m.root_cause = classify_mismatch(res, spec ? *spec : empty_spec, it == by_id.end() ? nullptr : it->second);
        r.mismatches.push_back(std::move(m));
        break;
      }
    }
  }
  r.results = std::move(results);
  return r;
}

nlohmann::json verdict_to_json(const Verdict& v) {
  nlohmann::json j = {{"state", std::string(to_string(v.state))}, {"score", score(v.state)}};
  if (!v.detail.empty()) j["detail"] = v.detail;
  if (!v.path.empty()) j["path"] = v.path;
  if (v.value) j["value"] = v.value->to_json();
  if (v.failure != FailureKind::None) j["failure"] = std::string(to_string(v.failure));
  return j;
}

namespace {

nlohmann::json totals_json(const RunTotals& t) {
  return {{"matched", t.matched}, {"mismatched", t.mismatched}, {"unknown", t.unknown}, {"total", t.total()}};
}

nlohmann::json operation_json(const std::optional<OperationId>& op) {
  if (!op) return nullptr;
  return {{"method", op->method}, {"path", op->path}};
}

}  // namespace

nlohmann::json report_to_json(const RunReport& r) {
  nlohmann::json results = nlohmann::json::array();
  for (const auto& res : r.results) {
    nlohmann::json per = nlohmann::json::array();
    for (const auto& ev : res.per_exchange) per.push_back({{"exchange", ev.exchange}, {"score", score(ev.verdict.state)}});
    nlohmann::json j = {{"constraint_id", res.constraint_id},
                        {"operation", operation_json(res.operation)},
                        {"category", std::string(to_string(res.category.value_or(Category::Uncategorized)))},
                        {"final", verdict_to_json(res.final)},
                        {"per_exchange", per}};
    if (res.note) j["note"] = *res.note;
    results.push_back(std::move(j));
  }
  nlohmann::json mismatches = nlohmann::json::array();
  for (const auto& m : r.mismatches)
    mismatches.push_back({{"constraint_id", m.constraint_id},
                          {"operation", operation_json(m.operation)},
                          {"exchange", m.exchange},
                          {"evidence", verdict_to_json(m.verdict)},
                          {"root_cause", std::string(to_string(m.root_cause))},
                          {"root_cause_method", "heuristic"}});
  nlohmann::json cats = nlohmann::json::object();
  for (const auto& [name, t] : r.by_category) cats[name] = totals_json(t);
  return {{"report_version", kReportVersion},
          {"tool_version", std::string(kToolVersion)},
          {"exchanges", {{"retained", r.exchanges}, {"filtered", r.filtered}}},
          {"totals", totals_json(r.totals)},
          {"by_category", cats},
          {"results", results},
          {"mismatches", mismatches}};
}

std::string report_to_text(const RunReport& r) {
  std::ostringstream out;
  out << "programs: " << r.totals.total() << "  matched: " << r.totals.matched << "  mismatched: " << r.totals.mismatched
      << "  unknown: " << r.totals.unknown << "\n";
  out << "exchanges: " << r.exchanges << " retained, " << r.filtered << " filtered (non-2xx)\n";
  if (!r.by_category.empty()) {
    out << "\nby category:\n";
    for (const auto& [name, t] : r.by_category)
      out << "  " << name << ": " << t.matched << " matched, " << t.mismatched << " mismatched, " << t.unknown
          << " unknown\n";
  }
  if (!r.mismatches.empty()) {
    out << "\nmismatches (root causes are heuristic):\n";
    for (const auto& m : r.mismatches) {
      out << "  " << m.constraint_id;
      if (m.operation) out << " [" << m.operation->render() << "]";
      out << " exchange #" << m.exchange << " " << to_string(m.root_cause) << ": " << m.verdict.detail << "\n";
    }
  }
  return out.str();
}

}  // namespace specguard
