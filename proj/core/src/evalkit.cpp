#include "specguard/evalkit.hpp"

#include <algorithm>
#include <fstream>
#include <regex>
#include <set>
#include <tuple>

#include "specguard/errors.hpp"

namespace specguard {

Metrics metrics_from_counts(double tp, double fp, double fn) {
  Metrics m{tp, fp, fn, std::nullopt, std::nullopt, std::nullopt};
  if (tp + fp > 0) m.precision = tp / (tp + fp);
  if (tp + fn > 0) m.recall = tp / (tp + fn);
  if (m.precision && m.recall && *m.precision + *m.recall > 0)
    m.f1 = 2 * *m.precision * *m.recall / (*m.precision + *m.recall);
  else if (m.precision && m.recall)
    m.f1 = 0.0;
  return m;
}

namespace {

nlohmann::json opt(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

OperationId operation_from(const nlohmann::json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("method") || !j.contains("path") || !j["method"].is_string() ||
      !j["path"].is_string())
    throw ParseError(where + ": operation needs string 'method' and 'path'");
  std::string method = j["method"].get<std::string>();
  for (auto& c : method) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return {method, j["path"].get<std::string>()};
}

VariableKey canonical(std::vector<std::string> vars) {
  std::sort(vars.begin(), vars.end());
  vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
  return vars;
}

}  // namespace

nlohmann::json metrics_to_json(const Metrics& m) {
  return {{"tp", m.tp}, {"fp", m.fp}, {"fn", m.fn},
          {"precision", opt(m.precision)}, {"recall", opt(m.recall)}, {"f1", opt(m.f1)}};
}

std::string render_key(const VariableKey& key) {
  std::string out = "{";
  for (std::size_t i = 0; i < key.size(); ++i) out += (i ? ", " : "") + key[i];
  return out + "}";
}

GroundTruth ground_truth_from_json(const nlohmann::json& j) {
  const nlohmann::json* list = &j;
  if (j.is_object()) {
    if (!j.contains("entries")) throw ParseError("ground truth: missing 'entries'");
    list = &j["entries"];
  }
  if (!list->is_array()) throw ParseError("ground truth: 'entries' must be an array");
  GroundTruth gt;
  std::set<std::tuple<OperationId, VariableKey, std::string>> seen;
  std::set<std::string> ids;
  for (std::size_t i = 0; i < list->size(); ++i) {
    const auto& e = (*list)[i];
    std::string where = "ground truth entry " + std::to_string(i);
    if (!e.is_object()) throw ParseError(where + ": expected an object");
    GroundTruthEntry g;
    g.id = e.value("id", "gt-" + std::to_string(i + 1));
    if (!e.contains("operation")) throw ParseError(where + ": missing 'operation'");
    g.operation = operation_from(e["operation"], where);
    if (!e.contains("variables") || !e["variables"].is_array() || e["variables"].empty())
      throw ParseError(where + ": 'variables' must be a non-empty array");
    std::vector<std::string> vars;
    for (const auto& v : e["variables"]) {
      if (!v.is_string()) throw ParseError(where + ": variables must be text");
      vars.push_back(v.get<std::string>());
    }
    g.variables = canonical(std::move(vars));
    g.description = e.value("description", "");
    if (e.contains("category") && !e["category"].is_null()) {
      g.category = category_from_string(e["category"].get<std::string>());
      if (!g.category) throw ParseError(where + ": unknown category " + e["category"].dump());
    }
    if (!seen.emplace(g.operation, g.variables, g.description).second)
      throw ParseError(where + ": duplicate (operation, variables, description)");
    if (!ids.insert(g.id).second) throw ParseError(where + ": duplicate id " + g.id);
    gt.entries.push_back(std::move(g));
  }
  return gt;
}

GroundTruth load_ground_truth(const std::filesystem::path& path) { return ground_truth_from_json(read_json(path)); }

Judgments judgments_from_json(const nlohmann::json& j) {
  const nlohmann::json* map = &j;
  if (j.is_object() && j.contains("judgments")) map = &j["judgments"];
  if (!map->is_object()) throw ParseError("judgments: expected an object keyed by constraint id");
  Judgments out;
  for (const auto& [id, v] : map->items()) {
    Judgment jd;
    if (v.is_string()) {
      const auto s = v.get<std::string>();
      if (s != "correct" && s != "incorrect") throw ParseError("judgment for " + id + ": expected correct|incorrect");
      jd.correct = s == "correct";
    } else if (v.is_boolean()) {
      jd.correct = v.get<bool>();
    } else if (v.is_object() && v.contains("correct") && v["correct"].is_boolean()) {
      jd.correct = v["correct"].get<bool>();
      if (v.contains("equivalent_to") && !v["equivalent_to"].is_null()) {
        if (!v["equivalent_to"].is_array()) throw ParseError("judgment for " + id + ": 'equivalent_to' must be an array");
        jd.equivalent_to.emplace();
        for (const auto& g : v["equivalent_to"]) jd.equivalent_to->push_back(g.get<std::string>());
      }
    } else {
      throw ParseError("judgment for " + id + ": unsupported form");
    }
    out.emplace(id, std::move(jd));
  }
  return out;
}

Judgments load_judgments(const std::filesystem::path& path) { return judgments_from_json(read_json(path)); }

VariableKey variable_key(const Constraint& c) {
  std::vector<std::string> vars;
  for (const auto& v : c.variables) vars.push_back(v.render());
  return canonical(std::move(vars));
}

VariableKey variable_key(const ExternalInvariant& inv) { return inv.variables; }
VariableKey variable_key(const GroundTruthEntry& e) { return e.variables; }

Metrics score(const std::vector<Constraint>& mined, const GroundTruth& gt, const Judgments& judgments) {
  double tp = 0, fp = 0;
  std::set<std::string> covered;
  for (const auto& c : mined) {
    auto it = judgments.find(c.id);
    if (it == judgments.end()) throw MissingJudgment(c.id);
    if (!it->second.correct) {
      ++fp;
      continue;
    }
    ++tp;
    const VariableKey key = variable_key(c);
    for (const auto& g : gt.entries) {
      if (g.operation != c.operation || g.variables != key) continue;
      const auto& eq = it->second.equivalent_to;
      if (!eq || std::find(eq->begin(), eq->end(), g.id) != eq->end()) covered.insert(g.id);
    }
  }
  double fn = 0;
  for (const auto& g : gt.entries)
    if (!covered.count(g.id)) ++fn;
  return metrics_from_counts(tp, fp, fn);
}

VariableKey extract_variables(std::string_view text) {
  static const std::regex token(R"((input|return)\.[A-Za-z0-9_.\[\]]+)");
  std::vector<std::string> vars;
  std::string s(text);
  for (auto it = std::sregex_iterator(s.begin(), s.end(), token); it != std::sregex_iterator(); ++it) {
    std::string v = it->str();
    while (!v.empty() && v.back() == '.') v.pop_back();
    vars.push_back(std::move(v));
  }
  return canonical(std::move(vars));
}

std::vector<ExternalInvariant> external_invariants_from_json(const nlohmann::json& j) {
  const nlohmann::json* list = &j;
  if (j.is_object()) {
    if (!j.contains("invariants")) throw ParseError("external invariants: missing 'invariants'");
    list = &j["invariants"];
  }
  if (!list->is_array()) throw ParseError("external invariants: expected an array");
  std::vector<ExternalInvariant> out;
  for (std::size_t i = 0; i < list->size(); ++i) {
    const auto& e = (*list)[i];
    std::string where = "invariant " + std::to_string(i);
    ExternalInvariant inv;
    if (e.is_string()) {
      inv.text = e.get<std::string>();
    } else if (e.is_object() && e.contains("text") && e["text"].is_string()) {
      inv.text = e["text"].get<std::string>();
      if (e.contains("operation") && !e["operation"].is_null()) inv.operation = operation_from(e["operation"], where);
      if (e.contains("variables")) {
        std::vector<std::string> vars;
        for (const auto& v : e["variables"]) vars.push_back(v.get<std::string>());
        inv.variables = canonical(std::move(vars));
      }
    } else {
      throw ParseError(where + ": expected text or {text, operation?, variables?}");
    }
    if (inv.variables.empty()) inv.variables = extract_variables(inv.text);
    if (inv.variables.empty()) throw ParseError(where + ": no input.* or return.* variable in '" + inv.text + "'");
    out.push_back(std::move(inv));
  }
  return out;
}

std::vector<ExternalInvariant> load_external_invariants(const std::filesystem::path& path) {
  return external_invariants_from_json(read_json(path));
}

OverlapPartition overlap(const std::vector<Constraint>& mined, const std::vector<ExternalInvariant>& ext) {
  std::set<VariableKey> m, e;
  for (const auto& c : mined) m.insert(variable_key(c));
  for (const auto& i : ext) e.insert(variable_key(i));
  OverlapPartition p;
  p.mined_groups = m.size();
  p.external_groups = e.size();
  std::set_intersection(m.begin(), m.end(), e.begin(), e.end(), std::back_inserter(p.shared));
  std::set_difference(m.begin(), m.end(), e.begin(), e.end(), std::back_inserter(p.unique_mined));
  std::set_difference(e.begin(), e.end(), m.begin(), m.end(), std::back_inserter(p.unique_external));
  return p;
}

nlohmann::json overlap_to_json(const OverlapPartition& p) {
  auto keys = [](const std::vector<VariableKey>& ks) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& k : ks) a.push_back(k);
    return a;
  };
  return {{"mined_groups", p.mined_groups},
          {"external_groups", p.external_groups},
          {"shared", keys(p.shared)},
          {"unique_mined", keys(p.unique_mined)},
          {"unique_external", keys(p.unique_external)}};
}

TableScore score_table(const std::vector<TableRow>& rows) {
  TableScore t;
  double tp = 0, fp = 0, fn = 0;
  double psum = 0, rsum = 0;
  int pn = 0, rn = 0;
  for (const auto& r : rows) {
    Metrics m = metrics_from_counts(r.tp, r.fp, r.fn);
    if (m.precision) psum += *m.precision, ++pn;
    if (m.recall) rsum += *m.recall, ++rn;
    tp += r.tp;
    fp += r.fp;
    fn += r.fn;
    t.rows.emplace_back(r.name, m);
  }
  t.pooled = metrics_from_counts(tp, fp, fn);
  if (pn) t.macro_precision = psum / pn;
  if (rn) t.macro_recall = rsum / rn;
  return t;
}

nlohmann::json table_score_to_json(const TableScore& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& [name, m] : t.rows) {
    nlohmann::json j = metrics_to_json(m);
    j["name"] = name;
    rows.push_back(std::move(j));
  }
  return {{"rows", rows},
          {"pooled", metrics_to_json(t.pooled)},
          {"macro_precision", opt(t.macro_precision)},
          {"macro_recall", opt(t.macro_recall)}};
}

}  // namespace specguard
