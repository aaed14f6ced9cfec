#include "commands.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/sinks/null_sink.h>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include <specguard/errors.hpp>
#include <specguard/version.hpp>

namespace specguard::cli {

namespace fs = std::filesystem;

std::shared_ptr<Provider> default_provider(const RunConfig& config) {
  if (config.llm.mode == LlmMode::Replay) return std::make_shared<FailingProvider>();
  return std::make_shared<OpenAiProvider>();
}

std::string current_stamp() {
  std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "run-%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

void write_json(const fs::path& file, const nlohmann::json& j) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error("cannot write " + file.string());
  out << j.dump(2) << '\n';
}

nlohmann::json read_json_file(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw ParseError("cannot open " + file.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(file.string() + ": " + e.what());
  }
}

namespace {

std::shared_ptr<spdlog::logger> g_log;

// Silent unless run_cli has attached the caller's error stream.
spdlog::logger& log() {
  if (!g_log) g_log = std::make_shared<spdlog::logger>("specguard", std::make_shared<spdlog::sinks::null_sink_mt>());
  return *g_log;
}

nlohmann::json gateway_json(const GatewayStats& s) {
  return {{"calls", s.calls},
          {"provider_calls", s.provider_calls},
          {"cache_hits", s.cache_hits},
          {"input_tokens", s.input_tokens},
          {"output_tokens", s.output_tokens},
          {"calls_by_template", s.calls_by_template}};
}

}  // namespace

Session::Session(RunConfig config, const ProviderFactory& factory) : config_(std::move(config)) {
  LoadOptions load;
  load.max_depth = config_.mining.max_depth;
  spec_ = normalize(load_spec(config_.spec, load));
  provider_ = factory(config_);
  if (!provider_) throw ConfigError("llm", "no provider available");
  cache_ = config_.llm.cache ? std::make_shared<TranscriptCache>(*config_.llm.cache) : std::make_shared<TranscriptCache>();
  GatewayOptions g;
  g.mode = config_.llm.mode;
  g.model = config_.llm.model;
  g.temperature = config_.llm.temperature;
  g.top_p = config_.llm.top_p;
  g.max_concurrency = config_.llm.max_concurrency;
  g.retry.max_attempts = config_.llm.retry_attempts;
  PromptLibrary prompts = config_.llm.prompts ? PromptLibrary::from_directory(*config_.llm.prompts) : PromptLibrary::defaults();
  gateway_ = std::make_unique<LlmGateway>(g, cache_, provider_, std::move(prompts));
  kb_ = config_.mining.kb ? std::make_unique<KnowledgeBase>(*config_.mining.kb) : std::make_unique<KnowledgeBase>();
}

nlohmann::json mining_report(const std::vector<Constraint>& constraints, const MiningStats& stats,
                             const GatewayStats& gateway, std::size_t kb_entries, MiningMode mode) {
  std::map<std::string, std::size_t> by_category, by_source;
  for (const auto& c : constraints) {
    ++by_category[std::string(to_string(c.category))];
    ++by_source[std::string(to_string(c.source))];
  }
  const std::int64_t lookups = stats.properties_seen - stats.properties_skipped;
  nlohmann::json kb = {{"entries", kb_entries}, {"lookups", lookups}, {"hits", stats.kb_hits}};
  kb["hit_rate"] = lookups > 0 ? nlohmann::json(static_cast<double>(stats.kb_hits) / static_cast<double>(lookups))
                               : nlohmann::json(nullptr);
  return {{"tool_version", std::string(kToolVersion)},
          {"mode", std::string(to_string(mode))},
          {"constraints", constraints.size()},
          {"by_category", by_category},
          {"by_source", by_source},
          {"stats",
           {{"parameters_seen", stats.parameters_seen},
            {"parameters_skipped", stats.parameters_skipped},
            {"mappings_rejected", stats.mappings_rejected},
            {"confirmations_rejected", stats.confirmations_rejected},
            {"unresolved_properties", stats.unresolved_properties},
            {"properties_seen", stats.properties_seen},
            {"properties_skipped", stats.properties_skipped},
            {"parse_failures", stats.parse_failures}}},
          {"knowledge_base", kb},
          {"llm", gateway_json(gateway)}};
}

std::vector<Constraint> Session::mine(const fs::path& run_dir) {
  ConstraintMiner miner(spec_, *gateway_, *kb_, {config_.mining.mode, config_.mining.concurrency});
  auto constraints = miner.mine_all();
  if (config_.mining.kb) kb_->save();
  nlohmann::json doc = constraints_to_json(constraints);
  doc["tool_version"] = std::string(kToolVersion);
  write_json(run_dir / "constraints.json", doc);
  write_json(run_dir / "mining_report.json",
             mining_report(constraints, miner.stats(), gateway_->stats(), kb_->size(), config_.mining.mode));
  log().info("mined {} constraints from {} operations", constraints.size(), spec_.operations.size());
  return constraints;
}

std::vector<SynthesisResult> Session::gen(const std::vector<Constraint>& constraints, const fs::path& run_dir) {
  OracleSynthesizer synth(spec_, *gateway_, {config_.synthesis.repair_attempts, config_.synthesis.verify});
  auto results = synth.synthesize_all(constraints);
  write_program_bundle(run_dir, results);
  std::size_t ok = 0;
  for (const auto& r : results) ok += r.status == SynthesisStatus::Synthesized;
  log().info("synthesized {} of {} programs", ok, results.size());
  return results;
}

RunReport Session::run(const std::vector<ValidatorProgram>& programs, const fs::path& traces, const fs::path& run_dir) {
  TraceSet set = load_traces(traces);
  auto results = specguard::run(programs, set.exchanges, {config_.harness.concurrency});
  RunReport report = build_report(std::move(results), programs, &spec_, set.exchanges.size(), set.filtered);
  write_json(run_dir / "run_report.json", report_to_json(report));
  log().info("ran {} programs over {} exchanges ({} filtered)", programs.size(), set.exchanges.size(), set.filtered);
  return report;
}

nlohmann::json evaluate_config(const RunConfig& config, const std::optional<fs::path>& constraints_file) {
  nlohmann::json out = {{"tool_version", std::string(kToolVersion)}};
  std::optional<std::vector<Constraint>> mined;
  auto need_constraints = [&]() -> const std::vector<Constraint>& {
    if (!mined) {
      if (!constraints_file) throw ConfigError("--constraints", "required for scoring or overlap");
      mined = constraints_from_json(read_json_file(*constraints_file));
    }
    return *mined;
  };
  bool any = false;
  if (config.eval.ground_truth || config.eval.judgments) {
    if (!config.eval.ground_truth) throw ConfigError("eval.ground_truth", "required with eval.judgments");
    if (!config.eval.judgments) throw ConfigError("eval.judgments", "required with eval.ground_truth");
    auto gt = load_ground_truth(*config.eval.ground_truth);
    auto judgments = load_judgments(*config.eval.judgments);
    out["score"] = metrics_to_json(score(need_constraints(), gt, judgments));
    out["score"]["ground_truth_entries"] = gt.entries.size();
    any = true;
  }
  if (config.eval.external_invariants) {
    auto ext = load_external_invariants(*config.eval.external_invariants);
    out["overlap"] = overlap_to_json(overlap(need_constraints(), ext));
    any = true;
  }
  if (config.eval.table) {
    auto j = read_json_file(*config.eval.table);
    const nlohmann::json& rows_json = j.is_object() && j.contains("rows") ? j["rows"] : j;
    if (!rows_json.is_array()) throw ConfigError("eval.table", "expected an array of {name, tp, fp, fn}");
    std::vector<TableRow> rows;
    for (const auto& r : rows_json) {
      try {
        rows.push_back({r.at("name").get<std::string>(), r.at("tp").get<double>(), r.at("fp").get<double>(),
                        r.at("fn").get<double>()});
      } catch (const nlohmann::json::exception& e) {
        throw ConfigError("eval.table", e.what());
      }
    }
    out["table"] = table_score_to_json(score_table(rows));
    any = true;
  }
  if (!any) throw ConfigError("eval", "nothing to evaluate (set ground_truth + judgments, external_invariants or table)");
  return out;
}

namespace {

struct Globals {
  std::string config;
  std::string out;
  std::string llm_mode;
  std::string stamp;
  bool verbose = false;
};

RunConfig resolve_config(const Globals& g) {
  RunConfig c = load_config(g.config);
  if (!g.out.empty()) c.output = fs::absolute(g.out);
  if (!g.llm_mode.empty()) c.llm.mode = llm_mode_from_string(g.llm_mode);
  c.validate();
  return c;
}

fs::path make_run_dir(const RunConfig& c, const Globals& g) {
  fs::path dir = c.output / (g.stamp.empty() ? current_stamp() : g.stamp);
  fs::create_directories(dir);
  return dir;
}

std::vector<Constraint> load_constraints(const fs::path& file) { return constraints_from_json(read_json_file(file)); }

fs::path traces_path(const RunConfig& c, const std::string& override_path) {
  if (!override_path.empty()) return fs::absolute(override_path);
  if (!c.harness.traces) throw ConfigError("harness.traces", "required for run");
  return *c.harness.traces;
}

void emit_report(std::ostream& out, const RunReport& report, const std::string& format) {
  if (format == "text") out << report_to_text(report);
  else out << report_to_json(report).dump(2) << '\n';
}

}  // namespace

int run_cli(int argc, const char* const* argv, const CliEnv& env) {
  std::ostream& out = env.out ? *env.out : std::cout;
  std::ostream& err = env.err ? *env.err : std::cerr;
  ProviderFactory factory = env.provider_factory ? env.provider_factory : ProviderFactory(default_provider);

  CLI::App app{"Mine response-body oracles from OpenAPI documents and replay them over recorded traffic", "specguard"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "YAML run configuration")->required()->check(CLI::ExistingFile);
  app.add_option("--out", g.out, "Output directory (overrides config `output`)");
  app.add_option("--llm-mode", g.llm_mode, "live, record or replay (overrides config)")
      ->check(CLI::IsMember({"live", "record", "replay"}));
  app.add_option("--stamp", g.stamp, "Run directory name instead of run-<UTC time>");
  app.add_flag("--verbose,-v", g.verbose, "Log pipeline progress to stderr");

  auto* mine = app.add_subcommand("mine", "Mine constraints from the spec");
  auto* gen = app.add_subcommand("gen", "Synthesize validator programs from constraints.json");
  std::string constraints_file;
  gen->add_option("--constraints", constraints_file, "constraints.json from a mine run")->required()->check(CLI::ExistingFile);
  auto* run = app.add_subcommand("run", "Replay a program bundle over recorded traces");
  std::string programs_dir, traces_override, format;
  run->add_option("--programs", programs_dir, "Bundle directory holding programs/")->required()->check(CLI::ExistingDirectory);
  run->add_option("--traces", traces_override, "Trace file (overrides harness.traces)")->check(CLI::ExistingFile);
  run->add_option("--format", format, "Report printed to stdout")->check(CLI::IsMember({"json", "text"}));
  auto* eval = app.add_subcommand("eval", "Score constraints against ground truth and external invariants");
  std::string eval_constraints;
  eval->add_option("--constraints", eval_constraints, "constraints.json to score")->check(CLI::ExistingFile);
  auto* all = app.add_subcommand("all", "mine, gen and run in one go");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
  g_log = std::make_shared<spdlog::logger>("specguard", sink);
  g_log->set_pattern("[%l] %v");
  g_log->set_level(g.verbose ? spdlog::level::info : spdlog::level::warn);
  struct DetachLog {
    ~DetachLog() { g_log.reset(); }
  } detach;

  try {
    RunConfig config = resolve_config(g);
    if (eval->parsed()) {
      std::optional<fs::path> cf;
      if (!eval_constraints.empty()) cf = fs::absolute(eval_constraints);
      auto metrics = evaluate_config(config, cf);
      fs::path dir = make_run_dir(config, g);
      write_json(dir / "metrics.json", metrics);
      out << (dir / "metrics.json").string() << '\n';
      return 0;
    }
    Session session(config, factory);
    fs::path dir = make_run_dir(config, g);
    if (mine->parsed()) {
      session.mine(dir);
      out << dir.string() << '\n';
      return 0;
    }
    if (gen->parsed()) {
      session.gen(load_constraints(constraints_file), dir);
      out << dir.string() << '\n';
      return 0;
    }
    if (run->parsed()) {
      auto programs = load_program_bundle(programs_dir);
      RunReport report = session.run(programs, traces_path(config, traces_override), dir);
      emit_report(out, report, format.empty() ? config.harness.format : format);
      return report.exit_code();
    }
    if (all->parsed()) {
      auto constraints = session.mine(dir);
      auto results = session.gen(constraints, dir);
      std::vector<ValidatorProgram> programs;
      for (auto& r : results)
        if (r.status == SynthesisStatus::Synthesized && r.program) programs.push_back(*r.program);
      nlohmann::json summary = {{"tool_version", std::string(kToolVersion)},
                                {"constraints", constraints.size()},
                                {"synthesis", synthesis_report(results)["counts"]},
                                {"programs", programs.size()}};
      int code = 0;
      if (config.harness.traces) {
        RunReport report = session.run(programs, *config.harness.traces, dir);
        summary["totals"] = report_to_json(report)["totals"];
        summary["mismatches"] = report.mismatches.size();
        code = report.exit_code();
      } else {
        log().warn("harness.traces not set; skipping run");
      }
      summary["exit_code"] = code;
      write_json(dir / "summary.json", summary);
      out << summary.dump(2) << '\n';
      return code;
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

int run_cli(const std::vector<std::string>& args, const CliEnv& env) {
  std::vector<const char*> argv;
  argv.push_back("specguard");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), env);
}

}  // namespace specguard::cli
