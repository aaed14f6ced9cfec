// specguard-fixture: records transcript caches from a scripted provider and
// expands trace templates into JSON-lines trace files.

#include <ctime>
#include <fstream>
#include <iostream>
#include <random>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <specguard/errors.hpp>

#include "../cli/commands.hpp"
#include "scripted_provider.hpp"

namespace {

std::string rfc3339(std::int64_t epoch) {
  std::time_t t = static_cast<std::time_t>(epoch);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// {"start_epoch": n, "exchanges": [{..., "repeat": k, "vary": {"/json/pointer": [lo, hi]}}]}
int expand_traces(const std::string& template_path, const std::string& out_path, std::uint64_t seed) {
  std::ifstream in(template_path);
  if (!in) throw specguard::ParseError("cannot open " + template_path);
  nlohmann::json t = nlohmann::json::parse(in);
  std::mt19937_64 rng(seed);
  std::int64_t clock = t.value("start_epoch", std::int64_t{1679090500});
  std::ofstream out(out_path, std::ios::binary);
  std::size_t lines = 0;
  for (const auto& e : t.at("exchanges")) {
    int repeat = e.value("repeat", 1);
    for (int k = 0; k < repeat; ++k) {
      nlohmann::json ex = e;
      ex.erase("repeat");
      ex.erase("vary");
      const nlohmann::json vary = e.value("vary", nlohmann::json::object());
      for (const auto& [ptr, range] : vary.items()) {
        std::uniform_int_distribution<std::int64_t> dist(range.at(0).get<std::int64_t>(), range.at(1).get<std::int64_t>());
        ex[nlohmann::json::json_pointer(ptr)] = dist(rng);
      }
      if (!ex.contains("captured_at")) ex["captured_at"] = rfc3339(clock++);
      (void)specguard::exchange_from_json(ex, lines + 1);
      out << ex.dump() << '\n';
      ++lines;
    }
  }
  std::cout << lines << " exchanges written to " << out_path << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fixture tooling: scripted transcript recording and synthetic traces", "specguard-fixture"};
  app.require_subcommand(1);

  auto* record = app.add_subcommand("record", "Run a specguard command in record mode against a scripted provider");
  std::string script;
  std::vector<std::string> forwarded;
  record->add_option("--script", script, "Scripted replies (JSON)")->required()->check(CLI::ExistingFile);
  record->add_option("args", forwarded, "specguard arguments, e.g. --config c.yaml all")->required();
  record->allow_extras();

  auto* traces = app.add_subcommand("traces", "Expand a trace template into a JSON-lines file");
  std::string tmpl, out;
  std::uint64_t seed = 7;
  traces->add_option("--template", tmpl, "Trace template (JSON)")->required()->check(CLI::ExistingFile);
  traces->add_option("--out", out, "Output trace file")->required();
  traces->add_option("--seed", seed, "RNG seed for varied fields");

  CLI11_PARSE(app, argc, argv);

  try {
    if (traces->parsed()) return expand_traces(tmpl, out, seed);
    auto provider = specguard::fixture::ScriptedProvider::from_file(script);
    std::vector<std::string> args = forwarded;
    for (const auto& x : record->remaining()) args.push_back(x);
    args.insert(args.begin(), {"--llm-mode", "record"});
    specguard::cli::CliEnv env;
    env.provider_factory = [provider](const specguard::cli::RunConfig&) { return provider; };
    int code = specguard::cli::run_cli(args, env);
    std::cerr << provider->calls() << " scripted completions\n";
    return code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
