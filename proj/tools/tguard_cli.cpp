#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "tguard/authority.hpp"
#include "tguard/error.hpp"
#include "tguard/harness.hpp"
#include "tguard/json_io.hpp"
#include "tguard/scenario.hpp"

namespace {

using namespace tguard;
using nlohmann::json;

struct RunOptions {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> cycles;
  std::optional<std::string> scheme;
  std::optional<std::string> selection;
  std::optional<std::uint32_t> threshold;
  std::optional<std::uint32_t> warn_threshold;
  std::optional<std::uint64_t> rotation_period;
  bool sb = false;
  std::optional<std::uint64_t> sb_period;
  std::optional<std::size_t> ips;
  std::optional<std::string> trigger;
  std::string out;
  std::string events;
};

// Without a scenario file the built-in selection bench runs: m identity
// cores, the last one carrying a single-bit disrupt Trojan.
Scenario bench_from_options(const RunOptions& opt) {
  const auto mode = opt.selection ? selection_from_string(*opt.selection) : SelectionMode::Unbiased;
  const std::string trigger = opt.trigger.value_or("always");
  if (trigger != "always" && trigger != "odd") throw ConfigError("--trigger must be always or odd");
  return selection_bench(mode, trigger == "odd", opt.seed.value_or(1), opt.ips.value_or(3),
                         opt.cycles.value_or(1000));
}

Scenario load_with_overrides(const RunOptions& opt) {
  if (!opt.scenario.empty() && (opt.ips || opt.trigger)) {
    throw ConfigError("--ips and --trigger only apply without a scenario file");
  }
  Scenario s = opt.scenario.empty() ? bench_from_options(opt) : load_scenario(opt.scenario);
  if (opt.seed) s.seed = *opt.seed;
  if (opt.cycles) s.cycles = *opt.cycles;
  if (opt.scheme) s.scheme = scheme_from_string(*opt.scheme);
  if (opt.selection) s.selection = selection_from_string(*opt.selection);
  if (opt.threshold) s.thresholds.replace = *opt.threshold;
  if (opt.warn_threshold) s.thresholds.warn = *opt.warn_threshold;
  if (opt.rotation_period) s.rotation_period = *opt.rotation_period;
  if (opt.sb) s.sb.enabled = true;
  if (opt.sb_period) s.sb.period = *opt.sb_period;
  s.validate();
  return s;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path);
  out << text;
}

void emit(const std::string& text, const std::string& out_path) {
  std::cout << text;
  if (!out_path.empty()) write_file(out_path, text);
}

void add_run_options(CLI::App* cmd, RunOptions& opt) {
  cmd->add_option("scenario", opt.scenario, "Scenario JSON file (default: selection bench)");
  cmd->add_option("--seed", opt.seed, "Override the scenario seed");
  cmd->add_option("--cycles", opt.cycles, "Override the cycle count");
  cmd->add_option("--scheme", opt.scheme, "sb, mrvo, mcrc, mv or logger");
  cmd->add_option("--selection", opt.selection, "unbiased or biased");
  cmd->add_option("--threshold", opt.threshold, "Replace when a counter exceeds this");
  cmd->add_option("--warn-threshold", opt.warn_threshold, "Warn when a counter reaches this");
  cmd->add_option("--rotation-period", opt.rotation_period, "Periodic IP rotation, 0 = off");
  cmd->add_flag("--sb", opt.sb, "Obfuscate every slot's output lines");
  cmd->add_option("--sb-period", opt.sb_period, "Obfuscation function rotation period");
  cmd->add_option("--ips", opt.ips, "Selection bench: number of cores");
  cmd->add_option("--trigger", opt.trigger, "Selection bench: always or odd");
  cmd->add_option("--out", opt.out, "Also write the report to this file");
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + " is not valid JSON: " + e.what());
  }
}

authority::BatchSpec load_batch(const std::string& path) {
  const json j = read_json(path);
  if (!j.is_object()) throw ConfigError("batch must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key != "width" && key != "cycles" && key != "seed" && key != "input" &&
        key != "variants") {
      throw ConfigError("unknown batch key '" + key + "'");
    }
  }
  authority::BatchSpec spec;
  spec.width = j.value("width", std::size_t{8});
  spec.cycles = j.value("cycles", std::uint64_t{1000});
  spec.seed = j.value("seed", std::uint64_t{1});
  const std::string input = j.value("input", "random");
  if (input == "counter") {
    spec.input = InputMode::Counter;
  } else if (input != "random") {
    throw ConfigError("input must be 'random' or 'counter'");
  }
  if (!j.contains("variants") || !j.at("variants").is_array()) {
    throw ConfigError("batch needs a 'variants' array");
  }
  for (const auto& v : j.at("variants")) spec.variants.push_back(variant_from_json(v, spec.width));
  return spec;
}

std::string show_db(const authority::AuthorityDb& db) {
  std::ostringstream os;
  os << "infection_threshold: " << db.infection_threshold() << "\n";
  os << "weight_k: " << db.weight_k() << "\n";
  for (const auto& [id, r] : db.records()) {
    os << "core: " << id << " vendor=" << r.vendor_id << " score=" << r.warning_score
       << " status=" << authority::to_string(r.status) << " evidence=" << r.evidence.size()
       << " unverified=" << r.unverified.size() << " pending=" << r.pending.size() << "\n";
  }
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Runtime hardware Trojan defenses on a simulated reconfigurable fabric"};
  app.require_subcommand(1);

  RunOptions run_opt;
  auto* run = app.add_subcommand("run", "Run one scenario and print its report");
  add_run_options(run, run_opt);
  run->add_option("--events", run_opt.events, "Write the full event log to this file");

  RunOptions cmp_opt;
  auto* compare = app.add_subcommand("compare", "Run a scenario under MRVO, MCRC and MV");
  add_run_options(compare, cmp_opt);

  auto* auth = app.add_subcommand("authority", "Core certificate database");
  auth->require_subcommand(1);
  std::string db_path;
  std::uint64_t init_threshold = authority::AuthorityDb::kDefaultThreshold;
  std::uint64_t init_k = authority::AuthorityDb::kDefaultWeightK;
  std::string batch_path, report_path, fix_core, fix_note = "vendor fix", export_out;

  auto* a_init = auth->add_subcommand("init", "Create an empty database");
  a_init->add_option("--threshold", init_threshold, "Infection threshold");
  a_init->add_option("--k", init_k, "Weight penalty per warning point");
  auto* a_eval = auth->add_subcommand("eval", "Run an evaluation batch");
  a_eval->add_option("batch", batch_path, "Batch JSON file")->required();
  auto* a_report = auth->add_subcommand("report", "Ingest a user Trojan report");
  a_report->add_option("report", report_path, "Report JSON file")->required();
  auto* a_retry = auth->add_subcommand("retry", "Retry pending reports");
  auto* a_export = auth->add_subcommand("export", "Export initial selection weights");
  a_export->add_option("--out", export_out, "Also write the weights file here");
  auto* a_show = auth->add_subcommand("show", "List core records");
  auto* a_fix = auth->add_subcommand("fix", "Reset a core after a vendor fix");
  a_fix->add_option("core", fix_core, "Core id")->required();
  a_fix->add_option("--note", fix_note, "Evidence note");
  for (auto* sub : {a_init, a_eval, a_report, a_retry, a_export, a_show, a_fix}) {
    sub->add_option("--db", db_path, "Database file")->required();
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const Scenario s = load_with_overrides(run_opt);
      const RunReport r = run_scenario(s);
      emit(format_report(r), run_opt.out);
      if (!run_opt.events.empty()) write_file(run_opt.events, r.outcome.events.to_text());
      return 0;
    }
    if (*compare) {
      const Scenario s = load_with_overrides(cmp_opt);
      emit(format_comparison(compare_schemes(s)), cmp_opt.out);
      return 0;
    }

    authority::DbLock lock(db_path);
    if (*a_init) {
      if (std::filesystem::exists(db_path)) throw AuthorityError(db_path + " already exists");
      authority::AuthorityDb(init_threshold, init_k).save(db_path);
      std::cout << "created " << db_path << "\n";
      return 0;
    }
    auto db = authority::AuthorityDb::load(db_path);
    if (*a_eval) {
      const auto result = authority::run_evaluation_batch(db, load_batch(batch_path));
      db.save(db_path);
      for (const auto& [core, delta] : result.score_delta) {
        std::cout << "score: " << core << " +" << delta << "\n";
      }
      for (const auto& core : result.infected_cores) std::cout << "infected: " << core << "\n";
      std::cout << show_db(db);
    } else if (*a_report) {
      const auto report = authority::load_report(report_path, db);
      const auto result = authority::ingest_report(db, report);
      db.save(db_path);
      std::cout << "verdict: " << authority::to_string(result.verdict) << "\n";
      const auto* rec = db.find(report.core_id);
      std::cout << "score: " << rec->warning_score << "\n";
      std::cout << "status: " << authority::to_string(rec->status) << "\n";
    } else if (*a_retry) {
      const auto n = authority::retry_pending(db);
      db.save(db_path);
      std::cout << "resolved: " << n << "\n";
    } else if (*a_export) {
      json weights = json::object();
      for (const auto& [core, w] : authority::export_weights(db)) weights[core] = w;
      const std::string text = json{{"weights", weights}}.dump(2) + "\n";
      emit(text, export_out);
    } else if (*a_show) {
      std::cout << show_db(db);
    } else if (*a_fix) {
      db.vendor_fix(fix_core, fix_note);
      db.save(db_path);
      std::cout << show_db(db);
    }
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const AuthorityError& e) {
    std::cerr << "authority error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
