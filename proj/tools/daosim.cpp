// Command-line front end: run one scenario, run the full three-way
// comparison suite, calibrate the detection threshold, or dump a trace.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "daosim/daosim.hpp"

namespace {

using namespace daosim;

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open scenario file: " + path);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

struct Overrides {
  std::vector<std::uint64_t> seeds;
  double duration_s = 0.0;
  double replay_interval_s = 0.0;
  std::uint32_t threshold = 0;
};

void apply_overrides(Scenario& sc, const Overrides& o) {
  if (!o.seeds.empty()) sc.seeds = o.seeds;
  if (o.duration_s > 0.0) sc.duration_s = o.duration_s;
  if (o.replay_interval_s > 0.0) {
    if (!sc.attack)
      throw ConfigError("--replay-interval: scenario has no attack block");
    sc.attack->replay_interval_s = o.replay_interval_s;
  }
  if (o.threshold > 0) {
    if (!sc.defense_threshold)
      throw ConfigError("--threshold: scenario has no defense block");
    sc.defense_threshold = o.threshold;
  }
  validate(sc);
}

void print_experiment(const ExperimentResult& res) {
  auto show = [](const char* name, const SummaryStats& s, const char* unit) {
    if (s.n == 0) return;
    std::printf("  %-14s %12.4f", name, s.mean);
    if (s.half_width_95) std::printf(" +/- %.4f", *s.half_width_95);
    std::printf(" %s (n=%zu)\n", unit, s.n);
  };
  std::printf("%s", res.scenario.name().c_str());
  if (res.scenario.attack)
    std::printf("  (replay interval %gs)", res.scenario.attack->replay_interval_s);
  std::printf("\n");
  show("pdr", res.pdr_stats, "");
  show("ae2ed", res.ae2ed_stats, "ms");
  show("throughput", res.throughput_stats, "bps");
  show("dao_tx", res.dao_tx_stats, "frames");
  std::printf("  %-14s %12llu\n", "blacklists",
              static_cast<unsigned long long>(res.blacklist_total));
  if (res.defense_table_bytes_max > 0)
    std::printf("  %-14s %12llu bytes/node max\n", "defense_tables",
                static_cast<unsigned long long>(res.defense_table_bytes_max));
}

int cmd_run(const std::string& file, const Overrides& o,
            const std::string& out_dir) {
  Scenario sc = parse_scenario(read_file(file));
  apply_overrides(sc, o);
  ExperimentResult res = run_experiment(sc);
  Json summary;
  summary["experiments"] = Json::array({experiment_json(res)});
  emit_report(res.rows, summary, out_dir);
  print_experiment(res);
  std::printf("wrote %s/runs.csv and summary.json\n", out_dir.c_str());
  return 0;
}

int cmd_suite(SuiteParams params, const std::string& out_dir) {
  SuiteResult res = run_suite(params);
  emit_report(res.rows, res.summary, out_dir);
  for (const ExperimentResult& e : res.experiments) print_experiment(e);
  std::printf("wrote %s/runs.csv and summary.json (%zu runs)\n",
              out_dir.c_str(), res.rows.size());
  return 0;
}

int cmd_calibrate(const std::string& file, std::vector<std::uint64_t> seeds,
                  double safety) {
  Scenario sc = parse_scenario(read_file(file));
  if (seeds.empty()) seeds = sc.seeds;
  std::uint32_t t = calibrate_threshold(sc, seeds, safety);
  std::printf("recommended DAO threshold: %u (safety factor %g, %zu seeds)\n",
              t, safety, seeds.size());
  return 0;
}

int cmd_trace(const std::string& file, std::uint64_t seed, double duration_s,
              const std::string& out, bool decisions) {
  Scenario sc = parse_scenario(read_file(file));
  if (duration_s > 0.0) sc.duration_s = duration_s;
  Simulator sim = make_simulator(sc, seed, /*record_trace=*/true);
  sim.run();
  std::string text = sim.trace_text();
  if (decisions) {
    std::ostringstream os;
    for (const DefenseLogRecord& r : sim.defense_log())
      os << r.at << ' ' << r.node << ' ' << r.sender << ' ' << r.prefix << ' '
         << decision_name(r.decision) << '\n';
    text += os.str();
  }
  if (out.empty()) {
    std::fwrite(text.data(), 1, text.size(), stdout);
  } else {
    write_file(out, text);
    std::printf("wrote %s (%zu records)\n", out.c_str(),
                sim.trace_records().size());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deterministic RPL DAO-flood attack/defense simulator"};
  app.require_subcommand(1);

  Overrides o;
  std::string scenario_file;
  std::string out_dir = "out";
  std::uint64_t one_seed = 0;
  bool have_one_seed = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--seeds", o.seeds, "comma-separated seed list")
        ->delimiter(',');
    cmd->add_option_function<std::uint64_t>(
           "--seed",
           [&](std::uint64_t s) {
             one_seed = s;
             have_one_seed = true;
           },
           "single seed (overrides --seeds)");
    cmd->add_option("--duration", o.duration_s, "simulated seconds");
    cmd->add_option("--out-dir", out_dir, "output directory");
  };

  CLI::App* run = app.add_subcommand("run", "run one scenario file");
  run->add_option("scenario", scenario_file, "scenario JSON file")->required();
  add_common(run);
  run->add_option("--replay-interval", o.replay_interval_s,
                  "override attack replay interval, seconds");
  run->add_option("--threshold", o.threshold, "override defense threshold");

  SuiteParams sp;
  CLI::App* suite = app.add_subcommand(
      "suite", "baseline vs attack vs defended, all replay intervals");
  suite->add_option("--seeds", sp.seeds, "comma-separated seed list")
      ->delimiter(',');
  suite->add_option("--duration", sp.duration_s, "simulated seconds");
  suite->add_option("--threshold", sp.threshold, "defense threshold");
  suite->add_option("--intervals", sp.intervals_s,
                    "replay intervals, seconds")
      ->delimiter(',');
  suite->add_option("--out-dir", out_dir, "output directory");
  suite->add_flag("!--no-foreign", sp.include_foreign_prefix_run,
                  "skip the foreign-prefix exposure run");

  std::vector<std::uint64_t> cal_seeds;
  double safety = 2.0;
  CLI::App* cal = app.add_subcommand(
      "calibrate", "derive the DAO threshold from attack-free runs");
  cal->add_option("scenario", scenario_file, "attack-free scenario JSON file")
      ->required();
  cal->add_option("--seeds", cal_seeds, "comma-separated seed list")
      ->delimiter(',');
  cal->add_option("--safety", safety, "safety multiplier");

  std::uint64_t trace_seed = 1;
  double trace_duration = 0.0;
  std::string trace_out;
  bool trace_decisions = false;
  CLI::App* trace = app.add_subcommand("trace", "dump one run's event trace");
  trace->add_option("scenario", scenario_file, "scenario JSON file")->required();
  trace->add_option("--seed", trace_seed, "seed");
  trace->add_option("--duration", trace_duration, "simulated seconds");
  trace->add_option("--out", trace_out, "output file (default stdout)");
  trace->add_flag("--decisions", trace_decisions,
                  "append the defense decision log");

  CLI11_PARSE(app, argc, argv);

  try {
    if (have_one_seed) o.seeds = {one_seed};
    if (run->parsed()) return cmd_run(scenario_file, o, out_dir);
    if (suite->parsed()) return cmd_suite(sp, out_dir);
    if (cal->parsed()) return cmd_calibrate(scenario_file, cal_seeds, safety);
    if (trace->parsed())
      return cmd_trace(scenario_file, trace_seed, trace_duration, trace_out,
                       trace_decisions);
  } catch (const daosim::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
