#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "daosim/metrics.hpp"
#include "daosim/scenario.hpp"
#include "daosim/types.hpp"

namespace daosim {

// One CSV row per run.
struct RunRow {
  std::string scenario;
  std::uint64_t seed = 0;
  double interval_s = 0.0;  // 0 means no attacker
  std::optional<double> pdr;
  std::optional<double> ae2ed_ms;
  double throughput_bps = 0.0;
  std::uint64_t dao_tx = 0;
  std::uint64_t blacklist_count = 0;

  bool operator==(const RunRow&) const = default;
};

struct ExperimentResult {
  Scenario scenario;
  std::vector<RunRow> rows;
  std::vector<RunMetrics> runs;  // aligned with rows
  SummaryStats pdr_stats;
  SummaryStats ae2ed_stats;
  SummaryStats throughput_stats;
  SummaryStats dao_tx_stats;
  std::uint64_t blacklist_total = 0;
  std::uint64_t defense_table_bytes_max = 0;
};

inline RunRow make_row(const Scenario& sc, std::uint64_t seed,
                       const RunMetrics& m) {
  RunRow row;
  row.scenario = sc.name();
  row.seed = seed;
  row.interval_s = sc.attack ? sc.attack->replay_interval_s : 0.0;
  row.pdr = pdr(m);
  row.ae2ed_ms = ae2ed_ms(m);
  row.throughput_bps = throughput_bps(m);
  row.dao_tx = control_tx_of(m, MsgKind::Dao);
  row.blacklist_count = m.blacklist_events.size();
  return row;
}

// Runs the scenario once per seed. Runs share nothing; output order is
// by seed list order regardless of how they would be scheduled.
inline ExperimentResult run_experiment(const Scenario& sc) {
  validate(sc);
  ExperimentResult res;
  res.scenario = sc;
  std::vector<double> pdrs, delays, throughputs, dao_txs;
  for (std::uint64_t seed : sc.seeds) {
    Simulator sim = make_simulator(sc, seed);
    RunMetrics m = sim.run();
    res.rows.push_back(make_row(sc, seed, m));
    res.blacklist_total += m.blacklist_events.size();
    res.defense_table_bytes_max =
        std::max(res.defense_table_bytes_max, m.defense_table_bytes_max);
    if (auto p = pdr(m)) pdrs.push_back(*p);
    if (auto d = ae2ed_ms(m)) delays.push_back(*d);
    throughputs.push_back(throughput_bps(m));
    dao_txs.push_back(static_cast<double>(control_tx_of(m, MsgKind::Dao)));
    res.runs.push_back(std::move(m));
  }
  res.pdr_stats = summarize(pdrs);
  res.ae2ed_stats = summarize(delays);
  res.throughput_stats = summarize(throughputs);
  res.dao_tx_stats = summarize(dao_txs);
  return res;
}

// Threshold calibration: run attack-free seeds and take the largest
// originated-DAO count any parent saw from a single child, scaled by a
// safety factor.
inline std::uint32_t calibrate_threshold(const Scenario& base,
                                         const std::vector<std::uint64_t>& seeds,
                                         double safety = 2.0) {
  if (base.attack)
    throw ConfigError("calibrate: scenario must not contain an attacker");
  if (seeds.empty()) throw ConfigError("calibrate: need at least one seed");
  if (safety < 1.0) throw ConfigError("calibrate: safety must be >= 1");
  Scenario sc = base;
  sc.defense_threshold.reset();
  std::uint64_t max_seen = 0;
  for (std::uint64_t seed : seeds) {
    Simulator sim = make_simulator(sc, seed);
    RunMetrics m = sim.run();
    for (const auto& [pair, count] : m.originated_dao_seen)
      max_seen = std::max(max_seen, count);
  }
  return static_cast<std::uint32_t>(
      std::max<std::uint64_t>(1, static_cast<std::uint64_t>(
                                     std::ceil(max_seen * safety))));
}

// --- report emission -----------------------------------------------------

namespace detail {

inline std::string fmt(double v, const char* spec = "%.6f") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

inline std::string fmt_opt(const std::optional<double>& v,
                           const char* spec = "%.6f") {
  return v ? fmt(*v, spec) : std::string();
}

}  // namespace detail

inline std::string csv_header() {
  return "scenario,seed,interval,pdr,ae2ed_ms,throughput_bps,dao_tx,"
         "blacklist_count\n";
}

inline std::string to_csv_line(const RunRow& r) {
  return r.scenario + "," + std::to_string(r.seed) + "," +
         detail::fmt(r.interval_s, "%g") + "," + detail::fmt_opt(r.pdr) + "," +
         detail::fmt_opt(r.ae2ed_ms, "%.3f") + "," +
         detail::fmt(r.throughput_bps, "%.3f") + "," + std::to_string(r.dao_tx) +
         "," + std::to_string(r.blacklist_count) + "\n";
}

inline std::string to_csv(const std::vector<RunRow>& rows) {
  std::string out = csv_header();
  for (const RunRow& r : rows) out += to_csv_line(r);
  return out;
}

inline Json stats_json(const SummaryStats& s) {
  Json j;
  j["mean"] = s.mean;
  if (s.half_width_95)
    j["half_width_95"] = *s.half_width_95;
  else
    j["half_width_95"] = nullptr;
  j["n"] = s.n;
  return j;
}

inline Json experiment_json(const ExperimentResult& res) {
  Json j;
  j["scenario"] = res.scenario.name();
  j["interval_s"] =
      res.scenario.attack ? res.scenario.attack->replay_interval_s : 0.0;
  j["pdr"] = stats_json(res.pdr_stats);
  j["ae2ed_ms"] = stats_json(res.ae2ed_stats);
  j["throughput_bps"] = stats_json(res.throughput_stats);
  j["dao_tx"] = stats_json(res.dao_tx_stats);
  j["blacklist_events_total"] = res.blacklist_total;
  j["defense_table_bytes_max"] = res.defense_table_bytes_max;
  return j;
}

inline void write_file(const std::filesystem::path& path,
                       const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw SimError("cannot write " + path.string());
  os << content;
  if (!os) throw SimError("short write to " + path.string());
}

// Writes runs.csv and summary.json. Re-emission from the same rows is
// byte-identical.
inline void emit_report(const std::vector<RunRow>& rows, const Json& summary,
                        const std::filesystem::path& out_dir) {
  if (rows.empty()) throw ConfigError("emit_report: no completed runs");
  std::filesystem::create_directories(out_dir);
  write_file(out_dir / "runs.csv", to_csv(rows));
  write_file(out_dir / "summary.json", summary.dump(2) + "\n");
}

// --- the three-way comparison suite ---------------------------------------

struct SuiteParams {
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  double duration_s = 600.0;
  std::vector<double> intervals_s = {1.0, 2.0, 4.0, 8.0};
  std::uint32_t threshold = 20;
  GridSpec grid;
  bool include_foreign_prefix_run = true;
};

struct SuiteResult {
  std::vector<ExperimentResult> experiments;
  std::vector<RunRow> rows;
  Json summary;
};

inline Scenario suite_baseline(const SuiteParams& p) {
  Scenario sc;
  sc.kind = ScenarioKind::Rpl;
  sc.topology = p.grid;
  sc.duration_s = p.duration_s;
  sc.seeds = p.seeds;
  return sc;
}

inline Scenario suite_attack(const SuiteParams& p, double interval_s,
                             bool defended, AttackMode mode = AttackMode::SelfPrefix) {
  Scenario sc = suite_baseline(p);
  sc.kind = defended ? ScenarioKind::RplSecure : ScenarioKind::RplUnderAttack;
  Topology topo = build_topology(sc.topology);
  AttackConfig attack;
  attack.attacker_id = topo.deepest_node();
  attack.replay_interval_s = interval_s;
  attack.mode = mode;
  if (mode == AttackMode::ForeignPrefix) {
    // victim: the deepest legitimate node that is not the attacker
    auto depths = topo.hop_depths();
    NodeId victim = topo.root;
    unsigned best = 0;
    for (const auto& [id, d] : depths)
      if (id != attack.attacker_id && id != topo.root &&
          (d > best || (d == best && id > victim))) {
        victim = id;
        best = d;
      }
    attack.victim_id = victim;
    sc.label = std::string(scenario_kind_name(sc.kind)) + "_foreign";
  }
  sc.attack = attack;
  if (defended) sc.defense_threshold = p.threshold;
  return sc;
}

inline SuiteResult run_suite(const SuiteParams& p) {
  SuiteResult out;
  auto add = [&](const Scenario& sc) {
    ExperimentResult res = run_experiment(sc);
    for (const RunRow& r : res.rows) out.rows.push_back(r);
    out.experiments.push_back(std::move(res));
  };

  add(suite_baseline(p));
  for (double interval : p.intervals_s) add(suite_attack(p, interval, false));
  for (double interval : p.intervals_s) add(suite_attack(p, interval, true));
  std::optional<std::size_t> foreign_idx;
  if (p.include_foreign_prefix_run) {
    add(suite_attack(p, p.intervals_s.front(), true, AttackMode::ForeignPrefix));
    foreign_idx = out.experiments.size() - 1;
  }

  Json summary;
  summary["experiments"] = Json::array();
  for (const ExperimentResult& res : out.experiments)
    summary["experiments"].push_back(experiment_json(res));
  if (foreign_idx) {
    const ExperimentResult& f = out.experiments[*foreign_idx];
    Json lim;
    lim["blacklist_events_total"] = f.blacklist_total;
    lim["bypasses_defense"] = f.blacklist_total == 0;
    lim["note"] =
        "replayed DAOs carrying a foreign prefix are treated as forwarded "
        "traffic and never counted against the relay, so this attack variant "
        "is not blacklisted";
    summary["known_limitations"] = Json{{"foreign_prefix_replay", lim}};
  }
  out.summary = summary;
  return out;
}

}  // namespace daosim
