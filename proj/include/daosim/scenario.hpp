#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "daosim/attacker.hpp"
#include "daosim/engine.hpp"
#include "daosim/node.hpp"
#include "daosim/topology.hpp"
#include "daosim/types.hpp"

namespace daosim {

using Json = nlohmann::ordered_json;

enum class ScenarioKind : std::uint8_t { Rpl, RplUnderAttack, RplSecure };

inline const char* scenario_kind_name(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::Rpl: return "rpl";
    case ScenarioKind::RplUnderAttack: return "rpl_under_attack";
    case ScenarioKind::RplSecure: return "rpl_secure";
  }
  return "?";
}

inline ScenarioKind scenario_kind_from(const std::string& s) {
  if (s == "rpl") return ScenarioKind::Rpl;
  if (s == "rpl_under_attack") return ScenarioKind::RplUnderAttack;
  if (s == "rpl_secure") return ScenarioKind::RplSecure;
  throw ConfigError("scenario: unknown name '" + s +
                    "' (expected rpl, rpl_under_attack or rpl_secure)");
}

struct GridSpec {
  unsigned rows = 4;
  unsigned cols = 4;
  double spacing_m = 20.0;
  double tx_range_m = 30.0;
  bool operator==(const GridSpec&) const = default;
};

struct RandomSpec {
  unsigned n = 16;
  double area_w_m = 100.0;
  double area_h_m = 100.0;
  double tx_range_m = 30.0;
  std::uint64_t seed = 1;
  bool operator==(const RandomSpec&) const = default;
};

struct ExplicitSpec {
  std::vector<Position> positions;
  double tx_range_m = 30.0;
  bool operator==(const ExplicitSpec&) const = default;
};

using TopologySpec = std::variant<GridSpec, RandomSpec, ExplicitSpec>;

inline Topology build_topology(const TopologySpec& spec) {
  if (const auto* g = std::get_if<GridSpec>(&spec))
    return build_grid(g->rows, g->cols, g->spacing_m, g->tx_range_m);
  if (const auto* r = std::get_if<RandomSpec>(&spec))
    return build_random(r->n, r->area_w_m, r->area_h_m, r->tx_range_m, r->seed);
  const auto& e = std::get<ExplicitSpec>(spec);
  if (e.positions.size() < 2)
    throw ConfigError("topology: need at least 2 positions");
  Topology t;
  t.tx_range = e.tx_range_m;
  t.interference_range = 2.0 * e.tx_range_m;
  t.root = 0;
  NodeId id = 0;
  for (const Position& p : e.positions) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || p.x < 0.0 || p.y < 0.0)
      throw ConfigError("topology.positions[" + std::to_string(id) +
                        "]: coordinates must be finite and non-negative");
    t.positions[id++] = p;
  }
  return t;
}

// One experiment configuration: which of the three comparison cases runs,
// over what topology, for how long, with which seeds.
struct Scenario {
  ScenarioKind kind = ScenarioKind::Rpl;
  std::string label;  // row label in reports; defaults to the kind name
  TopologySpec topology = GridSpec{};
  std::optional<AttackConfig> attack;
  std::optional<std::uint32_t> defense_threshold;
  double duration_s = 600.0;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  EngineConfig engine;
  RplConfig rpl;
  AppConfig app;

  bool operator==(const Scenario&) const = default;

  std::string name() const {
    return label.empty() ? scenario_kind_name(kind) : label;
  }
  SimTime duration_us() const { return from_seconds(duration_s); }
};

inline void validate(const Scenario& sc) {
  switch (sc.kind) {
    case ScenarioKind::Rpl:
      if (sc.attack)
        throw ConfigError("scenario 'rpl': attack block must be absent");
      if (sc.defense_threshold)
        throw ConfigError("scenario 'rpl': defense block must be absent");
      break;
    case ScenarioKind::RplUnderAttack:
      if (!sc.attack)
        throw ConfigError("scenario 'rpl_under_attack': attack block required");
      if (sc.defense_threshold)
        throw ConfigError(
            "scenario 'rpl_under_attack': defense block must be absent");
      break;
    case ScenarioKind::RplSecure:
      if (!sc.attack)
        throw ConfigError("scenario 'rpl_secure': attack block required");
      if (!sc.defense_threshold)
        throw ConfigError("scenario 'rpl_secure': defense block required");
      break;
  }
  if (sc.defense_threshold && *sc.defense_threshold == 0)
    throw ConfigError("defense.threshold: must be >= 1");
  if (sc.duration_s <= 0.0) throw ConfigError("duration_s: must be > 0");
  if (sc.seeds.empty()) throw ConfigError("seeds: must not be empty");
  if (sc.engine.rx_success < 0.0 || sc.engine.rx_success > 1.0)
    throw ConfigError("engine.rx_success: must be in [0, 1]");
  if (sc.engine.data_queue_cap == 0)
    throw ConfigError("engine.data_queue_cap: must be >= 1");
  if (sc.engine.radio_bps == 0) throw ConfigError("engine.radio_bps: must be > 0");
  if (sc.attack) {
    if (sc.attack->replay_interval_s <= 0.0)
      throw ConfigError("attack.replay_interval_s: must be > 0");
    if (sc.attack->mode == AttackMode::ForeignPrefix && !sc.attack->victim_id)
      throw ConfigError("attack.victim_id: required in foreign_prefix mode");
  }
  // Engine re-validates attacker/victim ids against the built topology.
}

// --- JSON ---------------------------------------------------------------

namespace detail {

inline void check_keys(const Json& j, const std::set<std::string>& allowed,
                       const std::string& ctx) {
  if (!j.is_object()) throw ConfigError(ctx + ": expected an object");
  for (const auto& kv : j.items())
    if (allowed.count(kv.key()) == 0)
      throw ConfigError(ctx + ": unknown key '" + kv.key() + "'");
}

template <typename T>
T get_or(const Json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(key + ": wrong type");
  }
}

template <typename T>
T require(const Json& j, const std::string& key, const std::string& ctx) {
  if (!j.contains(key)) throw ConfigError(ctx + ": missing key '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(ctx + "." + key + ": wrong type");
  }
}

}  // namespace detail

inline Json to_json(const TopologySpec& spec) {
  Json j;
  if (const auto* g = std::get_if<GridSpec>(&spec)) {
    j["kind"] = "grid";
    j["rows"] = g->rows;
    j["cols"] = g->cols;
    j["spacing_m"] = g->spacing_m;
    j["tx_range_m"] = g->tx_range_m;
  } else if (const auto* r = std::get_if<RandomSpec>(&spec)) {
    j["kind"] = "random";
    j["n"] = r->n;
    j["area_w_m"] = r->area_w_m;
    j["area_h_m"] = r->area_h_m;
    j["tx_range_m"] = r->tx_range_m;
    j["seed"] = r->seed;
  } else {
    const auto& e = std::get<ExplicitSpec>(spec);
    j["kind"] = "explicit";
    Json pts = Json::array();
    for (const Position& p : e.positions) pts.push_back(Json::array({p.x, p.y}));
    j["positions"] = pts;
    j["tx_range_m"] = e.tx_range_m;
  }
  return j;
}

inline TopologySpec topology_spec_from_json(const Json& j) {
  std::string kind = detail::require<std::string>(j, "kind", "topology");
  if (kind == "grid") {
    detail::check_keys(j, {"kind", "rows", "cols", "spacing_m", "tx_range_m"},
                       "topology");
    GridSpec g;
    g.rows = detail::get_or<unsigned>(j, "rows", g.rows);
    g.cols = detail::get_or<unsigned>(j, "cols", g.cols);
    g.spacing_m = detail::get_or<double>(j, "spacing_m", g.spacing_m);
    g.tx_range_m = detail::get_or<double>(j, "tx_range_m", g.tx_range_m);
    return g;
  }
  if (kind == "random") {
    detail::check_keys(
        j, {"kind", "n", "area_w_m", "area_h_m", "tx_range_m", "seed"},
        "topology");
    RandomSpec r;
    r.n = detail::get_or<unsigned>(j, "n", r.n);
    r.area_w_m = detail::get_or<double>(j, "area_w_m", r.area_w_m);
    r.area_h_m = detail::get_or<double>(j, "area_h_m", r.area_h_m);
    r.tx_range_m = detail::get_or<double>(j, "tx_range_m", r.tx_range_m);
    r.seed = detail::get_or<std::uint64_t>(j, "seed", r.seed);
    return r;
  }
  if (kind == "explicit") {
    detail::check_keys(j, {"kind", "positions", "tx_range_m"}, "topology");
    ExplicitSpec e;
    for (const auto& pt : detail::require<Json>(j, "positions", "topology")) {
      if (!pt.is_array() || pt.size() != 2)
        throw ConfigError("topology.positions: each entry must be [x, y]");
      e.positions.push_back(
          Position{pt[0].get<double>(), pt[1].get<double>()});
    }
    e.tx_range_m = detail::get_or<double>(j, "tx_range_m", e.tx_range_m);
    return e;
  }
  throw ConfigError("topology.kind: unknown kind '" + kind + "'");
}

inline Json to_json(const Scenario& sc) {
  Json j;
  j["name"] = scenario_kind_name(sc.kind);
  if (!sc.label.empty()) j["label"] = sc.label;
  j["duration_s"] = sc.duration_s;
  j["seeds"] = sc.seeds;
  j["topology"] = to_json(sc.topology);
  if (sc.attack) {
    Json a;
    a["attacker_id"] = sc.attack->attacker_id;
    a["replay_interval_s"] = sc.attack->replay_interval_s;
    a["mode"] = sc.attack->mode == AttackMode::SelfPrefix ? "self_prefix"
                                                          : "foreign_prefix";
    if (sc.attack->victim_id) a["victim_id"] = *sc.attack->victim_id;
    j["attack"] = a;
  }
  if (sc.defense_threshold)
    j["defense"] = Json{{"threshold", *sc.defense_threshold}};
  j["engine"] = Json{{"rx_success", sc.engine.rx_success},
                     {"radio_bps", sc.engine.radio_bps},
                     {"proc_delay_ms", to_ms(sc.engine.proc_delay_us)},
                     {"dao_service_ms", to_ms(sc.engine.dao_service_us)},
                     {"data_queue_cap", sc.engine.data_queue_cap},
                     {"check_invariants", sc.engine.check_invariants}};
  j["rpl"] = Json{{"root_rank", sc.rpl.root_rank},
                  {"rank_step", sc.rpl.rank_step},
                  {"trickle_imin_s", to_seconds(sc.rpl.trickle_imin_us)},
                  {"trickle_doublings", sc.rpl.trickle_doublings},
                  {"trickle_k", sc.rpl.trickle_k},
                  {"dao_delay_s", to_seconds(sc.rpl.dao_delay_us)},
                  {"dis_interval_s", to_seconds(sc.rpl.dis_interval_us)},
                  {"dis_start_jitter_s", to_seconds(sc.rpl.dis_start_jitter_us)}};
  j["app"] = Json{{"enabled", sc.app.enabled},
                  {"period_s", to_seconds(sc.app.period_us)},
                  {"warmup_s", to_seconds(sc.app.warmup_us)},
                  {"cooldown_s", to_seconds(sc.app.cooldown_us)},
                  {"payload_bits", sc.app.payload_bits}};
  return j;
}

inline Scenario scenario_from_json(const Json& j) {
  detail::check_keys(j,
                     {"name", "label", "duration_s", "seeds", "topology",
                      "attack", "defense", "engine", "rpl", "app"},
                     "scenario");
  Scenario sc;
  sc.kind = scenario_kind_from(detail::require<std::string>(j, "name", "scenario"));
  sc.label = detail::get_or<std::string>(j, "label", "");
  sc.duration_s = detail::get_or<double>(j, "duration_s", sc.duration_s);
  sc.seeds = detail::get_or<std::vector<std::uint64_t>>(j, "seeds", sc.seeds);
  if (j.contains("topology")) sc.topology = topology_spec_from_json(j["topology"]);

  if (j.contains("attack")) {
    const Json& a = j["attack"];
    detail::check_keys(
        a, {"attacker_id", "replay_interval_s", "mode", "victim_id"}, "attack");
    AttackConfig cfg;
    cfg.attacker_id = detail::require<NodeId>(a, "attacker_id", "attack");
    cfg.replay_interval_s =
        detail::get_or<double>(a, "replay_interval_s", cfg.replay_interval_s);
    std::string mode = detail::get_or<std::string>(a, "mode", "self_prefix");
    if (mode == "self_prefix")
      cfg.mode = AttackMode::SelfPrefix;
    else if (mode == "foreign_prefix")
      cfg.mode = AttackMode::ForeignPrefix;
    else
      throw ConfigError("attack.mode: unknown mode '" + mode + "'");
    if (a.contains("victim_id"))
      cfg.victim_id = detail::require<NodeId>(a, "victim_id", "attack");
    sc.attack = cfg;
  }

  if (j.contains("defense")) {
    detail::check_keys(j["defense"], {"threshold"}, "defense");
    sc.defense_threshold =
        detail::require<std::uint32_t>(j["defense"], "threshold", "defense");
  }

  if (j.contains("engine")) {
    const Json& e = j["engine"];
    detail::check_keys(e,
                       {"rx_success", "radio_bps", "proc_delay_ms",
                        "dao_service_ms", "data_queue_cap", "check_invariants"},
                       "engine");
    sc.engine.rx_success =
        detail::get_or<double>(e, "rx_success", sc.engine.rx_success);
    sc.engine.radio_bps =
        detail::get_or<std::uint64_t>(e, "radio_bps", sc.engine.radio_bps);
    sc.engine.proc_delay_us = from_seconds(
        detail::get_or<double>(e, "proc_delay_ms", to_ms(sc.engine.proc_delay_us)) /
        1000.0);
    sc.engine.dao_service_us = from_seconds(
        detail::get_or<double>(e, "dao_service_ms", to_ms(sc.engine.dao_service_us)) /
        1000.0);
    sc.engine.data_queue_cap = detail::get_or<std::uint32_t>(
        e, "data_queue_cap", sc.engine.data_queue_cap);
    sc.engine.check_invariants =
        detail::get_or<bool>(e, "check_invariants", sc.engine.check_invariants);
  }

  if (j.contains("rpl")) {
    const Json& r = j["rpl"];
    detail::check_keys(r,
                       {"root_rank", "rank_step", "trickle_imin_s",
                        "trickle_doublings", "trickle_k", "dao_delay_s",
                        "dis_interval_s", "dis_start_jitter_s"},
                       "rpl");
    sc.rpl.root_rank = detail::get_or<Rank>(r, "root_rank", sc.rpl.root_rank);
    sc.rpl.rank_step = detail::get_or<Rank>(r, "rank_step", sc.rpl.rank_step);
    sc.rpl.trickle_imin_us = from_seconds(detail::get_or<double>(
        r, "trickle_imin_s", to_seconds(sc.rpl.trickle_imin_us)));
    sc.rpl.trickle_doublings = detail::get_or<unsigned>(
        r, "trickle_doublings", sc.rpl.trickle_doublings);
    sc.rpl.trickle_k = detail::get_or<unsigned>(r, "trickle_k", sc.rpl.trickle_k);
    sc.rpl.dao_delay_us = from_seconds(
        detail::get_or<double>(r, "dao_delay_s", to_seconds(sc.rpl.dao_delay_us)));
    sc.rpl.dis_interval_us = from_seconds(detail::get_or<double>(
        r, "dis_interval_s", to_seconds(sc.rpl.dis_interval_us)));
    sc.rpl.dis_start_jitter_us = from_seconds(detail::get_or<double>(
        r, "dis_start_jitter_s", to_seconds(sc.rpl.dis_start_jitter_us)));
  }

  if (j.contains("app")) {
    const Json& a = j["app"];
    detail::check_keys(
        a, {"enabled", "period_s", "warmup_s", "cooldown_s", "payload_bits"},
        "app");
    sc.app.enabled = detail::get_or<bool>(a, "enabled", sc.app.enabled);
    sc.app.period_us = from_seconds(
        detail::get_or<double>(a, "period_s", to_seconds(sc.app.period_us)));
    sc.app.warmup_us = from_seconds(
        detail::get_or<double>(a, "warmup_s", to_seconds(sc.app.warmup_us)));
    sc.app.cooldown_us = from_seconds(
        detail::get_or<double>(a, "cooldown_s", to_seconds(sc.app.cooldown_us)));
    sc.app.payload_bits =
        detail::get_or<std::uint32_t>(a, "payload_bits", sc.app.payload_bits);
  }

  validate(sc);
  return sc;
}

inline std::string serialize_scenario(const Scenario& sc) {
  return to_json(sc).dump(2) + "\n";
}

inline Scenario parse_scenario(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("scenario: invalid JSON: ") + e.what());
  }
  return scenario_from_json(j);
}

// Builds the simulator for one (scenario, seed) run.
inline Simulator make_simulator(const Scenario& sc, std::uint64_t seed,
                                bool record_trace = false) {
  validate(sc);
  EngineConfig ecfg = sc.engine;
  ecfg.record_trace = record_trace;
  return Simulator(build_topology(sc.topology), seed, sc.duration_us(), ecfg,
                   sc.rpl, sc.app, sc.attack, sc.defense_threshold);
}

}  // namespace daosim
