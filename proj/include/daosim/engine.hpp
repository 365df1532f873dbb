#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "daosim/attacker.hpp"
#include "daosim/defense.hpp"
#include "daosim/event_queue.hpp"
#include "daosim/messages.hpp"
#include "daosim/metrics.hpp"
#include "daosim/node.hpp"
#include "daosim/topology.hpp"
#include "daosim/types.hpp"

namespace daosim {

// Radio, queueing and instrumentation knobs. Per-hop latency is the
// on-air time (size_bits / radio_bps) plus a service delay at the
// receiver; each node serves one frame at a time, so backlog translates
// into queueing delay. DAO handling (route maintenance plus the ACK and
// relay it triggers) is far more expensive for a constrained node than
// shuffling a data frame onward, which is what lets a DAO flood starve
// data traffic: dao_service_us is that aggregate cost. Control frames
// are never dropped by the queue; data frames are dropped when more than
// data_queue_cap of them are waiting or in service at the receiver.
struct EngineConfig {
  double rx_success = 1.0;  // per-delivery reception probability
  std::uint64_t radio_bps = 250000;
  SimTime proc_delay_us = 2 * us_per_ms;  // non-DAO service time
  SimTime dao_service_us = 600 * us_per_ms;
  std::uint32_t data_queue_cap = 2;
  bool check_invariants = true;
  bool record_trace = false;

  bool operator==(const EngineConfig&) const = default;
};

// Upward application traffic: every non-root node sends one packet to
// the root each period, phase-shifted per node from the run's seed.
// Generation stops cooldown_us before the end so late packets are not
// cut off in flight.
struct AppConfig {
  bool enabled = true;
  SimTime period_us = 10 * us_per_s;
  SimTime warmup_us = 30 * us_per_s;
  SimTime cooldown_us = 5 * us_per_s;
  std::uint32_t payload_bits = 256;

  bool operator==(const AppConfig&) const = default;
};

struct TraceRecord {
  SimTime at = 0;
  NodeId node = 0;
  std::string kind;
  std::string detail;

  bool operator==(const TraceRecord&) const = default;
};

struct DefenseLogRecord {
  SimTime at = 0;
  NodeId node = 0;
  NodeId sender = 0;
  GlobalId prefix = 0;
  DaoDecision decision = DaoDecision::Discard;
};

// Deterministic single-run simulator: one event queue, one seeded
// generator, node state machines wired through a UDGM radio.
class Simulator {
 public:
  Simulator(Topology topo, std::uint64_t seed, SimTime duration_us,
            EngineConfig ecfg = {}, RplConfig rcfg = {}, AppConfig acfg = {},
            std::optional<AttackConfig> attack = std::nullopt,
            std::optional<std::uint32_t> defense_threshold = std::nullopt)
      : topo_(std::move(topo)),
        ecfg_(ecfg),
        acfg_(acfg),
        duration_us_(duration_us),
        rng_(seed) {
    validate_ids();
    if (attack) validate_attack(*attack);

    nodes_.reserve(topo_.size());
    for (NodeId id = 0; id < topo_.size(); ++id) {
      nodes_.emplace_back(id, topo_.root, rcfg);
      if (defense_threshold)
        nodes_.back().defense = defense_init(*defense_threshold);
    }
    if (attack) nodes_[attack->attacker_id].attack = attack;

    servers_.resize(nodes_.size());

    // App phases first, then node start timers: one fixed draw order.
    std::vector<SimTime> phase(nodes_.size(), 0);
    if (acfg_.enabled)
      for (NodeId id = 0; id < nodes_.size(); ++id)
        if (id != topo_.root) phase[id] = rand_range(rng_, 0, acfg_.period_us);
    for (NodeId id = 0; id < nodes_.size(); ++id)
      apply(id, nodes_[id].start(now(), rng_));
    if (acfg_.enabled) {
      for (NodeId id = 0; id < nodes_.size(); ++id) {
        if (id == topo_.root) continue;
        SimTime first = acfg_.warmup_us + phase[id];
        if (first <= app_end())
          queue_.schedule(first, AppDataGen{id, std::nullopt});
      }
    }
  }

  SimTime now() const { return queue_.now(); }
  SimTime app_end() const {
    return duration_us_ > acfg_.cooldown_us ? duration_us_ - acfg_.cooldown_us
                                            : 0;
  }

  void schedule(SimTime at, EventBody body) { queue_.schedule(at, std::move(body)); }

  // Test hook: inject one data packet (src -> dst) at a given time.
  void schedule_data(SimTime at, NodeId src, NodeId dst) {
    queue_.schedule(at, AppDataGen{src, dst});
  }

  // Process events in (time, schedule order) until the queue drains or
  // the next event lies beyond t_end. Whatever is still queued then is
  // in flight.
  RunMetrics run_until(SimTime t_end) {
    while (!queue_.empty() && queue_.next_at() <= t_end) {
      SimEvent ev = queue_.pop();
      std::visit([&](auto&& body) { handle(body); }, ev.body);
      if (ecfg_.check_invariants) check_invariants();
    }
    metrics_.duration_us = t_end;
    finalize_metrics();
    return metrics_;
  }

  RunMetrics run() { return run_until(duration_us_); }

  // Schedules one delivery per receiver at now + on-air time; broadcast
  // reaches every UDGM neighbor, unicast only its addressee.
  void transmit(const Frame& f) {
    MsgKind kind = kind_of(f.payload);
    trace(f.src, "tx", frame_detail(f));
    if (kind != MsgKind::Data) ++metrics_.control_tx[kind];
    if (f.tag) {
      ++metrics_.dao_tx_by_origination[*f.tag];
      if (f.tag->malicious) {
        ++metrics_.malicious_dao_tx;
        if (f.src != f.tag->origin) ++metrics_.malicious_dao_tx_forwarded;
      }
    }
    SimTime arrival = now() + air_time(f);
    if (f.dst == kBroadcast) {
      for (NodeId nb : topo_.neighbors(f.src)) deliver_copy(f, nb, arrival);
    } else {
      if (!topo_.contains(f.dst) || !topo_.in_range(f.src, f.dst)) {
        ++metrics_.link_failures;
        if (kind == MsgKind::Data)
          drop_data(f.src, std::get<DataPacket>(f.payload), "noroute");
        return;
      }
      deliver_copy(f, f.dst, arrival);
    }
  }

  const RplNode& node(NodeId id) const { return nodes_.at(id); }
  RplNode& node(NodeId id) { return nodes_.at(id); }
  std::size_t node_count() const { return nodes_.size(); }
  const Topology& topology() const { return topo_; }
  const RunMetrics& metrics() const { return metrics_; }
  const std::vector<TraceRecord>& trace_records() const { return trace_; }
  const std::vector<DefenseLogRecord>& defense_log() const {
    return defense_log_;
  }

  bool all_joined() const {
    for (const RplNode& n : nodes_)
      if (!n.joined) return false;
    return true;
  }

  // time node event-kind message-kind, one record per line
  std::string trace_text() const {
    std::ostringstream os;
    for (const TraceRecord& r : trace_)
      os << r.at << ' ' << r.node << ' ' << r.kind << ' ' << r.detail << '\n';
    return os.str();
  }

 private:
  struct Server {
    SimTime busy_until = 0;
    std::uint32_t data_in_system = 0;
  };

  void validate_ids() const {
    if (topo_.size() < 2)
      throw ConfigError("engine: topology needs at least 2 nodes");
    NodeId expect = 0;
    for (const auto& [id, pos] : topo_.positions) {
      (void)pos;
      if (id != expect++)
        throw ConfigError("engine: node ids must be contiguous from 0");
    }
    if (topo_.root != 0)
      throw ConfigError("engine: root must be node 0");
  }

  void validate_attack(const AttackConfig& a) const {
    if (!topo_.contains(a.attacker_id))
      throw ConfigError("attack: attacker_id not in topology");
    if (a.attacker_id == topo_.root)
      throw ConfigError("attack: attacker must be a non-root node");
    if (a.replay_interval_s <= 0.0)
      throw ConfigError("attack: replay_interval_s must be > 0");
    if (a.mode == AttackMode::ForeignPrefix) {
      if (!a.victim_id) throw ConfigError("attack: foreign mode needs victim_id");
      if (!topo_.contains(*a.victim_id))
        throw ConfigError("attack: victim_id not in topology");
      if (*a.victim_id == a.attacker_id || *a.victim_id == topo_.root)
        throw ConfigError("attack: victim must be another non-root node");
    }
  }

  SimTime air_time(const Frame& f) const {
    return static_cast<SimTime>(f.size_bits) * us_per_s / ecfg_.radio_bps;
  }

  SimTime service_time(const Frame& f) const {
    return kind_of(f.payload) == MsgKind::Dao ? ecfg_.dao_service_us
                                              : ecfg_.proc_delay_us;
  }

  void deliver_copy(const Frame& f, NodeId dst, SimTime arrival) {
    bool is_data = kind_of(f.payload) == MsgKind::Data;
    if (!is_data) ++metrics_.control_copies_sent;
    if (ecfg_.rx_success < 1.0 && rand_unit(rng_) >= ecfg_.rx_success) {
      if (is_data)
        drop_data(dst, std::get<DataPacket>(f.payload), "loss");
      else
        ++metrics_.control_copies_lost;
      return;
    }
    queue_.schedule(arrival, PacketArrival{dst, f});
  }

  void handle(const PacketArrival& ev) {
    const Frame& f = ev.frame;
    RplNode& n = nodes_[ev.dst];
    MsgKind kind = kind_of(f.payload);

    if (kind == MsgKind::Dao) {
      const Dao& dao = std::get<Dao>(f.payload);
      if (dao.prefix == global_of(f.src))
        ++metrics_.originated_dao_seen[{ev.dst, f.src}];
      if (n.defense) {
        DaoDecision d = on_dao_receive(*n.defense, f.src, dao.prefix,
                                       global_of(f.src));
        defense_log_.push_back({now(), ev.dst, f.src, dao.prefix, d});
        note_defense_ops(*n.defense, d);
        if (!decision_forwards(d)) {
          ++metrics_.dao_discarded_by_defense;
          ++metrics_.control_copies_discarded;
          if (d == DaoDecision::BlacklistAndDiscard) {
            metrics_.blacklist_events.push_back({now(), ev.dst, f.src});
            trace(ev.dst, "blacklist", std::to_string(f.src));
          }
          trace(ev.dst, "discard", frame_detail(f));
          return;  // fast path: no queue, no service
        }
      }
    }

    if (kind == MsgKind::Data) {
      Server& s = servers_[ev.dst];
      if (s.data_in_system >= ecfg_.data_queue_cap) {
        drop_data(ev.dst, std::get<DataPacket>(f.payload), "queue");
        return;
      }
      ++s.data_in_system;
    }

    Server& s = servers_[ev.dst];
    SimTime begin = std::max(now(), s.busy_until);
    SimTime done = begin + service_time(f);
    s.busy_until = done;
    queue_.schedule(done, PacketDelivery{ev.dst, f});
  }

  void handle(const PacketDelivery& ev) {
    const Frame& f = ev.frame;
    RplNode& n = nodes_[ev.dst];
    MsgKind kind = kind_of(f.payload);
    trace(ev.dst, "rx", frame_detail(f));
    if (kind == MsgKind::Data)
      --servers_[ev.dst].data_in_system;
    else
      ++metrics_.control_copies_delivered;

    Actions out;
    switch (kind) {
      case MsgKind::Dio:
        out = n.on_dio(now(), rng_, f.src, std::get<Dio>(f.payload));
        break;
      case MsgKind::Dis:
        out = n.on_dis(now(), rng_, f.src);
        break;
      case MsgKind::Dao:
        out = n.on_dao(now(), f.src, std::get<Dao>(f.payload), f.tag);
        break;
      case MsgKind::DaoAck:
        break;  // no retransmission machinery to feed
      case MsgKind::Data:
        out = n.on_data(now(), std::get<DataPacket>(f.payload));
        break;
    }
    apply(ev.dst, out);
  }

  void handle(const TimerFire& ev) {
    trace(ev.node, "timer", timer_name(ev.kind));
    apply(ev.node, nodes_[ev.node].on_timer(now(), rng_, ev.kind, ev.epoch));
  }

  void handle(const AppDataGen& ev) {
    RplNode& n = nodes_[ev.node];
    NodeId dst = ev.dst.value_or(topo_.root);
    bool upward = dst == topo_.root;
    if (n.joined) {
      if (upward)
        ++metrics_.data_sent;
      else
        ++metrics_.down_sent;
      Actions out = n.originate_data(now(), dst, acfg_.payload_bits);
      trace(ev.node, "gen",
            std::string("data:") + std::to_string(ev.node) + ":" +
                std::to_string(n.data_seq));
      apply(ev.node, out);
    }
    // Periodic upward traffic reschedules itself; injected sends do not.
    if (!ev.dst && acfg_.enabled) {
      SimTime next = now() + acfg_.period_us;
      if (next <= app_end()) queue_.schedule(next, AppDataGen{ev.node, std::nullopt});
    }
  }

  void apply(NodeId id, const Actions& out) {
    for (const TimerRequest& t : out.timers)
      queue_.schedule(t.at, TimerFire{id, t.kind, t.epoch});
    for (const Frame& f : out.frames) transmit(f);
    if (out.joined_now) trace(id, "rpl", "join");
    if (out.parent_changed && nodes_[id].preferred_parent)
      trace(id, "rpl",
            "parent:" + std::to_string(*nodes_[id].preferred_parent));
    if (out.delivered) {
      const DataPacket& pkt = *out.delivered;
      if (pkt.dst == topo_.root) {
        ++metrics_.data_delivered;
        metrics_.data_bits_delivered += pkt.payload_bits;
        metrics_.latencies_us.push_back(now() - pkt.gen_time);
      } else {
        ++metrics_.down_delivered;
      }
      trace(id, "deliver",
            "data:" + std::to_string(pkt.src) + ":" + std::to_string(pkt.seq));
    }
    if (out.dropped_noroute) drop_data(id, *out.dropped_noroute, "noroute");
    if (out.dao_dropped_unjoined) ++metrics_.dao_dropped_unjoined;
  }

  void drop_data(NodeId where, const DataPacket& pkt, const char* why) {
    bool upward = pkt.dst == topo_.root;
    if (std::string_view(why) == "queue")
      upward ? ++metrics_.data_dropped_queue : ++metrics_.down_dropped_queue;
    else if (std::string_view(why) == "loss")
      upward ? ++metrics_.data_dropped_loss : ++metrics_.down_dropped_loss;
    else
      upward ? ++metrics_.data_dropped_noroute
             : ++metrics_.down_dropped_noroute;
    trace(where, std::string("drop_") + why,
          "data:" + std::to_string(pkt.src) + ":" + std::to_string(pkt.seq));
  }

  void note_defense_ops(const DefenseState& st, DaoDecision d) {
    std::uint32_t ops = st.last_call_ops;
    metrics_.defense_max_call_ops = std::max(metrics_.defense_max_call_ops, ops);
    if (d == DaoDecision::Discard)
      metrics_.defense_max_fastpath_ops =
          std::max(metrics_.defense_max_fastpath_ops, ops);
    std::uint64_t bound =
        st.blacklist_table.size() + st.neighbor_table.size() + 2;
    if (ops > bound) ++metrics_.defense_complexity_violations;
  }

  // Strict rank rule and tree-ness, checked after every event.
  void check_invariants() {
    for (const RplNode& n : nodes_) {
      if (!n.joined || n.is_root()) continue;
      if (!n.preferred_parent) {
        ++metrics_.rank_rule_violations;
        continue;
      }
      const RplNode& p = nodes_[*n.preferred_parent];
      if (!(n.rank > p.rank)) ++metrics_.rank_rule_violations;
      // parent chain must reach the root without revisiting anyone
      NodeId cur = n.id;
      std::size_t steps = 0;
      while (cur != topo_.root && steps <= nodes_.size()) {
        const RplNode& c = nodes_[cur];
        if (!c.joined || !c.preferred_parent) break;
        cur = *c.preferred_parent;
        ++steps;
      }
      if (cur != topo_.root) ++metrics_.rank_rule_violations;
    }
  }

  void finalize_metrics() {
    for (const RplNode& n : nodes_) {
      if (!n.defense) continue;
      metrics_.lookup_ops_by_node[n.id] = n.defense->lookup_ops_total;
      metrics_.defense_table_bytes_max = std::max(
          metrics_.defense_table_bytes_max, table_memory_bytes(*n.defense));
    }
  }

  std::string frame_detail(const Frame& f) const {
    MsgKind k = kind_of(f.payload);
    if (k == MsgKind::Data) {
      const DataPacket& p = std::get<DataPacket>(f.payload);
      return "data:" + std::to_string(p.src) + ":" + std::to_string(p.seq);
    }
    if (k == MsgKind::Dao && f.tag) {
      return std::string("dao:") + std::to_string(f.tag->origin) + ":" +
             std::to_string(f.tag->origination) +
             (f.tag->malicious ? ":m" : ":l");
    }
    return kind_name(k);
  }

  void trace(NodeId node, std::string kind, std::string detail) {
    if (!ecfg_.record_trace) return;
    trace_.push_back({now(), node, std::move(kind), std::move(detail)});
  }

  Topology topo_;
  EngineConfig ecfg_;
  AppConfig acfg_;
  SimTime duration_us_ = 0;
  Rng rng_;
  EventQueue queue_;
  std::vector<RplNode> nodes_;
  std::vector<Server> servers_;
  RunMetrics metrics_;
  std::vector<TraceRecord> trace_;
  std::vector<DefenseLogRecord> defense_log_;
};

}  // namespace daosim
