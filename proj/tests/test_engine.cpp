#include <doctest.h>

#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "daosim/engine.hpp"
#include "daosim/scenario.hpp"

using namespace daosim;

namespace {

Scenario chain_scenario(unsigned n, double duration_s = 120.0) {
  Scenario sc;
  sc.kind = ScenarioKind::Rpl;
  sc.topology = GridSpec{1, n, 20.0, 25.0};
  sc.duration_s = duration_s;
  return sc;
}

std::size_t count_trace(const Simulator& sim, const std::string& kind,
                        const std::string& msg = "") {
  std::size_t n = 0;
  for (const TraceRecord& r : sim.trace_records())
    if (r.kind == kind &&
        (msg.empty() || r.detail.substr(0, r.detail.find(':')) == msg))
      ++n;
  return n;
}

}  // namespace

TEST_CASE("a broadcast from the center of a 3x3 grid reaches all 8 neighbors") {
  // a DIO injected at t=0 is the only DIO that can land inside 1s: the
  // trickle timers of whoever joins on it fire no earlier than I/2 = 2s
  Scenario sc;
  sc.kind = ScenarioKind::Rpl;
  sc.topology = GridSpec{3, 3, 10.0, 15.0};
  sc.app.enabled = false;
  sc.duration_s = 1.0;
  Simulator sim = make_simulator(sc, 1, true);
  sim.transmit(Frame{4, kBroadcast, Dio{0, 0, 256}, kDioBits, std::nullopt});
  sim.run();
  CHECK(count_trace(sim, "rx", "dio") == 8);
}

TEST_CASE("unicast under a dead radio is counted but never delivered") {
  Scenario sc = chain_scenario(2, 1.0);
  sc.app.enabled = false;
  sc.engine.rx_success = 0.0;
  Simulator sim = make_simulator(sc, 1, true);
  sim.transmit(Frame{1, 0, Dao{global_of(1), make_address(1), 1}, kDaoBits,
                     std::nullopt});
  RunMetrics m = sim.run();
  CHECK(control_tx_of(m, MsgKind::Dao) == 1);
  CHECK(count_trace(sim, "rx", "dao") == 0);
  CHECK(m.control_copies_lost >= 1);
}

TEST_CASE("unicast with a perfect radio always arrives") {
  Scenario sc = chain_scenario(2, 1.0);
  sc.app.enabled = false;
  Simulator sim = make_simulator(sc, 1, true);
  sim.transmit(Frame{1, 0, Dao{global_of(1), make_address(1), 1}, kDaoBits,
                     std::nullopt});
  sim.run();
  CHECK(count_trace(sim, "rx", "dao") == 1);
}

TEST_CASE("two-node net delivers every packet with a lossless radio") {
  Scenario sc = chain_scenario(2, 200.0);
  sc.app.period_us = 10 * us_per_s;  // node 1 sends ~16 packets
  Simulator sim = make_simulator(sc, 3);
  RunMetrics m = sim.run();
  CHECK(m.data_sent >= 10);
  CHECK(m.data_delivered == m.data_sent);
  CHECK(pdr(m) == 1.0);
}

TEST_CASE("ten injected packets on a 2-node net arrive exactly") {
  Scenario sc = chain_scenario(2, 120.0);
  sc.app.enabled = false;
  Simulator sim = make_simulator(sc, 1);
  for (int k = 0; k < 10; ++k)
    sim.schedule_data(from_seconds(20.0 + k), 1, 0);
  RunMetrics m = sim.run();
  CHECK(m.data_sent == 10);
  CHECK(m.data_delivered == 10);
}

TEST_CASE("same seed and config reproduce bit-identical runs") {
  Scenario sc;
  sc.kind = ScenarioKind::RplUnderAttack;
  sc.attack = AttackConfig{15, 1.0, AttackMode::SelfPrefix, std::nullopt};
  sc.duration_s = 200.0;
  Simulator a = make_simulator(sc, 42, true);
  Simulator b = make_simulator(sc, 42, true);
  RunMetrics ma = a.run();
  RunMetrics mb = b.run();
  CHECK(ma == mb);
  CHECK(a.trace_text() == b.trace_text());

  Simulator c = make_simulator(sc, 43, true);
  RunMetrics mc = c.run();
  CHECK(ma != mc);
}

TEST_CASE("an empty network stays quiet") {
  Scenario sc = chain_scenario(2, 60.0);
  sc.app.enabled = false;
  Simulator sim = make_simulator(sc, 1);
  RunMetrics m = sim.run();
  CHECK(m.data_sent == 0);
  CHECK(m.data_delivered == 0);
  CHECK(m.latencies_us.empty());
}

TEST_CASE("packet conservation holds under a lossy radio") {
  Scenario sc;
  sc.kind = ScenarioKind::Rpl;
  sc.topology = RandomSpec{20, 100.0, 100.0, 35.0, 9};
  sc.engine.rx_success = 0.9;
  sc.duration_s = 300.0;
  for (std::uint64_t seed : {5, 6, 7}) {
    Simulator sim = make_simulator(sc, seed);
    RunMetrics m = sim.run();
    std::uint64_t data_terminal = m.data_delivered + m.data_dropped_queue +
                                  m.data_dropped_loss + m.data_dropped_noroute;
    CHECK(data_terminal <= m.data_sent);
    // packets neither delivered nor dropped must still be in flight
    std::uint64_t in_flight = m.data_sent - data_terminal;
    CHECK(in_flight <= 5);
    std::uint64_t ctrl_terminal = m.control_copies_delivered +
                                  m.control_copies_lost +
                                  m.control_copies_discarded;
    CHECK(ctrl_terminal <= m.control_copies_sent);
    CHECK(m.control_copies_sent - ctrl_terminal <= 20);
    CHECK(m.rank_rule_violations == 0);
  }
}

TEST_CASE("every DAO origination is transmitted once per hop of depth") {
  // 16-node grid, lossless, attack-free: tagged transmissions per
  // origination must equal the originator's hop depth.
  Scenario sc;
  sc.kind = ScenarioKind::Rpl;
  sc.duration_s = 120.0;
  Simulator sim = make_simulator(sc, 11);
  RunMetrics m = sim.run();
  auto depths = sim.topology().hop_depths();
  CHECK_FALSE(m.dao_tx_by_origination.empty());
  for (const auto& [tag, count] : m.dao_tx_by_origination)
    CHECK(count == depths.at(tag.origin));
  // and the root learned a route to everyone
  CHECK(sim.node(0).downward_routes.size() == sim.node_count() - 1);
}

TEST_CASE("depth-3 chain: one origination, three transmissions, routes installed") {
  Scenario sc = chain_scenario(4);
  sc.app.enabled = false;
  Simulator sim = make_simulator(sc, 2);
  RunMetrics m = sim.run();
  DaoTag leaf_tag{3, 1, false};
  CHECK(m.dao_tx_by_origination.at(leaf_tag) == 3);
  CHECK(sim.node(2).downward_routes.at(global_of(3)) == NodeId{3});
  CHECK(sim.node(1).downward_routes.at(global_of(3)) == NodeId{2});
  CHECK(sim.node(0).downward_routes.at(global_of(3)) == NodeId{1});
  // prefix preserved end to end: the root's route key is the leaf's global id
  CHECK(control_tx_of(m, MsgKind::Dao) ==
        control_tx_of(m, MsgKind::DaoAck));
}

TEST_CASE("delivery latency on a quiet chain is hops times (air + service)") {
  Scenario sc = chain_scenario(4);
  sc.app.enabled = false;
  Simulator sim = make_simulator(sc, 1);
  for (int k = 0; k < 5; ++k) sim.schedule_data(from_seconds(60.0 + k), 3, 0);
  RunMetrics m = sim.run();
  REQUIRE(m.data_delivered == 5);
  SimTime air = 256 * 4;  // 256 bits at 250 kbps
  SimTime expect = 3 * (air + sc.engine.proc_delay_us);
  for (SimTime lat : m.latencies_us) CHECK(lat == expect);
  CHECK(ae2ed_ms(m) == doctest::Approx(to_ms(expect)));
}

TEST_CASE("downward data needs an installed route") {
  Scenario sc = chain_scenario(4);
  sc.app.enabled = false;
  Simulator sim = make_simulator(sc, 1);
  sim.schedule_data(from_seconds(0.1), 0, 3);  // before any DAO
  sim.schedule_data(from_seconds(60.0), 0, 3);  // after convergence
  RunMetrics m = sim.run();
  CHECK(m.down_sent == 2);
  CHECK(m.down_dropped_noroute == 1);
  CHECK(m.down_delivered == 1);
}

TEST_CASE("a full data queue drops the overflow arrival") {
  // three children fire at the same instant into a cap-2 root queue
  Scenario sc;
  sc.kind = ScenarioKind::Rpl;
  sc.topology = GridSpec{2, 2, 10.0, 15.0};
  sc.app.enabled = false;
  sc.duration_s = 90.0;
  Simulator sim = make_simulator(sc, 1);
  for (NodeId n : {1, 2, 3})
    sim.schedule_data(from_seconds(60.0), n, 0);
  RunMetrics m = sim.run();
  CHECK(m.data_sent == 3);
  CHECK(m.data_delivered == 2);
  CHECK(m.data_dropped_queue == 1);
}

TEST_CASE("DIS probing stops at join and solicits a prompt DIO") {
  Scenario sc = chain_scenario(3, 300.0);
  sc.app.enabled = false;
  Simulator sim = make_simulator(sc, 4, true);
  RunMetrics m = sim.run();
  CHECK(sim.all_joined());
  // joined nodes stop probing: far fewer DIS than the periodic maximum
  CHECK(control_tx_of(m, MsgKind::Dis) <= 6);
}

TEST_CASE("trickle DIO intervals double on a quiet isolated root") {
  // node 1 is out of range, so the root's trickle never hears anything
  Scenario sc;
  sc.kind = ScenarioKind::Rpl;
  sc.topology = GridSpec{1, 2, 100.0, 10.0};
  sc.app.enabled = false;
  sc.duration_s = 600.0;
  Simulator sim = make_simulator(sc, 8, true);
  sim.run();
  std::vector<SimTime> fires;
  for (const TraceRecord& r : sim.trace_records())
    if (r.node == 0 && r.kind == "tx" && r.detail == "dio")
      fires.push_back(r.at);
  RplConfig rcfg;
  SimTime interval = rcfg.trickle_imin_us;
  SimTime start = 0;
  REQUIRE(fires.size() >= 6);
  for (SimTime f : fires) {
    CHECK(f >= start + interval / 2);
    CHECK(f < start + interval);
    start += interval;
    interval = std::min(interval * 2,
                        rcfg.trickle_imin_us << rcfg.trickle_doublings);
  }
}

TEST_CASE("the trace alone reproduces the core counters") {
  Scenario sc;
  sc.kind = ScenarioKind::RplSecure;
  sc.attack = AttackConfig{15, 1.0, AttackMode::SelfPrefix, std::nullopt};
  sc.defense_threshold = 10;
  sc.duration_s = 300.0;
  Simulator sim = make_simulator(sc, 21, true);
  RunMetrics m = sim.run();

  std::uint64_t gen = 0, deliver = 0, discard = 0, blacklist = 0;
  std::map<MsgKind, std::uint64_t> tx;
  std::map<std::string, SimTime> gen_at;
  std::vector<SimTime> latencies;
  std::istringstream is(sim.trace_text());
  std::string line;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    SimTime at;
    NodeId node;
    std::string kind, detail;
    ls >> at >> node >> kind >> detail;
    std::string head = detail.substr(0, detail.find(':'));
    if (kind == "gen") {
      ++gen;
      gen_at[detail] = at;
    } else if (kind == "deliver") {
      ++deliver;
      latencies.push_back(at - gen_at.at(detail));
    } else if (kind == "discard") {
      ++discard;
    } else if (kind == "blacklist") {
      ++blacklist;
    } else if (kind == "tx") {
      if (head == "dio") ++tx[MsgKind::Dio];
      else if (head == "dis") ++tx[MsgKind::Dis];
      else if (head == "dao") ++tx[MsgKind::Dao];
      else if (head == "dao_ack") ++tx[MsgKind::DaoAck];
    }
  }
  CHECK(gen == m.data_sent);
  CHECK(deliver == m.data_delivered);
  CHECK(discard == m.dao_discarded_by_defense);
  CHECK(blacklist == m.blacklist_events.size());
  CHECK(tx == m.control_tx);
  CHECK(latencies == m.latencies_us);
}

TEST_CASE("malicious volume strictly decreases with the replay interval") {
  std::vector<std::uint64_t> totals;
  for (double interval : {1.0, 2.0, 4.0, 8.0}) {
    Scenario sc;
    sc.kind = ScenarioKind::RplUnderAttack;
    sc.attack = AttackConfig{15, interval, AttackMode::SelfPrefix, std::nullopt};
    sc.duration_s = 300.0;
    Simulator sim = make_simulator(sc, 6);
    totals.push_back(sim.run().malicious_dao_tx);
  }
  CHECK(totals[0] > totals[1]);
  CHECK(totals[1] > totals[2]);
  CHECK(totals[2] > totals[3]);
}

TEST_CASE("replays fire at fixed multiples of the interval after joining") {
  Scenario sc;
  sc.kind = ScenarioKind::RplUnderAttack;
  sc.topology = GridSpec{1, 3, 20.0, 25.0};
  sc.attack = AttackConfig{2, 2.0, AttackMode::SelfPrefix, std::nullopt};
  sc.app.enabled = false;
  sc.duration_s = 60.0;
  Simulator sim = make_simulator(sc, 9, true);
  sim.run();
  std::vector<SimTime> replay_tx;
  for (const TraceRecord& r : sim.trace_records())
    if (r.node == 2 && r.kind == "tx" && r.detail.find(":m") != std::string::npos)
      replay_tx.push_back(r.at);
  REQUIRE(replay_tx.size() >= 10);
  for (std::size_t i = 1; i < replay_tx.size(); ++i)
    CHECK(replay_tx[i] - replay_tx[i - 1] == 2 * us_per_s);
  // count over the attack window: one replay per interval, no misses
  SimTime window = sc.duration_us() - replay_tx.front();
  CHECK(replay_tx.size() == window / (2 * us_per_s) + 1);
}

TEST_CASE("scheduling an event into the past kills the run") {
  Scenario sc = chain_scenario(2, 10.0);
  sc.app.enabled = false;
  Simulator sim = make_simulator(sc, 1);
  sim.run();
  CHECK_THROWS_AS(sim.schedule(from_seconds(1.0), AppDataGen{1, std::nullopt}),
                  SimError);
}

TEST_CASE("engine rejects malformed topologies") {
  Topology t;
  t.positions[0] = {0, 0};
  t.positions[2] = {1, 0};  // gap in ids
  t.tx_range = 10;
  t.root = 0;
  CHECK_THROWS_AS(Simulator(t, 1, us_per_s), ConfigError);
}

TEST_CASE("engine validates the attack block against the topology") {
  Scenario sc = chain_scenario(3, 10.0);
  auto mk = [&](AttackConfig a) {
    return Simulator(build_topology(sc.topology), 1, us_per_s, {}, {}, {}, a,
                     std::nullopt);
  };
  CHECK_THROWS_AS(mk(AttackConfig{9, 1.0, AttackMode::SelfPrefix, {}}),
                  ConfigError);
  CHECK_THROWS_AS(mk(AttackConfig{0, 1.0, AttackMode::SelfPrefix, {}}),
                  ConfigError);
  CHECK_THROWS_AS(mk(AttackConfig{2, -1.0, AttackMode::SelfPrefix, {}}),
                  ConfigError);
  CHECK_THROWS_AS(mk(AttackConfig{2, 1.0, AttackMode::ForeignPrefix, {}}),
                  ConfigError);
  CHECK_THROWS_AS(
      mk(AttackConfig{2, 1.0, AttackMode::ForeignPrefix, NodeId{2}}),
      ConfigError);
  CHECK_NOTHROW(mk(AttackConfig{2, 1.0, AttackMode::ForeignPrefix, NodeId{1}}));
}
