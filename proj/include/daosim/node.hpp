#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "daosim/attacker.hpp"
#include "daosim/defense.hpp"
#include "daosim/event_queue.hpp"
#include "daosim/messages.hpp"
#include "daosim/trickle.hpp"
#include "daosim/types.hpp"

namespace daosim {

struct RplConfig {
  Rank root_rank = 256;
  Rank rank_step = 256;  // MinHopRankIncrease-style, one hop
  SimTime trickle_imin_us = 4 * us_per_s;
  unsigned trickle_doublings = 8;
  unsigned trickle_k = 10;
  SimTime dao_delay_us = 500 * us_per_ms;  // batches parent switches
  SimTime dis_interval_us = 10 * us_per_s;
  SimTime dis_start_jitter_us = 2 * us_per_s;

  bool operator==(const RplConfig&) const = default;
};

// Child rank is the parent's advertised rank plus a fixed step; joining
// through a parent that would overflow the 16-bit rank is refused.
inline std::optional<Rank> compute_rank(Rank parent_rank, Rank step) {
  std::uint32_t r = static_cast<std::uint32_t>(parent_rank) + step;
  if (r > 0xffffu) return std::nullopt;
  return static_cast<Rank>(r);
}

// Minimum advertised rank wins; ties go to the lowest node id.
inline std::optional<NodeId> select_parent(
    const std::vector<std::pair<NodeId, Rank>>& candidates) {
  std::optional<NodeId> best;
  Rank best_rank = 0xffff;
  for (const auto& [id, rank] : candidates) {
    if (!best || rank < best_rank || (rank == best_rank && id < *best)) {
      best = id;
      best_rank = rank;
    }
  }
  return best;
}

struct TimerRequest {
  TimerKind kind;
  SimTime at;
  std::uint64_t epoch = 0;
};

// What a handler wants done; the engine applies it.
struct Actions {
  std::vector<Frame> frames;
  std::vector<TimerRequest> timers;
  bool joined_now = false;
  bool parent_changed = false;
  std::optional<DataPacket> delivered;
  std::optional<DataPacket> dropped_noroute;
  bool dao_dropped_unjoined = false;
};

// Per-node RPL state machine: joining, rank maintenance, trickle-driven
// DIOs, DAO origination and storing-mode forwarding, data routing. All
// handlers are transitions on (state, event) -> (state, actions); the
// single-threaded engine owns the instance.
struct RplNode {
  NodeId id = 0;
  NodeId root_id = 0;
  NodeAddress addr;
  RplConfig cfg;

  bool joined = false;
  Rank rank = 0xffff;
  std::optional<NodeId> preferred_parent;
  Rank parent_adv_rank = 0xffff;
  std::map<NodeId, Rank> candidates;  // last advertised rank per neighbor

  TrickleState trickle;
  std::uint32_t dao_seq = 0;
  std::uint32_t origination_counter = 0;
  std::uint64_t dao_epoch = 0;  // only the newest pending DAO timer fires
  std::map<GlobalId, NodeId> downward_routes;
  std::uint32_t data_seq = 0;

  std::optional<DefenseState> defense;
  std::optional<AttackConfig> attack;
  bool attack_active = false;

  RplNode() = default;
  RplNode(NodeId id_, NodeId root_id_, const RplConfig& cfg_)
      : id(id_), root_id(root_id_), addr(make_address(id_)), cfg(cfg_) {
    trickle.i_min = cfg.trickle_imin_us;
    trickle.doublings = cfg.trickle_doublings;
    trickle.k = cfg.trickle_k;
  }

  bool is_root() const { return id == root_id; }

  // Initial timers. The root starts joined and begins advertising;
  // everyone else probes with DIS until a DIO arrives.
  Actions start(SimTime now, Rng& rng) {
    Actions out;
    if (is_root()) {
      joined = true;
      rank = cfg.root_rank;
      push_trickle(out, trickle.reset(now, rng));
    } else {
      SimTime jitter = rand_range(rng, 0, cfg.dis_start_jitter_us + 1);
      out.timers.push_back({TimerKind::DisProbe, now + jitter, 0});
    }
    return out;
  }

  Actions on_dio(SimTime now, Rng& rng, NodeId from, const Dio& dio) {
    Actions out;
    if (is_root()) return out;
    // Strict rank rule: a DIO advertising a rank at or below our own must
    // come from our own sub-DODAG and would form a loop.
    if (joined && dio.rank >= rank) return out;
    std::optional<Rank> would = compute_rank(dio.rank, cfg.rank_step);
    if (!would) return out;  // refuse to join through an overflowing parent

    candidates[from] = dio.rank;
    std::vector<std::pair<NodeId, Rank>> cand(candidates.begin(),
                                              candidates.end());
    NodeId best = select_parent(cand).value();
    Rank best_rank = candidates[best];

    if (!joined) {
      adopt(best, best_rank);
      joined = true;
      out.joined_now = true;
      out.parent_changed = true;
      after_parent_update(now, rng, out);
    } else if (preferred_parent && best != *preferred_parent &&
               best_rank < parent_adv_rank) {
      adopt(best, best_rank);
      out.parent_changed = true;
      after_parent_update(now, rng, out);
    } else if (preferred_parent && from == *preferred_parent &&
               dio.rank < parent_adv_rank) {
      // Parent improved; track it. No new DAO for a pure rank refresh.
      adopt(from, dio.rank);
    } else {
      trickle.on_consistent();
    }
    return out;
  }

  Actions on_dis(SimTime now, Rng& rng, NodeId /*from*/) {
    Actions out;
    if (!joined) return out;
    if (auto times = trickle.on_inconsistency(now, rng))
      push_trickle(out, *times);
    return out;
  }

  // Storing mode: install the advertised prefix, acknowledge, and relay
  // toward the root unchanged. The engine has already run the defense
  // decision; only admitted DAOs reach this handler.
  Actions on_dao(SimTime /*now*/, NodeId from, const Dao& dao,
                 const std::optional<DaoTag>& tag) {
    Actions out;
    if (!joined) {
      out.dao_dropped_unjoined = true;
      return out;
    }
    downward_routes[dao.prefix] = from;
    out.frames.push_back(
        Frame{id, from, DaoAck{dao.seq}, kDaoAckBits, std::nullopt});
    if (!is_root() && preferred_parent)
      out.frames.push_back(Frame{id, *preferred_parent, dao, kDaoBits, tag});
    return out;
  }

  Actions on_data(SimTime now, const DataPacket& pkt) {
    Actions out;
    if (pkt.dst == id) {
      out.delivered = pkt;
      return out;
    }
    route(now, pkt, out);
    return out;
  }

  // Application send from this node; the source transmits immediately and
  // does not pass the packet through its own inbound queue.
  Actions originate_data(SimTime now, NodeId dst, std::uint32_t payload_bits) {
    Actions out;
    DataPacket pkt{id, dst, ++data_seq, now, payload_bits};
    route(now, pkt, out);
    return out;
  }

  Actions on_timer(SimTime now, Rng& rng, TimerKind kind, std::uint64_t epoch) {
    Actions out;
    switch (kind) {
      case TimerKind::TrickleFire:
        if (epoch != trickle.epoch || !trickle.running) break;
        if (trickle.fire_allowed())
          out.frames.push_back(Frame{id, kBroadcast,
                                     Dio{root_id, 0, rank}, kDioBits,
                                     std::nullopt});
        break;
      case TimerKind::TrickleIntervalEnd:
        if (epoch != trickle.epoch || !trickle.running) break;
        push_trickle(out, trickle.on_interval_end(now, rng));
        break;
      case TimerKind::DaoOriginate:
        if (epoch != dao_epoch) break;
        if (joined && preferred_parent) out.frames.push_back(originate_dao());
        break;
      case TimerKind::DisProbe:
        if (joined) break;  // chain ends once joined
        out.frames.push_back(Frame{id, kBroadcast, Dis{}, kDisBits, std::nullopt});
        out.timers.push_back(
            {TimerKind::DisProbe, now + cfg.dis_interval_us, 0});
        break;
      case TimerKind::AttackReplay: {
        if (!attack_active || !attack || !preferred_parent) break;
        Dao dao = make_replay_dao(*attack);
        DaoTag tag{id, ++origination_counter, true};
        out.frames.push_back(Frame{id, *preferred_parent, dao, kDaoBits, tag});
        out.timers.push_back(
            {TimerKind::AttackReplay, now + attack->replay_interval_us(), 0});
        break;
      }
    }
    return out;
  }

  Frame originate_dao() {
    Dao dao{addr.global_id, addr, ++dao_seq};
    DaoTag tag{id, ++origination_counter, false};
    return Frame{id, *preferred_parent, dao, kDaoBits, tag};
  }

 private:
  void adopt(NodeId parent, Rank adv_rank) {
    preferred_parent = parent;
    parent_adv_rank = adv_rank;
    rank = compute_rank(adv_rank, cfg.rank_step).value();
  }

  void after_parent_update(SimTime now, Rng& rng, Actions& out) {
    push_trickle(out, trickle.reset(now, rng));
    ++dao_epoch;
    out.timers.push_back(
        {TimerKind::DaoOriginate, now + cfg.dao_delay_us, dao_epoch});
    if (attack && !attack_active) {
      attack_active = true;
      out.timers.push_back(
          {TimerKind::AttackReplay, now + attack->replay_interval_us(), 0});
    }
  }

  void push_trickle(Actions& out, const TrickleTimes& t) {
    out.timers.push_back({TimerKind::TrickleFire, t.fire_at, t.epoch});
    out.timers.push_back({TimerKind::TrickleIntervalEnd, t.interval_end, t.epoch});
  }

  void route(SimTime /*now*/, const DataPacket& pkt, Actions& out) {
    std::optional<NodeId> next;
    if (pkt.dst == root_id) {
      if (joined && preferred_parent) next = preferred_parent;
    } else {
      auto it = downward_routes.find(global_of(pkt.dst));
      if (it != downward_routes.end()) next = it->second;
    }
    if (!next) {
      out.dropped_noroute = pkt;
      return;
    }
    out.frames.push_back(Frame{id, *next, pkt, pkt.payload_bits, std::nullopt});
  }
};

}  // namespace daosim
