#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "daosim/types.hpp"

namespace daosim {

// One decision per received DAO.
enum class DaoDecision : std::uint8_t {
  Discard,             // sender already blacklisted; zero further work
  ForwardAndCount,     // sender is the originator, below threshold
  ForwardOnly,         // sender is relaying someone else's prefix
  BlacklistAndDiscard, // threshold breached by this DAO
  AdmitNew,            // first DAO from this sender; entry created, counted
};

inline const char* decision_name(DaoDecision d) {
  switch (d) {
    case DaoDecision::Discard: return "discard";
    case DaoDecision::ForwardAndCount: return "forward_and_count";
    case DaoDecision::ForwardOnly: return "forward_only";
    case DaoDecision::BlacklistAndDiscard: return "blacklist_and_discard";
    case DaoDecision::AdmitNew: return "admit_new";
  }
  return "?";
}

inline bool decision_forwards(DaoDecision d) {
  return d == DaoDecision::ForwardAndCount || d == DaoDecision::ForwardOnly ||
         d == DaoDecision::AdmitNew;
}

struct NeighborEntry {
  NodeId source_id = 0;
  GlobalId global_id = 0;
  std::uint32_t dao_count = 0;  // never exceeds the threshold

  bool operator==(const NeighborEntry&) const = default;
};

// Per-node detection state: a neighbor table keyed by DAO sender with an
// originated-DAO counter, and a blacklist consulted first on every DAO.
// Tables are flat arrays scanned linearly, mirroring what fits on a mote;
// lookup_ops counts entry comparisons so tests can bound the work per call.
struct DefenseState {
  std::uint32_t threshold = 0;
  std::vector<NeighborEntry> neighbor_table;
  std::vector<NodeId> blacklist_table;

  std::uint64_t lookup_ops_total = 0;
  std::uint32_t last_call_ops = 0;
};

inline DefenseState defense_init(std::uint32_t threshold) {
  if (threshold == 0)
    throw ConfigError(
        "defense: threshold must be >= 1 (0 would blacklist every child on "
        "its first DAO)");
  DefenseState st;
  st.threshold = threshold;
  return st;
}

inline bool is_blacklisted(const DefenseState& st, NodeId sender) {
  for (NodeId id : st.blacklist_table)
    if (id == sender) return true;
  return false;
}

// Decision procedure for one received DAO. `sender` is the link-local
// previous hop, `dao_prefix` the advertised prefix, `sender_global` the
// sender's own global id.
inline DaoDecision on_dao_receive(DefenseState& st, NodeId sender,
                                  GlobalId dao_prefix, GlobalId sender_global) {
  std::uint32_t ops = 0;
  auto done = [&](DaoDecision d) {
    st.last_call_ops = ops;
    st.lookup_ops_total += ops;
    return d;
  };

  // Blacklist first: a known attacker costs no neighbor-table work.
  for (NodeId id : st.blacklist_table) {
    ++ops;
    if (id == sender) return done(DaoDecision::Discard);
  }

  NeighborEntry* entry = nullptr;
  for (NeighborEntry& e : st.neighbor_table) {
    ++ops;
    if (e.source_id == sender) {
      entry = &e;
      break;
    }
  }

  if (entry == nullptr) {
    ++ops;
    st.neighbor_table.push_back(NeighborEntry{sender, sender_global, 0});
    NeighborEntry& fresh = st.neighbor_table.back();
    if (dao_prefix == fresh.global_id) ++fresh.dao_count;
    return done(DaoDecision::AdmitNew);
  }

  if (dao_prefix == entry->global_id) {
    // Sender originated this DAO: count it against the threshold.
    if (entry->dao_count < st.threshold) {
      ++entry->dao_count;
      return done(DaoDecision::ForwardAndCount);
    }
    st.blacklist_table.push_back(sender);
    return done(DaoDecision::BlacklistAndDiscard);
  }

  // Sender is only relaying a descendant's prefix; counter untouched.
  return done(DaoDecision::ForwardOnly);
}

// Analytic footprint of the two tables, for the memory-overhead report.
inline std::uint64_t table_memory_bytes(const DefenseState& st,
                                        std::uint64_t entry_cost = 10,
                                        std::uint64_t id_cost = 4) {
  if (entry_cost == 0 || id_cost == 0)
    throw ConfigError("table_memory_bytes: costs must be > 0");
  return st.neighbor_table.size() * entry_cost +
         st.blacklist_table.size() * id_cost;
}

}  // namespace daosim
