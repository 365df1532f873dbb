#pragma once

#include <cstdint>
#include <optional>

#include "daosim/messages.hpp"
#include "daosim/types.hpp"

namespace daosim {

enum class AttackMode : std::uint8_t {
  SelfPrefix,     // malformed DAOs advertising the attacker's own prefix
  ForeignPrefix,  // replays of a DAO captured from a legitimate victim
};

// A compromised node that joins normally, then unicasts the same DAO to
// its preferred parent at a fixed interval. The replay timer starts on
// the first DIO that gives it a parent.
struct AttackConfig {
  NodeId attacker_id = 0;
  double replay_interval_s = 1.0;
  AttackMode mode = AttackMode::SelfPrefix;
  std::optional<NodeId> victim_id;  // required in ForeignPrefix mode

  bool operator==(const AttackConfig&) const = default;

  SimTime replay_interval_us() const { return from_seconds(replay_interval_s); }
};

// The replayed payload is held fixed across replays: same originator,
// same captured sequence number.
inline Dao make_replay_dao(const AttackConfig& cfg,
                           std::uint32_t captured_seq = 1) {
  if (cfg.mode == AttackMode::ForeignPrefix) {
    NodeAddress victim = make_address(cfg.victim_id.value());
    return Dao{victim.global_id, victim, captured_seq};
  }
  NodeAddress self = make_address(cfg.attacker_id);
  return Dao{self.global_id, self, captured_seq};
}

}  // namespace daosim
