#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>

#include "daosim/types.hpp"

namespace daosim {

// Dual identity of a node: the link-local id frames are addressed with,
// and the global prefix id a DAO advertises.
struct NodeAddress {
  NodeId source_id = 0;
  GlobalId global_id = 0;

  bool operator==(const NodeAddress&) const = default;
};

inline NodeAddress make_address(NodeId id) {
  return NodeAddress{id, global_of(id)};
}

struct Dio {
  std::uint32_t dodag_id = 0;
  std::uint8_t version = 0;
  Rank rank = 0;
};

struct Dis {};

struct Dao {
  GlobalId prefix = 0;     // equals originator.global_id; never rewritten
  NodeAddress originator;  // who generated this DAO
  std::uint32_t seq = 0;
};

struct DaoAck {
  std::uint32_t seq = 0;
};

struct DataPacket {
  NodeId src = 0;
  NodeId dst = 0;
  std::uint32_t seq = 0;
  SimTime gen_time = 0;
  std::uint32_t payload_bits = 0;
};

using Payload = std::variant<Dio, Dis, Dao, DaoAck, DataPacket>;

enum class MsgKind : std::uint8_t { Dio, Dis, Dao, DaoAck, Data };

inline MsgKind kind_of(const Payload& p) {
  return static_cast<MsgKind>(p.index());
}

inline const char* kind_name(MsgKind k) {
  switch (k) {
    case MsgKind::Dio: return "dio";
    case MsgKind::Dis: return "dis";
    case MsgKind::Dao: return "dao";
    case MsgKind::DaoAck: return "dao_ack";
    case MsgKind::Data: return "data";
  }
  return "?";
}

// Measurement-only tag carried by DAO frames so tests can attribute every
// transmission to the origination that caused it. Forwarders copy it
// verbatim; protocol logic never reads it.
struct DaoTag {
  NodeId origin = 0;
  std::uint32_t origination = 0;  // per-origin counter, unique per origination
  bool malicious = false;         // set by the attacker's replay path only

  bool operator==(const DaoTag&) const = default;
  bool operator<(const DaoTag& o) const {
    if (origin != o.origin) return origin < o.origin;
    return origination < o.origination;
  }
};

struct Frame {
  NodeId src = 0;
  NodeId dst = kBroadcast;
  Payload payload;
  std::uint32_t size_bits = 0;
  std::optional<DaoTag> tag;
};

// Abstract on-air sizes, bits. Data frames carry their payload size.
inline constexpr std::uint32_t kDisBits = 64;
inline constexpr std::uint32_t kDioBits = 608;
inline constexpr std::uint32_t kDaoBits = 480;
inline constexpr std::uint32_t kDaoAckBits = 96;

inline std::uint32_t control_bits(MsgKind k) {
  switch (k) {
    case MsgKind::Dis: return kDisBits;
    case MsgKind::Dio: return kDioBits;
    case MsgKind::Dao: return kDaoBits;
    case MsgKind::DaoAck: return kDaoAckBits;
    case MsgKind::Data: return 0;
  }
  return 0;
}

}  // namespace daosim
