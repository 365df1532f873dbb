#pragma once

#include <cstdint>
#include <optional>
#include <queue>
#include <variant>
#include <vector>

#include "daosim/messages.hpp"
#include "daosim/types.hpp"

namespace daosim {

enum class TimerKind : std::uint8_t {
  TrickleFire,
  TrickleIntervalEnd,
  DaoOriginate,
  DisProbe,
  AttackReplay,
};

inline const char* timer_name(TimerKind k) {
  switch (k) {
    case TimerKind::TrickleFire: return "trickle_fire";
    case TimerKind::TrickleIntervalEnd: return "trickle_interval";
    case TimerKind::DaoOriginate: return "dao_originate";
    case TimerKind::DisProbe: return "dis_probe";
    case TimerKind::AttackReplay: return "attack_replay";
  }
  return "?";
}

// A frame has reached a receiver's radio; queueing happens here.
struct PacketArrival {
  NodeId dst = 0;
  Frame frame;
};

// The receiver finished processing the frame; protocol handler runs.
struct PacketDelivery {
  NodeId dst = 0;
  Frame frame;
};

struct TimerFire {
  NodeId node = 0;
  TimerKind kind = TimerKind::TrickleFire;
  std::uint64_t epoch = 0;
};

struct AppDataGen {
  NodeId node = 0;
  std::optional<NodeId> dst;  // default: DODAG root
};

using EventBody = std::variant<PacketArrival, PacketDelivery, TimerFire, AppDataGen>;

struct SimEvent {
  SimTime at = 0;
  std::uint64_t seq = 0;  // schedule-order tiebreak among equal timestamps
  EventBody body;
};

// Min-heap on (at, seq). seq is assigned by the queue, so events with
// equal timestamps pop in FIFO schedule order.
class EventQueue {
 public:
  void schedule(SimTime at, EventBody body) {
    if (at < now_)
      throw SimError("schedule: event at t=" + std::to_string(at) +
                     "us is in the past (now=" + std::to_string(now_) + "us)");
    heap_.push(SimEvent{at, next_seq_++, std::move(body)});
  }

  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }
  SimTime now() const { return now_; }
  SimTime next_at() const { return heap_.top().at; }

  SimEvent pop() {
    SimEvent ev = heap_.top();
    heap_.pop();
    now_ = ev.at;
    return ev;
  }

 private:
  struct Later {
    bool operator()(const SimEvent& a, const SimEvent& b) const {
      if (a.at != b.at) return a.at > b.at;
      return a.seq > b.seq;
    }
  };

  std::priority_queue<SimEvent, std::vector<SimEvent>, Later> heap_;
  std::uint64_t next_seq_ = 0;
  SimTime now_ = 0;
};

}  // namespace daosim
