#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>

#include "daosim/types.hpp"

namespace daosim {

struct TrickleTimes {
  SimTime fire_at = 0;
  SimTime interval_end = 0;
  std::uint64_t epoch = 0;
};

// Adaptive suppression timer driving DIO emission. Interval doubles up to
// i_min * 2^doublings; a transmission point is drawn uniformly from the
// second half of each interval; transmissions are suppressed once k
// consistent messages were heard in the interval.
struct TrickleState {
  SimTime i_min = 4 * us_per_s;
  unsigned doublings = 8;
  unsigned k = 10;

  SimTime interval = 0;
  unsigned counter = 0;
  std::uint64_t epoch = 0;  // pending timers with an older epoch are stale
  bool running = false;

  SimTime i_max() const { return i_min << doublings; }

  // (Re)start at the minimum interval. Any pending timers become stale.
  TrickleTimes reset(SimTime now, Rng& rng) {
    running = true;
    interval = i_min;
    ++epoch;
    return begin_interval(now, rng);
  }

  // New interval of the current length: zero the redundancy counter and
  // draw the transmission point from [I/2, I).
  TrickleTimes begin_interval(SimTime now, Rng& rng) {
    counter = 0;
    SimTime t = rand_range(rng, interval / 2, interval);
    return TrickleTimes{now + t, now + interval, epoch};
  }

  // Interval expired: double (capped) and begin the next interval.
  TrickleTimes on_interval_end(SimTime now, Rng& rng) {
    interval = std::min(interval * 2, i_max());
    return begin_interval(now, rng);
  }

  // Heard something consistent with our state.
  void on_consistent() { ++counter; }

  bool fire_allowed() const { return counter < k; }

  // Inconsistency (e.g. a DIS). Only acts when the interval has grown;
  // at i_min repeated inconsistencies have no further effect.
  std::optional<TrickleTimes> on_inconsistency(SimTime now, Rng& rng) {
    if (!running || interval <= i_min) return std::nullopt;
    return reset(now, rng);
  }
};

}  // namespace daosim
