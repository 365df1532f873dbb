#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "daosim/defense.hpp"
#include "daosim/messages.hpp"
#include "daosim/types.hpp"

namespace daosim {

struct BlacklistEvent {
  SimTime at = 0;
  NodeId parent = 0;
  NodeId blacklisted = 0;

  bool operator==(const BlacklistEvent&) const = default;
};

// Raw per-run counters; every indicator below derives from these.
struct RunMetrics {
  // Upward data (node -> root), the class PDR is defined over.
  std::uint64_t data_sent = 0;
  std::uint64_t data_delivered = 0;
  std::uint64_t data_dropped_queue = 0;
  std::uint64_t data_dropped_loss = 0;
  std::uint64_t data_dropped_noroute = 0;
  std::uint64_t data_bits_delivered = 0;
  std::vector<SimTime> latencies_us;  // one per delivered packet

  // Downward data (root -> node), simulated but outside PDR by default.
  std::uint64_t down_sent = 0;
  std::uint64_t down_delivered = 0;
  std::uint64_t down_dropped_queue = 0;
  std::uint64_t down_dropped_loss = 0;
  std::uint64_t down_dropped_noroute = 0;

  // Control transmissions by type (per frame sent, not per receiver).
  std::map<MsgKind, std::uint64_t> control_tx;

  // Control delivery accounting per receiver copy, for conservation checks.
  std::uint64_t control_copies_sent = 0;
  std::uint64_t control_copies_delivered = 0;
  std::uint64_t control_copies_lost = 0;
  std::uint64_t control_copies_discarded = 0;  // defense fast-path discards

  std::uint64_t link_failures = 0;       // unicast to a non-neighbor
  std::uint64_t dao_dropped_unjoined = 0;

  // Defense observability.
  std::uint64_t dao_discarded_by_defense = 0;
  std::vector<BlacklistEvent> blacklist_events;
  std::map<NodeId, std::uint64_t> lookup_ops_by_node;
  std::uint32_t defense_max_call_ops = 0;
  std::uint32_t defense_max_fastpath_ops = 0;
  std::uint64_t defense_complexity_violations = 0;
  std::uint64_t defense_table_bytes_max = 0;

  // DAO attribution: transmissions per origination tag, plus totals for
  // the attacker's replay stream.
  std::map<DaoTag, std::uint64_t> dao_tx_by_origination;
  std::uint64_t malicious_dao_tx = 0;            // includes the attacker's own
  std::uint64_t malicious_dao_tx_forwarded = 0;  // sent by nodes other than origin

  // Originated-DAO observations per (parent, origin), for calibration.
  std::map<std::pair<NodeId, NodeId>, std::uint64_t> originated_dao_seen;

  std::uint64_t rank_rule_violations = 0;
  SimTime duration_us = 0;

  bool operator==(const RunMetrics&) const = default;
};

// Ratio of upward data packets delivered to packets sent; absent when
// nothing was sent. With include_downward both classes are pooled.
inline std::optional<double> pdr(const RunMetrics& m,
                                 bool include_downward = false) {
  std::uint64_t sent = m.data_sent + (include_downward ? m.down_sent : 0);
  std::uint64_t delivered =
      m.data_delivered + (include_downward ? m.down_delivered : 0);
  if (sent == 0) return std::nullopt;
  return static_cast<double>(delivered) / static_cast<double>(sent);
}

// Mean end-to-end delay of delivered packets, milliseconds.
inline std::optional<double> ae2ed_ms(const RunMetrics& m) {
  if (m.latencies_us.empty()) return std::nullopt;
  double sum = 0.0;
  for (SimTime t : m.latencies_us) sum += static_cast<double>(t);
  return sum / static_cast<double>(m.latencies_us.size()) / 1000.0;
}

// Delivered data bits per second of simulated time.
inline double throughput_bps(const RunMetrics& m) {
  if (m.duration_us == 0) return 0.0;
  return static_cast<double>(m.data_bits_delivered) / to_seconds(m.duration_us);
}

inline std::map<MsgKind, std::uint64_t> control_overhead(const RunMetrics& m) {
  return m.control_tx;
}

inline std::uint64_t control_tx_of(const RunMetrics& m, MsgKind k) {
  auto it = m.control_tx.find(k);
  return it == m.control_tx.end() ? 0 : it->second;
}

struct SummaryStats {
  double mean = 0.0;
  std::optional<double> half_width_95;  // absent when n < 2
  std::size_t n = 0;
};

// Two-sided 97.5% Student-t quantiles; beyond the table the normal
// quantile is close enough.
inline double student_t_975(std::size_t df) {
  static constexpr double table[] = {
      12.706205, 4.302653, 3.182446, 2.776445, 2.570582, 2.446912, 2.364624,
      2.306004,  2.262157, 2.228139, 2.200985, 2.178813, 2.160369, 2.144787,
      2.131450,  2.119905, 2.109816, 2.100922, 2.093024, 2.085963, 2.079614,
      2.073873,  2.068658, 2.063899, 2.059539, 2.055529, 2.051831, 2.048407,
      2.045230,  2.042272};
  if (df == 0) return std::numeric_limits<double>::quiet_NaN();
  if (df <= 30) return table[df - 1];
  if (df <= 40) return 2.021075;
  if (df <= 60) return 2.000298;
  if (df <= 120) return 1.979930;
  return 1.959964;
}

// Mean and half-width of the 95% confidence interval (Student t).
inline SummaryStats summarize(const std::vector<double>& samples,
                              double confidence = 0.95) {
  if (confidence != 0.95)
    throw ConfigError("summarize: only 95% confidence is supported");
  SummaryStats s;
  s.n = samples.size();
  if (s.n == 0) return s;
  double sum = 0.0;
  for (double v : samples) sum += v;
  s.mean = sum / static_cast<double>(s.n);
  if (s.n < 2) return s;
  double ss = 0.0;
  for (double v : samples) ss += (v - s.mean) * (v - s.mean);
  double stddev = std::sqrt(ss / static_cast<double>(s.n - 1));
  s.half_width_95 = student_t_975(s.n - 1) * stddev /
                    std::sqrt(static_cast<double>(s.n));
  return s;
}

}  // namespace daosim
