#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <queue>
#include <set>
#include <vector>

#include "daosim/types.hpp"

namespace daosim {

struct Position {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Position&) const = default;
};

// Static node placement plus the unit-disk connectivity it induces.
// Two nodes are neighbors iff their Euclidean distance is <= tx_range.
struct Topology {
  std::map<NodeId, Position> positions;
  double tx_range = 0.0;
  double interference_range = 0.0;  // informational; loss model is range-free
  NodeId root = 0;

  bool operator==(const Topology&) const = default;

  std::size_t size() const { return positions.size(); }

  bool contains(NodeId id) const { return positions.count(id) != 0; }

  bool in_range(NodeId a, NodeId b) const {
    const Position& pa = positions.at(a);
    const Position& pb = positions.at(b);
    const double dx = pa.x - pb.x;
    const double dy = pa.y - pb.y;
    return dx * dx + dy * dy <= tx_range * tx_range;
  }

  // All nodes within tx_range of id, excluding id itself, in id order.
  std::vector<NodeId> neighbors(NodeId id) const {
    if (!contains(id))
      throw ConfigError("neighbors: unknown node id " + std::to_string(id));
    std::vector<NodeId> out;
    for (const auto& [other, pos] : positions) {
      (void)pos;
      if (other != id && in_range(id, other)) out.push_back(other);
    }
    return out;
  }

  bool connected() const {
    if (positions.empty()) return false;
    std::set<NodeId> seen;
    std::queue<NodeId> frontier;
    frontier.push(root);
    seen.insert(root);
    while (!frontier.empty()) {
      NodeId cur = frontier.front();
      frontier.pop();
      for (NodeId nb : neighbors(cur)) {
        if (seen.insert(nb).second) frontier.push(nb);
      }
    }
    return seen.size() == positions.size();
  }

  // Hop distance from the root, by breadth-first search. Unreachable
  // nodes are absent from the result.
  std::map<NodeId, unsigned> hop_depths() const {
    std::map<NodeId, unsigned> depth;
    std::queue<NodeId> frontier;
    depth[root] = 0;
    frontier.push(root);
    while (!frontier.empty()) {
      NodeId cur = frontier.front();
      frontier.pop();
      for (NodeId nb : neighbors(cur)) {
        if (depth.count(nb) == 0) {
          depth[nb] = depth[cur] + 1;
          frontier.push(nb);
        }
      }
    }
    return depth;
  }

  // Deepest node by hop count; ties broken by highest id. This is the
  // default attacker placement (edge of the network).
  NodeId deepest_node() const {
    auto depths = hop_depths();
    NodeId best = root;
    unsigned best_depth = 0;
    for (const auto& [id, d] : depths) {
      if (d > best_depth || (d == best_depth && id > best)) {
        best = id;
        best_depth = d;
      }
    }
    return best;
  }
};

// Row-major grid with the root (node 0) at the origin.
inline Topology build_grid(unsigned rows, unsigned cols, double spacing,
                           double tx_range) {
  if (rows == 0 || cols == 0)
    throw ConfigError("build_grid: grid dimensions must be non-zero");
  if (static_cast<std::size_t>(rows) * cols < 2)
    throw ConfigError("build_grid: need at least 2 nodes");
  if (spacing <= 0.0) throw ConfigError("build_grid: spacing must be > 0");
  if (tx_range <= 0.0) throw ConfigError("build_grid: tx_range must be > 0");

  Topology t;
  t.tx_range = tx_range;
  t.interference_range = 2.0 * tx_range;
  t.root = 0;
  NodeId id = 0;
  for (unsigned r = 0; r < rows; ++r)
    for (unsigned c = 0; c < cols; ++c)
      t.positions[id++] = Position{c * spacing, r * spacing};
  return t;
}

// Uniform random placement over area_w x area_h, regenerated until the
// unit-disk graph is connected. Same seed, same topology.
inline Topology build_random(unsigned n, double area_w, double area_h,
                             double tx_range, std::uint64_t seed,
                             unsigned max_attempts = 1000) {
  if (n < 2) throw ConfigError("build_random: need at least 2 nodes");
  if (area_w <= 0.0 || area_h <= 0.0)
    throw ConfigError("build_random: area must be positive");
  if (tx_range <= 0.0) throw ConfigError("build_random: tx_range must be > 0");

  Rng rng(seed);
  for (unsigned attempt = 0; attempt < max_attempts; ++attempt) {
    Topology t;
    t.tx_range = tx_range;
    t.interference_range = 2.0 * tx_range;
    t.root = 0;
    for (NodeId id = 0; id < n; ++id) {
      double x = rand_unit(rng) * area_w;
      double y = rand_unit(rng) * area_h;
      t.positions[id] = Position{x, y};
    }
    if (t.connected()) return t;
  }
  throw ConfigError("build_random: no connected placement within " +
                    std::to_string(max_attempts) + " attempts");
}

inline Topology build_chain(unsigned n, double spacing, double tx_range) {
  return build_grid(1, n, spacing, tx_range);
}

}  // namespace daosim
