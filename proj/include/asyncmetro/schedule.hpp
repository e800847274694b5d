#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "asyncmetro/model.hpp"
#include "asyncmetro/types.hpp"

namespace asyncmetro {

/// Update times, proposals and coins of one node.
struct NodeUpdates {
  std::vector<double> times;     // strictly increasing, in (0, T)
  std::vector<State> proposals;  // i.i.d. from nu_v
  std::vector<double> coins;     // i.i.d. uniform [0,1)

  std::uint32_t count() const { return static_cast<std::uint32_t>(times.size()); }
  bool operator==(const NodeUpdates&) const = default;
};

/// The randomness shared by the sequential chain and the distributed run.
struct UpdateSchedule {
  double horizon = 0.0;  // T
  std::uint64_t seed = 0;
  std::vector<NodeUpdates> nodes;

  NodeId num_nodes() const { return static_cast<NodeId>(nodes.size()); }
  std::size_t total_updates() const;
  bool operator==(const UpdateSchedule&) const = default;
};

/// Identifies the index-th update (1-based) of a node.
struct UpdateId {
  NodeId node = 0;
  std::uint32_t index = 0;
  auto operator<=>(const UpdateId&) const = default;
};

/// Position of an update on the chain-time axis. Exact time collisions are
/// broken by node id, so keys of updates at distinct nodes never compare
/// equal.
struct UpdateKey {
  double time = 0.0;
  NodeId node = 0;

  friend bool operator<(const UpdateKey& a, const UpdateKey& b) {
    if (a.time != b.time) return a.time < b.time;
    return a.node < b.node;
  }
  friend bool operator==(const UpdateKey&, const UpdateKey&) = default;
};

inline UpdateKey key_of(const UpdateSchedule& s, UpdateId id) {
  return {s.nodes[id.node].times[id.index - 1], id.node};
}

/// Draws the schedule for horizon T. Every node gets its own stream derived
/// from (seed, node id), consumed as: Exp(1) gaps, then proposals, then coins.
/// Deterministic in (model, T, seed).
UpdateSchedule generate_schedule(const SpinModel& model, double horizon, std::uint64_t seed);

/// All updates sorted by (time, node id, index).
std::vector<UpdateId> total_order(const UpdateSchedule& schedule);

/// Text format: first line "n T seed", then one line per update
/// "node index time proposal coin", with exactly round-trippable doubles.
void write_schedule(std::ostream& out, const UpdateSchedule& schedule);
UpdateSchedule read_schedule(std::istream& in);

/// Throws std::invalid_argument if the schedule violates its invariants or
/// does not fit the model (node count, proposal range).
void validate_schedule(const SpinModel& model, const UpdateSchedule& schedule);

}  // namespace asyncmetro
