#pragma once

#include <cstdint>
#include <vector>

#include "asyncmetro/netsim.hpp"
#include "asyncmetro/schedule.hpp"

namespace asyncmetro {

/// How one update got resolved. A self-triggered update was decided at its
/// first threshold evaluation; otherwise `trigger` is the neighbor update
/// whose decision, on arrival, settled it.
struct DependencyRecord {
  UpdateId update{};
  bool self_triggered = true;
  UpdateId trigger{};
  double resolve_vtime = 0.0;
};

/// records[v][i-1] describes update (v,i).
using DependencyRecords = std::vector<std::vector<DependencyRecord>>;

/// Extracts one record per update from a trace (level Resolutions or Full).
/// Missing or duplicated resolutions, or triggers that are not neighbors,
/// raise invariant_error.
DependencyRecords record_triggers(const Trace& trace, const UpdateSchedule& schedule,
                                  const Graph& graph);

/// Dependency chain ending at `target`, oldest update first:
///   self-triggered (v,1)       -> [(v,1)]
///   self-triggered (v,i), i>1  -> chain(v,i-1), (v,i)
///   triggered by (u,j)         -> chain(u,j), (v,i)
/// A cycle raises invariant_error.
std::vector<UpdateId> chain_of(const DependencyRecords& records, UpdateId target);

/// Chain length (number of updates) of every update, indexed like records.
/// Each chain must strictly increase in the (time, node id) order; a
/// violation raises invariant_error.
std::vector<std::vector<std::uint32_t>> chain_lengths(const DependencyRecords& records,
                                                      const UpdateSchedule& schedule);

/// True iff consecutive updates of `chain` strictly increase in (time, node id).
bool is_monotone(const UpdateSchedule& schedule, const std::vector<UpdateId>& chain);

struct ResidenceReport {
  std::vector<double> residence;           // R_v
  std::vector<std::uint32_t> chain_length; // len(D_v^{m_v}), 0 when m_v = 0
  double max_residence = 0.0;
  std::uint32_t max_chain_length = 0;
  std::vector<NodeId> violations;          // nodes with ceil(R_v) > len(D_v^{m_v})
};

/// Phase-II residence of every node next to the length of its last chain.
/// With `enforce`, a node whose ceil(R_v) exceeds its chain length raises
/// invariant_error.
ResidenceReport phase2_residence(const RunResult& run, const UpdateSchedule& schedule,
                                 const Graph& graph, bool enforce = true);

}  // namespace asyncmetro
