#include "asyncmetro/instrument.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace asyncmetro {

namespace {

std::string name(UpdateId id) {
  return "(" + std::to_string(id.node) + "," + std::to_string(id.index) + ")";
}

bool valid_id(const DependencyRecords& records, UpdateId id) {
  return id.node < records.size() && id.index >= 1 && id.index <= records[id.node].size();
}

}  // namespace

DependencyRecords record_triggers(const Trace& trace, const UpdateSchedule& schedule,
                                  const Graph& graph) {
  check_invariant(trace.level != TraceLevel::Off, "record_triggers needs a trace with resolutions");
  check_invariant(trace.num_nodes == schedule.num_nodes(), "trace and schedule disagree on n");
  const NodeId n = schedule.num_nodes();
  DependencyRecords records(n);
  std::vector<std::vector<char>> seen(n);
  for (NodeId v = 0; v < n; ++v) {
    records[v].resize(schedule.nodes[v].count());
    seen[v].assign(schedule.nodes[v].count(), 0);
  }
  for (const auto& e : trace.events) {
    if (e.kind != TraceKind::Resolve) continue;
    const UpdateId id{e.src, e.index};
    check_invariant(valid_id(records, id), "trace resolves unknown update " + name(id));
    check_invariant(!seen[id.node][id.index - 1], "update " + name(id) + " resolved twice");
    seen[id.node][id.index - 1] = 1;
    if (!e.self_triggered) {
      check_invariant(e.trigger.node == id.node || graph.has_edge(id.node, e.trigger.node),
                      "update " + name(id) + " triggered by non-adjacent " + name(e.trigger));
    }
    records[id.node][id.index - 1] = {id, e.self_triggered, e.trigger, e.vtime};
  }
  for (NodeId v = 0; v < n; ++v)
    for (std::uint32_t i = 0; i < seen[v].size(); ++i)
      check_invariant(seen[v][i], "update " + name({v, i + 1}) + " never resolved");
  return records;
}

std::vector<UpdateId> chain_of(const DependencyRecords& records, UpdateId target) {
  std::vector<UpdateId> chain;
  std::size_t total = 0;
  for (const auto& r : records) total += r.size();
  UpdateId cur = target;
  while (true) {
    check_invariant(valid_id(records, cur), "chain reaches unknown update " + name(cur));
    check_invariant(chain.size() <= total, "cycle in dependency records at " + name(target));
    chain.push_back(cur);
    const auto& rec = records[cur.node][cur.index - 1];
    if (!rec.self_triggered) {
      cur = rec.trigger;
    } else if (cur.index > 1) {
      cur = {cur.node, cur.index - 1};
    } else {
      break;
    }
  }
  std::reverse(chain.begin(), chain.end());
  return chain;
}

bool is_monotone(const UpdateSchedule& schedule, const std::vector<UpdateId>& chain) {
  for (std::size_t k = 1; k < chain.size(); ++k)
    if (!(key_of(schedule, chain[k - 1]) < key_of(schedule, chain[k]))) return false;
  return true;
}

std::vector<std::vector<std::uint32_t>> chain_lengths(const DependencyRecords& records,
                                                      const UpdateSchedule& schedule) {
  // Every predecessor precedes its successor in total order, so one pass
  // in that order fills the table; a missing predecessor means monotonicity
  // broke.
  std::vector<std::vector<std::uint32_t>> len(records.size());
  for (std::size_t v = 0; v < records.size(); ++v) len[v].assign(records[v].size(), 0);
  for (const UpdateId id : total_order(schedule)) {
    const auto& rec = records[id.node][id.index - 1];
    std::uint32_t prev = 0;
    if (!rec.self_triggered) {
      const UpdateId t = rec.trigger;
      check_invariant(valid_id(records, t), "unknown trigger " + name(t));
      check_invariant(key_of(schedule, t) < key_of(schedule, id),
                      "trigger " + name(t) + " does not precede " + name(id));
      prev = len[t.node][t.index - 1];
    } else if (id.index > 1) {
      prev = len[id.node][id.index - 2];
    }
    check_invariant(rec.self_triggered && id.index == 1 ? prev == 0 : prev > 0,
                    "dependency of " + name(id) + " not yet resolved in order");
    len[id.node][id.index - 1] = prev + 1;
  }
  return len;
}

ResidenceReport phase2_residence(const RunResult& run, const UpdateSchedule& schedule,
                                 const Graph& graph, bool enforce) {
  const NodeId n = schedule.num_nodes();
  ResidenceReport rep;
  rep.residence = run.stats.residence;
  rep.chain_length.assign(n, 0);
  const auto records = record_triggers(run.trace, schedule, graph);
  const auto len = chain_lengths(records, schedule);
  for (NodeId v = 0; v < n; ++v) {
    if (!len[v].empty()) rep.chain_length[v] = len[v].back();
    rep.max_residence = std::max(rep.max_residence, rep.residence[v]);
    rep.max_chain_length = std::max(rep.max_chain_length, rep.chain_length[v]);
    if (std::ceil(rep.residence[v]) > static_cast<double>(rep.chain_length[v])) rep.violations.push_back(v);
  }
  if (enforce && !rep.violations.empty()) {
    const NodeId v = rep.violations.front();
    throw invariant_error("node " + std::to_string(v) + " stayed " + std::to_string(rep.residence[v]) +
                          " time units in Phase II with a chain of length " +
                          std::to_string(rep.chain_length[v]));
  }
  return rep;
}

}  // namespace asyncmetro
