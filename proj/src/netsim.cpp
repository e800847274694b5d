#include "asyncmetro/netsim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <istream>
#include <optional>
#include <ostream>
#include <queue>
#include <sstream>

#include "asyncmetro/random.hpp"

namespace asyncmetro {

std::string to_string(MessageKind kind) {
  switch (kind) {
    case MessageKind::PhaseOneInfo: return "info";
    case MessageKind::Accept: return "accept";
    case MessageKind::Reject: return "reject";
  }
  return "?";
}

std::string to_string(SchedulerPolicy policy) {
  switch (policy) {
    case SchedulerPolicy::Synchronous: return "synchronous";
    case SchedulerPolicy::UniformRandom: return "uniform";
    case SchedulerPolicy::AdversarialMax: return "adversarial";
    case SchedulerPolicy::Fixed: return "fixed";
    case SchedulerPolicy::Adaptive: return "adaptive";
  }
  return "?";
}

SchedulerPolicy parse_scheduler_policy(const std::string& name) {
  if (name == "synchronous" || name == "sync") return SchedulerPolicy::Synchronous;
  if (name == "uniform" || name == "uniform-random" || name == "random") return SchedulerPolicy::UniformRandom;
  if (name == "adversarial" || name == "adversarial-max" || name == "max") return SchedulerPolicy::AdversarialMax;
  if (name == "fixed") return SchedulerPolicy::Fixed;
  throw std::invalid_argument("unknown scheduler policy '" + name + "'");
}

Scheduler Scheduler::synchronous() { return Scheduler{}; }

Scheduler Scheduler::uniform_random(std::uint64_t seed) {
  Scheduler s;
  s.policy_ = SchedulerPolicy::UniformRandom;
  s.gen_.seed(rng::derive_seed(seed, 0x64656C6179ULL));
  return s;
}

Scheduler Scheduler::adversarial_max() {
  Scheduler s;
  s.policy_ = SchedulerPolicy::AdversarialMax;
  return s;
}

Scheduler Scheduler::fixed(std::map<std::pair<NodeId, NodeId>, double> table, double default_delay) {
  Scheduler s;
  s.policy_ = SchedulerPolicy::Fixed;
  s.table_ = std::make_shared<const std::map<std::pair<NodeId, NodeId>, double>>(std::move(table));
  s.default_delay_ = default_delay;
  return s;
}

Scheduler Scheduler::adaptive(DelayFn fn) {
  if (!fn) throw std::invalid_argument("adaptive scheduler needs a delay function");
  Scheduler s;
  s.policy_ = SchedulerPolicy::Adaptive;
  s.fn_ = std::move(fn);
  return s;
}

double Scheduler::next_delay(const Message& msg) {
  double d = 1.0;
  switch (policy_) {
    case SchedulerPolicy::Synchronous:
    case SchedulerPolicy::AdversarialMax:
      d = 1.0;
      break;
    case SchedulerPolicy::UniformRandom:
      d = 1.0 - rng::uniform01(gen_);
      break;
    case SchedulerPolicy::Fixed: {
      auto it = table_->find({msg.src, msg.dst});
      d = it == table_->end() ? default_delay_ : it->second;
      break;
    }
    case SchedulerPolicy::Adaptive:
      d = fn_(msg);
      break;
  }
  check_invariant(d > 0.0 && d <= 1.0, "scheduler produced a delay outside (0,1]");
  return d;
}

namespace {

std::uint32_t lg_ceil(double x) {
  if (x <= 2.0) return 1;
  return static_cast<std::uint32_t>(std::ceil(std::log2(x)));
}

}  // namespace

std::uint32_t phase_one_packet_bits(NodeId n, double horizon, State q, std::uint32_t m,
                                    std::uint32_t packet) {
  const std::uint32_t ln = lg_ceil(n), lt = lg_ceil(std::ceil(horizon) + 1.0), lq = lg_ceil(q);
  std::uint32_t bits = 1;
  if (packet == 0) bits += lq;
  if (m > 0) bits += lt + 4 * ln + lq;
  return bits;
}

std::uint32_t message_bit_budget(NodeId n, double horizon, State q) {
  const std::uint32_t ln = lg_ceil(n), lt = lg_ceil(std::ceil(horizon) + 1.0), lq = lg_ceil(q);
  return 4 * (ln + lt + lq) + 4;
}

double RunStats::max_residence() const {
  double r = 0.0;
  for (double x : residence) r = std::max(r, x);
  return r;
}

namespace {

struct Channel {
  std::uint64_t next_send_seq = 0;
  std::uint64_t next_deliver_seq = 0;
  double last_deliver = 0.0;
  double phase_one_last_emit = 0.0;
};

struct QueuedDecision {
  std::uint32_t slot;
  bool accepted;
};

struct NodeState {
  bool in_phase2 = false;
  bool halted = false;
  std::uint32_t neighbors_pending = 0;
  std::vector<std::uint32_t> packets_received;  // per slot
  std::deque<QueuedDecision> queue;             // decisions received in Phase I
  std::uint32_t index = 1;                      // update being resolved
  State value = 0;
  std::vector<std::vector<State>> history;      // per slot, size j_u
  std::vector<StateSet> sets;                   // per slot, for the current update
  Thresholds thresholds;
};

struct Delivery {
  Message msg;
  bool operator>(const Delivery& o) const {
    if (msg.deliver_vtime != o.msg.deliver_vtime) return msg.deliver_vtime > o.msg.deliver_vtime;
    if (msg.src != o.msg.src) return msg.src > o.msg.src;
    if (msg.dst != o.msg.dst) return msg.dst > o.msg.dst;
    return msg.channel_seq > o.msg.channel_seq;
  }
};

class Simulation {
 public:
  Simulation(const SpinModel& model, const UpdateSchedule& schedule, const Configuration& initial,
             Scheduler scheduler, const RunOptions& options)
      : model_(model),
        graph_(model.graph()),
        schedule_(schedule),
        scheduler_(std::move(scheduler)),
        options_(options),
        n_(model.num_nodes()) {
    validate_configuration(model, initial);
    validate_schedule(model, schedule);
    nodes_.resize(n_);
    channels_.resize(2 * graph_.num_edges());
    reverse_slot_.resize(2 * graph_.num_edges());
    for (NodeId v = 0; v < n_; ++v) {
      auto& st = nodes_[v];
      const auto nb = graph_.neighbors(v);
      st.value = initial[v];
      st.neighbors_pending = static_cast<std::uint32_t>(nb.size());
      st.packets_received.assign(nb.size(), 0);
      st.history.resize(nb.size());
      st.sets.resize(nb.size());
      for (std::uint32_t k = 0; k < nb.size(); ++k) {
        st.history[k].reserve(schedule.nodes[nb[k]].count() + 1);
        st.history[k].push_back(initial[nb[k]]);
        reverse_slot_[graph_.edge_id(v, k)] = graph_.neighbor_slot(nb[k], v);
      }
    }
    stats_.phase2_entry.assign(n_, 0.0);
    stats_.termination.assign(n_, 0.0);
    stats_.residence.assign(n_, 0.0);
    trace_.num_nodes = n_;
    trace_.level = options.trace;
  }

  RunResult run() {
    start_phase_one();
    for (NodeId v = 0; v < n_; ++v) {
      if (graph_.degree(v) == 0) enter_phase_two(v, 0.0);
    }
    while (!queue_.empty()) {
      const Message msg = queue_.top().msg;
      queue_.pop();
      deliver(msg);
    }
    check_all_halted();
    finish_stats();

    RunResult out;
    out.final_state.values.resize(n_);
    for (NodeId v = 0; v < n_; ++v) out.final_state[v] = nodes_[v].value;
    out.stats = std::move(stats_);
    std::stable_sort(trace_.events.begin(), trace_.events.end(),
                     [](const TraceEvent& a, const TraceEvent& b) { return a.vtime < b.vtime; });
    out.trace = std::move(trace_);
    return out;
  }

 private:
  const std::vector<double>& times(NodeId v) const { return schedule_.nodes[v].times; }

  void log(const TraceEvent& e) {
    if (options_.trace == TraceLevel::Off) return;
    if (options_.trace == TraceLevel::Resolutions &&
        (e.kind == TraceKind::Emit || e.kind == TraceKind::Deliver))
      return;
    trace_.events.push_back(e);
  }

  void log_message(TraceKind kind, const Message& m, double vtime) {
    TraceEvent e;
    e.vtime = vtime;
    e.kind = kind;
    e.src = m.src;
    e.dst = m.dst;
    e.message = m.kind;
    e.packet = m.packet;
    e.packets = m.packets;
    e.bits = m.bit_cost;
    log(e);
  }

  // Emission time is when the message enters the channel; delivery respects
  // both the sampled delay and FIFO order.
  void transmit(Message m, std::uint32_t slot) {
    auto& ch = channels_[graph_.edge_id(m.src, slot)];
    m.channel_seq = ch.next_send_seq++;
    const double delay = scheduler_.next_delay(m);
    m.deliver_vtime = std::max(m.send_vtime + delay, ch.last_deliver);
    ch.last_deliver = m.deliver_vtime;
    stats_.total_bits += m.bit_cost;
    stats_.max_message_bits = std::max(stats_.max_message_bits, m.bit_cost);
    log_message(TraceKind::Emit, m, m.send_vtime);
    queue_.push({m});
  }

  void start_phase_one() {
    for (NodeId v = 0; v < n_; ++v) {
      const std::uint32_t m = schedule_.nodes[v].count();
      const std::uint32_t packets = std::max<std::uint32_t>(1, m);
      const auto nb = graph_.neighbors(v);
      for (std::uint32_t k = 0; k < nb.size(); ++k) {
        ++stats_.phase_one_messages;
        for (std::uint32_t p = 0; p < packets; ++p) {
          Message msg;
          msg.kind = MessageKind::PhaseOneInfo;
          msg.src = v;
          msg.dst = nb[k];
          msg.packet = p;
          msg.packets = packets;
          msg.send_vtime = static_cast<double>(p);
          msg.bit_cost = phase_one_packet_bits(n_, schedule_.horizon, model_.q(), m, p);
          ++stats_.phase_one_packets;
          transmit(msg, k);
        }
        channels_[graph_.edge_id(v, k)].phase_one_last_emit = static_cast<double>(packets - 1);
      }
    }
  }

  void deliver(const Message& msg) {
    const NodeId v = msg.dst;
    const std::uint32_t out_slot = graph_.neighbor_slot(msg.src, v);
    auto& ch = channels_[graph_.edge_id(msg.src, out_slot)];
    check_invariant(msg.channel_seq == ch.next_deliver_seq, "FIFO violation or duplicate delivery");
    ++ch.next_deliver_seq;
    const double now = msg.deliver_vtime;
    log_message(TraceKind::Deliver, msg, now);

    auto& st = nodes_[v];
    const std::uint32_t slot = reverse_slot_[graph_.edge_id(msg.src, out_slot)];
    if (msg.kind == MessageKind::PhaseOneInfo) {
      check_invariant(!st.in_phase2, "Phase-I packet after Phase-II entry");
      check_invariant(st.packets_received[slot] == msg.packet, "Phase-I packets out of order");
      if (++st.packets_received[slot] == msg.packets) {
        if (--st.neighbors_pending == 0) enter_phase_two(v, now);
      }
      return;
    }
    const bool accepted = msg.kind == MessageKind::Accept;
    if (!st.in_phase2) {
      st.queue.push_back({slot, accepted});
      return;
    }
    on_decision(v, slot, accepted, now);
  }

  void enter_phase_two(NodeId v, double now) {
    auto& st = nodes_[v];
    st.in_phase2 = true;
    stats_.phase2_entry[v] = now;
    TraceEvent e;
    e.vtime = now;
    e.kind = TraceKind::EnterPhase2;
    e.src = e.dst = v;
    log(e);

    if (schedule_.nodes[v].count() == 0) {
      halt(v, now);
    } else {
      begin_update(v);
      try_resolve(v, now, std::nullopt);
    }
    while (!st.queue.empty()) {
      const auto d = st.queue.front();
      st.queue.pop_front();
      on_decision(v, d.slot, d.accepted, now);
    }
  }

  // Records the outcome of neighbor update (u, j_u) and re-tests.
  void on_decision(NodeId v, std::uint32_t slot, bool accepted, double now) {
    auto& st = nodes_[v];
    const NodeId u = graph_.neighbors(v)[slot];
    auto& hist = st.history[slot];
    const auto j = static_cast<std::uint32_t>(hist.size());
    check_invariant(j <= schedule_.nodes[u].count(), "decision for an update the neighbor does not have");
    hist.push_back(accepted ? schedule_.nodes[u].proposals[j - 1] : hist.back());
    if (st.halted) return;
    st.sets[slot] = possible_states(schedule_.nodes[u], u, hist, query(v), schedule_.horizon);
    refresh_thresholds(v);
    try_resolve(v, now, UpdateId{u, j});
  }

  UpdateKey query(NodeId v) const { return {times(v)[nodes_[v].index - 1], v}; }

  void begin_update(NodeId v) {
    auto& st = nodes_[v];
    const auto nb = graph_.neighbors(v);
    const UpdateKey q = query(v);
    for (std::uint32_t k = 0; k < nb.size(); ++k)
      st.sets[k] = possible_states(schedule_.nodes[nb[k]], nb[k], st.history[k], q, schedule_.horizon);
    refresh_thresholds(v);
  }

  void refresh_thresholds(NodeId v) {
    auto& st = nodes_[v];
    const State c_prime = schedule_.nodes[v].proposals[st.index - 1];
    st.thresholds = thresholds(model_, v, st.value, c_prime, st.sets);
    if (options_.cross_check_coloring && model_.kind() == ModelKind::Coloring) {
      const auto cc = coloring_conditions(c_prime, st.sets);
      check_invariant(cc.accept == (st.thresholds.p_ac() == 1.0), "coloring accept condition disagrees with P_AC");
      check_invariant(cc.reject == (st.thresholds.p_re() == 1.0), "coloring reject condition disagrees with P_RE");
    }
  }

  void try_resolve(NodeId v, double now, std::optional<UpdateId> trigger) {
    auto& st = nodes_[v];
    const auto& updates = schedule_.nodes[v];
    while (!st.halted) {
      const double coin = updates.coins[st.index - 1];
      const Verdict verdict = decide(coin, st.thresholds);
      if (verdict == Verdict::Pending) return;
      const bool accepted = verdict == Verdict::Accept;
      if (accepted) st.value = updates.proposals[st.index - 1];

      TraceEvent e;
      e.vtime = now;
      e.kind = TraceKind::Resolve;
      e.src = e.dst = v;
      e.index = st.index;
      e.accepted = accepted;
      e.self_triggered = !trigger.has_value();
      if (trigger) e.trigger = *trigger;
      log(e);

      send_decisions(v, accepted, now);
      ++st.index;
      trigger.reset();  // the next update's first evaluation is self-triggered
      if (st.index > updates.count()) {
        halt(v, now);
      } else {
        begin_update(v);
      }
    }
  }

  void send_decisions(NodeId v, bool accepted, double now) {
    const auto nb = graph_.neighbors(v);
    for (std::uint32_t k = 0; k < nb.size(); ++k) {
      const auto& ch = channels_[graph_.edge_id(v, k)];
      Message msg;
      msg.kind = accepted ? MessageKind::Accept : MessageKind::Reject;
      msg.src = v;
      msg.dst = nb[k];
      msg.send_vtime = std::max(now, ch.phase_one_last_emit);
      msg.bit_cost = 1;
      ++stats_.decision_messages;
      transmit(msg, k);
    }
  }

  void halt(NodeId v, double now) {
    nodes_[v].halted = true;
    stats_.termination[v] = now;
    TraceEvent e;
    e.vtime = now;
    e.kind = TraceKind::Halt;
    e.src = e.dst = v;
    log(e);
  }

  void check_all_halted() const {
    std::ostringstream dump;
    bool stuck = false;
    for (NodeId v = 0; v < n_; ++v) {
      const auto& st = nodes_[v];
      if (st.halted) continue;
      stuck = true;
      dump << "  node " << v << (st.in_phase2 ? " phase II" : " phase I") << " update " << st.index
           << "/" << schedule_.nodes[v].count() << " P_AC=" << st.thresholds.p_ac()
           << " P_RE=" << st.thresholds.p_re() << " j=(";
      for (std::size_t k = 0; k < st.history.size(); ++k) dump << (k ? "," : "") << st.history[k].size();
      dump << ")\n";
    }
    if (stuck) throw DeadlockError("event queue drained with unresolved updates:\n" + dump.str());
  }

  void finish_stats() {
    stats_.message_count = stats_.phase_one_messages + stats_.decision_messages;
    stats_.phase1_end = 0.0;
    for (double t : stats_.phase2_entry) stats_.phase1_end = std::max(stats_.phase1_end, t);
    stats_.makespan = stats_.phase1_end;
    for (NodeId v = 0; v < n_; ++v) {
      stats_.makespan = std::max(stats_.makespan, stats_.termination[v]);
      stats_.residence[v] = std::max(0.0, stats_.termination[v] - stats_.phase1_end);
    }
  }

  const SpinModel& model_;
  const Graph& graph_;
  const UpdateSchedule& schedule_;
  Scheduler scheduler_;
  RunOptions options_;
  NodeId n_;
  std::vector<NodeState> nodes_;
  std::vector<Channel> channels_;
  std::vector<std::uint32_t> reverse_slot_;  // edge id (v->u) -> slot of v in N(u)
  std::priority_queue<Delivery, std::vector<Delivery>, std::greater<>> queue_;
  RunStats stats_;
  Trace trace_;
};

const char* kind_token(TraceKind k) {
  switch (k) {
    case TraceKind::Emit: return "emit";
    case TraceKind::Deliver: return "deliver";
    case TraceKind::EnterPhase2: return "phase2";
    case TraceKind::Resolve: return "resolve";
    case TraceKind::Halt: return "halt";
  }
  return "?";
}

MessageKind parse_message_kind(const std::string& s) {
  if (s == "info") return MessageKind::PhaseOneInfo;
  if (s == "accept") return MessageKind::Accept;
  if (s == "reject") return MessageKind::Reject;
  throw std::invalid_argument("trace: unknown message kind '" + s + "'");
}

}  // namespace

RunResult run_network(const SpinModel& model, const UpdateSchedule& schedule,
                      const Configuration& initial, Scheduler scheduler, const RunOptions& options) {
  Simulation sim(model, schedule, initial, std::move(scheduler), options);
  return sim.run();
}

void write_trace(std::ostream& out, const Trace& trace) {
  out << "# asyncmetro-trace n=" << trace.num_nodes
      << (trace.level == TraceLevel::Full ? " level=full" : " level=resolutions") << '\n';
  char vt[40];
  for (const auto& e : trace.events) {
    std::snprintf(vt, sizeof vt, "%.17g", e.vtime);
    out << vt << ' ' << kind_token(e.kind) << ' ' << e.src << ' ' << e.dst << ' ';
    switch (e.kind) {
      case TraceKind::Emit:
      case TraceKind::Deliver:
        out << to_string(e.message) << ' ' << e.packet << '/' << e.packets << ' ' << e.bits;
        break;
      case TraceKind::Resolve:
        out << e.index << ' ' << (e.accepted ? "accept" : "reject") << ' ';
        if (e.self_triggered) {
          out << "self";
        } else {
          out << e.trigger.node << ':' << e.trigger.index;
        }
        break;
      case TraceKind::EnterPhase2:
      case TraceKind::Halt:
        out << '-';
        break;
    }
    out << '\n';
  }
}

Trace read_trace(std::istream& in) {
  Trace trace;
  std::string line;
  if (!std::getline(in, line) || line.rfind("# asyncmetro-trace n=", 0) != 0)
    throw std::invalid_argument("trace: missing header");
  {
    std::istringstream hs(line.substr(21));
    std::string level;
    hs >> trace.num_nodes >> level;
    if (hs.fail()) throw std::invalid_argument("trace: bad header");
    trace.level = level == "level=full" ? TraceLevel::Full : TraceLevel::Resolutions;
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    TraceEvent e;
    std::string kind;
    if (!(ls >> e.vtime >> kind >> e.src >> e.dst))
      throw std::invalid_argument("trace line " + std::to_string(lineno) + " malformed");
    if (kind == "emit" || kind == "deliver") {
      e.kind = kind == "emit" ? TraceKind::Emit : TraceKind::Deliver;
      std::string mk, frac;
      if (!(ls >> mk >> frac >> e.bits)) throw std::invalid_argument("trace line " + std::to_string(lineno) + " malformed");
      e.message = parse_message_kind(mk);
      const auto slash = frac.find('/');
      if (slash == std::string::npos) throw std::invalid_argument("trace line " + std::to_string(lineno) + " malformed");
      e.packet = static_cast<std::uint32_t>(std::stoul(frac.substr(0, slash)));
      e.packets = static_cast<std::uint32_t>(std::stoul(frac.substr(slash + 1)));
    } else if (kind == "resolve") {
      e.kind = TraceKind::Resolve;
      std::string outcome, cause;
      if (!(ls >> e.index >> outcome >> cause)) throw std::invalid_argument("trace line " + std::to_string(lineno) + " malformed");
      e.accepted = outcome == "accept";
      if (cause == "self") {
        e.self_triggered = true;
      } else {
        const auto colon = cause.find(':');
        if (colon == std::string::npos) throw std::invalid_argument("trace line " + std::to_string(lineno) + " malformed");
        e.trigger.node = static_cast<NodeId>(std::stoul(cause.substr(0, colon)));
        e.trigger.index = static_cast<std::uint32_t>(std::stoul(cause.substr(colon + 1)));
      }
    } else if (kind == "phase2") {
      e.kind = TraceKind::EnterPhase2;
    } else if (kind == "halt") {
      e.kind = TraceKind::Halt;
    } else {
      throw std::invalid_argument("trace line " + std::to_string(lineno) + ": unknown kind '" + kind + "'");
    }
    trace.events.push_back(e);
  }
  return trace;
}

RunStats stats_from_trace(const Trace& trace) {
  RunStats s;
  const NodeId n = trace.num_nodes;
  s.phase2_entry.assign(n, 0.0);
  s.termination.assign(n, 0.0);
  s.residence.assign(n, 0.0);
  for (const auto& e : trace.events) {
    switch (e.kind) {
      case TraceKind::Emit:
        s.total_bits += e.bits;
        s.max_message_bits = std::max(s.max_message_bits, e.bits);
        if (e.message == MessageKind::PhaseOneInfo) {
          ++s.phase_one_packets;
          if (e.packet == 0) ++s.phase_one_messages;
        } else {
          ++s.decision_messages;
        }
        break;
      case TraceKind::EnterPhase2:
        s.phase2_entry.at(e.src) = e.vtime;
        break;
      case TraceKind::Halt:
        s.termination.at(e.src) = e.vtime;
        break;
      default:
        break;
    }
  }
  s.message_count = s.phase_one_messages + s.decision_messages;
  for (double t : s.phase2_entry) s.phase1_end = std::max(s.phase1_end, t);
  s.makespan = s.phase1_end;
  for (NodeId v = 0; v < n; ++v) {
    s.makespan = std::max(s.makespan, s.termination[v]);
    s.residence[v] = std::max(0.0, s.termination[v] - s.phase1_end);
  }
  return s;
}

}  // namespace asyncmetro
