#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "asyncmetro/model.hpp"
#include "asyncmetro/resolve.hpp"
#include "asyncmetro/schedule.hpp"

namespace asyncmetro {

enum class MessageKind : std::uint8_t { PhaseOneInfo, Accept, Reject };

std::string to_string(MessageKind kind);

/// One transmission on a directed channel. Phase-I information travels as a
/// stream of `packets` packets (one per update, at least one); decisions are
/// single 1-bit messages without an update index, the receiver infers it
/// from FIFO order.
struct Message {
  MessageKind kind = MessageKind::PhaseOneInfo;
  NodeId src = 0;
  NodeId dst = 0;
  std::uint32_t packet = 0;
  std::uint32_t packets = 1;
  double send_vtime = 0.0;
  double deliver_vtime = 0.0;
  std::uint32_t bit_cost = 0;
  std::uint64_t channel_seq = 0;
};

enum class SchedulerPolicy { Synchronous, UniformRandom, AdversarialMax, Fixed, Adaptive };

std::string to_string(SchedulerPolicy policy);
SchedulerPolicy parse_scheduler_policy(const std::string& name);

/// Chooses the delay in (0,1] of every message. Deterministic given the
/// policy, its seed and the sequence of messages it is asked about.
class Scheduler {
 public:
  using DelayFn = std::function<double(const Message&)>;

  static Scheduler synchronous();
  static Scheduler uniform_random(std::uint64_t seed);
  static Scheduler adversarial_max();
  /// Per directed channel (src,dst) delay; channels not in the table use
  /// `default_delay`.
  static Scheduler fixed(std::map<std::pair<NodeId, NodeId>, double> table, double default_delay = 1.0);
  /// Hook for policies that look at the message (and whatever state the
  /// callable captures).
  static Scheduler adaptive(DelayFn fn);

  SchedulerPolicy policy() const { return policy_; }
  std::string name() const { return to_string(policy_); }

  /// Delay for `msg`; throws invariant_error if the policy leaves (0,1].
  double next_delay(const Message& msg);

 private:
  SchedulerPolicy policy_ = SchedulerPolicy::Synchronous;
  std::mt19937_64 gen_;
  std::shared_ptr<const std::map<std::pair<NodeId, NodeId>, double>> table_;
  double default_delay_ = 1.0;
  DelayFn fn_;
};

/// Bits charged to Phase-I packet `packet` of a node with m updates:
/// a final-packet flag, the initial value on the first packet, and per update
/// a timestamp (integer part plus n^-4 resolution) and a proposal.
std::uint32_t phase_one_packet_bits(NodeId n, double horizon, State q, std::uint32_t m,
                                    std::uint32_t packet);

/// Per-message ceiling 4 (lg n + lg(ceil(T)+1) + lg q) + 4, with each lg
/// rounded up and floored at 1.
std::uint32_t message_bit_budget(NodeId n, double horizon, State q);

struct RunStats {
  double makespan = 0.0;    // last termination (or Phase-I end if later)
  double phase1_end = 0.0;  // moment every node is in Phase II
  std::vector<double> phase2_entry;
  std::vector<double> termination;
  std::vector<double> residence;  // R_v = max(0, termination - phase1_end)
  std::uint64_t message_count = 0;       // phase_one_messages + decision_messages
  std::uint64_t phase_one_messages = 0;  // one per directed edge
  std::uint64_t decision_messages = 0;
  std::uint64_t phase_one_packets = 0;
  std::uint64_t total_bits = 0;
  std::uint32_t max_message_bits = 0;

  double max_residence() const;
  bool operator==(const RunStats&) const = default;
};

enum class TraceKind : std::uint8_t { Emit, Deliver, EnterPhase2, Resolve, Halt };

struct TraceEvent {
  double vtime = 0.0;
  TraceKind kind = TraceKind::Emit;
  NodeId src = 0;
  NodeId dst = 0;
  // Emit / Deliver
  MessageKind message = MessageKind::PhaseOneInfo;
  std::uint32_t packet = 0;
  std::uint32_t packets = 0;
  std::uint32_t bits = 0;
  // Resolve
  std::uint32_t index = 0;
  bool accepted = false;
  bool self_triggered = false;
  UpdateId trigger{};

  bool operator==(const TraceEvent&) const = default;
};

enum class TraceLevel { Off, Resolutions, Full };

struct Trace {
  NodeId num_nodes = 0;
  TraceLevel level = TraceLevel::Off;
  std::vector<TraceEvent> events;  // sorted by vtime, stable
};

/// Text form, one event per line: "vtime kind src dst payload".
void write_trace(std::ostream& out, const Trace& trace);
Trace read_trace(std::istream& in);

/// Recomputes RunStats from a Full trace.
RunStats stats_from_trace(const Trace& trace);

struct RunOptions {
  TraceLevel trace = TraceLevel::Resolutions;
#ifdef NDEBUG
  bool cross_check_coloring = false;
#else
  bool cross_check_coloring = true;
#endif
};

struct RunResult {
  Configuration final_state;
  RunStats stats;
  Trace trace;
};

/// Raised when the event queue drains with unresolved updates.
class DeadlockError : public invariant_error {
 public:
  using invariant_error::invariant_error;
};

/// Runs the two-phase protocol at every node as a discrete-event simulation.
/// Phase I: every node streams its initial value and its (time, proposal)
/// list to each neighbor, one packet per time unit per channel; a node enters
/// Phase II once it holds the streams of all neighbors. Phase II: updates are
/// resolved in order with the schedule's coin, re-testing the thresholds
/// after every delivered decision.
RunResult run_network(const SpinModel& model, const UpdateSchedule& schedule,
                      const Configuration& initial, Scheduler scheduler,
                      const RunOptions& options = {});

}  // namespace asyncmetro
