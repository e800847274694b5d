#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "asyncmetro/config.hpp"
#include "asyncmetro/instrument.hpp"
#include "asyncmetro/netsim.hpp"

namespace asyncmetro {

/// Column list of every per-run CSV this harness writes.
extern const char* const kRunCsvHeader;

/// Scheduler for one run; uniform delays get a stream keyed by the run seed.
Scheduler make_scheduler(const ExperimentConfig& cfg, SchedulerPolicy policy, std::uint64_t run_seed);

/// One executed (seed, scheduler) cell.
struct RunRecord {
  std::uint64_t seed = 0;
  SchedulerPolicy scheduler = SchedulerPolicy::Synchronous;
  NodeId n = 0;
  std::uint32_t max_degree = 0;
  std::string model;
  State q = 0;
  double lambda = 0.0;
  double beta = 0.0;
  double horizon = 0.0;
  RunStats stats;
  double max_residence = 0.0;
  std::uint32_t max_chain_length = 0;
  std::size_t bound_violations = 0;  // nodes with ceil(R_v) above their chain length
  Configuration final_state;
};

/// Generates the schedule for `seed`, runs the network and measures chains.
/// With `trace_out`, the full event trace is written there.
RunRecord execute_run(const ExperimentConfig& cfg, const SpinModel& model, const Configuration& initial,
                      double horizon, std::uint64_t seed, SchedulerPolicy policy,
                      std::ostream* trace_out = nullptr);

/// Schedule seeds of an experiment: each configured seed, then for repeats
/// > 1 further seeds derived from it.
std::vector<std::uint64_t> run_seeds(const ExperimentConfig& cfg);

void write_run_row(std::ostream& out, const RunRecord& r);

/// Worker count from ASYNCMETRO_WORKERS, else the hardware concurrency.
unsigned worker_count();

/// Calls job(k) for k in [0, count) on `workers` threads. Exceptions are
/// rethrown on the caller's thread (the first one wins).
void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& job);

/// Subcommands. Each returns the process exit code and writes its report to
/// `out`, diagnostics to `err`.
struct RunOutputs {
  std::ostream* csv = nullptr;
  std::ostream* finals = nullptr;  // "seed scheduler v0 v1 ..." per run
  std::string trace_dir;           // one full trace file per run when set
};
int cmd_run(const ExperimentConfig& cfg, const RunOutputs& outputs, std::ostream& err);

/// Changes one coin of `schedule` so that the sequential chain started from
/// `initial` takes a different decision at that update. Returns the update,
/// or nothing when no coin can flip a decision (pure indicator filters).
std::optional<UpdateId> corrupt_one_coin(const SpinModel& model, UpdateSchedule& schedule,
                                         const Configuration& initial);

/// Pathwise comparison of the network against the sequential chain, update
/// by update. `corrupt_coin` perturbs the network's copy of the schedule.
int cmd_verify_coupling(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err,
                        bool corrupt_coin = false);

struct TvReport {
  SchedulerPolicy scheduler = SchedulerPolicy::Synchronous;
  std::uint32_t runs = 0;
  double tv = 0.0;
};

/// Empirical law of the final configuration over independent runs (one
/// schedule seed per run) against the exact target law.
std::vector<TvReport> tv_test(const ExperimentConfig& cfg, unsigned workers);
int cmd_tv_test(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);

struct SweepCell {
  NodeId n = 0;
  double horizon = 0.0;
  std::vector<RunRecord> runs;
  double median_makespan = 0.0, max_makespan = 0.0;
  double median_residence = 0.0, max_residence = 0.0;
  double median_chain = 0.0, max_chain = 0.0;
};

struct SweepResult {
  std::vector<SweepCell> cells;  // sorted by (n, T)
  /// Least squares of the per-cell median max R_v on [1, ln n] (plus T when
  /// the T grid has more than one value).
  std::vector<std::string> fit_terms;
  std::vector<double> fit_coefficients;
  std::vector<double> fit_residuals;
  double r_squared = 0.0;
};

SweepResult sweep(const ExperimentConfig& cfg, unsigned workers);
int cmd_sweep(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);

int cmd_dump_schedule(const ExperimentConfig& cfg, std::uint64_t seed, std::ostream& out, std::ostream& err);

/// Reads a full trace and prints the RunStats it implies.
int cmd_replay_trace(std::istream& trace, std::ostream& out, std::ostream& err);

void write_run_stats(std::ostream& out, const RunStats& s);

}  // namespace asyncmetro
