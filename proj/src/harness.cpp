#include "asyncmetro/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <thread>

#include "asyncmetro/oracle.hpp"
#include "asyncmetro/random.hpp"
#include "asyncmetro/stats.hpp"

namespace asyncmetro {

const char* const kRunCsvHeader =
    "seed,scheduler,n,max_degree,model,q,lambda,beta,T,makespan,phase1_end,max_residence,"
    "max_chain_length,messages,bits";

namespace {

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

}  // namespace

Scheduler make_scheduler(const ExperimentConfig& cfg, SchedulerPolicy policy, std::uint64_t run_seed) {
  switch (policy) {
    case SchedulerPolicy::Synchronous: return Scheduler::synchronous();
    case SchedulerPolicy::UniformRandom:
      return Scheduler::uniform_random(rng::derive_seed(cfg.scheduler_seed, run_seed));
    case SchedulerPolicy::AdversarialMax: return Scheduler::adversarial_max();
    case SchedulerPolicy::Fixed: return Scheduler::fixed({}, cfg.fixed_delay);
    case SchedulerPolicy::Adaptive: break;
  }
  throw ConfigError("adaptive schedulers cannot be configured from a file");
}

std::vector<std::uint64_t> run_seeds(const ExperimentConfig& cfg) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t s : cfg.seeds()) {
    out.push_back(s);
    for (std::uint32_t r = 1; r < cfg.repeats; ++r) out.push_back(rng::derive_seed(s, r));
  }
  return out;
}

RunRecord execute_run(const ExperimentConfig& cfg, const SpinModel& model, const Configuration& initial,
                      double horizon, std::uint64_t seed, SchedulerPolicy policy, std::ostream* trace_out) {
  const UpdateSchedule schedule = generate_schedule(model, horizon, seed);
  RunOptions opts;
  opts.trace = trace_out ? TraceLevel::Full : TraceLevel::Resolutions;
  RunResult result = run_network(model, schedule, initial, make_scheduler(cfg, policy, seed), opts);
  if (trace_out) write_trace(*trace_out, result.trace);
  const ResidenceReport res = phase2_residence(result, schedule, model.graph(), false);

  RunRecord r;
  r.seed = seed;
  r.scheduler = policy;
  r.n = model.num_nodes();
  r.max_degree = model.graph().max_degree();
  r.model = cfg.model;
  r.q = model.q();
  r.lambda = model.kind() == ModelKind::Hardcore ? model.params().lambda : 0.0;
  r.beta = model.kind() == ModelKind::Ising ? model.params().beta : 0.0;
  r.horizon = horizon;
  r.stats = std::move(result.stats);
  r.max_residence = res.max_residence;
  r.max_chain_length = res.max_chain_length;
  r.bound_violations = res.violations.size();
  r.final_state = std::move(result.final_state);
  return r;
}

void write_run_row(std::ostream& out, const RunRecord& r) {
  out << r.seed << ',' << to_string(r.scheduler) << ',' << r.n << ',' << r.max_degree << ',' << r.model << ','
      << r.q << ',' << num(r.lambda) << ',' << num(r.beta) << ',' << num(r.horizon) << ','
      << num(r.stats.makespan) << ',' << num(r.stats.phase1_end) << ',' << num(r.max_residence) << ','
      << r.max_chain_length << ',' << r.stats.message_count << ',' << r.stats.total_bits << '\n';
}

unsigned worker_count() {
  if (const char* env = std::getenv("ASYNCMETRO_WORKERS")) {
    char* end = nullptr;
    const long w = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && w > 0) return static_cast<unsigned>(w);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& job) {
  workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, workers), std::max<std::size_t>(count, 1)));
  if (workers <= 1) {
    for (std::size_t k = 0; k < count; ++k) job(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < count; k = next++) {
        try {
          job(k);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!failure) failure = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

int cmd_run(const ExperimentConfig& cfg, const RunOutputs& outputs, std::ostream& err) {
  std::shared_ptr<const Graph> fixed_graph;
  std::optional<SpinModel> fixed_model;
  std::optional<Configuration> fixed_initial;
  try {
    if (!cfg.graph.resample) {
      fixed_graph = build_graph(cfg);
      fixed_model.emplace(build_model(cfg, fixed_graph));
      fixed_initial = initial_configuration(cfg, *fixed_model);
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  }
  if (outputs.csv) *outputs.csv << kRunCsvHeader << '\n';
  if (!outputs.trace_dir.empty()) std::filesystem::create_directories(outputs.trace_dir);

  int status = 0;
  for (std::uint64_t seed : run_seeds(cfg)) {
    std::optional<SpinModel> model = fixed_model;
    std::optional<Configuration> initial = fixed_initial;
    try {
      if (!model) {
        model.emplace(build_model(cfg, build_graph(cfg, std::nullopt, seed)));
        initial = initial_configuration(cfg, *model);
      }
    } catch (const ConfigError& e) {
      err << "config error: " << e.what() << '\n';
      return 2;
    }
    const double horizon = effective_horizon(cfg, cfg.horizon, model->num_nodes());
    for (SchedulerPolicy policy : cfg.schedulers) {
      std::ofstream trace_file;
      if (!outputs.trace_dir.empty()) {
        const auto path = std::filesystem::path(outputs.trace_dir) /
                          ("trace_" + std::to_string(seed) + "_" + to_string(policy) + ".txt");
        trace_file.open(path);
        if (!trace_file) {
          err << "cannot write " << path << '\n';
          return 2;
        }
      }
      try {
        const RunRecord r =
            execute_run(cfg, *model, *initial, horizon, seed, policy, trace_file.is_open() ? &trace_file : nullptr);
        if (outputs.csv) write_run_row(*outputs.csv, r);
        if (outputs.finals) {
          *outputs.finals << seed << ' ' << to_string(policy);
          for (State s : r.final_state.values) *outputs.finals << ' ' << s;
          *outputs.finals << '\n';
        }
      } catch (const DeadlockError& e) {
        err << "seed " << seed << " scheduler " << to_string(policy) << ": " << e.what() << '\n';
        status = 1;
      }
    }
  }
  return status;
}

std::optional<UpdateId> corrupt_one_coin(const SpinModel& model, UpdateSchedule& schedule,
                                         const Configuration& initial) {
  const Graph& g = model.graph();
  Configuration y = initial;
  std::vector<State> tau;
  for (const UpdateId id : total_order(schedule)) {
    auto& upd = schedule.nodes[id.node];
    const State c = y[id.node];
    const State cp = upd.proposals[id.index - 1];
    tau.clear();
    for (NodeId u : g.neighbors(id.node)) tau.push_back(y[u]);
    const double f = model.filter(id.node, c, cp, tau);
    double& coin = upd.coins[id.index - 1];
    const bool accepted = coin < f;
    if (cp != c) {
      if (accepted && f < 1.0) {
        coin = f;
        return id;
      }
      if (!accepted && f > 0.0) {
        coin = 0.0;
        return id;
      }
    }
    if (accepted) y[id.node] = cp;
  }
  return std::nullopt;
}

namespace {

// Per-update values of the network run, rebuilt from its resolution events.
std::vector<std::vector<State>> network_history(const UpdateSchedule& schedule, const Configuration& initial,
                                                const Trace& trace) {
  std::vector<std::vector<State>> hist(schedule.num_nodes());
  for (NodeId v = 0; v < schedule.num_nodes(); ++v) hist[v].assign(schedule.nodes[v].count() + 1, initial[v]);
  std::vector<std::vector<std::uint8_t>> outcome(schedule.num_nodes());
  for (NodeId v = 0; v < schedule.num_nodes(); ++v) outcome[v].assign(schedule.nodes[v].count(), 0);
  for (const auto& e : trace.events)
    if (e.kind == TraceKind::Resolve) outcome[e.src][e.index - 1] = e.accepted ? 1 : 2;
  for (NodeId v = 0; v < schedule.num_nodes(); ++v) {
    for (std::uint32_t i = 1; i <= schedule.nodes[v].count(); ++i) {
      check_invariant(outcome[v][i - 1] != 0, "network left an update unresolved");
      hist[v][i] = outcome[v][i - 1] == 1 ? schedule.nodes[v].proposals[i - 1] : hist[v][i - 1];
    }
  }
  return hist;
}

}  // namespace

int cmd_verify_coupling(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err, bool corrupt_coin) {
  std::size_t checked = 0;
  for (std::uint64_t seed : run_seeds(cfg)) {
    std::optional<SpinModel> model;
    Configuration initial;
    try {
      model.emplace(build_model(cfg, build_graph(cfg, std::nullopt, seed)));
      initial = initial_configuration(cfg, *model);
    } catch (const ConfigError& e) {
      err << "config error: " << e.what() << '\n';
      return 2;
    }
    const double horizon = effective_horizon(cfg, cfg.horizon, model->num_nodes());
    const UpdateSchedule schedule = generate_schedule(*model, horizon, seed);
    const ContinuousRun oracle = run_continuous(*model, schedule, initial);

    UpdateSchedule network_schedule = schedule;
    if (corrupt_coin && !corrupt_one_coin(*model, network_schedule, initial)) {
      err << "seed " << seed << ": no coin can change a decision, negative control not applicable\n";
      continue;
    }
    for (SchedulerPolicy policy : cfg.schedulers) {
      RunResult run;
      try {
        run = run_network(*model, network_schedule, initial, make_scheduler(cfg, policy, seed));
      } catch (const DeadlockError& e) {
        err << "seed " << seed << " scheduler " << to_string(policy) << ": " << e.what() << '\n';
        return 1;
      }
      const auto hist = network_history(schedule, initial, run.trace);
      // First disagreement in chain order, falling back to the final state.
      for (const UpdateId id : total_order(schedule)) {
        const State expected = oracle.history[id.node][id.index];
        const State got = hist[id.node][id.index];
        if (expected != got) {
          out << "MISMATCH seed=" << seed << " scheduler=" << to_string(policy) << " node=" << id.node
              << " update=" << id.index << " expected=" << expected << " got=" << got << '\n';
          return 1;
        }
      }
      for (NodeId v = 0; v < model->num_nodes(); ++v) {
        if (oracle.final_state[v] != run.final_state[v]) {
          out << "MISMATCH seed=" << seed << " scheduler=" << to_string(policy) << " node=" << v
              << " expected=" << oracle.final_state[v] << " got=" << run.final_state[v] << '\n';
          return 1;
        }
      }
      ++checked;
    }
  }
  out << "PASS " << checked << " runs coupled exactly\n";
  return 0;
}

std::vector<TvReport> tv_test(const ExperimentConfig& cfg, unsigned workers) {
  const auto model = build_model(cfg, build_graph(cfg));
  const Configuration initial = initial_configuration(cfg, model);
  const std::vector<double> target = exact_distribution(model, stationary_weight(model));
  const double horizon = effective_horizon(cfg, cfg.horizon, model.num_nodes());
  const std::uint32_t runs = cfg.runs ? cfg.runs : static_cast<std::uint32_t>(run_seeds(cfg).size());

  std::vector<TvReport> reports;
  for (SchedulerPolicy policy : cfg.schedulers) {
    std::vector<std::uint64_t> index(runs);
    parallel_for(runs, workers, [&](std::size_t k) {
      const std::uint64_t seed = cfg.seed_first + k;
      const UpdateSchedule schedule = generate_schedule(model, horizon, seed);
      RunOptions opts;
      opts.trace = TraceLevel::Off;
      const RunResult r = run_network(model, schedule, initial, make_scheduler(cfg, policy, seed), opts);
      index[k] = configuration_index(r.final_state.values, model.q());
    });
    std::vector<double> counts(target.size(), 0.0);
    for (auto i : index) counts[i] += 1.0;
    reports.push_back({policy, runs, stats::tv_distance(stats::frequencies(counts), target)});
  }
  return reports;
}

int cmd_tv_test(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  std::vector<TvReport> reports;
  try {
    reports = tv_test(cfg, worker_count());
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const unsupported_error& e) {
    err << "tv-test: " << e.what() << '\n';
    return 2;
  }
  out << "scheduler,runs,tv\n";
  int status = 0;
  for (const auto& r : reports) {
    out << to_string(r.scheduler) << ',' << r.runs << ',' << num(r.tv) << '\n';
    if (cfg.tv_threshold && r.tv > *cfg.tv_threshold) status = 1;
  }
  return status;
}

SweepResult sweep(const ExperimentConfig& cfg, unsigned workers) {
  std::vector<NodeId> ns = cfg.n_grid;
  if (ns.empty()) ns.push_back(cfg.graph.n);
  std::vector<double> ts = cfg.t_grid;
  if (ts.empty()) ts.push_back(cfg.horizon);
  const SchedulerPolicy policy = cfg.schedulers.front();
  const auto seeds = run_seeds(cfg);

  struct Job {
    std::size_t cell;
    std::uint64_t seed;
  };
  SweepResult res;
  std::vector<Job> jobs;
  for (NodeId n : ns) {
    for (double t : ts) {
      SweepCell cell;
      cell.n = n;
      cell.horizon = t;
      cell.runs.resize(seeds.size());
      res.cells.push_back(std::move(cell));
    }
  }
  std::sort(res.cells.begin(), res.cells.end(), [](const SweepCell& a, const SweepCell& b) {
    return std::tie(a.n, a.horizon) < std::tie(b.n, b.horizon);
  });
  for (std::size_t c = 0; c < res.cells.size(); ++c)
    for (std::uint64_t s : seeds) jobs.push_back({c, s});

  parallel_for(jobs.size(), workers, [&](std::size_t k) {
    const Job& job = jobs[k];
    SweepCell& cell = res.cells[job.cell];
    const auto model = build_model(cfg, build_graph(cfg, cell.n, job.seed));
    const Configuration initial = initial_configuration(cfg, model);
    const double horizon = effective_horizon(cfg, cell.horizon, model.num_nodes());
    cell.runs[k % seeds.size()] = execute_run(cfg, model, initial, horizon, job.seed, policy);
  });

  std::vector<std::vector<double>> rows;
  std::vector<double> y;
  const bool fit_t = ts.size() > 1;
  for (auto& cell : res.cells) {
    std::vector<double> mk, rv, ch;
    for (const auto& r : cell.runs) {
      mk.push_back(r.stats.makespan);
      rv.push_back(r.max_residence);
      ch.push_back(r.max_chain_length);
    }
    cell.median_makespan = stats::median(mk);
    cell.max_makespan = stats::max(mk);
    cell.median_residence = stats::median(rv);
    cell.max_residence = stats::max(rv);
    cell.median_chain = stats::median(ch);
    cell.max_chain = stats::max(ch);
    std::vector<double> row{1.0, std::log(static_cast<double>(std::max<NodeId>(cell.n, 1)))};
    if (fit_t) row.push_back(cell.horizon);
    rows.push_back(row);
    y.push_back(cell.median_residence);
  }
  res.fit_terms = {"a", "b_ln_n"};
  if (fit_t) res.fit_terms.push_back("c_T");
  if (rows.size() >= res.fit_terms.size()) {
    const auto fit = stats::least_squares(rows, y);
    res.fit_coefficients = fit.coefficients;
    res.fit_residuals = fit.residuals;
    res.r_squared = fit.r_squared;
  }
  return res;
}

int cmd_sweep(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  SweepResult res;
  try {
    res = sweep(cfg, worker_count());
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  }
  out << kRunCsvHeader << '\n';
  for (const auto& cell : res.cells)
    for (const auto& r : cell.runs) write_run_row(out, r);
  out << "\n# cells\nn,T,runs,median_makespan,max_makespan,median_max_residence,max_max_residence,"
         "median_max_chain,max_max_chain,fit_residual\n";
  for (std::size_t c = 0; c < res.cells.size(); ++c) {
    const auto& cell = res.cells[c];
    out << cell.n << ',' << num(cell.horizon) << ',' << cell.runs.size() << ',' << num(cell.median_makespan) << ','
        << num(cell.max_makespan) << ',' << num(cell.median_residence) << ',' << num(cell.max_residence) << ','
        << num(cell.median_chain) << ',' << num(cell.max_chain) << ','
        << (c < res.fit_residuals.size() ? num(res.fit_residuals[c]) : "") << '\n';
  }
  out << "\n# fit median_max_residence ~ " << (res.fit_terms.size() > 2 ? "a + b ln n + c T" : "a + b ln n") << '\n';
  if (res.fit_coefficients.empty()) {
    out << "insufficient grid points\n";
  } else {
    for (std::size_t k = 0; k < res.fit_terms.size(); ++k)
      out << res.fit_terms[k] << ',' << num(res.fit_coefficients[k]) << '\n';
    out << "r_squared," << num(res.r_squared) << '\n';
  }
  return 0;
}

int cmd_dump_schedule(const ExperimentConfig& cfg, std::uint64_t seed, std::ostream& out, std::ostream& err) {
  try {
    const auto model = build_model(cfg, build_graph(cfg, std::nullopt, seed));
    write_schedule(out, generate_schedule(model, effective_horizon(cfg, cfg.horizon, model.num_nodes()), seed));
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

void write_run_stats(std::ostream& out, const RunStats& s) {
  out << "makespan=" << num(s.makespan) << '\n'
      << "phase1_end=" << num(s.phase1_end) << '\n'
      << "max_residence=" << num(s.max_residence()) << '\n'
      << "messages=" << s.message_count << '\n'
      << "phase_one_messages=" << s.phase_one_messages << '\n'
      << "decision_messages=" << s.decision_messages << '\n'
      << "phase_one_packets=" << s.phase_one_packets << '\n'
      << "bits=" << s.total_bits << '\n'
      << "max_message_bits=" << s.max_message_bits << '\n';
}

int cmd_replay_trace(std::istream& trace, std::ostream& out, std::ostream& err) {
  try {
    const Trace t = read_trace(trace);
    if (t.level != TraceLevel::Full) {
      err << "replay-trace: the trace holds no message events\n";
      return 2;
    }
    write_run_stats(out, stats_from_trace(t));
  } catch (const std::invalid_argument& e) {
    err << "replay-trace: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace asyncmetro
