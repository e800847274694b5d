#include "asyncmetro/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>

#include "asyncmetro/random.hpp"

namespace asyncmetro {

State ContinuousRun::state_at(const UpdateSchedule& schedule, NodeId v, double t) const {
  const auto& times = schedule.nodes[v].times;
  const auto done = std::upper_bound(times.begin(), times.end(), t) - times.begin();
  return history[v][static_cast<std::size_t>(done)];
}

ContinuousRun run_continuous(const SpinModel& model, const UpdateSchedule& schedule,
                             const Configuration& initial) {
  validate_configuration(model, initial);
  if (schedule.num_nodes() != model.num_nodes())
    throw std::invalid_argument("schedule node count does not match model");

  ContinuousRun run;
  run.final_state = initial;
  run.history.resize(model.num_nodes());
  for (NodeId v = 0; v < model.num_nodes(); ++v) {
    run.history[v].reserve(schedule.nodes[v].count() + 1);
    run.history[v].push_back(initial[v]);
  }

  const Graph& g = model.graph();
  auto& y = run.final_state;
  std::vector<State> tau;
  for (UpdateId id : total_order(schedule)) {
    const auto& node = schedule.nodes[id.node];
    const State c = y[id.node];
    const State c_prime = node.proposals[id.index - 1];
    tau.clear();
    for (NodeId u : g.neighbors(id.node)) tau.push_back(y[u]);
    if (node.coins[id.index - 1] < model.filter(id.node, c, c_prime, tau)) y[id.node] = c_prime;
    run.history[id.node].push_back(y[id.node]);
  }
  return run;
}

void write_trajectory(std::ostream& out, const UpdateSchedule& schedule, const ContinuousRun& run) {
  char buf[40];
  for (UpdateId id : total_order(schedule)) {
    std::snprintf(buf, sizeof buf, "%.17g", schedule.nodes[id.node].times[id.index - 1]);
    out << id.node << ' ' << id.index << ' ' << buf << ' ' << run.history[id.node][id.index] << '\n';
  }
}

Configuration run_discrete(const SpinModel& model, std::uint64_t steps, std::uint64_t seed,
                           Configuration x, const StepObserver& observer) {
  validate_configuration(model, x);
  const Graph& g = model.graph();
  const NodeId n = model.num_nodes();
  if (n == 0) return x;
  std::mt19937_64 gen(rng::derive_seed(seed, 0x6469736372657465ULL));
  std::vector<State> tau;
  for (std::uint64_t step = 0; step < steps; ++step) {
    const auto v = static_cast<NodeId>(rng::below(gen, n));
    const State c_prime = rng::categorical(gen, model.proposal(v));
    const double coin = rng::uniform01(gen);
    tau.clear();
    for (NodeId u : g.neighbors(v)) tau.push_back(x[u]);
    if (coin < model.filter(v, x[v], c_prime, tau)) x[v] = c_prime;
    if (observer) observer(x);
  }
  return x;
}

WeightFn stationary_weight(const SpinModel& model) {
  auto graph = model.graph_ptr();
  const auto& p = model.params();
  switch (p.kind) {
    case ModelKind::Coloring:
      return [graph](std::span<const State> s) {
        for (auto [u, v] : graph->edges())
          if (s[u] == s[v]) return 0.0;
        return 1.0;
      };
    case ModelKind::Hardcore:
      return [graph, lambda = p.lambda](std::span<const State> s) {
        for (auto [u, v] : graph->edges())
          if (s[u] == 1 && s[v] == 1) return 0.0;
        const auto occupied = std::count(s.begin(), s.end(), 1u);
        return std::pow(lambda, static_cast<double>(occupied));
      };
    case ModelKind::Ising:
      return [graph, beta = p.beta](std::span<const State> s) {
        int sum = 0;
        for (auto [u, v] : graph->edges()) sum += ising_spin(s[u]) * ising_spin(s[v]);
        return std::exp(beta * sum);
      };
    case ModelKind::Pairwise:
      return [graph, table = p.interaction](std::span<const State> s) {
        double w = 1.0;
        for (auto [u, v] : graph->edges()) w *= table[s[u]][s[v]];
        return w;
      };
    case ModelKind::Custom:
      break;
  }
  throw unsupported_error("no built-in stationary weight for custom models");
}

std::uint64_t configuration_index(std::span<const State> values, State q) {
  std::uint64_t index = 0;
  for (std::size_t k = values.size(); k-- > 0;) index = index * q + values[k];
  return index;
}

Configuration configuration_from_index(std::uint64_t index, NodeId n, State q) {
  Configuration c;
  c.values.resize(n);
  for (NodeId v = 0; v < n; ++v) {
    c.values[v] = static_cast<State>(index % q);
    index /= q;
  }
  return c;
}

std::vector<double> exact_distribution(const SpinModel& model, const WeightFn& weight) {
  const NodeId n = model.num_nodes();
  const State q = model.q();
  double size = 1.0;
  for (NodeId v = 0; v < n; ++v) {
    size *= q;
    if (size > 1e6) throw unsupported_error("state space q^n exceeds 10^6");
  }
  const auto total = static_cast<std::uint64_t>(size);
  std::vector<double> table(total);
  std::vector<State> s(n, 0);
  double z = 0.0;
  for (std::uint64_t idx = 0; idx < total; ++idx) {
    table[idx] = weight(s);
    z += table[idx];
    for (NodeId v = 0; v < n; ++v) {  // increment base-q counter
      if (++s[v] < q) break;
      s[v] = 0;
    }
  }
  if (!(z > 0.0)) throw std::invalid_argument("weight function has zero total mass");
  for (double& w : table) w /= z;
  return table;
}

double PoissonBridge::lower_tail_bound(double eps) const {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in (0,1)");
  return std::exp(-eps * eps * mean / 2.0);
}

double PoissonBridge::upper_tail_bound(double eps) const {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in (0,1)");
  return std::exp(-eps * eps * mean / 3.0);
}

double PoissonBridge::large_tail_bound(double t) const {
  if (t < 5.0 * mean) return 1.0;
  return std::exp2(-t);
}

PoissonBridge poisson_bounds(double mean) {
  if (!(mean >= 0.0)) throw std::invalid_argument("Poisson mean must be >= 0");
  return PoissonBridge{mean, 0.0};
}

PoissonBridge discrete_continuous_bridge(double horizon, NodeId n) {
  if (!(horizon > 0.0) || n == 0) throw std::invalid_argument("bridge needs T > 0 and n > 0");
  PoissonBridge b;
  b.mean = horizon * n;
  b.extended_horizon = 2.0 * horizon + 8.0 * std::log(static_cast<double>(n));
  return b;
}

}  // namespace asyncmetro
