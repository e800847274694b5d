#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "asyncmetro/model.hpp"
#include "asyncmetro/schedule.hpp"

namespace asyncmetro {

/// Result of driving the continuous-time chain with a fixed schedule.
struct ContinuousRun {
  Configuration final_state;
  /// history[v][i] is the state of v right after its i-th update; history[v][0]
  /// is the initial value.
  std::vector<std::vector<State>> history;

  /// State of v at chain time t (right-open intervals between updates).
  State state_at(const UpdateSchedule& schedule, NodeId v, double t) const;

  bool operator==(const ContinuousRun&) const = default;
};

/// Sequential reference: processes updates in total order and accepts the
/// proposal of (v,i) iff coin < f^v_{c,c'}(neighborhood just before t_v^i).
ContinuousRun run_continuous(const SpinModel& model, const UpdateSchedule& schedule,
                             const Configuration& initial);

/// Writes "node index time new_state" for every update, in total order.
void write_trajectory(std::ostream& out, const UpdateSchedule& schedule, const ContinuousRun& run);

using StepObserver = std::function<void(const Configuration&)>;

/// The discrete-time single-site chain: each step picks a uniform node,
/// draws a proposal from nu_v and accepts with probability f. The observer,
/// if any, sees the configuration after every step.
Configuration run_discrete(const SpinModel& model, std::uint64_t steps, std::uint64_t seed,
                           Configuration initial, const StepObserver& observer = {});

using WeightFn = std::function<double(std::span<const State>)>;

/// Unnormalized target measure of a built-in model: properness indicator for
/// coloring, lambda^{#occupied} on independent sets for hardcore,
/// exp(beta sum_{uv} s_u s_v) for Ising, prod_{uv} A[s_u][s_v] for pairwise.
WeightFn stationary_weight(const SpinModel& model);

/// Base-q index of a configuration, node 0 least significant.
std::uint64_t configuration_index(std::span<const State> values, State q);
Configuration configuration_from_index(std::uint64_t index, NodeId n, State q);

/// Normalized table over [q]^V by exhaustive enumeration; needs q^n <= 10^6.
std::vector<double> exact_distribution(const SpinModel& model, const WeightFn& weight);

/// Relation between the continuous chain at time T and the discrete chain at
/// N ~ Pois(nT) steps, with Poisson concentration bounds.
struct PoissonBridge {
  double mean = 0.0;              // nT
  double extended_horizon = 0.0;  // 2T + 8 ln n

  /// Pr[N <= (1-eps) mean] <= exp(-eps^2 mean / 2), for 0 < eps < 1.
  double lower_tail_bound(double eps) const;
  /// Pr[N >= (1+eps) mean] <= exp(-eps^2 mean / 3), for 0 < eps < 1.
  double upper_tail_bound(double eps) const;
  /// Pr[N >= t] <= 2^{-t} once t >= 5 mean; returns the trivial bound 1 below that.
  double large_tail_bound(double t) const;
};

PoissonBridge discrete_continuous_bridge(double horizon, NodeId n);

/// Same bounds for an arbitrary Poisson mean.
PoissonBridge poisson_bounds(double mean);

}  // namespace asyncmetro
