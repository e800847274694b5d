#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "asyncmetro/graph.hpp"
#include "asyncmetro/model.hpp"
#include "asyncmetro/netsim.hpp"

namespace asyncmetro {

/// Bad or inconsistent experiment configuration (CLI exit code 2).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class InitialPolicy { Default, GreedyProper, Zero, Fixed };

struct GraphSpec {
  std::string file;              // edge list; wins over the generator when set
  std::string generator = "cycle";  // cycle|path|grid|random-regular|complete|star|empty
  NodeId n = 0;
  NodeId rows = 0, cols = 0;     // grid
  std::uint32_t degree = 0;      // random-regular
  std::uint64_t seed = 1;
  bool resample = false;         // random graph drawn anew for every run seed
};

struct ExperimentConfig {
  // [model]
  std::string model = "coloring";  // coloring|hardcore|ising|custom
  State q = 0;
  double lambda = 1.0;
  double beta = 0.0;
  std::vector<std::vector<double>> interaction;  // custom: symmetric q x q

  GraphSpec graph;

  // [chain]
  double horizon = 0.0;
  bool extended_horizon = false;  // use 2T + 8 ln n instead of T
  InitialPolicy initial = InitialPolicy::Default;
  std::vector<State> initial_values;

  // [scheduler]
  std::vector<SchedulerPolicy> schedulers{SchedulerPolicy::Synchronous};
  std::uint64_t scheduler_seed = 0;
  double fixed_delay = 1.0;

  // [experiment]
  std::uint64_t seed_first = 1;
  std::uint64_t seed_last = 1;
  std::uint32_t repeats = 1;
  std::vector<NodeId> n_grid;
  std::vector<double> t_grid;
  std::uint32_t runs = 0;               // tv-test sample count, 0 = one per seed
  std::optional<double> tv_threshold;

  std::vector<std::uint64_t> seeds() const;
};

/// Parses INI text. `overrides` are "section.key=value" strings applied on
/// top of the file. Unknown sections or keys raise ConfigError.
ExperimentConfig parse_config(std::istream& in, const std::vector<std::string>& overrides = {});
ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

/// Builds the graph; `n` replaces the configured size when given (sweeps),
/// `run_seed` only matters with graph.resample.
std::shared_ptr<const Graph> build_graph(const ExperimentConfig& cfg, std::optional<NodeId> n = std::nullopt,
                                         std::uint64_t run_seed = 0);

SpinModel build_model(const ExperimentConfig& cfg, std::shared_ptr<const Graph> graph);

/// Horizon actually simulated for a graph of n nodes: T, or 2T + 8 ln n with
/// chain.extended.
double effective_horizon(const ExperimentConfig& cfg, double horizon, NodeId n);

/// Lowest-available-color greedy coloring in node order; needs q > Delta.
Configuration greedy_proper_coloring(const Graph& graph, State q);

/// Initial configuration by policy. Default means greedy-proper for
/// coloring and all zeros (unoccupied / spin -1) otherwise. Infeasible
/// requests raise ConfigError.
Configuration initial_configuration(const ExperimentConfig& cfg, const SpinModel& model);

}  // namespace asyncmetro
