#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "asyncmetro/graph.hpp"
#include "asyncmetro/types.hpp"

namespace asyncmetro {

/// Acceptance probability f^v_{c,c'}(tau); `tau` is aligned with
/// graph.neighbors(v).
using FilterFn =
    std::function<double(NodeId v, State c, State c_prime, std::span<const State> tau)>;

/// Per-edge factor f^{v,u}_{c,c'}(b) >= 0 with
/// f^v_{c,c'}(tau) = min{1, prod_u f^{v,u}_{c,c'}(tau_u)}.
using EdgeFactorFn = std::function<double(NodeId v, NodeId u, State c, State c_prime, State b)>;

enum class ModelKind { Coloring, Hardcore, Ising, Pairwise, Custom };

std::string to_string(ModelKind kind);

/// Parameters of the built-in families, kept for closed forms, stationary
/// weights and reporting.
struct ModelParams {
  ModelKind kind = ModelKind::Custom;
  double lambda = 0.0;                      // hardcore fugacity
  double beta = 0.0;                        // Ising inverse temperature
  std::vector<std::vector<double>> interaction;  // pairwise q x q table
};

/// A single-site Metropolis chain on a graph: domain [q], per-node proposal
/// distributions and Metropolis filters. Immutable once built.
class SpinModel {
 public:
  SpinModel(std::shared_ptr<const Graph> graph, State q,
            std::vector<std::vector<double>> proposals, FilterFn filter,
            EdgeFactorFn edge_factor = {}, ModelParams params = {});

  const Graph& graph() const { return *graph_; }
  std::shared_ptr<const Graph> graph_ptr() const { return graph_; }
  NodeId num_nodes() const { return graph_->num_nodes(); }
  State q() const { return q_; }
  std::span<const double> proposal(NodeId v) const { return proposals_[v]; }

  /// Raw filter call, no argument checks. Hot path.
  double filter(NodeId v, State c, State c_prime, std::span<const State> tau) const {
    return filter_(v, c, c_prime, tau);
  }

  bool has_edge_factor() const { return static_cast<bool>(edge_factor_); }
  double edge_factor(NodeId v, NodeId u, State c, State c_prime, State b) const {
    return edge_factor_(v, u, c, c_prime, b);
  }

  const ModelParams& params() const { return params_; }
  ModelKind kind() const { return params_.kind; }

 private:
  std::shared_ptr<const Graph> graph_;
  State q_;
  std::vector<std::vector<double>> proposals_;
  FilterFn filter_;
  EdgeFactorFn edge_factor_;
  ModelParams params_;
};

/// A length-n vector of states in [q].
struct Configuration {
  std::vector<State> values;

  bool operator==(const Configuration&) const = default;
  std::size_t size() const { return values.size(); }
  State operator[](NodeId v) const { return values[v]; }
  State& operator[](NodeId v) { return values[v]; }
};

/// Throws std::invalid_argument unless `config` has n entries, all below q.
void validate_configuration(const SpinModel& model, const Configuration& config);

/// Checked filter evaluation. Bad states or a tau of the wrong length throw
/// std::invalid_argument; a filter result outside [0,1] is an invariant_error.
double filter_eval(const SpinModel& model, NodeId v, State c, State c_prime,
                   std::span<const State> tau);

/// Evaluates min{1, prod_u f^{v,u}_{c,c'}(tau_u)} directly from the edge
/// factors. Requires model.has_edge_factor().
double edge_factor_product(const SpinModel& model, NodeId v, State c, State c_prime,
                           std::span<const State> tau);

/// Uniform proposals, f = prod_u 1[tau_u != c'].
SpinModel make_coloring(std::shared_ptr<const Graph> graph, State q);

/// States {0,1}; nu(1) = lambda/(1+lambda); f = prod_u 1[tau_u + c' <= 1].
SpinModel make_hardcore(std::shared_ptr<const Graph> graph, double lambda);

/// States {0,1} encode spins {-1,+1}; uniform proposals;
/// f = exp(min{0, beta (c'-c) sum_u tau_u}).
SpinModel make_ising(std::shared_ptr<const Graph> graph, double beta);

/// General pairwise model with a strictly positive symmetric q x q
/// interaction table A: mu(sigma) ~ prod_{uv in E} A[sigma_u][sigma_v],
/// uniform proposals, f = min{1, prod_u A[c'][tau_u] / A[c][tau_u]}.
SpinModel make_pairwise(std::shared_ptr<const Graph> graph,
                        std::vector<std::vector<double>> interaction);

/// Spin value (-1 or +1) of an Ising state.
constexpr int ising_spin(State s) { return s == 0 ? -1 : 1; }

enum class LipschitzMode { Auto, Exact, ClosedForm };

/// Scaled Lipschitz constant
///   C = Delta * max_{(u,v) in E} max_{a,b,c} E_{c'~nu_v}[delta_{u,a,b} f^v_{c,c'}].
/// Auto uses the closed form for coloring/hardcore/Ising and enumeration
/// otherwise. Enumeration is refused (unsupported_error) when q^(Delta-1)
/// exceeds 10^6; ClosedForm is refused for models without one.
double lipschitz_bound(const SpinModel& model, LipschitzMode mode = LipschitzMode::Auto);

}  // namespace asyncmetro
