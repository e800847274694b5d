#include "asyncmetro/model.hpp"

#include <algorithm>
#include <cmath>

namespace asyncmetro {

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Coloring: return "coloring";
    case ModelKind::Hardcore: return "hardcore";
    case ModelKind::Ising: return "ising";
    case ModelKind::Pairwise: return "pairwise";
    case ModelKind::Custom: return "custom";
  }
  return "unknown";
}

SpinModel::SpinModel(std::shared_ptr<const Graph> graph, State q,
                     std::vector<std::vector<double>> proposals, FilterFn filter,
                     EdgeFactorFn edge_factor, ModelParams params)
    : graph_(std::move(graph)),
      q_(q),
      proposals_(std::move(proposals)),
      filter_(std::move(filter)),
      edge_factor_(std::move(edge_factor)),
      params_(std::move(params)) {
  if (!graph_) throw std::invalid_argument("SpinModel: null graph");
  if (q_ < 1) throw std::invalid_argument("SpinModel: q must be >= 1");
  if (!filter_) throw std::invalid_argument("SpinModel: missing filter");
  if (proposals_.size() != graph_->num_nodes())
    throw std::invalid_argument("SpinModel: need one proposal distribution per node");
  for (const auto& nu : proposals_) {
    if (nu.size() != q_) throw std::invalid_argument("SpinModel: proposal length != q");
    double sum = 0.0;
    for (double p : nu) {
      if (!(p >= 0.0)) throw std::invalid_argument("SpinModel: negative proposal mass");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("SpinModel: proposal does not sum to 1");
  }
}

void validate_configuration(const SpinModel& model, const Configuration& config) {
  if (config.size() != model.num_nodes()) {
    throw std::invalid_argument("configuration has " + std::to_string(config.size()) +
                                " entries, model has " + std::to_string(model.num_nodes()) +
                                " nodes");
  }
  for (NodeId v = 0; v < config.size(); ++v) {
    if (config[v] >= model.q())
      throw std::invalid_argument("configuration entry at node " + std::to_string(v) +
                                  " out of range");
  }
}

namespace {

void check_filter_args(const SpinModel& model, NodeId v, State c, State c_prime,
                       std::span<const State> tau) {
  if (v >= model.num_nodes()) throw std::invalid_argument("node out of range");
  if (c >= model.q() || c_prime >= model.q()) throw std::invalid_argument("state out of range");
  if (tau.size() != model.graph().degree(v))
    throw std::invalid_argument("neighborhood assignment length mismatch");
  for (State s : tau) {
    if (s >= model.q()) throw std::invalid_argument("neighbor state out of range");
  }
}

std::vector<std::vector<double>> uniform_proposals(NodeId n, State q) {
  return std::vector<std::vector<double>>(n, std::vector<double>(q, 1.0 / q));
}

}  // namespace

double filter_eval(const SpinModel& model, NodeId v, State c, State c_prime,
                   std::span<const State> tau) {
  check_filter_args(model, v, c, c_prime, tau);
  const double f = model.filter(v, c, c_prime, tau);
  check_invariant(f >= 0.0 && f <= 1.0, "filter value outside [0,1]");
  return f;
}

double edge_factor_product(const SpinModel& model, NodeId v, State c, State c_prime,
                           std::span<const State> tau) {
  if (!model.has_edge_factor()) throw unsupported_error("model has no edge factors");
  check_filter_args(model, v, c, c_prime, tau);
  auto nb = model.graph().neighbors(v);
  double prod = 1.0;
  for (std::size_t k = 0; k < nb.size(); ++k) prod *= model.edge_factor(v, nb[k], c, c_prime, tau[k]);
  return std::min(1.0, prod);
}

SpinModel make_coloring(std::shared_ptr<const Graph> graph, State q) {
  if (q < 1) throw std::invalid_argument("coloring: q must be >= 1");
  const NodeId n = graph->num_nodes();
  auto filter = [](NodeId, State, State c_prime, std::span<const State> tau) {
    for (State s : tau)
      if (s == c_prime) return 0.0;
    return 1.0;
  };
  auto factor = [](NodeId, NodeId, State, State c_prime, State b) { return b != c_prime ? 1.0 : 0.0; };
  return SpinModel(std::move(graph), q, uniform_proposals(n, q), filter, factor,
                   ModelParams{ModelKind::Coloring, 0.0, 0.0, {}});
}

SpinModel make_hardcore(std::shared_ptr<const Graph> graph, double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("hardcore: lambda must be finite and >= 0");
  const NodeId n = graph->num_nodes();
  std::vector<std::vector<double>> nu(n, {1.0 / (1.0 + lambda), lambda / (1.0 + lambda)});
  auto filter = [](NodeId, State, State c_prime, std::span<const State> tau) {
    for (State s : tau)
      if (s + c_prime > 1) return 0.0;
    return 1.0;
  };
  auto factor = [](NodeId, NodeId, State, State c_prime, State b) { return b + c_prime <= 1 ? 1.0 : 0.0; };
  return SpinModel(std::move(graph), 2, std::move(nu), filter, factor,
                   ModelParams{ModelKind::Hardcore, lambda, 0.0, {}});
}

SpinModel make_ising(std::shared_ptr<const Graph> graph, double beta) {
  if (!std::isfinite(beta)) throw std::invalid_argument("ising: beta must be finite");
  const NodeId n = graph->num_nodes();
  auto filter = [beta](NodeId, State c, State c_prime, std::span<const State> tau) {
    int sum = 0;
    for (State s : tau) sum += ising_spin(s);
    const double x = beta * (ising_spin(c_prime) - ising_spin(c)) * sum;
    return std::exp(std::min(0.0, x));
  };
  auto factor = [beta](NodeId, NodeId, State c, State c_prime, State b) {
    return std::exp(beta * (ising_spin(c_prime) - ising_spin(c)) * ising_spin(b));
  };
  return SpinModel(std::move(graph), 2, uniform_proposals(n, 2), filter, factor,
                   ModelParams{ModelKind::Ising, 0.0, beta, {}});
}

SpinModel make_pairwise(std::shared_ptr<const Graph> graph,
                        std::vector<std::vector<double>> interaction) {
  const auto q = static_cast<State>(interaction.size());
  if (q < 1) throw std::invalid_argument("pairwise: empty interaction table");
  for (State a = 0; a < q; ++a) {
    if (interaction[a].size() != q) throw std::invalid_argument("pairwise: table must be q x q");
    for (State b = 0; b < q; ++b) {
      const double w = interaction[a][b];
      if (!(w > 0.0) || !std::isfinite(w))
        throw std::invalid_argument("pairwise: entries must be finite and > 0");
    }
  }
  for (State a = 0; a < q; ++a)
    for (State b = 0; b < a; ++b)
      if (interaction[a][b] != interaction[b][a])
        throw std::invalid_argument("pairwise: table must be symmetric");

  const NodeId n = graph->num_nodes();
  auto table = std::make_shared<const std::vector<std::vector<double>>>(interaction);
  auto factor = [table](NodeId, NodeId, State c, State c_prime, State b) {
    return (*table)[c_prime][b] / (*table)[c][b];
  };
  auto filter = [table](NodeId, State c, State c_prime, std::span<const State> tau) {
    double prod = 1.0;
    for (State b : tau) prod *= (*table)[c_prime][b] / (*table)[c][b];
    return std::min(1.0, prod);
  };
  return SpinModel(std::move(graph), q, uniform_proposals(n, q), filter, factor,
                   ModelParams{ModelKind::Pairwise, 0.0, 0.0, std::move(interaction)});
}

namespace {

double lipschitz_closed_form(const SpinModel& model) {
  const double delta = model.graph().max_degree();
  if (model.graph().num_edges() == 0) return 0.0;
  const auto& p = model.params();
  switch (p.kind) {
    case ModelKind::Coloring:
      return model.q() >= 2 ? 2.0 * delta / model.q() : 0.0;
    case ModelKind::Hardcore:
      return delta * p.lambda / (1.0 + p.lambda);
    case ModelKind::Ising:
      return delta * (1.0 - std::exp(-2.0 * std::abs(p.beta)));
    default:
      throw unsupported_error("no closed-form Lipschitz constant for " + to_string(p.kind) +
                              " models");
  }
}

double lipschitz_exact(const SpinModel& model) {
  const Graph& g = model.graph();
  const State q = model.q();
  if (g.num_edges() == 0) return 0.0;
  double rest_size = 1.0;
  for (std::uint32_t k = 1; k < g.max_degree(); ++k) rest_size *= q;
  if (rest_size > 1e6) throw unsupported_error("Lipschitz enumeration guard q^(Delta-1) > 1e6 exceeded");

  double worst = 0.0;
  std::vector<State> tau;
  std::vector<double> fvals;                  // f at [x * rest + rho]
  std::vector<double> expected(q * q);        // E_{c'}[delta_{u,a,b}] for fixed (v,u,c)
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    const std::uint32_t d = g.degree(v);
    if (d == 0) continue;
    std::size_t rest = 1;
    for (std::uint32_t k = 1; k < d; ++k) rest *= q;
    tau.assign(d, 0);
    fvals.assign(static_cast<std::size_t>(q) * rest, 0.0);
    const auto nu = model.proposal(v);
    for (std::uint32_t slot = 0; slot < d; ++slot) {
      for (State c = 0; c < q; ++c) {
        std::fill(expected.begin(), expected.end(), 0.0);
        for (State cp = 0; cp < q; ++cp) {
          if (nu[cp] <= 0.0) continue;
          // Tabulate f over (value at slot) x (assignment of the other slots).
          for (std::size_t rho = 0; rho < rest; ++rho) {
            std::size_t code = rho;
            for (std::uint32_t k = 0; k < d; ++k) {
              if (k == slot) continue;
              tau[k] = static_cast<State>(code % q);
              code /= q;
            }
            for (State x = 0; x < q; ++x) {
              tau[slot] = x;
              fvals[x * rest + rho] = model.filter(v, c, cp, tau);
            }
          }
          for (State a = 0; a < q; ++a) {
            for (State b = a + 1; b < q; ++b) {
              double delta = 0.0;
              for (std::size_t rho = 0; rho < rest; ++rho)
                delta = std::max(delta, std::abs(fvals[a * rest + rho] - fvals[b * rest + rho]));
              expected[a * q + b] += nu[cp] * delta;
            }
          }
        }
        worst = std::max(worst, *std::max_element(expected.begin(), expected.end()));
      }
    }
  }
  return g.max_degree() * worst;
}

}  // namespace

double lipschitz_bound(const SpinModel& model, LipschitzMode mode) {
  switch (mode) {
    case LipschitzMode::ClosedForm:
      return lipschitz_closed_form(model);
    case LipschitzMode::Exact:
      return lipschitz_exact(model);
    case LipschitzMode::Auto:
      break;
  }
  switch (model.kind()) {
    case ModelKind::Coloring:
    case ModelKind::Hardcore:
    case ModelKind::Ising:
      return lipschitz_closed_form(model);
    default:
      return lipschitz_exact(model);
  }
}

}  // namespace asyncmetro
