#include "asyncmetro/resolve.hpp"

#include <algorithm>

namespace asyncmetro {

StateSet possible_states(const NodeUpdates& updates, NodeId u,
                         std::span<const State> resolved_history, UpdateKey query,
                         double horizon) {
  if (!(query.time < horizon)) throw std::invalid_argument("possible_states: query time must be < T");
  const std::size_t j = resolved_history.size();
  if (j < 1 || j > updates.count() + 1)
    throw std::invalid_argument("possible_states: history length must be in [1, m_u + 1]");

  // Number of u's updates strictly before the query under the tie-break.
  const auto& times = updates.times;
  const auto before = static_cast<std::size_t>(
      std::partition_point(times.begin(), times.end(),
                           [&](double t) { return UpdateKey{t, u} < query; }) -
      times.begin());

  if (before < j) return {resolved_history[before]};

  StateSet s;
  s.reserve(before - j + 2);
  s.push_back(resolved_history[j - 1]);
  for (std::size_t k = j; k <= before; ++k) s.push_back(updates.proposals[k - 1]);
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

namespace {

void check_sets(const SpinModel& model, NodeId v, std::span<const StateSet> sets) {
  check_invariant(sets.size() == model.graph().degree(v), "one possible-state set per neighbor required");
  for (const auto& s : sets) check_invariant(!s.empty(), "empty possible-state set");
}

}  // namespace

Thresholds thresholds_enumerate(const SpinModel& model, NodeId v, State c, State c_prime,
                                std::span<const StateSet> sets, double max_product) {
  check_sets(model, v, sets);
  double product = 1.0;
  for (const auto& s : sets) product *= static_cast<double>(s.size());
  if (product > max_product) throw unsupported_error("possible-configuration product too large to enumerate");

  const std::size_t d = sets.size();
  std::vector<std::size_t> pos(d, 0);
  std::vector<State> tau(d);
  for (std::size_t k = 0; k < d; ++k) tau[k] = sets[k][0];
  Thresholds t{1.0, 0.0};
  while (true) {
    const double f = model.filter(v, c, c_prime, tau);
    t.min_accept = std::min(t.min_accept, f);
    t.max_accept = std::max(t.max_accept, f);
    std::size_t k = 0;
    for (; k < d; ++k) {
      if (++pos[k] < sets[k].size()) {
        tau[k] = sets[k][pos[k]];
        break;
      }
      pos[k] = 0;
      tau[k] = sets[k][0];
    }
    if (k == d) break;
  }
  return t;
}

Thresholds thresholds_edge_factor(const SpinModel& model, NodeId v, State c, State c_prime,
                                  std::span<const StateSet> sets) {
  if (!model.has_edge_factor()) throw unsupported_error("model has no edge factors");
  check_sets(model, v, sets);
  auto nb = model.graph().neighbors(v);
  double lo = 1.0, hi = 1.0;
  for (std::size_t k = 0; k < sets.size(); ++k) {
    double fmin = model.edge_factor(v, nb[k], c, c_prime, sets[k][0]);
    double fmax = fmin;
    for (std::size_t x = 1; x < sets[k].size(); ++x) {
      const double f = model.edge_factor(v, nb[k], c, c_prime, sets[k][x]);
      fmin = std::min(fmin, f);
      fmax = std::max(fmax, f);
    }
    lo *= fmin;
    hi *= fmax;
  }
  return {std::min(1.0, lo), std::min(1.0, hi)};
}

Thresholds thresholds(const SpinModel& model, NodeId v, State c, State c_prime,
                      std::span<const StateSet> sets) {
  check_sets(model, v, sets);
  const bool all_singletons =
      std::all_of(sets.begin(), sets.end(), [](const StateSet& s) { return s.size() == 1; });
  if (all_singletons) {
    std::vector<State> tau;
    tau.reserve(sets.size());
    for (const auto& s : sets) tau.push_back(s[0]);
    const double f = model.filter(v, c, c_prime, tau);
    return {f, f};
  }
  if (model.has_edge_factor()) return thresholds_edge_factor(model, v, c, c_prime, sets);
  return thresholds_enumerate(model, v, c, c_prime, sets);
}

ColoringConditions coloring_conditions(State c_prime, std::span<const StateSet> sets) {
  ColoringConditions out{true, false};
  for (const auto& s : sets) {
    if (std::binary_search(s.begin(), s.end(), c_prime)) out.accept = false;
    if (s.size() == 1 && s[0] == c_prime) out.reject = true;
  }
  return out;
}

}  // namespace asyncmetro
