#pragma once

#include <span>
#include <vector>

#include "asyncmetro/model.hpp"
#include "asyncmetro/schedule.hpp"

namespace asyncmetro {

/// Sorted, duplicate-free, nonempty set of states.
using StateSet = std::vector<State>;

/// States neighbor u may hold at the query point, given the first j_u =
/// resolved_history.size() resolved values of u (indices 0..j_u-1).
///
/// If u's j_u-th update lies after the query, the value is known exactly:
/// {history[k-1]} with k-1 the number of u's updates before the query.
/// Otherwise the set is {history[j_u-1]} plus every proposal of u from the
/// j_u-th update up to the query. Update times are compared with the
/// (time, node id) tie-break, so `query` is the key of the update being
/// resolved. Throws std::invalid_argument if query.time >= horizon or the
/// history length is not in [1, m_u + 1].
StateSet possible_states(const NodeUpdates& updates, NodeId u,
                         std::span<const State> resolved_history, UpdateKey query,
                         double horizon);

/// Minimum and maximum of f^v_{c,c'} over the product of possible-state
/// sets. P_AC = min_accept, P_RE = 1 - max_accept. Keeping the maximum
/// (rather than P_RE) lets the reject test compare the coin against the very
/// value the sequential chain would use once every set is a singleton.
struct Thresholds {
  double min_accept = 0.0;
  double max_accept = 1.0;

  double p_ac() const { return min_accept; }
  double p_re() const { return 1.0 - max_accept; }
};

enum class Verdict { Pending, Accept, Reject };

/// Accept iff coin < P_AC, reject iff coin >= 1 - P_RE; accept is tested first.
inline Verdict decide(double coin, const Thresholds& t) {
  if (coin < t.min_accept) return Verdict::Accept;
  if (coin >= t.max_accept) return Verdict::Reject;
  return Verdict::Pending;
}

/// Brute force over the product of sets. Refuses (unsupported_error) products
/// larger than `max_product`.
Thresholds thresholds_enumerate(const SpinModel& model, NodeId v, State c, State c_prime,
                                std::span<const StateSet> sets, double max_product = 1e7);

/// Closed form for edge-factor models:
///   P_AC = min{1, prod_u min_{b in S(u)} f^{v,u}(b)},
///   1 - P_RE = min{1, prod_u max_{b in S(u)} f^{v,u}(b)}.
Thresholds thresholds_edge_factor(const SpinModel& model, NodeId v, State c, State c_prime,
                                  std::span<const StateSet> sets);

/// Dispatch used by the simulator: a direct filter call when every set is a
/// singleton, the closed form when edge factors exist, enumeration otherwise.
Thresholds thresholds(const SpinModel& model, NodeId v, State c, State c_prime,
                      std::span<const StateSet> sets);

/// The two resolution conditions written for proper coloring: accept when c'
/// is in no set, reject when some set is exactly {c'}.
struct ColoringConditions {
  bool accept = false;
  bool reject = false;
};
ColoringConditions coloring_conditions(State c_prime, std::span<const StateSet> sets);

}  // namespace asyncmetro
