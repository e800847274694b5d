#include "asyncmetro/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

#include "asyncmetro/random.hpp"

namespace asyncmetro {

std::size_t UpdateSchedule::total_updates() const {
  std::size_t total = 0;
  for (const auto& node : nodes) total += node.count();
  return total;
}

UpdateSchedule generate_schedule(const SpinModel& model, double horizon, std::uint64_t seed) {
  if (!(horizon >= 0.0) || !std::isfinite(horizon))
    throw std::invalid_argument("schedule horizon must be finite and >= 0");
  UpdateSchedule s;
  s.horizon = horizon;
  s.seed = seed;
  s.nodes.resize(model.num_nodes());
  for (NodeId v = 0; v < model.num_nodes(); ++v) {
    std::mt19937_64 gen(rng::derive_seed(seed, v));
    auto& node = s.nodes[v];
    double t = 0.0;
    while (true) {
      double next = t + rng::exponential1(gen);
      if (next <= t) next = std::nextafter(t, horizon);  // gap lost to rounding
      if (next >= horizon) break;
      node.times.push_back(next);
      t = next;
    }
    const auto nu = model.proposal(v);
    node.proposals.reserve(node.times.size());
    for (std::size_t i = 0; i < node.times.size(); ++i) node.proposals.push_back(rng::categorical(gen, nu));
    node.coins.reserve(node.times.size());
    for (std::size_t i = 0; i < node.times.size(); ++i) node.coins.push_back(rng::uniform01(gen));
  }
  return s;
}

std::vector<UpdateId> total_order(const UpdateSchedule& schedule) {
  std::vector<UpdateId> order;
  order.reserve(schedule.total_updates());
  for (NodeId v = 0; v < schedule.num_nodes(); ++v)
    for (std::uint32_t i = 1; i <= schedule.nodes[v].count(); ++i) order.push_back({v, i});
  std::sort(order.begin(), order.end(), [&](UpdateId a, UpdateId b) {
    const UpdateKey ka = key_of(schedule, a), kb = key_of(schedule, b);
    if (ka < kb) return true;
    if (kb < ka) return false;
    return a.index < b.index;
  });
  return order;
}

namespace {

std::string exact(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

void write_schedule(std::ostream& out, const UpdateSchedule& schedule) {
  out << schedule.num_nodes() << ' ' << exact(schedule.horizon) << ' ' << schedule.seed << '\n';
  for (NodeId v = 0; v < schedule.num_nodes(); ++v) {
    const auto& node = schedule.nodes[v];
    for (std::uint32_t i = 0; i < node.count(); ++i) {
      out << v << ' ' << (i + 1) << ' ' << exact(node.times[i]) << ' ' << node.proposals[i] << ' '
          << exact(node.coins[i]) << '\n';
    }
  }
}

UpdateSchedule read_schedule(std::istream& in) {
  UpdateSchedule s;
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("schedule: missing header");
  {
    std::istringstream hs(line);
    long long n = -1;
    if (!(hs >> n >> s.horizon >> s.seed) || n < 0)
      throw std::invalid_argument("schedule: header must be 'n T seed'");
    s.nodes.resize(static_cast<std::size_t>(n));
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    long long v = -1, index = -1, proposal = -1;
    double t = 0.0, coin = 0.0;
    if (!(ls >> v >> index >> t >> proposal >> coin) || v < 0 || proposal < 0 ||
        static_cast<std::size_t>(v) >= s.nodes.size()) {
      throw std::invalid_argument("schedule line " + std::to_string(lineno) + " malformed");
    }
    auto& node = s.nodes[static_cast<std::size_t>(v)];
    if (index != static_cast<long long>(node.count()) + 1)
      throw std::invalid_argument("schedule line " + std::to_string(lineno) + ": indices must run 1..m_v in order");
    node.times.push_back(t);
    node.proposals.push_back(static_cast<State>(proposal));
    node.coins.push_back(coin);
  }
  return s;
}

void validate_schedule(const SpinModel& model, const UpdateSchedule& schedule) {
  if (schedule.num_nodes() != model.num_nodes())
    throw std::invalid_argument("schedule node count does not match model");
  for (NodeId v = 0; v < schedule.num_nodes(); ++v) {
    const auto& node = schedule.nodes[v];
    if (node.proposals.size() != node.times.size() || node.coins.size() != node.times.size())
      throw std::invalid_argument("schedule: ragged per-node arrays");
    double prev = 0.0;
    for (std::uint32_t i = 0; i < node.count(); ++i) {
      if (!(node.times[i] > prev) || !(node.times[i] < schedule.horizon))
        throw std::invalid_argument("schedule: times must increase strictly inside (0,T)");
      prev = node.times[i];
      if (node.proposals[i] >= model.q()) throw std::invalid_argument("schedule: proposal out of range");
      if (!(node.coins[i] >= 0.0 && node.coins[i] < 1.0))
        throw std::invalid_argument("schedule: coin outside [0,1)");
    }
  }
}

}  // namespace asyncmetro
