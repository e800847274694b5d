#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "asyncmetro/oracle.hpp"
#include "support.hpp"

using namespace asyncmetro;

namespace {

std::shared_ptr<const Graph> share(Graph g) { return std::make_shared<const Graph>(std::move(g)); }

UpdateSchedule one_update(NodeId n, NodeId v, double t, State proposal, double coin, double horizon = 1.0) {
  UpdateSchedule s;
  s.horizon = horizon;
  s.nodes.resize(n);
  s.nodes[v] = NodeUpdates{{t}, {proposal}, {coin}};
  return s;
}

bool proper(const Graph& g, std::span<const State> x) {
  for (auto [u, v] : g.edges())
    if (x[u] == x[v]) return false;
  return true;
}

}  // namespace

TEST_CASE("no updates leaves the initial configuration") {
  const auto model = make_coloring(share(graphs::cycle(6)), 3);
  const Configuration y0{{0, 1, 0, 1, 0, 2}};
  const auto run = run_continuous(model, generate_schedule(model, 0.0, 1), y0);
  CHECK(run.final_state == y0);
  for (NodeId v = 0; v < 6; ++v) CHECK(run.history[v] == std::vector<State>{y0[v]});
}

TEST_CASE("isolated vertex always accepts") {
  const auto model = make_coloring(share(graphs::empty(1)), 5);
  const auto s = generate_schedule(model, 50.0, 3);
  const auto run = run_continuous(model, s, Configuration{{0}});
  for (std::uint32_t i = 1; i <= s.nodes[0].count(); ++i) CHECK(run.history[0][i] == s.nodes[0].proposals[i - 1]);
}

TEST_CASE("single edge with a colliding proposal is rejected") {
  const auto model = make_coloring(share(graphs::path(2)), 2);
  for (double coin : {0.0, 0.3, 0.999}) {
    const auto run = run_continuous(model, one_update(2, 0, 0.5, 1, coin), Configuration{{0, 1}});
    CHECK(run.final_state == Configuration{{0, 1}});
  }
}

TEST_CASE("strict inequality at the coin boundary") {
  const auto model = make_ising(share(graphs::path(2)), 0.5);
  const std::vector<State> tau{0};
  const double f = filter_eval(model, 0, 0, 1, tau);
  REQUIRE(f > 0.0);
  REQUIRE(f < 1.0);
  CHECK(run_continuous(model, one_update(2, 0, 0.5, 1, f), Configuration{{0, 0}}).final_state[0] == 0);
  CHECK(run_continuous(model, one_update(2, 0, 0.5, 1, std::nextafter(f, 0.0)), Configuration{{0, 0}})
            .final_state[0] == 1);
}

TEST_CASE("initial configuration is validated") {
  const auto model = make_coloring(share(graphs::cycle(4)), 3);
  const auto s = generate_schedule(model, 1.0, 1);
  CHECK_THROWS_AS(run_continuous(model, s, Configuration{{0, 1, 0}}), std::invalid_argument);
  CHECK_THROWS_AS(run_continuous(model, s, Configuration{{0, 1, 0, 3}}), std::invalid_argument);
}

TEST_CASE("property: trajectories are single-site and keep colorings proper") {
  std::mt19937_64 gen(8);
  for (int trial = 0; trial < 30; ++trial) {
    const auto g = testgen::random_graph(gen, testgen::pick(gen, 2, 12), 0.35);
    const State q = g->max_degree() + 1 + testgen::pick(gen, 0, 2);
    const auto model = make_coloring(g, q);
    Configuration y{std::vector<State>(g->num_nodes())};
    // greedy proper start
    for (NodeId v = 0; v < g->num_nodes(); ++v) {
      std::vector<char> used(q);
      for (NodeId u : g->neighbors(v))
        if (u < v) used[y[u]] = 1;
      while (used[y[v]]) ++y[v];
    }
    const auto s = generate_schedule(model, 5.0, gen());
    const auto run = run_continuous(model, s, y);
    CHECK(run == run_continuous(model, s, y));

    Configuration cur = y;
    std::vector<std::uint32_t> idx(g->num_nodes(), 0);
    for (const UpdateId id : total_order(s)) {
      const Configuration before = cur;
      cur[id.node] = run.history[id.node][++idx[id.node]];
      int changed = 0;
      for (NodeId v = 0; v < g->num_nodes(); ++v) changed += before[v] != cur[v];
      CHECK(changed <= 1);
      CHECK(proper(*g, cur.values));
    }
    CHECK(cur == run.final_state);
  }
}

TEST_CASE("state_at uses right-open intervals") {
  const auto model = make_coloring(share(graphs::empty(1)), 4);
  UpdateSchedule s;
  s.horizon = 1.0;
  s.nodes = {NodeUpdates{{0.25, 0.5}, {2, 3}, {0.0, 0.0}}};
  const auto run = run_continuous(model, s, Configuration{{1}});
  CHECK(run.state_at(s, 0, 0.0) == 1);
  CHECK(run.state_at(s, 0, 0.2499) == 1);
  CHECK(run.state_at(s, 0, 0.25) == 2);
  CHECK(run.state_at(s, 0, 0.4999) == 2);
  CHECK(run.state_at(s, 0, 0.5) == 3);
  CHECK(run.state_at(s, 0, 0.99) == 3);

  std::ostringstream out;
  write_trajectory(out, s, run);
  CHECK(out.str() == "0 1 0.25 2\n0 2 0.5 3\n");
}

TEST_CASE("discrete chain basics") {
  const auto model = make_coloring(share(graphs::cycle(4)), 3);
  const Configuration x0{{0, 1, 0, 1}};
  CHECK(run_discrete(model, 0, 1, x0) == x0);
  CHECK(run_discrete(model, 1000, 5, x0) == run_discrete(model, 1000, 5, x0));
}

TEST_CASE("discrete chain on C4 with 3 colors visits all 18 proper colorings evenly") {
  const auto g = share(graphs::cycle(4));
  const auto model = make_coloring(g, 3);
  std::map<std::uint64_t, double> visits;
  run_discrete(model, 1000000, 2718, Configuration{{0, 1, 0, 1}}, [&](const Configuration& x) {
    CHECK(proper(*g, x.values));
    visits[configuration_index(x.values, 3)] += 1.0;
  });
  CHECK(visits.size() == 18);
  for (const auto& [index, count] : visits) CHECK(std::abs(count / 1e6 - 1.0 / 18) <= 0.2 / 18);
}

TEST_CASE("discrete chain on a single free node is symmetric") {
  const auto model = make_coloring(share(graphs::empty(1)), 2);
  double zeros = 0.0;
  run_discrete(model, 100000, 11, Configuration{{0}}, [&](const Configuration& x) { zeros += x[0] == 0; });
  CHECK(std::abs(zeros / 1e5 - 0.5) <= 0.01);
}

TEST_CASE("exact distributions") {
  {
    const auto model = make_coloring(share(graphs::cycle(4)), 3);
    const auto p = exact_distribution(model, stationary_weight(model));
    CHECK(p.size() == 81);
    int support = 0;
    for (double x : p) {
      if (x > 0) {
        ++support;
        CHECK(x == doctest::Approx(1.0 / 18));
      }
    }
    CHECK(support == 18);
  }
  {
    const auto model = make_hardcore(share(graphs::path(2)), 1.0);
    const auto p = exact_distribution(model, stationary_weight(model));
    CHECK(p[configuration_index(std::vector<State>{0, 0}, 2)] == doctest::Approx(1.0 / 3));
    CHECK(p[configuration_index(std::vector<State>{1, 0}, 2)] == doctest::Approx(1.0 / 3));
    CHECK(p[configuration_index(std::vector<State>{0, 1}, 2)] == doctest::Approx(1.0 / 3));
    CHECK(p[configuration_index(std::vector<State>{1, 1}, 2)] == 0.0);
  }
  {
    const auto model = make_ising(share(graphs::empty(1)), 0.7);
    const auto p = exact_distribution(model, stationary_weight(model));
    CHECK(p == std::vector<double>{0.5, 0.5});
  }
  {
    const auto model = make_ising(share(graphs::path(2)), 0.5);
    const auto p = exact_distribution(model, stationary_weight(model));
    const double same = std::exp(0.5), diff = std::exp(-0.5);
    CHECK(p[0] == doctest::Approx(same / (2 * same + 2 * diff)));
    CHECK(p[1] == doctest::Approx(diff / (2 * same + 2 * diff)));
  }
  const auto big = make_coloring(share(graphs::cycle(13)), 3);
  CHECK_THROWS_AS(exact_distribution(big, stationary_weight(big)), unsupported_error);
  auto custom = SpinModel(share(graphs::empty(2)), 2, {{0.5, 0.5}, {0.5, 0.5}},
                          [](NodeId, State, State, std::span<const State>) { return 1.0; });
  CHECK_THROWS_AS(stationary_weight(custom), unsupported_error);
}

TEST_CASE("configuration index round trip") {
  std::mt19937_64 gen(3);
  for (int k = 0; k < 200; ++k) {
    const State q = testgen::pick(gen, 1, 6);
    const NodeId n = testgen::pick(gen, 1, 7);
    const auto c = testgen::random_configuration(gen, n, q);
    CHECK(configuration_from_index(configuration_index(c.values, q), n, q) == c);
  }
  CHECK(configuration_index(std::vector<State>{1, 2}, 3) == 1 + 2 * 3);
}

TEST_CASE("discrete-continuous bridge and Poisson bounds") {
  const auto b = discrete_continuous_bridge(1.0, 100);
  CHECK(b.mean == 100.0);
  CHECK(b.extended_horizon == doctest::Approx(2.0 + 8.0 * std::log(100.0)));
  const auto p = poisson_bounds(100.0);
  CHECK(p.lower_tail_bound(0.5) == doctest::Approx(std::exp(-12.5)));
  CHECK(p.upper_tail_bound(0.5) == doctest::Approx(std::exp(-25.0 / 3.0)));
  CHECK(p.large_tail_bound(500.0) == doctest::Approx(std::pow(2.0, -500.0)));
  CHECK(p.large_tail_bound(499.0) == 1.0);
}

TEST_CASE("Poisson tail bounds hold empirically for per-node update counts") {
  const auto model = make_coloring(share(graphs::empty(20000)), 2);
  const double T = 10.0;
  const auto s = generate_schedule(model, T, 606);
  const auto bounds = poisson_bounds(T);
  int low = 0, high = 0;
  for (const auto& node : s.nodes) {
    low += node.count() <= 0.5 * T;
    high += node.count() >= 1.5 * T;
  }
  const double n = 20000.0;
  CHECK(low / n <= bounds.lower_tail_bound(0.5));
  CHECK(high / n <= bounds.upper_tail_bound(0.5));
}
