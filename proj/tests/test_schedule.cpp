#include <doctest.h>

#include <cmath>
#include <sstream>

#include "asyncmetro/schedule.hpp"
#include "support.hpp"

using namespace asyncmetro;

namespace {

std::shared_ptr<const Graph> share(Graph g) { return std::make_shared<const Graph>(std::move(g)); }

// Asymptotic Kolmogorov survival function Pr[sqrt(n) D > x].
double kolmogorov_sf(double x) {
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) s += (k % 2 ? 2.0 : -2.0) * std::exp(-2.0 * k * k * x * x);
  return std::clamp(s, 0.0, 1.0);
}

UpdateSchedule manual(std::vector<std::vector<double>> times, double horizon = 1.0) {
  UpdateSchedule s;
  s.horizon = horizon;
  for (auto& t : times) {
    NodeUpdates u;
    u.proposals.assign(t.size(), 0);
    u.coins.assign(t.size(), 0.5);
    u.times = std::move(t);
    s.nodes.push_back(std::move(u));
  }
  return s;
}

}  // namespace

TEST_CASE("empty horizon and bad horizons") {
  const auto model = make_coloring(share(graphs::cycle(10)), 3);
  const auto s = generate_schedule(model, 0.0, 5);
  CHECK(s.total_updates() == 0);
  for (const auto& node : s.nodes) CHECK(node.count() == 0);
  CHECK(total_order(s).empty());
  CHECK_THROWS_AS(generate_schedule(model, -1.0, 5), std::invalid_argument);
  CHECK_THROWS_AS(generate_schedule(model, std::nan(""), 5), std::invalid_argument);
}

TEST_CASE("Poisson counts have mean T") {
  const auto model = make_coloring(share(graphs::empty(1000)), 4);
  const auto s = generate_schedule(model, 10.0, 77);
  const double mean = static_cast<double>(s.total_updates()) / 1000.0;
  CHECK(mean > 9.5);
  CHECK(mean < 10.5);
}

TEST_CASE("schedules are deterministic in the seed") {
  const auto model = make_ising(share(graphs::cycle(20)), 0.3);
  CHECK(generate_schedule(model, 7.5, 1) == generate_schedule(model, 7.5, 1));
  CHECK_FALSE(generate_schedule(model, 7.5, 1) == generate_schedule(model, 7.5, 2));
}

TEST_CASE("per-node streams do not depend on the rest of the graph") {
  const auto small = make_coloring(share(graphs::path(5)), 3);
  const auto large = make_coloring(share(graphs::complete(12)), 3);
  const auto a = generate_schedule(small, 20.0, 9);
  const auto b = generate_schedule(large, 20.0, 9);
  for (NodeId v = 0; v < 5; ++v) CHECK(a.nodes[v] == b.nodes[v]);
}

TEST_CASE("schedule invariants hold on random models") {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 40; ++trial) {
    const auto model = testgen::random_model(gen, testgen::random_graph(gen, testgen::pick(gen, 1, 15), 0.3));
    const double horizon = 20.0 * rng::uniform01(gen);
    const auto s = generate_schedule(model, horizon, gen());
    CHECK_NOTHROW(validate_schedule(model, s));
    for (const auto& node : s.nodes) {
      for (std::uint32_t i = 0; i < node.count(); ++i) {
        CHECK(node.times[i] > 0.0);
        CHECK(node.times[i] < horizon);
        if (i) CHECK(node.times[i - 1] < node.times[i]);
        CHECK(node.coins[i] >= 0.0);
        CHECK(node.coins[i] < 1.0);
        CHECK(node.proposals[i] < model.q());
      }
    }
    const auto order = total_order(s);
    CHECK(order.size() == s.total_updates());
    for (std::size_t k = 1; k < order.size(); ++k) CHECK(key_of(s, order[k - 1]) < key_of(s, order[k]));
    std::vector<std::uint32_t> next(s.num_nodes(), 1);
    for (const UpdateId id : order) CHECK(id.index == next[id.node]++);
  }
}

TEST_CASE("total order examples") {
  const auto s = manual({{0.5}, {0.3, 0.7}});
  CHECK(total_order(s) == std::vector<UpdateId>{{1, 1}, {0, 1}, {1, 2}});

  std::vector<std::vector<double>> tie(8);
  tie[3] = {0.5};
  tie[7] = {0.5};
  const auto t = manual(tie);
  CHECK(total_order(t) == std::vector<UpdateId>{{3, 1}, {7, 1}});
  CHECK(key_of(t, {3, 1}) < key_of(t, {7, 1}));
  CHECK_FALSE(key_of(t, {7, 1}) < key_of(t, {3, 1}));
}

TEST_CASE("inter-arrival gaps pass a Kolmogorov-Smirnov test for Exp(1)") {
  const auto model = make_coloring(share(graphs::empty(1)), 2);
  const auto s = generate_schedule(model, 1e4, 31337);
  std::vector<double> gaps;
  double prev = 0.0;
  for (double t : s.nodes[0].times) {
    gaps.push_back(t - prev);
    prev = t;
  }
  std::sort(gaps.begin(), gaps.end());
  const double n = static_cast<double>(gaps.size());
  double d = 0.0;
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    const double cdf = 1.0 - std::exp(-gaps[i]);
    d = std::max({d, (i + 1) / n - cdf, cdf - i / n});
  }
  CHECK(kolmogorov_sf(std::sqrt(n) * d) > 0.01);

  // The same statistic must reject a clearly wrong rate.
  double d_wrong = 0.0;
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    const double cdf = 1.0 - std::exp(-1.2 * gaps[i]);
    d_wrong = std::max({d_wrong, (i + 1) / n - cdf, cdf - i / n});
  }
  CHECK(kolmogorov_sf(std::sqrt(n) * d_wrong) < 0.01);
}

TEST_CASE("proposal marginals match nu_v") {
  const auto g = share(graphs::empty(1));
  const std::vector<double> nu{0.1, 0.2, 0.3, 0.4};
  auto model = SpinModel(g, 4, {nu}, [](NodeId, State, State, std::span<const State>) { return 1.0; });
  const auto s = generate_schedule(model, 1e5, 4242);
  const double m = s.nodes[0].count();
  REQUIRE(m > 99000);
  std::vector<double> counts(4, 0.0);
  for (State c : s.nodes[0].proposals) counts[c] += 1.0;
  for (State c = 0; c < 4; ++c) {
    const double sigma = std::sqrt(m * nu[c] * (1.0 - nu[c]));
    CHECK(std::abs(counts[c] - m * nu[c]) <= 3.0 * sigma);
  }

  const auto hc = make_hardcore(g, 0.25);
  const auto h = generate_schedule(hc, 1e5, 17);
  double ones = 0.0;
  for (State c : h.nodes[0].proposals) ones += c;
  const double mh = h.nodes[0].count();
  const double p = 0.2;
  CHECK(std::abs(ones - mh * p) <= 3.0 * std::sqrt(mh * p * (1 - p)));

  double coin_sum = 0.0;
  for (double c : h.nodes[0].coins) coin_sum += c;
  CHECK(std::abs(coin_sum / mh - 0.5) <= 3.0 * std::sqrt(1.0 / 12.0 / mh));
}

TEST_CASE("schedule text format round-trips exactly") {
  const auto model = make_hardcore(share(graphs::grid(3, 4)), 0.7);
  const auto s = generate_schedule(model, 6.25, 123456789);
  std::stringstream io;
  write_schedule(io, s);
  const auto back = read_schedule(io);
  CHECK(back == s);

  std::istringstream empty_body("2 0 7\n");
  const auto e = read_schedule(empty_body);
  CHECK(e.num_nodes() == 2);
  CHECK(e.total_updates() == 0);

  std::istringstream no_header("");
  CHECK_THROWS_AS(read_schedule(no_header), std::invalid_argument);
  std::istringstream skipped("1 5 1\n0 2 1.0 0 0.5\n");
  CHECK_THROWS_AS(read_schedule(skipped), std::invalid_argument);
  std::istringstream garbage("1 5 1\n0 1 zz 0 0.5\n");
  CHECK_THROWS_AS(read_schedule(garbage), std::invalid_argument);
}

TEST_CASE("validate_schedule rejects broken schedules") {
  const auto model = make_coloring(share(graphs::path(2)), 3);
  auto good = manual({{0.2, 0.4}, {0.3}});
  CHECK_NOTHROW(validate_schedule(model, good));

  auto wrong_n = manual({{0.2}});
  CHECK_THROWS_AS(validate_schedule(model, wrong_n), std::invalid_argument);
  auto unsorted = manual({{0.4, 0.2}, {}});
  CHECK_THROWS_AS(validate_schedule(model, unsorted), std::invalid_argument);
  auto outside = manual({{1.0}, {}});
  CHECK_THROWS_AS(validate_schedule(model, outside), std::invalid_argument);
  auto proposal = good;
  proposal.nodes[0].proposals[0] = 3;
  CHECK_THROWS_AS(validate_schedule(model, proposal), std::invalid_argument);
  auto coin = good;
  coin.nodes[1].coins[0] = 1.0;
  CHECK_THROWS_AS(validate_schedule(model, coin), std::invalid_argument);
  auto ragged = good;
  ragged.nodes[0].coins.pop_back();
  CHECK_THROWS_AS(validate_schedule(model, ragged), std::invalid_argument);
}
