#include <doctest.h>

#include <cmath>

#include "asyncmetro/instrument.hpp"
#include "asyncmetro/oracle.hpp"
#include "support.hpp"

using namespace asyncmetro;

namespace {

std::shared_ptr<const Graph> share(Graph g) { return std::make_shared<const Graph>(std::move(g)); }

RunOptions checked() {
  RunOptions o;
  o.cross_check_coloring = true;
  return o;
}

// Two adjacent nodes whose updates interleave in time and whose proposals
// always collide with what the other might hold, so every update waits for
// the previous one of the other node.
struct Alternating {
  SpinModel model = make_coloring(share(graphs::path(2)), 6);
  UpdateSchedule schedule;
  Configuration y0{{0, 1}};

  Alternating() {
    schedule.horizon = 1.0;
    schedule.nodes = {NodeUpdates{{0.1, 0.3, 0.5}, {5, 1, 1}, {0.5, 0.5, 0.5}},
                      NodeUpdates{{0.2, 0.4, 0.6}, {5, 5, 5}, {0.5, 0.5, 0.5}}};
  }
};

}  // namespace

TEST_CASE("alternating triggers on a two-node path, traced by hand") {
  Alternating a;
  const auto run = run_network(a.model, a.schedule, a.y0, Scheduler::adversarial_max(), checked());
  CHECK(run.final_state == Configuration{{5, 1}});
  CHECK(run.final_state == run_continuous(a.model, a.schedule, a.y0).final_state);

  const auto rec = record_triggers(run.trace, a.schedule, a.model.graph());
  CHECK(rec[0][0].self_triggered);
  CHECK(rec[0][0].resolve_vtime == 3.0);
  CHECK(rec[1][0].trigger == UpdateId{0, 1});
  CHECK(rec[1][0].resolve_vtime == 4.0);
  CHECK(rec[0][1].trigger == UpdateId{1, 1});
  CHECK(rec[0][1].resolve_vtime == 5.0);
  CHECK(rec[1][1].trigger == UpdateId{0, 2});
  CHECK(rec[0][2].trigger == UpdateId{1, 2});
  CHECK(rec[0][2].resolve_vtime == 7.0);
  CHECK(rec[1][2].trigger == UpdateId{0, 3});
  CHECK(rec[1][2].resolve_vtime == 8.0);

  const auto chain = chain_of(rec, {1, 3});
  CHECK(chain == std::vector<UpdateId>{{0, 1}, {1, 1}, {0, 2}, {1, 2}, {0, 3}, {1, 3}});
  CHECK(is_monotone(a.schedule, chain));

  const auto report = phase2_residence(run, a.schedule, a.model.graph());
  CHECK(run.stats.phase1_end == 3.0);
  CHECK(report.residence == std::vector<double>{4.0, 5.0});
  CHECK(report.chain_length == std::vector<std::uint32_t>{5, 6});
  CHECK(report.max_chain_length == 6);
  CHECK(report.violations.empty());
}

TEST_CASE("the earliest update is self-triggered") {
  const auto model = make_coloring(share(graphs::path(2)), 4);
  UpdateSchedule s;
  s.horizon = 1.0;
  s.nodes = {NodeUpdates{{0.1}, {1}, {0.5}}, NodeUpdates{{0.5, 0.7}, {2, 3}, {0.5, 0.5}}};
  for (auto sched : {Scheduler::synchronous(), Scheduler::uniform_random(3), Scheduler::adversarial_max()}) {
    const auto run = run_network(model, s, Configuration{{0, 1}}, sched, checked());
    const auto rec = record_triggers(run.trace, s, model.graph());
    CHECK(rec[0][0].self_triggered);
    CHECK(chain_of(rec, {0, 1}) == std::vector<UpdateId>{{0, 1}});
  }
}

TEST_CASE("isolated nodes: self-triggered chains along their own updates") {
  const auto model = make_hardcore(share(graphs::empty(4)), 0.5);
  const auto s = generate_schedule(model, 8.0, 21);
  const auto run = run_network(model, s, Configuration{std::vector<State>(4, 0)}, Scheduler::synchronous(), checked());
  const auto rec = record_triggers(run.trace, s, model.graph());
  for (NodeId v = 0; v < 4; ++v) {
    for (const auto& r : rec[v]) CHECK(r.self_triggered);
    if (s.nodes[v].count() >= 2) {
      const auto chain = chain_of(rec, {v, 2});
      CHECK(chain == std::vector<UpdateId>{{v, 1}, {v, 2}});
    }
  }
  const auto report = phase2_residence(run, s, model.graph());
  for (NodeId v = 0; v < 4; ++v) {
    CHECK(report.residence[v] == 0.0);
    CHECK(report.chain_length[v] == s.nodes[v].count());
  }
}

TEST_CASE("no updates means no residence") {
  const auto model = make_coloring(share(graphs::cycle(5)), 3);
  const auto s = generate_schedule(model, 0.0, 1);
  const auto run = run_network(model, s, Configuration{{0, 1, 0, 1, 2}}, Scheduler::uniform_random(1), checked());
  const auto report = phase2_residence(run, s, model.graph());
  CHECK(report.max_residence == 0.0);
  CHECK(report.max_chain_length == 0);
}

TEST_CASE("broken records are detected") {
  UpdateSchedule s;
  s.horizon = 1.0;
  s.nodes = {NodeUpdates{{0.1}, {0}, {0.5}}, NodeUpdates{{0.2}, {0}, {0.5}}};
  DependencyRecords cyc(2);
  cyc[0] = {DependencyRecord{{0, 1}, false, {1, 1}, 0.0}};
  cyc[1] = {DependencyRecord{{1, 1}, false, {0, 1}, 0.0}};
  CHECK_THROWS_AS(chain_of(cyc, {0, 1}), invariant_error);
  CHECK_THROWS_AS(chain_lengths(cyc, s), invariant_error);

  DependencyRecords dangling(2);
  dangling[0] = {DependencyRecord{{0, 1}, false, {1, 7}, 0.0}};
  dangling[1] = {DependencyRecord{{1, 1}, true, {}, 0.0}};
  CHECK_THROWS_AS(chain_of(dangling, {0, 1}), invariant_error);

  const auto model = make_coloring(share(graphs::path(2)), 3);
  auto run = run_network(model, s, Configuration{{1, 2}}, Scheduler::synchronous(), checked());
  auto missing = run.trace;
  std::erase_if(missing.events, [](const TraceEvent& e) { return e.kind == TraceKind::Resolve && e.src == 1; });
  CHECK_THROWS_AS(record_triggers(missing, s, model.graph()), invariant_error);
  auto twice = run.trace;
  for (const auto& e : run.trace.events)
    if (e.kind == TraceKind::Resolve) twice.events.push_back(e);
  CHECK_THROWS_AS(record_triggers(twice, s, model.graph()), invariant_error);
  auto off = run.trace;
  off.level = TraceLevel::Off;
  CHECK_THROWS_AS(record_triggers(off, s, model.graph()), invariant_error);
}

TEST_CASE("is_monotone") {
  UpdateSchedule s;
  s.horizon = 1.0;
  s.nodes = {NodeUpdates{{0.1, 0.5}, {0, 0}, {0.5, 0.5}}, NodeUpdates{{0.3}, {0}, {0.5}}};
  CHECK(is_monotone(s, {{0, 1}, {1, 1}, {0, 2}}));
  CHECK_FALSE(is_monotone(s, {{1, 1}, {0, 1}}));
  CHECK(is_monotone(s, {}));
}

TEST_CASE("property: residence is bounded by the chain length and chains are monotone") {
  std::mt19937_64 gen(555);
  for (int trial = 0; trial < 60; ++trial) {
    const auto g = testgen::random_graph(gen, testgen::pick(gen, 2, 20), 0.25);
    const auto model = testgen::random_model(gen, g);
    const auto y0 = testgen::random_configuration(gen, g->num_nodes(), model.q());
    const auto s = generate_schedule(model, 1.0 + 8.0 * rng::uniform01(gen), gen());
    for (auto sched : {Scheduler::synchronous(), Scheduler::uniform_random(gen()), Scheduler::adversarial_max()}) {
      const auto run = run_network(model, s, y0, sched, checked());
      const ResidenceReport rep = phase2_residence(run, s, *g, false);
      CHECK(rep.violations.empty());
      const auto rec = record_triggers(run.trace, s, *g);
      const auto len = chain_lengths(rec, s);
      for (NodeId v = 0; v < g->num_nodes(); ++v) {
        CHECK(std::ceil(rep.residence[v]) <= rep.chain_length[v]);
        for (std::uint32_t i = 1; i <= s.nodes[v].count(); ++i) {
          const auto chain = chain_of(rec, {v, i});
          CHECK(chain.size() == len[v][i - 1]);
          CHECK(chain.back() == UpdateId{v, i});
          CHECK(is_monotone(s, chain));
        }
      }
    }
  }
}
