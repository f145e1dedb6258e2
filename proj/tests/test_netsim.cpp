#include <doctest.h>

#include "support.hpp"
#include "tvdopt/errors.hpp"
#include "tvdopt/netsim.hpp"

using namespace tvdopt;
using namespace tvdopt::netsim;

namespace {

double trace_difference(const RunTrace& a, const RunTrace& b) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.x.size(); ++k) {
    worst = std::max(worst, max_abs_diff(a.x[k], b.x[k]));
    worst = std::max(worst, max_abs_diff(a.y[k], b.y[k]));
  }
  for (std::size_t k = 0; k < a.v.size(); ++k) {
    worst = std::max(worst, max_abs_diff(a.v[k], b.v[k]));
    worst = std::max(worst, max_abs_diff(a.u[k], b.u[k]));
  }
  return worst;
}

std::size_t links(const GossipMatrix& w) { return w.off_diagonal_links(); }

}  // namespace

TEST_CASE("message passing reproduces the vectorized trace on the corpus") {
  for (const auto& c : testing::test_corpus()) {
    const auto reference = run_algorithm(c.problem, c.schedule, c.params, c.initial, c.iterations);
    const auto sim = run_netsim(c.problem, c.schedule, c.params, c.initial, c.iterations);
    CAPTURE(c.name);
    REQUIRE(sim.trace.x.size() == reference.x.size());
    CHECK(trace_difference(sim.trace, reference) <= 1e-12);
    CHECK(sim.trace.counters.gradient_evaluations == reference.counters.gradient_evaluations);
    CHECK(sim.trace.counters.row_communications == reference.counters.row_communications);

    const auto audit = locality_audit(sim.ledger, c.schedule, c.params.m, c.iterations);
    CHECK(audit.passed);
    CHECK(audit.deliveries == sim.trace.counters.messages);
    for (std::size_t k = 0; k < c.iterations; ++k) {
      std::size_t expected = 0;
      for (std::size_t l = 1; l <= c.params.m; ++l) expected += links(c.schedule.matrix_at(k, l, c.params.m));
      CHECK(audit.messages_per_iteration[k] == expected);
    }
  }
}

TEST_CASE("trace does not depend on the agent order within a round") {
  const auto corpus = testing::test_corpus();
  for (const auto& c : corpus) {
    const auto asc = run_netsim(c.problem, c.schedule, c.params, c.initial, 15);
    NetsimOptions desc;
    desc.order = AgentOrder::descending;
    NetsimOptions shuffled;
    shuffled.order = AgentOrder::shuffled;
    shuffled.order_seed = 77;
    const auto b = run_netsim(c.problem, c.schedule, c.params, c.initial, 15, desc);
    const auto s = run_netsim(c.problem, c.schedule, c.params, c.initial, 15, shuffled);
    CAPTURE(c.name);
    CHECK(asc.trace.x == b.trace.x);
    CHECK(asc.trace.x == s.trace.x);
    CHECK(asc.trace.y == s.trace.y);
  }
}

TEST_CASE("an agent using a weight with no link fails locally") {
  const auto corpus = testing::test_corpus();
  const auto& c = corpus.front();
  // Agent 1 of the reference pair has no link from agent 4 (index 3); giving
  // it weight there must be caught, since the message never arrives.
  NetsimOptions options;
  options.row_override = {0, Vector{0.0, 0.25, 0.25, 0.25, 0.25}};
  CHECK_THROWS_AS(run_netsim(c.problem, c.schedule, c.params, c.initial, 2, options), LocalityError);
}

TEST_CASE("the audit flags deliveries across zero-weight links") {
  const auto corpus = testing::test_corpus();
  const auto& c = corpus.front();
  NetsimOptions options;
  options.extra_deliveries = {{1, 3, 0}};  // round 1, agent 4 -> agent 1
  const auto sim = run_netsim(c.problem, c.schedule, c.params, c.initial, 2, options);
  const auto audit = locality_audit(sim.ledger, c.schedule, c.params.m, 2);
  CHECK_FALSE(audit.passed);
  REQUIRE(audit.violations.size() == 1);
  CHECK(audit.violations.front() == Delivery{1, 3, 0});
}

TEST_CASE("a lost message is a protocol error") {
  const auto corpus = testing::test_corpus();
  const auto& c = corpus.front();
  NetsimOptions options;
  options.dropped = {{0, 1, 0}};  // agent 2 -> agent 1 in round 0
  CHECK_THROWS_AS(run_netsim(c.problem, c.schedule, c.params, c.initial, 1, options), ProtocolError);
}

TEST_CASE("agent node inbox rules") {
  const auto f = quadratic_objective(1, {1.0}, {0.0});
  AgentNode node(0, f, {1.0}, {0.0});
  node.begin_iteration();
  CHECK(node.outgoing() == Vector{1.0});
  node.receive({0, 1, 0, {3.0}});
  CHECK_THROWS_AS(node.receive({0, 1, 0, {3.0}}), ProtocolError);
  CHECK_THROWS_AS(node.receive({0, 2, 5, {3.0}}), ProtocolError);
  CHECK_THROWS_AS(node.receive({0, 2, 0, {3.0, 1.0}}), ProtocolError);
  const Vector row{0.5, 0.5};
  node.mix(row, 0);
  CHECK(node.v() == Vector{2.0});
  node.local_update(0.5, 0.8);
  CHECK(node.u() == Vector{1.0});
  CHECK(node.y() == Vector{-1.0});
  CHECK(node.x()[0] == doctest::Approx(1.8));
}

TEST_CASE("round barrier rejects late messages") {
  RoundBarrier barrier;
  barrier.open(4);
  CHECK(barrier.round() == 4);
  CHECK_THROWS_AS(barrier.post({3, 0, 1, {1.0}}), ProtocolError);
}
