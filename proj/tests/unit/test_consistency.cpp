#include <algorithm>
#include <set>

#include "doctest.h"
#include "test_support.hpp"
#include "topobench/consistency.hpp"
#include "topobench/core/error.hpp"
#include "topobench/core/route.hpp"

using namespace topobench;

namespace {

// Frames with random increasing traversal so routes differ per pair.
Sequence random_line(Rng& rng, std::size_t n) {
  Sequence s;
  double t = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    Frame f;
    f.frame_id = i;
    f.timestamp = double(i);
    f.pose = {t, 0, 0};
    f.traversal_dist = t;
    s.frames.push_back(f);
    t += rng.uniform(0.2, 1.5);
  }
  return s;
}

struct Oracle {
  std::size_t pairs = 0;
  std::vector<NodePair> violations;
};

Oracle brute_precision(const TopoMap& g, const Sequence& s, double d, std::size_t n) {
  const auto fw = tbtest::floyd_warshall(g);
  Oracle o;
  for (std::size_t u = 0; u < g.node_count(); ++u)
    for (std::size_t v = u + 1; v < g.node_count(); ++v) {
      if (fw[u][v] > n) continue;
      ++o.pairs;
      const double r = std::abs(*s[u].traversal_dist - *s[v].traversal_dist);
      if (r > d + kDistanceTolerance) o.violations.push_back({u, v});
    }
  return o;
}

Oracle brute_recall(const TopoMap& g, const Sequence& s, const std::vector<NodePair>& omega,
                    double d, std::size_t n) {
  const auto fw = tbtest::floyd_warshall(g);
  Oracle o;
  for (const NodePair& p : std::set<NodePair>(omega.begin(), omega.end())) {
    const double r = std::abs(*s[p.u].traversal_dist - *s[p.v].traversal_dist);
    if (r > d + kDistanceTolerance) continue;
    ++o.pairs;
    if (fw[p.u][p.v] > n) o.violations.push_back(p);
  }
  return o;
}

std::vector<NodePair> pairs_of(const PropertyResult& r) {
  std::vector<NodePair> out;
  for (const auto& v : r.violations) out.push_back(v.pair);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("edge precision and recall match exhaustive all-pairs oracles") {
  Rng rng(31337);
  const TraversalRouteMetric metric;
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n_nodes = 1 + rng.below(30);
    const Sequence s = random_line(rng, n_nodes);
    TopoMap g;
    for (std::size_t i = 0; i < n_nodes; ++i) g.add_node(i);
    const double p = rng.uniform(0.03, 0.3);
    for (std::size_t u = 0; u < n_nodes; ++u)
      for (std::size_t v = u + 1; v < n_nodes; ++v)
        if (rng.uniform() < p)
          g.add_edge(u, v, std::abs(*s[u].traversal_dist - *s[v].traversal_dist));
    std::vector<NodePair> omega;
    for (std::size_t k = 0; k < n_nodes; ++k) {
      const std::size_t a = rng.below(n_nodes), b = rng.below(n_nodes);
      if (a != b) omega.push_back(NodePair::of(a, b));
    }
    const EvalScale scale{rng.uniform(0.5, 4.0), rng.uniform(0.1, 1.0)};
    const ConsistencyReport rep = evaluate_consistency(g, s, metric, omega, scale);
    const std::size_t n = g.edge_count() ? hop_threshold(scale, median_edge_length(g)) : 1;
    REQUIRE(rep.n == n);

    const Oracle po = brute_precision(g, s, scale.d, n);
    REQUIRE(rep.precision.pairs == po.pairs);
    REQUIRE(pairs_of(rep.precision) == po.violations);
    REQUIRE(rep.precision.vacuous == (po.pairs == 0));
    if (po.pairs) {
      REQUIRE(rep.precision.value ==
              doctest::Approx(1.0 - double(po.violations.size()) / po.pairs).epsilon(1e-15));
    }

    const Oracle ro = brute_recall(g, s, omega, scale.d, n);
    REQUIRE(rep.recall.pairs == ro.pairs);
    REQUIRE(pairs_of(rep.recall) == ro.violations);
  }
}

TEST_CASE("precision examples") {
  const TraversalRouteMetric metric;
  Sequence s = tbtest::line_sequence(1);
  TopoMap one;
  one.add_node(0);
  const PropertyResult r = edge_precision(one, s, metric, EvalScale{});
  CHECK(r.vacuous);
  CHECK(r.value == 1.0);

  // A 3-node chain with unit edges: every pair within 2 hops is within 2 m.
  const Sequence line = tbtest::line_sequence(3);
  TopoMap chain;
  for (int i = 0; i < 3; ++i) chain.add_node(i);
  chain.add_edge(0, 1, 1);
  chain.add_edge(1, 2, 1);
  const PropertyResult c = edge_precision(chain, line, metric, EvalScale{2.0, 1.0});
  CHECK(c.pairs == 3);
  CHECK(c.holds());

  // A shortcut edge between far-apart places breaks precision.
  const Sequence far = tbtest::line_sequence(4, 2.0);
  TopoMap bad;
  for (int i = 0; i < 4; ++i) bad.add_node(i);
  bad.add_edge(0, 1, 2);
  bad.add_edge(1, 2, 2);
  bad.add_edge(2, 3, 2);
  bad.add_edge(0, 3, 6);
  const PropertyResult b = edge_precision(bad, far, metric, EvalScale{2.0, 1.0});
  REQUIRE(b.violations.size() == 1);
  CHECK(b.violations[0].pair == NodePair{0, 3});
}

TEST_CASE("recall counts only opportunities within d") {
  const TraversalRouteMetric metric;
  const Sequence s = tbtest::line_sequence(4);
  TopoMap g;
  for (int i = 0; i < 4; ++i) g.add_node(i);
  g.add_edge(0, 1, 1);
  const std::vector<NodePair> omega{{0, 1}, {1, 2}, {0, 3}};
  const PropertyResult r = edge_recall(g, s, metric, omega, EvalScale{2.0, 0.5});
  CHECK(r.pairs == 2);  // (0,3) is 3 m apart
  REQUIRE(r.violations.size() == 1);
  CHECK(r.violations[0].pair == NodePair{1, 2});
  CHECK_FALSE(r.violations[0].hops.has_value());
  CHECK(edge_recall(g, s, metric, {}, EvalScale{}).vacuous);
  CHECK_THROWS_AS(edge_recall(g, s, metric, {{0, 9}}, EvalScale{}), ValidationError);
}

TEST_CASE("missing route data is indeterminate, not a violation") {
  Sequence s = tbtest::line_sequence(3);
  s.frames[2].traversal_dist.reset();
  TopoMap g;
  for (int i = 0; i < 3; ++i) g.add_node(i);
  g.add_edge(0, 1, 1);
  g.add_edge(1, 2, 1);
  const PropertyResult r = edge_precision(g, s, TraversalRouteMetric{}, EvalScale{2.0, 1.0});
  CHECK(r.indeterminate == 2);
  CHECK(r.pairs == 1);
}

TEST_CASE("growth harness certifies the straight-line oracle run") {
  const Sequence s = tbtest::line_sequence(20);
  const TraversalRouteMetric metric;
  OracleDecisionSource oracle(metric, 0.5);
  const HarnessTrace t =
      run_growth_invariant_harness(s, oracle, metric, UpdatePolicyParams{}, EvalScale{2.0, 0.5});
  CHECK(t.hypothesis_holds);
  CHECK(t.certified);
  CHECK(t.steps.size() == 20);
  for (const HarnessStep& st : t.steps) {
    CHECK(st.report.precision.value == 1.0);
    CHECK(st.report.recall.value == 1.0);
  }
  CHECK(t.final_state.map.node_count() == 20);
}

TEST_CASE("violated hypothesis refuses certification but keeps the trace") {
  const Sequence s = tbtest::line_sequence(8);
  const TraversalRouteMetric metric;
  OracleDecisionSource oracle(metric, 0.5);
  UpdatePolicyParams params;
  params.kappa = 2.0;
  const HarnessTrace t = run_growth_invariant_harness(s, oracle, metric, params, {2.0, 1.0});
  CHECK_FALSE(t.hypothesis_holds);
  CHECK_FALSE(t.certified);
  CHECK_FALSE(t.note.empty());
  CHECK(t.steps.size() == 8);
}

TEST_CASE("injected bad decision is reported at its step") {
  const Sequence s = tbtest::line_sequence(15);
  const TraversalRouteMetric metric;
  OracleDecisionSource oracle(metric, 0.5);
  FaultInjectionSource faulty(oracle, metric, 7);
  const HarnessTrace t =
      run_growth_invariant_harness(s, faulty, metric, UpdatePolicyParams{}, {2.0, 0.5});
  REQUIRE(t.first_break.has_value());
  CHECK(*t.first_break == 7);
  CHECK_FALSE(t.certified);
  CHECK(t.steps[7].irregular_edge);
  for (std::size_t i = 0; i < 7; ++i) CHECK(t.steps[i].report.holds());
}
