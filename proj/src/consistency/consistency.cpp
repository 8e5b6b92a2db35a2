#include "topobench/consistency.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "topobench/core/error.hpp"

namespace topobench {

namespace {

void finish(PropertyResult& result) {
  result.vacuous = result.pairs == 0;
  result.value = result.vacuous
                     ? 1.0
                     : 1.0 - static_cast<double>(result.violations.size()) /
                                 static_cast<double>(result.pairs);
}

}  // namespace

HopBudget hop_budget(const TopoMap& g, const EvalScale& scale) {
  HopBudget budget;
  if (g.edge_count() > 0) {
    budget.mu_e = median_edge_length(g);
    budget.n = hop_threshold(scale, *budget.mu_e);
  }
  return budget;
}

PropertyResult edge_precision(const TopoMap& g, const Sequence& frames,
                              const RouteMetric& metric, const EvalScale& scale,
                              std::size_t n) {
  PropertyResult result;
  for (NodeId u = 0; u < g.node_count(); ++u) {
    for (const HopReach& reach : nodes_within(g, u, n)) {
      if (reach.node <= u) continue;
      const auto route = node_route_distance(g, frames, metric, u, reach.node);
      if (!route) {
        ++result.indeterminate;
        continue;
      }
      ++result.pairs;
      if (*route > scale.d + kDistanceTolerance) {
        result.violations.push_back({NodePair{u, reach.node}, reach.hops, route});
      }
    }
  }
  std::sort(result.violations.begin(), result.violations.end(),
            [](const PairViolation& a, const PairViolation& b) { return a.pair < b.pair; });
  finish(result);
  return result;
}

PropertyResult edge_precision(const TopoMap& g, const Sequence& frames,
                              const RouteMetric& metric, const EvalScale& scale) {
  return edge_precision(g, frames, metric, scale, hop_budget(g, scale).n);
}

PropertyResult edge_recall(const TopoMap& g, const Sequence& frames, const RouteMetric& metric,
                           const std::vector<NodePair>& omega, const EvalScale& scale,
                           std::size_t n) {
  PropertyResult result;
  // Group by the first endpoint so each bounded BFS is reused.
  std::map<NodeId, std::vector<NodeId>> by_source;
  for (const NodePair& p : std::set<NodePair>(omega.begin(), omega.end())) {
    if (p.u == p.v) continue;
    if (!g.contains(p.u) || !g.contains(p.v)) {
      throw ValidationError("edge_recall: opportunity references a node outside the map");
    }
    by_source[p.u].push_back(p.v);
  }
  for (const auto& [u, partners] : by_source) {
    std::map<NodeId, std::size_t> near;
    for (const HopReach& reach : nodes_within(g, u, n)) near.emplace(reach.node, reach.hops);
    for (NodeId v : partners) {
      const auto route = node_route_distance(g, frames, metric, u, v);
      if (!route) {
        ++result.indeterminate;
        continue;
      }
      if (*route > scale.d + kDistanceTolerance) continue;
      ++result.pairs;
      if (!near.contains(v)) {
        result.violations.push_back({NodePair{u, v}, hop_distance(g, u, v), route});
      }
    }
  }
  finish(result);
  return result;
}

PropertyResult edge_recall(const TopoMap& g, const Sequence& frames, const RouteMetric& metric,
                           const std::vector<NodePair>& omega, const EvalScale& scale) {
  return edge_recall(g, frames, metric, omega, scale, hop_budget(g, scale).n);
}

ConsistencyReport evaluate_consistency(const TopoMap& g, const Sequence& frames,
                                       const RouteMetric& metric,
                                       const std::vector<NodePair>& omega,
                                       const EvalScale& scale) {
  ConsistencyReport report;
  report.scale = scale;
  const HopBudget budget = hop_budget(g, scale);
  report.mu_e = budget.mu_e;
  report.n = budget.n;
  report.precision = edge_precision(g, frames, metric, scale, budget.n);
  report.recall = edge_recall(g, frames, metric, omega, scale, budget.n);
  return report;
}

HarnessTrace run_growth_invariant_harness(const Sequence& traversal, DecisionSource& source,
                                          const RouteMetric& metric,
                                          const UpdatePolicyParams& params,
                                          const EvalScale& scale) {
  params.validate();
  scale.validate();
  if (traversal.empty()) throw ValidationError("harness: empty traversal");

  HarnessTrace trace;
  trace.hypothesis_holds = scale.epsilon <= 1.0 / params.kappa + 1e-12;
  if (!trace.hypothesis_holds) {
    std::ostringstream note;
    note << "epsilon " << scale.epsilon << " exceeds 1/kappa " << 1.0 / params.kappa
         << "; invariants are not certified, trace is diagnostic only";
    trace.note = note.str();
  }

  PolicyState state = start_policy(traversal, 0);
  std::set<NodePair> omega;

  HarnessStep first;
  first.frame = 0;
  first.report = evaluate_consistency(state.map, traversal, metric, {}, scale);
  trace.steps.push_back(std::move(first));

  for (FrameIndex f = 1; f < traversal.size(); ++f) {
    SourcedDecision sourced = source.decide(state, traversal, f);
    StepRecord record;
    record.candidates = sourced.candidates;
    state = apply_update_policy(state, traversal, f, sourced.decision, params, metric, &record);

    for (const NodePair& p : edge_opportunities(state.map, traversal, scale, {record}, metric)) {
      omega.insert(p);
    }
    const std::vector<NodePair> omega_now(omega.begin(), omega.end());

    HarnessStep step;
    step.step = f;
    step.frame = f;
    step.decision = record.decision;
    step.candidates = std::move(record.candidates);
    step.added_edge = record.added_edge;
    step.report = evaluate_consistency(state.map, traversal, metric, omega_now, scale);
    if (record.added_edge) {
      const auto length =
          node_route_distance(state.map, traversal, metric, record.added_edge->u,
                              record.added_edge->v);
      step.added_edge_length = length;
      if (length && step.report.mu_e &&
          *length > params.kappa * *step.report.mu_e + kDistanceTolerance) {
        step.irregular_edge = true;
        ++trace.irregular_edges;
      }
    }
    if (!trace.first_break && !step.report.holds()) trace.first_break = f;
    trace.steps.push_back(std::move(step));
  }

  trace.certified = trace.hypothesis_holds && !trace.first_break;
  trace.final_state = std::move(state);
  trace.omega.assign(omega.begin(), omega.end());
  return trace;
}

SourcedDecision FaultInjectionSource::decide(const PolicyState& state, const Sequence& frames,
                                             FrameIndex frame) {
  SourcedDecision out = inner_->decide(state, frames, frame);
  if (frame != fault_step_) return out;
  std::optional<NodeId> far;
  double far_route = -1.0;
  for (const TopoNode& node : state.map.nodes()) {
    if (node.id == state.current) continue;
    const auto r = metric_->between(frames[node.source_frame], frames[frame]);
    if (r && *r > far_route) {
      far_route = *r;
      far = node.id;
    }
  }
  if (far) out.decision = LocalizerDecision::accept(*far, 1.0);
  return out;
}

}  // namespace topobench
