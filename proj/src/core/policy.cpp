#include "topobench/core/policy.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <string>

#include "topobench/core/error.hpp"

namespace topobench {

void UpdatePolicyParams::validate() const {
  if (!(spatial_threshold > 0.0)) {
    throw ValidationError("policy: spatial_threshold must be positive");
  }
  if (!(kappa >= 1.0)) throw ValidationError("policy: kappa must be at least 1");
  if (candidate_count == 0) throw ValidationError("policy: candidate_count must be positive");
}

namespace {

double traversal_of(const Frame& f) {
  if (!f.traversal_dist) {
    throw UnavailableDistance("frame " + std::to_string(f.frame_id) + " lacks traversal distance");
  }
  return *f.traversal_dist;
}

double edge_length(const RouteMetric& metric, const Frame& a, const Frame& b) {
  const auto length = metric.between(a, b);
  if (!length) {
    throw UnavailableDistance("no route length between frames " + std::to_string(a.frame_id) +
                              " and " + std::to_string(b.frame_id));
  }
  return *length;
}

}  // namespace

PolicyState start_policy(const Sequence& frames, FrameIndex first) {
  PolicyState state;
  state.current = state.map.add_node(first);
  state.anchor_traversal = traversal_of(frames[first]);
  return state;
}

PolicyState apply_update_policy(const PolicyState& state, const Sequence& frames,
                                FrameIndex frame, const LocalizerDecision& decision,
                                const UpdatePolicyParams& params, const RouteMetric& metric,
                                StepRecord* record) {
  PolicyState next = state;
  const Frame& z = frames[frame];
  StepRecord step;
  step.frame = frame;
  step.current_before = state.current;
  step.decision = decision;

  if (decision.accepted()) {
    if (!state.map.contains(decision.node)) {
      throw ValidationError("accepted node " + std::to_string(decision.node) +
                            " is not in the map");
    }
    if (decision.node != state.current) {
      const double length =
          edge_length(metric, frames[state.map.node(state.current).source_frame],
                      frames[state.map.node(decision.node).source_frame]);
      if (next.map.add_edge(state.current, decision.node, length)) {
        step.added_edge = NodePair::of(state.current, decision.node);
      }
    }
    next.current = decision.node;
    next.anchor_traversal = traversal_of(z);
  } else {
    const double moved = traversal_of(z) - state.anchor_traversal;
    if (moved >= params.spatial_threshold - kDistanceTolerance) {
      const Frame& from = frames[state.map.node(state.current).source_frame];
      const double length = edge_length(metric, from, z);
      const NodeId created = next.map.add_node(frame);
      next.map.add_edge(state.current, created, length);
      step.created = created;
      step.added_edge = NodePair::of(state.current, created);
      next.current = created;
      next.anchor_traversal = traversal_of(z);
    }
  }
  if (record != nullptr) {
    step.candidates = std::move(record->candidates);
    *record = std::move(step);
  }
  return next;
}

std::vector<NodePair> edge_opportunities(const TopoMap& g, const Sequence& frames,
                                         const EvalScale& scale, const DecisionLog& history,
                                         const RouteMetric& metric) {
  std::set<NodePair> found;
  auto consider = [&](NodeId a, NodeId b) {
    if (a == b || !g.contains(a) || !g.contains(b)) return;
    const auto route = node_route_distance(g, frames, metric, a, b);
    if (route && *route <= scale.d + kDistanceTolerance) found.insert(NodePair::of(a, b));
  };
  for (const StepRecord& step : history) {
    if (step.created) consider(step.current_before, *step.created);
    for (NodeId c : step.candidates) consider(step.current_before, c);
  }
  return {found.begin(), found.end()};
}

SourcedDecision OracleDecisionSource::decide(const PolicyState& state, const Sequence& frames,
                                             FrameIndex frame) {
  const Frame& z = frames[frame];
  std::vector<std::pair<double, NodeId>> matches;
  for (const TopoNode& node : state.map.nodes()) {
    const auto route = metric_->between(z, frames[node.source_frame]);
    if (route && *route <= match_radius_ + kDistanceTolerance) {
      matches.emplace_back(*route, node.id);
    }
  }
  std::sort(matches.begin(), matches.end());
  SourcedDecision out;
  if (matches.empty()) {
    out.decision = LocalizerDecision::abstain(0.0);
    return out;
  }
  out.decision = LocalizerDecision::accept(matches.front().second, 1.0);
  for (const auto& [route, id] : matches) out.candidates.push_back(id);
  return out;
}

PolicyState grow_map(const Sequence& frames, DecisionSource& source,
                     const UpdatePolicyParams& params, const RouteMetric& metric,
                     DecisionLog* log) {
  params.validate();
  if (frames.empty()) throw ValidationError("grow_map: empty sequence");
  PolicyState state = start_policy(frames, 0);
  for (FrameIndex f = 1; f < frames.size(); ++f) {
    SourcedDecision sourced = source.decide(state, frames, f);
    StepRecord record;
    record.candidates = std::move(sourced.candidates);
    state = apply_update_policy(state, frames, f, sourced.decision, params, metric, &record);
    if (log != nullptr) log->push_back(std::move(record));
  }
  return state;
}

}  // namespace topobench
