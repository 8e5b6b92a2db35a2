#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "topobench/core/decision.hpp"
#include "topobench/core/graph.hpp"
#include "topobench/core/route.hpp"
#include "topobench/core/types.hpp"

namespace topobench {

struct UpdatePolicyParams {
  // Minimum traversal since the last localization before a new node.
  double spatial_threshold = 1.0;
  // Similarity threshold handed to retrieval-based decision sources.
  double accept_threshold = 0.7;
  // Edge-length regularity bound: created edges stay within kappa * mu_e.
  double kappa = 2.0;
  // Retrieval candidates logged per step for edge opportunities.
  std::size_t candidate_count = 5;

  void validate() const;
};

// Graph plus the policy's view of where the agent currently is.
struct PolicyState {
  TopoMap map;
  NodeId current = 0;
  // Traversal distance at which `current` became the current node.
  double anchor_traversal = 0.0;
};

// Map with a single node created by `first`.
PolicyState start_policy(const Sequence& frames, FrameIndex first);

// What the policy saw and did for one observation.
struct StepRecord {
  FrameIndex frame = 0;
  NodeId current_before = 0;
  std::vector<NodeId> candidates;
  LocalizerDecision decision;
  std::optional<NodeId> created;
  // Edge added this step, if any.
  std::optional<NodePair> added_edge;

  bool operator==(const StepRecord&) const = default;
};

using DecisionLog = std::vector<StepRecord>;

// One update of the map for observation `frame` of `frames`.
//
// accept(v): adds edge (current, v) when absent and moves to v.
// abstain: creates a node attached to current once the agent has moved at
// least spatial_threshold since its last localization; otherwise a no-op.
// Edge lengths come from `metric`. Throws ValidationError when the decision
// accepts a node that is not in the map.
PolicyState apply_update_policy(const PolicyState& state, const Sequence& frames,
                                FrameIndex frame, const LocalizerDecision& decision,
                                const UpdatePolicyParams& params, const RouteMetric& metric,
                                StepRecord* record = nullptr);

// Edge creation opportunities: consecutive-node pairs plus (current,
// candidate) pairs from the log, kept when their route distance is within d.
// Sorted and unique.
std::vector<NodePair> edge_opportunities(const TopoMap& g, const Sequence& frames,
                                         const EvalScale& scale, const DecisionLog& history,
                                         const RouteMetric& metric);

struct SourcedDecision {
  LocalizerDecision decision;
  std::vector<NodeId> candidates;
};

// Anything able to decide accept/abstain for a new observation.
class DecisionSource {
 public:
  virtual ~DecisionSource() = default;
  virtual SourcedDecision decide(const PolicyState& state, const Sequence& frames,
                                 FrameIndex frame) = 0;
};

// Ground-truth decisions: accept the route-nearest existing node within
// match_radius of the observation, abstain when there is none.
class OracleDecisionSource final : public DecisionSource {
 public:
  OracleDecisionSource(const RouteMetric& metric, double match_radius)
      : metric_(&metric), match_radius_(match_radius) {}

  SourcedDecision decide(const PolicyState& state, const Sequence& frames,
                         FrameIndex frame) override;

 private:
  const RouteMetric* metric_;
  double match_radius_;
};

// Grows a map over a whole sequence with the given decision source.
PolicyState grow_map(const Sequence& frames, DecisionSource& source,
                     const UpdatePolicyParams& params, const RouteMetric& metric,
                     DecisionLog* log = nullptr);

}  // namespace topobench
