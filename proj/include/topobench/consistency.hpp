#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "topobench/core/decision.hpp"
#include "topobench/core/graph.hpp"
#include "topobench/core/policy.hpp"
#include "topobench/core/route.hpp"
#include "topobench/core/types.hpp"

namespace topobench {

struct PairViolation {
  NodePair pair;
  std::optional<std::size_t> hops;  // nullopt: disconnected
  std::optional<double> route;

  bool operator==(const PairViolation&) const = default;
};

// Outcome of one universally quantified implication over a pair set.
struct PropertyResult {
  double value = 1.0;
  // No pair fell under the implication; value is 1 by convention.
  bool vacuous = true;
  std::size_t pairs = 0;
  // Pairs whose route distance could not be computed; not in `pairs`.
  std::size_t indeterminate = 0;
  std::vector<PairViolation> violations;

  bool holds() const { return violations.empty(); }
  bool operator==(const PropertyResult&) const = default;
};

struct ConsistencyReport {
  PropertyResult precision;
  PropertyResult recall;
  EvalScale scale;
  std::optional<double> mu_e;  // nullopt while the map has no edges
  std::size_t n = 1;

  bool holds() const { return precision.holds() && recall.holds(); }
};

struct HopBudget {
  std::optional<double> mu_e;
  std::size_t n = 1;
};

// Derives n from the map's median edge length; n = 1 for an edgeless map.
HopBudget hop_budget(const TopoMap& g, const EvalScale& scale);

// Fraction of unordered pairs within n hops whose route distance is <= d.
PropertyResult edge_precision(const TopoMap& g, const Sequence& frames,
                              const RouteMetric& metric, const EvalScale& scale,
                              std::size_t n);
PropertyResult edge_precision(const TopoMap& g, const Sequence& frames,
                              const RouteMetric& metric, const EvalScale& scale);

// Fraction of opportunity pairs within route distance d that are also
// within n hops.
PropertyResult edge_recall(const TopoMap& g, const Sequence& frames, const RouteMetric& metric,
                           const std::vector<NodePair>& omega, const EvalScale& scale,
                           std::size_t n);
PropertyResult edge_recall(const TopoMap& g, const Sequence& frames, const RouteMetric& metric,
                           const std::vector<NodePair>& omega, const EvalScale& scale);

ConsistencyReport evaluate_consistency(const TopoMap& g, const Sequence& frames,
                                       const RouteMetric& metric,
                                       const std::vector<NodePair>& omega,
                                       const EvalScale& scale);

struct HarnessStep {
  std::size_t step = 0;
  FrameIndex frame = 0;
  LocalizerDecision decision;
  std::vector<NodeId> candidates;
  std::optional<NodePair> added_edge;
  std::optional<double> added_edge_length;
  // Added edge longer than kappa * mu_e (policy not edge-length regular).
  bool irregular_edge = false;
  ConsistencyReport report;
};

struct HarnessTrace {
  // epsilon <= 1 / kappa, the hypothesis the induction needs.
  bool hypothesis_holds = false;
  // hypothesis_holds and every step consistent.
  bool certified = false;
  std::string note;
  std::vector<HarnessStep> steps;
  std::optional<std::size_t> first_break;
  std::size_t irregular_edges = 0;
  PolicyState final_state;
  std::vector<NodePair> omega;
};

// Wraps a decision source and, at one step, replaces its decision with an
// accept of the node farthest by route from the observation.
class FaultInjectionSource final : public DecisionSource {
 public:
  FaultInjectionSource(DecisionSource& inner, const RouteMetric& metric, std::size_t fault_step)
      : inner_(&inner), metric_(&metric), fault_step_(fault_step) {}
  SourcedDecision decide(const PolicyState& state, const Sequence& frames,
                         FrameIndex frame) override;

 private:
  DecisionSource* inner_;
  const RouteMetric* metric_;
  std::size_t fault_step_;
};

// Grows a map frame by frame with `source`, re-evaluating edge precision
// and edge recall (mu_e recomputed) after every step. Step 0 is the single
// node created by frame 0.
HarnessTrace run_growth_invariant_harness(const Sequence& traversal, DecisionSource& source,
                                          const RouteMetric& metric,
                                          const UpdatePolicyParams& params,
                                          const EvalScale& scale);

}  // namespace topobench
