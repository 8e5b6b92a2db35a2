#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "topobench/ambiguity.hpp"
#include "topobench/core/decision.hpp"
#include "topobench/core/graph.hpp"
#include "topobench/core/policy.hpp"
#include "topobench/core/similarity.hpp"

namespace topobench {

enum class Method { GM, SMMed, SMAll, PBU };

// Display names: GM, SM-Med, SM-All, PBU.
std::string method_name(Method m);
// Accepts display names and GM / SM_MED / SM_ALL / PBU. Throws ValidationError
// listing valid names otherwise.
Method parse_method(const std::string& name);
std::vector<Method> all_methods();

// Best candidate and its score before a threshold is applied. Every method
// is threshold-free up to this point, so one proposal serves a whole sweep.
struct Proposal {
  std::optional<NodeId> node;
  double score = 0.0;
  bool operator==(const Proposal&) const = default;
};

// accept(node) when score >= tau, abstain otherwise.
LocalizerDecision decide(const Proposal& p, double tau);

// Query rows of `sim` are observations, reference columns are the frames that
// created the map's nodes (node.source_frame).

Proposal gm_propose(FrameIndex z, const TopoMap& g, const SimilaritySource& sim,
                    std::optional<NodeId> exclude = std::nullopt);
LocalizerDecision gm_decide(FrameIndex z, const TopoMap& g, double tau,
                            const SimilaritySource& sim);

enum class Aggregation { Median, All };

struct SMParams {
  std::size_t h = 2;
  Aggregation aggregation = Aggregation::Median;
  double tau = 0.7;

  void validate() const;
};

// Window offsets k in [-h, h] kept when observation z+k has been seen
// (z + k < observed) and node frame source+k exists.
std::vector<double> sm_window(FrameIndex z, std::size_t observed, FrameIndex source,
                              std::size_t h, const SimilaritySource& sim);
double aggregate(std::vector<double> window, Aggregation f);

// MEDIAN scores by the window median, ALL by the window minimum, which is at
// least tau exactly when every frame similarity is.
Proposal sm_propose(FrameIndex z, std::size_t observed, const TopoMap& g, const SMParams& params,
                    const SimilaritySource& sim, std::optional<NodeId> exclude = std::nullopt);
LocalizerDecision sm_decide(FrameIndex z, std::size_t observed, const TopoMap& g,
                            const SMParams& params, const SimilaritySource& sim);

struct Likelihood {
  enum class Kind { Exponential, Identity };
  Kind kind = Kind::Exponential;
  double lambda = 10.0;
  double floor = 1e-12;

  double operator()(double similarity) const;
};

struct PBUParams {
  // Hop radius of the near transition set; nullopt means unbounded.
  std::optional<std::size_t> w_u = 2;
  double trans_near = 1.0;
  double trans_far = 0.05;
  Likelihood likelihood;
  // Initialization mode for a fresh sequence; only uniform is supported.
  std::string init = "uniform";
  // Mass given to nodes created after the belief was formed.
  double new_node_mass = 1e-3;
  // Decision threshold on the posterior maximum.
  double tau = 0.7;

  void validate() const;
};

// Row-normalized motion model over the nodes of a fixed map.
class PBUTransition {
 public:
  PBUTransition(const TopoMap& g, const PBUParams& params);

  std::size_t size() const { return n_; }
  double operator()(NodeId from, NodeId to) const { return t_[from * n_ + to]; }
  std::vector<double> predict(std::span<const double> belief) const;

 private:
  std::size_t n_ = 0;
  std::vector<double> t_;
};

std::vector<double> uniform_belief(std::size_t nodes);

struct PBUStep {
  std::vector<double> posterior;
  Proposal proposal;
  LocalizerDecision decision;
};

// One predict-update cycle. A belief shorter than the node count is padded
// with new_node_mass per missing node and renormalized. `transition` may be
// passed when the map is unchanged between calls.
PBUStep pbu_step(std::span<const double> belief, FrameIndex z, const TopoMap& g,
                 const PBUParams& params, const SimilaritySource& sim,
                 const PBUTransition* transition = nullptr);

struct LocalizerParams {
  SMParams sm;
  PBUParams pbu;

  void validate() const;
};

// A test case with its map built by the update policy and similarities ready.
struct PreparedCase {
  const TestCase* source = nullptr;
  TopoMap map;
  std::shared_ptr<const SimilaritySource> sim;
  std::shared_ptr<const PBUTransition> transition;  // built on first PBU use
};

PreparedCase prepare_case(const TestCase& tc);

// Processes the test frames in order and returns the final-frame proposal.
Proposal propose_on_case(PreparedCase& pc, Method method, const LocalizerParams& params);
LocalizerDecision run_localizer_on_case(PreparedCase& pc, Method method,
                                        const LocalizerParams& params, double tau);

// Retrieval-driven decisions for growing a map from one sequence; the query
// and reference sequences are both `frames`. The current node is never a
// candidate for itself.
class LocalizerDecisionSource final : public DecisionSource {
 public:
  LocalizerDecisionSource(Method method, LocalizerParams params, double tau,
                          std::size_t candidate_count = 5);
  SourcedDecision decide(const PolicyState& state, const Sequence& frames,
                         FrameIndex frame) override;

 private:
  Method method_;
  LocalizerParams params_;
  double tau_;
  std::size_t candidate_count_;
  std::vector<double> belief_;
};

}  // namespace topobench
