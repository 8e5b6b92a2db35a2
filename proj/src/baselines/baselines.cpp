#include "topobench/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "topobench/core/error.hpp"
#include "topobench/core/route.hpp"

namespace topobench {

std::string method_name(Method m) {
  switch (m) {
    case Method::GM:
      return "GM";
    case Method::SMMed:
      return "SM-Med";
    case Method::SMAll:
      return "SM-All";
    case Method::PBU:
      return "PBU";
  }
  return "GM";
}

Method parse_method(const std::string& name) {
  if (name == "GM") return Method::GM;
  if (name == "SM-Med" || name == "SM_MED") return Method::SMMed;
  if (name == "SM-All" || name == "SM_ALL") return Method::SMAll;
  if (name == "PBU") return Method::PBU;
  throw ValidationError("unknown method '" + name + "' (valid: GM, SM-Med, SM-All, PBU)");
}

std::vector<Method> all_methods() { return {Method::GM, Method::SMMed, Method::SMAll, Method::PBU}; }

LocalizerDecision decide(const Proposal& p, double tau) {
  if (p.node && p.score >= tau) return LocalizerDecision::accept(*p.node, p.score);
  return LocalizerDecision::abstain(p.score);
}

namespace {

void check_rows(FrameIndex z, const TopoMap& g, const SimilaritySource& sim) {
  if (g.node_count() == 0) throw ValidationError("localizer: empty map");
  if (z >= sim.query_count()) throw ValidationError("localizer: observation out of range");
}

}  // namespace

Proposal gm_propose(FrameIndex z, const TopoMap& g, const SimilaritySource& sim,
                    std::optional<NodeId> exclude) {
  check_rows(z, g, sim);
  Proposal best;
  for (const TopoNode& node : g.nodes()) {
    if (exclude && node.id == *exclude) continue;
    const double s = sim(z, node.source_frame);
    if (!best.node || s > best.score) best = Proposal{node.id, s};
  }
  return best;
}

LocalizerDecision gm_decide(FrameIndex z, const TopoMap& g, double tau,
                            const SimilaritySource& sim) {
  return decide(gm_propose(z, g, sim), tau);
}

void SMParams::validate() const {
  if (!(tau >= 0.0 && tau <= 1.0)) throw ValidationError("sm: tau must lie in [0, 1]");
}

std::vector<double> sm_window(FrameIndex z, std::size_t observed, FrameIndex source,
                              std::size_t h, const SimilaritySource& sim) {
  if (observed > sim.query_count() || z >= observed) {
    throw ValidationError("sm: observation outside the observed range");
  }
  std::vector<double> out;
  out.reserve(2 * h + 1);
  const auto hh = static_cast<std::ptrdiff_t>(h);
  for (std::ptrdiff_t k = -hh; k <= hh; ++k) {
    const std::ptrdiff_t qi = static_cast<std::ptrdiff_t>(z) + k;
    const std::ptrdiff_t ri = static_cast<std::ptrdiff_t>(source) + k;
    if (qi < 0 || ri < 0) continue;
    if (static_cast<std::size_t>(qi) >= observed) continue;
    if (static_cast<std::size_t>(ri) >= sim.ref_count()) continue;
    out.push_back(sim(static_cast<FrameIndex>(qi), static_cast<FrameIndex>(ri)));
  }
  if (out.empty()) throw ValidationError("sm: window underflow");
  return out;
}

double aggregate(std::vector<double> window, Aggregation f) {
  if (window.empty()) throw ValidationError("sm: window underflow");
  if (f == Aggregation::All) return *std::min_element(window.begin(), window.end());
  return median_of(std::move(window));
}

Proposal sm_propose(FrameIndex z, std::size_t observed, const TopoMap& g, const SMParams& params,
                    const SimilaritySource& sim, std::optional<NodeId> exclude) {
  check_rows(z, g, sim);
  Proposal best;
  for (const TopoNode& node : g.nodes()) {
    if (exclude && node.id == *exclude) continue;
    const double s =
        aggregate(sm_window(z, observed, node.source_frame, params.h, sim), params.aggregation);
    if (!best.node || s > best.score) best = Proposal{node.id, s};
  }
  return best;
}

LocalizerDecision sm_decide(FrameIndex z, std::size_t observed, const TopoMap& g,
                            const SMParams& params, const SimilaritySource& sim) {
  params.validate();
  return decide(sm_propose(z, observed, g, params, sim), params.tau);
}

double Likelihood::operator()(double similarity) const {
  const double v = kind == Kind::Identity ? similarity : std::exp(lambda * similarity);
  return std::max(v, floor);
}

void PBUParams::validate() const {
  if (!(trans_far > 0.0 && trans_near > trans_far)) {
    throw ValidationError("pbu: need trans_near > trans_far > 0");
  }
  if (!(likelihood.floor > 0.0)) throw ValidationError("pbu: likelihood floor must be positive");
  if (likelihood.kind == Likelihood::Kind::Exponential && !std::isfinite(likelihood.lambda)) {
    throw ValidationError("pbu: lambda must be finite");
  }
  if (init != "uniform") throw ValidationError("pbu: unsupported init mode '" + init + "'");
  if (!(new_node_mass > 0.0)) throw ValidationError("pbu: new_node_mass must be positive");
  if (!(tau >= 0.0 && tau <= 1.0)) throw ValidationError("pbu: tau must lie in [0, 1]");
}

PBUTransition::PBUTransition(const TopoMap& g, const PBUParams& params)
    : n_(g.node_count()), t_(n_ * n_, params.trans_far) {
  const HopTable hops(g);
  for (NodeId u = 0; u < n_; ++u) {
    double row = 0.0;
    for (NodeId v = 0; v < n_; ++v) {
      const auto h = hops(u, v);
      const bool near = !params.w_u || (h && *h <= *params.w_u);
      t_[u * n_ + v] = near ? params.trans_near : params.trans_far;
      row += t_[u * n_ + v];
    }
    for (NodeId v = 0; v < n_; ++v) t_[u * n_ + v] /= row;
  }
}

std::vector<double> PBUTransition::predict(std::span<const double> belief) const {
  if (belief.size() != n_) throw ValidationError("pbu: belief size does not match the map");
  std::vector<double> out(n_, 0.0);
  for (NodeId u = 0; u < n_; ++u) {
    const double b = belief[u];
    if (b == 0.0) continue;
    const double* row = &t_[u * n_];
    for (NodeId v = 0; v < n_; ++v) out[v] += row[v] * b;
  }
  return out;
}

std::vector<double> uniform_belief(std::size_t nodes) {
  if (nodes == 0) throw ValidationError("pbu: empty map");
  return std::vector<double>(nodes, 1.0 / static_cast<double>(nodes));
}

PBUStep pbu_step(std::span<const double> belief, FrameIndex z, const TopoMap& g,
                 const PBUParams& params, const SimilaritySource& sim,
                 const PBUTransition* transition) {
  check_rows(z, g, sim);
  const std::size_t n = g.node_count();
  if (belief.size() > n) throw ValidationError("pbu: belief covers nodes missing from the map");
  const double mass = std::accumulate(belief.begin(), belief.end(), 0.0);
  if (std::abs(mass - 1.0) > 1e-9) throw ValidationError("pbu: prior is not normalized");

  std::vector<double> prior(belief.begin(), belief.end());
  if (prior.size() < n) {
    prior.resize(n, params.new_node_mass);
    const double total = std::accumulate(prior.begin(), prior.end(), 0.0);
    for (double& p : prior) p /= total;
  }

  std::optional<PBUTransition> local;
  if (!transition || transition->size() != n) {
    local.emplace(g, params);
    transition = &*local;
  }
  std::vector<double> post = transition->predict(prior);
  double total = 0.0;
  for (const TopoNode& node : g.nodes()) {
    post[node.id] *= params.likelihood(sim(z, node.source_frame));
    total += post[node.id];
  }
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw DataError("pbu: posterior underflow, likelihood is degenerate");
  }
  Proposal best;
  for (NodeId v = 0; v < n; ++v) {
    post[v] /= total;
    if (!best.node || post[v] > best.score) best = Proposal{v, post[v]};
  }
  PBUStep out{std::move(post), best, decide(best, params.tau)};
  return out;
}

void LocalizerParams::validate() const {
  sm.validate();
  pbu.validate();
}

PreparedCase prepare_case(const TestCase& tc) {
  if (!tc.map || !tc.test || tc.map->empty() || tc.test->empty()) {
    throw DataError("case " + tc.id + ": missing map or test sequence");
  }
  const Sequence& map = *tc.map;
  double gap = 0.0;
  bool first = true;
  for (FrameIndex i = 0; i < map.size(); ++i) {
    if (!map[i].traversal_dist) {
      throw DataError("case " + tc.id + ": map frames need traversal distance to build the graph");
    }
    if (i > 0) {
      const double step = *map[i].traversal_dist - *map[i - 1].traversal_dist;
      if (step > 0.0 && (first || step < gap)) {
        gap = step;
        first = false;
      }
    }
  }
  PreparedCase pc;
  pc.source = &tc;
  if (first) {
    pc.map.add_node(0);
  } else {
    // Every frame that advances becomes a node, chained by the policy.
    const TraversalRouteMetric metric;
    OracleDecisionSource oracle(metric, 0.5 * gap);
    UpdatePolicyParams policy;
    policy.spatial_threshold = gap;
    pc.map = grow_map(map, oracle, policy, metric).map;
  }
  if (tc.similarity) {
    if (tc.similarity->query_count() != tc.test->size() ||
        tc.similarity->ref_count() != map.size()) {
      throw DataError("case " + tc.id + ": similarity matrix shape mismatch");
    }
    pc.sim = tc.similarity;
  } else {
    pc.sim = std::make_shared<SimilarityMatrix>(SimilarityMatrix::from_descriptors(*tc.test, map));
  }
  return pc;
}

Proposal propose_on_case(PreparedCase& pc, Method method, const LocalizerParams& params) {
  const FrameIndex last = pc.source->final_frame();
  const std::size_t observed = last + 1;
  switch (method) {
    case Method::GM:
      return gm_propose(last, pc.map, *pc.sim);
    case Method::SMMed: {
      SMParams p = params.sm;
      p.aggregation = Aggregation::Median;
      return sm_propose(last, observed, pc.map, p, *pc.sim);
    }
    case Method::SMAll: {
      SMParams p = params.sm;
      p.aggregation = Aggregation::All;
      return sm_propose(last, observed, pc.map, p, *pc.sim);
    }
    case Method::PBU: {
      if (!pc.transition) pc.transition = std::make_shared<PBUTransition>(pc.map, params.pbu);
      std::vector<double> belief = uniform_belief(pc.map.node_count());
      Proposal p;
      for (FrameIndex z = 0; z <= last; ++z) {
        PBUStep step = pbu_step(belief, z, pc.map, params.pbu, *pc.sim, pc.transition.get());
        belief = std::move(step.posterior);
        p = step.proposal;
      }
      return p;
    }
  }
  throw ValidationError("unknown method");
}

LocalizerDecision run_localizer_on_case(PreparedCase& pc, Method method,
                                        const LocalizerParams& params, double tau) {
  return decide(propose_on_case(pc, method, params), tau);
}

LocalizerDecisionSource::LocalizerDecisionSource(Method method, LocalizerParams params, double tau,
                                                 std::size_t candidate_count)
    : method_(method), params_(std::move(params)), tau_(tau), candidate_count_(candidate_count) {
  params_.validate();
}

SourcedDecision LocalizerDecisionSource::decide(const PolicyState& state, const Sequence& frames,
                                                FrameIndex frame) {
  const DescriptorSimilarity sim(frames, frames);
  const TopoMap& g = state.map;
  std::vector<std::pair<double, NodeId>> scored;
  Proposal best;
  auto consider = [&](NodeId id, double s) {
    if (id == state.current) return;
    scored.emplace_back(s, id);
    if (!best.node || s > best.score) best = Proposal{id, s};
  };

  if (method_ == Method::PBU) {
    std::vector<double> prior = belief_.empty() ? uniform_belief(g.node_count()) : belief_;
    PBUStep step = pbu_step(prior, frame, g, params_.pbu, sim);
    belief_ = step.posterior;
    for (NodeId v = 0; v < g.node_count(); ++v) consider(v, belief_[v]);
  } else {
    SMParams sm = params_.sm;
    sm.aggregation = method_ == Method::SMAll ? Aggregation::All : Aggregation::Median;
    for (const TopoNode& node : g.nodes()) {
      double s = 0.0;
      if (method_ == Method::GM) {
        s = sim(frame, node.source_frame);
      } else {
        s = aggregate(sm_window(frame, frame + 1, node.source_frame, sm.h, sim),
                      sm.aggregation);
      }
      consider(node.id, s);
    }
  }

  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  SourcedDecision out;
  for (std::size_t i = 0; i < scored.size() && i < candidate_count_; ++i) {
    out.candidates.push_back(scored[i].second);
  }
  out.decision = topobench::decide(best, tau_);
  return out;
}

}  // namespace topobench
