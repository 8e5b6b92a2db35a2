#include "topobench/core/route.hpp"

#include <cmath>

#include "topobench/core/error.hpp"

namespace topobench {

std::optional<double> TraversalRouteMetric::between(const Frame& a, const Frame& b) const {
  if (!a.traversal_dist || !b.traversal_dist) return std::nullopt;
  return std::abs(*a.traversal_dist - *b.traversal_dist);
}

double route_distance(const Frame& a, const Frame& b, bool same_sequence) {
  if (!same_sequence) {
    throw UnavailableDistance(
        "route distance across sequences needs a ground-truth alignment first");
  }
  if (!a.traversal_dist || !b.traversal_dist) {
    throw UnavailableDistance("frame lacks traversal distance");
  }
  return std::abs(*a.traversal_dist - *b.traversal_dist);
}

std::optional<double> node_route_distance(const TopoMap& g, const Sequence& frames,
                                          const RouteMetric& metric, NodeId u, NodeId v) {
  return metric.between(frames[g.node(u).source_frame], frames[g.node(v).source_frame]);
}

}  // namespace topobench
