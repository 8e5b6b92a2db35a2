#pragma once

#include <optional>

#include "topobench/core/graph.hpp"
#include "topobench/core/types.hpp"

namespace topobench {

// Route (geodesic) distance between the ground-truth locations of two frames.
class RouteMetric {
 public:
  virtual ~RouteMetric() = default;
  // nullopt when this estimator cannot answer for the pair.
  virtual std::optional<double> between(const Frame& a, const Frame& b) const = 0;
};

// Odometry estimate: |traversal(a) - traversal(b)| for frames of one sequence.
class TraversalRouteMetric final : public RouteMetric {
 public:
  std::optional<double> between(const Frame& a, const Frame& b) const override;
};

// Throws UnavailableDistance when traversal data is missing or the frames
// come from different sequences (align them with a correspondence first).
double route_distance(const Frame& a, const Frame& b, bool same_sequence);

std::optional<double> node_route_distance(const TopoMap& g, const Sequence& frames,
                                          const RouteMetric& metric, NodeId u, NodeId v);

}  // namespace topobench
