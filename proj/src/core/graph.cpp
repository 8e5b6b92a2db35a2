#include "topobench/core/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "topobench/core/error.hpp"

namespace topobench {

NodeId TopoMap::add_node(FrameIndex source_frame) {
  const NodeId id = nodes_.size();
  nodes_.push_back({id, source_frame});
  adjacency_.emplace_back();
  return id;
}

bool TopoMap::add_edge(NodeId a, NodeId b, double route_length) {
  if (!contains(a) || !contains(b)) {
    throw ValidationError("edge endpoint is not a node of the map");
  }
  if (a == b) return false;
  const NodePair key = NodePair::of(a, b);
  if (!edge_set_.emplace(key.u, key.v).second) return false;
  edges_.push_back({key.u, key.v, route_length});
  adjacency_[a].push_back(b);
  adjacency_[b].push_back(a);
  return true;
}

bool TopoMap::has_edge(NodeId a, NodeId b) const {
  const NodePair key = NodePair::of(a, b);
  return edge_set_.contains({key.u, key.v});
}

bool TopoMap::operator==(const TopoMap& other) const {
  if (nodes_.size() != other.nodes_.size() || edge_set_ != other.edge_set_) return false;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].source_frame != other.nodes_[i].source_frame) return false;
  }
  return true;
}

std::optional<std::size_t> hop_distance(const TopoMap& g, NodeId u, NodeId v) {
  if (!g.contains(u) || !g.contains(v)) {
    throw ValidationError("hop_distance: node is not in the map");
  }
  if (u == v) return 0;
  std::vector<std::size_t> dist(g.node_count(), SIZE_MAX);
  std::deque<NodeId> queue{u};
  dist[u] = 0;
  while (!queue.empty()) {
    const NodeId x = queue.front();
    queue.pop_front();
    for (NodeId y : g.neighbors(x)) {
      if (dist[y] != SIZE_MAX) continue;
      dist[y] = dist[x] + 1;
      if (y == v) return dist[y];
      queue.push_back(y);
    }
  }
  return std::nullopt;
}

std::vector<HopReach> nodes_within(const TopoMap& g, NodeId source, std::size_t max_hops) {
  std::vector<HopReach> reached;
  std::vector<bool> seen(g.node_count(), false);
  reached.push_back({source, 0});
  seen[source] = true;
  for (std::size_t head = 0; head < reached.size(); ++head) {
    const HopReach at = reached[head];
    if (at.hops == max_hops) continue;
    for (NodeId y : g.neighbors(at.node)) {
      if (seen[y]) continue;
      seen[y] = true;
      reached.push_back({y, at.hops + 1});
    }
  }
  return reached;
}

HopTable::HopTable(const TopoMap& g) : size_(g.node_count()), hops_(size_ * size_, kUnreachable) {
  std::vector<NodeId> queue;
  queue.reserve(size_);
  for (NodeId s = 0; s < size_; ++s) {
    std::uint32_t* row = hops_.data() + s * size_;
    queue.clear();
    queue.push_back(s);
    row[s] = 0;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const NodeId x = queue[head];
      for (NodeId y : g.neighbors(x)) {
        if (row[y] != kUnreachable) continue;
        row[y] = row[x] + 1;
        queue.push_back(y);
      }
    }
  }
}

std::optional<std::size_t> HopTable::operator()(NodeId u, NodeId v) const {
  const std::uint32_t h = hops_.at(u * size_ + v);
  if (h == kUnreachable) return std::nullopt;
  return h;
}

double median_of(std::vector<double> values) {
  if (values.empty()) {
    throw ValidationError("median of an empty set");
  }
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + mid);
  return 0.5 * (lower + upper);
}

double median_edge_length(const TopoMap& g) {
  if (g.edge_count() == 0) {
    throw ValidationError("median_edge_length: map has no edges");
  }
  std::vector<double> lengths;
  lengths.reserve(g.edge_count());
  for (const TopoEdge& e : g.edges()) lengths.push_back(e.route_length);
  return median_of(std::move(lengths));
}

std::size_t hop_threshold(const EvalScale& scale, double mu_e) {
  scale.validate();
  if (!(mu_e > 0.0)) {
    throw ValidationError("hop_threshold: mu_e must be positive");
  }
  // The slack absorbs products such as (1/3) * 9 landing just under 3.
  const double ratio = scale.epsilon * scale.d / mu_e;
  const double n = std::floor(ratio + 1e-9);
  return n < 1.0 ? 1 : static_cast<std::size_t>(n);
}

}  // namespace topobench
