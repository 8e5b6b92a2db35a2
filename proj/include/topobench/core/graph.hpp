#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "topobench/core/types.hpp"

namespace topobench {

using NodeId = std::size_t;

struct TopoNode {
  NodeId id = 0;
  // Index of the creating frame in the sequence the map was grown from.
  FrameIndex source_frame = 0;
};

struct TopoEdge {
  NodeId u = 0;  // always u < v
  NodeId v = 0;
  double route_length = 0.0;
};

// Unordered node pair stored with u < v.
struct NodePair {
  NodeId u = 0;
  NodeId v = 0;

  static NodePair of(NodeId a, NodeId b) { return a < b ? NodePair{a, b} : NodePair{b, a}; }
  auto operator<=>(const NodePair&) const = default;
};

// Undirected place graph. Node ids are dense indices in creation order.
class TopoMap {
 public:
  NodeId add_node(FrameIndex source_frame);
  // Returns false (and leaves the map unchanged) for self loops and
  // existing edges.
  bool add_edge(NodeId a, NodeId b, double route_length);

  bool contains(NodeId id) const { return id < nodes_.size(); }
  bool has_edge(NodeId a, NodeId b) const;
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  const TopoNode& node(NodeId id) const { return nodes_.at(id); }
  const std::vector<TopoNode>& nodes() const { return nodes_; }
  const std::vector<TopoEdge>& edges() const { return edges_; }
  std::span<const NodeId> neighbors(NodeId id) const { return adjacency_.at(id); }

  bool operator==(const TopoMap& other) const;

 private:
  std::vector<TopoNode> nodes_;
  std::vector<TopoEdge> edges_;
  std::vector<std::vector<NodeId>> adjacency_;
  std::set<std::pair<NodeId, NodeId>> edge_set_;
};

// Shortest-path length in edges; nullopt when the pair is disconnected.
std::optional<std::size_t> hop_distance(const TopoMap& g, NodeId u, NodeId v);

struct HopReach {
  NodeId node;
  std::size_t hops;
};

// Every node within max_hops of source (including source at 0), in BFS order.
std::vector<HopReach> nodes_within(const TopoMap& g, NodeId source, std::size_t max_hops);

// All-pairs hop distances by one BFS per node.
class HopTable {
 public:
  HopTable() = default;
  explicit HopTable(const TopoMap& g);

  std::optional<std::size_t> operator()(NodeId u, NodeId v) const;
  std::size_t size() const { return size_; }

 private:
  static constexpr std::uint32_t kUnreachable = UINT32_MAX;
  std::size_t size_ = 0;
  std::vector<std::uint32_t> hops_;
};

// Median edge route length; the mean of the two middle values for an even
// edge count. Throws ValidationError on an empty edge set.
double median_edge_length(const TopoMap& g);
double median_of(std::vector<double> values);

// n = max(1, floor(epsilon * d / mu_e)).
std::size_t hop_threshold(const EvalScale& scale, double mu_e);

}  // namespace topobench
