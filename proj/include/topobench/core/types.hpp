#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace topobench {

using FrameIndex = std::size_t;

struct Position {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  bool operator==(const Position&) const = default;
};

double euclidean(const Position& a, const Position& b);

// One timestamped observation with its ground truth.
struct Frame {
  FrameIndex frame_id = 0;
  double timestamp = 0.0;
  Position pose;
  // Cumulative odometry arc length from the sequence start, in meters.
  std::optional<double> traversal_dist;
  // Unit-norm appearance descriptor; empty when similarities come from a
  // supplied matrix instead.
  std::vector<float> descriptor;
};

enum class SequenceRole { Map, Test };

std::string to_string(SequenceRole role);
SequenceRole parse_sequence_role(const std::string& text);

struct Sequence {
  std::vector<Frame> frames;
  SequenceRole role = SequenceRole::Map;
  // 2 for planar trajectories, 3 when z is meaningful.
  int pose_dim = 2;

  std::size_t size() const { return frames.size(); }
  bool empty() const { return frames.empty(); }
  const Frame& operator[](FrameIndex i) const { return frames[i]; }
  std::size_t descriptor_dim() const;
  bool has_descriptors() const;

  // Throws DataError naming the first broken invariant: frame ids
  // consecutive from 0, timestamps strictly increasing, traversal distance
  // non-decreasing, descriptors of one dimension with unit norm.
  void validate(double norm_tolerance = 1e-6) const;
};

// Physical route-distance threshold d and tolerance factor epsilon.
struct EvalScale {
  double d = 2.0;
  double epsilon = 0.5;

  void validate() const;
};

// Slack used when comparing accumulated route lengths against d.
inline constexpr double kDistanceTolerance = 1e-9;

}  // namespace topobench
