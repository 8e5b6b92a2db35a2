#include "topobench/core/types.hpp"

#include <cmath>
#include <sstream>

#include "topobench/core/error.hpp"

namespace topobench {

double euclidean(const Position& a, const Position& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

std::string to_string(SequenceRole role) { return role == SequenceRole::Map ? "map" : "test"; }

SequenceRole parse_sequence_role(const std::string& text) {
  if (text == "map") return SequenceRole::Map;
  if (text == "test") return SequenceRole::Test;
  throw DataError("unknown sequence role '" + text + "'");
}

std::size_t Sequence::descriptor_dim() const {
  return frames.empty() ? 0 : frames.front().descriptor.size();
}

bool Sequence::has_descriptors() const { return descriptor_dim() > 0; }

void Sequence::validate(double norm_tolerance) const {
  const std::size_t dim = descriptor_dim();
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const Frame& f = frames[i];
    auto fail = [&](const std::string& what) {
      std::ostringstream msg;
      msg << to_string(role) << " sequence frame " << i << ": " << what;
      throw DataError(msg.str());
    };
    if (f.frame_id != i) fail("frame_id is not consecutive from 0");
    if (i > 0) {
      const Frame& prev = frames[i - 1];
      if (!(f.timestamp > prev.timestamp)) fail("timestamp does not strictly increase");
      if (f.traversal_dist && prev.traversal_dist && *f.traversal_dist < *prev.traversal_dist) {
        fail("traversal_dist decreases");
      }
    }
    if (f.descriptor.size() != dim) fail("descriptor dimension differs from frame 0");
    if (dim > 0) {
      double norm2 = 0.0;
      for (float v : f.descriptor) norm2 += static_cast<double>(v) * v;
      if (std::abs(std::sqrt(norm2) - 1.0) > norm_tolerance) fail("descriptor is not unit norm");
    }
  }
}

void EvalScale::validate() const {
  if (!(d > 0.0)) throw ValidationError("scale: d must be positive");
  if (!(epsilon > 0.0 && epsilon <= 1.0)) {
    throw ValidationError("scale: epsilon must lie in (0, 1]");
  }
}

}  // namespace topobench
