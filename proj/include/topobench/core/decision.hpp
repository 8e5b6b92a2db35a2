#pragma once

#include <optional>
#include <string>

#include "topobench/core/graph.hpp"

namespace topobench {

struct LocalizerDecision {
  enum class Kind { Accept, Abstain };

  Kind kind = Kind::Abstain;
  NodeId node = 0;  // meaningful only for Accept
  // Similarity or posterior value that backed the decision.
  double score = 0.0;

  static LocalizerDecision accept(NodeId node, double score) {
    return {Kind::Accept, node, score};
  }
  static LocalizerDecision abstain(double score = 0.0) { return {Kind::Abstain, 0, score}; }

  bool accepted() const { return kind == Kind::Accept; }
  std::optional<NodeId> accepted_node() const {
    return accepted() ? std::optional<NodeId>(node) : std::nullopt;
  }
  bool operator==(const LocalizerDecision&) const = default;
};

std::string describe(const LocalizerDecision& decision);

}  // namespace topobench
