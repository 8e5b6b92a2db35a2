#include "topobench/core/decision.hpp"

#include <sstream>

namespace topobench {

std::string describe(const LocalizerDecision& decision) {
  std::ostringstream out;
  if (decision.accepted()) {
    out << "accept(" << decision.node << ")";
  } else {
    out << "abstain";
  }
  out << " score=" << decision.score;
  return out.str();
}

}  // namespace topobench
