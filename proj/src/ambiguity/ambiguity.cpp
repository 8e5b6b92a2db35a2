#include "topobench/ambiguity.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "topobench/core/error.hpp"

namespace topobench {

bool Correspondence::novel_over(std::size_t begin, std::size_t end) const {
  for (std::size_t i = begin; i < end; ++i) {
    if (pi.at(i)) return false;
  }
  return true;
}

namespace {

struct CellKey {
  std::int64_t x, y, z;
  bool operator==(const CellKey&) const = default;
};

struct CellHash {
  std::size_t operator()(const CellKey& k) const {
    std::uint64_t h = static_cast<std::uint64_t>(k.x) * 0x9E3779B97F4A7C15ULL;
    h ^= static_cast<std::uint64_t>(k.y) * 0xC2B2AE3D27D4EB4FULL + (h << 6) + (h >> 2);
    h ^= static_cast<std::uint64_t>(k.z) * 0x165667B19E3779F9ULL + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

CellKey cell_of(const Position& p, double cell) {
  return {static_cast<std::int64_t>(std::floor(p.x / cell)),
          static_cast<std::int64_t>(std::floor(p.y / cell)),
          static_cast<std::int64_t>(std::floor(p.z / cell))};
}

}  // namespace

Correspondence build_correspondence(const Sequence& test, const Sequence& map,
                                    double align_radius) {
  if (!(align_radius > 0.0)) throw ValidationError("align_radius must be positive");
  std::unordered_map<CellKey, std::vector<FrameIndex>, CellHash> grid;
  for (FrameIndex j = 0; j < map.size(); ++j) {
    grid[cell_of(map[j].pose, align_radius)].push_back(j);
  }
  Correspondence corr;
  corr.align_radius = align_radius;
  corr.pi.resize(test.size());
  for (FrameIndex i = 0; i < test.size(); ++i) {
    const Position& p = test[i].pose;
    const CellKey c = cell_of(p, align_radius);
    double best = std::numeric_limits<double>::infinity();
    std::optional<FrameIndex> match;
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        for (std::int64_t dz = -1; dz <= 1; ++dz) {
          auto it = grid.find({c.x + dx, c.y + dy, c.z + dz});
          if (it == grid.end()) continue;
          for (FrameIndex j : it->second) {
            const double dist = euclidean(p, map[j].pose);
            if (dist > align_radius) continue;
            if (dist < best || (dist == best && match && j < *match)) {
              best = dist;
              match = j;
            }
          }
        }
      }
    }
    corr.pi[i] = match;
  }
  return corr;
}

void AmbiguityParams::validate() const {
  if (!(tau >= 0.0 && tau <= 1.0)) throw ValidationError("ambiguity: tau must lie in [0, 1]");
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw ValidationError("ambiguity: alpha must lie in (0, 1]");
  }
  if (seq_len == 0) throw ValidationError("ambiguity: seq_len must be positive");
  if (!(exclusion_fraction >= 0.0 && exclusion_fraction < 1.0)) {
    throw ValidationError("ambiguity: exclusion_fraction must lie in [0, 1)");
  }
}

std::string to_string(CaseKind kind) {
  switch (kind) {
    case CaseKind::APlusP:
      return "A_PLUS_P";
    case CaseKind::POnly:
      return "P_ONLY";
    case CaseKind::AOnly:
      return "A_ONLY";
    case CaseKind::NovelClean:
      return "NOVEL_CLEAN";
  }
  return "NOVEL_CLEAN";
}

CaseKind parse_case_kind(const std::string& text) {
  if (text == "A_PLUS_P") return CaseKind::APlusP;
  if (text == "P_ONLY") return CaseKind::POnly;
  if (text == "A_ONLY") return CaseKind::AOnly;
  if (text == "NOVEL_CLEAN") return CaseKind::NovelClean;
  throw DataError("unknown case label '" + text + "'");
}

std::string short_name(CaseKind kind) {
  switch (kind) {
    case CaseKind::APlusP:
      return "A+P";
    case CaseKind::POnly:
      return "P.O.";
    case CaseKind::AOnly:
      return "A.O.";
    case CaseKind::NovelClean:
      return "novel";
  }
  return "novel";
}

bool is_revisit(CaseKind kind) { return kind == CaseKind::APlusP || kind == CaseKind::POnly; }

double sequence_similarity(const SimilaritySource& sim, FrameIndex test_start,
                           FrameIndex map_start, std::size_t length) {
  if (length == 0) throw ValidationError("sequence_similarity: empty window");
  if (test_start + length > sim.query_count() || map_start + length > sim.ref_count()) {
    throw ValidationError("sequence_similarity: window length mismatch with sequences");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < length; ++k) total += sim(test_start + k, map_start + k);
  return total / static_cast<double>(length);
}

bool window_excluded(FrameIndex start, FrameIndex true_start, std::size_t length,
                     double exclusion_fraction) {
  const std::size_t gap = start > true_start ? start - true_start : true_start - start;
  const std::size_t overlap = gap >= length ? 0 : length - gap;
  return static_cast<double>(overlap) > exclusion_fraction * static_cast<double>(length);
}

WindowMatch best_distractor(const SimilaritySource& sim, FrameIndex test_start,
                            std::size_t length, std::optional<FrameIndex> true_start,
                            double exclusion_fraction) {
  if (sim.ref_count() < length) {
    throw ValidationError("best_distractor: map is shorter than the window");
  }
  std::optional<WindowMatch> best;
  for (FrameIndex u = 0; u + length <= sim.ref_count(); ++u) {
    if (true_start && window_excluded(u, *true_start, length, exclusion_fraction)) continue;
    const double s = sequence_similarity(sim, test_start, u, length);
    if (!best || s > best->similarity) best = WindowMatch{u, s};
  }
  if (!best) throw ValidationError("best_distractor: no admissible distractor window");
  return *best;
}

CaseLabel classify_case(const Sequence& test, const Sequence& map, const Correspondence& corr,
                        const AmbiguityParams& params, const SimilaritySource& sim) {
  params.validate();
  const std::size_t length = params.seq_len;
  if (test.size() < length) throw ValidationError("classify_case: test shorter than seq_len");
  if (map.size() < length) throw ValidationError("classify_case: map shorter than seq_len");
  if (corr.pi.size() != test.size()) {
    throw ValidationError("classify_case: correspondence does not cover the test sequence");
  }
  if (sim.query_count() != test.size() || sim.ref_count() != map.size()) {
    throw ValidationError("classify_case: similarity source shape mismatch");
  }
  const FrameIndex test_start = test.size() - length;

  CaseLabel label;
  std::optional<FrameIndex> true_start;
  for (std::size_t k = 0; k < length; ++k) {
    if (const auto j = corr.pi[test_start + k]) {
      const std::size_t start = *j >= k ? *j - k : 0;
      true_start = std::min(start, map.size() - length);
      break;
    }
  }

  if (!true_start) {
    const WindowMatch best = best_distractor(sim, test_start, length, std::nullopt, 0.0);
    label.best_start = best.start;
    label.best_similarity = best.similarity;
    label.kind = best.similarity >= params.tau ? CaseKind::AOnly : CaseKind::NovelClean;
    return label;
  }

  const double true_sim = sequence_similarity(sim, test_start, *true_start, length);
  if (!(true_sim > 0.0)) {
    throw ValidationError("classify_case: true-match similarity is zero, ratio undefined");
  }
  const WindowMatch best =
      best_distractor(sim, test_start, length, true_start, params.exclusion_fraction);
  label.true_start = true_start;
  label.true_similarity = true_sim;
  label.best_start = best.start;
  label.best_similarity = best.similarity;
  label.ratio = best.similarity / true_sim;
  label.kind = *label.ratio >= params.alpha ? CaseKind::APlusP : CaseKind::POnly;
  return label;
}

}  // namespace topobench
