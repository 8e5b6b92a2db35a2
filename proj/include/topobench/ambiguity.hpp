#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "topobench/core/route.hpp"
#include "topobench/core/similarity.hpp"
#include "topobench/core/types.hpp"

namespace topobench {

// Ground-truth alignment of test frames to map frames.
struct Correspondence {
  // pi[i]: index of the map frame matching test frame i, nullopt when novel.
  std::vector<std::optional<FrameIndex>> pi;
  double align_radius = 0.5;

  // True when every frame in [begin, end) is novel.
  bool novel_over(std::size_t begin, std::size_t end) const;
};

// Nearest map frame within align_radius for each test frame (ties go to the
// lower map index); novel otherwise.
Correspondence build_correspondence(const Sequence& test, const Sequence& map,
                                    double align_radius);

struct AmbiguityParams {
  double tau = 0.7;    // A.O. similarity threshold, unit similarity scale
  double alpha = 0.9;  // A+P distractor ratio threshold
  std::size_t seq_len = 5;
  // Distractor windows overlapping the true window by more than this
  // fraction of seq_len are not distractors.
  double exclusion_fraction = 0.25;

  void validate() const;
};

enum class CaseKind { APlusP, POnly, AOnly, NovelClean };

// Serialized names: A_PLUS_P, P_ONLY, A_ONLY, NOVEL_CLEAN.
std::string to_string(CaseKind kind);
CaseKind parse_case_kind(const std::string& text);
// Short names used in tables: A+P, P.O., A.O., novel.
std::string short_name(CaseKind kind);
bool is_revisit(CaseKind kind);

struct CaseLabel {
  CaseKind kind = CaseKind::NovelClean;
  std::optional<FrameIndex> true_start;
  std::optional<double> true_similarity;
  // Best distractor for revisits, best window overall for novel cases.
  FrameIndex best_start = 0;
  double best_similarity = 0.0;
  std::optional<double> ratio;
};

// Mean of the `length` aligned frame similarities of test window
// [test_start, test_start + length) and map window starting at map_start.
double sequence_similarity(const SimilaritySource& sim, FrameIndex test_start,
                           FrameIndex map_start, std::size_t length);

struct WindowMatch {
  FrameIndex start = 0;
  double similarity = 0.0;
};

bool window_excluded(FrameIndex start, FrameIndex true_start, std::size_t length,
                     double exclusion_fraction);

// Highest-similarity map window (stride 1, exhaustive) outside the exclusion
// zone around true_start; every window is admissible without a true_start.
// Ties go to the lowest start. Throws ValidationError when none is admissible.
WindowMatch best_distractor(const SimilaritySource& sim, FrameIndex test_start,
                            std::size_t length, std::optional<FrameIndex> true_start,
                            double exclusion_fraction);

// Labels the final seq_len frames of `test` against `map`.
CaseLabel classify_case(const Sequence& test, const Sequence& map, const Correspondence& corr,
                        const AmbiguityParams& params, const SimilaritySource& sim);

// A mapping sequence plus a test sequence with truth and a case label.
struct TestCase {
  std::string id;
  std::string environment;
  std::shared_ptr<const Sequence> map;
  std::shared_ptr<const Sequence> test;
  Correspondence correspondence;
  CaseKind label = CaseKind::NovelClean;
  std::optional<CaseKind> intended_label;
  std::size_t seq_len = 5;
  // Authoritative route estimator over map frames.
  std::shared_ptr<const RouteMetric> route;
  // Test-by-map similarities; computed from descriptors when null.
  std::shared_ptr<const SimilaritySource> similarity;

  FrameIndex final_frame() const { return test->size() - 1; }
  std::optional<FrameIndex> final_truth() const { return correspondence.pi.at(final_frame()); }
};

}  // namespace topobench
