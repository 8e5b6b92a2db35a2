#include <cmath>

#include "doctest.h"
#include "test_support.hpp"
#include "topobench/ambiguity.hpp"
#include "topobench/core/error.hpp"

using namespace topobench;

namespace {

Sequence at_positions(const std::vector<Position>& ps) {
  Sequence s;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    Frame f;
    f.frame_id = i;
    f.timestamp = double(i);
    f.pose = ps[i];
    s.frames.push_back(f);
  }
  return s;
}

SimilarityMatrix random_matrix(Rng& rng, std::size_t r, std::size_t c) {
  std::vector<double> v(r * c);
  for (double& x : v) x = rng.uniform();
  return SimilarityMatrix(r, c, v);
}

}  // namespace

TEST_CASE("sequence similarity is the mean of aligned frame similarities") {
  Rng rng(1);
  for (int t = 0; t < 200; ++t) {
    const std::size_t rows = 3 + rng.below(10), cols = 3 + rng.below(20);
    const SimilarityMatrix m = random_matrix(rng, rows, cols);
    const std::size_t len = 1 + rng.below(3);
    const std::size_t a = rng.below(rows - len + 1), b = rng.below(cols - len + 1);
    double sum = 0.0;
    for (std::size_t k = 0; k < len; ++k) sum += m(a + k, b + k);
    REQUIRE(sequence_similarity(m, a, b, len) == doctest::Approx(sum / len).epsilon(1e-14));
  }
  const SimilarityMatrix m(2, 2, {1, 1, 1, 1});
  CHECK_THROWS_AS(sequence_similarity(m, 0, 1, 2), ValidationError);
  CHECK_THROWS_AS(sequence_similarity(m, 0, 0, 0), ValidationError);
}

TEST_CASE("exclusion zone around the true window") {
  CHECK(window_excluded(10, 10, 5, 0.25));
  CHECK(window_excluded(13, 10, 5, 0.25));  // overlap 2 > 1.25
  CHECK_FALSE(window_excluded(14, 10, 5, 0.25));
  CHECK(window_excluded(7, 10, 5, 0.25));
  CHECK_FALSE(window_excluded(6, 10, 5, 0.25));
  CHECK_FALSE(window_excluded(0, 10, 5, 0.25));
}

TEST_CASE("best distractor matches an exhaustive scan") {
  Rng rng(2);
  for (int t = 0; t < 300; ++t) {
    const std::size_t len = 1 + rng.below(6);
    const std::size_t rows = len + rng.below(4), cols = len + 10 + rng.below(30);
    const SimilarityMatrix m = random_matrix(rng, rows, cols);
    const std::size_t ts = rows - len;
    const std::size_t truth = rng.below(cols - len + 1);
    double best = -1.0;
    std::size_t arg = 0;
    for (std::size_t u = 0; u + len <= cols; ++u) {
      const long gap = std::labs(long(u) - long(truth));
      const long overlap = std::max(0L, long(len) - gap);
      if (double(overlap) > 0.25 * len) continue;
      double s = 0.0;
      for (std::size_t k = 0; k < len; ++k) s += m(ts + k, u + k);
      s /= len;
      if (s > best) {
        best = s;
        arg = u;
      }
    }
    if (best < 0.0) {
      CHECK_THROWS_AS(best_distractor(m, ts, len, truth, 0.25), ValidationError);
      continue;
    }
    const WindowMatch w = best_distractor(m, ts, len, truth, 0.25);
    REQUIRE(w.start == arg);
    REQUIRE(w.similarity == doctest::Approx(best).epsilon(1e-14));
  }
}

TEST_CASE("orthogonal map gives a distractor similarity of one half") {
  // Test frames all equal e0, map frames orthogonal except the true window.
  const std::size_t len = 4, cols = 30;
  std::vector<double> v(len * cols, 0.5);
  for (std::size_t k = 0; k < len; ++k) v[k * cols + 10 + k] = 1.0;
  const SimilarityMatrix m(len, cols, v);
  const WindowMatch w = best_distractor(m, 0, len, 10, 0.25);
  CHECK(w.similarity == doctest::Approx(0.5));
}

TEST_CASE("correspondence matches a brute-force nearest scan") {
  Rng rng(3);
  for (int t = 0; t < 100; ++t) {
    std::vector<Position> mp, tp;
    for (std::size_t i = 0; i < 60; ++i) mp.push_back({rng.uniform(0, 20), rng.uniform(0, 20), 0});
    for (std::size_t i = 0; i < 40; ++i) tp.push_back({rng.uniform(0, 20), rng.uniform(0, 20), 0});
    if (t % 3 == 0) tp[5] = mp[7];
    const Sequence map = at_positions(mp), test = at_positions(tp);
    const double radius = rng.uniform(0.3, 2.0);
    const Correspondence c = build_correspondence(test, map, radius);
    for (std::size_t i = 0; i < tp.size(); ++i) {
      std::optional<std::size_t> want;
      double best = 1e300;
      for (std::size_t j = 0; j < mp.size(); ++j) {
        const double d = euclidean(tp[i], mp[j]);
        if (d <= radius && d < best) {
          best = d;
          want = j;
        }
      }
      REQUIRE(c.pi[i] == want);
    }
  }
  CHECK_THROWS_AS(build_correspondence(Sequence{}, Sequence{}, 0.0), ValidationError);
}

TEST_CASE("classification categories") {
  // Map: 20 frames on a line; test: 5 frames retracing map frames 10..14.
  std::vector<Position> mp, tp;
  for (int i = 0; i < 20; ++i) mp.push_back({double(i), 0, 0});
  for (int i = 0; i < 5; ++i) tp.push_back({double(10 + i), 0, 0});
  const Sequence map = at_positions(mp), test = at_positions(tp);
  const Correspondence corr = build_correspondence(test, map, 0.5);
  AmbiguityParams params;
  params.alpha = 0.9;
  params.tau = 0.7;
  params.seq_len = 5;

  auto matrix = [&](double true_sim, double twin_sim) {
    std::vector<double> v(5 * 20, 0.3);
    for (int k = 0; k < 5; ++k) {
      v[k * 20 + 10 + k] = true_sim;
      v[k * 20 + 2 + k] = twin_sim;
    }
    return SimilarityMatrix(5, 20, v);
  };

  const CaseLabel po = classify_case(test, map, corr, params, matrix(0.9, 0.5));
  CHECK(po.kind == CaseKind::POnly);
  CHECK(po.true_start == FrameIndex{10});
  CHECK(*po.ratio == doctest::Approx(0.5 / 0.9));

  const CaseLabel ap = classify_case(test, map, corr, params, matrix(0.9, 0.85));
  CHECK(ap.kind == CaseKind::APlusP);
  CHECK(ap.best_start == 2);

  params.alpha = 1.0;
  CHECK(classify_case(test, map, corr, params, matrix(0.9, 0.89)).kind == CaseKind::POnly);
  CHECK(classify_case(test, map, corr, params, matrix(0.9, 0.9)).kind == CaseKind::APlusP);
  params.alpha = 0.9;

  CHECK_THROWS_AS(classify_case(test, map, corr, params, matrix(0.0, 0.5)), ValidationError);

  // Novel: the same test frames displaced off the map.
  std::vector<Position> np;
  for (int i = 0; i < 5; ++i) np.push_back({double(10 + i), 5, 0});
  const Sequence novel = at_positions(np);
  const Correspondence none = build_correspondence(novel, map, 0.5);
  CHECK(none.novel_over(0, 5));
  const CaseLabel ao = classify_case(novel, map, none, params, matrix(0.3, 0.8));
  CHECK(ao.kind == CaseKind::AOnly);
  CHECK(ao.best_start == 2);
  CHECK_FALSE(ao.ratio.has_value());
  CHECK(classify_case(novel, map, none, params, matrix(0.3, 0.6)).kind == CaseKind::NovelClean);
}

TEST_CASE("true window is anchored at the first aligned frame") {
  std::vector<Position> mp, tp;
  for (int i = 0; i < 20; ++i) mp.push_back({double(i), 0, 0});
  tp = {{3, 9, 0}, {4, 9, 0}, {12, 0, 0}, {13, 0, 0}, {14, 0, 0}};
  const Sequence map = at_positions(mp), test = at_positions(tp);
  const Correspondence corr = build_correspondence(test, map, 0.5);
  std::vector<double> v(5 * 20, 0.6);
  const CaseLabel l = classify_case(test, map, corr, AmbiguityParams{}, SimilarityMatrix(5, 20, v));
  CHECK(l.true_start == FrameIndex{10});
}

TEST_CASE("label names round-trip") {
  for (CaseKind k : {CaseKind::APlusP, CaseKind::POnly, CaseKind::AOnly, CaseKind::NovelClean}) {
    CHECK(parse_case_kind(to_string(k)) == k);
  }
  CHECK(short_name(CaseKind::APlusP) == "A+P");
  CHECK_THROWS_AS(parse_case_kind("X"), DataError);
  AmbiguityParams bad;
  bad.alpha = 0.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}
