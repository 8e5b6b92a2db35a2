#include <cmath>
#include <limits>
#include <numeric>

#include "doctest.h"
#include "test_support.hpp"
#include "topobench/baselines.hpp"
#include "topobench/core/error.hpp"

using namespace topobench;

namespace {

SimilarityMatrix random_matrix(Rng& rng, std::size_t r, std::size_t c, bool coarse = false) {
  std::vector<double> v(r * c);
  // Coarse values force frequent ties.
  for (double& x : v) x = coarse ? double(rng.below(5)) / 4.0 : rng.uniform();
  return SimilarityMatrix(r, c, v);
}

// Map whose node i was created by map frame picks[i].
TopoMap map_over(const std::vector<std::size_t>& picks) {
  TopoMap g;
  for (std::size_t f : picks) g.add_node(f);
  for (std::size_t i = 1; i < picks.size(); ++i) g.add_edge(i - 1, i, 1.0);
  return g;
}

TopoMap chain(std::size_t n) {
  std::vector<std::size_t> picks(n);
  std::iota(picks.begin(), picks.end(), 0);
  return map_over(picks);
}

}  // namespace

TEST_CASE("greedy matching examples") {
  const SimilarityMatrix one(1, 1, {0.95});
  const TopoMap g1 = chain(1);
  CHECK(gm_decide(0, g1, 0.7, one) == LocalizerDecision::accept(0, 0.95));
  const SimilarityMatrix low(1, 4, {0.2, 0.2, 0.2, 0.2});
  CHECK_FALSE(gm_decide(0, chain(4), 0.7, low).accepted());
  CHECK_THROWS_AS(gm_decide(0, TopoMap{}, 0.7, low), ValidationError);
  const SimilarityMatrix tie(1, 3, {0.8, 0.9, 0.9});
  CHECK(gm_decide(0, chain(3), 0.5, tie).node == 1);
}

TEST_CASE("greedy matching equals an exhaustive argmax") {
  Rng rng(10);
  for (int t = 0; t < 500; ++t) {
    const SimilarityMatrix m = random_matrix(rng, 3, 30, t % 2 == 0);
    const TopoMap g = chain(30);
    const double tau = rng.uniform();
    const std::size_t z = rng.below(3);
    std::size_t arg = 0;
    for (std::size_t j = 1; j < 30; ++j)
      if (m(z, j) > m(z, arg)) arg = j;
    const LocalizerDecision d = gm_decide(z, g, tau, m);
    REQUIRE(d.accepted() == (m(z, arg) >= tau));
    if (d.accepted()) REQUIRE(d.node == arg);
  }
}

TEST_CASE("sequence matching with h = 0 is greedy matching") {
  Rng rng(11);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t rows = 1 + rng.below(8), cols = 1 + rng.below(25);
    const SimilarityMatrix m = random_matrix(rng, rows, cols, t % 3 == 0);
    std::vector<std::size_t> picks;
    for (std::size_t j = 0; j < cols; ++j)
      if (rng.uniform() < 0.7 || picks.empty()) picks.push_back(j);
    const TopoMap g = map_over(picks);
    const std::size_t z = rng.below(rows);
    const double tau = double(rng.below(9)) / 8.0;
    for (Aggregation f : {Aggregation::Median, Aggregation::All}) {
      SMParams p{0, f, tau};
      REQUIRE(sm_decide(z, z + 1, g, p, m) == gm_decide(z, g, tau, m));
    }
  }
}

TEST_CASE("median and all aggregation differ on one weak frame") {
  // Observation 2 compared with node frame 2, window offsets -1..1.
  std::vector<double> v(3 * 4, 0.0);
  v[0 * 4 + 1] = 0.9;
  v[1 * 4 + 2] = 0.9;
  v[2 * 4 + 3] = 0.1;
  const SimilarityMatrix m(3, 4, v);
  const TopoMap g = map_over({2});
  const SMParams med{1, Aggregation::Median, 0.7};
  const SMParams all{1, Aggregation::All, 0.7};
  CHECK(sm_window(1, 3, 2, 1, m) == std::vector<double>{0.9, 0.9, 0.1});
  CHECK(sm_decide(1, 3, g, med, m).accepted());
  CHECK_FALSE(sm_decide(1, 3, g, all, m).accepted());
}

TEST_CASE("window truncation at the sequence ends") {
  const SimilarityMatrix m(3, 3, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  // Final observation: forward offsets are unseen.
  CHECK(sm_window(2, 3, 2, 2, m) == std::vector<double>{1, 1, 1});
  // Node created by map frame 0: negative offsets do not exist.
  CHECK(sm_window(0, 3, 0, 2, m) == std::vector<double>{1, 1, 1});
  CHECK(sm_window(0, 1, 0, 2, m) == std::vector<double>{1});
  CHECK_THROWS_AS(sm_window(3, 3, 0, 1, m), ValidationError);
}

TEST_CASE("sequence matching with an occluded frame matches enumeration") {
  Rng rng(12);
  for (int t = 0; t < 200; ++t) {
    const std::size_t rows = 8, cols = 20;
    std::vector<double> v(rows * cols);
    for (double& x : v) x = rng.uniform(0.2, 0.6);
    const std::size_t base = 2 + rng.below(14);
    for (std::size_t k = 0; k < 5; ++k) v[(3 + k) * cols + base - 2 + k] = rng.uniform(0.8, 1.0);
    v[(3 + rng.below(5)) * cols + base] = 0.05;  // occlusion somewhere in the window
    const SimilarityMatrix m(rows, cols, v);
    const TopoMap g = chain(cols);
    for (Aggregation f : {Aggregation::Median, Aggregation::All}) {
      const SMParams p{2, f, 0.7};
      double best = -1;
      std::size_t arg = 0;
      for (std::size_t j = 0; j < cols; ++j) {
        std::vector<double> w;
        for (int k = -2; k <= 2; ++k) {
          const long qi = 5 + k, ri = long(j) + k;
          if (ri < 0 || ri >= long(cols)) continue;
          w.push_back(m(qi, ri));
        }
        std::sort(w.begin(), w.end());
        const double s = f == Aggregation::All ? w.front()
                         : w.size() % 2          ? w[w.size() / 2]
                                                 : 0.5 * (w[w.size() / 2 - 1] + w[w.size() / 2]);
        if (s > best) {
          best = s;
          arg = j;
        }
      }
      const LocalizerDecision d = sm_decide(5, rows, g, p, m);
      REQUIRE(d.accepted() == (best >= 0.7));
      if (d.accepted()) REQUIRE(d.node == arg);
    }
  }
}

TEST_CASE("all-aggregation accepts are a subset of median accepts") {
  Rng rng(13);
  for (int t = 0; t < 500; ++t) {
    const SimilarityMatrix m = random_matrix(rng, 10, 15);
    const TopoMap g = chain(15);
    const std::size_t h = rng.below(4);
    const double tau = rng.uniform(0.3, 0.9);
    const std::size_t z = rng.below(10);
    const auto all = sm_decide(z, 10, g, {h, Aggregation::All, tau}, m);
    const auto med = sm_decide(z, 10, g, {h, Aggregation::Median, tau}, m);
    if (all.accepted()) REQUIRE(med.accepted());
  }
}

TEST_CASE("belief update symmetry and normalization") {
  TopoMap g = chain(6);
  g.add_edge(5, 0, 1.0);  // ring: every node sees the same motion model
  PBUParams p;
  const SimilarityMatrix flat(1, 6, std::vector<double>(6, 0.4));
  const PBUStep s = pbu_step(uniform_belief(6), 0, g, p, flat);
  for (double b : s.posterior) CHECK(b == doctest::Approx(1.0 / 6).epsilon(1e-12));

  Rng rng(14);
  const TopoMap g30 = tbtest::random_graph(rng, 30, 0.1);
  const SimilarityMatrix m = random_matrix(rng, 1000, 30);
  const PBUTransition tr(g30, p);
  std::vector<double> belief = uniform_belief(30);
  for (std::size_t z = 0; z < 1000; ++z) {
    PBUStep st = pbu_step(belief, z, g30, p, m, &tr);
    const double sum = std::accumulate(st.posterior.begin(), st.posterior.end(), 0.0);
    REQUIRE(std::abs(sum - 1.0) <= 1e-9);
    belief = std::move(st.posterior);
  }
}

TEST_CASE("unbounded motion with identity likelihood reduces to greedy argmax") {
  Rng rng(15);
  PBUParams p;
  p.w_u = std::nullopt;
  p.likelihood.kind = Likelihood::Kind::Identity;
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = 2 + rng.below(25);
    const TopoMap g = tbtest::random_graph(rng, n, 0.15);
    const SimilarityMatrix m = random_matrix(rng, 1, n, t % 2 == 0);
    const PBUStep st = pbu_step(uniform_belief(n), 0, g, p, m);
    REQUIRE(st.proposal.node == gm_propose(0, g, m).node);
  }
}

TEST_CASE("belief trace matches a dense matrix oracle") {
  const std::size_t n = 10;
  const TopoMap g = chain(n);
  PBUParams p;  // w_u = 2, near 1.0, far 0.05, exp(10 s)
  Rng rng(16);
  const SimilarityMatrix m = random_matrix(rng, 5, n);

  const auto fw = tbtest::floyd_warshall(g);
  std::vector<std::vector<long double>> T(n, std::vector<long double>(n));
  for (std::size_t u = 0; u < n; ++u) {
    long double row = 0;
    for (std::size_t v = 0; v < n; ++v) row += T[u][v] = fw[u][v] <= 2 ? 1.0L : 0.05L;
    for (std::size_t v = 0; v < n; ++v) T[u][v] /= row;
  }
  std::vector<long double> b(n, 1.0L / n);
  std::vector<double> belief = uniform_belief(n);
  for (std::size_t z = 0; z < 5; ++z) {
    std::vector<long double> next(n, 0.0L);
    long double total = 0;
    for (std::size_t v = 0; v < n; ++v) {
      for (std::size_t u = 0; u < n; ++u) next[v] += T[u][v] * b[u];
      next[v] *= std::exp(10.0L * m(z, v));
      total += next[v];
    }
    for (auto& x : next) x /= total;
    b = next;
    belief = pbu_step(belief, z, g, p, m).posterior;
    for (std::size_t v = 0; v < n; ++v) REQUIRE(std::abs(belief[v] - double(b[v])) <= 1e-9);
  }
}

TEST_CASE("new nodes enter the belief with the injection mass") {
  const TopoMap g = chain(4);
  PBUParams p;
  p.likelihood.kind = Likelihood::Kind::Identity;
  p.w_u = 0;  // near-identity motion keeps the padded prior visible
  p.trans_far = 1e-15;
  const SimilarityMatrix flat(1, 4, std::vector<double>(4, 0.5));
  const PBUStep st = pbu_step(std::vector<double>{0.5, 0.5}, 0, g, p, flat);
  const double total = 1.0 + 2e-3;
  CHECK(st.posterior[0] == doctest::Approx(0.5 / total).epsilon(1e-9));
  CHECK(st.posterior[3] == doctest::Approx(1e-3 / total).epsilon(1e-9));
  CHECK_THROWS_AS(pbu_step(std::vector<double>{0.5, 0.4}, 0, g, p, flat), ValidationError);
}

TEST_CASE("degenerate likelihood is reported") {
  const TopoMap g = chain(10);
  PBUParams p;
  p.likelihood.kind = Likelihood::Kind::Identity;
  p.likelihood.floor = std::numeric_limits<double>::denorm_min();
  const SimilarityMatrix zero(1, 10, std::vector<double>(10, 0.0));
  CHECK_THROWS_AS(pbu_step(uniform_belief(10), 0, g, p, zero), DataError);
}

TEST_CASE("parameter validation and method names") {
  PBUParams p;
  p.trans_far = 2.0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  for (Method m : all_methods()) CHECK(parse_method(method_name(m)) == m);
  CHECK(parse_method("SM_MED") == Method::SMMed);
  CHECK_THROWS_AS(parse_method("FAB-MAP"), ValidationError);
}
