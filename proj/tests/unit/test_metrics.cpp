#include <cmath>
#include <memory>

#include "doctest.h"
#include "test_support.hpp"
#include "topobench/core/error.hpp"
#include "topobench/metrics.hpp"

using namespace topobench;

namespace {

// Map line of 10 frames 1 m apart; test of 3 frames at map frames 5..7, or
// displaced off the map when novel.
TestCase line_case(bool novel, CaseKind label) {
  TestCase tc;
  tc.id = "c";
  tc.environment = "e";
  auto map = std::make_shared<Sequence>(tbtest::line_sequence(10));
  Sequence test;
  for (std::size_t i = 0; i < 3; ++i) {
    Frame f;
    f.frame_id = i;
    f.timestamp = double(i);
    f.pose = {double(5 + i), novel ? 10.0 : 0.0, 0.0};
    test.frames.push_back(f);
  }
  auto t = std::make_shared<Sequence>(test);
  tc.correspondence = build_correspondence(*t, *map, 0.5);
  tc.map = map;
  tc.test = t;
  tc.label = label;
  tc.seq_len = 3;
  tc.similarity = std::make_shared<SimilarityMatrix>(3, 10, std::vector<double>(30, 0.5));
  return tc;
}

CaseOutcome outcome(CaseKind label, bool correct, double score) {
  CaseOutcome o;
  o.label = label;
  o.novel = label == CaseKind::AOnly || label == CaseKind::NovelClean;
  o.proposal = Proposal{0, score};
  o.correct_if_accepted = correct;
  return o;
}

}  // namespace

TEST_CASE("localization success rule") {
  const TestCase revisit = line_case(false, CaseKind::POnly);
  const PreparedCase pc = prepare_case(revisit);
  REQUIRE(pc.map.node_count() == 10);
  const EvalScale scale{1.0, 0.5};
  CHECK(localization_success(LocalizerDecision::accept(7, 0.9), pc, scale));
  CHECK(localization_success(LocalizerDecision::accept(8, 0.9), pc, scale));
  CHECK_FALSE(localization_success(LocalizerDecision::accept(9, 0.9), pc, scale));
  CHECK_FALSE(localization_success(LocalizerDecision::abstain(), pc, scale));
  CHECK(score_decision(LocalizerDecision::accept(9, 0.9), pc, scale).route_error == 2.0);

  const TestCase novel = line_case(true, CaseKind::AOnly);
  const PreparedCase pn = prepare_case(novel);
  CHECK(localization_success(LocalizerDecision::abstain(), pn, scale));
  CHECK_FALSE(localization_success(LocalizerDecision::accept(7, 0.9), pn, scale));
}

TEST_CASE("jeffreys smoothing") {
  CHECK(jeffreys_smooth(0, 51) == doctest::Approx(0.009615).epsilon(1e-4));
  CHECK(std::abs(jeffreys_smooth(0, 51) - 0.5 / 52) < 1e-15);
  CHECK(jeffreys_smooth(192, 384) == 0.5);
  CHECK(jeffreys_smooth(0, 0) == 0.5);
  CHECK_THROWS_AS(jeffreys_smooth(3, 2), ValidationError);
  for (std::size_t n = 1; n <= 10000; ++n) {
    for (std::size_t k : {std::size_t{0}, n / 3, n / 2, n}) {
      const double r = jeffreys_smooth(k, n);
      REQUIRE(r > 0.0);
      REQUIRE(r < 1.0);
      REQUIRE(std::abs(r - double(k) / double(n)) <= 1.0 / (2.0 * n) + 1e-15);
    }
  }
}

TEST_CASE("balanced accuracy") {
  CHECK(bla(0.5, 0.5, 0.5) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(bla(1e-6, 1.0, 1.0) < 0.011);
  CHECK_THROWS_AS(bla(0.0, 0.5, 0.5), ValidationError);
  Rng rng(20);
  for (int i = 0; i < 2000; ++i) {
    const double a = rng.uniform(1e-3, 1), b = rng.uniform(1e-3, 1), c = rng.uniform(1e-3, 1);
    const double v = bla(a, b, c);
    REQUIRE(v == doctest::Approx(bla(c, a, b)).epsilon(1e-14));
    REQUIRE(v <= std::max({a, b, c}) + 1e-15);
    REQUIRE(v >= std::min({a, b, c}) - 1e-15);
  }
}

TEST_CASE("sweep over outcomes") {
  const std::vector<CaseOutcome> one{outcome(CaseKind::POnly, true, 0.8)};
  const auto s = sweep_outcomes(one, {0.0, 0.5, 0.9});
  CHECK(s[0].acc_po == 0.75);
  CHECK(s[2].acc_po == 0.25);
  CHECK(s[0].degenerate);
  CHECK(s[0].acc_ap == 0.5);
  CHECK_THROWS_AS(sweep_outcomes(one, {0.5, 0.5}), ValidationError);
  CHECK_THROWS_AS(sweep_outcomes(one, {}), ValidationError);

  Rng rng(21);
  std::vector<CaseOutcome> many;
  for (int i = 0; i < 200; ++i) {
    const CaseKind k = static_cast<CaseKind>(rng.below(4));
    many.push_back(outcome(k, rng.uniform() < 0.6, rng.uniform()));
  }
  const auto sweep = sweep_outcomes(many, default_tau_grid());
  REQUIRE(sweep.size() == 101);
  for (std::size_t i = 1; i < sweep.size(); ++i) {
    REQUIRE(sweep[i].ao.k >= sweep[i - 1].ao.k);
    REQUIRE(sweep[i].po.k <= sweep[i - 1].po.k);
    REQUIRE(sweep[i].ap.k <= sweep[i - 1].ap.k);
    REQUIRE(sweep[i].ao.n == sweep[0].ao.n);
  }
}

TEST_CASE("operating point at rho prefers the conservative side") {
  std::vector<SweepPoint> s;
  const double ao[] = {0.80, 0.89, 0.93, 0.99};
  for (int i = 0; i < 4; ++i) {
    SweepPoint p;
    p.tau = 0.1 * i;
    p.acc_ao = ao[i];
    s.push_back(p);
  }
  const OperatingPoint op = select_operating_point(s, OperatingKind::AoAtRho, 0.90);
  CHECK(op.index == 2);
  CHECK(op.chosen_tau == doctest::Approx(0.2));

  s[2].acc_ao = 0.95;  // nothing above rho within tolerance now
  CHECK(select_operating_point(s, OperatingKind::AoAtRho, 0.90).index == 1);
  s[1].acc_ao = 0.86;
  CHECK_THROWS_AS(select_operating_point(s, OperatingKind::AoAtRho, 0.90), ValidationError);
  try {
    select_operating_point(s, OperatingKind::AoAtRho, 0.90);
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("nearest achievable 0.8600") != std::string::npos);
  }
}

TEST_CASE("bla max is the exhaustive argmax with ties to smaller tau") {
  Rng rng(22);
  for (int t = 0; t < 300; ++t) {
    std::vector<SweepPoint> s(1 + rng.below(30));
    for (std::size_t i = 0; i < s.size(); ++i) {
      s[i].tau = double(i);
      s[i].bla = double(rng.below(6)) / 5.0;
    }
    std::size_t arg = 0;
    for (std::size_t i = 0; i < s.size(); ++i)
      if (s[i].bla > s[arg].bla) arg = i;
    REQUIRE(select_operating_point(s, OperatingKind::BlaMax).index == arg);
  }
}

TEST_CASE("stratified split is seeded and per environment") {
  std::vector<TestCase> cases;
  for (int e = 0; e < 3; ++e)
    for (int i = 0; i < 10; ++i) {
      TestCase tc;
      tc.id = std::to_string(e) + "-" + std::to_string(i);
      tc.environment = "env" + std::to_string(e);
      tc.label = i < 4 ? CaseKind::POnly : CaseKind::AOnly;
      cases.push_back(tc);
    }
  const Split a = split_cases(cases, 0.25, 5), b = split_cases(cases, 0.25, 5),
              c = split_cases(cases, 0.25, 6);
  CHECK(a.validation == b.validation);
  CHECK(a.validation != c.validation);
  CHECK(a.validation.size() + a.test.size() == cases.size());
  // round(0.25 * 4) = 1 and round(0.25 * 6) = 2 per environment
  CHECK(a.validation.size() == 9);
}

TEST_CASE("published rows render verbatim") {
  const auto rows = published_rows();
  REQUIRE(rows.size() == 6);
  CHECK(rows[0].method == "FAB-MAP");
  CHECK((*rows[0].at_rho)[3] == "0.058");
  CHECK((*rows[0].at_rho)[0] == "0.0");
  CHECK((*rows[3].at_rho)[3] == "0.220");
  CHECK((*rows[5].at_max)[3] == "0.295");
  const ResultsTable t = render_results_table({}, reference_rows(), 0.9);
  const std::string text = table_text(t);
  CHECK(text.find("FAB-MAP") != std::string::npos);
  CHECK(text.find("L_A.O.@90") != std::string::npos);
  CHECK(table_csv(t).find("FAB-MAP,1,0.0,0.036,0.964,0.058,0.0,0.078,0.732,0.067") !=
        std::string::npos);

  MethodOperatingPoints missing{"GM", std::nullopt, std::nullopt};
  const ResultsTable w = render_results_table({missing}, {}, 0.9);
  CHECK(w.rows.empty());
  CHECK(w.warnings.size() == 1);
}

TEST_CASE("sweep csv columns are alphabetical") {
  const std::vector<double> grid{0.0, 0.5};
  const std::vector<CaseOutcome> o{outcome(CaseKind::POnly, true, 0.8)};
  const auto s = sweep_outcomes(o, grid);
  const std::string csv = sweep_csv({"SM-Med", "GM"}, {s, s}, SweepColumn::PO);
  CHECK(csv.rfind("tau,GM,SM-Med\n0,0.75,0.75\n0.5,0.75,0.75\n", 0) == 0);
}
