#include "topobench/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <utility>

#include "topobench/core/error.hpp"
#include "topobench/core/rng.hpp"
#include "topobench/core/route.hpp"

namespace topobench {

namespace {

std::optional<double> route_between(const PreparedCase& pc, FrameIndex a, FrameIndex b) {
  const Sequence& map = *pc.source->map;
  if (pc.source->route) return pc.source->route->between(map[a], map[b]);
  return TraversalRouteMetric{}.between(map[a], map[b]);
}

std::string shortest(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

CaseResult score_decision(const LocalizerDecision& decision, const PreparedCase& pc,
                          const EvalScale& scale) {
  const TestCase& tc = *pc.source;
  CaseResult r;
  r.case_id = tc.id;
  r.label = tc.label;
  r.decision = decision;
  const auto truth = tc.final_truth();
  if (!truth) {
    r.success = !decision.accepted();
    return r;
  }
  if (!decision.accepted()) return r;
  if (!pc.map.contains(decision.node)) {
    throw ValidationError("decision accepts node missing from the case map");
  }
  r.route_error = route_between(pc, pc.map.node(decision.node).source_frame, *truth);
  r.success = r.route_error && *r.route_error <= scale.d + kDistanceTolerance;
  return r;
}

bool localization_success(const LocalizerDecision& decision, const PreparedCase& pc,
                          const EvalScale& scale) {
  return score_decision(decision, pc, scale).success;
}

double jeffreys_smooth(std::size_t k, std::size_t n) {
  if (k > n) throw ValidationError("jeffreys_smooth: k exceeds n");
  return (static_cast<double>(k) + 0.5) / (static_cast<double>(n) + 1.0);
}

double bla(double acc_ap, double acc_po, double acc_ao) {
  for (double r : {acc_ap, acc_po, acc_ao}) {
    if (!(r > 0.0 && r <= 1.0)) throw ValidationError("bla: rates must lie in (0, 1]");
  }
  return std::cbrt(acc_ap * acc_po * acc_ao);
}

SweepPoint make_point(double tau, LabelCount ap, LabelCount po, LabelCount ao) {
  SweepPoint p;
  p.tau = tau;
  p.ap = ap;
  p.po = po;
  p.ao = ao;
  p.acc_ap = ap.smoothed();
  p.acc_po = po.smoothed();
  p.acc_ao = ao.smoothed();
  p.bla = bla(p.acc_ap, p.acc_po, p.acc_ao);
  p.degenerate = ap.n == 0 || po.n == 0 || ao.n == 0;
  return p;
}

std::vector<double> default_tau_grid(std::size_t points) {
  if (points < 2) throw ValidationError("tau grid needs at least two points");
  std::vector<double> g(points);
  for (std::size_t i = 0; i < points; ++i) {
    g[i] = static_cast<double>(i) / static_cast<double>(points - 1);
  }
  return g;
}

void validate_tau_grid(const std::vector<double>& grid) {
  if (grid.empty()) throw ValidationError("tau grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(grid[i])) throw ValidationError("tau grid has a non-finite value");
    if (i > 0 && !(grid[i] > grid[i - 1])) {
      throw ValidationError("tau grid must be strictly increasing");
    }
  }
}

CaseOutcome case_outcome(PreparedCase& pc, Method method, const LocalizerParams& params,
                         const EvalScale& scale) {
  CaseOutcome o;
  o.label = pc.source->label;
  o.proposal = propose_on_case(pc, method, params);
  o.novel = !pc.source->final_truth().has_value();
  if (o.novel || !o.proposal.node) return o;
  const CaseResult r = score_decision(LocalizerDecision::accept(*o.proposal.node, 0.0), pc, scale);
  o.correct_if_accepted = r.success;
  o.route_error = r.route_error;
  return o;
}

bool outcome_success(const CaseOutcome& o, double tau) {
  const bool accepted = o.proposal.node && o.proposal.score >= tau;
  return o.novel ? !accepted : accepted && o.correct_if_accepted;
}

std::vector<SweepPoint> sweep_outcomes(const std::vector<CaseOutcome>& outcomes,
                                       const std::vector<double>& tau_grid) {
  validate_tau_grid(tau_grid);
  std::vector<SweepPoint> out;
  out.reserve(tau_grid.size());
  for (double tau : tau_grid) {
    LabelCount ap, po, ao;
    for (const CaseOutcome& o : outcomes) {
      LabelCount* c = nullptr;
      switch (o.label) {
        case CaseKind::APlusP:
          c = &ap;
          break;
        case CaseKind::POnly:
          c = &po;
          break;
        case CaseKind::AOnly:
          c = &ao;
          break;
        case CaseKind::NovelClean:
          break;
      }
      if (!c) continue;
      ++c->n;
      if (outcome_success(o, tau)) ++c->k;
    }
    out.push_back(make_point(tau, ap, po, ao));
  }
  return out;
}

std::vector<SweepPoint> threshold_sweep(std::vector<PreparedCase>& cases, Method method,
                                        const LocalizerParams& params,
                                        const std::vector<double>& tau_grid,
                                        const EvalScale& scale) {
  validate_tau_grid(tau_grid);
  std::vector<CaseOutcome> outcomes;
  outcomes.reserve(cases.size());
  for (PreparedCase& pc : cases) outcomes.push_back(case_outcome(pc, method, params, scale));
  return sweep_outcomes(outcomes, tau_grid);
}

Split split_cases(const std::vector<TestCase>& cases, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw ValidationError("validation fraction must lie in [0, 1]");
  }
  std::map<std::pair<std::string, int>, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    strata[{cases[i].environment, static_cast<int>(cases[i].label)}].push_back(i);
  }
  Rng rng(seed);
  Split split;
  for (auto& [key, idx] : strata) {
    rng.shuffle(idx);
    const auto take = static_cast<std::size_t>(std::floor(fraction * idx.size() + 0.5));
    split.validation.insert(split.validation.end(), idx.begin(), idx.begin() + take);
    split.test.insert(split.test.end(), idx.begin() + take, idx.end());
  }
  std::sort(split.validation.begin(), split.validation.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

OperatingPoint select_operating_point(const std::vector<SweepPoint>& sweep_val,
                                      OperatingKind kind, double rho) {
  if (sweep_val.empty()) throw ValidationError("select_operating_point: empty sweep");
  std::optional<std::size_t> pick;
  if (kind == OperatingKind::BlaMax) {
    for (std::size_t i = 0; i < sweep_val.size(); ++i) {
      if (!pick || sweep_val[i].bla > sweep_val[*pick].bla) pick = i;
    }
  } else {
    if (!(rho > 0.0 && rho < 1.0)) throw ValidationError("rho must lie in (0, 1)");
    std::optional<std::size_t> above, below;
    std::size_t nearest = 0;
    for (std::size_t i = 0; i < sweep_val.size(); ++i) {
      const double a = sweep_val[i].acc_ao;
      if (std::abs(a - rho) < std::abs(sweep_val[nearest].acc_ao - rho)) nearest = i;
      if (std::abs(a - rho) > kRhoTolerance + 1e-12) continue;
      if (a >= rho) {
        if (!above) above = i;
      } else if (!below || a > sweep_val[*below].acc_ao) {
        below = i;
      }
    }
    pick = above ? above : below;
    if (!pick) {
      char buf[160];
      std::snprintf(buf, sizeof buf,
                    "no threshold within 0.03 of acc_ao = %.4f; nearest achievable %.4f at tau "
                    "%.4f",
                    rho, sweep_val[nearest].acc_ao, sweep_val[nearest].tau);
      throw ValidationError(buf);
    }
  }
  OperatingPoint op;
  op.kind = kind;
  op.rho = rho;
  op.index = *pick;
  op.chosen_tau = sweep_val[*pick].tau;
  op.validation_values = sweep_val[*pick];
  op.test_values = sweep_val[*pick];
  return op;
}

OperatingPoint select_and_apply(const std::vector<SweepPoint>& sweep_val,
                                const std::vector<SweepPoint>& sweep_full, OperatingKind kind,
                                double rho) {
  if (sweep_val.size() != sweep_full.size()) {
    throw ValidationError("validation and full sweeps use different grids");
  }
  OperatingPoint op = select_operating_point(sweep_val, kind, rho);
  op.test_values = sweep_full[op.index];
  return op;
}

std::string format_rate(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", value);
  return buf;
}

std::array<std::string, 4> row_cells(const SweepPoint& p) {
  return {format_rate(p.acc_ap), format_rate(p.acc_po), format_rate(p.acc_ao),
          format_rate(p.bla)};
}

namespace {

TableRow published(std::string name, std::array<std::string, 4> rho,
                   std::array<std::string, 4> max) {
  return TableRow{std::move(name), std::move(rho), std::move(max), true};
}

}  // namespace

std::vector<TableRow> reference_rows() {
  return {published("FAB-MAP", {"0.0", "0.036", "0.964", "0.058"},
                    {"0.0", "0.078", "0.732", "0.067"}),
          published("RatSLAM", {"0.0", "0.081", "0.438", "0.057"},
                    {"0.0", "0.081", "0.438", "0.057"})};
}

std::vector<TableRow> published_rows() {
  std::vector<TableRow> rows = reference_rows();
  rows.push_back(
      published("GM", {"0.020", "0.402", "0.577", "0.178"}, {"0.078", "0.479", "0.423", "0.256"}));
  rows.push_back(published("SM-Med", {"0.039", "0.311", "0.778", "0.220"},
                           {"0.078", "0.489", "0.412", "0.255"}));
  rows.push_back(published("SM-All", {"0.020", "0.229", "0.784", "0.164"},
                           {"0.039", "0.388", "0.469", "0.200"}));
  rows.push_back(published("PBU", {"0.020", "0.402", "0.577", "0.178"},
                           {"0.235", "0.646", "0.165", "0.295"}));
  return rows;
}

ResultsTable render_results_table(const std::vector<MethodOperatingPoints>& points,
                                  const std::vector<TableRow>& refs, double rho) {
  ResultsTable t;
  t.rho = rho;
  t.rows = refs;
  for (const MethodOperatingPoints& m : points) {
    if (!m.at_rho || !m.at_max) {
      t.warnings.push_back(m.method + ": missing operating point, row omitted");
      continue;
    }
    t.rows.push_back(
        TableRow{m.method, row_cells(m.at_rho->test_values), row_cells(m.at_max->test_values),
                 false});
  }
  return t;
}

namespace {

std::string rho_label(double rho) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "@%g", std::round(rho * 1000.0) / 10.0);
  return buf;
}

}  // namespace

std::string table_text(const ResultsTable& t) {
  std::ostringstream os;
  const std::string at = "L_A.O." + rho_label(t.rho);
  char line[256];
  std::snprintf(line, sizeof line, "%-10s | %-31s | %-31s\n", "", at.c_str(), "BLA_max");
  os << line;
  std::snprintf(line, sizeof line, "%-10s | %-7s %-7s %-7s %-7s | %-7s %-7s %-7s %-7s\n",
                "Method", "A+P", "P.O.", "A.O.", "BLA", "A+P", "P.O.", "A.O.", "BLA");
  os << line << std::string(78, '-') << '\n';
  for (const TableRow& r : t.rows) {
    const auto& a = *r.at_rho;
    const auto& b = *r.at_max;
    std::snprintf(line, sizeof line, "%-10s | %-7s %-7s %-7s %-7s | %-7s %-7s %-7s %-7s\n",
                  r.method.c_str(), a[0].c_str(), a[1].c_str(), a[2].c_str(), a[3].c_str(),
                  b[0].c_str(), b[1].c_str(), b[2].c_str(), b[3].c_str());
    os << line;
  }
  for (const std::string& w : t.warnings) os << "warning: " << w << '\n';
  return os.str();
}

std::string table_csv(const ResultsTable& t) {
  std::ostringstream os;
  const std::string at = rho_label(t.rho);
  os << "method,reference,AP" << at << ",PO" << at << ",AO" << at << ",BLA" << at
     << ",AP_max,PO_max,AO_max,BLA_max\n";
  for (const TableRow& r : t.rows) {
    os << r.method << ',' << (r.reference ? 1 : 0);
    for (const auto& c : *r.at_rho) os << ',' << c;
    for (const auto& c : *r.at_max) os << ',' << c;
    os << '\n';
  }
  return os.str();
}

std::string sweep_csv(const std::vector<std::string>& methods,
                      const std::vector<std::vector<SweepPoint>>& sweeps, SweepColumn column) {
  if (methods.size() != sweeps.size() || methods.empty()) {
    throw ValidationError("sweep_csv: one sweep per method required");
  }
  std::vector<std::size_t> order(methods.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return methods[a] < methods[b]; });
  const std::size_t rows = sweeps.front().size();
  for (const auto& s : sweeps) {
    if (s.size() != rows) throw ValidationError("sweep_csv: sweeps use different grids");
  }
  std::ostringstream os;
  os << "tau";
  for (std::size_t i : order) os << ',' << methods[i];
  os << '\n';
  for (std::size_t r = 0; r < rows; ++r) {
    os << shortest(sweeps[order.front()][r].tau);
    for (std::size_t i : order) {
      const SweepPoint& p = sweeps[i][r];
      double v = p.bla;
      if (column == SweepColumn::AP) v = p.acc_ap;
      if (column == SweepColumn::PO) v = p.acc_po;
      if (column == SweepColumn::AO) v = p.acc_ao;
      os << ',' << shortest(v);
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace topobench
