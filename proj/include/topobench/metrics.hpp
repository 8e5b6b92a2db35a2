#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "topobench/ambiguity.hpp"
#include "topobench/baselines.hpp"
#include "topobench/core/types.hpp"

namespace topobench {

struct CaseResult {
  std::string case_id;
  CaseKind label = CaseKind::NovelClean;
  LocalizerDecision decision;
  bool success = false;
  std::optional<double> route_error;  // accepted decisions on revisits only
};

// Revisit (final frame aligned): accept within d of the aligned map frame.
// Novel final frame: abstain.
CaseResult score_decision(const LocalizerDecision& decision, const PreparedCase& pc,
                          const EvalScale& scale);
bool localization_success(const LocalizerDecision& decision, const PreparedCase& pc,
                          const EvalScale& scale);

// (k + 0.5) / (n + 1).
double jeffreys_smooth(std::size_t k, std::size_t n);
// Geometric mean of three rates in (0, 1].
double bla(double acc_ap, double acc_po, double acc_ao);

struct LabelCount {
  std::size_t k = 0;
  std::size_t n = 0;
  double smoothed() const { return jeffreys_smooth(k, n); }
  bool operator==(const LabelCount&) const = default;
};

struct SweepPoint {
  double tau = 0.0;
  LabelCount ap, po, ao;
  double acc_ap = 0.5, acc_po = 0.5, acc_ao = 0.5;
  double bla = 0.5;
  // Some label had no cases.
  bool degenerate = false;
  bool operator==(const SweepPoint&) const = default;
};

SweepPoint make_point(double tau, LabelCount ap, LabelCount po, LabelCount ao);

std::vector<double> default_tau_grid(std::size_t points = 101);
void validate_tau_grid(const std::vector<double>& grid);

// Threshold-free evaluation of one case: final-frame proposal and whether
// accepting it would be correct.
struct CaseOutcome {
  CaseKind label = CaseKind::NovelClean;
  Proposal proposal;
  bool correct_if_accepted = false;
  bool novel = true;
  std::optional<double> route_error;
};

CaseOutcome case_outcome(PreparedCase& pc, Method method, const LocalizerParams& params,
                         const EvalScale& scale);
bool outcome_success(const CaseOutcome& o, double tau);

// NOVEL_CLEAN cases do not enter any of the three accuracies.
std::vector<SweepPoint> sweep_outcomes(const std::vector<CaseOutcome>& outcomes,
                                       const std::vector<double>& tau_grid);
std::vector<SweepPoint> threshold_sweep(std::vector<PreparedCase>& cases, Method method,
                                        const LocalizerParams& params,
                                        const std::vector<double>& tau_grid,
                                        const EvalScale& scale);

struct Split {
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
};

// Per (environment, label) stratum, round(fraction * size) cases go to
// validation after a seeded shuffle. Index lists are sorted.
Split split_cases(const std::vector<TestCase>& cases, double fraction, std::uint64_t seed);

enum class OperatingKind { AoAtRho, BlaMax };

struct OperatingPoint {
  OperatingKind kind = OperatingKind::BlaMax;
  double rho = 0.0;
  std::size_t index = 0;
  double chosen_tau = 0.0;
  SweepPoint validation_values;
  SweepPoint test_values;
};

inline constexpr double kRhoTolerance = 0.03;

// AO_AT_RHO: among points with |acc_ao - rho| <= 0.03, the smallest tau with
// acc_ao >= rho, else the highest acc_ao (smallest tau on ties). Throws
// ValidationError naming the nearest acc_ao when nothing is in tolerance.
// BLA_MAX: argmax bla, ties to the smaller tau. test_values is left equal to
// validation_values.
OperatingPoint select_operating_point(const std::vector<SweepPoint>& sweep_val,
                                      OperatingKind kind, double rho = 0.9);
// Selects on the validation sweep and reads the same grid point from the
// full sweep.
OperatingPoint select_and_apply(const std::vector<SweepPoint>& sweep_val,
                                const std::vector<SweepPoint>& sweep_full, OperatingKind kind,
                                double rho = 0.9);

// Four cells each for the AO_AT_RHO and BLA_MAX operating points:
// L_A+P, L_P.O., L_A.O., BLA.
struct TableRow {
  std::string method;
  std::optional<std::array<std::string, 4>> at_rho;
  std::optional<std::array<std::string, 4>> at_max;
  bool reference = false;
};

struct MethodOperatingPoints {
  std::string method;
  std::optional<OperatingPoint> at_rho;
  std::optional<OperatingPoint> at_max;
};

struct ResultsTable {
  double rho = 0.9;
  std::vector<TableRow> rows;
  std::vector<std::string> warnings;
};

std::string format_rate(double value);
std::array<std::string, 4> row_cells(const SweepPoint& p);

// Published FAB-MAP and RatSLAM rows.
std::vector<TableRow> reference_rows();
// All six published rows, FAB-MAP through PBU.
std::vector<TableRow> published_rows();

// Computed rows use the test-stage values; a method missing either
// operating point is omitted with a warning.
ResultsTable render_results_table(const std::vector<MethodOperatingPoints>& points,
                                  const std::vector<TableRow>& refs, double rho);

std::string table_text(const ResultsTable& t);
std::string table_csv(const ResultsTable& t);

// CSV with header tau,<methods...>; one row per grid point.
enum class SweepColumn { AP, PO, AO, BLA };
std::string sweep_csv(const std::vector<std::string>& methods,
                      const std::vector<std::vector<SweepPoint>>& sweeps, SweepColumn column);

}  // namespace topobench
