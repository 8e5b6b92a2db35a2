#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "topobench/io.hpp"

namespace topobench {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;  // usage or validation
inline constexpr int kExitData = 2;
inline constexpr int kExitInvariant = 3;

inline constexpr const char* kDatasetEnv = "TOPOBENCH_DATASET";

struct AmbiguityOverrides {
  std::optional<double> alpha;
  std::optional<double> tau;
  std::optional<std::size_t> seq_len;
};

// Effective ambiguity parameters and where each came from: cli, manifest
// (or spec) or default.
struct ResolvedAmbiguity {
  AmbiguityParams params;
  std::map<std::string, std::string> source;
  Json json() const;
  std::string describe() const;
};

// `stored` is the raw ambiguity object of a manifest or spec, if any.
ResolvedAmbiguity resolve_ambiguity(const Json* stored, const AmbiguityOverrides& cli,
                                    const std::string& stored_name = "manifest");

struct GenerateOptions {
  std::string spec_path;  // empty: built-in desk benchmark
  fs::path out;
  std::optional<std::uint64_t> seed;
  AmbiguityOverrides overrides;
};

struct ClassifyOptions {
  fs::path dataset;
  AmbiguityOverrides overrides;
};

struct EvaluateOptions {
  fs::path dataset;
  fs::path out;
  std::vector<std::string> methods;
  std::string params_path;
  std::vector<double> tau_grid;  // empty: 101 points over [0, 1]
  EvalScale scale;
  double kappa = 2.0;
  std::uint64_t split_seed = 11;
  double val_fraction = 0.3;
  double rho = 0.9;
  bool consistency = true;
};

struct InvariantsOptions {
  std::string world_path;  // empty: built-in loop with spurs
  EvalScale scale;
  double kappa = 2.0;
  std::uint64_t seed = 1;
  std::size_t worlds = 1;
  std::size_t frames = 150;
  std::optional<std::size_t> inject_fault;
  fs::path out;  // optional trace file
};

struct ReportOptions {
  fs::path dataset;
  fs::path results;  // evaluate output directory, optional
};

int cmd_generate(const GenerateOptions& o, std::ostream& out);
int cmd_classify(const ClassifyOptions& o, std::ostream& out);
int cmd_evaluate(const EvaluateOptions& o, std::ostream& out);
int cmd_invariants(const InvariantsOptions& o, std::ostream& out);
int cmd_report(const ReportOptions& o, std::ostream& out);

// Accepts "N" (N evenly spaced points over [0, 1]) or a comma list.
std::vector<double> parse_tau_grid(const std::string& text);
std::vector<Method> parse_methods(const std::vector<std::string>& names);

// Parses arguments, runs the subcommand and maps errors to exit codes.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace topobench
