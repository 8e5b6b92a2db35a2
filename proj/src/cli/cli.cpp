#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <ostream>

#include "topobench/cli.hpp"
#include "topobench/core/error.hpp"

namespace topobench {

namespace {

void add_ambiguity_flags(CLI::App* cmd, AmbiguityOverrides& o) {
  cmd->add_option("--alpha", o.alpha, "A+P distractor ratio threshold");
  cmd->add_option("--tau", o.tau, "A.O. similarity threshold");
  cmd->add_option("--seq-len", o.seq_len, "classification window length L");
}

void add_dataset_flag(CLI::App* cmd, fs::path& dataset) {
  cmd->add_option("--dataset", dataset, "dataset root")->envname(kDatasetEnv)->required();
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Topological localization benchmark toolkit"};
  app.name("topobench");
  app.require_subcommand(1);

  GenerateOptions gen;
  auto* g = app.add_subcommand("generate", "write a synthetic benchmark");
  g->add_option("--spec", gen.spec_path, "benchmark spec (json); default desk benchmark");
  g->add_option("--out", gen.out, "output directory")->required();
  g->add_option("--seed", gen.seed, "override the benchmark seed");
  add_ambiguity_flags(g, gen.overrides);

  ClassifyOptions cls;
  auto* c = app.add_subcommand("classify", "label every case and rewrite the manifest");
  add_dataset_flag(c, cls.dataset);
  add_ambiguity_flags(c, cls.overrides);

  EvaluateOptions ev;
  std::string methods = "GM,SM-Med,SM-All,PBU";
  std::string tau_grid;
  bool no_consistency = false;
  auto* e = app.add_subcommand("evaluate", "run localizers, sweep thresholds, write reports");
  add_dataset_flag(e, ev.dataset);
  e->add_option("--out", ev.out, "output directory")->required();
  e->add_option("--methods", methods, "comma list of GM, SM-Med, SM-All, PBU")
      ->capture_default_str();
  e->add_option("--params", ev.params_path, "localizer parameter file (json)");
  e->add_option("--tau-grid", tau_grid, "point count or comma list of thresholds");
  e->add_option("--d", ev.scale.d, "route distance threshold d (m)")->capture_default_str();
  e->add_option("--epsilon", ev.scale.epsilon, "tolerance factor")->capture_default_str();
  e->add_option("--kappa", ev.kappa, "edge-length regularity bound")->capture_default_str();
  e->add_option("--split-seed", ev.split_seed, "validation split seed")->capture_default_str();
  e->add_option("--val-fraction", ev.val_fraction, "validation share per stratum")
      ->capture_default_str();
  e->add_option("--rho", ev.rho, "target A.O. accuracy")->capture_default_str();
  e->add_flag("--no-consistency", no_consistency, "skip the map growth reports");

  InvariantsOptions inv;
  auto* i = app.add_subcommand("invariants", "check edge precision/recall during map growth");
  i->add_option("--world", inv.world_path, "world spec (json); default loop with spurs");
  i->add_option("--d", inv.scale.d, "route distance threshold d (m)")->capture_default_str();
  i->add_option("--epsilon", inv.scale.epsilon, "tolerance factor")->capture_default_str();
  i->add_option("--kappa", inv.kappa, "edge-length regularity bound")->capture_default_str();
  i->add_option("--seed", inv.seed, "first world seed")->capture_default_str();
  i->add_option("--worlds", inv.worlds, "number of worlds")->capture_default_str();
  i->add_option("--frames", inv.frames, "random walk length")->capture_default_str();
  i->add_option("--inject-fault", inv.inject_fault, "force a bad accept at this step");
  i->add_option("--out", inv.out, "write the per-step trace (json)");

  ReportOptions rep;
  auto* r = app.add_subcommand("report", "summarize a dataset and evaluation results");
  add_dataset_flag(r, rep.dataset);
  r->add_option("--results", rep.results, "evaluate output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*g) return cmd_generate(gen, out);
    if (*c) return cmd_classify(cls, out);
    if (*e) {
      std::vector<std::string> names;
      std::string cur;
      for (char ch : methods + ",") {
        if (ch == ',') {
          if (cur.find_first_not_of(' ') != std::string::npos) {
            names.push_back(cur.substr(cur.find_first_not_of(' '),
                                       cur.find_last_not_of(' ') - cur.find_first_not_of(' ') + 1));
          }
          cur.clear();
        } else {
          cur.push_back(ch);
        }
      }
      ev.methods = names;
      if (!tau_grid.empty()) ev.tau_grid = parse_tau_grid(tau_grid);
      ev.consistency = !no_consistency;
      return cmd_evaluate(ev, out);
    }
    if (*i) return cmd_invariants(inv, out);
    if (*r) return cmd_report(rep, out);
  } catch (const ValidationError& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitUsage;
  } catch (const DataError& ex) {
    err << "data error: " << ex.what() << '\n';
    return kExitData;
  } catch (const UnavailableDistance& ex) {
    err << "data error: " << ex.what() << '\n';
    return kExitData;
  } catch (const std::filesystem::filesystem_error& ex) {
    err << "data error: " << ex.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace topobench
