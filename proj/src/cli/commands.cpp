#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "topobench/baselines.hpp"
#include "topobench/cli.hpp"
#include "topobench/consistency.hpp"
#include "topobench/core/error.hpp"
#include "topobench/metrics.hpp"

namespace topobench {

namespace {

Json parse_json_file(const fs::path& p, bool user_input) {
  const std::string text = read_file(p);
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const std::string msg = p.string() + ": " + e.what();
    if (user_input) throw ValidationError(msg);
    throw DataError(msg);
  }
}

std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

Json point_json(const SweepPoint& p) {
  auto count = [](const LabelCount& c) { return Json{{"k", c.k}, {"n", c.n}}; };
  return Json{{"acc_ao", p.acc_ao},
              {"acc_ap", p.acc_ap},
              {"acc_po", p.acc_po},
              {"bla", p.bla},
              {"counts", Json{{"AO", count(p.ao)}, {"AP", count(p.ap)}, {"PO", count(p.po)}}},
              {"degenerate", p.degenerate},
              {"tau", p.tau}};
}

Json operating_json(const std::optional<OperatingPoint>& op) {
  if (!op) return nullptr;
  return Json{{"chosen_tau", op->chosen_tau},
              {"evaluation", point_json(op->test_values)},
              {"index", op->index},
              {"validation", point_json(op->validation_values)}};
}

// Smallest positive frame-to-frame traversal step.
double min_traversal_gap(const Sequence& s) {
  double gap = 0.0;
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (!s[i].traversal_dist || !s[i - 1].traversal_dist) continue;
    const double step = *s[i].traversal_dist - *s[i - 1].traversal_dist;
    if (step > 0.0 && (gap == 0.0 || step < gap)) gap = step;
  }
  return gap;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    const auto b = cur.find_first_not_of(" \t");
    if (b != std::string::npos) out.push_back(cur.substr(b, cur.find_last_not_of(" \t") - b + 1));
    cur.clear();
  };
  for (char c : text) {
    if (c == ',') {
      flush();
    } else {
      cur.push_back(c);
    }
  }
  flush();
  return out;
}

void prepare_output_dir(const fs::path& out) {
  if (out.empty()) throw ValidationError("--out is required");
  if (fs::exists(out)) {
    if (!fs::is_directory(out)) throw DataError(out.string() + " exists and is not a directory");
    if (!fs::is_empty(out) && !fs::exists(out / "manifest.json")) {
      throw DataError(out.string() + " is not empty and holds no benchmark; refusing to write");
    }
    // stale cases from an earlier run would otherwise linger
    fs::remove_all(out / "cases");
    fs::remove_all(out / "environments");
  }
  fs::create_directories(out);
}

void require_labels(const Manifest& m) {
  for (const ManifestCase& c : m.cases) {
    if (!c.label) throw DataError("case " + c.case_id + " is unlabeled; run classify first");
  }
}

}  // namespace

Json ResolvedAmbiguity::json() const {
  Json j = to_json(params);
  j["source"] = source;
  return j;
}

std::string ResolvedAmbiguity::describe() const {
  std::ostringstream os;
  os << "ambiguity: alpha=" << fmt(params.alpha) << " (" << source.at("alpha") << ")"
     << " tau=" << fmt(params.tau) << " (" << source.at("tau") << ")"
     << " seq_len=" << params.seq_len << " (" << source.at("seq_len") << ")"
     << " exclusion_fraction=" << fmt(params.exclusion_fraction) << " ("
     << source.at("exclusion_fraction") << ")";
  return os.str();
}

ResolvedAmbiguity resolve_ambiguity(const Json* stored, const AmbiguityOverrides& cli,
                                    const std::string& stored_name) {
  ResolvedAmbiguity r;
  for (const char* k : {"alpha", "tau", "seq_len", "exclusion_fraction"}) {
    r.source[k] = stored && stored->contains(k) ? stored_name : "default";
  }
  if (stored) r.params = ambiguity_from_json(*stored);
  if (cli.alpha) {
    r.params.alpha = *cli.alpha;
    r.source["alpha"] = "cli";
  }
  if (cli.tau) {
    r.params.tau = *cli.tau;
    r.source["tau"] = "cli";
  }
  if (cli.seq_len) {
    r.params.seq_len = *cli.seq_len;
    r.source["seq_len"] = "cli";
  }
  r.params.validate();
  return r;
}

std::vector<double> parse_tau_grid(const std::string& text) {
  const auto parts = split_list(text);
  if (parts.empty()) throw ValidationError("--tau-grid: empty");
  auto number = [](const std::string& s) {
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
      throw ValidationError("--tau-grid: bad value '" + s + "'");
    }
    return v;
  };
  std::vector<double> grid;
  if (parts.size() == 1 && parts[0].find('.') == std::string::npos) {
    const double n = number(parts[0]);
    if (n < 2 || n != static_cast<double>(static_cast<std::size_t>(n))) {
      throw ValidationError("--tau-grid: point count must be an integer >= 2");
    }
    grid = default_tau_grid(static_cast<std::size_t>(n));
  } else {
    for (const auto& p : parts) grid.push_back(number(p));
  }
  validate_tau_grid(grid);
  return grid;
}

std::vector<Method> parse_methods(const std::vector<std::string>& names) {
  if (names.empty()) {
    throw ValidationError("no methods selected (valid: GM, SM-Med, SM-All, PBU)");
  }
  std::vector<Method> out;
  for (const auto& n : names) {
    const Method m = parse_method(n);
    if (std::find(out.begin(), out.end(), m) != out.end()) {
      throw ValidationError("method " + n + " listed twice");
    }
    out.push_back(m);
  }
  return out;
}

int cmd_generate(const GenerateOptions& o, std::ostream& out) {
  BenchmarkSpec spec;
  Json raw;
  const Json* stored = nullptr;
  if (o.spec_path.empty()) {
    spec = desk_benchmark_spec(o.seed.value_or(7));
  } else {
    raw = parse_json_file(o.spec_path, true);
    spec = benchmark_spec_from_json(raw);
    if (raw.contains("ambiguity")) stored = &raw["ambiguity"];
  }
  if (o.seed) spec.seed = *o.seed;
  const ResolvedAmbiguity amb = resolve_ambiguity(stored, o.overrides, "spec");
  spec.ambiguity = amb.params;
  spec.validate();

  prepare_output_dir(o.out);
  const GeneratedBenchmark b = generate_benchmark(spec);
  const Manifest m = write_benchmark(b, o.out);
  write_file(o.out / "spec.json", to_json(spec).dump(2) + "\n");

  std::size_t mismatched = 0;
  for (const TestCase& tc : b.cases) mismatched += tc.intended_label != tc.label;
  out << "benchmark " << spec.name << " (seed " << spec.seed << ")\n"
      << amb.describe() << '\n'
      << counts_table(count_by_environment(m)) << "wrote " << b.cases.size() << " cases to "
      << o.out.string() << '\n';
  if (mismatched) {
    // generate_case verifies every label, so this would be a generator bug
    out << "error: " << mismatched << " cases do not carry their intended label\n";
    return kExitInvariant;
  }
  return kExitOk;
}

int cmd_classify(const ClassifyOptions& o, std::ostream& out) {
  const Json raw = parse_json_file(o.dataset / "manifest.json", false);
  Dataset ds = load_dataset(o.dataset);
  const Json* stored = raw.contains("ambiguity") ? &raw["ambiguity"] : nullptr;
  const ResolvedAmbiguity amb = resolve_ambiguity(stored, o.overrides);

  Manifest& m = ds.manifest;
  std::vector<std::string> disagreements;
  std::size_t with_intent = 0;
  for (std::size_t i = 0; i < ds.cases.size(); ++i) {
    const TestCase& tc = ds.cases[i];
    std::shared_ptr<const SimilaritySource> sim = tc.similarity;
    if (!sim) {
      sim = std::make_shared<SimilarityMatrix>(SimilarityMatrix::from_descriptors(*tc.test, *tc.map));
    }
    const CaseLabel label = classify_case(*tc.test, *tc.map, tc.correspondence, amb.params, *sim);
    ManifestCase& mc = m.cases[i];
    Json design = mc.evidence.contains("design") ? mc.evidence["design"] : Json();
    mc.label = label.kind;
    mc.params = amb.params;
    mc.evidence = evidence_json(label);
    if (!design.is_null()) mc.evidence["design"] = design;
    if (mc.intended_label) {
      ++with_intent;
      if (*mc.intended_label != label.kind) {
        disagreements.push_back(mc.case_id + ": intended " + to_string(*mc.intended_label) +
                                ", measured " + to_string(label.kind));
      }
    }
  }
  m.ambiguity = amb.params;
  m.recount();

  out << "dataset " << m.name << ": " << m.cases.size() << " cases\n"
      << amb.describe() << '\n'
      << counts_table(count_by_environment(m));
  if (with_intent) {
    out << "intended labels reproduced: " << with_intent - disagreements.size() << "/"
        << with_intent << '\n';
    for (std::size_t i = 0; i < disagreements.size() && i < 20; ++i) {
      out << "  " << disagreements[i] << '\n';
    }
  }
  if (m.name == kCuratedName) {
    const std::size_t ap = m.counts[to_string(CaseKind::APlusP)];
    const std::size_t po = m.counts[to_string(CaseKind::POnly)];
    const std::size_t ao = m.counts[to_string(CaseKind::AOnly)];
    const bool ok = ap == 51 && po == 384 && ao == 194 && m.environments.size() == 25;
    out << "curated totals 51/384/194 in 25 environments: " << (ok ? "match" : "MISMATCH")
        << '\n';
    if (!ok) return kExitData;  // the loader would refuse the rewritten manifest
  }
  write_file(o.dataset / "manifest.json", encode_manifest(m));
  return kExitOk;
}

int cmd_evaluate(const EvaluateOptions& o, std::ostream& out) {
  const std::vector<Method> methods = parse_methods(o.methods);
  LocalizerParams params;
  if (!o.params_path.empty()) params = localizer_params_from_json(parse_json_file(o.params_path, true));
  params.validate();
  const std::vector<double> grid = o.tau_grid.empty() ? default_tau_grid() : o.tau_grid;
  validate_tau_grid(grid);
  o.scale.validate();
  if (!(o.val_fraction > 0.0 && o.val_fraction < 1.0)) {
    throw ValidationError("--val-fraction must lie in (0, 1)");
  }
  if (!(o.rho > 0.0 && o.rho <= 1.0)) throw ValidationError("--rho must lie in (0, 1]");
  if (!(o.kappa > 0.0)) throw ValidationError("--kappa must be positive");
  if (o.out.empty()) throw ValidationError("--out is required");

  const Json raw = parse_json_file(o.dataset / "manifest.json", false);
  const Dataset ds = load_dataset(o.dataset);
  require_labels(ds.manifest);
  const ResolvedAmbiguity amb =
      resolve_ambiguity(raw.contains("ambiguity") ? &raw["ambiguity"] : nullptr, {});
  if (ds.cases.empty()) throw DataError("dataset has no cases");

  const Split split = split_cases(ds.cases, o.val_fraction, o.split_seed);
  std::vector<PreparedCase> prepared;
  prepared.reserve(ds.cases.size());
  for (const TestCase& tc : ds.cases) prepared.push_back(prepare_case(tc));

  std::vector<std::string> names;
  std::vector<std::vector<SweepPoint>> sweeps;
  std::vector<MethodOperatingPoints> points;
  std::vector<std::vector<CaseOutcome>> outcomes;
  std::vector<std::string> selection_notes;
  for (Method method : methods) {
    const std::string name = method_name(method);
    std::vector<CaseOutcome> oc;
    oc.reserve(prepared.size());
    for (PreparedCase& pc : prepared) oc.push_back(case_outcome(pc, method, params, o.scale));
    std::vector<CaseOutcome> val;
    for (std::size_t i : split.validation) val.push_back(oc[i]);
    const auto full = sweep_outcomes(oc, grid);
    const auto vsweep = sweep_outcomes(val, grid);
    MethodOperatingPoints mp{name, std::nullopt, std::nullopt};
    try {
      mp.at_rho = select_and_apply(vsweep, full, OperatingKind::AoAtRho, o.rho);
    } catch (const ValidationError& e) {
      selection_notes.push_back(name + ": " + e.what());
    }
    mp.at_max = select_and_apply(vsweep, full, OperatingKind::BlaMax);
    names.push_back(name);
    sweeps.push_back(full);
    points.push_back(mp);
    outcomes.push_back(std::move(oc));
  }
  // the published reference rows exist only at rho = 0.9
  const bool with_refs = std::abs(o.rho - 0.9) < 1e-12;
  ResultsTable table =
      render_results_table(points, with_refs ? reference_rows() : std::vector<TableRow>{}, o.rho);
  for (const auto& n : selection_notes) table.warnings.push_back(n);
  if (!with_refs) table.warnings.push_back("reference rows are published at rho 0.9 only; omitted");

  fs::create_directories(o.out);
  const std::pair<const char*, SweepColumn> columns[] = {{"sweep_AP.csv", SweepColumn::AP},
                                                         {"sweep_PO.csv", SweepColumn::PO},
                                                         {"sweep_AO.csv", SweepColumn::AO},
                                                         {"sweep_BLA.csv", SweepColumn::BLA}};
  for (const auto& [file, col] : columns) write_file(o.out / file, sweep_csv(names, sweeps, col));

  Json prov{{"ambiguity", amb.json()},
            {"dataset", ds.manifest.name},
            {"epsilon", o.scale.epsilon},
            {"d", o.scale.d},
            {"kappa", o.kappa},
            {"methods", names},
            {"params", to_json(params)},
            {"rho", o.rho},
            {"route_estimator", ds.manifest.route_estimator},
            {"split_seed", o.split_seed},
            {"tau_grid_points", grid.size()},
            {"validation_cases", split.validation.size()},
            {"evaluation_cases", ds.cases.size()},
            {"val_fraction", o.val_fraction}};

  std::ostringstream txt;
  txt << "dataset " << ds.manifest.name << ": " << ds.cases.size() << " cases, "
      << split.validation.size() << " for threshold selection (seed " << o.split_seed << ")\n"
      << amb.describe() << '\n'
      << "scale: d=" << fmt(o.scale.d) << " epsilon=" << fmt(o.scale.epsilon) << "; tau grid "
      << grid.size() << " points\n\n"
      << table_text(table);
  write_file(o.out / "results.txt", txt.str());
  write_file(o.out / "results.csv", table_csv(table));

  Json per_method = Json::object();
  for (const auto& mp : points) {
    per_method[mp.method] = Json{{"at_max", operating_json(mp.at_max)},
                                 {"at_rho", operating_json(mp.at_rho)}};
  }
  write_file(o.out / "results.json",
             Json{{"methods", per_method}, {"provenance", prov}, {"warnings", table.warnings}}
                     .dump(2) +
                 "\n");

  std::ostringstream cases;
  cases << "case_id,environment,label,method,proposal_node,score,correct_if_accepted,novel,"
           "route_error,success_at_bla_max\n";
  for (std::size_t m = 0; m < names.size(); ++m) {
    const double tau = points[m].at_max->chosen_tau;
    for (std::size_t i = 0; i < ds.cases.size(); ++i) {
      const CaseOutcome& c = outcomes[m][i];
      cases << ds.cases[i].id << ',' << ds.cases[i].environment << ',' << to_string(c.label) << ','
            << names[m] << ',' << (c.proposal.node ? std::to_string(*c.proposal.node) : "") << ','
            << fmt(c.proposal.score) << ',' << (c.correct_if_accepted ? 1 : 0) << ','
            << (c.novel ? 1 : 0) << ',' << (c.route_error ? fmt(*c.route_error) : "") << ','
            << (outcome_success(c, tau) ? 1 : 0) << '\n';
    }
  }
  write_file(o.out / "cases.csv", cases.str());

  bool all_certified = true;
  if (o.consistency) {
    // Grow each environment's map from its own mapping run with the method
    // deciding loop closures at its BLA_max threshold.
    Json runs = Json::array();
    for (const ManifestEnvironment& env : ds.manifest.environments) {
      const TestCase* first = nullptr;
      for (const TestCase& tc : ds.cases) {
        if (tc.environment == env.name) {
          first = &tc;
          break;
        }
      }
      if (!first || !first->map->has_descriptors()) continue;
      const Sequence& map = *first->map;
      UpdatePolicyParams pp;
      pp.spatial_threshold = min_traversal_gap(map);
      if (!(pp.spatial_threshold > 0.0)) continue;
      pp.kappa = o.kappa;
      for (std::size_t m = 0; m < names.size(); ++m) {
        const double tau = points[m].at_max->chosen_tau;
        pp.accept_threshold = tau;
        LocalizerDecisionSource src(methods[m], params, tau, pp.candidate_count);
        const HarnessTrace t = run_growth_invariant_harness(map, src, *first->route, pp, o.scale);
        const ConsistencyReport& last = t.steps.back().report;
        all_certified = all_certified && t.certified;
        runs.push_back(Json{{"certified", t.certified},
                            {"edges", t.final_state.map.edge_count()},
                            {"environment", env.name},
                            {"final_precision", last.precision.value},
                            {"final_recall", last.recall.value},
                            {"first_break", t.first_break ? Json(*t.first_break) : Json(nullptr)},
                            {"hypothesis_holds", t.hypothesis_holds},
                            {"irregular_edges", t.irregular_edges},
                            {"method", names[m]},
                            {"nodes", t.final_state.map.node_count()},
                            {"note", t.note},
                            {"steps", t.steps.size()},
                            {"tau", tau}});
      }
    }
    write_file(o.out / "consistency.json",
               Json{{"provenance", prov}, {"runs", runs}}.dump(2) + "\n");
  }

  out << txt.str() << "wrote sweeps, results, cases"
      << (o.consistency ? " and consistency reports" : "") << " to " << o.out.string() << '\n';
  if (o.consistency && !all_certified) {
    out << "note: some growth runs broke edge precision or recall; see consistency.json\n";
  }
  return kExitOk;
}

namespace {

WorldSpec default_invariant_world() {
  WorldSpec s;
  s.layout = "loop";
  s.segment_count = 8;
  s.segment_steps = 6;
  s.spur_count = 3;
  s.descriptor_dim = 16;
  return s;
}

void print_step(std::ostream& out, const HarnessStep& s) {
  out << "  step " << s.step << " frame " << s.frame << ": " << describe(s.decision);
  if (s.added_edge) out << ", edge " << s.added_edge->u << "-" << s.added_edge->v;
  out << ", precision " << fmt(s.report.precision.value) << ", recall "
      << fmt(s.report.recall.value) << ", n " << s.report.n << '\n';
  auto show = [&](const char* what, const PropertyResult& r) {
    for (std::size_t i = 0; i < r.violations.size() && i < 3; ++i) {
      const PairViolation& v = r.violations[i];
      out << "    " << what << " violation: nodes " << v.pair.u << "-" << v.pair.v << ", hops "
          << (v.hops ? std::to_string(*v.hops) : "inf") << ", route "
          << (v.route ? fmt(*v.route) : "?") << '\n';
    }
  };
  show("precision", s.report.precision);
  show("recall", s.report.recall);
}

}  // namespace

int cmd_invariants(const InvariantsOptions& o, std::ostream& out) {
  const WorldSpec base =
      o.world_path.empty() ? default_invariant_world()
                           : world_spec_from_json(parse_json_file(o.world_path, true));
  base.validate();
  o.scale.validate();
  if (o.worlds == 0 || o.frames < 2) throw ValidationError("need at least one world and two frames");
  UpdatePolicyParams pp;
  pp.kappa = o.kappa;
  pp.spatial_threshold = base.frame_spacing;
  pp.validate();

  const Rng root(o.seed);
  Json traces = Json::array();
  std::size_t certified = 0;
  for (std::size_t w = 0; w < o.worlds; ++w) {
    WorldSpec spec = base;
    spec.seed = o.seed + w;
    const auto world = generate_world(spec);
    Rng rng = root.fork(w);
    const auto walk = world->random_walk(o.frames, rng);
    const Sequence seq = world->sequence_along(walk, spec.noise_sigma, rng, SequenceRole::Map);
    const WorldRouteMetric metric(world);
    OracleDecisionSource oracle(metric, 0.5 * spec.frame_spacing);
    std::optional<FaultInjectionSource> faulty;
    if (o.inject_fault) faulty.emplace(oracle, metric, *o.inject_fault);
    DecisionSource& src = faulty ? static_cast<DecisionSource&>(*faulty) : oracle;
    const HarnessTrace t = run_growth_invariant_harness(seq, src, metric, pp, o.scale);
    certified += t.certified;

    out << "world " << w << " (seed " << spec.seed << "): " << t.steps.size() << " steps, "
        << t.final_state.map.node_count() << " nodes, " << t.final_state.map.edge_count()
        << " edges: ";
    if (!t.hypothesis_holds) {
      out << "certification refused\n  " << t.note << '\n';
      for (const HarnessStep& s : t.steps) print_step(out, s);
    } else if (t.first_break) {
      out << "VIOLATION at step " << *t.first_break << '\n';
      print_step(out, t.steps.at(*t.first_break));
    } else {
      out << "precision = recall = 1 at every step\n";
    }
    Json steps = Json::array();
    for (const HarnessStep& s : t.steps) {
      steps.push_back(Json{{"decision", describe(s.decision)},
                           {"frame", s.frame},
                           {"n", s.report.n},
                           {"precision", s.report.precision.value},
                           {"precision_violations", s.report.precision.violations.size()},
                           {"recall", s.report.recall.value},
                           {"recall_violations", s.report.recall.violations.size()},
                           {"step", s.step}});
    }
    traces.push_back(Json{{"certified", t.certified},
                          {"first_break", t.first_break ? Json(*t.first_break) : Json(nullptr)},
                          {"hypothesis_holds", t.hypothesis_holds},
                          {"note", t.note},
                          {"seed", spec.seed},
                          {"steps", steps}});
  }
  out << certified << "/" << o.worlds << " worlds certified (d=" << fmt(o.scale.d)
      << ", epsilon=" << fmt(o.scale.epsilon) << ", kappa=" << fmt(o.kappa) << ")\n";
  if (!o.out.empty()) {
    write_file(o.out, Json{{"d", o.scale.d},
                           {"epsilon", o.scale.epsilon},
                           {"kappa", o.kappa},
                           {"worlds", traces}}
                              .dump(2) +
                          "\n");
  }
  return certified == o.worlds ? kExitOk : kExitInvariant;
}

int cmd_report(const ReportOptions& o, std::ostream& out) {
  const Json raw = parse_json_file(o.dataset / "manifest.json", false);
  const Manifest m = manifest_from_json(raw);
  const ResolvedAmbiguity amb =
      resolve_ambiguity(raw.contains("ambiguity") ? &raw["ambiguity"] : nullptr, {});
  out << "dataset " << m.name << " (schema " << m.schema_version << ", routes "
      << m.route_estimator << "): " << m.cases.size() << " cases\n"
      << amb.describe() << '\n'
      << counts_table(count_by_environment(m)) << '\n';

  out << "curated benchmark reference counts:\n";
  char line[160];
  std::snprintf(line, sizeof line, "%-16s %4s %-5s %6s %6s %6s\n", "dataset", "envs", "type",
                "A+P", "P.O.", "A.O.");
  out << line;
  for (const CuratedRow& r : curated_counts()) {
    std::snprintf(line, sizeof line, "%-16s %4zu %-5s %6zu %6zu %6zu\n", r.dataset.c_str(),
                  r.environments, r.type.c_str(), r.ap, r.po, r.ao);
    out << line;
  }
  out << '\n';
  if (!o.results.empty()) {
    out << "results (" << o.results.string() << "):\n" << read_file(o.results / "results.txt") << '\n';
  }
  out << "published results:\n" << table_text(render_results_table({}, published_rows(), 0.9));
  return kExitOk;
}

}  // namespace topobench
