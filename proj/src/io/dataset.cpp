#include <cstdio>
#include <sstream>

#include "topobench/core/error.hpp"
#include "topobench/io.hpp"

namespace topobench {

namespace {

fs::path resolve(const fs::path& root, const std::string& ref, const std::string& what) {
  const fs::path p = root / ref;
  if (!fs::is_regular_file(p)) throw DataError(what + ": missing file " + p.string());
  return p;
}

std::shared_ptr<const Sequence> load_sequence(const fs::path& root, const SequenceRef& ref,
                                              SequenceRole role, const std::string& what) {
  Sequence s = decode_trajectory(read_file(resolve(root, ref.trajectory, what)));
  s.role = role;
  if (!ref.descriptors.empty()) {
    attach_descriptors(s, decode_matrix(read_file(resolve(root, ref.descriptors, what))));
  }
  s.validate(1e-5);
  return std::make_shared<const Sequence>(std::move(s));
}

}  // namespace

Dataset load_dataset(const fs::path& root) {
  Dataset ds;
  ds.root = root;
  ds.manifest = decode_manifest(read_file(root / "manifest.json"));
  const Manifest& m = ds.manifest;

  const bool world_graph = m.route_estimator == "world_graph";
  std::map<std::string, std::shared_ptr<const RouteMetric>> env_route;
  for (const ManifestEnvironment& e : m.environments) {
    if (!e.world_ref.empty()) {
      const std::string text = read_file(resolve(root, e.world_ref, "environment " + e.name));
      Json j;
      try {
        j = Json::parse(text);
      } catch (const nlohmann::json::parse_error& err) {
        throw DataError(e.world_ref + ": " + err.what());
      }
      try {
        ds.worlds[e.name] = generate_world(world_spec_from_json(j));
      } catch (const ValidationError& err) {
        throw DataError(e.world_ref + ": " + err.what());
      }
    }
    if (world_graph) {
      auto it = ds.worlds.find(e.name);
      if (it == ds.worlds.end()) {
        throw DataError("environment " + e.name + ": world_graph routes need a world_ref");
      }
      env_route[e.name] = std::make_shared<WorldRouteMetric>(it->second);
    } else {
      env_route[e.name] = std::make_shared<TraversalRouteMetric>();
    }
  }

  std::map<std::string, std::shared_ptr<const Sequence>> maps;
  for (const ManifestCase& c : m.cases) {
    const std::string what = "case " + c.case_id;
    const std::string key = c.map_ref.trajectory + "|" + c.map_ref.descriptors;
    auto& map = maps[key];
    if (!map) map = load_sequence(root, c.map_ref, SequenceRole::Map, what);
    auto test = load_sequence(root, c.test_ref, SequenceRole::Test, what);

    TestCase tc;
    tc.id = c.case_id;
    tc.environment = c.environment;
    tc.map = map;
    tc.test = test;
    tc.correspondence = build_correspondence(*test, *map, c.align_radius);
    tc.label = c.label.value_or(CaseKind::NovelClean);
    tc.intended_label = c.intended_label;
    tc.seq_len = c.params.seq_len;
    tc.route = env_route.at(c.environment);
    if (!c.similarity_ref.empty()) {
      auto sim = std::make_shared<SimilarityMatrix>(
          to_similarity(decode_matrix(read_file(resolve(root, c.similarity_ref, what)))));
      if (sim->query_count() != test->size() || sim->ref_count() != map->size()) {
        throw DataError(what + ": similarity matrix shape does not match the sequences");
      }
      tc.similarity = sim;
    } else if (!test->has_descriptors() || !map->has_descriptors()) {
      throw DataError(what + ": needs descriptors or a similarity matrix");
    }
    ds.cases.push_back(std::move(tc));
  }
  return ds;
}

Manifest write_benchmark(const GeneratedBenchmark& b, const fs::path& out) {
  Manifest m;
  m.name = b.spec.name;
  m.ambiguity = b.spec.ambiguity;
  m.route_estimator = "world_graph";
  std::map<std::string, SequenceRef> map_refs;
  for (const GeneratedEnvironment& e : b.environments) {
    const std::string dir = "environments/" + e.spec.name + "/";
    ManifestEnvironment me{e.spec.name, e.spec.type, dir + "world.json"};
    write_file(out / me.world_ref, to_json(e.world_spec).dump(2) + "\n");
    SequenceRef r{dir + "map.csv", dir + "map.tbds"};
    write_file(out / r.trajectory, encode_trajectory(*e.map));
    write_file(out / r.descriptors, encode_matrix(descriptor_matrix(*e.map)));
    map_refs[e.spec.name] = r;
    m.environments.push_back(me);
  }
  for (std::size_t i = 0; i < b.cases.size(); ++i) {
    const TestCase& tc = b.cases[i];
    const GeneratedCase& gc = b.generated[i];
    const std::string dir = "cases/" + tc.id + "/";
    ManifestCase c;
    c.case_id = tc.id;
    c.environment = tc.environment;
    c.label = tc.label;
    c.intended_label = tc.intended_label;
    c.map_ref = map_refs.at(tc.environment);
    c.test_ref = SequenceRef{dir + "test.csv", dir + "test.tbds"};
    write_file(out / c.test_ref.trajectory, encode_trajectory(*tc.test));
    write_file(out / c.test_ref.descriptors, encode_matrix(descriptor_matrix(*tc.test)));
    c.align_radius = tc.correspondence.align_radius;
    c.params = b.spec.ambiguity;
    c.evidence = evidence_json(gc.measured);
    c.evidence["design"] = Json{{"attempts", gc.attempts},
                                {"loop_closure", gc.loop_closure},
                                {"margin", gc.margin},
                                {"segment", gc.segment},
                                {"value", gc.evidence}};
    m.cases.push_back(std::move(c));
  }
  m.recount();
  write_file(out / "manifest.json", encode_manifest(m));
  return m;
}

std::vector<EnvironmentCounts> count_by_environment(const Manifest& m) {
  std::vector<EnvironmentCounts> rows;
  std::map<std::string, std::size_t> at;
  for (const ManifestEnvironment& e : m.environments) {
    at[e.name] = rows.size();
    rows.push_back(EnvironmentCounts{e.name, e.type});
  }
  for (const ManifestCase& c : m.cases) {
    if (!c.label) continue;
    EnvironmentCounts& r = rows[at.at(c.environment)];
    switch (*c.label) {
      case CaseKind::APlusP: ++r.ap; break;
      case CaseKind::POnly: ++r.po; break;
      case CaseKind::AOnly: ++r.ao; break;
      case CaseKind::NovelClean: ++r.novel; break;
    }
  }
  return rows;
}

std::string counts_table(const std::vector<EnvironmentCounts>& rows) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof line, "%-20s %-5s %6s %6s %6s %6s\n", "environment", "type", "A+P",
                "P.O.", "A.O.", "novel");
  os << line;
  EnvironmentCounts total{"Total", "--"};
  std::size_t indoor = 0;
  for (const EnvironmentCounts& r : rows) {
    std::snprintf(line, sizeof line, "%-20s %-5s %6zu %6zu %6zu %6zu\n", r.name.c_str(),
                  r.type == "indoor" ? "In." : "Out.", r.ap, r.po, r.ao, r.novel);
    os << line;
    total.ap += r.ap;
    total.po += r.po;
    total.ao += r.ao;
    total.novel += r.novel;
    indoor += r.type == "indoor";
  }
  std::snprintf(line, sizeof line, "%-20s %-5s %6zu %6zu %6zu %6zu\n", "Total", "--", total.ap,
                total.po, total.ao, total.novel);
  os << line;
  os << "environments: " << rows.size() << " (" << indoor << " indoor, " << rows.size() - indoor
     << " outdoor)\n";
  return os.str();
}

std::vector<CuratedRow> curated_counts() {
  return {{"OpenLORIS-Scene", 5, "In.", 30, 74, 52}, {"Oxford RobotCar", 1, "Out.", 0, 116, 0},
          {"Rawseeds", 1, "In.", 16, 90, 14},        {"Habitat", 16, "In.", 0, 74, 3},
          {"RELLIS-3D", 1, "Out.", 0, 0, 117},       {"ROVER", 1, "Out.", 5, 30, 8}};
}

}  // namespace topobench
