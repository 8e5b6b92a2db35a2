#include <set>

#include "topobench/core/error.hpp"
#include "topobench/io.hpp"

namespace topobench {

namespace {

const CaseKind kAllKinds[] = {CaseKind::APlusP, CaseKind::POnly, CaseKind::AOnly,
                              CaseKind::NovelClean};

Json ref_json(const SequenceRef& r) {
  Json j{{"trajectory", r.trajectory}};
  if (!r.descriptors.empty()) j["descriptors"] = r.descriptors;
  return j;
}

SequenceRef ref_from_json(const Json& j, const std::string& where) {
  if (!j.is_object()) throw DataError(where + ": expected an object");
  check_keys(j, {"descriptors", "trajectory"}, where);
  SequenceRef r;
  if (!j.contains("trajectory") || !j["trajectory"].is_string() ||
      j["trajectory"].get<std::string>().empty()) {
    throw DataError(where + ".trajectory: missing");
  }
  r.trajectory = j["trajectory"].get<std::string>();
  if (j.contains("descriptors")) {
    if (!j["descriptors"].is_string()) throw DataError(where + ".descriptors: expected a string");
    r.descriptors = j["descriptors"].get<std::string>();
  }
  return r;
}

std::optional<CaseKind> label_from_json(const Json& j, const std::string& where) {
  if (j.is_null()) return std::nullopt;
  if (!j.is_string()) throw DataError(where + ": expected a label string or null");
  return parse_case_kind(j.get<std::string>());
}

Json label_json(const std::optional<CaseKind>& k) {
  return k ? Json(to_string(*k)) : Json(nullptr);
}

std::string get_string(const Json& j, const char* key, const std::string& where, bool required) {
  auto it = j.find(key);
  if (it == j.end()) {
    if (required) throw DataError(where + "." + key + ": missing");
    return {};
  }
  if (!it->is_string()) throw DataError(where + "." + key + ": expected a string");
  return it->get<std::string>();
}

}  // namespace

void Manifest::recount() {
  counts.clear();
  for (CaseKind k : kAllKinds) counts[to_string(k)] = 0;
  for (const ManifestCase& c : cases) {
    if (c.label) ++counts[to_string(*c.label)];
  }
}

Json evidence_json(const CaseLabel& l) {
  auto opt = [](const auto& v) { return v ? Json(*v) : Json(nullptr); };
  return Json{{"best_similarity", l.best_similarity},
              {"best_start", l.best_start},
              {"ratio", opt(l.ratio)},
              {"true_similarity", opt(l.true_similarity)},
              {"true_start", opt(l.true_start)}};
}

Json to_json(const Manifest& m) {
  Json envs = Json::array();
  for (const ManifestEnvironment& e : m.environments) {
    Json ej{{"name", e.name}, {"type", e.type}};
    if (!e.world_ref.empty()) ej["world_ref"] = e.world_ref;
    envs.push_back(std::move(ej));
  }
  Json cases = Json::array();
  for (const ManifestCase& c : m.cases) {
    Json cj{{"align_radius", c.align_radius},
            {"case_id", c.case_id},
            {"environment", c.environment},
            {"evidence", c.evidence},
            {"intended_label", label_json(c.intended_label)},
            {"label", label_json(c.label)},
            {"map_ref", ref_json(c.map_ref)},
            {"params", to_json(c.params)},
            {"test_ref", ref_json(c.test_ref)}};
    if (!c.similarity_ref.empty()) cj["similarity_ref"] = c.similarity_ref;
    cases.push_back(std::move(cj));
  }
  Json counts = Json::object();
  for (const auto& [k, v] : m.counts) counts[k] = v;
  return Json{{"ambiguity", to_json(m.ambiguity)},
              {"cases", cases},
              {"counts", counts},
              {"environments", envs},
              {"name", m.name},
              {"route_estimator", m.route_estimator},
              {"schema_version", m.schema_version}};
}

Manifest manifest_from_json(const Json& j) {
  if (!j.is_object()) throw DataError("manifest: expected an object");
  check_keys(j,
             {"ambiguity", "cases", "counts", "environments", "name", "route_estimator",
              "schema_version"},
             "manifest");
  Manifest m;
  if (!j.contains("schema_version") || !j["schema_version"].is_number_integer()) {
    throw DataError("manifest.schema_version: missing");
  }
  m.schema_version = j["schema_version"].get<int>();
  if (m.schema_version != kManifestSchema) {
    throw DataError("manifest.schema_version: unsupported version " +
                    std::to_string(m.schema_version));
  }
  m.name = get_string(j, "name", "manifest", false);
  m.route_estimator = get_string(j, "route_estimator", "manifest", false);
  if (m.route_estimator.empty()) m.route_estimator = "traversal";
  if (m.route_estimator != "traversal" && m.route_estimator != "world_graph") {
    throw DataError("manifest.route_estimator: expected traversal or world_graph");
  }
  if (j.contains("ambiguity")) m.ambiguity = ambiguity_from_json(j["ambiguity"]);

  std::set<std::string> env_names;
  if (j.contains("environments")) {
    const Json& envs = j["environments"];
    if (!envs.is_array()) throw DataError("manifest.environments: expected an array");
    for (std::size_t i = 0; i < envs.size(); ++i) {
      const std::string w = "manifest.environments[" + std::to_string(i) + "]";
      if (!envs[i].is_object()) throw DataError(w + ": expected an object");
      check_keys(envs[i], {"name", "type", "world_ref"}, w);
      ManifestEnvironment e;
      e.name = get_string(envs[i], "name", w, true);
      e.type = get_string(envs[i], "type", w, true);
      e.world_ref = get_string(envs[i], "world_ref", w, false);
      if (e.type != "indoor" && e.type != "outdoor") {
        throw DataError(w + ".type: expected indoor or outdoor");
      }
      if (!env_names.insert(e.name).second) throw DataError(w + ": duplicate name " + e.name);
      m.environments.push_back(e);
    }
  }

  std::set<std::string> ids;
  if (j.contains("cases")) {
    const Json& cases = j["cases"];
    if (!cases.is_array()) throw DataError("manifest.cases: expected an array");
    for (std::size_t i = 0; i < cases.size(); ++i) {
      const std::string w = "manifest.cases[" + std::to_string(i) + "]";
      const Json& cj = cases[i];
      if (!cj.is_object()) throw DataError(w + ": expected an object");
      check_keys(cj,
                 {"align_radius", "case_id", "environment", "evidence", "intended_label", "label",
                  "map_ref", "params", "similarity_ref", "test_ref"},
                 w);
      ManifestCase c;
      c.case_id = get_string(cj, "case_id", w, true);
      if (!ids.insert(c.case_id).second) throw DataError(w + ": duplicate case_id " + c.case_id);
      c.environment = get_string(cj, "environment", w, true);
      if (!env_names.count(c.environment)) {
        throw DataError(w + ".environment: unknown environment '" + c.environment + "'");
      }
      if (cj.contains("label")) c.label = label_from_json(cj["label"], w + ".label");
      if (cj.contains("intended_label")) {
        c.intended_label = label_from_json(cj["intended_label"], w + ".intended_label");
      }
      if (!cj.contains("map_ref")) throw DataError(w + ".map_ref: missing");
      if (!cj.contains("test_ref")) throw DataError(w + ".test_ref: missing");
      c.map_ref = ref_from_json(cj["map_ref"], w + ".map_ref");
      c.test_ref = ref_from_json(cj["test_ref"], w + ".test_ref");
      c.similarity_ref = get_string(cj, "similarity_ref", w, false);
      if (cj.contains("align_radius")) {
        if (!cj["align_radius"].is_number() || !(cj["align_radius"].get<double>() > 0.0)) {
          throw DataError(w + ".align_radius: expected a positive number");
        }
        c.align_radius = cj["align_radius"].get<double>();
      }
      c.params = cj.contains("params") ? ambiguity_from_json(cj["params"]) : m.ambiguity;
      if (cj.contains("evidence")) c.evidence = cj["evidence"];
      m.cases.push_back(std::move(c));
    }
  }

  if (!j.contains("counts") || !j["counts"].is_object()) throw DataError("manifest.counts: missing");
  Manifest expected = m;
  expected.recount();
  for (auto it = j["counts"].begin(); it != j["counts"].end(); ++it) {
    parse_case_kind(it.key());
    if (!it->is_number_integer() || (!it->is_number_unsigned() && it->get<std::int64_t>() < 0)) {
      throw DataError("manifest.counts." + it.key() + ": expected a non-negative integer");
    }
    m.counts[it.key()] = it->get<std::size_t>();
  }
  for (const auto& [k, v] : expected.counts) {
    const std::size_t declared = m.counts.count(k) ? m.counts[k] : 0;
    if (declared != v) {
      throw DataError("manifest.counts." + k + ": declares " + std::to_string(declared) +
                      " but the cases hold " + std::to_string(v));
    }
  }
  m.counts = expected.counts;

  if (m.name == kCuratedName) {
    const std::size_t ap = m.counts[to_string(CaseKind::APlusP)];
    const std::size_t po = m.counts[to_string(CaseKind::POnly)];
    const std::size_t ao = m.counts[to_string(CaseKind::AOnly)];
    if (ap != 51 || po != 384 || ao != 194 || m.environments.size() != 25) {
      throw DataError("manifest: curated benchmark must hold 51/384/194 cases in 25 "
                      "environments, found " + std::to_string(ap) + "/" + std::to_string(po) +
                      "/" + std::to_string(ao) + " in " + std::to_string(m.environments.size()));
    }
  }
  return m;
}

std::string encode_manifest(const Manifest& m) { return to_json(m).dump(2) + "\n"; }

Manifest decode_manifest(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(std::string("manifest: ") + e.what());
  }
  try {
    return manifest_from_json(j);
  } catch (const ValidationError& e) {
    throw DataError(std::string("manifest: ") + e.what());
  }
}

}  // namespace topobench
