#include <algorithm>
#include <type_traits>

#include "topobench/core/error.hpp"
#include "topobench/io.hpp"

namespace topobench {

namespace {

template <typename T>
void read(const Json& j, const char* key, T& out, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) return;
  if constexpr (std::is_integral_v<T> && std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
    if (!it->is_number_integer() || (!it->is_number_unsigned() && it->get<std::int64_t>() < 0)) {
      throw ValidationError(where + "." + key + ": expected a non-negative integer");
    }
  }
  try {
    out = it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ValidationError(where + "." + key + ": wrong type (" + std::string(it->type_name()) +
                          ")");
  }
}

void require_object(const Json& j, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + ": expected an object");
}

// Re-raise validation failures with the owning object in front.
template <typename F>
void validated(const std::string& where, F&& f) {
  try {
    f();
  } catch (const ValidationError& e) {
    throw ValidationError(where + ": " + e.what());
  }
}

Json noise_json(const NoiseRange& r) { return Json{{"hi", r.hi}, {"lo", r.lo}}; }

NoiseRange noise_from_json(const Json& j, NoiseRange base, const std::string& where) {
  require_object(j, where);
  check_keys(j, {"hi", "lo"}, where);
  read(j, "lo", base.lo, where);
  read(j, "hi", base.hi, where);
  return base;
}

}  // namespace

void check_keys(const Json& j, const std::vector<std::string>& allowed, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
      throw ValidationError(where + ": unknown field '" + it.key() + "'");
    }
  }
}

Json to_json(const AmbiguityParams& p) {
  return Json{{"alpha", p.alpha},
              {"exclusion_fraction", p.exclusion_fraction},
              {"seq_len", p.seq_len},
              {"tau", p.tau}};
}

AmbiguityParams ambiguity_from_json(const Json& j, AmbiguityParams base) {
  const std::string w = "ambiguity";
  require_object(j, w);
  check_keys(j, {"alpha", "exclusion_fraction", "seq_len", "tau"}, w);
  read(j, "alpha", base.alpha, w);
  read(j, "exclusion_fraction", base.exclusion_fraction, w);
  read(j, "seq_len", base.seq_len, w);
  read(j, "tau", base.tau, w);
  validated(w, [&] { base.validate(); });
  return base;
}

Json to_json(const WorldSpec& s) {
  Json verts = Json::array();
  for (const Position& p : s.vertices) verts.push_back(Json::array({p.x, p.y}));
  Json segs = Json::array();
  for (const SegmentDef& d : s.segments) {
    segs.push_back(Json{{"from", d.from}, {"steps", d.steps}, {"to", d.to}});
  }
  Json route = Json::array();
  for (const MapLeg& l : s.map_route) {
    route.push_back(Json{{"forward", l.forward}, {"segment", l.segment}});
  }
  return Json{{"alias_groups", s.alias_groups},
              {"descriptor_dim", s.descriptor_dim},
              {"frame_spacing", s.frame_spacing},
              {"grid_cols", s.grid_cols},
              {"grid_rows", s.grid_rows},
              {"layout", s.layout},
              {"map_route", route},
              {"noise_sigma", s.noise_sigma},
              {"seed", s.seed},
              {"segment_count", s.segment_count},
              {"segment_steps", s.segment_steps},
              {"segments", segs},
              {"spur_count", s.spur_count},
              {"vertices", verts}};
}

WorldSpec world_spec_from_json(const Json& j) {
  const std::string w = "world";
  require_object(j, w);
  check_keys(j,
             {"alias_groups", "descriptor_dim", "frame_spacing", "grid_cols", "grid_rows",
              "layout", "map_route", "noise_sigma", "seed", "segment_count", "segment_steps",
              "segments", "spur_count", "vertices"},
             w);
  WorldSpec s;
  read(j, "layout", s.layout, w);
  read(j, "segment_count", s.segment_count, w);
  read(j, "grid_rows", s.grid_rows, w);
  read(j, "grid_cols", s.grid_cols, w);
  read(j, "segment_steps", s.segment_steps, w);
  read(j, "spur_count", s.spur_count, w);
  read(j, "frame_spacing", s.frame_spacing, w);
  read(j, "descriptor_dim", s.descriptor_dim, w);
  read(j, "alias_groups", s.alias_groups, w);
  read(j, "noise_sigma", s.noise_sigma, w);
  read(j, "seed", s.seed, w);
  if (auto it = j.find("vertices"); it != j.end()) {
    if (!it->is_array()) throw ValidationError("world.vertices: expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const Json& v = (*it)[i];
      const std::string vw = "world.vertices[" + std::to_string(i) + "]";
      if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
        throw ValidationError(vw + ": expected [x, y]");
      }
      s.vertices.push_back(Position{v[0].get<double>(), v[1].get<double>(), 0.0});
    }
  }
  if (auto it = j.find("segments"); it != j.end()) {
    if (!it->is_array()) throw ValidationError("world.segments: expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string sw = "world.segments[" + std::to_string(i) + "]";
      require_object((*it)[i], sw);
      check_keys((*it)[i], {"from", "steps", "to"}, sw);
      SegmentDef d;
      read((*it)[i], "from", d.from, sw);
      read((*it)[i], "to", d.to, sw);
      read((*it)[i], "steps", d.steps, sw);
      s.segments.push_back(d);
    }
  }
  if (auto it = j.find("map_route"); it != j.end()) {
    if (!it->is_array()) throw ValidationError("world.map_route: expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string rw = "world.map_route[" + std::to_string(i) + "]";
      require_object((*it)[i], rw);
      check_keys((*it)[i], {"forward", "segment"}, rw);
      MapLeg l;
      read((*it)[i], "segment", l.segment, rw);
      read((*it)[i], "forward", l.forward, rw);
      s.map_route.push_back(l);
    }
  }
  validated(w, [&] { s.validate(); });
  return s;
}

Json to_json(const BenchmarkSpec& b) {
  Json envs = Json::array();
  for (const EnvironmentSpec& e : b.environments) {
    envs.push_back(Json{{"count_ao", e.count_ao},
                        {"count_ap", e.count_ap},
                        {"count_po", e.count_po},
                        {"name", e.name},
                        {"ring_segments", e.ring_segments},
                        {"spurs", e.spurs},
                        {"twin_pairs", e.twin_pairs},
                        {"type", e.type}});
  }
  return Json{{"aliased_noise", noise_json(b.aliased_noise)},
              {"align_radius", b.align_radius},
              {"ambiguity", to_json(b.ambiguity)},
              {"descriptor_dim", b.descriptor_dim},
              {"environments", envs},
              {"frame_spacing", b.frame_spacing},
              {"loop_closure_fraction", b.loop_closure_fraction},
              {"map_noise", b.map_noise},
              {"margin", b.margin},
              {"name", b.name},
              {"revisit_noise", noise_json(b.revisit_noise)},
              {"seed", b.seed},
              {"segment_steps", b.segment_steps},
              {"test_length", b.test_length}};
}

BenchmarkSpec benchmark_spec_from_json(const Json& j) {
  const std::string w = "benchmark";
  require_object(j, w);
  check_keys(j,
             {"aliased_noise", "align_radius", "ambiguity", "descriptor_dim", "environments",
              "frame_spacing", "loop_closure_fraction", "map_noise", "margin", "name",
              "revisit_noise", "seed", "segment_steps", "test_length"},
             w);
  BenchmarkSpec b;
  read(j, "name", b.name, w);
  read(j, "seed", b.seed, w);
  read(j, "frame_spacing", b.frame_spacing, w);
  read(j, "descriptor_dim", b.descriptor_dim, w);
  read(j, "segment_steps", b.segment_steps, w);
  read(j, "test_length", b.test_length, w);
  read(j, "map_noise", b.map_noise, w);
  read(j, "margin", b.margin, w);
  read(j, "loop_closure_fraction", b.loop_closure_fraction, w);
  read(j, "align_radius", b.align_radius, w);
  if (auto it = j.find("revisit_noise"); it != j.end()) {
    b.revisit_noise = noise_from_json(*it, b.revisit_noise, w + ".revisit_noise");
  }
  if (auto it = j.find("aliased_noise"); it != j.end()) {
    b.aliased_noise = noise_from_json(*it, b.aliased_noise, w + ".aliased_noise");
  }
  if (auto it = j.find("ambiguity"); it != j.end()) b.ambiguity = ambiguity_from_json(*it);
  if (auto it = j.find("environments"); it != j.end()) {
    if (!it->is_array()) throw ValidationError("benchmark.environments: expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string ew = "benchmark.environments[" + std::to_string(i) + "]";
      const Json& ej = (*it)[i];
      require_object(ej, ew);
      check_keys(ej,
                 {"count_ao", "count_ap", "count_po", "name", "ring_segments", "spurs",
                  "twin_pairs", "type"},
                 ew);
      EnvironmentSpec e;
      read(ej, "name", e.name, ew);
      read(ej, "type", e.type, ew);
      read(ej, "count_ap", e.count_ap, ew);
      read(ej, "count_po", e.count_po, ew);
      read(ej, "count_ao", e.count_ao, ew);
      read(ej, "ring_segments", e.ring_segments, ew);
      read(ej, "twin_pairs", e.twin_pairs, ew);
      read(ej, "spurs", e.spurs, ew);
      b.environments.push_back(e);
    }
  }
  b.validate();
  return b;
}

Json to_json(const LocalizerParams& p) {
  const char* kind = p.pbu.likelihood.kind == Likelihood::Kind::Identity ? "identity" : "exponential";
  Json w_u = p.pbu.w_u ? Json(*p.pbu.w_u) : Json(nullptr);
  return Json{{"pbu",
               Json{{"init", p.pbu.init},
                    {"likelihood", Json{{"floor", p.pbu.likelihood.floor},
                                        {"kind", kind},
                                        {"lambda", p.pbu.likelihood.lambda}}},
                    {"new_node_mass", p.pbu.new_node_mass},
                    {"tau", p.pbu.tau},
                    {"trans_far", p.pbu.trans_far},
                    {"trans_near", p.pbu.trans_near},
                    {"w_u", w_u}}},
              {"sm", Json{{"h", p.sm.h}, {"tau", p.sm.tau}}}};
}

LocalizerParams localizer_params_from_json(const Json& j) {
  require_object(j, "params");
  check_keys(j, {"pbu", "sm"}, "params");
  LocalizerParams p;
  if (auto it = j.find("sm"); it != j.end()) {
    const std::string w = "params.sm";
    require_object(*it, w);
    check_keys(*it, {"h", "tau"}, w);
    read(*it, "h", p.sm.h, w);
    read(*it, "tau", p.sm.tau, w);
  }
  if (auto it = j.find("pbu"); it != j.end()) {
    const std::string w = "params.pbu";
    const Json& pj = *it;
    require_object(pj, w);
    check_keys(pj,
               {"init", "likelihood", "new_node_mass", "tau", "trans_far", "trans_near", "w_u"},
               w);
    if (auto wu = pj.find("w_u"); wu != pj.end()) {
      if (wu->is_null()) {
        p.pbu.w_u.reset();
      } else {
        std::size_t v = 0;
        read(pj, "w_u", v, w);
        p.pbu.w_u = v;
      }
    }
    read(pj, "trans_near", p.pbu.trans_near, w);
    read(pj, "trans_far", p.pbu.trans_far, w);
    read(pj, "init", p.pbu.init, w);
    read(pj, "new_node_mass", p.pbu.new_node_mass, w);
    read(pj, "tau", p.pbu.tau, w);
    if (auto lk = pj.find("likelihood"); lk != pj.end()) {
      const std::string lw = w + ".likelihood";
      require_object(*lk, lw);
      check_keys(*lk, {"floor", "kind", "lambda"}, lw);
      std::string kind = "exponential";
      read(*lk, "kind", kind, lw);
      if (kind == "exponential") {
        p.pbu.likelihood.kind = Likelihood::Kind::Exponential;
      } else if (kind == "identity") {
        p.pbu.likelihood.kind = Likelihood::Kind::Identity;
      } else {
        throw ValidationError(lw + ".kind: expected exponential or identity, got '" + kind + "'");
      }
      read(*lk, "lambda", p.pbu.likelihood.lambda, lw);
      read(*lk, "floor", p.pbu.likelihood.floor, lw);
    }
  }
  validated("params", [&] { p.validate(); });
  return p;
}

}  // namespace topobench
