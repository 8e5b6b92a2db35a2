#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "topobench/core/error.hpp"
#include "topobench/core/similarity.hpp"
#include "topobench/synthworld.hpp"

namespace topobench {

namespace {

struct Target {
  std::size_t segment = 0;
  bool forward = true;  // direction of travel along the test window
};

std::vector<Target> candidates(const World& world, CaseKind kind, std::size_t length) {
  std::vector<Target> out;
  const auto& groups = world.spec().alias_groups;
  for (std::size_t s = 0; s < world.segments().size(); ++s) {
    if (world.segments()[s].steps < length + 1) continue;
    const auto g = world.alias_group(s);
    std::vector<std::size_t> partners;
    if (g) {
      for (std::size_t t : groups[*g])
        if (t != s) partners.push_back(t);
    }
    const std::size_t mapped = world.times_mapped(s);
    if (kind == CaseKind::POnly) {
      if (mapped != 1) continue;
      const bool mapped_alias = std::any_of(partners.begin(), partners.end(), [&](std::size_t t) {
        return world.times_mapped(t) > 0;
      });
      if (!mapped_alias) out.push_back({s, *world.mapped_forward(s)});
    } else if (kind == CaseKind::APlusP) {
      if (mapped != 1) continue;
      const bool fwd = *world.mapped_forward(s);
      const bool twin = std::any_of(partners.begin(), partners.end(), [&](std::size_t t) {
        return world.times_mapped(t) == 1 && *world.mapped_forward(t) == fwd;
      });
      if (twin) out.push_back({s, fwd});
    } else if (kind == CaseKind::AOnly) {
      if (mapped != 0) continue;
      for (std::size_t t : partners) {
        if (world.times_mapped(t) > 0) {
          out.push_back({s, *world.mapped_forward(t)});
          break;
        }
      }
    }
  }
  return out;
}

std::vector<LatticePoint> window_points(const World& world, const Target& t, std::size_t first,
                                        std::size_t length) {
  const std::size_t steps = world.segments()[t.segment].steps;
  std::vector<LatticePoint> pts;
  for (std::size_t i = 0; i < length; ++i) {
    const std::size_t k = first + i;
    pts.push_back({t.segment, t.forward ? k : steps - k});
  }
  return pts;
}

// Map-route points leading to the window, so the test continues from the
// start of the mapping run instead of appearing out of nowhere.
std::vector<LatticePoint> approach(const World& world, const Target& t, std::size_t first) {
  const std::vector<LatticePoint> route = world.map_points();
  const SegmentDef& seg = world.segments()[t.segment];
  std::vector<LatticePoint> pts;
  if (world.times_mapped(t.segment) > 0) {
    const std::size_t step = t.forward ? first : seg.steps - first;
    for (const LatticePoint& p : route) {
      if (p.segment == t.segment && p.step == step) return pts;
      pts.push_back(p);
    }
    throw ValidationError("generate_case: window start not on the map route");
  }
  const Position base = world.vertices()[t.forward ? seg.from : seg.to];
  bool reached = false;
  for (const LatticePoint& p : route) {
    pts.push_back(p);
    if (world.position(p) == base) {
      reached = true;
      break;
    }
  }
  if (!reached) throw ValidationError("generate_case: unmapped segment is not reachable from the map");
  for (std::size_t k = 1; k < first; ++k) {
    pts.push_back({t.segment, t.forward ? k : seg.steps - k});
  }
  return pts;
}

bool meets(const CaseLabel& l, const CaseRequest& r) {
  if (l.kind != r.kind) return false;
  switch (r.kind) {
    case CaseKind::APlusP:
      return *l.ratio >= r.params.alpha + r.margin;
    case CaseKind::POnly:
      return *l.ratio <= r.params.alpha - r.margin;
    case CaseKind::AOnly:
      return l.best_similarity >= r.params.tau + r.margin;
    case CaseKind::NovelClean:
      return true;
  }
  return false;
}

}  // namespace

GeneratedCase generate_case(const World& world, const Sequence& map, const CaseRequest& req,
                            Rng& rng) {
  req.params.validate();
  if (req.kind == CaseKind::NovelClean) {
    throw ValidationError("generate_case: NOVEL_CLEAN cases are not generated");
  }
  if (req.test_length < req.params.seq_len) {
    throw ValidationError("generate_case: test_length shorter than seq_len");
  }
  if (!(req.margin >= 0.0)) throw ValidationError("generate_case: margin must be non-negative");
  const std::vector<Target> targets = candidates(world, req.kind, req.test_length);
  if (targets.empty()) {
    throw ValidationError("generate_case: world has no segment able to host a " +
                          to_string(req.kind) + " case of length " +
                          std::to_string(req.test_length));
  }

  std::optional<double> best_seen;
  for (std::size_t attempt = 1; attempt <= req.max_attempts; ++attempt) {
    const Target t = targets[rng.below(targets.size())];
    const std::size_t steps = world.segments()[t.segment].steps;
    const std::size_t first = 1 + rng.below(steps - req.test_length);
    std::vector<LatticePoint> pts;
    if (req.loop_closure) pts = approach(world, t, first);
    for (const LatticePoint& p : window_points(world, t, first, req.test_length)) pts.push_back(p);

    GeneratedCase gc;
    gc.test = world.sequence_along(pts, req.test_noise, rng);
    gc.correspondence = build_correspondence(gc.test, map, req.align_radius);
    const SimilarityMatrix sim = SimilarityMatrix::from_descriptors(gc.test, map);
    gc.measured = classify_case(gc.test, map, gc.correspondence, req.params, sim);
    gc.intended = req.kind;
    gc.margin = req.margin;
    gc.segment = t.segment;
    gc.attempts = attempt;
    gc.loop_closure = req.loop_closure;
    gc.evidence = gc.measured.ratio ? *gc.measured.ratio : gc.measured.best_similarity;

    if (meets(gc.measured, req)) return gc;
    const bool revisit = gc.measured.ratio.has_value();
    if (req.kind == CaseKind::POnly && revisit) {
      best_seen = best_seen ? std::min(*best_seen, gc.evidence) : gc.evidence;
    } else if (req.kind == CaseKind::APlusP && revisit) {
      best_seen = best_seen ? std::max(*best_seen, gc.evidence) : gc.evidence;
    } else if (req.kind == CaseKind::AOnly && !revisit) {
      best_seen = best_seen ? std::max(*best_seen, gc.evidence) : gc.evidence;
    }
  }

  char msg[256];
  const char* what = req.kind == CaseKind::AOnly ? "max Sim" : "ratio";
  const double need = req.kind == CaseKind::APlusP  ? req.params.alpha + req.margin
                      : req.kind == CaseKind::POnly ? req.params.alpha - req.margin
                                                    : req.params.tau + req.margin;
  if (best_seen) {
    std::snprintf(msg, sizeof msg,
                  "generate_case: %s margin %.3f unattainable at test noise %.3f; best %s %.4f "
                  "after %zu attempts (need %s %.4f)",
                  to_string(req.kind).c_str(), req.margin, req.test_noise, what, *best_seen,
                  req.max_attempts, req.kind == CaseKind::POnly ? "<=" : ">=", need);
  } else {
    std::snprintf(msg, sizeof msg,
                  "generate_case: no draw produced a %s window in %zu attempts",
                  to_string(req.kind).c_str(), req.max_attempts);
  }
  throw ValidationError(msg);
}

void BenchmarkSpec::validate() const {
  ambiguity.validate();
  if (!(frame_spacing > 0.0)) throw ValidationError("benchmark: frame_spacing must be positive");
  if (test_length < ambiguity.seq_len) {
    throw ValidationError("benchmark: test_length must be at least seq_len");
  }
  if (segment_steps < test_length + 1) {
    throw ValidationError("benchmark: segment_steps must exceed test_length");
  }
  for (const NoiseRange* r : {&revisit_noise, &aliased_noise}) {
    if (!(r->lo >= 0.0 && r->hi >= r->lo)) throw ValidationError("benchmark: bad noise range");
  }
  if (!(map_noise >= 0.0)) throw ValidationError("benchmark: map_noise must be non-negative");
  if (!(margin >= 0.0)) throw ValidationError("benchmark: margin must be non-negative");
  if (!(loop_closure_fraction >= 0.0 && loop_closure_fraction <= 1.0)) {
    throw ValidationError("benchmark: loop_closure_fraction must lie in [0, 1]");
  }
  if (!(align_radius > 0.0 && align_radius < frame_spacing)) {
    throw ValidationError("benchmark: align_radius must lie in (0, frame_spacing)");
  }
  if (environments.empty()) throw ValidationError("benchmark: no environments");
  std::set<std::string> names;
  for (const EnvironmentSpec& e : environments) {
    if (e.name.empty() || e.name.find_first_of("/\\ ") != std::string::npos) {
      throw ValidationError("benchmark: environment names must be non-empty path-safe words");
    }
    if (!names.insert(e.name).second) {
      throw ValidationError("benchmark: duplicate environment '" + e.name + "'");
    }
    if (e.type != "indoor" && e.type != "outdoor") {
      throw ValidationError("benchmark: environment type must be indoor or outdoor");
    }
    if (e.ring_segments < 4) throw ValidationError("benchmark: ring_segments must be at least 4");
    if (2 * (e.twin_pairs + e.spurs) > e.ring_segments) {
      throw ValidationError("benchmark: environment '" + e.name +
                            "' has too many twins and spurs for its ring");
    }
    if (e.count_ap > 0 && e.twin_pairs == 0) {
      throw ValidationError("benchmark: environment '" + e.name + "' needs twin_pairs for A+P");
    }
    if (e.count_ao > 0 && e.spurs == 0) {
      throw ValidationError("benchmark: environment '" + e.name + "' needs spurs for A.O.");
    }
  }
}

WorldSpec environment_world(const BenchmarkSpec& spec, std::size_t env_index) {
  spec.validate();
  const EnvironmentSpec& e = spec.environments.at(env_index);
  WorldSpec w;
  w.layout = "loop";
  w.segment_count = e.ring_segments;
  w.segment_steps = spec.segment_steps;
  w.spur_count = e.spurs;
  w.frame_spacing = spec.frame_spacing;
  w.descriptor_dim = spec.descriptor_dim;
  w.noise_sigma = spec.map_noise;
  w.seed = splitmix64(spec.seed + 0x9E37 * (env_index + 1));
  const std::size_t half = e.ring_segments / 2;
  for (std::size_t i = 0; i < e.twin_pairs; ++i) w.alias_groups.push_back({i, i + half});
  for (std::size_t j = 0; j < e.spurs; ++j) {
    w.alias_groups.push_back({e.twin_pairs + j, e.ring_segments + j});
  }
  return w;
}

GeneratedBenchmark generate_benchmark(const BenchmarkSpec& spec) {
  spec.validate();
  GeneratedBenchmark out;
  out.spec = spec;
  const Rng root(spec.seed);
  for (std::size_t e = 0; e < spec.environments.size(); ++e) {
    GeneratedEnvironment env;
    env.spec = spec.environments[e];
    env.world_spec = environment_world(spec, e);
    env.world = generate_world(env.world_spec);
    env.map = std::make_shared<const Sequence>(env.world->map_sequence());
    out.environments.push_back(env);

    const Rng env_rng = root.fork(1000 + e);
    const std::pair<CaseKind, std::size_t> plan[] = {{CaseKind::APlusP, env.spec.count_ap},
                                                     {CaseKind::POnly, env.spec.count_po},
                                                     {CaseKind::AOnly, env.spec.count_ao}};
    for (const auto& [kind, count] : plan) {
      for (std::size_t i = 0; i < count; ++i) {
        Rng rng = env_rng.fork(static_cast<std::uint64_t>(kind) * 100000 + i);
        CaseRequest req;
        req.kind = kind;
        req.margin = spec.margin;
        req.params = spec.ambiguity;
        req.test_length = spec.test_length;
        req.align_radius = spec.align_radius;
        const NoiseRange& nr = kind == CaseKind::AOnly ? spec.aliased_noise : spec.revisit_noise;
        req.test_noise = rng.uniform(nr.lo, nr.hi);
        req.loop_closure = rng.uniform() < spec.loop_closure_fraction;
        GeneratedCase gc = generate_case(*env.world, *env.map, req, rng);

        char id[128];
        const char* code = kind == CaseKind::APlusP ? "AP" : kind == CaseKind::POnly ? "PO" : "AO";
        std::snprintf(id, sizeof id, "%s-%s-%03zu", env.spec.name.c_str(), code, i);
        TestCase tc;
        tc.id = id;
        tc.environment = env.spec.name;
        tc.map = env.map;
        tc.test = std::make_shared<const Sequence>(gc.test);
        tc.correspondence = gc.correspondence;
        tc.label = gc.measured.kind;
        tc.intended_label = kind;
        tc.seq_len = spec.ambiguity.seq_len;
        tc.route = std::make_shared<WorldRouteMetric>(env.world);
        out.cases.push_back(std::move(tc));
        out.generated.push_back(std::move(gc));
      }
    }
  }
  return out;
}

BenchmarkSpec desk_benchmark_spec(std::uint64_t seed) {
  BenchmarkSpec s;
  s.name = "desk-benchmark";
  s.seed = seed;
  auto env = [](std::string name, std::string type, std::size_t ap, std::size_t po,
                std::size_t ao) {
    EnvironmentSpec e;
    e.name = std::move(name);
    e.type = std::move(type);
    e.count_ap = ap;
    e.count_po = po;
    e.count_ao = ao;
    e.twin_pairs = ap > 0 ? 1 : 0;
    e.spurs = ao > 0 ? 2 : 0;
    return e;
  };
  s.environments = {env("office", "indoor", 8, 18, 13),   env("street", "outdoor", 0, 29, 0),
                    env("lab", "indoor", 4, 22, 4),       env("apartments", "indoor", 0, 19, 1),
                    env("trail", "outdoor", 0, 0, 29),    env("field", "outdoor", 1, 8, 2)};
  return s;
}

}  // namespace topobench
