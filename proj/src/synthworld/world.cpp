#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <set>

#include "topobench/core/error.hpp"
#include "topobench/synthworld.hpp"

namespace topobench {

namespace {

constexpr double kInfDist = std::numeric_limits<double>::infinity();
// Appearance latents of unrelated places must stay below this cosine.
constexpr double kMaxUnrelatedCosine = 0.5;

std::vector<double> random_unit_vector(Rng& rng, std::size_t dim) {
  std::vector<double> v(dim);
  double norm = 0.0;
  for (double& x : v) {
    x = rng.normal();
    norm += x * x;
  }
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

void WorldSpec::validate() const {
  if (!(frame_spacing > 0.0) || !std::isfinite(frame_spacing)) {
    throw ValidationError("world: frame_spacing must be positive");
  }
  if (descriptor_dim < 2) throw ValidationError("world: descriptor_dim must be at least 2");
  if (!(noise_sigma >= 0.0)) throw ValidationError("world: noise_sigma must be non-negative");
  if (segment_steps == 0) throw ValidationError("world: segment_steps must be positive");
  if (layout == "corridor") {
    if (segment_count == 0) throw ValidationError("world: corridor needs segment_count >= 1");
  } else if (layout == "loop") {
    if (segment_count < 3) throw ValidationError("world: loop needs segment_count >= 3");
    if (spur_count > segment_count) throw ValidationError("world: more spurs than ring vertices");
  } else if (layout == "grid") {
    if (grid_rows < 1 || grid_cols < 2) throw ValidationError("world: grid needs 1x2 or larger");
  } else if (layout == "custom") {
    if (vertices.empty() || segments.empty()) {
      throw ValidationError("world: custom layout needs vertices and segments");
    }
    if (map_route.empty()) throw ValidationError("world: custom layout needs a map_route");
  } else {
    throw ValidationError("world: unknown layout '" + layout + "'");
  }
}

World::World(WorldSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  build_layout();
  build_appearance();
}

void World::build_layout() {
  const double len = spec_.segment_steps * spec_.frame_spacing;
  const std::size_t steps = spec_.segment_steps;
  if (spec_.layout == "corridor") {
    for (std::size_t i = 0; i <= spec_.segment_count; ++i) vertices_.push_back({i * len, 0, 0});
    for (std::size_t i = 0; i < spec_.segment_count; ++i) {
      segments_.push_back({i, i + 1, steps});
      route_.push_back({i, true});
    }
  } else if (spec_.layout == "loop") {
    const std::size_t n = spec_.segment_count;
    const double radius = len / (2.0 * std::sin(std::numbers::pi / n));
    for (std::size_t k = 0; k < n; ++k) {
      const double a = 2.0 * std::numbers::pi * k / n;
      vertices_.push_back({radius * std::cos(a), radius * std::sin(a), 0});
    }
    for (std::size_t k = 0; k < n; ++k) {
      segments_.push_back({k, (k + 1) % n, steps});
      route_.push_back({k, true});
    }
    for (std::size_t j = 0; j < spec_.spur_count; ++j) {
      const std::size_t v = (j * n) / spec_.spur_count;
      const Position base = vertices_[v];
      const double r = std::hypot(base.x, base.y);
      vertices_.push_back({base.x + len * base.x / r, base.y + len * base.y / r, 0});
      segments_.push_back({v, vertices_.size() - 1, steps});
    }
  } else if (spec_.layout == "grid") {
    const std::size_t rows = spec_.grid_rows, cols = spec_.grid_cols;
    auto vid = [cols](std::size_t r, std::size_t c) { return r * cols + c; };
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) vertices_.push_back({c * len, r * len, 0});
    std::vector<std::vector<std::size_t>> horiz(rows, std::vector<std::size_t>(cols - 1));
    std::vector<std::vector<std::size_t>> vert(rows ? rows - 1 : 0, std::vector<std::size_t>(cols));
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c + 1 < cols; ++c) {
        horiz[r][c] = segments_.size();
        segments_.push_back({vid(r, c), vid(r, c + 1), steps});
      }
    for (std::size_t r = 0; r + 1 < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) {
        vert[r][c] = segments_.size();
        segments_.push_back({vid(r, c), vid(r + 1, c), steps});
      }
    // Boustrophedon over the rows; only the turning columns are mapped.
    for (std::size_t r = 0; r < rows; ++r) {
      const bool right = r % 2 == 0;
      for (std::size_t i = 0; i + 1 < cols; ++i) {
        const std::size_t c = right ? i : cols - 2 - i;
        route_.push_back({horiz[r][c], right});
      }
      if (r + 1 < rows) route_.push_back({vert[r][right ? cols - 1 : 0], true});
    }
  } else {
    vertices_ = spec_.vertices;
    segments_ = spec_.segments;
    route_ = spec_.map_route;
    for (const SegmentDef& s : segments_) {
      if (s.from >= vertices_.size() || s.to >= vertices_.size() || s.from == s.to) {
        throw ValidationError("world: segment endpoints must be distinct existing vertices");
      }
      if (s.steps == 0) throw ValidationError("world: segment steps must be positive");
    }
    std::size_t at = 0;
    for (std::size_t i = 0; i < route_.size(); ++i) {
      const MapLeg& leg = route_[i];
      if (leg.segment >= segments_.size()) throw ValidationError("world: map_route segment out of range");
      const SegmentDef& s = segments_[leg.segment];
      const std::size_t start = leg.forward ? s.from : s.to;
      if (i > 0 && start != at) throw ValidationError("world: map_route legs are not contiguous");
      at = leg.forward ? s.to : s.from;
    }
  }

  // Vertex all-pairs route lengths; every vertex must be reachable.
  const std::size_t nv = vertices_.size();
  dist_.assign(nv, std::vector<double>(nv, kInfDist));
  for (std::size_t i = 0; i < nv; ++i) dist_[i][i] = 0.0;
  for (std::size_t s = 0; s < segments_.size(); ++s) {
    const double l = segment_length(s);
    auto& d = dist_[segments_[s].from][segments_[s].to];
    d = std::min(d, l);
    dist_[segments_[s].to][segments_[s].from] = d;
  }
  for (std::size_t k = 0; k < nv; ++k)
    for (std::size_t i = 0; i < nv; ++i)
      for (std::size_t j = 0; j < nv; ++j)
        if (dist_[i][k] + dist_[k][j] < dist_[i][j]) dist_[i][j] = dist_[i][k] + dist_[k][j];
  for (std::size_t j = 0; j < nv; ++j) {
    if (dist_[0][j] == kInfDist) throw ValidationError("world: layout is disconnected");
  }

  group_of_.assign(segments_.size(), std::nullopt);
  for (std::size_t g = 0; g < spec_.alias_groups.size(); ++g) {
    const auto& group = spec_.alias_groups[g];
    if (group.size() < 2) throw ValidationError("world: alias groups need two or more segments");
    for (std::size_t s : group) {
      if (s >= segments_.size()) throw ValidationError("world: alias group segment out of range");
      if (group_of_[s]) throw ValidationError("world: segment in two alias groups");
      if (segments_[s].steps != segments_[group.front()].steps) {
        throw ValidationError("world: aliased segments must have equal steps");
      }
      group_of_[s] = g;
    }
  }
}

void World::build_appearance() {
  Rng rng = Rng(spec_.seed).fork(0xA11A5);
  const std::size_t dim = spec_.descriptor_dim;
  // Each alias group shares one track of interior latents.
  std::vector<std::size_t> track_base(spec_.alias_groups.size(), 0);
  latents_.clear();
  for (std::size_t v = 0; v < vertices_.size(); ++v) latents_.push_back(random_unit_vector(rng, dim));
  for (std::size_t g = 0; g < spec_.alias_groups.size(); ++g) {
    track_base[g] = latents_.size();
    const std::size_t interior = segments_[spec_.alias_groups[g].front()].steps - 1;
    for (std::size_t i = 0; i < interior; ++i) latents_.push_back(random_unit_vector(rng, dim));
  }
  interior_base_.assign(segments_.size(), 0);
  for (std::size_t s = 0; s < segments_.size(); ++s) {
    if (group_of_[s]) {
      interior_base_[s] = track_base[*group_of_[s]];
      continue;
    }
    interior_base_[s] = latents_.size();
    for (std::size_t i = 0; i + 1 < segments_[s].steps; ++i) {
      latents_.push_back(random_unit_vector(rng, dim));
    }
  }
  // Resample any unrelated pair that came out too similar.
  for (int pass = 0; pass < 100; ++pass) {
    bool clean = true;
    for (std::size_t i = 0; i < latents_.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        if (dot(latents_[i], latents_[j]) >= kMaxUnrelatedCosine) {
          latents_[i] = random_unit_vector(rng, dim);
          clean = false;
        }
      }
    }
    if (clean) return;
  }
  throw ValidationError("world: could not separate unrelated appearance latents");
}

double World::segment_length(std::size_t s) const {
  return static_cast<double>(segments_.at(s).steps) * spec_.frame_spacing;
}

Position World::position(const LatticePoint& p) const {
  const SegmentDef& s = segments_.at(p.segment);
  if (p.step > s.steps) throw ValidationError("world: lattice step out of range");
  const Position& a = vertices_[s.from];
  const Position& b = vertices_[s.to];
  if (p.step == 0) return a;
  if (p.step == s.steps) return b;
  const double t = static_cast<double>(p.step) / static_cast<double>(s.steps);
  return {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y), a.z + t * (b.z - a.z)};
}

const std::vector<double>& World::latent(const LatticePoint& p) const {
  const SegmentDef& s = segments_.at(p.segment);
  if (p.step == 0) return latents_[s.from];
  if (p.step >= s.steps) return latents_[s.to];
  return latents_[interior_base_[p.segment] + p.step - 1];
}

std::optional<std::size_t> World::alias_group(std::size_t segment) const {
  return group_of_.at(segment);
}

std::size_t World::times_mapped(std::size_t segment) const {
  return static_cast<std::size_t>(std::count_if(
      route_.begin(), route_.end(), [segment](const MapLeg& l) { return l.segment == segment; }));
}

std::optional<bool> World::mapped_forward(std::size_t segment) const {
  for (const MapLeg& l : route_)
    if (l.segment == segment) return l.forward;
  return std::nullopt;
}

std::optional<Located> World::locate(const Position& p) const {
  const double tol = 1e-6 * spec_.frame_spacing;
  std::optional<Located> best;
  double best_dev = kInfDist;
  for (std::size_t s = 0; s < segments_.size(); ++s) {
    const Position& a = vertices_[segments_[s].from];
    const Position& b = vertices_[segments_[s].to];
    const double dx = b.x - a.x, dy = b.y - a.y, dz = b.z - a.z;
    const double chord2 = dx * dx + dy * dy + dz * dz;
    double t = ((p.x - a.x) * dx + (p.y - a.y) * dy + (p.z - a.z) * dz) / chord2;
    t = std::clamp(t, 0.0, 1.0);
    const Position q{a.x + t * dx, a.y + t * dy, a.z + t * dz};
    const double dev = euclidean(p, q);
    if (dev <= tol && dev < best_dev) {
      best_dev = dev;
      double offset = t * segment_length(s);
      const double lattice = std::round(offset / spec_.frame_spacing);
      if (std::abs(offset / spec_.frame_spacing - lattice) < 1e-6) {
        offset = lattice * spec_.frame_spacing;
      }
      best = Located{s, offset};
    }
  }
  return best;
}

std::optional<double> World::route(const Position& a, const Position& b) const {
  const auto la = locate(a);
  const auto lb = locate(b);
  if (!la || !lb) return std::nullopt;
  const SegmentDef& sa = segments_[la->segment];
  const SegmentDef& sb = segments_[lb->segment];
  const double len_a = segment_length(la->segment), len_b = segment_length(lb->segment);
  double best = kInfDist;
  if (la->segment == lb->segment) best = std::abs(la->offset - lb->offset);
  const std::size_t va[2] = {sa.from, sa.to};
  const double da[2] = {la->offset, len_a - la->offset};
  const std::size_t vb[2] = {sb.from, sb.to};
  const double db[2] = {lb->offset, len_b - lb->offset};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) best = std::min(best, da[i] + dist_[va[i]][vb[j]] + db[j]);
  if (best == kInfDist) return std::nullopt;
  return best;
}

std::vector<float> World::observe(const LatticePoint& p, double sigma, Rng& rng) const {
  const std::vector<double>& lat = latent(p);
  const double scale = sigma / std::sqrt(static_cast<double>(lat.size()));
  std::vector<double> v(lat.size());
  double norm = 0.0;
  for (std::size_t i = 0; i < lat.size(); ++i) {
    v[i] = lat[i] + scale * rng.normal();
    norm += v[i] * v[i];
  }
  norm = std::sqrt(norm);
  std::vector<float> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<float>(v[i] / norm);
  return out;
}

std::vector<LatticePoint> World::map_points() const {
  std::vector<LatticePoint> pts;
  for (const MapLeg& leg : route_) {
    const std::size_t steps = segments_[leg.segment].steps;
    for (std::size_t i = 0; i < steps; ++i) {
      pts.push_back({leg.segment, leg.forward ? i : steps - i});
    }
  }
  const MapLeg& first = route_.front();
  const MapLeg& last = route_.back();
  const std::size_t start =
      first.forward ? segments_[first.segment].from : segments_[first.segment].to;
  const std::size_t end = last.forward ? segments_[last.segment].to : segments_[last.segment].from;
  if (end != start) {
    pts.push_back({last.segment, last.forward ? segments_[last.segment].steps : 0});
  }
  return pts;
}

Sequence World::map_sequence() const {
  Rng rng = Rng(spec_.seed).fork(0x3A9);
  return sequence_along(map_points(), spec_.noise_sigma, rng, SequenceRole::Map);
}

Sequence World::sequence_along(const std::vector<LatticePoint>& points, double sigma, Rng& rng,
                               SequenceRole role) const {
  Sequence seq;
  seq.role = role;
  seq.pose_dim = 2;
  seq.frames.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    Frame f;
    f.frame_id = i;
    f.timestamp = static_cast<double>(i);
    f.pose = position(points[i]);
    f.traversal_dist = static_cast<double>(i) * spec_.frame_spacing;
    f.descriptor = observe(points[i], sigma, rng);
    seq.frames.push_back(std::move(f));
  }
  return seq;
}

std::vector<LatticePoint> World::random_walk(std::size_t frames, Rng& rng) const {
  std::vector<LatticePoint> pts;
  if (frames == 0) return pts;
  std::vector<std::vector<std::size_t>> incident(vertices_.size());
  for (std::size_t s = 0; s < segments_.size(); ++s) {
    incident[segments_[s].from].push_back(s);
    incident[segments_[s].to].push_back(s);
  }
  std::size_t at = rng.below(vertices_.size());
  std::optional<std::size_t> came;
  pts.push_back(segments_[incident[at].front()].from == at
                    ? LatticePoint{incident[at].front(), 0}
                    : LatticePoint{incident[at].front(), segments_[incident[at].front()].steps});
  while (pts.size() < frames) {
    std::vector<std::size_t> options;
    for (std::size_t s : incident[at])
      if (!came || s != *came) options.push_back(s);
    if (options.empty()) options.push_back(*came);
    const std::size_t s = options[rng.below(options.size())];
    const SegmentDef& seg = segments_[s];
    const bool forward = seg.from == at;
    for (std::size_t i = 1; i <= seg.steps && pts.size() < frames; ++i) {
      pts.push_back({s, forward ? i : seg.steps - i});
    }
    at = forward ? seg.to : seg.from;
    came = s;
  }
  return pts;
}

std::shared_ptr<const World> generate_world(const WorldSpec& spec) {
  return std::make_shared<const World>(spec);
}

std::optional<double> WorldRouteMetric::between(const Frame& a, const Frame& b) const {
  return world_->route(a.pose, b.pose);
}

}  // namespace topobench
