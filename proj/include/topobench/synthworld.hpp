#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "topobench/ambiguity.hpp"
#include "topobench/core/rng.hpp"
#include "topobench/core/route.hpp"
#include "topobench/core/types.hpp"

namespace topobench {

struct SegmentDef {
  std::size_t from = 0;
  std::size_t to = 0;
  std::size_t steps = 1;  // route length is steps * frame_spacing
  bool operator==(const SegmentDef&) const = default;
};

// One directed pass over a segment during mapping.
struct MapLeg {
  std::size_t segment = 0;
  bool forward = true;  // from -> to
  bool operator==(const MapLeg&) const = default;
};

struct WorldSpec {
  // corridor | loop | grid | custom
  std::string layout = "loop";
  std::size_t segment_count = 8;  // corridor and loop
  std::size_t grid_rows = 3;
  std::size_t grid_cols = 3;
  std::size_t segment_steps = 10;
  // loop only: unmapped dead-end segments pointing outward from ring vertices
  std::size_t spur_count = 0;
  // custom layout
  std::vector<Position> vertices;
  std::vector<SegmentDef> segments;
  std::vector<MapLeg> map_route;

  double frame_spacing = 1.0;
  std::size_t descriptor_dim = 128;
  // Segments within a group share interior appearance point by point,
  // counted from each segment's `from` vertex.
  std::vector<std::vector<std::size_t>> alias_groups;
  double noise_sigma = 0.3;  // map descriptor noise
  std::uint64_t seed = 1;

  void validate() const;
};

// A lattice location: step 0 is the segment's `from` vertex, step == steps
// its `to` vertex.
struct LatticePoint {
  std::size_t segment = 0;
  std::size_t step = 0;
};

struct Located {
  std::size_t segment = 0;
  double offset = 0.0;  // metres from the `from` vertex
};

class World {
 public:
  // Builds layout, map route and appearance. Throws ValidationError for an
  // invalid spec or a disconnected layout.
  explicit World(WorldSpec spec);

  const WorldSpec& spec() const { return spec_; }
  const std::vector<Position>& vertices() const { return vertices_; }
  const std::vector<SegmentDef>& segments() const { return segments_; }
  const std::vector<MapLeg>& map_route() const { return route_; }
  double spacing() const { return spec_.frame_spacing; }
  double segment_length(std::size_t s) const;

  Position position(const LatticePoint& p) const;
  const std::vector<double>& latent(const LatticePoint& p) const;
  std::optional<std::size_t> alias_group(std::size_t segment) const;
  // Number of map legs over the segment.
  std::size_t times_mapped(std::size_t segment) const;
  std::optional<bool> mapped_forward(std::size_t segment) const;

  std::optional<Located> locate(const Position& p) const;
  // Shortest path on the layout graph; nullopt for off-graph positions or
  // disconnected pairs.
  std::optional<double> route(const Position& a, const Position& b) const;

  // unit(latent + sigma * g / sqrt(D)), g standard normal.
  std::vector<float> observe(const LatticePoint& p, double sigma, Rng& rng) const;

  // The mapping run along map_route with map noise.
  Sequence map_sequence() const;

  // Frames along consecutive lattice points with the given noise; poses
  // exact, traversal growing by one spacing per frame.
  Sequence sequence_along(const std::vector<LatticePoint>& points, double sigma, Rng& rng,
                          SequenceRole role = SequenceRole::Test) const;

  // Random walk over the whole layout, turning back only at dead ends.
  std::vector<LatticePoint> random_walk(std::size_t frames, Rng& rng) const;

  // Lattice points of the map route in order.
  std::vector<LatticePoint> map_points() const;

 private:
  void build_layout();
  void build_appearance();
  std::size_t vertex_latent_index(std::size_t vertex) const { return vertex; }

  WorldSpec spec_;
  std::vector<Position> vertices_;
  std::vector<SegmentDef> segments_;
  std::vector<MapLeg> route_;
  std::vector<std::vector<double>> dist_;  // vertex all-pairs route lengths
  std::vector<std::optional<std::size_t>> group_of_;
  // latents_[0 .. V) are vertices; interior latents follow.
  std::vector<std::vector<double>> latents_;
  std::vector<std::size_t> interior_base_;  // per segment, index of step 1
};

std::shared_ptr<const World> generate_world(const WorldSpec& spec);

// Route oracle backed by a world's layout graph.
class WorldRouteMetric final : public RouteMetric {
 public:
  explicit WorldRouteMetric(std::shared_ptr<const World> world) : world_(std::move(world)) {}
  std::optional<double> between(const Frame& a, const Frame& b) const override;
  const World& world() const { return *world_; }

 private:
  std::shared_ptr<const World> world_;
};

struct CaseRequest {
  CaseKind kind = CaseKind::POnly;
  double margin = 0.05;
  AmbiguityParams params;
  std::size_t test_length = 8;
  double test_noise = 0.6;
  bool loop_closure = false;
  double align_radius = 0.5;
  std::size_t max_attempts = 25;
};

struct GeneratedCase {
  Sequence test;
  Correspondence correspondence;
  CaseKind intended = CaseKind::POnly;
  CaseLabel measured;
  double margin = 0.0;
  // Designed quantity: ratio for revisits, max Sim for A.O.
  double evidence = 0.0;
  std::size_t segment = 0;
  std::size_t attempts = 0;
  bool loop_closure = false;
};

// Draws a test sequence of the requested kind against `map` and verifies it
// with classify_case at the declared margins, retrying with fresh draws.
// Throws ValidationError when the world cannot host the kind, or with the
// best achieved value when the margin stays out of reach.
GeneratedCase generate_case(const World& world, const Sequence& map, const CaseRequest& req,
                            Rng& rng);

struct NoiseRange {
  double lo = 0.0;
  double hi = 0.0;
};

struct EnvironmentSpec {
  std::string name;
  std::string type = "indoor";
  std::size_t count_ap = 0;
  std::size_t count_po = 0;
  std::size_t count_ao = 0;
  std::size_t ring_segments = 12;
  std::size_t twin_pairs = 1;
  std::size_t spurs = 2;
};

struct BenchmarkSpec {
  std::string name = "synthetic";
  std::uint64_t seed = 1;
  double frame_spacing = 1.0;
  std::size_t descriptor_dim = 128;
  std::size_t segment_steps = 12;
  std::size_t test_length = 8;
  double map_noise = 0.3;
  NoiseRange revisit_noise{0.4, 1.2};
  NoiseRange aliased_noise{0.0, 0.9};
  double margin = 0.05;
  AmbiguityParams ambiguity;
  double loop_closure_fraction = 0.0;
  double align_radius = 0.5;
  std::vector<EnvironmentSpec> environments;

  void validate() const;
};

// Ring world for one environment: twins (i, i + n/2) for i < twin_pairs,
// spur j aliased to ring segment twin_pairs + j.
WorldSpec environment_world(const BenchmarkSpec& spec, std::size_t env_index);

struct GeneratedEnvironment {
  EnvironmentSpec spec;
  WorldSpec world_spec;
  std::shared_ptr<const World> world;
  std::shared_ptr<const Sequence> map;
};

struct GeneratedBenchmark {
  BenchmarkSpec spec;
  std::vector<GeneratedEnvironment> environments;
  std::vector<TestCase> cases;
  std::vector<GeneratedCase> generated;  // parallel to cases
};

GeneratedBenchmark generate_benchmark(const BenchmarkSpec& spec);

// Six environments mirroring the curated benchmark's per-dataset mix at a
// quarter of its size: 13 / 96 / 49 cases.
BenchmarkSpec desk_benchmark_spec(std::uint64_t seed = 7);

}  // namespace topobench
