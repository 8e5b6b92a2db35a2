#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "topobench/ambiguity.hpp"
#include "topobench/baselines.hpp"
#include "topobench/core/similarity.hpp"
#include "topobench/core/types.hpp"
#include "topobench/synthworld.hpp"

namespace topobench {

namespace fs = std::filesystem;
using Json = nlohmann::json;

// ---- binary descriptor / similarity files ----

inline constexpr std::uint32_t kDescriptorVersion = 1;
inline constexpr std::size_t kDescriptorHeaderBytes = 24;

enum class MatrixKind : std::uint8_t { Descriptors = 0, Similarity = 1 };

// Row-major float32 matrix as stored on disk.
struct MatrixFile {
  MatrixKind kind = MatrixKind::Descriptors;
  std::uint64_t rows = 0;
  std::uint32_t cols = 0;
  std::vector<float> data;
  bool operator==(const MatrixFile&) const = default;
};

std::string encode_matrix(const MatrixFile& m);
// Checks magic, version, dtype, endianness, exact payload length and, for
// descriptors, unit-norm rows within 1e-5. Throws DataError.
MatrixFile decode_matrix(const std::string& bytes);

MatrixFile descriptor_matrix(const Sequence& s);
MatrixFile similarity_matrix_file(const SimilarityMatrix& m);
SimilarityMatrix to_similarity(const MatrixFile& m);
// Copies descriptor rows onto the frames; row count must match.
void attach_descriptors(Sequence& s, const MatrixFile& m);

// ---- trajectory text files ----

// Header frame_id,timestamp,x,y[,z],traversal_dist; an empty traversal field
// means unknown. Numbers use the shortest round-trip representation.
std::string encode_trajectory(const Sequence& s);
Sequence decode_trajectory(const std::string& text);

std::string read_file(const fs::path& p);
// Writes via a temporary file and rename.
void write_file(const fs::path& p, const std::string& bytes);

// ---- structured configuration ----

// Rejects keys outside `allowed`, naming the offending field.
void check_keys(const Json& j, const std::vector<std::string>& allowed, const std::string& where);

Json to_json(const AmbiguityParams& p);
AmbiguityParams ambiguity_from_json(const Json& j, AmbiguityParams base = {});
Json to_json(const WorldSpec& w);
WorldSpec world_spec_from_json(const Json& j);
Json to_json(const BenchmarkSpec& b);
BenchmarkSpec benchmark_spec_from_json(const Json& j);
Json to_json(const LocalizerParams& p);
LocalizerParams localizer_params_from_json(const Json& j);

// ---- benchmark manifest ----

inline constexpr int kManifestSchema = 1;

struct SequenceRef {
  std::string trajectory;   // relative to the dataset root
  std::string descriptors;  // optional
  bool operator==(const SequenceRef&) const = default;
};

struct ManifestEnvironment {
  std::string name;
  std::string type;  // indoor | outdoor
  std::string world_ref;  // optional world spec for the world_graph estimator
  bool operator==(const ManifestEnvironment&) const = default;
};

struct ManifestCase {
  std::string case_id;
  std::string environment;
  std::optional<CaseKind> label;
  std::optional<CaseKind> intended_label;
  SequenceRef map_ref;
  SequenceRef test_ref;
  std::string similarity_ref;  // optional test x map similarity matrix
  double align_radius = 0.5;
  AmbiguityParams params;
  Json evidence = Json::object();
  bool operator==(const ManifestCase&) const = default;
};

struct Manifest {
  int schema_version = kManifestSchema;
  std::string name;
  AmbiguityParams ambiguity;
  std::string route_estimator = "traversal";  // traversal | world_graph
  std::vector<ManifestEnvironment> environments;
  std::vector<ManifestCase> cases;
  std::map<std::string, std::size_t> counts;  // serialized label -> count

  // Recomputes counts from the case labels.
  void recount();
};

Json to_json(const Manifest& m);
// Validates schema version, references and that counts equal the labels.
Manifest manifest_from_json(const Json& j);
std::string encode_manifest(const Manifest& m);
Manifest decode_manifest(const std::string& text);

Json evidence_json(const CaseLabel& l);

// ---- datasets on disk ----

struct Dataset {
  fs::path root;
  Manifest manifest;
  std::vector<TestCase> cases;  // parallel to manifest.cases
  std::map<std::string, std::shared_ptr<const World>> worlds;
};

// Loads every case; refs must resolve to existing files.
Dataset load_dataset(const fs::path& root);

// Writes trajectories, descriptors, world specs and the manifest.
Manifest write_benchmark(const GeneratedBenchmark& b, const fs::path& out);

// Per-environment label counts in environment order, for tables.
struct EnvironmentCounts {
  std::string name;
  std::string type;
  std::size_t ap = 0, po = 0, ao = 0, novel = 0;
};
std::vector<EnvironmentCounts> count_by_environment(const Manifest& m);
std::string counts_table(const std::vector<EnvironmentCounts>& rows);

// Published per-dataset environment and case counts of the curated benchmark.
struct CuratedRow {
  std::string dataset;
  std::size_t environments;
  std::string type;
  std::size_t ap, po, ao;
};
std::vector<CuratedRow> curated_counts();
inline constexpr const char* kCuratedName = "curated";

}  // namespace topobench
