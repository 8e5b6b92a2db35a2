#include <doctest.h>

#include <filesystem>
#include <random>

#include "test_support.hpp"
#include "topobench/core/error.hpp"
#include "topobench/io.hpp"

using namespace topobench;

namespace {

fs::path scratch_dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("topobench_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

BenchmarkSpec small_spec(std::uint64_t seed, std::size_t ap, std::size_t po, std::size_t ao) {
  BenchmarkSpec s;
  s.name = "small";
  s.seed = seed;
  s.descriptor_dim = 32;
  EnvironmentSpec e;
  e.name = "hall";
  e.count_ap = ap;
  e.count_po = po;
  e.count_ao = ao;
  e.twin_pairs = ap > 0 ? 1 : 0;
  e.spurs = ao > 0 ? 2 : 0;
  s.environments = {e};
  return s;
}

}  // namespace

TEST_CASE("descriptor file round-trips byte-identically") {
  Sequence s = tbtest::line_sequence(9, 1.0, 16);
  const std::string a = encode_matrix(descriptor_matrix(s));
  CHECK(a.size() == kDescriptorHeaderBytes + 9 * 16 * 4);
  CHECK(a.substr(0, 4) == "TBDS");
  const MatrixFile m = decode_matrix(a);
  CHECK(m.rows == 9);
  CHECK(m.cols == 16);
  CHECK(encode_matrix(m) == a);

  Sequence t = tbtest::line_sequence(9, 1.0, 0);
  attach_descriptors(t, m);
  for (std::size_t i = 0; i < 9; ++i) CHECK(t[i].descriptor == s[i].descriptor);
}

TEST_CASE("descriptor file rejects bad headers and payloads") {
  Sequence s = tbtest::line_sequence(3, 1.0, 4);
  const std::string good = encode_matrix(descriptor_matrix(s));
  std::string bad = good;
  bad[0] = 'X';
  CHECK_THROWS_AS(decode_matrix(bad), DataError);
  CHECK_THROWS_AS(decode_matrix(good.substr(0, good.size() - 1)), DataError);
  CHECK_THROWS_AS(decode_matrix(good.substr(0, 10)), DataError);
  bad = good;
  bad[20] = 2;  // dtype
  CHECK_THROWS_AS(decode_matrix(bad), DataError);
  bad = good;
  bad[21] = 0;  // big-endian
  CHECK_THROWS_AS(decode_matrix(bad), DataError);

  // a row scaled off the unit sphere
  MatrixFile m = decode_matrix(good);
  for (std::size_t c = 0; c < 4; ++c) m.data[c] *= 1.01f;
  CHECK_THROWS_AS(decode_matrix(encode_matrix(m)), DataError);
  // similarity matrices carry no norm constraint
  m.kind = MatrixKind::Similarity;
  CHECK_NOTHROW(decode_matrix(encode_matrix(m)));
}

TEST_CASE("similarity matrix file round-trip") {
  SimilarityMatrix sim(2, 3, {0.0, 0.25, 0.5, 0.75, 1.0, 0.125});
  const MatrixFile f = similarity_matrix_file(sim);
  const SimilarityMatrix back = to_similarity(decode_matrix(encode_matrix(f)));
  CHECK(back.values() == sim.values());
  CHECK_THROWS_AS(attach_descriptors(*std::make_unique<Sequence>(), f), DataError);
}

TEST_CASE("trajectory text round-trips losslessly") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (int trial = 0; trial < 50; ++trial) {
    Sequence s;
    s.pose_dim = trial % 2 ? 3 : 2;
    double t = 0.0, d = 0.0;
    for (std::size_t i = 0; i < 20; ++i) {
      Frame f;
      f.frame_id = i;
      t += 0.1 + std::abs(u(rng)) * 1e-3;
      f.timestamp = t;
      f.pose = {u(rng), u(rng), s.pose_dim == 3 ? u(rng) : 0.0};
      if (!(trial == 3 && i == 4)) {
        d += std::abs(u(rng)) / 7.0;
        f.traversal_dist = d;
      }
      s.frames.push_back(f);
    }
    const std::string a = encode_trajectory(s);
    const Sequence back = decode_trajectory(a);
    REQUIRE(back.size() == s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      CHECK(back[i].timestamp == s[i].timestamp);
      CHECK(back[i].pose == s[i].pose);
      CHECK(back[i].traversal_dist == s[i].traversal_dist);
    }
    CHECK(encode_trajectory(back) == a);
  }
}

TEST_CASE("trajectory text rejects malformed rows") {
  CHECK_THROWS_AS(decode_trajectory(""), DataError);
  CHECK_THROWS_AS(decode_trajectory("id,t,x,y\n"), DataError);
  const std::string h = "frame_id,timestamp,x,y,traversal_dist\n";
  CHECK_NOTHROW(decode_trajectory(h + "0,0,1,2,0\n1,1,1,3,1\n"));
  CHECK_THROWS_AS(decode_trajectory(h + "0,0,1,2\n"), DataError);
  CHECK_THROWS_AS(decode_trajectory(h + "0,0,1,abc,0\n"), DataError);
  // timestamps must increase
  CHECK_THROWS_AS(decode_trajectory(h + "0,1,1,2,0\n1,1,1,3,1\n"), DataError);
  // ids consecutive from 0
  CHECK_THROWS_AS(decode_trajectory(h + "0,0,1,2,0\n2,1,1,3,1\n"), DataError);
}

TEST_CASE("config objects reject unknown fields by name") {
  try {
    ambiguity_from_json(Json{{"alpha", 0.9}, {"alfa", 1}});
    FAIL("expected a throw");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("alfa") != std::string::npos);
  }
  try {
    ambiguity_from_json(Json{{"alpha", "high"}});
    FAIL("expected a throw");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("alpha") != std::string::npos);
  }
  CHECK_THROWS_AS(ambiguity_from_json(Json{{"alpha", 1.5}}), ValidationError);
  const AmbiguityParams p = ambiguity_from_json(Json{{"seq_len", 3}});
  CHECK(p.seq_len == 3);
  CHECK(p.alpha == 0.9);
}

TEST_CASE("world and benchmark specs survive json") {
  WorldSpec w;
  w.layout = "custom";
  w.vertices = {{0, 0, 0}, {4, 0, 0}, {4, 3, 0}};
  w.segments = {{0, 1, 4}, {1, 2, 3}};
  w.map_route = {{0, true}, {1, true}};
  w.alias_groups = {{0, 1}};
  const Json j = to_json(w);
  CHECK(to_json(world_spec_from_json(j)) == j);

  const BenchmarkSpec b = desk_benchmark_spec(3);
  const Json bj = to_json(b);
  CHECK(to_json(benchmark_spec_from_json(bj)) == bj);
  Json broken = bj;
  broken["environments"][1]["count_po"] = -1;
  CHECK_THROWS_AS(benchmark_spec_from_json(broken), ValidationError);
}

TEST_CASE("localizer params json") {
  LocalizerParams p;
  p.sm.h = 3;
  p.pbu.w_u.reset();
  p.pbu.likelihood.kind = Likelihood::Kind::Identity;
  const Json j = to_json(p);
  CHECK(j["pbu"]["w_u"].is_null());
  const LocalizerParams q = localizer_params_from_json(j);
  CHECK(q.sm.h == 3);
  CHECK(!q.pbu.w_u);
  CHECK(q.pbu.likelihood.kind == Likelihood::Kind::Identity);
  CHECK(to_json(q) == j);
  CHECK_THROWS_AS(localizer_params_from_json(Json{{"pbu", {{"likelihood", {{"kind", "gauss"}}}}}}),
                  ValidationError);
}

TEST_CASE("benchmark dataset round-trips through disk") {
  const fs::path dir = scratch_dir("roundtrip");
  const GeneratedBenchmark b = generate_benchmark(small_spec(3, 2, 3, 2));
  const Manifest m = write_benchmark(b, dir);
  CHECK(m.counts.at("A_PLUS_P") == 2);
  CHECK(m.counts.at("P_ONLY") == 3);
  CHECK(m.counts.at("A_ONLY") == 2);

  const Dataset ds = load_dataset(dir);
  REQUIRE(ds.cases.size() == b.cases.size());
  CHECK(encode_manifest(ds.manifest) == read_file(dir / "manifest.json"));
  for (std::size_t i = 0; i < ds.cases.size(); ++i) {
    const TestCase& a = b.cases[i];
    const TestCase& c = ds.cases[i];
    CHECK(c.id == a.id);
    CHECK(c.label == a.label);
    CHECK(c.correspondence.pi == a.correspondence.pi);
    CHECK(encode_trajectory(*c.test) == encode_trajectory(*a.test));
    CHECK(encode_matrix(descriptor_matrix(*c.test)) == encode_matrix(descriptor_matrix(*a.test)));
    CHECK(encode_matrix(descriptor_matrix(*c.map)) == encode_matrix(descriptor_matrix(*a.map)));
  }

  // write -> read -> write stays byte-identical for every file
  const fs::path dir2 = scratch_dir("roundtrip2");
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const fs::path rel = fs::relative(entry.path(), dir);
    const std::string bytes = read_file(entry.path());
    std::string again;
    if (rel.extension() == ".csv") {
      again = encode_trajectory(decode_trajectory(bytes));
    } else if (rel.extension() == ".tbds") {
      again = encode_matrix(decode_matrix(bytes));
    } else if (rel.filename() == "manifest.json") {
      again = encode_manifest(decode_manifest(bytes));
    } else {
      again = to_json(world_spec_from_json(Json::parse(bytes))).dump(2) + "\n";
    }
    CHECK_MESSAGE(again == bytes, rel.string());
  }
}

TEST_CASE("manifest count validation rejects tampering") {
  const fs::path dir = scratch_dir("tamper");
  write_benchmark(generate_benchmark(small_spec(4, 1, 2, 1)), dir);
  Json j = Json::parse(read_file(dir / "manifest.json"));
  CHECK_NOTHROW(manifest_from_json(j));
  j["counts"]["P_ONLY"] = 3;
  CHECK_THROWS_AS(manifest_from_json(j), DataError);
  j["counts"]["P_ONLY"] = 2;
  j["schema_version"] = 2;
  CHECK_THROWS_AS(manifest_from_json(j), DataError);
  j["schema_version"] = 1;
  j["cases"][0]["environment"] = "nowhere";
  CHECK_THROWS_AS(manifest_from_json(j), DataError);
}

TEST_CASE("dataset refs must resolve") {
  const fs::path dir = scratch_dir("refs");
  const Manifest m = write_benchmark(generate_benchmark(small_spec(5, 0, 2, 0)), dir);
  fs::remove(dir / m.cases[1].test_ref.descriptors);
  CHECK_THROWS_AS(load_dataset(dir), DataError);
}

TEST_CASE("curated manifest must carry the published totals") {
  Manifest m;
  m.name = kCuratedName;
  m.environments = {{"a", "indoor", ""}};
  m.recount();
  CHECK_THROWS_AS(manifest_from_json(to_json(m)), DataError);

  std::size_t envs = 0, ap = 0, po = 0, ao = 0;
  for (const CuratedRow& r : curated_counts()) {
    envs += r.environments;
    ap += r.ap;
    po += r.po;
    ao += r.ao;
  }
  CHECK(envs == 25);
  CHECK(ap == 51);
  CHECK(po == 384);
  CHECK(ao == 194);
}

TEST_CASE("environment count table") {
  Manifest m;
  m.environments = {{"x", "indoor", ""}, {"y", "outdoor", ""}};
  ManifestCase c;
  c.environment = "y";
  c.label = CaseKind::AOnly;
  m.cases.push_back(c);
  c.environment = "x";
  c.label = CaseKind::APlusP;
  m.cases.push_back(c);
  const auto rows = count_by_environment(m);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].ap == 1);
  CHECK(rows[1].ao == 1);
  const std::string t = counts_table(rows);
  CHECK(t.find("Total") != std::string::npos);
  CHECK(t.find("1 indoor, 1 outdoor") != std::string::npos);
}
