#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "topobench/core/error.hpp"
#include "topobench/io.hpp"

namespace topobench {

namespace {

constexpr char kMagic[4] = {'T', 'B', 'D', 'S'};
constexpr std::uint8_t kDtypeF32 = 1;
constexpr std::uint8_t kLittleEndian = 1;

template <typename T>
void put_le(std::string& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xFF));
  }
}

template <typename T>
T get_le(const std::string& in, std::size_t at) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
  }
  return static_cast<T>(v);
}

std::string shortest(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double parse_double(const std::string& field, std::size_t line, const char* name) {
  double v = 0.0;
  const char* b = field.data();
  const char* e = b + field.size();
  const auto r = std::from_chars(b, e, v);
  if (r.ec != std::errc() || r.ptr != e) {
    throw DataError("trajectory line " + std::to_string(line) + ": bad " + name + " '" + field +
                    "'");
  }
  return v;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

std::string encode_matrix(const MatrixFile& m) {
  if (m.data.size() != m.rows * m.cols) throw ValidationError("matrix payload does not match shape");
  std::string out;
  out.reserve(kDescriptorHeaderBytes + m.data.size() * 4);
  out.append(kMagic, 4);
  put_le<std::uint32_t>(out, kDescriptorVersion);
  put_le<std::uint64_t>(out, m.rows);
  put_le<std::uint32_t>(out, m.cols);
  out.push_back(static_cast<char>(kDtypeF32));
  out.push_back(static_cast<char>(kLittleEndian));
  out.push_back(static_cast<char>(m.kind));
  out.push_back('\0');
  for (float f : m.data) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(f));
  return out;
}

MatrixFile decode_matrix(const std::string& bytes) {
  if (bytes.size() < kDescriptorHeaderBytes) throw DataError("descriptor file: truncated header");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw DataError("descriptor file: bad magic");
  if (get_le<std::uint32_t>(bytes, 4) != kDescriptorVersion) {
    throw DataError("descriptor file: unsupported version");
  }
  MatrixFile m;
  m.rows = get_le<std::uint64_t>(bytes, 8);
  m.cols = get_le<std::uint32_t>(bytes, 16);
  if (static_cast<std::uint8_t>(bytes[20]) != kDtypeF32) {
    throw DataError("descriptor file: dtype must be float32");
  }
  if (static_cast<std::uint8_t>(bytes[21]) != kLittleEndian) {
    throw DataError("descriptor file: payload must be little-endian");
  }
  const auto kind = static_cast<std::uint8_t>(bytes[22]);
  if (kind > 1) throw DataError("descriptor file: unknown matrix kind");
  m.kind = static_cast<MatrixKind>(kind);
  if (m.cols == 0 && m.rows > 0) throw DataError("descriptor file: zero dimension");
  const std::uint64_t count = m.rows * m.cols;
  if (m.cols != 0 && count / m.cols != m.rows) throw DataError("descriptor file: shape overflow");
  if (bytes.size() - kDescriptorHeaderBytes != count * 4) {
    throw DataError("descriptor file: payload length " +
                    std::to_string(bytes.size() - kDescriptorHeaderBytes) + " != " +
                    std::to_string(count * 4));
  }
  m.data.resize(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    m.data[i] = std::bit_cast<float>(get_le<std::uint32_t>(bytes, kDescriptorHeaderBytes + 4 * i));
    if (!std::isfinite(m.data[i])) throw DataError("descriptor file: non-finite value");
  }
  if (m.kind == MatrixKind::Descriptors) {
    for (std::uint64_t r = 0; r < m.rows; ++r) {
      double n2 = 0.0;
      for (std::uint32_t c = 0; c < m.cols; ++c) {
        const double v = m.data[r * m.cols + c];
        n2 += v * v;
      }
      if (std::abs(std::sqrt(n2) - 1.0) > 1e-5) {
        throw DataError("descriptor file: row " + std::to_string(r) + " is not unit norm");
      }
    }
  }
  return m;
}

MatrixFile descriptor_matrix(const Sequence& s) {
  MatrixFile m;
  m.kind = MatrixKind::Descriptors;
  m.rows = s.size();
  m.cols = static_cast<std::uint32_t>(s.empty() ? 0 : s[0].descriptor.size());
  m.data.reserve(m.rows * m.cols);
  for (const Frame& f : s.frames) {
    if (f.descriptor.size() != m.cols) throw ValidationError("descriptor dimensions differ");
    m.data.insert(m.data.end(), f.descriptor.begin(), f.descriptor.end());
  }
  return m;
}

MatrixFile similarity_matrix_file(const SimilarityMatrix& sim) {
  MatrixFile m;
  m.kind = MatrixKind::Similarity;
  m.rows = sim.query_count();
  m.cols = static_cast<std::uint32_t>(sim.ref_count());
  m.data.reserve(sim.values().size());
  for (double v : sim.values()) m.data.push_back(static_cast<float>(v));
  return m;
}

SimilarityMatrix to_similarity(const MatrixFile& m) {
  if (m.kind != MatrixKind::Similarity) throw DataError("file holds descriptors, not similarities");
  return SimilarityMatrix(m.rows, m.cols, std::vector<double>(m.data.begin(), m.data.end()));
}

void attach_descriptors(Sequence& s, const MatrixFile& m) {
  if (m.kind != MatrixKind::Descriptors) throw DataError("file holds similarities, not descriptors");
  if (m.rows != s.size()) {
    throw DataError("descriptor rows " + std::to_string(m.rows) + " != frames " +
                    std::to_string(s.size()));
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    s.frames[i].descriptor.assign(m.data.begin() + i * m.cols, m.data.begin() + (i + 1) * m.cols);
  }
}

std::string encode_trajectory(const Sequence& s) {
  std::ostringstream os;
  const bool z = s.pose_dim == 3;
  os << "frame_id,timestamp,x,y," << (z ? "z," : "") << "traversal_dist\n";
  for (const Frame& f : s.frames) {
    os << f.frame_id << ',' << shortest(f.timestamp) << ',' << shortest(f.pose.x) << ','
       << shortest(f.pose.y) << ',';
    if (z) os << shortest(f.pose.z) << ',';
    if (f.traversal_dist) os << shortest(*f.traversal_dist);
    os << '\n';
  }
  return os.str();
}

Sequence decode_trajectory(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw DataError("trajectory: empty file");
  const auto header = split_csv(line);
  bool z = false;
  if (header == std::vector<std::string>{"frame_id", "timestamp", "x", "y", "z", "traversal_dist"}) {
    z = true;
  } else if (header !=
             std::vector<std::string>{"frame_id", "timestamp", "x", "y", "traversal_dist"}) {
    throw DataError("trajectory: unexpected header '" + line + "'");
  }
  Sequence s;
  s.pose_dim = z ? 3 : 2;
  std::size_t n = 1;
  while (std::getline(is, line)) {
    ++n;
    if (line.empty() || line == "\r") continue;
    const auto f = split_csv(line);
    if (f.size() != header.size()) {
      throw DataError("trajectory line " + std::to_string(n) + ": wrong field count");
    }
    Frame fr;
    std::size_t id = 0;
    const auto r = std::from_chars(f[0].data(), f[0].data() + f[0].size(), id);
    if (r.ec != std::errc() || r.ptr != f[0].data() + f[0].size()) {
      throw DataError("trajectory line " + std::to_string(n) + ": bad frame_id");
    }
    fr.frame_id = id;
    fr.timestamp = parse_double(f[1], n, "timestamp");
    fr.pose.x = parse_double(f[2], n, "x");
    fr.pose.y = parse_double(f[3], n, "y");
    if (z) fr.pose.z = parse_double(f[4], n, "z");
    const std::string& t = f.back();
    if (!t.empty()) fr.traversal_dist = parse_double(t, n, "traversal_dist");
    s.frames.push_back(std::move(fr));
  }
  s.validate();
  return s;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot open " + p.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const fs::path& p, const std::string& bytes) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  fs::path tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + p.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("write failed for " + p.string());
  }
  fs::rename(tmp, p);
}

}  // namespace topobench
