#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace topobench {

std::uint64_t splitmix64(std::uint64_t x);

// Seedable generator with a fully specified output mapping.
//
// The bit stream is std::mt19937_64, whose output sequence is fixed by the
// standard. Every derived quantity (uniform doubles, bounded integers,
// normals, shuffles) is computed here rather than through the
// implementation-defined <random> distributions, so a seed reproduces the
// same values with any conforming standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64();
  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform();
  double uniform(double lo, double hi);
  // Uniform on [0, n); n must be positive.
  std::size_t below(std::size_t n);
  // Standard normal via Box-Muller; the second variate is cached.
  double normal();

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = below(i);
      std::swap(items[i - 1], items[j]);
    }
  }

  // Independent child stream; same (seed, stream) always gives the same child.
  Rng fork(std::uint64_t stream) const;

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::optional<double> spare_normal_;
};

}  // namespace topobench
