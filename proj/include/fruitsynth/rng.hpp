#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace fruitsynth {

/// Derives an independent child seed from a master seed and a stream index.
std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index);

/// Seeded random source. The engine is std::mt19937_64, whose output sequence
/// is fixed by the standard; the mapping to integers and reals is done here
/// rather than through <random> distributions, whose algorithms are
/// implementation-defined, so equal seeds give equal draws on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  /// Stream for child `index`; does not advance this generator.
  Rng child(std::uint64_t index) const { return Rng(mix_seed(seed_, index)); }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform integer in the closed range [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  /// Uniform real in [0, 1) with 53 bits of resolution.
  double uniform01();

  /// Uniform real in [lo, hi]; returns lo when lo == hi.
  double uniform_real(double lo, double hi);

  bool bernoulli(double p) { return uniform01() < p; }

  std::size_t index(std::size_t n) {
    return static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(n) - 1));
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace fruitsynth
