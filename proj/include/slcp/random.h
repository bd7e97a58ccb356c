#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace slcp {

// 64-bit Mersenne Twister seeded through std::seed_seq. Both are fully
// specified by the standard, so streams are identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  // Independent stream derived from a base seed and stream coordinates, e.g.
  // (seed, cell index) or (seed, K, sigma, replication).
  Rng(std::uint64_t seed, std::initializer_list<std::uint64_t> stream);

  // Uniform on the open interval (0, 1) with 53 random bits.
  double Uniform();
  double Uniform(double lo, double hi);
  std::uint64_t Bits() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

// Stable 64-bit encoding of a double for use as a stream coordinate.
std::uint64_t StreamKey(double value);

}  // namespace slcp
