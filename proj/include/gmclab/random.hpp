#pragma once

#include <cstdint>
#include <random>

namespace gmclab {

// Splitmix64 finalizer. A bijection on 64-bit words.
std::uint64_t mix64(std::uint64_t x);

// Seed of the index-th substream of a master seed:
//   seed_stream(s, i) = mix64(s + (i + 1) * 0x9E3779B97F4A7C15)
// For a fixed master the map i -> seed is injective, hence collision-free.
std::uint64_t seed_stream(std::uint64_t master_seed, std::uint64_t index);

// Deterministic generator. Every variate is derived from the raw 64-bit
// output of mt19937_64 with code in this library, so the streams do not
// depend on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Uniform on (0, 1].
  double uniform_open_low() { return 1.0 - uniform(); }
  // Standard normal, Marsaglia polar method.
  double normal();
  // Poisson variate. Inversion for small means, PTRS rejection otherwise.
  std::uint64_t poisson(double mean);
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace gmclab
