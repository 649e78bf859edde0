#pragma once

#include <array>
#include <cstdint>
#include <random>

namespace nem {

/// Philox4x32-10 counter-based generator: a pure function of (key, counter).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Standard normal addressed by (seed, tensor order, equation, flat offset).
///
/// Entries at offsets 2j and 2j+1 share one Box-Muller draw (cosine and sine branch), so
/// any entry can be produced independently of generation order or thread count.
double coupling_normal(std::uint64_t seed, int order, std::uint64_t equation,
                       std::uint64_t flat);

/// Fills out[0..count) with the entries at flat offsets begin..begin+count.
void coupling_normals(std::uint64_t seed, int order, std::uint64_t equation, std::uint64_t begin,
                      std::uint64_t count, double* out);

/// SplitMix64 finalizer; used to derive child seeds from (master, index) tuples.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0);

/// Sequential generator for algorithm-side randomness (start points, Lanczos starts, SGD).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}
  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  std::uint64_t bits() { return engine_(); }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace nem
